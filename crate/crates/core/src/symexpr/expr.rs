use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{ExprError, Sym};

pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(value: i64) -> Rational {
    BigRational::from_integer(BigInt::from(value))
}

/// Closed set of function tags an expression may apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Pow,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Pow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Pow => "pow",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

/// One multiplicative factor of a term.
///
/// `Group` holds a primitive multi-term sum and only ever appears with a
/// negative exponent; positive powers of sums are always expanded.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    Sym(Sym),
    Apply(Func, Vec<Expr>),
    Group(Expr),
}

impl Factor {
    pub(super) fn has_coordinate(&self) -> bool {
        match self {
            Factor::Sym(s) => s.kind().is_coordinate(),
            Factor::Apply(_, args) => args.iter().any(|a| !a.is_parameter_only()),
            Factor::Group(e) => !e.is_parameter_only(),
        }
    }
}

/// Product of factor powers, sorted by factor, with nonzero exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    factors: Vec<(Factor, i32)>,
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial::default()
    }

    pub fn single(factor: Factor, exponent: i32) -> Monomial {
        if exponent == 0 {
            return Monomial::one();
        }
        Monomial {
            factors: vec![(factor, exponent)],
        }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(Factor, i32)] {
        &self.factors
    }

    /// Total exponent over factors that involve coordinates.
    pub fn degree(&self) -> i64 {
        self.factors
            .iter()
            .filter(|(f, _)| f.has_coordinate())
            .map(|(_, k)| i64::from(*k))
            .sum()
    }

    /// If this monomial is exactly one symbol to the first power, return it.
    pub fn as_symbol(&self) -> Option<&Sym> {
        match self.factors.as_slice() {
            [(Factor::Sym(s), 1)] => Some(s),
            _ => None,
        }
    }

    pub(crate) fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            let (a, ka) = &self.factors[i];
            let (b, kb) = &other.factors[j];
            match a.cmp(b) {
                Ordering::Less => {
                    out.push((a.clone(), *ka));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b.clone(), *kb));
                    j += 1;
                }
                Ordering::Equal => {
                    if ka + kb != 0 {
                        out.push((a.clone(), ka + kb));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.factors[i..]);
        out.extend_from_slice(&other.factors[j..]);
        Monomial { factors: out }
    }

    pub(crate) fn pow(&self, k: i32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial {
            factors: self.factors.iter().map(|(f, e)| (f.clone(), e * k)).collect(),
        }
    }

    // At most one group factor, and only to the power -1.
    fn is_settled(&self) -> bool {
        let mut groups = self.factors.iter().filter(|(f, _)| matches!(f, Factor::Group(_)));
        match (groups.next(), groups.next()) {
            (None, _) => true,
            (Some((_, k)), None) => *k == -1,
            _ => false,
        }
    }
}

impl Ord for Monomial {
    // Non-constant terms by ascending coordinate degree, then lexicographic
    // over factors; the constant term sorts last.
    fn cmp(&self, other: &Self) -> Ordering {
        self.is_one()
            .cmp(&other.is_one())
            .then_with(|| self.degree().cmp(&other.degree()))
            .then_with(|| self.factors.cmp(&other.factors))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical sum of rational-coefficient terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Expr {
    terms: BTreeMap<Monomial, Rational>,
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::default()
    }

    pub fn one() -> Expr {
        Expr::constant(Rational::one())
    }

    pub fn constant(value: Rational) -> Expr {
        Expr::term(value, Monomial::one())
    }

    pub fn int(value: i64) -> Expr {
        Expr::constant(integer(value))
    }

    pub fn sym(sym: Sym) -> Expr {
        Expr::term(Rational::one(), Monomial::single(Factor::Sym(sym), 1))
    }

    /// A single term. The monomial must not carry positive group powers.
    pub(crate) fn term(coef: Rational, mono: Monomial) -> Expr {
        let mut terms = BTreeMap::new();
        if !coef.is_zero() {
            terms.insert(mono, coef);
        }
        Expr { terms }
    }

    fn is_one_expr(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.as_constant()
            .filter(|c| c.is_integer())
            .and_then(|c| c.to_integer().to_i64())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of the first term in canonical order.
    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.values().next()
    }

    pub(crate) fn add_term(&mut self, mono: Monomial, coef: Rational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(c) => {
                *c += coef;
                if c.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, coef);
            }
        }
    }

    pub fn scale(&self, factor: &Rational) -> Expr {
        if factor.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * factor))
                .collect(),
        }
    }

    /// Multiply by `coef * mono`, expanding any positive group powers that result.
    pub(crate) fn mul_term(&self, coef: &Rational, mono: &Monomial) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let product = m.mul(mono);
            let c = c * coef;
            if product.is_settled() {
                out.add_term(product, c);
            } else {
                out = out + settle(c, product);
            }
        }
        out
    }

    /// Integer power. Negative powers of sums become group factors.
    pub fn powi(&self, k: i32) -> Result<Expr, ExprError> {
        if k == 0 {
            return Ok(Expr::one());
        }
        if k < 0 {
            return self.reciprocal()?.powi(-k);
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().expect("one term");
            let mono = m.pow(k);
            let coef = num_traits::pow::pow(c.clone(), k as usize);
            return Ok(settle(coef, mono));
        }
        let mut result = Expr::one();
        let mut base = self.clone();
        let mut k = k as u32;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    pub fn reciprocal(&self) -> Result<Expr, ExprError> {
        match self.terms.len() {
            0 => Err(ExprError::DivisionByZero),
            1 => {
                let (m, c) = self.terms.iter().next().expect("one term");
                let mono = m.pow(-1);
                let coef = c.recip();
                Ok(settle(coef, mono))
            }
            _ => {
                // 1/E = 1/(c * g * P) with g the common monomial and P primitive.
                let common = self.common_monomial();
                let reduced = self.mul_term(&Rational::one(), &common.pow(-1));
                let content = reduced.content();
                let primitive = reduced.scale(&content.recip());
                let mono = common.pow(-1).mul(&Monomial::single(Factor::Group(primitive), -1));
                Ok(Expr::term(content.recip(), mono))
            }
        }
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr, ExprError> {
        Ok(self * &other.reciprocal()?)
    }

    /// Positive rational `c` such that `self / c` has coprime integer
    /// coefficients, signed to make the leading one positive.
    fn content(&self) -> Rational {
        let (numer, denom) = self.terms.values().fold((BigInt::zero(), BigInt::one()), |(n, d), c| {
            (n.gcd(c.numer()), d.lcm(c.denom()))
        });
        let c = Rational::new(numer, denom);
        if self.leading_coefficient().is_some_and(|l| l.is_negative()) {
            -c
        } else {
            c
        }
    }

    /// Largest monomial dividing every term (exponents may be negative).
    fn common_monomial(&self) -> Monomial {
        let all: BTreeSet<&Factor> = self
            .terms
            .keys()
            .flat_map(|m| m.factors.iter().map(|(f, _)| f))
            .collect();
        let factors = all
            .into_iter()
            .filter_map(|f| {
                // Absent factors count as exponent 0.
                let min = self
                    .terms
                    .keys()
                    .map(|m| {
                        m.factors
                            .iter()
                            .find(|(g, _)| g == f)
                            .map_or(0, |(_, k)| *k)
                    })
                    .min()?;
                (min != 0).then(|| (f.clone(), min))
            })
            .collect();
        Monomial { factors }
    }

    /// Function application with exact constant folding.
    pub fn apply(func: Func, args: Vec<Expr>) -> Result<Expr, ExprError> {
        if args.len() != func.arity() {
            return Err(ExprError::Arity {
                func: func.name(),
                expected: func.arity(),
                found: args.len(),
            });
        }
        if func == Func::Pow {
            return Expr::pow(&args[0], &args[1]);
        }
        if let Some(c) = args[0].as_constant() {
            let folded = match func {
                Func::Sin | Func::Tan if c.is_zero() => Some(Rational::zero()),
                Func::Cos | Func::Exp if c.is_zero() => Some(Rational::one()),
                Func::Log if c.is_one() => Some(Rational::zero()),
                Func::Abs => Some(c.abs()),
                Func::Sqrt => exact_sqrt(&c),
                _ => None,
            };
            if let Some(v) = folded {
                return Ok(Expr::constant(v));
            }
        }
        Ok(Expr::term(
            Rational::one(),
            Monomial::single(Factor::Apply(func, args), 1),
        ))
    }

    /// `base ^ exponent`; integer exponents are expanded, others stay symbolic.
    pub fn pow(base: &Expr, exponent: &Expr) -> Result<Expr, ExprError> {
        if let Some(c) = exponent.as_constant() {
            if c.is_integer() {
                let k = c
                    .to_integer()
                    .to_i32()
                    .ok_or_else(|| ExprError::Domain(format!("exponent {c} out of range")))?;
                return base.powi(k);
            }
        }
        if base.is_zero() {
            if let Some(c) = exponent.as_constant() {
                if c.is_positive() {
                    return Ok(Expr::zero());
                }
            }
        }
        Ok(Expr::term(
            Rational::one(),
            Monomial::single(Factor::Apply(Func::Pow, vec![base.clone(), exponent.clone()]), 1),
        ))
    }

    /// All symbols occurring anywhere, including inside function arguments.
    pub fn symbols(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Sym>) {
        for m in self.terms.keys() {
            for (f, _) in &m.factors {
                match f {
                    Factor::Sym(s) => {
                        out.insert(s.clone());
                    }
                    Factor::Apply(_, args) => args.iter().for_each(|a| a.collect_symbols(out)),
                    Factor::Group(e) => e.collect_symbols(out),
                }
            }
        }
    }

    pub fn contains(&self, sym: &Sym) -> bool {
        self.terms.keys().any(|m| {
            m.factors.iter().any(|(f, _)| match f {
                Factor::Sym(s) => s == sym,
                Factor::Apply(_, args) => args.iter().any(|a| a.contains(sym)),
                Factor::Group(e) => e.contains(sym),
            })
        })
    }

    /// True when no coordinate symbol occurs (only constants and parameters).
    pub fn is_parameter_only(&self) -> bool {
        self.terms.keys().all(|m| {
            m.factors.iter().all(|(f, _)| match f {
                Factor::Sym(s) => s.is_parameter(),
                Factor::Apply(_, args) => args.iter().all(Expr::is_parameter_only),
                Factor::Group(e) => e.is_parameter_only(),
            })
        })
    }

    /// Rebuild the canonical form from scratch.
    pub fn normalize(&self) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let mut term = Expr::constant(c.clone());
            for (f, k) in &m.factors {
                let base = match f {
                    Factor::Sym(s) => Expr::sym(s.clone()),
                    Factor::Apply(func, args) => {
                        Expr::apply(*func, args.iter().map(Expr::normalize).collect())
                            .expect("canonical application")
                    }
                    Factor::Group(e) => e.normalize(),
                };
                term = &term * &base.powi(*k).expect("canonical power");
            }
            out = out + term;
        }
        out
    }

    /// Divide through so that the leading rational coefficient is 1.
    pub fn monic(&self) -> Expr {
        match self.leading_coefficient() {
            Some(c) => self.scale(&c.recip()),
            None => Expr::zero(),
        }
    }
}

// Positive group powers are expanded; negative ones are multiplied out into a
// single denominator so each quotient has one canonical form.
fn settle(coef: Rational, mono: Monomial) -> Expr {
    if mono.is_settled() {
        return Expr::term(coef, mono);
    }
    let mut rest = Vec::new();
    let mut numer = Vec::new();
    let mut denom = Expr::one();
    for (f, k) in mono.factors {
        match f {
            Factor::Group(e) if k > 0 => numer.push((e, k)),
            Factor::Group(e) => denom = &denom * &e.powi(-k).expect("positive power"),
            other => rest.push((other, k)),
        }
    }
    let mut out = Expr::term(coef, Monomial { factors: rest });
    for (e, k) in numer {
        out = &out * &e.powi(k).expect("positive power");
    }
    if !denom.is_one_expr() {
        out = &out * &denom.reciprocal().expect("nonzero denominator");
    }
    out
}

fn exact_sqrt(c: &Rational) -> Option<Rational> {
    if c.is_negative() {
        return None;
    }
    let n = c.numer().sqrt();
    let d = c.denom().sqrt();
    (&n * &n == *c.numer() && &d * &d == *c.denom()).then(|| BigRational::new(n, d))
}

impl Add for Expr {
    type Output = Expr;
    fn add(mut self, rhs: Expr) -> Expr {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.clone() + rhs.clone()
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + (-rhs)
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.clone() - rhs.clone()
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        rhs.terms.iter().fold(Expr::zero(), |acc, (m, c)| Add::add(acc, self.mul_term(c, m)))
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        &self * &rhs
    }
}

impl From<Sym> for Expr {
    fn from(sym: Sym) -> Expr {
        Expr::sym(sym)
    }
}

impl From<Rational> for Expr {
    fn from(value: Rational) -> Expr {
        Expr::constant(value)
    }
}

impl From<i64> for Expr {
    fn from(value: i64) -> Expr {
        Expr::int(value)
    }
}
