use std::collections::{BTreeMap, BTreeSet};

use super::expr::{integer, rational, Expr, Factor, Func, Monomial, Rational};
use super::{ExprError, Sym};

/// Exact partial derivative with respect to `s`.
///
/// `d|a|` is produced as `a * |a|^-1 * a'`, so evaluating it at `a = 0`
/// raises a division-by-zero error instead of yielding a value.
pub fn differentiate(e: &Expr, s: &Sym) -> Expr {
    let mut out = Expr::zero();
    for (mono, coef) in e.terms() {
        let factors = mono.factors();
        for (i, (factor, k)) in factors.iter().enumerate() {
            let inner = factor_derivative(factor, s);
            if inner.is_zero() {
                continue;
            }
            // k * f^(k-1) * f' * prod_{j != i} f_j^k_j
            let mut rest = Monomial::single(factor.clone(), k - 1);
            for (j, (g, kj)) in factors.iter().enumerate() {
                if j != i {
                    rest = rest.mul(&Monomial::single(g.clone(), *kj));
                }
            }
            let c = coef * integer(i64::from(*k));
            out = out + inner.mul_term(&c, &rest);
        }
    }
    out
}

fn factor_derivative(factor: &Factor, s: &Sym) -> Expr {
    match factor {
        Factor::Sym(x) if x == s => Expr::one(),
        Factor::Sym(_) => Expr::zero(),
        Factor::Group(inner) => differentiate(inner, s),
        Factor::Apply(func, args) => {
            if !args.iter().any(|a| a.contains(s)) {
                return Expr::zero();
            }
            let a = &args[0];
            let da = differentiate(a, s);
            let app = |f: Func, x: &Expr| Expr::apply(f, vec![x.clone()]).expect("unary");
            match func {
                Func::Sin => &app(Func::Cos, a) * &da,
                Func::Cos => -(&app(Func::Sin, a) * &da),
                Func::Tan => {
                    let t = app(Func::Tan, a);
                    &(Expr::one() + &t * &t) * &da
                }
                Func::Exp => &app(Func::Exp, a) * &da,
                Func::Log => &da * &reciprocal(a),
                Func::Sqrt => (&da * &reciprocal(&app(Func::Sqrt, a))).scale(&rational(1, 2)),
                Func::Abs => &(&da * a) * &reciprocal(&app(Func::Abs, a)),
                Func::Pow => {
                    let b = &args[1];
                    let db = differentiate(b, s);
                    let whole = Expr::apply(Func::Pow, args.clone()).expect("binary");
                    let log_a = app(Func::Log, a);
                    let inner = &db * &log_a + &(b * &da) * &reciprocal(a);
                    &whole * &inner
                }
            }
        }
    }
}

// A non-constant argument never normalizes to zero, so the reciprocal exists.
fn reciprocal(e: &Expr) -> Expr {
    e.reciprocal().expect("nonzero symbolic expression")
}

/// Simultaneous substitution after checking the rules are acyclic.
pub fn substitute(e: &Expr, rules: &BTreeMap<Sym, Expr>) -> Result<Expr, ExprError> {
    check_acyclic(rules)?;
    substitute_unchecked(e, rules)
}

fn check_acyclic(rules: &BTreeMap<Sym, Expr>) -> Result<(), ExprError> {
    let deps: BTreeMap<&Sym, BTreeSet<Sym>> = rules
        .iter()
        .map(|(k, v)| {
            let s = v.symbols().into_iter().filter(|x| rules.contains_key(x)).collect();
            (k, s)
        })
        .collect();
    for start in rules.keys() {
        let mut stack: Vec<Sym> = deps[start].iter().cloned().collect();
        let mut seen = BTreeSet::new();
        while let Some(next) = stack.pop() {
            if &next == start {
                return Err(ExprError::CyclicSubstitution(start.clone()));
            }
            if seen.insert(next.clone()) {
                stack.extend(deps[&next].iter().cloned());
            }
        }
    }
    Ok(())
}

/// Simultaneous substitution; no cycle check. Errors only on a division by
/// zero created by the replacement (e.g. `1/x` with `x -> 0`).
pub(crate) fn substitute_unchecked(e: &Expr, rules: &BTreeMap<Sym, Expr>) -> Result<Expr, ExprError> {
    if rules.is_empty() {
        return Ok(e.clone());
    }
    let mut out = Expr::zero();
    for (mono, coef) in e.terms() {
        if !mono_mentions(mono, rules) {
            out = out + Expr::term(coef.clone(), mono.clone());
            continue;
        }
        let mut term = Expr::constant(coef.clone());
        for (factor, k) in mono.factors() {
            let base = match factor {
                Factor::Sym(s) => match rules.get(s) {
                    Some(r) => r.clone(),
                    None => Expr::sym(s.clone()),
                },
                Factor::Apply(func, args) => {
                    let args = args
                        .iter()
                        .map(|a| substitute_unchecked(a, rules))
                        .collect::<Result<Vec<_>, _>>()?;
                    Expr::apply(*func, args)?
                }
                Factor::Group(inner) => substitute_unchecked(inner, rules)?,
            };
            term = &term * &base.powi(*k)?;
            if term.is_zero() {
                break;
            }
        }
        out = out + term;
    }
    Ok(out)
}

fn mono_mentions(mono: &Monomial, rules: &BTreeMap<Sym, Expr>) -> bool {
    mono.factors().iter().any(|(f, _)| match f {
        Factor::Sym(s) => rules.contains_key(s),
        Factor::Apply(_, args) => args.iter().any(|a| rules.keys().any(|k| a.contains(k))),
        Factor::Group(inner) => rules.keys().any(|k| inner.contains(k)),
    })
}

/// Exact value of `e` when every symbol is replaced by a rational.
pub fn evaluate_exact(e: &Expr, values: &BTreeMap<Sym, Rational>) -> Result<Rational, ExprError> {
    let rules = values
        .iter()
        .map(|(k, v)| (k.clone(), Expr::constant(v.clone())))
        .collect();
    let reduced = substitute_unchecked(e, &rules)?;
    reduced.as_constant().ok_or_else(|| {
        let missing = reduced.symbols().into_iter().next();
        match missing {
            Some(s) => ExprError::Unbound(s),
            None => ExprError::Domain(format!("`{reduced}` has no exact rational value")),
        }
    })
}
