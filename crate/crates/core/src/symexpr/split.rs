use std::collections::{BTreeMap, HashMap};

use super::expr::{Expr, Factor, Monomial};
use super::Sym;

/// Splits expressions against a fixed coordinate list.
#[derive(Clone, Debug)]
pub struct LinearSplitter {
    index: HashMap<Sym, usize>,
}

impl LinearSplitter {
    pub fn new(coords: &[Sym]) -> LinearSplitter {
        LinearSplitter {
            index: coords.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect(),
        }
    }

    pub fn position(&self, sym: &Sym) -> Option<usize> {
        self.index.get(sym).copied()
    }

    /// `e = row . coords + residual`, with `row` holding every term that is
    /// one coordinate to the first power times a parameter-only coefficient.
    pub fn split(&self, e: &Expr) -> (BTreeMap<usize, Expr>, Expr) {
        let mut row: BTreeMap<usize, Expr> = BTreeMap::new();
        let mut residual = Expr::zero();
        for (mono, coef) in e.terms() {
            match self.linear_part(mono) {
                Some((col, rest)) => {
                    let entry = row.entry(col).or_default();
                    *entry = std::mem::take(entry) + Expr::term(coef.clone(), rest);
                }
                None => residual.add_term(mono.clone(), coef.clone()),
            }
        }
        row.retain(|_, c| !c.is_zero());
        (row, residual)
    }

    fn linear_part(&self, mono: &Monomial) -> Option<(usize, Monomial)> {
        let mut found = None;
        let mut rest = Monomial::one();
        for (factor, k) in mono.factors() {
            match factor {
                Factor::Sym(s) if s.is_parameter() => {
                    rest = rest.mul(&Monomial::single(factor.clone(), *k));
                }
                Factor::Sym(s) => {
                    let col = self.position(s)?;
                    if *k != 1 || found.is_some() {
                        return None;
                    }
                    found = Some(col);
                }
                Factor::Apply(_, args) if args.iter().all(Expr::is_parameter_only) => {
                    rest = rest.mul(&Monomial::single(factor.clone(), *k));
                }
                Factor::Group(inner) if inner.is_parameter_only() => {
                    rest = rest.mul(&Monomial::single(factor.clone(), *k));
                }
                _ => return None,
            }
        }
        found.map(|col| (col, rest))
    }
}

/// One-shot form of [`LinearSplitter::split`].
pub fn linear_split(e: &Expr, coords: &[Sym]) -> (BTreeMap<usize, Expr>, Expr) {
    LinearSplitter::new(coords).split(e)
}

/// True iff `a = lambda * b` for some nonzero rational `lambda`.
pub fn equal_mod_scale(a: &Expr, b: &Expr) -> bool {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => return true,
        (true, false) | (false, true) => return false,
        _ => {}
    }
    if a.num_terms() != b.num_terms() {
        return false;
    }
    let mut ratio = None;
    for ((ma, ca), (mb, cb)) in a.terms().zip(b.terms()) {
        if ma != mb {
            return false;
        }
        let r = ca / cb;
        match &ratio {
            None => ratio = Some(r),
            Some(prev) if *prev != r => return false,
            _ => {}
        }
    }
    ratio.is_some()
}

#[cfg(test)]
mod tests {
    use super::super::parse::{parse_expr, SymbolTable};
    use super::*;

    fn p(text: &str) -> Expr {
        parse_expr(text, &SymbolTable::coordinates().with_param("R")).unwrap()
    }

    #[test]
    fn resistor_splits_fully() {
        let (row, residual) = linear_split(&p("e_0 - R*f_0"), &[Sym::effort(0), Sym::flow(0)]);
        assert_eq!(row.len(), 2);
        assert_eq!(row[&0], Expr::one());
        assert_eq!(row[&1], p("-R"));
        assert!(residual.is_zero());
    }

    #[test]
    fn bilinear_term_goes_to_residual() {
        let coords = [Sym::effort(0), Sym::state(0), Sym::state(1)];
        let (row, residual) = linear_split(&p("e_0 - x_0*x_1"), &coords);
        assert_eq!(row.len(), 1);
        assert_eq!(row[&0], Expr::one());
        assert_eq!(residual, p("-x_0*x_1"));
    }

    #[test]
    fn zero_splits_to_nothing() {
        let (row, residual) = linear_split(&Expr::zero(), &[Sym::state(0)]);
        assert!(row.is_empty());
        assert!(residual.is_zero());
    }

    #[test]
    fn scale_equivalence() {
        assert!(equal_mod_scale(&p("2*e_0 - 2*R*f_0"), &p("e_0 - R*f_0")));
        assert!(!equal_mod_scale(&p("e_0 - R*f_0"), &p("e_0 + R*f_0")));
        assert!(equal_mod_scale(&Expr::zero(), &Expr::zero()));
        assert!(!equal_mod_scale(&Expr::zero(), &p("e_0")));
        assert!(equal_mod_scale(&p("-x_0 + x_1"), &p("x_0 - x_1")));
    }
}
