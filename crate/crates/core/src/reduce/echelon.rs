use std::collections::BTreeMap;

use super::space::{ImplicitSystem, Row};
use crate::symexpr::Expr;

/// Result of exact Gauss-Jordan elimination, `L' = Λ·L·P`.
#[derive(Clone, Debug)]
pub struct Triangular {
    /// Transformed rows in original column numbering. The first `rank`
    /// rows carry pivots in elimination order; the rest have empty `L`.
    pub rows: Vec<Row>,
    pub rank: usize,
    /// Pivot column of row `i < rank`.
    pub pivots: Vec<usize>,
    /// Row transform `Λ` (square, rows × rows); empty when not tracked.
    pub lambda: Vec<BTreeMap<usize, Expr>>,
    /// Column permutation: column `j` of `L·P` is column `permutation[j]` of `L`.
    pub permutation: Vec<usize>,
    /// Parameter-valued pivots, assumed nonzero.
    pub guards: Vec<Expr>,
}

impl Triangular {
    /// Rows of `L'` with columns renumbered by the permutation, so the pivot
    /// of row `i` sits at column `i`.
    pub fn permuted_rows(&self) -> Vec<BTreeMap<usize, Expr>> {
        let mut inverse = vec![0; self.permutation.len()];
        for (new, &old) in self.permutation.iter().enumerate() {
            inverse[old] = new;
        }
        self.rows
            .iter()
            .map(|r| r.l.iter().map(|(&j, c)| (inverse[j], c.clone())).collect())
            .collect()
    }

    /// Rows with empty `L` and nonzero `V`.
    pub fn residual_constraints(&self) -> impl Iterator<Item = &Expr> {
        self.rows[self.rank..].iter().map(|r| &r.v).filter(|v| !v.is_zero())
    }
}

/// Exact reduced row echelon form with pivots moved onto the diagonal.
pub fn triangularize(sys: &ImplicitSystem) -> Triangular {
    eliminate(sys.rows.clone(), &sys.space.elimination_order(), true)
}

/// Gauss-Jordan over `Expr` entries, visiting columns in `order`.
///
/// Rational pivots are preferred. A column whose only candidates are
/// parameter expressions is pivoted fraction-free (rows are cross-multiplied,
/// never divided) and the pivot is recorded as a guard.
pub(crate) fn eliminate(mut rows: Vec<Row>, order: &[usize], track: bool) -> Triangular {
    let nrows = rows.len();
    let mut lambda: Vec<BTreeMap<usize, Expr>> = if track {
        (0..nrows).map(|i| BTreeMap::from([(i, Expr::one())])).collect()
    } else {
        Vec::new()
    };
    let mut pivots = Vec::new();
    let mut guards = Vec::new();
    let mut next = 0;
    for &col in order {
        if next == nrows {
            break;
        }
        let candidates = (next..nrows).filter(|&i| rows[i].l.contains_key(&col));
        let mut chosen = None;
        for i in candidates {
            if rows[i].l[&col].as_constant().is_some() {
                chosen = Some(i);
                break;
            }
            chosen.get_or_insert(i);
        }
        let Some(p) = chosen else { continue };
        rows.swap(next, p);
        if track {
            lambda.swap(next, p);
        }
        let pivot = rows[next].l[&col].clone();
        let numeric = pivot.as_constant();
        if let Some(c) = &numeric {
            let inv = Expr::constant(c.recip());
            rows[next].scale(&inv);
            if track {
                scale_map(&mut lambda[next], &inv);
            }
        } else {
            guards.push(pivot.clone());
        }
        let prow = rows[next].clone();
        let plam = if track { lambda[next].clone() } else { BTreeMap::new() };
        let a = if numeric.is_some() { Expr::one() } else { pivot };
        for i in 0..nrows {
            if i == next {
                continue;
            }
            let Some(b) = rows[i].l.get(&col).cloned() else { continue };
            rows[i].combine(&a, &b, &prow);
            if track {
                combine_map(&mut lambda[i], &a, &b, &plam);
            }
        }
        pivots.push(col);
        next += 1;
    }
    // Fraction-free steps may have scaled earlier rational pivots; restore them.
    for (i, &col) in pivots.iter().enumerate() {
        let c = rows[i].l[&col].clone();
        if let Some(r) = c.as_constant() {
            if r != crate::symexpr::integer(1) {
                let inv = Expr::constant(r.recip());
                rows[i].scale(&inv);
                if track {
                    scale_map(&mut lambda[i], &inv);
                }
            }
        }
    }
    let mut permutation = pivots.clone();
    permutation.extend(order.iter().copied().filter(|j| !pivots.contains(j)));
    Triangular {
        rows,
        rank: next,
        pivots,
        lambda,
        permutation,
        guards,
    }
}

fn scale_map(m: &mut BTreeMap<usize, Expr>, c: &Expr) {
    for v in m.values_mut() {
        *v = &*v * c;
    }
    m.retain(|_, v| !v.is_zero());
}

fn combine_map(m: &mut BTreeMap<usize, Expr>, a: &Expr, b: &Expr, other: &BTreeMap<usize, Expr>) {
    if *a != Expr::one() {
        scale_map(m, a);
    }
    for (&j, c) in other {
        let entry = m.entry(j).or_default();
        *entry = std::mem::take(entry) - b * c;
    }
    m.retain(|_, v| !v.is_zero());
}
