use num_traits::Zero;

use crate::symexpr::Rational;

/// Basis of `{X : L·X = 0}` by plain dense Gaussian elimination.
///
/// Deliberately shares nothing with the reducer's sparse `Expr` elimination
/// so tests can use it as an independent check.
pub fn nullspace_oracle(l: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let ncols = l.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<Rational>> = l.to_vec();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for v in a[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let factor = a[i][c].clone();
                let pivot_row = a[r].clone();
                for (v, p) in a[i].iter_mut().zip(&pivot_row) {
                    *v = &*v - &(&factor * p);
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivot_cols.contains(c)) {
        let mut v = vec![Rational::zero(); ncols];
        v[free] = Rational::from_integer(1.into());
        for (row, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -a[row][free].clone();
        }
        basis.push(v);
    }
    basis
}
