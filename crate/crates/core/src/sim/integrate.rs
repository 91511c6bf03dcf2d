use nalgebra::{DMatrix, DVector};

use super::{consistent_ic, ReducedSystem, SimError, Trajectory};
use crate::symexpr::{differentiate, Compiled, Expr, Sym, SymKind};

/// Solver tolerances.
#[derive(Clone, Debug)]
pub struct Settings {
    /// Newton stops once the update is below `tol · (1 + |y|)`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Largest admissible violation of algebraic rows at the start.
    pub tol_consistency: f64,
    /// A step that stalls at roundoff is still accepted when every residual
    /// is at most this.
    pub accept_residual: f64,
}

impl Default for Settings {
    fn default() -> Settings {
        Settings {
            tol: 1e-10,
            max_iterations: 25,
            tol_consistency: 1e-8,
            accept_residual: 1e-8,
        }
    }
}

// Slot layout: dx (n), x (n), z (nz), t.
struct Layout {
    n: usize,
    nz: usize,
    z: Vec<Sym>,
}

impl Layout {
    fn slot(&self, s: &Sym) -> Option<usize> {
        match s.kind() {
            SymKind::DState => Some(s.index() as usize).filter(|&i| i < self.n),
            SymKind::State => Some(self.n + s.index() as usize).filter(|&i| i < 2 * self.n),
            SymKind::Time => Some(2 * self.n + self.nz),
            _ => self.z.iter().position(|z| z == s).map(|k| 2 * self.n + k),
        }
    }

    fn width(&self) -> usize {
        2 * self.n + self.nz + 1
    }

    fn compile(&self, e: &Expr, row: usize) -> Result<Compiled, SimError> {
        Compiled::new(e, &|s| self.slot(s)).map_err(|source| SimError::Domain { row, source })
    }
}

struct Row {
    value: Compiled,
    // (unknown index, d/d dx or d/d z, d/d x)
    partials: Vec<(usize, Option<Compiled>, Option<Compiled>)>,
}

/// Implicit midpoint integration at fixed step `dt`, shortening the last
/// step to land on the end of the timespan.
pub fn integrate(
    sys: &ReducedSystem,
    x0: &[f64],
    (t0, t1): (f64, f64),
    dt: f64,
    settings: &Settings,
) -> Result<Trajectory, SimError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SimError::Step(dt));
    }
    if t1.partial_cmp(&t0) != Some(std::cmp::Ordering::Greater) {
        return Err(SimError::Timespan { t0, t1 });
    }
    let n = sys.states;
    if x0.len() != n {
        return Err(SimError::Dimension { expected: n, found: x0.len() });
    }
    let layout = Layout {
        n,
        nz: sys.algebraic_vars.len(),
        z: sys.algebraic_vars.clone(),
    };
    let (row, worst) = consistent_ic(sys, t0, x0)?;
    if worst > settings.tol_consistency {
        return Err(SimError::Inconsistent { row, residual: worst });
    }
    let unknowns = n + layout.nz;
    let exprs = sys.residual_rows()?;
    if exprs.len() != unknowns {
        return Err(SimError::NotSquare {
            equations: exprs.len(),
            unknowns,
        });
    }

    let mut rows = Vec::with_capacity(exprs.len());
    for (r, e) in exprs.iter().enumerate() {
        let compile_partial = |s: Sym| -> Result<Option<Compiled>, SimError> {
            let d = differentiate(e, &s);
            if d.is_zero() {
                Ok(None)
            } else {
                layout.compile(&d, r).map(Some)
            }
        };
        let mut partials = Vec::new();
        for i in 0..n as u32 {
            let (a, b) = (compile_partial(Sym::dstate(i))?, compile_partial(Sym::state(i))?);
            if a.is_some() || b.is_some() {
                partials.push((i as usize, a, b));
            }
        }
        for (k, z) in layout.z.iter().enumerate() {
            if let Some(a) = compile_partial(z.clone())? {
                partials.push((n + k, Some(a), None));
            }
        }
        rows.push(Row {
            value: layout.compile(e, r)?,
            partials,
        });
    }
    let outputs: Vec<(Sym, Compiled)> = sys
        .output_exprs()?
        .into_iter()
        .enumerate()
        .map(|(r, (s, e))| Ok((s, layout.compile(&e, r)?)))
        .collect::<Result<_, SimError>>()?;

    let mut slots = vec![0.0; layout.width()];
    let sample = |slots: &[f64]| -> Result<Vec<f64>, SimError> {
        outputs
            .iter()
            .enumerate()
            .map(|(row, (_, c))| c.eval(slots).map_err(|source| SimError::Domain { row, source }))
            .collect()
    };
    let mut x = x0.to_vec();
    let mut z = vec![0.0; layout.nz];
    fill(&mut slots, &layout, &x, &vec![0.0; n], &z, t0);
    let mut traj = Trajectory {
        t: vec![t0],
        x: vec![x.clone()],
        output_names: outputs.iter().map(|(s, _)| s.clone()).collect(),
        outputs: vec![sample(&slots)?],
        iterations: 0,
    };

    let steps = ((t1 - t0) / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    for k in 1..=steps {
        let t_prev = *traj.t.last().expect("nonempty");
        let t_next = if k == steps { t1 } else { t0 + k as f64 * dt };
        let h = t_next - t_prev;
        let t_mid = t_prev + h / 2.0;
        let mut y: Vec<f64> = x.iter().chain(&z).copied().collect();
        let eval_f = |y: &[f64], slots: &mut Vec<f64>| -> Result<DVector<f64>, SimError> {
            let (xn, zn) = y.split_at(n);
            let xm: Vec<f64> = x.iter().zip(xn).map(|(a, b)| (a + b) / 2.0).collect();
            let xd: Vec<f64> = x.iter().zip(xn).map(|(a, b)| (b - a) / h).collect();
            fill(slots, &layout, &xm, &xd, zn, t_mid);
            let mut f = DVector::zeros(rows.len());
            for (r, row) in rows.iter().enumerate() {
                f[r] = row.value.eval(slots).map_err(|source| SimError::Domain { row: r, source })?;
            }
            Ok(f)
        };
        let mut f = eval_f(&y, &mut slots)?;
        let mut converged = false;
        let mut iterations = 0;
        while iterations < settings.max_iterations {
            iterations += 1;
            let mut jac = DMatrix::zeros(rows.len(), unknowns);
            for (r, row) in rows.iter().enumerate() {
                for (j, d_rate, d_state) in &row.partials {
                    let mut v = 0.0;
                    if let Some(c) = d_rate {
                        let scale = if *j < n { 1.0 / h } else { 1.0 };
                        v += scale * c.eval(&slots).map_err(|source| SimError::Domain { row: r, source })?;
                    }
                    if let Some(c) = d_state {
                        v += 0.5 * c.eval(&slots).map_err(|source| SimError::Domain { row: r, source })?;
                    }
                    jac[(r, *j)] = v;
                }
            }
            let Some(delta) = jac.lu().solve(&(-&f)) else { break };
            // Damped update: halve until the residual does not grow.
            let norm = f.amax();
            let mut lambda = 1.0;
            let (mut y_try, mut f_try);
            loop {
                y_try = y.iter().zip(delta.iter()).map(|(a, d)| a + lambda * d).collect::<Vec<_>>();
                f_try = eval_f(&y_try, &mut slots);
                match &f_try {
                    Ok(ft) if ft.amax() <= norm || lambda < 1e-3 => break,
                    Err(_) if lambda < 1e-3 => break,
                    _ => lambda /= 2.0,
                }
            }
            f = f_try?;
            let scale = 1.0 + y_try.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let step = lambda * delta.amax();
            y = y_try;
            if step <= settings.tol * scale {
                converged = true;
                break;
            }
        }
        if !converged && f.amax().partial_cmp(&settings.accept_residual).is_none_or(|o| o.is_gt()) {
            return Err(SimError::Divergence {
                time: t_next,
                iterations,
            });
        }
        traj.iterations += iterations;
        x.copy_from_slice(&y[..n]);
        z.copy_from_slice(&y[n..]);
        fill(&mut slots, &layout, &x, &vec![0.0; n], &z, t_next);
        traj.t.push(t_next);
        traj.x.push(x.clone());
        traj.outputs.push(sample(&slots)?);
    }
    Ok(traj)
}

fn fill(slots: &mut [f64], layout: &Layout, x: &[f64], xdot: &[f64], z: &[f64], t: f64) {
    let n = layout.n;
    slots[..n].copy_from_slice(xdot);
    slots[n..2 * n].copy_from_slice(x);
    slots[2 * n..2 * n + layout.nz].copy_from_slice(z);
    slots[2 * n + layout.nz] = t;
}
