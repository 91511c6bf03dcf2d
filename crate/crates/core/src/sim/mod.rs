//! Numerical simulation of reduced relations.
//!
//! Relations are split into state equations, definitions of boundary
//! efforts and flows, and algebraic constraints, then integrated with the
//! implicit midpoint rule at a fixed step.

mod integrate;
mod output;

use std::collections::BTreeMap;

use crate::model::{Arena, NodeId};
use crate::par::{self, Execution};
use crate::reduce::{self, CoordinateSpace, ReduceError, Role};
use crate::symexpr::{
    evaluate, linear_split, parse_expr, substitute_unchecked, Binding, Expr, ExprError, Sym, SymKind, SymbolTable,
};

pub use integrate::{integrate, Settings};
pub use output::write_csv;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("no relation defines dx_{0}")]
    UndefinedState(usize),
    #[error("{equations} equations for {unknowns} unknowns")]
    NotSquare { equations: usize, unknowns: usize },
    #[error("expected {expected} control expressions, got {found}")]
    ControlArity { expected: usize, found: usize },
    #[error("control {index} ({text:?}) may only depend on t")]
    ControlNotTimeOnly { index: usize, text: String },
    #[error("control {index}: {source}")]
    ControlSyntax { index: usize, source: ExprError },
    #[error("controls are not bound")]
    Unbound,
    #[error("parameter {0} has no numeric value")]
    SymbolicParameter(String),
    #[error("timespan [{t0}, {t1}] is empty")]
    Timespan { t0: f64, t1: f64 },
    #[error("step {0} must be positive and finite")]
    Step(f64),
    #[error("expected {expected} values, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("initial condition violates constraint {row} by {residual:e}")]
    Inconsistent { row: usize, residual: f64 },
    #[error("Newton iteration failed at t = {time} after {iterations} iterations")]
    Divergence { time: f64, iterations: usize },
    #[error("row {row}: {source}")]
    Domain { row: usize, source: ExprError },
}

/// Reduced relations sorted for numerical use.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub states: usize,
    /// `dx_i = rhs` for rows solvable for their own derivative.
    pub ode_rows: BTreeMap<usize, Expr>,
    /// Every row containing a derivative, as a residual.
    pub dynamic_rows: Vec<Expr>,
    /// Boundary efforts and flows defined by the relations: `sym = rhs`.
    pub input_rows: Vec<(Sym, Expr)>,
    /// Rows with no derivative.
    pub algebraic_rows: Vec<Expr>,
    /// Undetermined internal coordinates, solved for alongside the states.
    pub algebraic_vars: Vec<Sym>,
    /// Control inputs then free boundary variables.
    pub controls: Vec<Sym>,
    bound: Option<Vec<Expr>>,
}

/// Simulation output, one sample per accepted step.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    /// Boundary variable names, as `e_k`/`f_k`, in exposure order.
    pub output_names: Vec<Sym>,
    pub outputs: Vec<Vec<f64>>,
    /// Newton iterations summed over all steps.
    pub iterations: usize,
}

impl Trajectory {
    pub fn last_state(&self) -> &[f64] {
        self.x.last().map_or(&[], Vec::as_slice)
    }
}

// First coordinate, in elimination order, occurring linearly with a constant
// coefficient.
fn pivot(row: &Expr, space: &CoordinateSpace) -> Option<(usize, Expr, Expr)> {
    let (linear, rest) = linear_split(row, space.syms());
    let order = space.elimination_order();
    let &col = order.iter().find(|j| linear.get(j).is_some_and(|c| c.as_constant().is_some()))?;
    let coef = linear[&col].clone();
    let mut others = rest;
    for (&j, c) in &linear {
        if j != col {
            others = others + c * &Expr::sym(space.syms()[j].clone());
        }
    }
    Some((col, coef, others))
}

/// Sorts relations into state equations, boundary definitions and
/// algebraic constraints.
pub fn classify(relations: &[Expr], space: &CoordinateSpace) -> Result<ReducedSystem, SimError> {
    let n = space.states();
    let mut ode_rows = BTreeMap::new();
    let mut dynamic_rows = Vec::new();
    let mut input_rows = Vec::new();
    let mut algebraic_rows = Vec::new();
    for row in relations {
        let has_derivative = row.symbols().iter().any(|s| s.kind() == SymKind::DState);
        let solved = pivot(row, space);
        if has_derivative {
            if let Some((col, coef, others)) = &solved {
                let own = &space.syms()[*col];
                let other_derivatives = others.symbols().iter().any(|s| s.kind() == SymKind::DState);
                if let (Role::DState(i), false) = (space.role(*col), other_derivatives) {
                    let inv = coef.as_constant().expect("constant pivot").recip();
                    ode_rows.insert(i, (-others).scale(&inv));
                }
                debug_assert!(!others.contains(own));
            }
            dynamic_rows.push(row.clone());
            continue;
        }
        match solved {
            Some((col, coef, others)) if space.role(col).is_outer() => {
                let inv = coef.as_constant().expect("constant pivot").recip();
                input_rows.push((space.syms()[col].clone(), (-others).scale(&inv)));
            }
            _ => algebraic_rows.push(row.clone()),
        }
    }
    for i in 0..n {
        let dx = Sym::dstate(i as u32);
        if !dynamic_rows.iter().any(|r| r.contains(&dx)) {
            return Err(SimError::UndefinedState(i));
        }
    }
    let mentioned = |s: &Sym| relations.iter().any(|r| r.contains(s));
    let algebraic_vars: Vec<Sym> = space.internal().filter(|s| mentioned(s)).cloned().collect();
    let defined: Vec<&Sym> = input_rows.iter().map(|(s, _)| s).collect();
    let mut controls: Vec<Sym> = (0..space.controls() as u32).map(Sym::control).collect();
    for (j, s) in space.syms().iter().enumerate() {
        if space.role(j).is_outer() && !defined.contains(&s) {
            controls.push(s.clone());
        }
    }
    Ok(ReducedSystem {
        states: n,
        ode_rows,
        dynamic_rows,
        input_rows,
        algebraic_rows,
        algebraic_vars,
        controls,
        bound: None,
    })
}

/// Binds each control to an expression in `t`.
pub fn bind_controls(sys: &ReducedSystem, texts: &[impl AsRef<str>]) -> Result<ReducedSystem, SimError> {
    if texts.len() != sys.controls.len() {
        return Err(SimError::ControlArity {
            expected: sys.controls.len(),
            found: texts.len(),
        });
    }
    let table = SymbolTable::time_only();
    let mut bound = Vec::with_capacity(texts.len());
    for (index, text) in texts.iter().enumerate() {
        let text = text.as_ref();
        match parse_expr(text, &table) {
            Ok(e) => bound.push(e),
            Err(ExprError::UnknownIdentifier { name, .. }) if Sym::parse_coordinate(&name).is_some() => {
                return Err(SimError::ControlNotTimeOnly {
                    index,
                    text: text.to_owned(),
                })
            }
            Err(source) => return Err(SimError::ControlSyntax { index, source }),
        }
    }
    Ok(ReducedSystem {
        bound: Some(bound),
        ..sys.clone()
    })
}

impl ReducedSystem {
    pub fn is_bound(&self) -> bool {
        self.bound.is_some()
    }

    fn control_rules(&self) -> Result<BTreeMap<Sym, Expr>, SimError> {
        let bound = self.bound.as_ref().ok_or(SimError::Unbound)?;
        Ok(self.controls.iter().cloned().zip(bound.iter().cloned()).collect())
    }

    fn prepare(&self, rows: impl IntoIterator<Item = Expr>) -> Result<Vec<Expr>, SimError> {
        let rules = self.control_rules()?;
        let outputs: BTreeMap<Sym, Expr> = self.input_rows.iter().cloned().collect();
        rows.into_iter()
            .enumerate()
            .map(|(row, e)| {
                let e = substitute_unchecked(&e, &outputs).map_err(|source| SimError::Domain { row, source })?;
                let e = substitute_unchecked(&e, &rules).map_err(|source| SimError::Domain { row, source })?;
                if let Some(p) = e.symbols().into_iter().find(Sym::is_parameter) {
                    return Err(SimError::SymbolicParameter(p.to_string()));
                }
                Ok(e)
            })
            .collect()
    }

    /// Dynamic then algebraic rows with controls substituted.
    pub(crate) fn residual_rows(&self) -> Result<Vec<Expr>, SimError> {
        self.prepare(self.dynamic_rows.iter().chain(&self.algebraic_rows).cloned())
    }

    /// Boundary variables in exposure order with their expressions in
    /// `(x, z, t)`.
    pub(crate) fn output_exprs(&self) -> Result<Vec<(Sym, Expr)>, SimError> {
        let mut syms: Vec<Sym> = self
            .input_rows
            .iter()
            .map(|(s, _)| s.clone())
            .chain(self.controls.iter().filter(|s| matches!(s.kind(), SymKind::Effort | SymKind::Flow)).cloned())
            .collect();
        syms.sort_by_key(|s| (s.index(), s.kind() == SymKind::Flow));
        let exprs = self.prepare(syms.iter().map(|s| Expr::sym(s.clone())))?;
        Ok(syms.into_iter().zip(exprs).collect())
    }

    fn binding(&self, t: f64, x: &[f64], xdot: &[f64], z: &[f64]) -> Result<Binding, SimError> {
        for (expected, found) in [(self.states, x.len()), (self.states, xdot.len()), (self.algebraic_vars.len(), z.len())] {
            if expected != found {
                return Err(SimError::Dimension { expected, found });
            }
        }
        let mut b = Binding::at_time(t);
        for (i, (&xi, &di)) in x.iter().zip(xdot).enumerate() {
            b.set(Sym::state(i as u32), xi).set(Sym::dstate(i as u32), di);
        }
        for (s, &v) in self.algebraic_vars.iter().zip(z) {
            b.set(s.clone(), v);
        }
        Ok(b)
    }
}

/// Residual of every dynamic and algebraic row; zero on exact solutions.
pub fn residual(sys: &ReducedSystem, t: f64, x: &[f64], xdot: &[f64], z: &[f64]) -> Result<Vec<f64>, SimError> {
    let b = sys.binding(t, x, xdot, z)?;
    sys.residual_rows()?
        .iter()
        .enumerate()
        .map(|(row, e)| evaluate(e, &b).map_err(|source| SimError::Domain { row, source }))
        .collect()
}

/// Largest violation among algebraic rows that involve only `x`, `u` and `t`.
pub fn consistent_ic(sys: &ReducedSystem, t0: f64, x0: &[f64]) -> Result<(usize, f64), SimError> {
    let zeros = vec![0.0; sys.states];
    let b = sys.binding(t0, x0, &zeros, &vec![0.0; sys.algebraic_vars.len()])?;
    let rows = sys.prepare(sys.algebraic_rows.iter().cloned())?;
    let mut worst = (0, 0.0);
    for (row, e) in rows.iter().enumerate() {
        if sys.algebraic_vars.iter().any(|z| e.contains(z)) {
            continue;
        }
        let r = evaluate(e, &b).map_err(|source| SimError::Domain { row, source })?.abs();
        if r > worst.1 {
            worst = (row, r);
        }
    }
    Ok(worst)
}

/// Reduces, binds controls and integrates a model.
pub fn simulate(
    arena: &Arena,
    root: NodeId,
    x0: &[f64],
    timespan: (f64, f64),
    dt: f64,
    controls: &[impl AsRef<str>],
) -> Result<Trajectory, SimError> {
    let r = reduce::reduce(arena, root)?;
    let sys = bind_controls(&classify(&r.relations, &r.space)?, controls)?;
    integrate(&sys, x0, timespan, dt, &Settings::default())
}

/// Integrates one system from many initial conditions.
pub fn simulate_batch(
    exec: Execution,
    sys: &ReducedSystem,
    initial: &[Vec<f64>],
    timespan: (f64, f64),
    dt: f64,
) -> Vec<Result<Trajectory, SimError>> {
    let settings = Settings::default();
    par::map(exec, initial, |x0| integrate(sys, x0, timespan, dt, &settings))
}

/// Total stored energy: `x²/2C`, `x²/2L` and Hamiltonians, at state `x`.
pub fn stored_energy(arena: &Arena, root: NodeId, x: &[f64]) -> Result<f64, SimError> {
    let owners = arena.state_owners(root);
    let expected = owners.last().map_or(0, |(_, r)| r.end);
    if x.len() != expected {
        return Err(SimError::Dimension { expected, found: x.len() });
    }
    let mut total = 0.0;
    for (row, (node, range)) in owners.into_iter().enumerate() {
        let atomic = arena.atomic(node).expect("state owner is atomic");
        let Some(h) = atomic.energy() else { continue };
        if let Some(p) = h.symbols().into_iter().find(Sym::is_parameter) {
            return Err(SimError::SymbolicParameter(p.to_string()));
        }
        let mut b = Binding::new();
        for (local, &v) in x[range].iter().enumerate() {
            b.set(Sym::state(local as u32), v);
        }
        total += evaluate(&h, &b).map_err(|source| SimError::Domain { row, source })?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests;
