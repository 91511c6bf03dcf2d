use std::collections::BTreeMap;

use super::echelon::eliminate;
use super::space::{CoordinateSpace, ImplicitSystem, Role, Row};
use super::ReduceError;
use crate::symexpr::{substitute_unchecked, Expr, Sym};

/// Reduced relations of one composite, with their bookkeeping.
#[derive(Clone, Debug)]
pub struct ReductionResult {
    pub space: CoordinateSpace,
    /// Emitted relations: `dx` rows by state index, then port rows, then
    /// rows pivoting on kept internals, then algebraic constraints.
    pub relations: Vec<Expr>,
    /// Pivot coordinate of each relation, if any.
    pub pivots: Vec<Option<Sym>>,
    /// Relations with no `dx`/`e`/`f` pivot: irreducible algebraic constraints.
    pub residual_constraints: Vec<Expr>,
    /// Solved coordinates substituted into nonlinear terms.
    pub substitutions: BTreeMap<Sym, Expr>,
    /// Parameter pivots assumed nonzero.
    pub guards: Vec<Expr>,
    /// Internal coordinates eliminated from the output.
    pub eliminated: Vec<Sym>,
    /// Internal coordinates that survive: the system does not determine them.
    pub free_internals: Vec<Sym>,
}

impl ReductionResult {
    /// Coordinates the relations live on (the space minus eliminated ones).
    pub fn kept(&self) -> Vec<Sym> {
        self.space.syms().iter().filter(|s| !self.eliminated.contains(s)).cloned().collect()
    }
}

/// Echelon form, then repeated substitution of solved `dx`/`e`/`f` rows into
/// nonlinear residuals, bounded by the number of coordinates.
pub fn substitute_nonlinear(sys: &ImplicitSystem) -> Result<ReductionResult, ReduceError> {
    let space = &sys.space;
    let splitter = space.splitter();
    let mut rows = sys.rows.clone();
    let mut substitutions = BTreeMap::new();
    let mut guards = Vec::new();
    let order = space.elimination_order();
    let passes = space.len() + 1;
    let mut pass = 0;
    loop {
        let tri = eliminate(rows, &order, false);
        for g in tri.guards {
            if !guards.contains(&g) {
                guards.push(g);
            }
        }
        let pivots = tri.pivots;
        rows = Vec::with_capacity(tri.rows.len());
        let mut kept_pivots = Vec::new();
        for (i, row) in tri.rows.into_iter().enumerate() {
            if row.l.is_empty() {
                if row.v.is_zero() {
                    continue;
                }
                if let Some(c) = row.v.as_constant() {
                    return Err(ReduceError::Inconsistent(Expr::constant(c)));
                }
            }
            kept_pivots.push(pivots.get(i).copied().filter(|_| !row.l.is_empty()));
            rows.push(row);
        }
        pass += 1;
        if pass >= passes {
            return Ok(emit(space, rows, kept_pivots, substitutions, guards));
        }
        let rules = solved_rules(space, &rows, &kept_pivots);
        if rules.is_empty() {
            return Ok(emit(space, rows, kept_pivots, substitutions, guards));
        }
        let mut changed = false;
        for (row, pivot) in rows.iter_mut().zip(&kept_pivots) {
            let own = pivot.map(|p| space.syms()[p].clone());
            let applicable: BTreeMap<Sym, Expr> = rules
                .iter()
                .filter(|(s, _)| Some(*s) != own.as_ref() && row.v.contains(s))
                .map(|(s, e)| (s.clone(), e.clone()))
                .collect();
            if applicable.is_empty() {
                continue;
            }
            let v = substitute_unchecked(&row.v, &applicable)?;
            let (extra, residual) = splitter.split(&v);
            for (j, c) in extra {
                let entry = row.l.entry(j).or_default();
                *entry = std::mem::take(entry) + c;
            }
            row.l.retain(|_, c| !c.is_zero());
            row.v = residual;
            substitutions.extend(applicable);
            changed = true;
        }
        if !changed {
            return Ok(emit(space, rows, kept_pivots, substitutions, guards));
        }
    }
}

// `sym = -(rest)/pivot` for each row whose pivot is a solvable coordinate
// not occurring in the row's own residual.
fn solved_rules(space: &CoordinateSpace, rows: &[Row], pivots: &[Option<usize>]) -> BTreeMap<Sym, Expr> {
    let mut rules = BTreeMap::new();
    for (row, pivot) in rows.iter().zip(pivots) {
        let Some(p) = *pivot else { continue };
        if !space.role(p).is_solvable() {
            continue;
        }
        let sym = space.syms()[p].clone();
        if row.v.contains(&sym) {
            continue;
        }
        let Ok(inv) = row.l[&p].reciprocal() else { continue };
        let mut rest = row.clone();
        rest.l.remove(&p);
        rules.insert(sym, -(&rest.to_expr(space) * &inv));
    }
    rules
}

fn emit(
    space: &CoordinateSpace,
    rows: Vec<Row>,
    pivots: Vec<Option<usize>>,
    substitutions: BTreeMap<Sym, Expr>,
    guards: Vec<Expr>,
) -> ReductionResult {
    // Internal pivots that nothing else mentions are eliminated.
    let mut eliminated = Vec::new();
    let mut keep = vec![true; rows.len()];
    for (i, pivot) in pivots.iter().enumerate() {
        let Some(p) = *pivot else { continue };
        if !space.role(p).is_internal() {
            continue;
        }
        let sym = &space.syms()[p];
        let elsewhere = rows
            .iter()
            .enumerate()
            .any(|(j, r)| j != i && keep[j] && r.mentions(sym, space));
        if !elsewhere {
            keep[i] = false;
            eliminated.push(sym.clone());
        }
    }
    let mut ordered: Vec<(usize, usize, Expr, Option<Sym>)> = Vec::new();
    for (i, (row, pivot)) in rows.into_iter().zip(pivots).enumerate() {
        if !keep[i] {
            continue;
        }
        let class = match pivot.map(|p| space.role(p)) {
            Some(Role::DState(_)) => 0,
            Some(Role::OuterEffort(_) | Role::OuterFlow(_)) => 1,
            Some(Role::InternalEffort | Role::InternalFlow) => 2,
            Some(Role::State(_) | Role::Control(_)) => 3,
            None => 4,
        };
        let expr = scaled(&row, pivot, space);
        ordered.push((class, pivot.unwrap_or(usize::MAX), expr, pivot.map(|p| space.syms()[p].clone())));
    }
    ordered.sort_by_key(|(class, col, _, _)| (*class, *col));
    let free_internals = space
        .internal()
        .filter(|s| !eliminated.contains(s))
        .cloned()
        .collect();
    let residual_constraints = ordered
        .iter()
        .filter(|(class, ..)| *class >= 3)
        .map(|(_, _, e, _)| e.clone())
        .collect();
    let (relations, pivots) = ordered.into_iter().map(|(_, _, e, p)| (e, p)).unzip();
    ReductionResult {
        space: space.clone(),
        relations,
        pivots,
        residual_constraints,
        substitutions,
        guards,
        eliminated,
        free_internals,
    }
}

// Monic in the pivot when it is rational; otherwise only the sign of the
// leading coefficient is normalized, keeping parameters multiplied through.
fn scaled(row: &Row, pivot: Option<usize>, space: &CoordinateSpace) -> Expr {
    let e = row.to_expr(space);
    let lead = match pivot {
        Some(p) => row.l[&p].clone(),
        None => return e.monic(),
    };
    match lead.as_constant() {
        Some(c) => e.scale(&c.recip()),
        None => match lead.leading_coefficient() {
            Some(c) if c < &crate::symexpr::integer(0) => -e,
            _ => e,
        },
    }
}
