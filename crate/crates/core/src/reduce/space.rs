use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::symexpr::{Expr, LinearSplitter, Sym, SymKind};

/// What a coordinate stands for in its composite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    DState(usize),
    OuterEffort(usize),
    OuterFlow(usize),
    InternalEffort,
    InternalFlow,
    State(usize),
    Control(usize),
}

impl Role {
    /// Coordinates the reducer solves for.
    pub fn is_solvable(self) -> bool {
        !matches!(self, Role::State(_) | Role::Control(_))
    }

    pub fn is_internal(self) -> bool {
        matches!(self, Role::InternalEffort | Role::InternalFlow)
    }

    pub fn is_outer(self) -> bool {
        matches!(self, Role::OuterEffort(_) | Role::OuterFlow(_))
    }
}

/// Ordered coordinates `X' = (dx…, outer e/f…, internal e/f…, x…, u…)`.
///
/// Time is not a column: terms in `t` always land in the residual.
#[derive(Clone, Debug, Default)]
pub struct CoordinateSpace {
    syms: Vec<Sym>,
    roles: Vec<Role>,
    states: usize,
    outer: usize,
    controls: usize,
    index: HashMap<Sym, usize>,
}

impl CoordinateSpace {
    pub fn new(states: usize, outer: usize, internal: &[Sym], controls: usize) -> CoordinateSpace {
        let mut syms = Vec::new();
        let mut roles = Vec::new();
        for i in 0..states {
            syms.push(Sym::dstate(i as u32));
            roles.push(Role::DState(i));
        }
        for k in 0..outer {
            syms.push(Sym::effort(k as u32));
            roles.push(Role::OuterEffort(k));
            syms.push(Sym::flow(k as u32));
            roles.push(Role::OuterFlow(k));
        }
        for s in internal {
            syms.push(s.clone());
            roles.push(match s.kind() {
                SymKind::Effort => Role::InternalEffort,
                _ => Role::InternalFlow,
            });
        }
        for i in 0..states {
            syms.push(Sym::state(i as u32));
            roles.push(Role::State(i));
        }
        for j in 0..controls {
            syms.push(Sym::control(j as u32));
            roles.push(Role::Control(j));
        }
        let index = syms.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        CoordinateSpace {
            syms,
            roles,
            states,
            outer,
            controls,
            index,
        }
    }

    /// Column order used for pivoting: internal ports come before outer ones
    /// so that internals are solved away in favour of the boundary.
    pub fn elimination_order(&self) -> Vec<usize> {
        let rank = |r: Role| match r {
            Role::DState(_) => 0,
            Role::InternalEffort | Role::InternalFlow => 1,
            Role::OuterEffort(_) | Role::OuterFlow(_) => 2,
            Role::State(_) | Role::Control(_) => 3,
        };
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&j| rank(self.roles[j]));
        order
    }

    pub fn syms(&self) -> &[Sym] {
        &self.syms
    }

    pub fn len(&self) -> usize {
        self.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syms.is_empty()
    }

    pub fn role(&self, col: usize) -> Role {
        self.roles[col]
    }

    pub fn position(&self, sym: &Sym) -> Option<usize> {
        self.index.get(sym).copied()
    }

    /// `n`: number of states.
    pub fn states(&self) -> usize {
        self.states
    }

    /// `m`: number of (e, f) port pairs, outer and internal.
    pub fn ports(&self) -> usize {
        self.roles.iter().filter(|r| matches!(r, Role::OuterEffort(_) | Role::InternalEffort)).count()
    }

    pub fn outer_ports(&self) -> usize {
        self.outer
    }

    /// `k`: number of controls.
    pub fn controls(&self) -> usize {
        self.controls
    }

    pub fn internal(&self) -> impl Iterator<Item = &Sym> {
        self.syms.iter().zip(&self.roles).filter(|(_, r)| r.is_internal()).map(|(s, _)| s)
    }

    pub(crate) fn splitter(&self) -> LinearSplitter {
        LinearSplitter::new(&self.syms)
    }
}

/// One implicit equation `L·X + V = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub l: BTreeMap<usize, Expr>,
    pub v: Expr,
}

impl Row {
    pub fn from_expr(e: &Expr, splitter: &LinearSplitter) -> Row {
        let (l, v) = splitter.split(e);
        Row { l, v }
    }

    pub fn to_expr(&self, space: &CoordinateSpace) -> Expr {
        self.l
            .iter()
            .fold(self.v.clone(), |acc, (&j, c)| acc + c * &Expr::sym(space.syms()[j].clone()))
    }

    pub fn pivot(&self) -> Option<usize> {
        self.l.keys().next().copied()
    }

    pub(crate) fn scale(&mut self, c: &Expr) {
        for entry in self.l.values_mut() {
            *entry = &*entry * c;
        }
        self.l.retain(|_, e| !e.is_zero());
        self.v = &self.v * c;
    }

    /// `self = a*self - b*other`.
    pub(crate) fn combine(&mut self, a: &Expr, b: &Expr, other: &Row) {
        if *a != Expr::one() {
            self.scale(a);
        }
        for (&j, c) in &other.l {
            let entry = self.l.entry(j).or_default();
            *entry = std::mem::take(entry) - b * c;
        }
        self.l.retain(|_, e| !e.is_zero());
        self.v = &self.v - &(b * &other.v);
    }

    pub fn mentions(&self, sym: &Sym, space: &CoordinateSpace) -> bool {
        space.position(sym).is_some_and(|j| self.l.contains_key(&j)) || self.v.contains(sym)
    }
}

/// `0 = L·X + V(X)` over a coordinate space.
#[derive(Clone, Debug)]
pub struct ImplicitSystem {
    pub space: CoordinateSpace,
    pub rows: Vec<Row>,
}

impl ImplicitSystem {
    pub fn from_relations(space: CoordinateSpace, relations: &[Expr]) -> ImplicitSystem {
        let splitter = space.splitter();
        let rows = relations.iter().map(|e| Row::from_expr(e, &splitter)).collect();
        ImplicitSystem { space, rows }
    }

    pub fn relations(&self) -> Vec<Expr> {
        self.rows.iter().map(|r| r.to_expr(&self.space)).collect()
    }

    /// True when every `L` entry is a rational constant and every `V` is zero.
    pub fn is_linear_numeric(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.v.is_zero() && r.l.values().all(|c| c.as_constant().is_some()))
    }

    /// Dense rational `L`, if numeric.
    pub fn numeric_matrix(&self) -> Option<Vec<Vec<crate::symexpr::Rational>>> {
        let mut out = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            let mut dense = vec![crate::symexpr::integer(0); self.space.len()];
            for (&j, c) in &r.l {
                dense[j] = c.as_constant()?;
            }
            out.push(dense);
        }
        Some(out)
    }
}

impl fmt::Display for ImplicitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.relations() {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
