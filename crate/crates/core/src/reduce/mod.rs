//! Symbolic reduction of a model tree to implicit constitutive relations.
//!
//! Each composite is reduced on its own: child relations are renamed into the
//! composite's coordinate space, bond rows are appended, and the system is
//! brought to reduced echelon form with nonlinear terms substituted. A
//! composite child contributes its own reduced relations, so reduction
//! recurses bottom-up and sibling subtrees are independent.

mod echelon;
mod flatten;
mod nonlinear;
mod oracle;
mod space;

use std::collections::BTreeMap;

use crate::components::Kind;
use crate::model::{Arena, NodeId, PortId};
use crate::par::{self, Execution};
use crate::symexpr::{substitute_unchecked, Expr, ExprError, Sym, SymKind};

pub use echelon::{triangularize, Triangular};
pub use flatten::flatten;
pub use nonlinear::{substitute_nonlinear, ReductionResult};
pub use oracle::nullspace_oracle;
pub use space::{CoordinateSpace, ImplicitSystem, Role, Row};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReduceError {
    #[error("SS component {0} is not exposed")]
    UnexposedSs(String),
    #[error("port {port} of {uri} is not bonded")]
    UnbondedPort { uri: String, port: String },
    #[error("inconsistent system: a relation reduces to {0} = 0")]
    Inconsistent(Expr),
    #[error("`{0}` is not a composite")]
    NotComposite(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// A child's contribution to its parent's assembly, in local coordinates.
struct Block {
    states: usize,
    controls: usize,
    /// Local `e_k`/`f_k` symbols for the child's ports, in port order.
    ports: Vec<(Sym, Sym)>,
    /// Local symbols the parent must give fresh coordinates.
    leftovers: Vec<Sym>,
    relations: Vec<Expr>,
}

fn local_ports(n: usize) -> Vec<(Sym, Sym)> {
    (0..n as u32).map(|k| (Sym::effort(k), Sym::flow(k))).collect()
}

fn block(arena: &Arena, id: NodeId, exec: Execution) -> Result<Option<Block>, ReduceError> {
    if arena.is_composite(id) {
        let r = reduce_with(arena, id, exec)?;
        return Ok(Some(Block {
            states: r.space.states(),
            controls: r.space.controls(),
            ports: local_ports(r.space.outer_ports()),
            leftovers: r.free_internals.clone(),
            relations: r.relations,
        }));
    }
    let atomic = arena.atomic(id).expect("atomic");
    if atomic.kind() == Kind::SS {
        return Ok(None);
    }
    let orientations: Vec<_> = arena.junction_ports(id).iter().map(|(_, o)| *o).collect();
    Ok(Some(Block {
        states: atomic.state_count(),
        controls: atomic.control_count(),
        ports: local_ports(arena.port_ids(id).len()),
        leftovers: Vec::new(),
        relations: atomic.relations(&orientations),
    }))
}

/// Assembled `L·X + V` for a composite's direct children and bonds.
pub fn assemble(arena: &Arena, root: NodeId) -> Result<ImplicitSystem, ReduceError> {
    assemble_with(arena, root, Execution::default())
}

/// The coordinate space of [`assemble`].
pub fn coordinates(arena: &Arena, root: NodeId) -> Result<CoordinateSpace, ReduceError> {
    Ok(assemble(arena, root)?.space)
}

pub fn assemble_with(arena: &Arena, root: NodeId, exec: Execution) -> Result<ImplicitSystem, ReduceError> {
    if !arena.is_composite(root) {
        return Err(ReduceError::NotComposite(arena.uri(root)));
    }
    let children = arena.children(root);
    let blocks = par::map(exec, children, |&c| block(arena, c, exec))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    let exposures = arena.exposures(root);
    let outer = exposures.len();
    let bonds = arena.bonds(root);
    let bonded: Vec<PortId> = bonds.iter().flat_map(|b| [b.head, b.tail]).collect();

    // Port coordinates: fresh internal pairs, or the outer pair for an exposed SS.
    let mut port_vars: BTreeMap<PortId, (Expr, Expr)> = BTreeMap::new();
    let mut internal: Vec<Sym> = Vec::new();
    let mut next = outer as u32;
    for (&child, blk) in children.iter().zip(&blocks) {
        if blk.is_none() {
            let k = exposures
                .iter()
                .position(|e| e.ss == child)
                .ok_or_else(|| ReduceError::UnexposedSs(arena.uri(child)))?;
            let (e, f) = (Sym::effort(k as u32), Sym::flow(k as u32));
            port_vars.insert(PortId { node: child, port: 0 }, (Expr::sym(e), -Expr::sym(f)));
            continue;
        }
        for port in arena.port_ids(child) {
            let pid = PortId { node: child, port };
            if !bonded.contains(&pid) {
                let label = match arena.exposures(child).get(port) {
                    Some(e) if arena.is_composite(child) => e.label.clone(),
                    _ => port.to_string(),
                };
                return Err(ReduceError::UnbondedPort {
                    uri: arena.uri(child),
                    port: label,
                });
            }
            let (e, f) = (Sym::effort(next), Sym::flow(next));
            next += 1;
            internal.push(e.clone());
            internal.push(f.clone());
            port_vars.insert(pid, (Expr::sym(e), Expr::sym(f)));
        }
    }

    let mut relations = Vec::new();
    let (mut state_off, mut control_off) = (0u32, 0u32);
    for (&child, blk) in children.iter().zip(&blocks) {
        let Some(blk) = blk else { continue };
        let mut rename: BTreeMap<Sym, Expr> = BTreeMap::new();
        for ((e, f), port) in blk.ports.iter().zip(arena.port_ids(child)) {
            let (ge, gf) = &port_vars[&PortId { node: child, port }];
            rename.insert(e.clone(), ge.clone());
            rename.insert(f.clone(), gf.clone());
        }
        for i in 0..blk.states as u32 {
            rename.insert(Sym::state(i), Expr::sym(Sym::state(state_off + i)));
            rename.insert(Sym::dstate(i), Expr::sym(Sym::dstate(state_off + i)));
        }
        for j in 0..blk.controls as u32 {
            rename.insert(Sym::control(j), Expr::sym(Sym::control(control_off + j)));
        }
        for s in &blk.leftovers {
            let fresh = match s.kind() {
                SymKind::Effort => Sym::effort(next),
                _ => Sym::flow(next),
            };
            next += 1;
            internal.push(fresh.clone());
            rename.insert(s.clone(), Expr::sym(fresh));
        }
        rename.retain(|k, v| *v != Expr::sym(k.clone()));
        for r in &blk.relations {
            relations.push(substitute_unchecked(r, &rename)?);
        }
        state_off += blk.states as u32;
        control_off += blk.controls as u32;
    }
    for b in bonds {
        let (eh, fh) = &port_vars[&b.head];
        let (et, ft) = &port_vars[&b.tail];
        relations.push(eh - et);
        relations.push(fh + ft);
    }
    let space = CoordinateSpace::new(state_off as usize, outer, &internal, control_off as usize);
    Ok(ImplicitSystem::from_relations(space, &relations))
}

/// Full reduction of a composite (recursing into composite children).
pub fn reduce(arena: &Arena, root: NodeId) -> Result<ReductionResult, ReduceError> {
    reduce_with(arena, root, Execution::default())
}

pub fn reduce_with(arena: &Arena, root: NodeId, exec: Execution) -> Result<ReductionResult, ReduceError> {
    substitute_nonlinear(&assemble_with(arena, root, exec)?)
}

/// The reduced relations, in canonical order.
pub fn constitutive_relations(arena: &Arena, root: NodeId) -> Result<Vec<Expr>, ReduceError> {
    Ok(reduce(arena, root)?.relations)
}
