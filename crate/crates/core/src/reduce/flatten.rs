use std::collections::HashMap;

use crate::components::{Kind, Orientation};
use crate::model::{Arena, NodeId, PortId};

/// Copies the tree into a single composite with the same root name.
///
/// Atomics keep depth-first order, so state and control numbering is
/// unchanged. Exposed SS components below the root disappear: the bond into
/// the composite and the bond inside it are fused into one bond, and each
/// junction keeps its port orientation.
pub fn flatten(arena: &Arena, root: NodeId) -> (Arena, NodeId) {
    let mut out = Arena::new();
    let flat = out.new_composite(arena.name(root)).expect("root name is valid");
    let mut map: HashMap<NodeId, NodeId> = HashMap::new();
    for a in arena.atomics(root) {
        let atomic = arena.atomic(a).expect("atomic");
        let nested_ss = atomic.kind() == Kind::SS && arena.parent(a) != Some(root);
        if nested_ss {
            continue;
        }
        let id = out.insert(atomic.clone());
        out.add(flat, &[id]).expect("fresh node");
        map.insert(a, id);
    }
    for e in arena.exposures(root) {
        out.expose(map[&e.ss], Some(&e.label)).expect("root exposure");
    }
    let mut composites = vec![root];
    while let Some(c) = composites.pop() {
        for b in arena.bonds(c) {
            let head = terminal(arena, root, b.head);
            let tail = terminal(arena, root, b.tail);
            let (Some(h), Some(t)) = (head, tail) else { continue };
            let end = |p: PortId| {
                let orient = arena
                    .junction_ports(p.node)
                    .iter()
                    .find(|(id, _)| *id == p.port)
                    .map(|(_, o)| *o);
                match orient {
                    Some(o) => (map[&p.node], None, o),
                    None => (map[&p.node], Some(p.port), Orientation::Inward),
                }
            };
            out.push_bond(flat, end(h), end(t));
        }
        composites.extend(arena.children(c).iter().rev().filter(|&&n| arena.is_composite(n)));
    }
    (out, flat)
}

// Follows a port through composite boundaries to an atomic port. Bonds that
// touch a nested exposed SS are realized from the outside and yield `None`.
fn terminal(arena: &Arena, root: NodeId, p: PortId) -> Option<PortId> {
    if arena.is_composite(p.node) {
        let ss = arena.exposures(p.node).get(p.port)?.ss;
        let inner = arena.bonds(p.node).iter().find_map(|b| {
            if b.head.node == ss {
                Some(b.tail)
            } else if b.tail.node == ss {
                Some(b.head)
            } else {
                None
            }
        })?;
        return terminal(arena, root, inner);
    }
    let nested_ss = arena.atomic(p.node).is_some_and(|a| a.kind() == Kind::SS) && arena.parent(p.node) != Some(root);
    (!nested_ss).then_some(p)
}
