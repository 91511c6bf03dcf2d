//! Hierarchical model tree: composites, bonds, exposed ports and URIs.
//!
//! All nodes live in an [`Arena`]. A node without a parent is a root; adding
//! it to a composite attaches it. Bonds are stored on the composite that
//! directly contains both endpoints.

use std::fmt;

use crate::components::{Atomic, Kind, Orientation};
use crate::symexpr::Sym;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A concrete port of a node.
///
/// For junctions `port` is a materialization id that stays stable while
/// other junction ports come and go; for composites it is the outer port
/// (exposure) index; otherwise it is the component's port index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortId {
    pub node: NodeId,
    pub port: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bond {
    pub head: PortId,
    pub tail: PortId,
}

impl Bond {
    pub fn touches(&self, node: NodeId) -> bool {
        self.head.node == node || self.tail.node == node
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exposure {
    pub label: String,
    pub ss: NodeId,
}

/// How an endpoint of `connect`/`disconnect` is named.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endpoint {
    /// The component itself: its single free port, or a fresh junction port.
    Node(NodeId),
    Index(NodeId, usize),
    Label(NodeId, String),
}

impl From<NodeId> for Endpoint {
    fn from(n: NodeId) -> Self {
        Endpoint::Node(n)
    }
}

impl From<(NodeId, usize)> for Endpoint {
    fn from((n, k): (NodeId, usize)) -> Self {
        Endpoint::Index(n, k)
    }
}

impl From<(NodeId, &str)> for Endpoint {
    fn from((n, l): (NodeId, &str)) -> Self {
        Endpoint::Label(n, l.to_owned())
    }
}

impl Endpoint {
    pub fn node(&self) -> NodeId {
        match self {
            Endpoint::Node(n) | Endpoint::Index(n, _) | Endpoint::Label(n, _) => *n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("names must be non-empty and may not contain '/', '.' or ':'")]
    BadName,
    #[error("no node with id {0:?}")]
    NoSuchNode(NodeId),
    #[error("`{0}` is not a composite")]
    NotComposite(String),
    #[error("`{child}` already belongs to `{parent}`")]
    AlreadyOwned { child: String, parent: String },
    #[error("adding `{0}` would create a cycle")]
    Cycle(String),
    #[error("`{child}` is not a component of `{parent}`")]
    NotAChild { child: String, parent: String },
    #[error("`{0}` and `{1}` do not share a parent")]
    NoCommonParent(String, String),
    #[error("`{0}` has several free ports; name one explicitly")]
    Ambiguous(String),
    #[error("`{0}` has no free port")]
    NoFreePort(String),
    #[error("`{node}` has no port `{port}`")]
    NoSuchPort { node: String, port: String },
    #[error("port {port} of `{node}` is already bonded")]
    PortInUse { node: String, port: String },
    #[error("cannot bond a port to itself")]
    SelfBond,
    #[error("no bond between `{0}` and `{1}`")]
    NoSuchBond(String, String),
    #[error("only SS components can be exposed; `{0}` is {1}")]
    NotSs(String, String),
    #[error("`{0}` has no parent to expose into")]
    Unattached(String),
    #[error("label `{label}` already exposed on `{parent}`")]
    DuplicateLabel { parent: String, label: String },
    #[error("`{0}` is already exposed")]
    AlreadyExposed(String),
    #[error("cannot resolve `{0}`")]
    Unresolvable(String),
}

#[derive(Clone, Debug)]
pub(crate) enum NodeKind {
    Atomic {
        atomic: Atomic,
        /// Junction ports as (materialization id, orientation), in creation order.
        junction_ports: Vec<(usize, Orientation)>,
        next_port: usize,
    },
    Composite {
        children: Vec<NodeId>,
        bonds: Vec<Bond>,
        exposed: Vec<Exposure>,
    },
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    name: String,
    parent: Option<NodeId>,
    kind: NodeKind,
}

type CompositeParts<'a> = (&'a mut Vec<NodeId>, &'a mut Vec<Bond>, &'a mut Vec<Exposure>);

#[derive(Clone, Debug, Default)]
pub struct Arena {
    nodes: Vec<Option<Node>>,
}

impl Arena {
    pub fn new() -> Arena {
        Arena::default()
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(Some(node));
        NodeId(self.nodes.len() - 1)
    }

    pub fn new_composite(&mut self, name: &str) -> Result<NodeId, ModelError> {
        if !crate::components::valid_name(name) {
            return Err(ModelError::BadName);
        }
        Ok(self.push(Node {
            name: name.to_owned(),
            parent: None,
            kind: NodeKind::Composite {
                children: Vec::new(),
                bonds: Vec::new(),
                exposed: Vec::new(),
            },
        }))
    }

    pub fn insert(&mut self, atomic: Atomic) -> NodeId {
        self.push(Node {
            name: atomic.name().to_owned(),
            parent: None,
            kind: NodeKind::Atomic {
                atomic,
                junction_ports: Vec::new(),
                next_port: 0,
            },
        })
    }

    pub(crate) fn node(&self, id: NodeId) -> &Node {
        self.nodes
            .get(id.0)
            .and_then(Option::as_ref)
            .unwrap_or_else(|| panic!("dangling {id:?}"))
    }

    fn node_mut(&mut self, id: NodeId) -> &mut Node {
        self.nodes[id.0].as_mut().expect("live node")
    }

    fn check(&self, id: NodeId) -> Result<(), ModelError> {
        match self.nodes.get(id.0) {
            Some(Some(_)) => Ok(()),
            _ => Err(ModelError::NoSuchNode(id)),
        }
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.node(id).name
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).parent
    }

    pub fn atomic(&self, id: NodeId) -> Option<&Atomic> {
        match &self.node(id).kind {
            NodeKind::Atomic { atomic, .. } => Some(atomic),
            NodeKind::Composite { .. } => None,
        }
    }

    pub fn is_composite(&self, id: NodeId) -> bool {
        matches!(self.node(id).kind, NodeKind::Composite { .. })
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        match &self.node(id).kind {
            NodeKind::Composite { children, .. } => children,
            NodeKind::Atomic { .. } => &[],
        }
    }

    pub fn bonds(&self, id: NodeId) -> &[Bond] {
        match &self.node(id).kind {
            NodeKind::Composite { bonds, .. } => bonds,
            NodeKind::Atomic { .. } => &[],
        }
    }

    pub fn exposures(&self, id: NodeId) -> &[Exposure] {
        match &self.node(id).kind {
            NodeKind::Composite { exposed, .. } => exposed,
            NodeKind::Atomic { .. } => &[],
        }
    }

    /// Materialized junction ports in creation order.
    pub fn junction_ports(&self, id: NodeId) -> &[(usize, Orientation)] {
        match &self.node(id).kind {
            NodeKind::Atomic { junction_ports, .. } => junction_ports,
            NodeKind::Composite { .. } => &[],
        }
    }

    /// Current ports of a node: fixed indices, junction ids, or outer indices.
    pub fn port_ids(&self, id: NodeId) -> Vec<usize> {
        match &self.node(id).kind {
            NodeKind::Atomic { atomic, junction_ports, .. } => match atomic.port_count() {
                Some(n) => (0..n).collect(),
                None => junction_ports.iter().map(|(p, _)| *p).collect(),
            },
            NodeKind::Composite { exposed, .. } => (0..exposed.len()).collect(),
        }
    }

    fn composite_parts(&mut self, id: NodeId) -> Result<CompositeParts<'_>, ModelError> {
        let name = self.node(id).name.clone();
        match &mut self.node_mut(id).kind {
            NodeKind::Composite { children, bonds, exposed } => Ok((children, bonds, exposed)),
            NodeKind::Atomic { .. } => Err(ModelError::NotComposite(name)),
        }
    }

    fn is_ancestor(&self, maybe_ancestor: NodeId, mut node: NodeId) -> bool {
        loop {
            if node == maybe_ancestor {
                return true;
            }
            match self.node(node).parent {
                Some(p) => node = p,
                None => return false,
            }
        }
    }

    /// Appends children in order. Clashing names get a `#k` suffix.
    pub fn add(&mut self, parent: NodeId, children: &[NodeId]) -> Result<(), ModelError> {
        self.check(parent)?;
        if !self.is_composite(parent) {
            return Err(ModelError::NotComposite(self.name(parent).to_owned()));
        }
        for &child in children {
            self.check(child)?;
            if let Some(p) = self.node(child).parent {
                return Err(ModelError::AlreadyOwned {
                    child: self.name(child).to_owned(),
                    parent: self.name(p).to_owned(),
                });
            }
            if self.is_ancestor(child, parent) {
                return Err(ModelError::Cycle(self.name(child).to_owned()));
            }
            let name = self.unique_child_name(parent, self.name(child));
            let node = self.node_mut(child);
            node.parent = Some(parent);
            if let NodeKind::Atomic { atomic, .. } = &mut node.kind {
                atomic.set_name(name.clone());
            }
            node.name = name;
            self.composite_parts(parent)?.0.push(child);
        }
        Ok(())
    }

    fn unique_child_name(&self, parent: NodeId, name: &str) -> String {
        let taken = |n: &str| self.children(parent).iter().any(|&c| self.name(c) == n);
        if !taken(name) {
            return name.to_owned();
        }
        (1..)
            .map(|k| format!("{name}#{k}"))
            .find(|n| !taken(n))
            .expect("unbounded suffixes")
    }

    /// Detaches a child together with its bonds and exposures.
    pub fn remove(&mut self, parent: NodeId, child: NodeId) -> Result<(), ModelError> {
        self.check(parent)?;
        self.check(child)?;
        if self.node(child).parent != Some(parent) {
            return Err(ModelError::NotAChild {
                child: self.name(child).to_owned(),
                parent: self.name(parent).to_owned(),
            });
        }
        let bonded: Vec<Bond> = self.bonds(parent).iter().copied().filter(|b| b.touches(child)).collect();
        for b in bonded {
            self.drop_bond(parent, b);
        }
        let dropped: Vec<usize> = self
            .exposures(parent)
            .iter()
            .enumerate()
            .filter(|(_, e)| e.ss == child)
            .map(|(i, _)| i)
            .collect();
        for index in dropped.into_iter().rev() {
            self.unexpose_index(parent, index);
        }
        let (children, _, _) = self.composite_parts(parent)?;
        children.retain(|&c| c != child);
        self.node_mut(child).parent = None;
        Ok(())
    }

    // Removes outer port `index` of `composite`, dropping bonds to it one
    // level up and shifting later outer indices down.
    fn unexpose_index(&mut self, composite: NodeId, index: usize) {
        if let Some(grand) = self.node(composite).parent {
            let hit: Vec<Bond> = self
                .bonds(grand)
                .iter()
                .copied()
                .filter(|b| [b.head, b.tail].iter().any(|p| p.node == composite && p.port == index))
                .collect();
            for b in hit {
                self.drop_bond(grand, b);
            }
            if let Ok((_, bonds, _)) = self.composite_parts(grand) {
                for b in bonds.iter_mut() {
                    for p in [&mut b.head, &mut b.tail] {
                        if p.node == composite && p.port > index {
                            p.port -= 1;
                        }
                    }
                }
            }
        }
        if let Ok((_, _, exposed)) = self.composite_parts(composite) {
            exposed.remove(index);
        }
    }

    fn drop_bond(&mut self, parent: NodeId, bond: Bond) {
        if let Ok((_, bonds, _)) = self.composite_parts(parent) {
            bonds.retain(|b| *b != bond);
        }
        for p in [bond.head, bond.tail] {
            if let NodeKind::Atomic { atomic, junction_ports, .. } = &mut self.node_mut(p.node).kind {
                if atomic.kind().is_junction() {
                    junction_ports.retain(|(id, _)| *id != p.port);
                }
            }
        }
    }

    fn bonded_ports(&self, parent: NodeId) -> Vec<PortId> {
        self.bonds(parent).iter().flat_map(|b| [b.head, b.tail]).collect()
    }

    fn port_name(&self, node: NodeId, port: usize) -> String {
        match self.exposures(node).get(port) {
            Some(e) if self.is_composite(node) => e.label.clone(),
            _ => port.to_string(),
        }
    }

    /// Resolves an endpoint for `connect`; `None` in the port slot means a
    /// junction port to be materialized.
    fn resolve_free(&self, parent: NodeId, ep: &Endpoint) -> Result<Option<PortId>, ModelError> {
        let node = ep.node();
        let name = || self.name(node).to_owned();
        if self.atomic(node).is_some_and(|a| a.kind().is_junction()) {
            return match ep {
                Endpoint::Node(_) => Ok(None),
                Endpoint::Index(_, k) if *k == self.junction_ports(node).len() => Ok(None),
                Endpoint::Index(_, k) => Err(ModelError::PortInUse {
                    node: name(),
                    port: k.to_string(),
                }),
                Endpoint::Label(_, l) => Err(ModelError::NoSuchPort {
                    node: name(),
                    port: l.clone(),
                }),
            };
        }
        let used = self.bonded_ports(parent);
        let free: Vec<usize> = self
            .port_ids(node)
            .into_iter()
            .filter(|&p| !used.contains(&PortId { node, port: p }))
            .collect();
        let port = match ep {
            Endpoint::Node(_) => match free.as_slice() {
                [p] => *p,
                [] => return Err(ModelError::NoFreePort(name())),
                _ => return Err(ModelError::Ambiguous(name())),
            },
            Endpoint::Index(_, k) => *k,
            Endpoint::Label(_, l) => self.label_index(node, l)?,
        };
        if !self.port_ids(node).contains(&port) {
            return Err(ModelError::NoSuchPort {
                node: name(),
                port: port.to_string(),
            });
        }
        if !free.contains(&port) {
            return Err(ModelError::PortInUse {
                node: name(),
                port: self.port_name(node, port),
            });
        }
        Ok(Some(PortId { node, port }))
    }

    fn label_index(&self, node: NodeId, label: &str) -> Result<usize, ModelError> {
        self.exposures(node)
            .iter()
            .position(|e| e.label == label)
            .ok_or_else(|| ModelError::NoSuchPort {
                node: self.name(node).to_owned(),
                port: label.to_owned(),
            })
    }

    fn common_parent(&self, a: NodeId, b: NodeId) -> Result<NodeId, ModelError> {
        self.check(a)?;
        self.check(b)?;
        match (self.node(a).parent, self.node(b).parent) {
            (Some(p), Some(q)) if p == q => Ok(p),
            _ => Err(ModelError::NoCommonParent(self.name(a).to_owned(), self.name(b).to_owned())),
        }
    }

    /// Bonds `head` to `tail`. A junction named as the head gets an outward
    /// port, as the tail an inward one.
    pub fn connect(&mut self, head: impl Into<Endpoint>, tail: impl Into<Endpoint>) -> Result<Bond, ModelError> {
        let (head, tail) = (head.into(), tail.into());
        let parent = self.common_parent(head.node(), tail.node())?;
        let h = self.resolve_free(parent, &head)?;
        let t = self.resolve_free(parent, &tail)?;
        if head.node() == tail.node() && h.is_some() && h == t {
            return Err(ModelError::SelfBond);
        }
        let h = h.unwrap_or_else(|| self.materialize(head.node(), Orientation::Outward));
        let t = t.unwrap_or_else(|| self.materialize(tail.node(), Orientation::Inward));
        let bond = Bond { head: h, tail: t };
        self.composite_parts(parent)?.1.push(bond);
        Ok(bond)
    }

    /// Adds an explicit bond between existing or fresh ports, preserving
    /// junction orientations. Used when rewiring a tree.
    pub(crate) fn push_bond(&mut self, parent: NodeId, head: (NodeId, Option<usize>, Orientation), tail: (NodeId, Option<usize>, Orientation)) -> Bond {
        let mut end = |(node, port, o): (NodeId, Option<usize>, Orientation)| match port {
            Some(port) => PortId { node, port },
            None => self.materialize(node, o),
        };
        let bond = Bond {
            head: end(head),
            tail: end(tail),
        };
        self.composite_parts(parent).expect("composite").1.push(bond);
        bond
    }

    fn materialize(&mut self, node: NodeId, orientation: Orientation) -> PortId {
        match &mut self.node_mut(node).kind {
            NodeKind::Atomic { junction_ports, next_port, .. } => {
                let port = *next_port;
                *next_port += 1;
                junction_ports.push((port, orientation));
                PortId { node, port }
            }
            NodeKind::Composite { .. } => unreachable!("only junctions materialize ports"),
        }
    }

    /// Removes the bond between the named endpoints (either direction).
    pub fn disconnect(&mut self, a: impl Into<Endpoint>, b: impl Into<Endpoint>) -> Result<(), ModelError> {
        let (a, b) = (a.into(), b.into());
        let parent = self.common_parent(a.node(), b.node())?;
        let ma = self.port_filter(&a)?;
        let mb = self.port_filter(&b)?;
        let hits: Vec<Bond> = self
            .bonds(parent)
            .iter()
            .copied()
            .filter(|bd| {
                (matches_end(bd.head, a.node(), ma) && matches_end(bd.tail, b.node(), mb))
                    || (matches_end(bd.head, b.node(), mb) && matches_end(bd.tail, a.node(), ma))
            })
            .collect();
        match hits.as_slice() {
            [] => Err(ModelError::NoSuchBond(self.name(a.node()).to_owned(), self.name(b.node()).to_owned())),
            [bond] => {
                self.drop_bond(parent, *bond);
                Ok(())
            }
            _ => Err(ModelError::Ambiguous(self.name(a.node()).to_owned())),
        }
    }

    fn port_filter(&self, ep: &Endpoint) -> Result<Option<usize>, ModelError> {
        Ok(match ep {
            Endpoint::Node(_) => None,
            Endpoint::Index(n, k) => {
                if self.atomic(*n).is_some_and(|a| a.kind().is_junction()) {
                    let ports = self.junction_ports(*n);
                    Some(ports.get(*k).map(|(id, _)| *id).ok_or_else(|| ModelError::NoSuchPort {
                        node: self.name(*n).to_owned(),
                        port: k.to_string(),
                    })?)
                } else {
                    Some(*k)
                }
            }
            Endpoint::Label(n, l) => Some(self.label_index(*n, l)?),
        })
    }

    /// Exposes an SS child as an outer port of its parent. Returns the outer index.
    pub fn expose(&mut self, ss: NodeId, label: Option<&str>) -> Result<usize, ModelError> {
        self.check(ss)?;
        let name = self.name(ss).to_owned();
        match self.atomic(ss) {
            Some(a) if a.kind() == Kind::SS => {}
            Some(a) => return Err(ModelError::NotSs(name, a.kind().to_string())),
            None => return Err(ModelError::NotSs(name, "a composite".to_owned())),
        }
        let parent = self.node(ss).parent.ok_or_else(|| ModelError::Unattached(name.clone()))?;
        let parent_name = self.name(parent).to_owned();
        let (_, _, exposed) = self.composite_parts(parent)?;
        if exposed.iter().any(|e| e.ss == ss) {
            return Err(ModelError::AlreadyExposed(name));
        }
        let index = exposed.len();
        let label = label.map_or_else(|| index.to_string(), str::to_owned);
        if exposed.iter().any(|e| e.label == label) {
            return Err(ModelError::DuplicateLabel {
                parent: parent_name,
                label,
            });
        }
        exposed.push(Exposure { label, ss });
        Ok(index)
    }

    /// `<root>:/a/b` for nested nodes, `<root>:/` for the root itself.
    pub fn uri(&self, id: NodeId) -> String {
        let mut path = Vec::new();
        let mut node = id;
        while let Some(p) = self.node(node).parent {
            path.push(self.name(node));
            node = p;
        }
        path.reverse();
        format!("{}:/{}", self.name(node), path.join("/"))
    }

    pub fn resolve(&self, root: NodeId, uri: &str) -> Result<NodeId, ModelError> {
        let fail = || ModelError::Unresolvable(uri.to_owned());
        let (head, rest) = uri.split_once(":/").ok_or_else(fail)?;
        if head != self.name(root) {
            return Err(fail());
        }
        let mut node = root;
        for seg in rest.split('/').filter(|s| !s.is_empty()) {
            node = *self
                .children(node)
                .iter()
                .find(|&&c| self.name(c) == seg)
                .ok_or_else(fail)?;
        }
        Ok(node)
    }

    /// Atomic descendants in depth-first insertion order.
    pub fn atomics(&self, root: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.walk(root, &mut |id| {
            if !self.is_composite(id) {
                out.push(id);
            }
        });
        out
    }

    fn walk(&self, id: NodeId, visit: &mut dyn FnMut(NodeId)) {
        visit(id);
        for &c in self.children(id) {
            self.walk(c, visit);
        }
    }

    /// `x_0, x_1, …` numbered depth-first in insertion order.
    pub fn state_vars(&self, root: NodeId) -> Vec<Sym> {
        let n: usize = self.atomics(root).iter().map(|&a| self.atomic(a).expect("atomic").state_count()).sum();
        (0..n as u32).map(Sym::state).collect()
    }

    /// State ranges per storage component, in numbering order.
    pub fn state_owners(&self, root: NodeId) -> Vec<(NodeId, std::ops::Range<usize>)> {
        let mut next = 0;
        let mut out = Vec::new();
        for a in self.atomics(root) {
            let k = self.atomic(a).expect("atomic").state_count();
            if k > 0 {
                out.push((a, next..next + k));
                next += k;
            }
        }
        out
    }

    /// Symbolic parameters in first-use order.
    pub fn params(&self, root: NodeId) -> Vec<Sym> {
        let mut out: Vec<Sym> = Vec::new();
        for a in self.atomics(root) {
            for p in self.atomic(a).expect("atomic").parameters() {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// `u_0, u_1, …`, one per value-less Se/Sf in traversal order.
    pub fn control_vars(&self, root: NodeId) -> Vec<Sym> {
        let n: usize = self.atomics(root).iter().map(|&a| self.atomic(a).expect("atomic").control_count()).sum();
        (0..n as u32).map(Sym::control).collect()
    }

    /// Structural problems that block reduction: unbonded ports and
    /// unexposed SS components, reported by URI.
    pub fn validate(&self, root: NodeId) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        self.walk(root, &mut |id| {
            if !self.is_composite(id) {
                return;
            }
            let bonded = self.bonded_ports(id);
            for &child in self.children(id) {
                let is_ss = self.atomic(child).is_some_and(|a| a.kind() == Kind::SS);
                if is_ss {
                    if !self.exposures(id).iter().any(|e| e.ss == child) {
                        out.push(Diagnostic::UnexposedSs(self.uri(child)));
                    }
                    continue;
                }
                for port in self.port_ids(child) {
                    if !bonded.contains(&PortId { node: child, port }) {
                        out.push(Diagnostic::UnbondedPort {
                            uri: self.uri(child),
                            port: self.port_name(child, port),
                        });
                    }
                }
            }
        });
        out
    }
}

fn matches_end(p: PortId, node: NodeId, port: Option<usize>) -> bool {
    p.node == node && port.is_none_or(|k| k == p.port)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    UnbondedPort { uri: String, port: String },
    UnexposedSs(String),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnbondedPort { uri, port } => write!(f, "unbonded port {port} of {uri}"),
            Diagnostic::UnexposedSs(uri) => write!(f, "SS component {uri} is not exposed"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::{new_atomic, ParamValue, Value};

    fn atom(arena: &mut Arena, kind: Kind, name: &str) -> NodeId {
        let value = match kind.parameter_name() {
            Some(_) => Value::Param(ParamValue::from(1)),
            None => Value::Default,
        };
        arena.insert(new_atomic(kind, name, value).unwrap())
    }

    #[test]
    fn new_composite_names() {
        let mut a = Arena::new();
        let m = a.new_composite("New Model").unwrap();
        assert!(a.children(m).is_empty() && a.bonds(m).is_empty());
        assert_eq!(a.new_composite(""), Err(ModelError::BadName));
    }

    #[test]
    fn add_orders_and_guards() {
        let mut a = Arena::new();
        let m = a.new_composite("m").unwrap();
        let r = atom(&mut a, Kind::R, "R");
        let c = atom(&mut a, Kind::C, "C");
        let one = atom(&mut a, Kind::One, "1");
        a.add(m, &[r, c, one]).unwrap();
        assert_eq!(a.children(m), &[r, c, one]);
        assert!(matches!(a.add(m, &[m]), Err(ModelError::Cycle(_))));
        assert!(matches!(a.add(m, &[r]), Err(ModelError::AlreadyOwned { .. })));
    }

    #[test]
    fn duplicate_sibling_names_are_suffixed() {
        let mut a = Arena::new();
        let m = a.new_composite("m").unwrap();
        let r1 = atom(&mut a, Kind::R, "R");
        let r2 = atom(&mut a, Kind::R, "R");
        let r3 = atom(&mut a, Kind::R, "R");
        a.add(m, &[r1, r2, r3]).unwrap();
        assert_eq!(a.name(r2), "R#1");
        assert_eq!(a.name(r3), "R#2");
        assert_eq!(a.resolve(m, "m:/R#1").unwrap(), r2);
    }

    #[test]
    fn connect_disconnect_round_trip() {
        let mut a = Arena::new();
        let m = a.new_composite("m").unwrap();
        let r = atom(&mut a, Kind::R, "R");
        let c = atom(&mut a, Kind::C, "C");
        let one = atom(&mut a, Kind::One, "1");
        a.add(m, &[r, c, one]).unwrap();
        a.connect(one, r).unwrap();
        let before = a.bonds(m).to_vec();
        a.connect(one, c).unwrap();
        assert_eq!(a.junction_ports(one).len(), 2);
        a.disconnect(one, c).unwrap();
        assert_eq!(a.bonds(m), before.as_slice());
        assert_eq!(a.junction_ports(one).len(), 1);
        assert!(matches!(a.disconnect(one, c), Err(ModelError::NoSuchBond(..))));
    }

    #[test]
    fn port_rules() {
        let mut a = Arena::new();
        let m = a.new_composite("m").unwrap();
        let gy = atom(&mut a, Kind::GY, "GY");
        let r = atom(&mut a, Kind::R, "R");
        let c = atom(&mut a, Kind::C, "C");
        a.add(m, &[gy, r, c]).unwrap();
        assert!(matches!(a.connect(gy, r), Err(ModelError::Ambiguous(_))));
        a.connect((gy, 1), r).unwrap();
        assert!(matches!(a.connect((gy, 1), c), Err(ModelError::PortInUse { .. })));
        a.connect(gy, c).unwrap();
        let other = a.new_composite("other").unwrap();
        let r2 = atom(&mut a, Kind::R, "R2");
        a.add(other, &[r2]).unwrap();
        assert!(matches!(a.connect(r2, c), Err(ModelError::NoCommonParent(..))));
    }

    #[test]
    fn junction_orientation_follows_argument_order() {
        let mut a = Arena::new();
        let m = a.new_composite("m").unwrap();
        let one = atom(&mut a, Kind::One, "1");
        let r = atom(&mut a, Kind::R, "R");
        let ss = atom(&mut a, Kind::SS, "SS");
        a.add(m, &[one, r, ss]).unwrap();
        a.connect(one, r).unwrap();
        a.connect(ss, one).unwrap();
        let o: Vec<Orientation> = a.junction_ports(one).iter().map(|(_, o)| *o).collect();
        assert_eq!(o, vec![Orientation::Outward, Orientation::Inward]);
    }

    #[test]
    fn expose_and_label_ports() {
        let mut a = Arena::new();
        let root = a.new_composite("root").unwrap();
        let osc = a.new_composite("Osc_0").unwrap();
        let ss = atom(&mut a, Kind::SS, "SS");
        let r = atom(&mut a, Kind::R, "R");
        a.add(osc, &[ss, r]).unwrap();
        a.connect(ss, r).unwrap();
        assert_eq!(a.expose(ss, Some("P_in")).unwrap(), 0);
        assert!(matches!(a.expose(r, None), Err(ModelError::NotSs(..))));
        let zero = atom(&mut a, Kind::Zero, "0");
        a.add(root, &[zero, osc]).unwrap();
        a.connect(zero, (osc, "P_in")).unwrap();
        assert_eq!(a.bonds(root).len(), 1);
        assert_eq!(a.uri(r), "root:/Osc_0/R");
        assert_eq!(a.uri(root), "root:/");
        assert_eq!(a.resolve(root, "root:/Osc_0/R").unwrap(), r);
        assert!(a.resolve(root, "root:/nope").is_err());
    }

    #[test]
    fn default_expose_label_is_index() {
        let mut a = Arena::new();
        let m = a.new_composite("m").unwrap();
        let ss = atom(&mut a, Kind::SS, "SS");
        a.add(m, &[ss]).unwrap();
        a.expose(ss, None).unwrap();
        assert_eq!(a.exposures(m)[0].label, "0");
    }

    #[test]
    fn remove_drops_bonds_and_outer_ports() {
        let mut a = Arena::new();
        let root = a.new_composite("root").unwrap();
        let inner = a.new_composite("inner").unwrap();
        let ss = atom(&mut a, Kind::SS, "SS");
        a.add(inner, &[ss]).unwrap();
        a.expose(ss, None).unwrap();
        let r = atom(&mut a, Kind::R, "R");
        a.add(root, &[r, inner]).unwrap();
        a.connect(r, inner).unwrap();
        a.remove(inner, ss).unwrap();
        assert!(a.exposures(inner).is_empty());
        assert!(a.bonds(root).is_empty());
        assert!(matches!(a.remove(root, ss), Err(ModelError::NotAChild { .. })));
        a.remove(root, r).unwrap();
        assert_eq!(a.parent(r), None);
    }

    #[test]
    fn enumeration_is_depth_first() {
        let mut a = Arena::new();
        let root = a.new_composite("root").unwrap();
        assert!(a.state_vars(root).is_empty());
        let c = atom(&mut a, Kind::C, "C");
        let sub = a.new_composite("sub").unwrap();
        let i = atom(&mut a, Kind::I, "I");
        let se = a.insert(new_atomic(Kind::Se, "Se", Value::Default).unwrap());
        a.add(sub, &[i, se]).unwrap();
        a.add(root, &[sub, c]).unwrap();
        assert_eq!(a.state_vars(root), vec![Sym::state(0), Sym::state(1)]);
        assert_eq!(a.state_owners(root)[0].0, i);
        assert_eq!(a.control_vars(root), vec![Sym::control(0)]);
    }

    #[test]
    fn validation_reports_open_ports() {
        let mut a = Arena::new();
        let m = a.new_composite("m").unwrap();
        let r = atom(&mut a, Kind::R, "R");
        let ss = atom(&mut a, Kind::SS, "SS");
        a.add(m, &[r, ss]).unwrap();
        let d = a.validate(m);
        assert_eq!(d.len(), 2);
        assert!(d.contains(&Diagnostic::UnexposedSs("m:/SS".into())));
    }
}
