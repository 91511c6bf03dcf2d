#![allow(dead_code)]

use std::collections::BTreeMap;

use bondgraph_core::components::{new_atomic, Kind, ParamValue, Value};
use bondgraph_core::model::{Arena, Endpoint, NodeId};
use bondgraph_core::reduce::{assemble, nullspace_oracle, reduce};
use bondgraph_core::symexpr::{evaluate_exact, linear_split, Rational, Sym};
use rand::seq::SliceRandom;
use rand::Rng;

pub const LINEAR_KINDS: [Kind; 8] = [Kind::R, Kind::C, Kind::I, Kind::TF, Kind::GY, Kind::Zero, Kind::One, Kind::Se];

pub fn random_rational(rng: &mut impl Rng) -> Rational {
    let q: i64 = rng.random_range(1..=4);
    let p: i64 = rng.random_range(1..=4 * q);
    let r = Rational::new(p.into(), q.into());
    let quarter = Rational::new(1.into(), 4.into());
    if r < quarter {
        quarter
    } else {
        r
    }
}

/// A closed linear model of at most six components with every port bonded.
pub fn random_linear_model(rng: &mut impl Rng) -> (Arena, NodeId) {
    let mut arena = Arena::new();
    let root = arena.new_composite("random").unwrap();
    let n = rng.random_range(1..=5);
    let mut junctions = Vec::new();
    let mut ports: Vec<(NodeId, Option<usize>)> = Vec::new();
    for i in 0..n {
        let kind = LINEAR_KINDS[rng.random_range(0..LINEAR_KINDS.len())];
        let value = match kind {
            Kind::R | Kind::C | Kind::I | Kind::TF | Kind::GY => Value::Param(ParamValue::Number(random_rational(rng))),
            _ => Value::Default,
        };
        let node = arena.insert(new_atomic(kind, &format!("c{i}"), value).unwrap());
        arena.add(root, &[node]).unwrap();
        match kind.fixed_ports() {
            None => junctions.push(node),
            Some(1) => ports.push((node, None)),
            Some(k) => ports.extend((0..k).map(|p| (node, Some(p)))),
        }
    }
    ports.shuffle(rng);
    let end = |(node, port): (NodeId, Option<usize>)| match port {
        None => Endpoint::Node(node),
        Some(k) => Endpoint::Index(node, k),
    };
    while let Some(a) = ports.pop() {
        let partner = ports.iter().position(|p| p.0 != a.0);
        if partner.is_none() && junctions.is_empty() {
            let kind = if rng.random_bool(0.5) { Kind::One } else { Kind::Zero };
            let node = arena.insert(new_atomic(kind, "helper", Value::Default).unwrap());
            arena.add(root, &[node]).unwrap();
            junctions.push(node);
        }
        let to_junction = !junctions.is_empty() && (partner.is_none() || rng.random_bool(0.4));
        let (x, y) = if to_junction {
            let j = junctions[rng.random_range(0..junctions.len())];
            (end(a), Endpoint::Node(j))
        } else {
            let b = ports.remove(partner.expect("partner exists without junctions"));
            (end(a), end(b))
        };
        if rng.random_bool(0.5) {
            arena.connect(x, y).unwrap();
        } else {
            arena.connect(y, x).unwrap();
        }
    }
    if junctions.len() == 2 && rng.random_bool(0.5) {
        arena.connect(junctions[0], junctions[1]).unwrap();
    }
    (arena, root)
}

/// Every oracle nullspace vector of the assembled system satisfies the
/// reduced relations, and both solution spaces have the same dimension.
pub fn check_solution_preservation(arena: &Arena, root: NodeId) -> Result<(), String> {
    let sys = assemble(arena, root).map_err(|e| e.to_string())?;
    if !sys.is_linear_numeric() {
        return Err("assembled system is not linear".into());
    }
    let l = sys.numeric_matrix().ok_or("assembled system is not linear")?;
    let full = sys.space.len();
    let basis = if l.is_empty() { identity(full) } else { nullspace_oracle(&l) };
    let red = reduce(arena, root).map_err(|e| e.to_string())?;
    for v in &basis {
        let values: BTreeMap<Sym, Rational> = sys.space.syms().iter().cloned().zip(v.iter().cloned()).collect();
        for r in &red.relations {
            let value = evaluate_exact(r, &values).map_err(|e| e.to_string())?;
            if value != Rational::from_integer(0.into()) {
                return Err(format!("relation {r} evaluates to {value}"));
            }
        }
    }
    let kept = red.kept();
    let mut rows = Vec::new();
    for r in &red.relations {
        let (linear, rest) = linear_split(r, &kept);
        if !rest.is_zero() {
            return Err(format!("reduced relation {r} is not linear"));
        }
        let mut row = vec![Rational::from_integer(0.into()); kept.len()];
        for (j, c) in linear {
            row[j] = c.as_constant().ok_or_else(|| format!("symbolic coefficient in {r}"))?;
        }
        rows.push(row);
    }
    let reduced_dim = if rows.is_empty() { kept.len() } else { nullspace_oracle(&rows).len() };
    if reduced_dim != basis.len() {
        return Err(format!("nullspace dimension {} assembled vs {reduced_dim} reduced", basis.len()));
    }
    Ok(())
}

fn identity(n: usize) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Rational::from_integer(((i == j) as i64).into()))
                .collect()
        })
        .collect()
}
