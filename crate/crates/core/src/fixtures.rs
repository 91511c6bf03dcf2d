//! Built-in example models.

use std::collections::BTreeMap;

use crate::components::{new_atomic, Hamiltonian, Kind, ParamValue, Value};
use crate::model::{Arena, NodeId};
use crate::symexpr::{integer, rational, Rational};

/// Names accepted by [`build`].
pub const NAMES: [&str; 6] = ["rlc", "decay", "hamiltonian", "oscillator", "cavity", "lc"];

/// Builds a named fixture into a fresh arena.
pub fn build(name: &str) -> Option<(Arena, NodeId)> {
    let mut arena = Arena::new();
    let root = match name {
        "rlc" => rlc(&mut arena),
        "decay" => decay(&mut arena),
        "hamiltonian" => hamiltonian(&mut arena),
        "oscillator" => linear_osc(&mut arena, rational(17, 10), 0),
        "cavity" => cavity(&mut arena),
        "lc" => lc(&mut arena),
        _ => return None,
    };
    Some((arena, root))
}

fn num(v: Rational) -> Value {
    Value::Param(ParamValue::Number(v))
}

fn atom(arena: &mut Arena, kind: Kind, name: &str, value: Value) -> NodeId {
    arena.insert(new_atomic(kind, name, value).expect("fixture component"))
}

fn junction(arena: &mut Arena, kind: Kind, name: &str) -> NodeId {
    atom(arena, kind, name, Value::Default)
}

/// Voltage source driving R, L and C in series (control `u_0`).
pub fn rlc(arena: &mut Arena) -> NodeId {
    let model = arena.new_composite("RLC").expect("name");
    let se = atom(arena, Kind::Se, "Se", Value::Default);
    let r = atom(arena, Kind::R, "R", num(integer(1)));
    let l = atom(arena, Kind::I, "L", num(integer(1)));
    let c = atom(arena, Kind::C, "C", num(integer(1)));
    let law = junction(arena, Kind::One, "conservation_law");
    arena.add(model, &[se, r, l, c, law]).expect("add");
    for comp in [r, l, c] {
        arena.connect(law, comp).expect("bond");
    }
    arena.connect(se, law).expect("bond");
    model
}

/// C = 1 discharging through R = 1: `dx_0 = -x_0`.
pub fn decay(arena: &mut Arena) -> NodeId {
    let model = arena.new_composite("RC").expect("name");
    let c = atom(arena, Kind::C, "C", num(integer(1)));
    let r = atom(arena, Kind::R, "R", num(integer(1)));
    let law = junction(arena, Kind::One, "conservation_law");
    arena.add(model, &[c, r, law]).expect("add");
    arena.connect(law, c).expect("bond");
    arena.connect(law, r).expect("bond");
    model
}

/// Lossless C = 1, I = 1 loop.
pub fn lc(arena: &mut Arena) -> NodeId {
    let model = arena.new_composite("LC").expect("name");
    let c = atom(arena, Kind::C, "C", num(integer(1)));
    let l = atom(arena, Kind::I, "L", num(integer(1)));
    let law = junction(arena, Kind::One, "conservation_law");
    arena.add(model, &[c, l, law]).expect("add");
    arena.connect(law, c).expect("bond");
    arena.connect(law, l).expect("bond");
    model
}

/// A quadratic Hamiltonian closed by a unit gyrator and a common-flow
/// junction; reduces to Hamilton's equations.
pub fn hamiltonian(arena: &mut Arena) -> NodeId {
    let model = arena.new_composite("Hamiltonian").expect("name");
    let h = Hamiltonian::new("(x_0^2 + x_1^2)/2", BTreeMap::new()).expect("hamiltonian");
    let ph = atom(arena, Kind::PH, "PH", Value::Hamiltonian(h));
    let gy = atom(arena, Kind::GY, "GY", num(integer(1)));
    let law = junction(arena, Kind::One, "common_flow");
    arena.add(model, &[ph, gy, law]).expect("add");
    arena.connect((ph, 1), (gy, 0)).expect("bond");
    arena.connect(law, (gy, 1)).expect("bond");
    arena.connect(law, (ph, 0)).expect("bond");
    model
}

/// Damped oscillator `Osc_<index>` with I = C = 1/freq and R = 1/10,
/// exposing port `P_in`.
pub fn linear_osc(arena: &mut Arena, freq: Rational, index: usize) -> NodeId {
    let model = arena.new_composite(&format!("Osc_{index}")).expect("name");
    let r = atom(arena, Kind::R, "R", num(rational(1, 10)));
    let l = atom(arena, Kind::I, "L", num(freq.recip()));
    let c = atom(arena, Kind::C, "C", num(freq.recip()));
    let port = atom(arena, Kind::SS, "port", Value::Default);
    let law = junction(arena, Kind::One, "conservation_law");
    arena.add(model, &[r, l, c, port, law]).expect("add");
    for comp in [r, l, c] {
        arena.connect(law, comp).expect("bond");
    }
    arena.connect(port, law).expect("bond");
    arena.expose(port, Some("P_in")).expect("expose");
    model
}

/// Optical cavity with a displacement-dependent frequency, driven through an
/// exposed source and coupled to five oscillators at 1.7, 1.9, 2.0, 2.1, 2.3.
pub fn cavity(arena: &mut Arena) -> NodeId {
    let model = arena.new_composite("Cavity Model").expect("name");
    let params = BTreeMap::from([
        ("G".to_owned(), ParamValue::from(1)),
        ("w".to_owned(), ParamValue::from(6)),
    ]);
    let h = Hamiltonian::new("(w + G*x_0)*(x_1^2 + x_2^2)/2", params).expect("hamiltonian");
    let ph = atom(arena, Kind::PH, "port_hamiltonian", Value::Hamiltonian(h));
    let gy = atom(arena, Kind::GY, "symplectic_gyrator", num(integer(1)));
    let em_field = junction(arena, Kind::One, "em_field");
    arena.add(model, &[ph, gy, em_field]).expect("add");
    arena.connect(em_field, (ph, 1)).expect("bond");
    arena.connect(em_field, (gy, 1)).expect("bond");
    arena.connect((ph, 2), (gy, 0)).expect("bond");

    let dissipation = atom(arena, Kind::R, "dissipation", num(integer(1)));
    let source = atom(arena, Kind::SS, "photon_source", Value::Default);
    arena.add(model, &[dissipation, source]).expect("add");
    arena.connect(em_field, dissipation).expect("bond");
    arena.connect(source, em_field).expect("bond");
    arena.expose(source, None).expect("expose");

    let mean_field = junction(arena, Kind::Zero, "osc_mean_field");
    arena.add(model, &[mean_field]).expect("add");
    arena.connect(mean_field, (ph, 0)).expect("bond");
    let frequencies = [rational(17, 10), rational(19, 10), integer(2), rational(21, 10), rational(23, 10)];
    for (index, freq) in frequencies.into_iter().enumerate() {
        let osc = linear_osc(arena, freq, index);
        arena.add(model, &[osc]).expect("add");
        arena.connect(mean_field, (osc, "P_in")).expect("bond");
    }
    model
}
