//! Atomic component library: ports, parameters, states and relation templates.
//!
//! Relations are written in *local* coordinates: port `k` owns `e_k`/`f_k`,
//! state `k` owns `x_k`/`dx_k`, and a source owns `u_0`. The reducer renames
//! them into the coordinate space of the enclosing composite.

use std::collections::BTreeMap;
use std::fmt;

use crate::symexpr::{differentiate, parse_expr, Expr, ExprError, Rational, Sym, SymbolTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    R,
    C,
    I,
    TF,
    GY,
    Se,
    Sf,
    Zero,
    One,
    SS,
    PH,
}

impl Kind {
    pub const ALL: [Kind; 11] = [
        Kind::R,
        Kind::C,
        Kind::I,
        Kind::TF,
        Kind::GY,
        Kind::Se,
        Kind::Sf,
        Kind::Zero,
        Kind::One,
        Kind::SS,
        Kind::PH,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::R => "R",
            Kind::C => "C",
            Kind::I => "I",
            Kind::TF => "TF",
            Kind::GY => "GY",
            Kind::Se => "Se",
            Kind::Sf => "Sf",
            Kind::Zero => "Zero",
            Kind::One => "One",
            Kind::SS => "SS",
            Kind::PH => "PH",
        }
    }

    /// Accepts the canonical names plus `"0"` and `"1"` for junctions.
    pub fn from_name(name: &str) -> Option<Kind> {
        match name {
            "0" => Some(Kind::Zero),
            "1" => Some(Kind::One),
            _ => Kind::ALL.into_iter().find(|k| k.name() == name),
        }
    }

    pub fn is_junction(self) -> bool {
        matches!(self, Kind::Zero | Kind::One)
    }

    /// Fixed port count; `None` for junctions.
    pub fn fixed_ports(self) -> Option<usize> {
        match self {
            Kind::Zero | Kind::One => None,
            Kind::TF | Kind::GY => Some(2),
            Kind::PH => None,
            _ => Some(1),
        }
    }

    /// Name of the scalar parameter, if the kind has one.
    pub fn parameter_name(self) -> Option<&'static str> {
        match self {
            Kind::R => Some("r"),
            Kind::C => Some("C"),
            Kind::I => Some("L"),
            Kind::TF => Some("n"),
            Kind::GY => Some("rho"),
            _ => None,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Port orientation. Variables are always referenced inward; the sign only
/// enters the One-junction law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Inward,
    Outward,
}

impl Orientation {
    pub fn sign(self) -> i64 {
        match self {
            Orientation::Inward => 1,
            Orientation::Outward => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiplicity {
    Fixed,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PortDef {
    pub index: usize,
    pub orientation: Orientation,
    pub multiplicity: Multiplicity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamValue {
    Number(Rational),
    Symbol(String),
}

impl ParamValue {
    pub fn to_expr(&self) -> Expr {
        match self {
            ParamValue::Number(r) => Expr::constant(r.clone()),
            ParamValue::Symbol(name) => Expr::sym(Sym::param(name)),
        }
    }
}

impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        ParamValue::Number(crate::symexpr::integer(v))
    }
}

impl From<Rational> for ParamValue {
    fn from(v: Rational) -> Self {
        ParamValue::Number(v)
    }
}

/// An energy function over local states `x_0..x_{dim-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hamiltonian {
    text: String,
    params: BTreeMap<String, ParamValue>,
    dim: usize,
    explicit_dim: bool,
    expr: Expr,
}

impl Hamiltonian {
    /// Parses `text` with `x_k` as states and the keys of `params` as
    /// parameters. The dimension is one past the highest state index used.
    pub fn new(text: &str, params: BTreeMap<String, ParamValue>) -> Result<Hamiltonian, ComponentError> {
        Hamiltonian::build(text, params, None)
    }

    /// As [`Hamiltonian::new`] with an explicit state count, e.g. for `H = 0`.
    pub fn with_dim(
        text: &str,
        params: BTreeMap<String, ParamValue>,
        dim: usize,
    ) -> Result<Hamiltonian, ComponentError> {
        Hamiltonian::build(text, params, Some(dim))
    }

    fn build(
        text: &str,
        params: BTreeMap<String, ParamValue>,
        dim: Option<usize>,
    ) -> Result<Hamiltonian, ComponentError> {
        let mut table = SymbolTable::coordinates();
        for name in params.keys() {
            table = table.with_param(name);
        }
        let raw = parse_expr(text, &table).map_err(ComponentError::Hamiltonian)?;
        let mut max_state = None;
        for s in raw.symbols() {
            if s.is_parameter() {
                continue;
            }
            if s.kind() != crate::symexpr::SymKind::State {
                return Err(ComponentError::MalformedValue {
                    kind: Kind::PH,
                    reason: format!("hamiltonian may only depend on states and parameters, found `{s}`"),
                });
            }
            max_state = max_state.max(Some(s.index() as usize));
        }
        let inferred = max_state.map_or(0, |m| m + 1);
        if let Some(d) = dim {
            if d < inferred {
                return Err(ComponentError::MalformedValue {
                    kind: Kind::PH,
                    reason: format!("hamiltonian uses x_{} but dim is {d}", inferred - 1),
                });
            }
        }
        let rules: BTreeMap<Sym, Expr> = params
            .iter()
            .map(|(name, v)| (Sym::param(name), v.to_expr()))
            .filter(|(s, e)| *e != Expr::sym(s.clone()))
            .collect();
        let expr = crate::symexpr::substitute(&raw, &rules).map_err(ComponentError::Hamiltonian)?;
        Ok(Hamiltonian {
            text: text.to_owned(),
            params,
            dim: dim.unwrap_or(inferred),
            explicit_dim: dim.is_some_and(|d| d != inferred),
            expr,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn params(&self) -> &BTreeMap<String, ParamValue> {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when the dimension was given explicitly and differs from the
    /// one inferred from the text.
    pub fn has_explicit_dim(&self) -> bool {
        self.explicit_dim
    }

    /// The energy with parameter values substituted.
    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Default,
    Param(ParamValue),
    Hamiltonian(Hamiltonian),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ComponentError {
    #[error("unknown component kind `{0}`")]
    UnknownKind(String),
    #[error("malformed value for {kind}: {reason}")]
    MalformedValue { kind: Kind, reason: String },
    #[error("hamiltonian: {0}")]
    Hamiltonian(ExprError),
    #[error("component names must be non-empty and may not contain '/', '.' or ':'")]
    BadName,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atomic {
    kind: Kind,
    name: String,
    value: Value,
    param: Option<ParamValue>,
}

pub(crate) fn valid_name(name: &str) -> bool {
    !name.is_empty() && !name.contains(['/', '.', ':'])
}

/// Builds a fresh component; the value shape must suit the kind.
pub fn new_atomic(kind: Kind, name: &str, value: Value) -> Result<Atomic, ComponentError> {
    if !valid_name(name) {
        return Err(ComponentError::BadName);
    }
    let malformed = |reason: &str| ComponentError::MalformedValue {
        kind,
        reason: reason.to_owned(),
    };
    let param = match (&value, kind) {
        (Value::Hamiltonian(_), Kind::PH) => None,
        (_, Kind::PH) => return Err(malformed("PH requires a hamiltonian record")),
        (Value::Hamiltonian(_), _) => return Err(malformed("only PH takes a hamiltonian")),
        (Value::Param(_), Kind::Zero | Kind::One | Kind::SS) => {
            return Err(malformed("this kind takes no value"))
        }
        (Value::Param(p), _) => Some(p.clone()),
        (Value::Default, k) => k
            .parameter_name()
            .map(|p| ParamValue::Symbol(format!("{name}_{p}"))),
    };
    Ok(Atomic {
        kind,
        name: name.to_owned(),
        value,
        param,
    })
}

impl Atomic {
    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub(crate) fn set_name(&mut self, name: String) {
        self.name = name;
    }

    pub fn value(&self) -> &Value {
        &self.value
    }

    pub fn hamiltonian(&self) -> Option<&Hamiltonian> {
        match &self.value {
            Value::Hamiltonian(h) => Some(h),
            _ => None,
        }
    }

    /// The resolved scalar parameter (explicit or defaulted).
    pub fn parameter(&self) -> Option<&ParamValue> {
        self.param.as_ref()
    }

    /// Port count for fixed kinds, `None` for junctions.
    pub fn port_count(&self) -> Option<usize> {
        match self.kind {
            Kind::PH => self.hamiltonian().map(Hamiltonian::dim),
            k => k.fixed_ports(),
        }
    }

    pub fn ports(&self) -> Vec<PortDef> {
        (0..self.port_count().unwrap_or(0))
            .map(|index| PortDef {
                index,
                orientation: Orientation::Inward,
                multiplicity: Multiplicity::Fixed,
            })
            .collect()
    }

    pub fn state_count(&self) -> usize {
        match self.kind {
            Kind::C | Kind::I => 1,
            Kind::PH => self.hamiltonian().map_or(0, Hamiltonian::dim),
            _ => 0,
        }
    }

    /// Sources without an explicit value are driven by a control `u_0`.
    pub fn control_count(&self) -> usize {
        usize::from(matches!(self.kind, Kind::Se | Kind::Sf) && matches!(self.value, Value::Default))
    }

    /// Symbolic parameters in first-use order.
    pub fn parameters(&self) -> Vec<Sym> {
        let mut out = Vec::new();
        match self.kind {
            Kind::PH | Kind::Se | Kind::Sf => {
                let rels = self.relations(&[]);
                for r in rels {
                    for s in r.symbols() {
                        if s.is_parameter() && !out.contains(&s) {
                            out.push(s);
                        }
                    }
                }
            }
            _ => {
                if let Some(ParamValue::Symbol(name)) = &self.param {
                    out.push(Sym::param(name));
                }
            }
        }
        out
    }

    /// Relation template in local coordinates. `junction` lists the port
    /// orientations of a junction in port order; it is ignored otherwise.
    pub fn relations(&self, junction: &[Orientation]) -> Vec<Expr> {
        let e = |k: u32| Expr::sym(Sym::effort(k));
        let f = |k: u32| Expr::sym(Sym::flow(k));
        let x = |k: u32| Expr::sym(Sym::state(k));
        let dx = |k: u32| Expr::sym(Sym::dstate(k));
        let p = || self.param.as_ref().map(ParamValue::to_expr);
        let source = || p().unwrap_or_else(|| Expr::sym(Sym::control(0)));
        match self.kind {
            Kind::R => vec![e(0) - &p().expect("R parameter") * &f(0)],
            Kind::C => vec![&p().expect("C parameter") * &e(0) - x(0), f(0) - dx(0)],
            Kind::I => vec![x(0) - &p().expect("I parameter") * &f(0), e(0) - dx(0)],
            Kind::TF => {
                let n = p().expect("TF parameter");
                vec![e(1) - &n * &e(0), &n * &f(1) + f(0)]
            }
            Kind::GY => {
                let rho = p().expect("GY parameter");
                vec![e(0) - &rho * &f(1), e(1) + &rho * &f(0)]
            }
            Kind::Se => vec![e(0) - source()],
            Kind::Sf => vec![f(0) - source()],
            Kind::SS => Vec::new(),
            Kind::Zero => zero_junction(junction.len()),
            Kind::One => one_junction(junction),
            Kind::PH => {
                let h = self.hamiltonian().expect("PH hamiltonian");
                ph_relations(h.expr(), &(0..h.dim() as u32).map(Sym::state).collect::<Vec<_>>())
            }
        }
    }

    /// Stored energy in local states, for storage kinds.
    pub fn energy(&self) -> Option<Expr> {
        let half_square = || (Expr::sym(Sym::state(0)).powi(2).expect("square")).scale(&crate::symexpr::rational(1, 2));
        match self.kind {
            Kind::C | Kind::I => {
                let p = self.param.as_ref()?.to_expr();
                Some(&half_square() * &p.reciprocal().ok()?)
            }
            Kind::PH => self.hamiltonian().map(|h| h.expr().clone()),
            _ => None,
        }
    }
}

fn zero_junction(n: usize) -> Vec<Expr> {
    if n == 0 {
        return Vec::new();
    }
    let mut out: Vec<Expr> = (1..n as u32)
        .map(|k| Expr::sym(Sym::effort(k)) - Expr::sym(Sym::effort(0)))
        .collect();
    out.push((0..n as u32).fold(Expr::zero(), |acc, k| acc + Expr::sym(Sym::flow(k))));
    out
}

fn one_junction(sigma: &[Orientation]) -> Vec<Expr> {
    if sigma.is_empty() {
        return Vec::new();
    }
    let s = |k: usize| Expr::int(sigma[k].sign());
    let mut out: Vec<Expr> = (1..sigma.len())
        .map(|k| &s(k) * &Expr::sym(Sym::flow(k as u32)) - &s(0) * &Expr::sym(Sym::flow(0)))
        .collect();
    out.push(
        (0..sigma.len()).fold(Expr::zero(), |acc, k| acc + &s(k) * &Expr::sym(Sym::effort(k as u32))),
    );
    out
}

/// `e_k - dH/dx_k` then `f_k - dx_k`, for each state in order.
pub fn ph_relations(h: &Expr, states: &[Sym]) -> Vec<Expr> {
    let mut out: Vec<Expr> = states
        .iter()
        .enumerate()
        .map(|(k, s)| Expr::sym(Sym::effort(k as u32)) - differentiate(h, s))
        .collect();
    out.extend(states.iter().enumerate().map(|(k, s)| {
        Expr::sym(Sym::flow(k as u32)) - Expr::sym(s.derivative_pair().expect("state symbol"))
    }));
    out
}
