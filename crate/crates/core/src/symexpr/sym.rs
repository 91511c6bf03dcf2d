use std::fmt;
use std::sync::Arc;

/// Role of a symbol. The declaration order is the canonical term order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymKind {
    DState,
    Effort,
    Flow,
    State,
    Control,
    Parameter,
    Time,
}

impl SymKind {
    /// Coordinates are everything that is not a parameter.
    pub fn is_coordinate(self) -> bool {
        !matches!(self, SymKind::Parameter)
    }

    fn prefix(self) -> &'static str {
        match self {
            SymKind::DState => "dx_",
            SymKind::Effort => "e_",
            SymKind::Flow => "f_",
            SymKind::State => "x_",
            SymKind::Control => "u_",
            SymKind::Parameter => "",
            SymKind::Time => "t",
        }
    }
}

/// A symbol inside one model context.
///
/// Coordinate symbols are identified by `(kind, index)` and carry the
/// canonical label (`x_3`, `dx_3`, `e_0`, ...). Parameters are identified by
/// name and always have index 0.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym {
    kind: SymKind,
    index: u32,
    label: Arc<str>,
}

impl Sym {
    fn coordinate(kind: SymKind, index: u32) -> Sym {
        Sym {
            kind,
            index,
            label: format!("{}{}", kind.prefix(), index).into(),
        }
    }

    pub fn state(index: u32) -> Sym {
        Sym::coordinate(SymKind::State, index)
    }

    pub fn dstate(index: u32) -> Sym {
        Sym::coordinate(SymKind::DState, index)
    }

    pub fn effort(index: u32) -> Sym {
        Sym::coordinate(SymKind::Effort, index)
    }

    pub fn flow(index: u32) -> Sym {
        Sym::coordinate(SymKind::Flow, index)
    }

    pub fn control(index: u32) -> Sym {
        Sym::coordinate(SymKind::Control, index)
    }

    pub fn time() -> Sym {
        Sym {
            kind: SymKind::Time,
            index: 0,
            label: "t".into(),
        }
    }

    pub fn param(name: &str) -> Sym {
        Sym {
            kind: SymKind::Parameter,
            index: 0,
            label: name.into(),
        }
    }

    /// Same kind, different index. Parameters and time are returned unchanged.
    pub fn with_index(&self, index: u32) -> Sym {
        match self.kind {
            SymKind::Parameter | SymKind::Time => self.clone(),
            kind => Sym::coordinate(kind, index),
        }
    }

    pub fn kind(&self) -> SymKind {
        self.kind
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_parameter(&self) -> bool {
        self.kind == SymKind::Parameter
    }

    /// Derivative partner of a state symbol (`x_k` -> `dx_k`) and back.
    pub fn derivative_pair(&self) -> Option<Sym> {
        match self.kind {
            SymKind::State => Some(Sym::dstate(self.index)),
            SymKind::DState => Some(Sym::state(self.index)),
            _ => None,
        }
    }

    /// Recognise a canonical coordinate label such as `x_3`, `dx_0`, `e_1`, `u_2` or `t`.
    pub fn parse_coordinate(label: &str) -> Option<Sym> {
        if label == "t" {
            return Some(Sym::time());
        }
        let (kind, rest) = [
            (SymKind::DState, "dx_"),
            (SymKind::Effort, "e_"),
            (SymKind::Flow, "f_"),
            (SymKind::State, "x_"),
            (SymKind::Control, "u_"),
        ]
        .into_iter()
        .find_map(|(kind, prefix)| label.strip_prefix(prefix).map(|rest| (kind, rest)))?;
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if rest.len() > 1 && rest.starts_with('0') {
            return None;
        }
        rest.parse().ok().map(|index| Sym::coordinate(kind, index))
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_follows_kind_rank() {
        let mut syms = [
            Sym::time(),
            Sym::param("R"),
            Sym::control(0),
            Sym::state(1),
            Sym::state(0),
            Sym::flow(0),
            Sym::effort(2),
            Sym::dstate(4),
        ];
        syms.sort();
        let labels: Vec<_> = syms.iter().map(|s| s.label().to_owned()).collect();
        assert_eq!(labels, ["dx_4", "e_2", "f_0", "x_0", "x_1", "u_0", "R", "t"]);
    }

    #[test]
    fn coordinate_labels_round_trip() {
        for sym in [Sym::state(12), Sym::dstate(0), Sym::effort(3), Sym::flow(1), Sym::control(7), Sym::time()] {
            assert_eq!(Sym::parse_coordinate(sym.label()), Some(sym));
        }
        assert_eq!(Sym::parse_coordinate("x_"), None);
        assert_eq!(Sym::parse_coordinate("x_01"), None);
        assert_eq!(Sym::parse_coordinate("w"), None);
    }

    #[test]
    fn state_derivative_pairing() {
        assert_eq!(Sym::state(3).derivative_pair(), Some(Sym::dstate(3)));
        assert_eq!(Sym::dstate(3).derivative_pair(), Some(Sym::state(3)));
        assert_eq!(Sym::effort(3).derivative_pair(), None);
    }
}
