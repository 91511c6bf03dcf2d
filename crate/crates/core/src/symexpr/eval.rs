use std::collections::HashMap;

use num_traits::ToPrimitive;

use super::expr::{Expr, Factor, Func};
use super::{ExprError, Sym, SymKind};

/// Numeric values for symbols plus the current time.
#[derive(Clone, Debug, Default)]
pub struct Binding {
    values: HashMap<Sym, f64>,
    time: f64,
}

impl Binding {
    pub fn new() -> Binding {
        Binding::default()
    }

    pub fn at_time(time: f64) -> Binding {
        Binding {
            time,
            ..Binding::default()
        }
    }

    pub fn set(&mut self, sym: Sym, value: f64) -> &mut Self {
        self.values.insert(sym, value);
        self
    }

    pub fn with(mut self, sym: Sym, value: f64) -> Self {
        self.set(sym, value);
        self
    }

    pub fn get(&self, sym: &Sym) -> Option<f64> {
        if sym.kind() == SymKind::Time {
            return Some(self.time);
        }
        self.values.get(sym).copied()
    }
}

/// Evaluate in IEEE double precision; rationals are converted last.
pub fn evaluate(e: &Expr, b: &Binding) -> Result<f64, ExprError> {
    eval_with(e, &|s| b.get(s))
}

pub fn eval_with(e: &Expr, lookup: &dyn Fn(&Sym) -> Option<f64>) -> Result<f64, ExprError> {
    let mut total = 0.0;
    for (mono, coef) in e.terms() {
        let mut term = coef.to_f64().unwrap_or(f64::NAN);
        for (factor, k) in mono.factors() {
            let base = match factor {
                Factor::Sym(s) => lookup(s).ok_or_else(|| ExprError::Unbound(s.clone()))?,
                Factor::Group(inner) => eval_with(inner, lookup)?,
                Factor::Apply(func, args) => {
                    let vals = args
                        .iter()
                        .map(|a| eval_with(a, lookup))
                        .collect::<Result<Vec<_>, _>>()?;
                    apply_numeric(*func, &vals)?
                }
            };
            term *= int_power(base, *k, factor)?;
        }
        total += term;
    }
    Ok(total)
}

fn int_power(base: f64, k: i32, factor: &Factor) -> Result<f64, ExprError> {
    if k < 0 && base == 0.0 {
        let what = match factor {
            Factor::Apply(Func::Abs, _) => "derivative of abs at 0".to_owned(),
            _ => "division by zero".to_owned(),
        };
        return Err(ExprError::Domain(what));
    }
    Ok(base.powi(k))
}

fn apply_numeric(func: Func, args: &[f64]) -> Result<f64, ExprError> {
    let a = args[0];
    let value = match func {
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Tan => a.tan(),
        Func::Exp => a.exp(),
        Func::Log => {
            if a <= 0.0 {
                return Err(ExprError::Domain(format!("log of nonpositive value {a}")));
            }
            a.ln()
        }
        Func::Sqrt => {
            if a < 0.0 {
                return Err(ExprError::Domain(format!("sqrt of negative value {a}")));
            }
            a.sqrt()
        }
        Func::Abs => a.abs(),
        Func::Pow => {
            let v = a.powf(args[1]);
            if v.is_nan() {
                return Err(ExprError::Domain(format!("pow({a}, {}) is undefined", args[1])));
            }
            v
        }
    };
    Ok(value)
}

/// An expression lowered to slot lookups for repeated numeric evaluation.
#[derive(Clone, Debug)]
pub struct Compiled {
    terms: Vec<(f64, Vec<(Node, i32)>)>,
}

#[derive(Clone, Debug)]
enum Node {
    Slot(usize),
    Apply(Func, Vec<Compiled>),
    Group(Compiled),
}

impl Compiled {
    pub fn new(e: &Expr, slot_of: &dyn Fn(&Sym) -> Option<usize>) -> Result<Compiled, ExprError> {
        let mut terms = Vec::with_capacity(e.num_terms());
        for (mono, coef) in e.terms() {
            let mut factors = Vec::with_capacity(mono.factors().len());
            for (factor, k) in mono.factors() {
                let node = match factor {
                    Factor::Sym(s) => Node::Slot(slot_of(s).ok_or_else(|| ExprError::Unbound(s.clone()))?),
                    Factor::Group(inner) => Node::Group(Compiled::new(inner, slot_of)?),
                    Factor::Apply(func, args) => Node::Apply(
                        *func,
                        args.iter()
                            .map(|a| Compiled::new(a, slot_of))
                            .collect::<Result<_, _>>()?,
                    ),
                };
                factors.push((node, *k));
            }
            terms.push((coef.to_f64().unwrap_or(f64::NAN), factors));
        }
        Ok(Compiled { terms })
    }

    pub fn eval(&self, slots: &[f64]) -> Result<f64, ExprError> {
        let mut total = 0.0;
        for (coef, factors) in &self.terms {
            let mut term = *coef;
            for (node, k) in factors {
                let base = match node {
                    Node::Slot(i) => slots[*i],
                    Node::Group(inner) => inner.eval(slots)?,
                    Node::Apply(func, args) => {
                        let mut vals = [0.0; 2];
                        for (v, a) in vals.iter_mut().zip(args) {
                            *v = a.eval(slots)?;
                        }
                        apply_numeric(*func, &vals[..args.len()])?
                    }
                };
                if *k < 0 && base == 0.0 {
                    return Err(ExprError::Domain(match node {
                        Node::Apply(Func::Abs, _) => "derivative of abs at 0".to_owned(),
                        _ => "division by zero".to_owned(),
                    }));
                }
                term *= if *k == 1 { base } else { base.powi(*k) };
            }
            total += term;
        }
        Ok(total)
    }
}
