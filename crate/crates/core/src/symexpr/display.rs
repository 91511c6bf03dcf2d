use std::fmt;

use num_traits::{One, Signed};

use super::expr::{Expr, Factor, Monomial, Rational};

// Printed form is the parser's grammar, so `parse(print(e)) == e`.

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (mono, coef)) in self.terms().enumerate() {
            let body = term_body(coef, mono);
            match (i, coef.is_negative()) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => f.write_str(&body)?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

fn term_body(coef: &Rational, mono: &Monomial) -> String {
    let coef = coef.abs();
    let mut numer = Vec::new();
    let mut denom = Vec::new();
    if !coef.numer().is_one() || mono.factors().iter().all(|(_, k)| *k < 0) {
        numer.push(coef.numer().to_string());
    }
    if !coef.denom().is_one() {
        denom.push(coef.denom().to_string());
    }
    // Parameter factors print before coordinates: `C*dx_0`.
    let (params, coords): (Vec<_>, Vec<_>) = mono.factors().iter().partition(|(f, _)| !f.has_coordinate());
    for (factor, k) in params.into_iter().chain(coords) {
        let base = factor_text(factor);
        let text = match k.abs() {
            1 => base,
            n => format!("{base}^{n}"),
        };
        if *k > 0 {
            numer.push(text);
        } else {
            denom.push(text);
        }
    }
    let mut out = numer.join("*");
    match denom.len() {
        0 => {}
        1 => {
            out.push('/');
            out.push_str(&denom[0]);
        }
        _ => {
            out.push_str("/(");
            out.push_str(&denom.join("*"));
            out.push(')');
        }
    }
    out
}

fn factor_text(factor: &Factor) -> String {
    match factor {
        Factor::Sym(s) => s.label().to_owned(),
        Factor::Apply(func, args) => {
            let args: Vec<String> = args.iter().map(Expr::to_string).collect();
            format!("{}({})", func.name(), args.join(", "))
        }
        Factor::Group(e) => format!("({e})"),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{rational, Func, Sym};
    use super::*;

    fn x(i: u32) -> Expr {
        Expr::sym(Sym::state(i))
    }

    #[test]
    fn prints_rational_coefficients() {
        let e = x(3).scale(&rational(17, 100)) + x(4).scale(&rational(17, 10)) + Expr::sym(Sym::dstate(3));
        assert_eq!(e.to_string(), "dx_3 + 17*x_3/100 + 17*x_4/10");
    }

    #[test]
    fn prints_powers_and_negatives() {
        let e = -(x(1).powi(2).unwrap().scale(&rational(1, 2))) - &x(0) * &x(2);
        assert_eq!(e.to_string(), "-x_0*x_2 - x_1^2/2");
    }

    #[test]
    fn prints_denominators() {
        let c = Expr::sym(Sym::param("C"));
        let e = (&x(0) * &c.powi(-2).unwrap()).scale(&rational(3, 2));
        assert_eq!(e.to_string(), "3*x_0/(2*C^2)");
        let g = (x(0) + Expr::one()).reciprocal().unwrap();
        assert_eq!(g.to_string(), "1/(x_0 + 1)");
        assert_eq!(Expr::zero().to_string(), "0");
        assert_eq!(Expr::constant(rational(-3, 4)).to_string(), "-3/4");
    }

    #[test]
    fn prints_function_calls() {
        let e = Expr::apply(Func::Sin, vec![Expr::sym(Sym::time())]).unwrap();
        assert_eq!(e.to_string(), "sin(t)");
        let p = Expr::apply(Func::Pow, vec![x(0), Expr::constant(rational(1, 2))]).unwrap();
        assert_eq!(p.to_string(), "pow(x_0, 1/2)");
    }
}
