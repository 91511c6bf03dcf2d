use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::pow;

use super::expr::{Expr, Func};
use super::{ExprError, Sym};

/// Name resolution for [`parse_expr`].
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    names: HashMap<String, Sym>,
    coordinates: bool,
    time: bool,
}

impl SymbolTable {
    pub fn new() -> SymbolTable {
        SymbolTable::default()
    }

    /// Resolves canonical coordinate labels (`x_k`, `dx_k`, `e_k`, `f_k`, `u_k`) and `t`.
    pub fn coordinates() -> SymbolTable {
        SymbolTable {
            coordinates: true,
            time: true,
            ..SymbolTable::default()
        }
    }

    /// Only `t` resolves; used for control strings.
    pub fn time_only() -> SymbolTable {
        SymbolTable {
            time: true,
            ..SymbolTable::default()
        }
    }

    pub fn declare(&mut self, name: impl Into<String>, sym: Sym) -> &mut Self {
        self.names.insert(name.into(), sym);
        self
    }

    pub fn with_param(mut self, name: &str) -> Self {
        self.declare(name, Sym::param(name));
        self
    }

    pub fn resolve(&self, name: &str) -> Option<Sym> {
        if let Some(sym) = self.names.get(name) {
            return Some(sym.clone());
        }
        if self.time && name == "t" {
            return Some(Sym::time());
        }
        if self.coordinates {
            return Sym::parse_coordinate(name);
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

fn syntax(pos: usize, message: impl Into<String>) -> ExprError {
    ExprError::Syntax {
        pos,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Token::Plus, start)),
            b'-' => out.push((Token::Minus, start)),
            b'*' if bytes.get(i + 1) == Some(&b'*') => {
                out.push((Token::Caret, start));
                i += 1;
            }
            b'*' => out.push((Token::Star, start)),
            b'/' => out.push((Token::Slash, start)),
            b'^' => out.push((Token::Caret, start)),
            b'(' => out.push((Token::LParen, start)),
            b')' => out.push((Token::RParen, start)),
            b',' => out.push((Token::Comma, start)),
            b'0'..=b'9' | b'.' => {
                let (value, end) = number(text, start)?;
                out.push((Token::Num(value), start));
                i = end;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Token::Ident(text[start..i].to_owned()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        }
        i += 1;
    }
    out.push((Token::End, text.len()));
    Ok(out)
}

/// Decimal literal (optionally with exponent) to an exact rational.
fn number(text: &str, start: usize) -> Result<(BigRational, usize), ExprError> {
    let bytes = text.as_bytes();
    let mut i = start;
    let mut digits = String::new();
    let mut frac_len = 0usize;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        digits.push(bytes[i] as char);
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            digits.push(bytes[i] as char);
            frac_len += 1;
            i += 1;
        }
    }
    if digits.is_empty() {
        return Err(syntax(start, "malformed number"));
    }
    let mut exponent: i64 = 0;
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        let negative = match bytes.get(j) {
            Some(b'-') => {
                j += 1;
                true
            }
            Some(b'+') => {
                j += 1;
                false
            }
            _ => false,
        };
        let exp_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_start {
            let value: i64 = text[exp_start..j]
                .parse()
                .map_err(|_| syntax(i, "exponent out of range"))?;
            exponent = if negative { -value } else { value };
            i = j;
        }
    }
    let mantissa: BigInt = digits.parse().map_err(|_| syntax(start, "malformed number"))?;
    let scale = exponent - frac_len as i64;
    let ten = BigInt::from(10);
    let magnitude = usize::try_from(scale.unsigned_abs()).map_err(|_| syntax(start, "exponent out of range"))?;
    if magnitude > 4096 {
        return Err(syntax(start, "exponent out of range"));
    }
    let value = if scale >= 0 {
        BigRational::from_integer(mantissa * pow(ten, magnitude))
    } else {
        BigRational::new(mantissa, pow(ten, magnitude))
    };
    Ok((value, i))
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    table: &'a SymbolTable,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Token {
        let token = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        token
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<(), ExprError> {
        if *self.peek() == token {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("expected {what}")))
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Token::Plus => {
                    self.bump();
                    acc = acc + self.product()?;
                }
                Token::Minus => {
                    self.bump();
                    acc = acc - self.product()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Token::Star => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Token::Slash => {
                    let at = self.offset();
                    self.bump();
                    let rhs = self.unary()?;
                    acc = acc.checked_div(&rhs).map_err(|e| match e {
                        ExprError::DivisionByZero => syntax(at, "division by zero"),
                        other => other,
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Token::Minus => {
                self.bump();
                Ok(-self.unary()?)
            }
            Token::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if *self.peek() == Token::Caret {
            let at = self.offset();
            self.bump();
            let exponent = self.unary()?;
            return Expr::pow(&base, &exponent).map_err(|e| match e {
                ExprError::DivisionByZero => syntax(at, "zero raised to a negative power"),
                other => other,
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        match self.bump() {
            Token::Num(value) => Ok(Expr::constant(value)),
            Token::LParen => {
                let inner = self.sum()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if *self.peek() == Token::LParen {
                    let func = Func::from_name(&name).ok_or(ExprError::UnknownFunction {
                        name: name.clone(),
                        pos: at,
                    })?;
                    self.bump();
                    let mut args = Vec::new();
                    if *self.peek() != Token::RParen {
                        args.push(self.sum()?);
                        while *self.peek() == Token::Comma {
                            self.bump();
                            args.push(self.sum()?);
                        }
                    }
                    self.expect(Token::RParen, "`)` after arguments")?;
                    return Expr::apply(func, args);
                }
                self.table
                    .resolve(&name)
                    .map(Expr::sym)
                    .ok_or(ExprError::UnknownIdentifier { name, pos: at })
            }
            Token::End => Err(syntax(at, "unexpected end of input")),
            other => Err(syntax(at, format!("unexpected token {other:?}"))),
        }
    }
}

/// Parse infix text into a normalized expression.
pub fn parse_expr(text: &str, table: &SymbolTable) -> Result<Expr, ExprError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        table,
    };
    let expr = parser.sum()?;
    if *parser.peek() != Token::End {
        return Err(syntax(parser.offset(), "unexpected trailing input"));
    }
    Ok(expr)
}

/// Parse a number literal alone (`"0.1"`, `"10/17"`, `"-3"`).
pub fn parse_rational(text: &str) -> Result<BigRational, ExprError> {
    let e = parse_expr(text, &SymbolTable::new())?;
    e.as_constant()
        .ok_or_else(|| syntax(0, format!("`{text}` is not a numeric constant")))
}

#[cfg(test)]
mod tests {
    use super::super::rational;
    use super::*;

    fn table() -> SymbolTable {
        SymbolTable::coordinates().with_param("w").with_param("G").with_param("R").with_param("C")
    }

    fn p(text: &str) -> Expr {
        parse_expr(text, &table()).unwrap()
    }

    #[test]
    fn cavity_hamiltonian_expands() {
        let h = p("(w + G*x_0)*(x_1^2 + x_2^2)/2");
        let expected = p("w*x_1^2/2 + w*x_2^2/2 + G*x_0*x_1^2/2 + G*x_0*x_2^2/2");
        assert_eq!(h, expected);
    }

    #[test]
    fn function_application_and_zero() {
        let s = p("sin(t)");
        assert_eq!(s.to_string(), "sin(t)");
        assert!(p("0").is_zero());
    }

    #[test]
    fn precedence() {
        assert_eq!(p("-x_0^2"), -p("x_0*x_0"));
        assert_eq!(p("2^3^2"), Expr::int(512));
        assert_eq!(p("1 - 2 - 3"), Expr::int(-4));
        assert_eq!(p("12/4/3"), Expr::int(1));
        assert_eq!(p("x_0**2"), p("x_0^2"));
        assert_eq!(p("2*-x_0"), p("-2*x_0"));
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(p("0.1").as_constant(), Some(rational(1, 10)));
        assert_eq!(p("1.7").as_constant(), Some(rational(17, 10)));
        assert_eq!(p("2.5e-3").as_constant(), Some(rational(1, 400)));
        assert_eq!(p("1/1.7").as_constant(), Some(rational(10, 17)));
    }

    #[test]
    fn errors_are_reported() {
        assert!(matches!(
            parse_expr("x_0 + y", &table()),
            Err(ExprError::UnknownIdentifier { ref name, pos: 6 }) if name == "y"
        ));
        assert!(matches!(parse_expr("foo(1)", &table()), Err(ExprError::UnknownFunction { .. })));
        assert!(matches!(parse_expr("sin(1, 2)", &table()), Err(ExprError::Arity { .. })));
        assert!(matches!(parse_expr("pow(2)", &table()), Err(ExprError::Arity { .. })));
        assert!(matches!(parse_expr("(x_0 + 1", &table()), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_expr("x_0 +", &table()), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_expr("1/0", &table()), Err(ExprError::Syntax { pos: 1, .. })));
        assert!(matches!(parse_expr("x_0 $ 1", &table()), Err(ExprError::Syntax { pos: 4, .. })));
        assert!(matches!(parse_expr("", &table()), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn time_only_table_rejects_states() {
        assert!(parse_expr("sin(t)", &SymbolTable::time_only()).is_ok());
        assert!(parse_expr("x_0", &SymbolTable::time_only()).is_err());
    }

    #[test]
    fn print_parse_fixed_point() {
        for text in [
            "(w + G*x_0)*(x_1^2 + x_2^2)/2",
            "x_0/C - R*f_0",
            "1/(x_0 + 1) + sqrt(x_1)*exp(-t)",
            "pow(x_0, 1/3) - abs(x_1)/(2*C^2)",
            "-3/4 + dx_2 - e_0",
        ] {
            let e = p(text);
            let again = p(&e.to_string());
            assert_eq!(e, again, "{text} -> {e}");
        }
    }
}
