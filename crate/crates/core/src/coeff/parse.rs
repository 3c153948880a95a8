//! Recursive-descent parser for the coefficient expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | '+' unary | primary
//! primary := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Identifiers: `x`, `y` (aliases of `x_1`, `x_2`), `x_1`, `x_2`, `x1`, `x2`,
//! the constants `pi` and `sqrt2`, and the functions `sin`, `cos`.

use super::expr::{BinOp, Func, NamedConst, ScalarExpr};
use super::ParseError;

/// Parses `text` into an expression tree.
pub fn parse_expr(text: &str) -> Result<ScalarExpr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(ParseError::Syntax {
            position: p.pos,
            message: format!("unexpected trailing input {:?}", &p.src[p.pos..]),
        });
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            position: self.pos,
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(b'+') {
                BinOp::Add
            } else if self.eat(b'-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = ScalarExpr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat(b'*') {
                BinOp::Mul
            } else if self.eat(b'/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = ScalarExpr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<ScalarExpr, ParseError> {
        if self.eat(b'-') {
            return Ok(ScalarExpr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<ScalarExpr, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => Err(self.syntax(format!("unexpected character {:?}", c as char))),
        }
    }

    fn number(&mut self) -> Result<ScalarExpr, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.')
        {
            self.pos += 1;
        }
        if self.pos < bytes.len() && matches!(bytes[self.pos], b'e' | b'E') {
            let mut look = self.pos + 1;
            if look < bytes.len() && matches!(bytes[look], b'+' | b'-') {
                look += 1;
            }
            if look < bytes.len() && bytes[look].is_ascii_digit() {
                self.pos = look;
                while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .map(ScalarExpr::Num)
            .map_err(|_| ParseError::Syntax {
                position: start,
                message: format!("malformed number {text:?}"),
            })
    }

    fn ident(&mut self) -> Result<ScalarExpr, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        if let Some(func) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(ParseError::Arity {
                    position: self.pos,
                    name: name.to_string(),
                });
            }
            let arg = self.expr()?;
            if self.eat(b',') {
                return Err(ParseError::Arity {
                    position: self.pos - 1,
                    name: name.to_string(),
                });
            }
            if !self.eat(b')') {
                return Err(self.syntax("expected ')'"));
            }
            return Ok(ScalarExpr::call(func, arg));
        }
        let atom = match name {
            "x" | "x_1" | "x1" => ScalarExpr::Var(0),
            "y" | "x_2" | "x2" => ScalarExpr::Var(1),
            "pi" => ScalarExpr::Const(NamedConst::Pi),
            "sqrt2" => ScalarExpr::Const(NamedConst::Sqrt2),
            _ => {
                return Err(ParseError::UnknownIdentifier {
                    position: start,
                    name: name.to_string(),
                })
            }
        };
        // A call on a non-function identifier is an arity mismatch.
        self.skip_ws();
        if self.peek() == Some(b'(') {
            return Err(ParseError::Arity {
                position: self.pos,
                name: name.to_string(),
            });
        }
        Ok(atom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_trig() {
        let e = parse_expr("2 + 1.8*sin(2*pi*x)").unwrap();
        assert!((e.eval(&[0.25]) - 3.8).abs() < 1e-15);
    }

    #[test]
    fn zero_constant() {
        let e = parse_expr("0").unwrap();
        assert_eq!(e, ScalarExpr::Num(0.0));
        assert_eq!(e.eval(&[3.0, -7.5]), 0.0);
    }

    #[test]
    fn quotient_at_origin() {
        let e = parse_expr("(2+sin(2*pi*y))/(2+1.8*cos(2*pi*x))").unwrap();
        assert!((e.eval(&[0.0, 0.0]) - 2.0 / 3.8).abs() < 1e-15);
        assert!((e.eval(&[0.0, 0.0]) - 0.526316).abs() < 1e-6);
    }

    #[test]
    fn left_associative_subtraction() {
        let e = parse_expr("10 - 3 - 2").unwrap();
        assert_eq!(e.eval(&[]), 5.0);
        let e = parse_expr("8 / 4 / 2").unwrap();
        assert_eq!(e.eval(&[]), 1.0);
    }

    #[test]
    fn unary_minus_and_exponent() {
        let e = parse_expr("-x * -2.5e-1").unwrap();
        assert_eq!(e.eval(&[4.0]), 1.0);
        assert_eq!(parse_expr("x_2 + x2 + y").unwrap().eval(&[0.0, 1.0]), 3.0);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_expr("1 + * 2") {
            Err(ParseError::Syntax { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
        match parse_expr("1 + z") {
            Err(ParseError::UnknownIdentifier { position, name }) => {
                assert_eq!(position, 4);
                assert_eq!(name, "z");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("sin(x, y)"), Err(ParseError::Arity { .. })));
        assert!(matches!(parse_expr("cos"), Err(ParseError::Arity { .. })));
        assert!(matches!(parse_expr("pi(2)"), Err(ParseError::Arity { .. })));
        assert!(matches!(parse_expr("(1 + 2"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_expr("   "), Err(ParseError::Empty)));
        assert!(matches!(parse_expr("1 2"), Err(ParseError::Syntax { position: 2, .. })));
    }

    #[test]
    fn printer_keeps_structure() {
        for src in [
            "a",
            "1 - (2 - 3)",
            "x * (y * 2)",
            "-(x + 1) * 3",
            "2 * -3",
            "sin(2*pi*x)/(2+1.8*cos(2*pi*y))",
            "--x",
            "1e-7 + sqrt2",
        ] {
            let Ok(e) = parse_expr(src) else { continue };
            let back = parse_expr(&e.to_string()).unwrap();
            assert_eq!(back, e, "{src} -> {e}");
        }
    }
}
