//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term ('+' term)*
//! term   := factor ('*' factor)*
//! factor := '0' | NAT | 'x' NAT | 'Q' '(' expr ')' | '(' expr ')'
//! ```
//!
//! `x NAT` is a 1-based variable; a bare natural `m >= 1` desugars to an
//! m-fold sum of `Q(0)`. Whitespace is insignificant.

use crate::error::{Error, Result};

use super::{GFExpr, Node};

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> Result<()> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", b as char))
        }
    }

    fn nat(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a natural number");
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse::<u64>()
            .map_err(|_| Error::Syntax { pos: start, msg: "number too large".into() })
    }

    fn expr(&mut self) -> Result<Node> {
        let mut node = self.term()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            node = Node::Sum(Box::new(node), Box::new(self.term()?));
        }
        Ok(node)
    }

    fn term(&mut self) -> Result<Node> {
        let mut node = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            node = Node::Prod(Box::new(node), Box::new(self.factor()?));
        }
        Ok(node)
    }

    fn factor(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                let i = self.nat()?;
                if i == 0 {
                    return self.err("variable indices are 1-based");
                }
                Ok(Node::Var(i as usize))
            }
            Some(b'Q') => {
                self.pos += 1;
                self.eat(b'(')?;
                let inner = self.expr()?;
                self.eat(b')')?;
                Ok(Node::QuasiInv(Box::new(inner)))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.eat(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let m = self.nat()?;
                if m == 0 {
                    Ok(Node::Zero)
                } else {
                    let mut node = Node::QuasiInv(Box::new(Node::Zero));
                    for _ in 1..m {
                        node = Node::Sum(Box::new(node), Box::new(Node::QuasiInv(Box::new(Node::Zero))));
                    }
                    Ok(node)
                }
            }
            _ => self.err("expected '0', a number, a variable, 'Q(', or '('"),
        }
    }
}

/// Parse an expression; the variable count is the largest index mentioned
/// (at least 1). Quasi-inverse validity is checked after parsing.
pub fn parse_gf(text: &str) -> Result<GFExpr> {
    let mut p = Parser { bytes: text.as_bytes(), pos: 0 };
    let node = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return p.err("trailing input");
    }
    GFExpr::new(1, node)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{coeff, diagonal, Node};
    use num_bigint::BigUint;

    #[test]
    fn parses_binomial_gf() {
        let e = parse_gf("Q(x1+x2)").unwrap();
        assert_eq!(e.k(), 2);
        match e.root() {
            Node::QuasiInv(inner) => match inner.as_ref() {
                Node::Sum(a, b) => {
                    assert_eq!(a.as_ref(), &Node::Var(1));
                    assert_eq!(b.as_ref(), &Node::Var(2));
                }
                other => panic!("unexpected inner {other:?}"),
            },
            other => panic!("unexpected root {other:?}"),
        }
    }

    #[test]
    fn nested_quasi_inverse_rejected() {
        assert_eq!(parse_gf("Q(Q(x1))").unwrap_err(), crate::error::Error::NonzeroConstInQuasiInv);
    }

    #[test]
    fn zero_and_naturals() {
        let z = parse_gf("0").unwrap();
        assert_eq!(z.root(), &Node::Zero);
        let five = parse_gf("5").unwrap();
        assert_eq!(coeff(&five, &[0]), BigUint::from(5u32));
        assert_eq!(diagonal(&five, 1), BigUint::from(0u32));
    }

    #[test]
    fn syntax_error_carries_position() {
        match parse_gf("Q(x1+") {
            Err(crate::error::Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_gf("x0").is_err());
        assert!(parse_gf("Q(x1))").is_err());
    }

    #[test]
    fn whitespace_insignificant() {
        let a = parse_gf("Q( x1 + x1 * x1 )").unwrap();
        let b = parse_gf("Q(x1+x1*x1)").unwrap();
        assert_eq!(a, b);
    }
}
