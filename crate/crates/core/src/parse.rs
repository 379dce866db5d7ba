//! Recursive-descent parser for the mean-expression language.
//!
//! ```text
//! expr := "arith" | "geom" | "harm" | "rms" | "min" | "max" | "log"
//!       | "power(" num ")" | "gini(" num "," num ")"
//!       | "env(e1)" | "env(e2)" | "env(table(" num "," num {"," num "," num} "))"
//!       | "compose(" expr "," expr "," expr ")"
//!       | "invariant(" expr "," expr ")"
//! num  := ["+" | "-"] digits ["." digits]
//! ```
//! Whitespace between tokens is ignored.

use crate::envelope::{EnvelopeSpec, EnvelopeTable};
use crate::error::{MeanError, Result};
use crate::expr::MeanExpr;

/// Parses mean-expression text, expanding aliases.
pub fn parse_mean(text: &str) -> Result<MeanExpr> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let expr = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.syntax("unexpected trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, msg: impl Into<String>) -> MeanError {
        MeanError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => Err(self.syntax(format!(
                "expected `{}`, found `{}`",
                c as char, got as char
            ))),
            None => Err(self.syntax(format!("expected `{}`, found end of input", c as char))),
        }
    }

    fn ident(&mut self) -> Result<(usize, &str)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.src.get(start) {
                Some(c) => self.syntax(format!("expected identifier, found `{}`", *c as char)),
                None => self.syntax("expected identifier, found end of input"),
            });
        }
        // identifiers are ASCII by construction
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok((start, name))
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
            self.pos += 1;
        }
        let int_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == int_start {
            self.pos = start;
            return Err(self.syntax("expected number"));
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let frac_start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == frac_start {
                return Err(self.syntax("expected digits after decimal point"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 = text
            .parse()
            .map_err(|_| MeanError::Syntax {
                pos: start,
                msg: format!("invalid number `{text}`"),
            })?;
        if !value.is_finite() {
            return Err(MeanError::Syntax {
                pos: start,
                msg: format!("number `{text}` out of range"),
            });
        }
        Ok(value)
    }

    /// Comma-separated items up to the closing parenthesis (which is consumed).
    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        let mut out = Vec::new();
        if self.peek() == Some(b')') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(c) => {
                    return Err(self.syntax(format!("expected `,` or `)`, found `{}`", c as char)))
                }
                None => return Err(self.syntax("expected `,` or `)`, found end of input")),
            }
        }
    }

    /// Skips a balanced argument list starting at `(` and counts its
    /// top-level items.
    fn count_args(&mut self) -> Result<usize> {
        let open = self.pos;
        self.pos += 1;
        let (mut depth, mut commas, mut empty) = (0usize, 0usize, true);
        while let Some(&c) = self.src.get(self.pos) {
            self.pos += 1;
            match c {
                b'(' => depth += 1,
                b')' if depth == 0 => return Ok(if empty { 0 } else { commas + 1 }),
                b')' => depth -= 1,
                b',' if depth == 0 => commas += 1,
                c if c.is_ascii_whitespace() => continue,
                _ => {}
            }
            empty = false;
        }
        self.pos = open;
        Err(self.syntax("unclosed `(`"))
    }

    fn arity<T>(name: &str, pos: usize, expected: &str, items: &[T], ok: bool) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(MeanError::Arity {
                pos,
                name: name.to_string(),
                expected: expected.to_string(),
                found: items.len(),
            })
        }
    }

    fn expr(&mut self) -> Result<MeanExpr> {
        let (pos, name) = self.ident()?;
        let name = name.to_string();
        let has_args = self.peek() == Some(b'(');

        let atom = match name.as_str() {
            "arith" => Some(MeanExpr::arithmetic()),
            "geom" => Some(MeanExpr::geometric()),
            "harm" => Some(MeanExpr::harmonic()),
            "rms" => Some(MeanExpr::quadratic()),
            "min" => Some(MeanExpr::Min),
            "max" => Some(MeanExpr::Max),
            "log" => Some(MeanExpr::Log),
            "power" | "gini" | "env" | "compose" | "invariant" => None,
            _ => return Err(MeanError::UnknownIdentifier { pos, name }),
        };
        if let Some(atom) = atom {
            if has_args {
                let found = self.count_args()?;
                if found > 0 {
                    return Err(MeanError::Arity {
                        pos,
                        name,
                        expected: "0".to_string(),
                        found,
                    });
                }
            }
            return Ok(atom);
        }
        if !has_args {
            self.expect(b'(')?;
        }
        self.pos += 1;

        match name.as_str() {
            "power" => {
                let args = self.list(|p| p.number())?;
                Self::arity(&name, pos, "1", &args, args.len() == 1)?;
                Ok(MeanExpr::power(args[0]))
            }
            "gini" => {
                let args = self.list(|p| p.number())?;
                Self::arity(&name, pos, "2", &args, args.len() == 2)?;
                Ok(MeanExpr::gini(args[0], args[1]))
            }
            "env" => {
                let args = self.list(|p| p.envelope())?;
                Self::arity(&name, pos, "1", &args, args.len() == 1)?;
                Ok(MeanExpr::Envelope(args.into_iter().next().unwrap()))
            }
            "compose" => {
                let args = self.list(|p| p.expr())?;
                Self::arity(&name, pos, "3", &args, args.len() == 3)?;
                let mut it = args.into_iter();
                let (k, m, n) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
                Ok(MeanExpr::compose(k, m, n))
            }
            "invariant" => {
                let args = self.list(|p| p.expr())?;
                Self::arity(&name, pos, "2", &args, args.len() == 2)?;
                let mut it = args.into_iter();
                let (m, n) = (it.next().unwrap(), it.next().unwrap());
                Ok(MeanExpr::invariant(m, n))
            }
            _ => unreachable!(),
        }
    }

    fn envelope(&mut self) -> Result<EnvelopeSpec> {
        let (pos, name) = self.ident()?;
        match name {
            "e1" => Ok(EnvelopeSpec::E1),
            "e2" => Ok(EnvelopeSpec::E2),
            "table" => {
                self.expect(b'(')?;
                let nums = self.list(|p| p.number())?;
                Self::arity(
                    "table",
                    pos,
                    "a nonzero even number of",
                    &nums,
                    !nums.is_empty() && nums.len() % 2 == 0,
                )?;
                let points = nums.chunks(2).map(|c| (c[0], c[1])).collect();
                Ok(EnvelopeSpec::Table(EnvelopeTable::new(points)?))
            }
            other => Err(MeanError::UnknownIdentifier {
                pos,
                name: other.to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::format_mean;

    #[test]
    fn literals_and_aliases() {
        assert_eq!(parse_mean("gini(2,0)").unwrap(), MeanExpr::gini(2.0, 0.0));
        assert_eq!(
            parse_mean("invariant(geom,arith)").unwrap(),
            MeanExpr::invariant(MeanExpr::gini(0.0, 0.0), MeanExpr::gini(1.0, 0.0))
        );
        assert_eq!(
            parse_mean("compose(log,geom,arith)").unwrap(),
            MeanExpr::compose(MeanExpr::Log, MeanExpr::gini(0.0, 0.0), MeanExpr::gini(1.0, 0.0))
        );
        assert_eq!(parse_mean("harm").unwrap(), MeanExpr::gini(0.0, -1.0));
        assert_eq!(parse_mean("rms").unwrap(), MeanExpr::gini(2.0, 0.0));
        assert_eq!(parse_mean("power(-2.5)").unwrap(), MeanExpr::gini(-2.5, 0.0));
        assert_eq!(parse_mean("env(e2)").unwrap(), MeanExpr::Envelope(EnvelopeSpec::E2));
    }

    #[test]
    fn whitespace_is_ignored() {
        assert_eq!(
            parse_mean("  invariant ( gini( 1 , -3 ) ,\tgini(1,-1) ) ").unwrap(),
            MeanExpr::invariant(MeanExpr::gini(1.0, -3.0), MeanExpr::gini(1.0, -1.0))
        );
        assert_eq!(parse_mean("gini(+0.5,0)").unwrap(), MeanExpr::gini(0.5, 0.0));
    }

    #[test]
    fn table_round_trips() {
        let e = parse_mean("env(table(0.5,0.75,0.01,0.1))").unwrap();
        assert_eq!(format_mean(&e), "env(table(0.01,0.1,0.5,0.75))");
        assert_eq!(parse_mean(&format_mean(&e)).unwrap(), e);
    }

    #[test]
    fn errors_carry_kind_and_position() {
        assert!(matches!(
            parse_mean("foo"),
            Err(MeanError::UnknownIdentifier { pos: 0, .. })
        ));
        assert!(matches!(
            parse_mean("gini(1)"),
            Err(MeanError::Arity { found: 1, .. })
        ));
        assert!(matches!(
            parse_mean("compose(log,min)"),
            Err(MeanError::Arity { found: 2, .. })
        ));
        assert!(matches!(parse_mean("arith(1)"), Err(MeanError::Arity { .. })));
        assert!(matches!(parse_mean("gini(1,"), Err(MeanError::Syntax { pos: 7, .. })));
        assert!(matches!(parse_mean("gini(1.,2)"), Err(MeanError::Syntax { .. })));
        assert!(matches!(parse_mean("gini(1e3,2)"), Err(MeanError::Syntax { .. })));
        assert!(matches!(parse_mean("arith geom"), Err(MeanError::Syntax { pos: 6, .. })));
        assert!(matches!(parse_mean(""), Err(MeanError::Syntax { .. })));
        assert!(matches!(parse_mean("power"), Err(MeanError::Syntax { .. })));
        assert!(matches!(parse_mean("env(e3)"), Err(MeanError::UnknownIdentifier { .. })));
        assert!(matches!(parse_mean("Arith"), Err(MeanError::UnknownIdentifier { .. })));
        assert!(matches!(
            parse_mean("env(table(0.5,0.1))"),
            Err(MeanError::InvalidEnvelope(_))
        ));
    }
}
