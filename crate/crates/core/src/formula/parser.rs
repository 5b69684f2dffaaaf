//! Recursive-descent parser for the ASCII formula grammar.
//!
//! Precedence, loosest first: `->`, `|`, `&`, `~`. Binary connectives are
//! left-associative. A quantifier `forall v.` / `exists v.` scopes over the
//! rest of the enclosing expression.

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;

use super::ast::{Formula, Term};
use super::signature::Signature;
use super::FormulaError;
use crate::arith::is_prime;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigUint),
    LParen,
    RParen,
    Comma,
    Dot,
    Plus,
    Minus,
    Star,
    Caret,
    Pipe,
    Amp,
    Tilde,
    Arrow,
    Eq,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eq => "`=`".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'.' => Tok::Dot,
            b'+' => Tok::Plus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'|' => Tok::Pipe,
            b'&' => Tok::Amp,
            b'~' => Tok::Tilde,
            b'=' => Tok::Eq,
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    i += 1;
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            b'0'..=b'9' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start..=i];
                Tok::Int(digits.parse().expect("ascii digits"))
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            _ => {
                let ch = text[start..].chars().next().unwrap();
                return Err(FormulaError::Syntax {
                    pos: start,
                    expected: "a token".into(),
                    found: format!("`{ch}`"),
                });
            }
        };
        i += 1;
        out.push((tok, start));
    }
    Ok(out)
}

fn is_variable_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != "forall"
        && s != "exists"
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    sig: &'a Signature,
    /// Furthest syntax error seen, reported when backtracking fails.
    furthest: Option<FormulaError>,
}

type PResult<T> = Result<T, FormulaError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn syntax(&mut self, expected: &str) -> FormulaError {
        let found = self.peek().map(Tok::describe).unwrap_or_else(|| "end of input".into());
        let err = FormulaError::Syntax {
            pos: self.offset(),
            expected: expected.into(),
            found,
        };
        let further = match &self.furthest {
            Some(FormulaError::Syntax { pos, .. }) => self.offset() >= *pos,
            _ => true,
        };
        if further {
            self.furthest = Some(err.clone());
        }
        err
    }

    fn expect(&mut self, t: Tok, expected: &str) -> PResult<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(expected))
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut lhs = self.disjunction()?;
        while self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.disjunction()?;
            lhs = Formula::implies(lhs, rhs);
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Ident(q)) if q == "forall" || q == "exists" => {
                let universal = q == "forall";
                self.pos += 1;
                let var = match self.peek() {
                    Some(Tok::Ident(v)) if is_variable_name(v) && !self.sig.is_constant(v) => v.clone(),
                    _ => return Err(self.syntax("a variable")),
                };
                self.pos += 1;
                self.expect(Tok::Dot, "`.`")?;
                let body = self.formula()?;
                Ok(if universal {
                    Formula::forall(&var, body)
                } else {
                    Formula::exists(&var, body)
                })
            }
            Some(Tok::LParen) => {
                let save = self.pos;
                self.pos += 1;
                let grouped = self.formula().and_then(|f| {
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(f)
                });
                match grouped {
                    Ok(f) => Ok(f),
                    Err(FormulaError::Syntax { .. }) => {
                        self.pos = save;
                        self.atomic()
                    }
                    Err(e) => Err(e),
                }
            }
            _ => self.atomic(),
        }
    }

    fn atomic(&mut self) -> PResult<Formula> {
        if let (Some(Tok::Int(p)), Some(Tok::Caret)) = (self.peek().cloned(), self.peek_at(1)) {
            let at = self.offset();
            self.pos += 2;
            let n = match self.peek() {
                Some(Tok::Int(n)) => n.clone(),
                _ => return Err(self.syntax("an exponent")),
            };
            self.pos += 1;
            self.expect(Tok::Pipe, "`|`")?;
            if !self.sig.has_scalars() {
                return Err(FormulaError::NoScalars { pos: at });
            }
            let prime = p.to_u64().filter(|&p| is_prime(p));
            let exp = n.to_u32().filter(|&n| n >= 1);
            let (prime, exp) = match (prime, exp) {
                (Some(p), Some(e)) => (p, e),
                _ => return Err(FormulaError::BadDivisor { pos: at, text: format!("{p}^{n}") }),
            };
            let term = self.term()?;
            return Ok(Formula::divides(prime, exp, term));
        }
        if let (Some(Tok::Ident(r)), Some(Tok::LParen)) = (self.peek().cloned(), self.peek_at(1)) {
            if let Some(arity) = self.sig.relation_arity(&r) {
                self.pos += 2;
                let args = self.args()?;
                if args.len() != arity {
                    return Err(FormulaError::Arity {
                        symbol: r,
                        expected: arity,
                        found: args.len(),
                    });
                }
                return Ok(Formula::rel(&r, args));
            }
        }
        let lhs = self.term()?;
        self.expect(Tok::Eq, "`=`")?;
        let rhs = self.term()?;
        Ok(Formula::eq(lhs, rhs))
    }

    /// Comma-separated terms after an opening parenthesis, consuming the `)`.
    fn args(&mut self) -> PResult<Vec<Term>> {
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            match self.peek() {
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::RParen) => {
                    self.pos += 1;
                    return Ok(args);
                }
                _ => return Err(self.syntax("`,` or `)`")),
            }
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let mut lhs = self.unary_term()?;
        while self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            let rhs = self.unary_term()?;
            self.check_function("+", 2)?;
            lhs = Term::add(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary_term(&mut self) -> PResult<Term> {
        match self.peek().cloned() {
            Some(Tok::Minus) => {
                if let (Some(Tok::Int(k)), Some(Tok::Star)) = (self.peek_at(1).cloned(), self.peek_at(2)) {
                    let at = self.offset();
                    self.pos += 3;
                    if !self.sig.has_scalars() {
                        return Err(FormulaError::NoScalars { pos: at });
                    }
                    let t = self.unary_term()?;
                    return Ok(Term::Scalar(-BigInt::from(k), Box::new(t)));
                }
                self.pos += 1;
                let t = self.unary_term()?;
                self.check_function("-", 1)?;
                Ok(Term::neg(t))
            }
            Some(Tok::Int(k)) if self.peek_at(1) == Some(&Tok::Star) => {
                let at = self.offset();
                self.pos += 2;
                if !self.sig.has_scalars() {
                    return Err(FormulaError::NoScalars { pos: at });
                }
                let t = self.unary_term()?;
                Ok(Term::Scalar(BigInt::from(k), Box::new(t)))
            }
            _ => self.primary_term(),
        }
    }

    fn primary_term(&mut self) -> PResult<Term> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Some(Tok::Int(k)) => {
                self.pos += 1;
                let name = k.to_string();
                self.check_function(&name, 0)?;
                Ok(Term::constant(&name))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let args = self.args()?;
                    self.check_function(&name, args.len())?;
                    return Ok(Term::App(name, args));
                }
                if self.sig.is_constant(&name) {
                    Ok(Term::constant(&name))
                } else if is_variable_name(&name) {
                    Ok(Term::Var(name))
                } else {
                    Err(FormulaError::Undeclared(name))
                }
            }
            _ => Err(self.syntax("a term")),
        }
    }

    fn check_function(&self, sym: &str, arity: usize) -> PResult<()> {
        match self.sig.function_arity(sym) {
            None => Err(FormulaError::Undeclared(sym.to_string())),
            Some(a) if a != arity => Err(FormulaError::Arity {
                symbol: sym.to_string(),
                expected: a,
                found: arity,
            }),
            Some(_) => Ok(()),
        }
    }
}

/// Parse a formula over `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, FormulaError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        sig,
        furthest: None,
    };
    let result = p.formula();
    match result {
        Ok(f) if p.pos == p.toks.len() => Ok(f),
        Ok(_) => {
            let e = p.syntax("end of input");
            Err(p.furthest.take().unwrap_or(e))
        }
        Err(e @ FormulaError::Syntax { .. }) => Err(p.furthest.take().unwrap_or(e)),
        Err(e) => Err(e),
    }
}

/// Parse a standalone term over `sig`.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, FormulaError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        sig,
        furthest: None,
    };
    let t = p.term()?;
    if p.pos != p.toks.len() {
        return Err(p.syntax("end of input"));
    }
    Ok(t)
}
