//! Construction expressions:
//!
//! ```text
//! expr := schottky(t, theta) | cyclic(t) | trivial(d, n)
//!       | irr(d) ∘ expr | wedge(p, expr) | sym(k, expr)
//!       | sum(expr, expr) | perturb(eps, seed, expr)
//! ```
//!
//! `o` may stand in for `∘`. Real arguments accept `pi` and products or
//! quotients of literals, e.g. `pi/4`.

use std::fmt;

use anosov_core::constructions::{
    cyclic_hyperbolic, direct_sum, exterior_power, irreducible_rep, perturb, schottky_fuchsian,
    symmetric_power,
};
use anosov_core::representation::Representation;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Schottky {
        t: f64,
        theta: f64,
    },
    Cyclic {
        t: f64,
    },
    Trivial {
        dim: usize,
        rank: u16,
    },
    Irr {
        d: usize,
        inner: Box<Expr>,
    },
    Wedge {
        p: usize,
        inner: Box<Expr>,
    },
    Sym {
        k: usize,
        inner: Box<Expr>,
    },
    Sum(Box<Expr>, Box<Expr>),
    Perturb {
        eps: f64,
        seed: u64,
        inner: Box<Expr>,
    },
}

/// Parse failure at a 1-based character column.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprError {
    pub column: usize,
    pub msg: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.msg)
    }
}

impl std::error::Error for ExprError {}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Schottky { t, theta } => write!(f, "schottky({t:?}, {theta:?})"),
            Expr::Cyclic { t } => write!(f, "cyclic({t:?})"),
            Expr::Trivial { dim, rank } => write!(f, "trivial({dim}, {rank})"),
            Expr::Irr { d, inner } => write!(f, "irr({d}) ∘ {inner}"),
            Expr::Wedge { p, inner } => write!(f, "wedge({p}, {inner})"),
            Expr::Sym { k, inner } => write!(f, "sym({k}, {inner})"),
            Expr::Sum(a, b) => write!(f, "sum({a}, {b})"),
            Expr::Perturb { eps, seed, inner } => write!(f, "perturb({eps:?}, {seed}, {inner})"),
        }
    }
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ExprError> {
        let mut p = Parser {
            chars: text.chars().collect(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    pub fn build(&self) -> anosov_core::Result<Representation> {
        match self {
            Expr::Schottky { t, theta } => schottky_fuchsian(*t, *theta),
            Expr::Cyclic { t } => cyclic_hyperbolic(*t),
            Expr::Trivial { dim, rank } => Ok(Representation::trivial(*dim, *rank)),
            Expr::Irr { d, inner } => irreducible_rep(*d, &inner.build()?),
            Expr::Wedge { p, inner } => exterior_power(&inner.build()?, *p),
            Expr::Sym { k, inner } => symmetric_power(&inner.build()?, *k),
            Expr::Sum(a, b) => direct_sum(&a.build()?, &b.build()?),
            Expr::Perturb { eps, seed, inner } => perturb(&inner.build()?, *eps, *seed),
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn err(&self, msg: impl Into<String>) -> ExprError {
        ExprError {
            column: self.pos + 1,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{c}'")))
        }
    }

    fn ident(&mut self) -> Result<String, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a name"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn literal(&mut self) -> Result<f64, ExprError> {
        self.skip_ws();
        if self.chars[self.pos..].starts_with(&['p', 'i']) {
            self.pos += 2;
            return Ok(std::f64::consts::PI);
        }
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            let exp_sign = (c == '-' || c == '+')
                && self.pos > start
                && matches!(self.chars[self.pos - 1], 'e' | 'E');
            if c.is_ascii_digit()
                || c == '.'
                || c == 'e'
                || c == 'E'
                || exp_sign
                || (c == '-' && self.pos == start)
            {
                self.pos += 1;
            } else {
                break;
            }
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| ExprError {
            column: start + 1,
            msg: format!("bad number '{s}'"),
        })
    }

    fn real(&mut self) -> Result<f64, ExprError> {
        let mut v = self.literal()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    v *= self.literal()?;
                }
                Some('/') => {
                    self.pos += 1;
                    v /= self.literal()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn natural<T: TryFrom<u64>>(&mut self) -> Result<T, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<u64>()
            .ok()
            .and_then(|v| T::try_from(v).ok())
            .ok_or(ExprError {
                column: start + 1,
                msg: format!("expected a non-negative integer, got '{s}'"),
            })
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let at = {
            self.skip_ws();
            self.pos
        };
        let name = self.ident()?;
        self.expect('(')?;
        let e = match name.as_str() {
            "schottky" => {
                let t = self.real()?;
                self.expect(',')?;
                let theta = self.real()?;
                self.expect(')')?;
                Expr::Schottky { t, theta }
            }
            "cyclic" => {
                let t = self.real()?;
                self.expect(')')?;
                Expr::Cyclic { t }
            }
            "trivial" => {
                let dim = self.natural()?;
                self.expect(',')?;
                let rank = self.natural()?;
                self.expect(')')?;
                Expr::Trivial { dim, rank }
            }
            "irr" => {
                let d = self.natural()?;
                self.expect(')')?;
                match self.peek() {
                    Some('∘') => self.pos += 1,
                    Some('o') => {
                        let save = self.pos;
                        if self.ident()? != "o" {
                            self.pos = save;
                            return Err(self.err("expected '∘' after irr(d)"));
                        }
                    }
                    _ => return Err(self.err("expected '∘' after irr(d)")),
                }
                Expr::Irr {
                    d,
                    inner: Box::new(self.expr()?),
                }
            }
            "wedge" | "sym" => {
                let k = self.natural()?;
                self.expect(',')?;
                let inner = Box::new(self.expr()?);
                self.expect(')')?;
                if name == "wedge" {
                    Expr::Wedge { p: k, inner }
                } else {
                    Expr::Sym { k, inner }
                }
            }
            "sum" => {
                let a = self.expr()?;
                self.expect(',')?;
                let b = self.expr()?;
                self.expect(')')?;
                Expr::Sum(Box::new(a), Box::new(b))
            }
            "perturb" => {
                let eps = self.real()?;
                self.expect(',')?;
                let seed = self.natural()?;
                self.expect(',')?;
                let inner = Box::new(self.expr()?);
                self.expect(')')?;
                Expr::Perturb { eps, seed, inner }
            }
            other => {
                return Err(ExprError {
                    column: at + 1,
                    msg: format!("unknown construction '{other}'"),
                })
            }
        };
        Ok(e)
    }
}
