use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::{Layout, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Re,
    Im,
    Abs2,
    Conj,
    Log,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "re" => Some(Func::Re),
            "im" => Some(Func::Im),
            "abs2" => Some(Func::Abs2),
            "conj" => Some(Func::Conj),
            "log" => Some(Func::Log),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Re => "re",
            Func::Im => "im",
            Func::Abs2 => "abs2",
            Func::Conj => "conj",
            Func::Log => "log",
        }
    }
}

/// Expression tree over the coordinates `z_j`, complex literals and named
/// parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Complex64),
    Var(usize),
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Replace every bound parameter by its value.
    pub fn substitute(&self, params: &BTreeMap<String, Complex64>) -> Expr {
        use Expr::*;
        let sub = |e: &Expr| Box::new(e.substitute(params));
        match self {
            Param(name) => match params.get(name) {
                Some(v) => Num(*v),
                None => self.clone(),
            },
            Num(_) | Var(_) => self.clone(),
            Neg(a) => Neg(sub(a)),
            Add(a, b) => Add(sub(a), sub(b)),
            Sub(a, b) => Sub(sub(a), sub(b)),
            Mul(a, b) => Mul(sub(a), sub(b)),
            Div(a, b) => Div(sub(a), sub(b)),
            Pow(a, k) => Pow(sub(a), *k),
            Call(f, a) => Call(*f, sub(a)),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        use Expr::*;
        match self {
            Var(j) => Some(*j),
            Num(_) | Param(_) => None,
            Neg(a) | Pow(a, _) | Call(_, a) => a.max_var(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => a.max_var().max(b.max_var()),
        }
    }

    pub(crate) fn eval<A: Algebra>(
        &self,
        alg: &A,
        params: &BTreeMap<String, Complex64>,
    ) -> Result<A::V> {
        use Expr::*;
        Ok(match self {
            Num(c) => alg.constant(*c),
            Var(j) => alg.coord(*j),
            Param(name) => {
                let v = params
                    .get(name)
                    .ok_or_else(|| Error::UnboundParameter(name.clone()))?;
                alg.constant(*v)
            }
            Neg(a) => alg.neg(&a.eval(alg, params)?),
            Add(a, b) => alg.add(&a.eval(alg, params)?, &b.eval(alg, params)?),
            Sub(a, b) => alg.sub(&a.eval(alg, params)?, &b.eval(alg, params)?),
            Mul(a, b) => alg.mul(&a.eval(alg, params)?, &b.eval(alg, params)?),
            Div(a, b) => alg.div(&a.eval(alg, params)?, &b.eval(alg, params)?)?,
            Pow(a, k) => alg.powi(&a.eval(alg, params)?, *k)?,
            Call(f, a) => {
                let x = a.eval(alg, params)?;
                match f {
                    Func::Re => alg.scale(&alg.add(&x, &alg.conj(&x)), Complex64::new(0.5, 0.0)),
                    Func::Im => alg.scale(&alg.sub(&x, &alg.conj(&x)), Complex64::new(0.0, -0.5)),
                    Func::Abs2 => alg.mul(&x, &alg.conj(&x)),
                    Func::Conj => alg.conj(&x),
                    Func::Log => alg.ln(&x)?,
                }
            }
        })
    }
}

/// Fully parenthesised rendering that re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Expr::*;
        match self {
            Num(c) if c.im == 0.0 => write!(f, "{:?}", c.re),
            Num(c) if c.re == 0.0 => write!(f, "{:?}i", c.im),
            Num(c) => write!(f, "({:?}+{:?}i)", c.re, c.im),
            Var(j) => write!(f, "z{}", j + 1),
            Param(name) => f.write_str(name),
            Neg(a) => write!(f, "(-{a})"),
            Add(a, b) => write!(f, "({a}+{b})"),
            Sub(a, b) => write!(f, "({a}-{b})"),
            Mul(a, b) => write!(f, "({a}*{b})"),
            Div(a, b) => write!(f, "({a}/{b})"),
            Pow(a, k) => write!(f, "({a}^{k})"),
            Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// The value domain an expression is evaluated in.
pub(crate) trait Algebra {
    type V: Clone;
    fn constant(&self, c: Complex64) -> Self::V;
    fn coord(&self, j: usize) -> Self::V;
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn sub(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn neg(&self, a: &Self::V) -> Self::V;
    fn scale(&self, a: &Self::V, c: Complex64) -> Self::V;
    fn div(&self, a: &Self::V, b: &Self::V) -> Result<Self::V>;
    fn conj(&self, a: &Self::V) -> Self::V;
    fn ln(&self, a: &Self::V) -> Result<Self::V>;
    fn powi(&self, a: &Self::V, k: i64) -> Result<Self::V>;
}

pub(crate) struct PointAlgebra<'a> {
    pub z: &'a [Complex64],
}

impl Algebra for PointAlgebra<'_> {
    type V = Complex64;
    fn constant(&self, c: Complex64) -> Complex64 {
        c
    }
    fn coord(&self, j: usize) -> Complex64 {
        self.z[j]
    }
    fn add(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a + b
    }
    fn sub(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a - b
    }
    fn mul(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a * b
    }
    fn neg(&self, a: &Complex64) -> Complex64 {
        -a
    }
    fn scale(&self, a: &Complex64, c: Complex64) -> Complex64 {
        a * c
    }
    fn div(&self, a: &Complex64, b: &Complex64) -> Result<Complex64> {
        if b.norm() == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(a / b)
    }
    fn conj(&self, a: &Complex64) -> Complex64 {
        a.conj()
    }
    fn ln(&self, a: &Complex64) -> Result<Complex64> {
        if a.norm() == 0.0 {
            return Err(Error::Domain("log of zero".into()));
        }
        Ok(a.ln())
    }
    fn powi(&self, a: &Complex64, k: i64) -> Result<Complex64> {
        if k < 0 && a.norm() == 0.0 {
            return Err(Error::Domain("negative power of zero".into()));
        }
        Ok(a.powi(k as i32))
    }
}

pub(crate) struct SeriesAlgebra {
    pub layout: Arc<Layout>,
    pub vars: Vec<Series>,
}

impl SeriesAlgebra {
    pub fn new(z: &[Complex64], order: usize) -> SeriesAlgebra {
        let layout = Layout::get(z.len(), order);
        let vars = z
            .iter()
            .enumerate()
            .map(|(j, &v)| Series::variable(&layout, j, v))
            .collect();
        SeriesAlgebra { layout, vars }
    }
}

impl Algebra for SeriesAlgebra {
    type V = Series;
    fn constant(&self, c: Complex64) -> Series {
        Series::constant(&self.layout, c)
    }
    fn coord(&self, j: usize) -> Series {
        self.vars[j].clone()
    }
    fn add(&self, a: &Series, b: &Series) -> Series {
        a + b
    }
    fn sub(&self, a: &Series, b: &Series) -> Series {
        a - b
    }
    fn mul(&self, a: &Series, b: &Series) -> Series {
        a * b
    }
    fn neg(&self, a: &Series) -> Series {
        -a
    }
    fn scale(&self, a: &Series, c: Complex64) -> Series {
        a.scale(c)
    }
    fn div(&self, a: &Series, b: &Series) -> Result<Series> {
        a.div(b)
    }
    fn conj(&self, a: &Series) -> Series {
        a.conj()
    }
    fn ln(&self, a: &Series) -> Result<Series> {
        a.ln()
    }
    fn powi(&self, a: &Series, k: i64) -> Result<Series> {
        a.powi(k)
    }
}
