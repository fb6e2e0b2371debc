//! Truncated multivariate Taylor series in the independent variables
//! `(z_1, .., z_m, zbar_1, .., zbar_m)`.
//!
//! A [`Series`] stores the Taylor coefficients of a function around a base
//! point, up to a fixed total order. Arithmetic propagates the expansion
//! forward, so evaluating an expression tree on seeded variables yields every
//! Wirtinger partial derivative of the expression up to that order. The
//! coefficient of `z^a zbar^b` equals `d^a dbar^b f / (a! b!)`.
//!
//! Each series tracks the highest order at which its coefficients are still
//! exact (`valid`). Differentiation lowers it by one; products take the
//! minimum of their operands.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Monomial bookkeeping shared by every series of the same shape.
#[derive(Debug)]
pub struct Layout {
    dim: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    degree: Vec<usize>,
    deg_end: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    // (lhs, rhs, target) sorted by target degree
    products: Vec<(u32, u32, u32)>,
    prod_end: Vec<usize>,
    // per variable: (source, target, factor) with d/dv x^src = factor * x^target
    deriv: Vec<Vec<(u32, u32, f64)>>,
    conj_perm: Vec<u32>,
    factorial: Vec<f64>,
}

impl Layout {
    fn build(dim: usize, order: usize) -> Layout {
        let nvars = 2 * dim;
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut deg_end = Vec::with_capacity(order + 1);
        for d in 0..=order {
            let mut cur = vec![0u8; nvars];
            push_compositions(&mut exps, &mut cur, 0, d);
            deg_end.push(exps.len());
        }
        let degree: Vec<usize> = exps
            .iter()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .collect();
        let index: HashMap<Vec<u8>, usize> = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();

        let mut products = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                if degree[i] + degree[j] > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                products.push((i as u32, j as u32, index[&sum] as u32));
            }
        }
        products.sort_by_key(|&(_, _, k)| (degree[k as usize], k));
        let mut prod_end = vec![0; order + 1];
        for d in 0..=order {
            prod_end[d] = products.partition_point(|&(_, _, k)| degree[k as usize] <= d);
        }

        let mut deriv = vec![Vec::new(); nvars];
        for (v, table) in deriv.iter_mut().enumerate() {
            for (i, e) in exps.iter().enumerate() {
                if e[v] == 0 {
                    continue;
                }
                let mut t = e.clone();
                t[v] -= 1;
                table.push((i as u32, index[&t] as u32, e[v] as f64));
            }
        }

        let conj_perm = exps
            .iter()
            .map(|e| {
                let mut s = e[dim..].to_vec();
                s.extend_from_slice(&e[..dim]);
                index[&s] as u32
            })
            .collect();

        let factorial = exps
            .iter()
            .map(|e| {
                e.iter()
                    .map(|&k| (1..=k as u64).product::<u64>() as f64)
                    .product()
            })
            .collect();

        Layout {
            dim,
            order,
            exps,
            degree,
            deg_end,
            index,
            products,
            prod_end,
            deriv,
            conj_perm,
            factorial,
        }
    }

    /// Shared layout for `dim` complex coordinates truncated at `order`.
    pub fn get(dim: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("layout cache poisoned");
        guard
            .entry((dim, order))
            .or_insert_with(|| Arc::new(Layout::build(dim, order)))
            .clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    pub fn exponents(&self, i: usize) -> &[u8] {
        &self.exps[i]
    }
}

fn push_compositions(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, pos: usize, remaining: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining as u8;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        cur[pos] = k as u8;
        push_compositions(out, cur, pos + 1, remaining - k);
    }
    cur[pos] = 0;
}

/// A truncated Taylor expansion in `(z, zbar)`.
#[derive(Clone, Debug)]
pub struct Series {
    layout: Arc<Layout>,
    coef: Vec<Complex64>,
    valid: usize,
}

impl Series {
    pub fn constant(layout: &Arc<Layout>, c: Complex64) -> Series {
        let mut coef = vec![Complex64::new(0.0, 0.0); layout.len()];
        coef[0] = c;
        Series {
            layout: layout.clone(),
            coef,
            valid: layout.order,
        }
    }

    /// The seeded variable `v` (0..dim for `z_j`, dim..2*dim for `zbar_j`)
    /// expanded around `value`.
    pub fn variable(layout: &Arc<Layout>, v: usize, value: Complex64) -> Series {
        let mut s = Series::constant(layout, value);
        if layout.order >= 1 {
            let mut e = vec![0u8; 2 * layout.dim];
            e[v] = 1;
            s.coef[layout.index[&e]] = Complex64::new(1.0, 0.0);
        }
        s
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn valid(&self) -> usize {
        self.valid
    }

    pub fn value(&self) -> Complex64 {
        self.coef[0]
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coef
    }

    /// Partial derivative `d^exps f` at the base point (`exps` over `(z, zbar)`).
    pub fn partial(&self, exps: &[u8]) -> Complex64 {
        let i = self
            .layout
            .index_of(exps)
            .expect("multi-index outside layout");
        debug_assert!(self.layout.degree[i] <= self.valid);
        self.coef[i] * self.layout.factorial[i]
    }

    pub fn is_finite(&self) -> bool {
        self.coef[..self.layout.deg_end[self.valid]]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn zeros_like(&self, valid: usize) -> Series {
        Series {
            layout: self.layout.clone(),
            coef: vec![Complex64::new(0.0, 0.0); self.layout.len()],
            valid,
        }
    }

    pub fn scale(&self, c: Complex64) -> Series {
        let mut out = self.clone();
        out.coef.iter_mut().for_each(|x| *x *= c);
        out
    }

    /// Derivative along variable `v`; the result is exact to one order less.
    pub fn deriv(&self, v: usize) -> Series {
        assert!(self.valid >= 1, "cannot differentiate an order-0 series");
        let mut out = self.zeros_like(self.valid - 1);
        for &(src, dst, f) in &self.layout.deriv[v] {
            if self.layout.degree[dst as usize] < self.valid {
                out.coef[dst as usize] += self.coef[src as usize] * f;
            }
        }
        out
    }

    /// d/dz_j
    pub fn d_hol(&self, j: usize) -> Series {
        self.deriv(j)
    }

    /// d/dzbar_j
    pub fn d_anti(&self, j: usize) -> Series {
        self.deriv(self.layout.dim + j)
    }

    /// The series of `conj(f)`, i.e. swap the roles of `z` and `zbar` and
    /// conjugate the coefficients.
    pub fn conj(&self) -> Series {
        let mut out = self.zeros_like(self.valid);
        for (i, &t) in self.layout.conj_perm.iter().enumerate() {
            out.coef[t as usize] = self.coef[i].conj();
        }
        out
    }

    fn mul_series(&self, rhs: &Series) -> Series {
        let valid = self.valid.min(rhs.valid);
        let mut out = self.zeros_like(valid);
        let end = self.layout.prod_end[valid];
        for &(i, j, k) in &self.layout.products[..end] {
            out.coef[k as usize] += self.coef[i as usize] * rhs.coef[j as usize];
        }
        out
    }

    /// `sum_k c[k] (f - f(0))^k`, the composition with a univariate function
    /// whose scaled derivatives at `f(0)` are `c`.
    fn compose(&self, c: &[Complex64]) -> Series {
        let mut delta = self.clone();
        delta.coef[0] = Complex64::new(0.0, 0.0);
        let n = c.len() - 1;
        let mut acc = Series::constant(&self.layout, c[n]);
        acc.valid = self.valid;
        for k in (0..n).rev() {
            acc = acc.mul_series(&delta);
            acc.coef[0] += c[k];
        }
        acc
    }

    pub fn recip(&self) -> Result<Series> {
        let a0 = self.value();
        if a0.norm() == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        let inv = a0.inv();
        let mut c = Vec::with_capacity(self.valid + 1);
        let mut p = inv;
        for k in 0..=self.valid {
            c.push(if k % 2 == 0 { p } else { -p });
            p *= inv;
        }
        Ok(self.compose(&c))
    }

    /// Principal-branch logarithm.
    pub fn ln(&self) -> Result<Series> {
        let a0 = self.value();
        if a0.norm() == 0.0 {
            return Err(Error::Domain("log of zero".into()));
        }
        let inv = a0.inv();
        let mut c = vec![a0.ln()];
        let mut p = inv;
        for k in 1..=self.valid {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            c.push(p * (sign / k as f64));
            p *= inv;
        }
        Ok(self.compose(&c))
    }

    pub fn powi(&self, k: i64) -> Result<Series> {
        if k < 0 {
            return self.recip()?.powi(-k);
        }
        let mut result = Series::constant(&self.layout, Complex64::new(1.0, 0.0));
        result.valid = self.valid;
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_series(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_series(&base);
            }
        }
        Ok(result)
    }

    pub fn div(&self, rhs: &Series) -> Result<Series> {
        Ok(self.mul_series(&rhs.recip()?))
    }

    /// Real part as a series: (f + conj f) / 2.
    pub fn re(&self) -> Series {
        (self + &self.conj()).scale(Complex64::new(0.5, 0.0))
    }
}

impl<'a> Add<&'a Series> for &'a Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        let mut out = self.clone();
        out.valid = self.valid.min(rhs.valid);
        out.coef
            .iter_mut()
            .zip(&rhs.coef)
            .for_each(|(a, b)| *a += b);
        out
    }
}

impl<'a> Sub<&'a Series> for &'a Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        let mut out = self.clone();
        out.valid = self.valid.min(rhs.valid);
        out.coef
            .iter_mut()
            .zip(&rhs.coef)
            .for_each(|(a, b)| *a -= b);
        out
    }
}

impl<'a> Mul<&'a Series> for &'a Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        self.mul_series(rhs)
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Series> for Series {
            type Output = Series;
            fn $m(self, rhs: Series) -> Series {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Series> for Series {
            type Output = Series;
            fn $m(self, rhs: &Series) -> Series {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Series> for &'a Series {
            type Output = Series;
            fn $m(self, rhs: Series) -> Series {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        -&self
    }
}
