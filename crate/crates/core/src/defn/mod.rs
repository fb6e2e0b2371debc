//! Defining functions, ambient flat metrics and the built-in family catalog.

mod catalog;
mod expr;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub use catalog::{builtin_family, ellipsoid_from_axes, Family};
pub use expr::{Expr, Func};
pub(crate) use expr::{PointAlgebra, SeriesAlgebra};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMat};
use crate::series::Series;

/// Number of random probes used to certify that a parsed expression is real.
pub const REALITY_PROBES: usize = 32;
const REALITY_TOL: f64 = 1e-12;

/// A real-valued function rho(z, zbar) on C^{n+1}, hypersurface M = {rho = 0}.
#[derive(Debug, Clone, PartialEq)]
pub struct DefiningFunction {
    dim: usize,
    expr: Expr,
    params: BTreeMap<String, Complex64>,
}

impl DefiningFunction {
    pub fn parse(text: &str, dim: usize) -> Result<DefiningFunction> {
        DefiningFunction::parse_with_params(text, dim, BTreeMap::new())
    }

    pub fn parse_with_params(
        text: &str,
        dim: usize,
        params: BTreeMap<String, Complex64>,
    ) -> Result<DefiningFunction> {
        if !(2..=9).contains(&dim) {
            return Err(Error::InvalidParameter {
                name: "dimension".into(),
                reason: format!("must be between 2 and 9, got {dim}"),
            });
        }
        let names: BTreeSet<String> = params.keys().cloned().collect();
        let expr = parser::parse(text, dim, &names)?;
        let f = DefiningFunction { dim, expr, params };
        f.check_real()?;
        Ok(f)
    }

    /// Builds from an existing tree without the reality probe.
    pub fn from_expr(
        expr: Expr,
        dim: usize,
        params: BTreeMap<String, Complex64>,
    ) -> DefiningFunction {
        DefiningFunction { dim, expr, params }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn params(&self) -> &BTreeMap<String, Complex64> {
        &self.params
    }

    /// Same function with every parameter replaced by its literal value.
    pub fn substituted(&self) -> DefiningFunction {
        DefiningFunction {
            dim: self.dim,
            expr: self.expr.substitute(&self.params),
            params: BTreeMap::new(),
        }
    }

    /// `c * rho`.
    pub fn scaled(&self, c: f64) -> DefiningFunction {
        DefiningFunction {
            dim: self.dim,
            expr: Expr::Mul(
                Box::new(Expr::Num(Complex64::new(c, 0.0))),
                Box::new(self.expr.clone()),
            ),
            params: self.params.clone(),
        }
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: z.len(),
            });
        }
        Ok(())
    }

    /// Complex value of the expression (imaginary part is roundoff for a
    /// valid defining function).
    pub fn eval_complex(&self, z: &[Complex64]) -> Result<Complex64> {
        self.check_point(z)?;
        let v = self.expr.eval(&PointAlgebra { z }, &self.params)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Overflow(format!("rho evaluates to {v}")));
        }
        Ok(v)
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<f64> {
        Ok(self.eval_complex(z)?.re)
    }

    /// Taylor expansion in (z, zbar) around `z` up to `order`.
    pub fn series(&self, z: &[Complex64], order: usize) -> Result<Series> {
        self.check_point(z)?;
        let alg = SeriesAlgebra::new(z, order);
        let s = self.expr.eval(&alg, &self.params)?;
        if !s.is_finite() {
            return Err(Error::Overflow("non-finite Taylor coefficient".into()));
        }
        Ok(s)
    }

    fn check_real(&self) -> Result<()> {
        let mut rng = crate::sampling::stream_rng(0x5E_ED0F_4EA1, 0);
        let mut probes = 0;
        for _ in 0..4 * REALITY_PROBES {
            if probes == REALITY_PROBES {
                break;
            }
            let z: Vec<Complex64> = (0..self.dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let v = match self.eval_complex(&z) {
                Ok(v) => v,
                Err(Error::Domain(_)) => continue,
                Err(e) => return Err(e),
            };
            if v.im.abs() > REALITY_TOL * v.re.abs().max(1.0) {
                return Err(Error::NonReal {
                    imag: v.im.abs(),
                    probe: probes,
                });
            }
            probes += 1;
        }
        if probes < REALITY_PROBES {
            return Err(Error::Domain(
                "too few probe points inside the domain".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for DefiningFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

/// Constant Hermitian positive definite matrix a_{j kbar} defining a flat
/// Kähler metric on C^{n+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientMetric {
    a: CMat,
    inv: CMat,
}

impl AmbientMetric {
    pub fn identity(dim: usize) -> AmbientMetric {
        AmbientMetric {
            a: CMat::identity(dim, dim),
            inv: CMat::identity(dim, dim),
        }
    }

    pub fn diagonal(d: &[f64]) -> Result<AmbientMetric> {
        let a = CMat::from_fn(d.len(), d.len(), |i, j| {
            if i == j {
                Complex64::new(d[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        AmbientMetric::new(a)
    }

    pub fn new(a: CMat) -> Result<AmbientMetric> {
        if !a.is_square() {
            return Err(Error::InvalidMetric(format!(
                "not square: {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let asym = (&a - a.adjoint())
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        if asym > 1e-12 * a.iter().map(|x| x.norm()).fold(1.0, f64::max) {
            return Err(Error::InvalidMetric(format!(
                "not Hermitian (asymmetry {asym:e})"
            )));
        }
        let min = hermitian_eigenvalues(&a)
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::InvalidMetric(format!(
                "not positive definite (min eigenvalue {min:e})"
            )));
        }
        let inv = a
            .clone()
            .try_inverse()
            .ok_or(Error::InvalidMetric("singular".into()))?;
        Ok(AmbientMetric { a, inv })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// a_{j kbar} stored as `matrix()[(j, k)]`.
    pub fn matrix(&self) -> &CMat {
        &self.a
    }

    /// The dual metric a^{j kbar}, with sum_k a_{j kbar} a^{l kbar} = delta_j^l.
    pub fn dual(&self, j: usize, k: usize) -> Complex64 {
        self.inv[(k, j)]
    }

    /// |d rho|^2_a = sum a^{j kbar} rho_j rho_kbar for a covector (rho_j).
    pub fn covector_norm2(&self, rho_j: &[Complex64]) -> f64 {
        let m = self.dim();
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..m {
            for k in 0..m {
                s += self.dual(j, k) * rho_j[j] * rho_j[k].conj();
            }
        }
        s.re
    }

    /// Raises a covector: returns rho^{kbar} = sum_j a^{j kbar} rho_j.
    pub fn raise(&self, rho_j: &[Complex64]) -> Vec<Complex64> {
        let m = self.dim();
        (0..m)
            .map(|k| (0..m).map(|j| self.dual(j, k) * rho_j[j]).sum())
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.a == DMatrix::identity(self.dim(), self.dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_parses_and_vanishes_on_unit_circle() {
        let f = DefiningFunction::parse("abs2(z1)+abs2(z2)-1", 2).unwrap();
        let v = f
            .eval(&[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)])
            .unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn non_real_expression_is_rejected() {
        let err = DefiningFunction::parse("abs2(z1)+z2", 2).unwrap_err();
        assert!(matches!(err, Error::NonReal { .. }));
    }

    #[test]
    fn unbound_parameter_is_unknown_identifier() {
        let err = DefiningFunction::parse("t*abs2(z1)", 2).unwrap_err();
        assert!(matches!(err, Error::UnknownIdentifier { .. }));
    }

    #[test]
    fn metric_rejects_non_hermitian_and_indefinite() {
        let bad = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(
            AmbientMetric::new(bad),
            Err(Error::InvalidMetric(_))
        ));
        assert!(matches!(
            AmbientMetric::diagonal(&[1.0, -1.0]),
            Err(Error::InvalidMetric(_))
        ));
    }

    #[test]
    fn dual_metric_norm_of_diagonal() {
        let a = AmbientMetric::diagonal(&[2.0, 4.0]).unwrap();
        let n = a.covector_norm2(&[Complex64::new(1.0, 1.0), Complex64::new(2.0, 0.0)]);
        assert!((n - (2.0 / 2.0 + 4.0 / 4.0)).abs() < 1e-15);
    }

    #[test]
    fn raise_then_contract_gives_norm() {
        let a = AmbientMetric::new(CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.3, 0.4),
                Complex64::new(0.3, -0.4),
                Complex64::new(1.5, 0.0),
            ],
        ))
        .unwrap();
        let rho = [Complex64::new(0.7, -0.2), Complex64::new(-0.1, 0.9)];
        let up = a.raise(&rho);
        let contracted: Complex64 = up.iter().zip(&rho).map(|(u, r)| u * r.conj()).sum();
        assert!((contracted.re - a.covector_norm2(&rho)).abs() < 1e-14);
        assert!(contracted.im.abs() < 1e-14);
        assert!(a.covector_norm2(&rho) > 0.0);
    }
}
