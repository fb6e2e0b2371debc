//! Links of Brieskorn-Pham singularities `p(z) = sum z_j^{a_j}` cut by the
//! sphere `|z|^2 = r`, with the weighted Kaehler metric `w_k^{-1} delta`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMat, ZERO};
use crate::sampling::{gaussian_vector, par_indexed, stream_rng};

pub const NEWTON_MAX_ITER: usize = 100;
pub const CONSTRAINT_TOL: f64 = 1e-10;
pub const SAMPLE_RETRIES: usize = 20;
const DIRECTION_SEED_OFFSET: u64 = 0x51_7cc1_b727_220a;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `d = lcm(a_j)` and `w_j = d / a_j`.
pub fn weights(exponents: &[u32]) -> Result<(u64, Vec<u64>)> {
    if exponents.is_empty() {
        return Err(Error::InvalidParameter {
            name: "exponents".into(),
            reason: "empty list".into(),
        });
    }
    if let Some(&a) = exponents.iter().find(|&&a| a < 2) {
        return Err(Error::InvalidParameter {
            name: "exponents".into(),
            reason: format!("exponent {a} < 2"),
        });
    }
    let mut d = 1u64;
    for &a in exponents {
        let a = a as u64;
        d = (d / gcd(d, a))
            .checked_mul(a)
            .ok_or_else(|| Error::Overflow("lcm of exponents".into()))?;
    }
    Ok((d, exponents.iter().map(|&a| d / a as u64).collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrieskornLink {
    exponents: Vec<u32>,
    d: u64,
    weights: Vec<u64>,
    r: f64,
}

impl BrieskornLink {
    pub fn new(exponents: &[u32], r: f64) -> Result<BrieskornLink> {
        if exponents.len() < 3 {
            return Err(Error::InvalidParameter {
                name: "exponents".into(),
                reason: "need >= 3 exponents".into(),
            });
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "r".into(),
                reason: format!("radius must be positive, got {r}"),
            });
        }
        let (d, weights) = weights(exponents)?;
        Ok(BrieskornLink {
            exponents: exponents.to_vec(),
            d,
            weights,
            r,
        })
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn degree(&self) -> u64 {
        self.d
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    /// Number of ambient coordinates `N + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn p(&self, z: &[Complex64]) -> Complex64 {
        z.iter()
            .zip(&self.exponents)
            .map(|(zj, &a)| zj.powu(a))
            .sum()
    }

    /// `dp/dz_j = a_j z_j^{a_j - 1}`.
    pub fn gradient(&self, z: &[Complex64]) -> Vec<Complex64> {
        z.iter()
            .zip(&self.exponents)
            .map(|(zj, &a)| a as f64 * zj.powu(a - 1))
            .collect()
    }

    /// `d^2 p / dz_j dz_k`, diagonal for Brieskorn-Pham polynomials.
    pub fn hessian(&self, z: &[Complex64]) -> CMat {
        let m = self.ambient_dim();
        CMat::from_fn(m, m, |j, k| {
            if j == k {
                let a = self.exponents[j];
                (a * (a - 1)) as f64 * z[j].powu(a - 2)
            } else {
                ZERO
            }
        })
    }

    /// `|p(z)|` and `| |z|^2 - r |`.
    pub fn constraint_residuals(&self, z: &[Complex64]) -> (f64, f64) {
        let n2: f64 = z.iter().map(|x| x.norm_sqr()).sum();
        (self.p(z).norm(), (n2 - self.r).abs())
    }

    /// `|xi|^2 = d sum a_j |z_j|^{2 a_j - 2}`.
    pub fn xi_norm2(&self, z: &[Complex64]) -> f64 {
        self.d as f64
            * z.iter()
                .zip(&self.exponents)
                .map(|(zj, &a)| a as f64 * zj.norm().powi(2 * a as i32 - 2))
                .sum::<f64>()
    }

    /// `|H|^2 = sum w_j |z_j|^2`.
    pub fn h2(&self, z: &[Complex64]) -> f64 {
        z.iter()
            .zip(&self.weights)
            .map(|(zj, &w)| w as f64 * zj.norm_sqr())
            .sum()
    }

    /// `sum w_k^{-1} |W^k|^2`.
    pub fn weighted_norm2(&self, v: &[Complex64]) -> f64 {
        v.iter()
            .zip(&self.weights)
            .map(|(x, &w)| x.norm_sqr() / w as f64)
            .sum()
    }

    /// `|p(lambda^w z) - lambda^d p(z)|` relative to `max(1, |lambda^d p(z)|)`.
    pub fn homogeneity_defect(&self, z: &[Complex64], lambda: Complex64) -> f64 {
        let scaled: Vec<Complex64> = z
            .iter()
            .zip(&self.weights)
            .map(|(zj, &w)| zj * lambda.powu(w as u32))
            .collect();
        let expected = lambda.powu(self.d as u32) * self.p(z);
        (self.p(&scaled) - expected).norm() / expected.norm().max(1.0)
    }
}

fn newton(link: &BrieskornLink, mut z: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let m = link.ambient_dim();
    let mut prev = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        let p = link.p(&z);
        let n2: f64 = z.iter().map(|x| x.norm_sqr()).sum();
        let f = DVector::from_vec(vec![p.re, p.im, n2 - link.r]);
        let res = f.norm();
        if !res.is_finite() {
            return None;
        }
        if res < 1e-14 * link.r.max(1.0) || (res < CONSTRAINT_TOL * 1e-2 && res >= prev) {
            break;
        }
        prev = res;
        let g = link.gradient(&z);
        let mut jac = DMatrix::<f64>::zeros(3, 2 * m);
        for j in 0..m {
            jac[(0, 2 * j)] = g[j].re;
            jac[(0, 2 * j + 1)] = -g[j].im;
            jac[(1, 2 * j)] = g[j].im;
            jac[(1, 2 * j + 1)] = g[j].re;
            jac[(2, 2 * j)] = 2.0 * z[j].re;
            jac[(2, 2 * j + 1)] = 2.0 * z[j].im;
        }
        let svd = jac.svd(true, true);
        let step = svd.solve(&f, 1e-14).ok()?;
        for j in 0..m {
            z[j] -= Complex64::new(step[2 * j], step[2 * j + 1]);
        }
    }
    let (rp, rn) = link.constraint_residuals(&z);
    (rp < CONSTRAINT_TOL && rn < CONSTRAINT_TOL).then_some(z)
}

/// `count` link points from Gaussian starts rescaled to `|z|^2 = r`; each
/// point is retried up to [`SAMPLE_RETRIES`] times.
pub fn sample_link(link: &BrieskornLink, count: usize, seed: u64) -> Result<Vec<Vec<Complex64>>> {
    if count == 0 {
        return Err(Error::InvalidParameter {
            name: "count".into(),
            reason: "need at least one point".into(),
        });
    }
    let m = link.ambient_dim();
    par_indexed(seed, count, |i, rng| {
        for _ in 0..SAMPLE_RETRIES {
            let x0 = gaussian_vector(rng, m);
            let n = x0.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if n == 0.0 {
                continue;
            }
            let x0: Vec<Complex64> = x0.iter().map(|x| x * (link.r.sqrt() / n)).collect();
            if let Some(z) = newton(link, x0) {
                if tangent_frame(link, &z).is_ok() {
                    return Ok(z);
                }
            }
        }
        Err(Error::Sampling(format!(
            "link point {i}: Newton failed after {SAMPLE_RETRIES} starts"
        )))
    })
    .into_iter()
    .collect()
}

/// Basis of `T^{1,0}` of the link at `z`: solutions of
/// `sum a_k z_k^{a_k-1} W^k = 0` and `sum zbar_k W^k = 0`, orthonormal in the
/// weighted metric.
pub fn tangent_frame(link: &BrieskornLink, z: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
    let m = link.ambient_dim();
    if z.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: z.len(),
        });
    }
    let g = link.gradient(z);
    let sq: Vec<f64> = link.weights.iter().map(|&w| (w as f64).sqrt()).collect();
    // W = D^{1/2} X turns the weighted metric into the standard one
    let c = CMat::from_fn(2, m, |i, k| {
        if i == 0 {
            g[k] * sq[k]
        } else {
            z[k].conj() * sq[k]
        }
    });
    let gram = c.adjoint() * &c;
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let top = eig.eigenvalues[order[m - 1]];
    let second = eig.eigenvalues[order[m - 2]];
    if !(second > 1e-12 * top.max(1e-300)) {
        return Err(Error::SingularPoint(format!(
            "constraints degenerate at z (sigma^2 = {second:e})"
        )));
    }
    Ok(order[..m - 2]
        .iter()
        .map(|&col| (0..m).map(|k| eig.eigenvectors[(k, col)] * sq[k]).collect())
        .collect())
}

fn check_xi(link: &BrieskornLink, z: &[Complex64]) -> Result<f64> {
    let xi2 = link.xi_norm2(z);
    if !(xi2 > 0.0) {
        return Err(Error::SingularPoint("|xi| = 0".into()));
    }
    Ok(xi2)
}

/// Ambient holomorphic sectional curvature along a weighted-unit tangent `W`,
/// diagonal form `-|sum a_k (a_k - 1) z_k^{a_k-2} (W^k)^2|^2 / |xi|^2`.
pub fn ambient_sectional(link: &BrieskornLink, z: &[Complex64], w: &[Complex64]) -> Result<f64> {
    let xi2 = check_xi(link, z)?;
    let num: Complex64 = (0..link.ambient_dim())
        .map(|k| {
            let a = link.exponents[k];
            (a * (a - 1)) as f64 * z[k].powu(a - 2) * w[k] * w[k]
        })
        .sum();
    Ok(-num.norm_sqr() / xi2)
}

/// General form `-|sum_{j,k} conj(W^k) conj(p_jk) conj(W^j)|^2 / |xi|^2`.
pub fn ambient_sectional_general(
    link: &BrieskornLink,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<f64> {
    let xi2 = check_xi(link, z)?;
    let hess = link.hessian(z);
    let m = link.ambient_dim();
    let mut acc = ZERO;
    for j in 0..m {
        for k in 0..m {
            acc += w[k].conj() * hess[(j, k)].conj() * w[j].conj();
        }
    }
    Ok(-acc.norm_sqr() / xi2)
}

/// `K(W) = sum w_j |z_j|^2 + K_ambient(W) / 2`.
pub fn link_sectional(link: &BrieskornLink, z: &[Complex64], w: &[Complex64]) -> Result<f64> {
    Ok(link.h2(z) + 0.5 * ambient_sectional(link, z, w)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSample {
    pub point: Vec<Complex64>,
    pub direction: Vec<Complex64>,
    pub k: f64,
    pub k_ambient: f64,
    pub k_ambient_general: f64,
    pub h2: f64,
    /// `|K - K_ambient/2 - |H|^2|`
    pub identity_residual: f64,
    pub constraint_residual: f64,
    /// Largest violation of the tangency constraints and of weighted
    /// orthonormality over the frame.
    pub frame_residual: f64,
}

/// Largest constraint violation and deviation of the weighted Gram matrix
/// from the identity.
pub fn frame_residual(link: &BrieskornLink, z: &[Complex64], frame: &[Vec<Complex64>]) -> f64 {
    let g = link.gradient(z);
    let mut worst = 0.0f64;
    for (i, w) in frame.iter().enumerate() {
        let c1: Complex64 = g.iter().zip(w).map(|(a, b)| a * b).sum();
        let c2: Complex64 = z.iter().zip(w).map(|(a, b)| a.conj() * b).sum();
        worst = worst.max(c1.norm()).max(c2.norm());
        for (j, v) in frame.iter().enumerate() {
            let ip: Complex64 = w
                .iter()
                .zip(v)
                .zip(&link.weights)
                .map(|((a, b), &wt)| a * b.conj() / wt as f64)
                .sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((ip - target).norm());
        }
    }
    worst
}

/// Samples link points and one random weighted-unit tangent direction per
/// point.
pub fn sample_curvatures(link: &BrieskornLink, count: usize, seed: u64) -> Result<Vec<LinkSample>> {
    let points = sample_link(link, count, seed)?;
    let out = par_indexed(seed, points.len(), |i, _| -> Result<LinkSample> {
        let z = &points[i];
        let frame = tangent_frame(link, z)?;
        let mut rng = stream_rng(seed.wrapping_add(DIRECTION_SEED_OFFSET), i as u64);
        let coef = gaussian_vector(&mut rng, frame.len());
        let mut w = vec![ZERO; link.ambient_dim()];
        for (c, v) in coef.iter().zip(&frame) {
            for k in 0..w.len() {
                w[k] += c * v[k];
            }
        }
        let norm = link.weighted_norm2(&w).sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroDirection);
        }
        w.iter_mut().for_each(|x| *x /= norm);
        let k_ambient = ambient_sectional(link, z, &w)?;
        let k = link_sectional(link, z, &w)?;
        let h2 = link.h2(z);
        let (rp, rn) = link.constraint_residuals(z);
        Ok(LinkSample {
            point: z.clone(),
            k,
            k_ambient,
            k_ambient_general: ambient_sectional_general(link, z, &w)?,
            h2,
            identity_residual: (k - 0.5 * k_ambient - h2).abs(),
            constraint_residual: rp.max(rn),
            frame_residual: frame_residual(link, z, &frame),
            direction: w,
        })
    });
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lcm_weights() {
        assert_eq!(weights(&[2, 2, 2]).unwrap(), (2, vec![1, 1, 1]));
        assert_eq!(weights(&[2, 3, 5]).unwrap(), (30, vec![15, 10, 6]));
        assert_eq!(weights(&[2, 3, 7]).unwrap(), (42, vec![21, 14, 6]));
        assert!(weights(&[2, 1, 3]).is_err());
        assert!(BrieskornLink::new(&[2, 2], 1.0).is_err());
    }

    #[test]
    fn explicit_222_point() {
        let link = BrieskornLink::new(&[2, 2, 2], 1.0).unwrap();
        let s = 0.5f64.sqrt();
        let z = [c(s, 0.0), c(0.0, s), ZERO];
        let (rp, rn) = link.constraint_residuals(&z);
        assert!(rp < 1e-15 && rn < 1e-15);
        let w = [ZERO, ZERO, c(1.0, 0.0)];
        assert!((link.xi_norm2(&z) - 4.0).abs() < 1e-14);
        assert!((ambient_sectional(&link, &z, &w).unwrap() + 1.0).abs() < 1e-14);
        assert!((ambient_sectional_general(&link, &z, &w).unwrap() + 1.0).abs() < 1e-14);
        assert!((link_sectional(&link, &z, &w).unwrap() - 0.5).abs() < 1e-14);
        let frame = tangent_frame(&link, &z).unwrap();
        assert_eq!(frame.len(), 1);
        assert!(frame[0][2].norm() > 1.0 - 1e-12);
        assert!(frame_residual(&link, &z, &frame) < 1e-12);
    }

    #[test]
    fn isotropic_direction_is_flat() {
        let link = BrieskornLink::new(&[2, 2, 2, 2], 2.0).unwrap();
        let z = [c(1.0, 0.0), c(0.0, 1.0), ZERO, ZERO];
        let s = 0.5f64.sqrt();
        let w = [ZERO, ZERO, c(s, 0.0), c(0.0, s)];
        assert!(ambient_sectional(&link, &z, &w).unwrap().abs() < 1e-15);
    }

    #[test]
    fn samples_satisfy_constraints() {
        for (e, r, n) in [(vec![2u32, 3, 5], 1.0, 100), (vec![2, 2, 2, 2], 2.0, 50)] {
            let link = BrieskornLink::new(&e, r).unwrap();
            for s in sample_curvatures(&link, n, 9).unwrap() {
                assert!(s.constraint_residual < 1e-10);
                assert!(s.frame_residual < 1e-12, "{}", s.frame_residual);
                assert!(s.k_ambient <= 1e-12);
                assert!(s.identity_residual < 1e-10);
                assert!(
                    (s.k_ambient - s.k_ambient_general).abs() < 1e-12 * s.k_ambient.abs().max(1.0)
                );
                assert!(s.k <= s.h2 + 1e-12);
            }
        }
    }

    #[test]
    fn quadric_link_has_h2_equal_r() {
        let link = BrieskornLink::new(&[2, 2, 2], 1.5).unwrap();
        for z in sample_link(&link, 20, 4).unwrap() {
            assert!((link.h2(&z) - 1.5).abs() < 1e-10);
        }
    }

    #[test]
    fn frame_dimension() {
        let link = BrieskornLink::new(&[3, 3, 4, 5], 1.0).unwrap();
        for z in sample_link(&link, 5, 1).unwrap() {
            assert_eq!(tangent_frame(&link, &z).unwrap().len(), 2);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let link = BrieskornLink::new(&[2, 3, 7], 1.0).unwrap();
        assert_eq!(
            sample_link(&link, 8, 3).unwrap(),
            sample_link(&link, 8, 3).unwrap()
        );
    }
}
