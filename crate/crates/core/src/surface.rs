//! Points on M = {rho = 0}, the adapted frame, the Levi form and the
//! Behnke-Peschl form.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::defn::{AmbientMetric, DefiningFunction};
use crate::error::{Error, Result};
use crate::linalg::{
    bilinear, condition_number, hermitian_eigenvalues, min_symmetric_eigenvalue, sesquilinear,
    CMat, I, ZERO,
};
use crate::sampling::{gaussian_vector, par_indexed};
use crate::wirtinger::{jet3, Jet3};

pub const PROJECTION_MAX_ITER: usize = 50;
pub const PROJECTION_TOL: f64 = 1e-12;
/// Largest |rho(p)| accepted as "on the hypersurface".
pub const ON_SURFACE_TOL: f64 = 1e-10;
/// Eigenvalues above this count as nonnegative in convexity verdicts.
pub const PSD_TOL: f64 = -1e-8;
/// Attempts per requested sample before giving up.
pub const SAMPLE_RETRIES: usize = 64;

/// Newton iteration along the real gradient of rho:
/// `z <- z - rho * rho_jbar / (2 sum |rho_k|^2)`.
pub fn project_to_surface(f: &DefiningFunction, x0: &[Complex64]) -> Result<Vec<Complex64>> {
    let m = f.dim();
    let mut z = x0.to_vec();
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for _ in 0..=PROJECTION_MAX_ITER {
        let s = f.series(&z, 1)?;
        let rho = s.value().re;
        // once within tolerance, keep polishing while Newton still gains
        if let Some((r, p)) = &best {
            if *r < PROJECTION_TOL && rho.abs() >= *r {
                return Ok(p.clone());
            }
        }
        if rho == 0.0 {
            return Ok(z);
        }
        best = Some((rho.abs(), z.clone()));
        let grad: Vec<Complex64> = (0..m)
            .map(|j| {
                let mut e = vec![0u8; 2 * m];
                e[j] = 1;
                s.partial(&e)
            })
            .collect();
        let g2: f64 = grad.iter().map(|g| g.norm_sqr()).sum();
        if !(g2 > 1e-300) {
            return Err(Error::VanishingGradient);
        }
        for j in 0..m {
            z[j] -= grad[j].conj() * (rho / (2.0 * g2));
        }
    }
    match best {
        Some((r, p)) if r < PROJECTION_TOL => Ok(p),
        Some((r, _)) => Err(Error::NonConvergence {
            iterations: PROJECTION_MAX_ITER,
            residual: r,
        }),
        None => unreachable!(),
    }
}

/// Adapted frame at a point of M.
///
/// `w` is the ambient coordinate playing the role of z_{n+1} (the one with
/// the largest |rho_j|) and `chart[alpha]` lists the remaining coordinates.
/// The frame vectors are `Z_alpha = rho_w e_{chart[alpha]} - rho_{chart[alpha]} e_w`
/// unless a basis change has been applied.
#[derive(Debug, Clone)]
pub struct SurfaceFrame {
    point: Vec<Complex64>,
    jet: Jet3,
    w: usize,
    chart: Vec<usize>,
    vectors: Vec<Vec<Complex64>>,
    levi: CMat,
    hol: CMat,
    drho2: f64,
    levi_min: f64,
    levi_condition: f64,
}

impl SurfaceFrame {
    pub fn point(&self) -> &[Complex64] {
        &self.point
    }

    pub fn jet(&self) -> &Jet3 {
        &self.jet
    }

    /// CR dimension n.
    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn w_index(&self) -> usize {
        self.w
    }

    pub fn chart(&self) -> &[usize] {
        &self.chart
    }

    /// Frame vectors in ambient coordinates.
    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    /// h_{alpha betabar} = rho_{j kbar} Z_alpha^j conj(Z_beta^k).
    pub fn levi(&self) -> &CMat {
        &self.levi
    }

    /// h_{alpha beta} = rho_{jk} Z_alpha^j Z_beta^k.
    pub fn hol(&self) -> &CMat {
        &self.hol
    }

    /// |d rho|^2_a
    pub fn drho2(&self) -> f64 {
        self.drho2
    }

    /// |H|^2 = 1 / |d rho|^2_a
    pub fn h2(&self) -> f64 {
        1.0 / self.drho2
    }

    pub fn levi_min_eigenvalue(&self) -> f64 {
        self.levi_min
    }

    pub fn levi_condition(&self) -> f64 {
        self.levi_condition
    }

    /// Ambient vector `sum zeta^alpha Z_alpha`.
    pub fn push_forward(&self, zeta: &[Complex64]) -> Vec<Complex64> {
        let m = self.point.len();
        (0..m)
            .map(|j| zeta.iter().zip(&self.vectors).map(|(c, v)| c * v[j]).sum())
            .collect()
    }

    /// Replaces `Z_alpha` by `sum_beta U[alpha, beta] Z_beta`.
    pub fn transformed(&self, u: &CMat) -> SurfaceFrame {
        let n = self.n();
        let vectors: Vec<Vec<Complex64>> = (0..n)
            .map(|a| self.push_forward(&(0..n).map(|b| u[(a, b)]).collect::<Vec<_>>()))
            .collect();
        let levi = u * &self.levi * u.adjoint();
        let hol = u * &self.hol * u.transpose();
        let ev = hermitian_eigenvalues(&levi);
        SurfaceFrame {
            vectors,
            levi_min: ev[0],
            levi_condition: ev[n - 1] / ev[0],
            levi,
            hol,
            ..self.clone()
        }
    }
}

/// Builds the adapted frame at `p`.
pub fn frame_at(f: &DefiningFunction, a: &AmbientMetric, p: &[Complex64]) -> Result<SurfaceFrame> {
    if a.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: a.dim(),
        });
    }
    let jet = jet3(f, p)?;
    frame_from_jet(jet, a)
}

pub fn frame_from_jet(jet: Jet3, a: &AmbientMetric) -> Result<SurfaceFrame> {
    let m = jet.dim();
    if jet.value().abs() > ON_SURFACE_TOL {
        return Err(Error::Domain(format!(
            "point is off the hypersurface (rho = {:e})",
            jet.value()
        )));
    }
    let grad_norm = (0..m).map(|j| jet.d(j).norm_sqr()).sum::<f64>().sqrt();
    let w = (0..m)
        .rev()
        .max_by(|&x, &y| jet.d(x).norm().total_cmp(&jet.d(y).norm()))
        .unwrap();
    if !(jet.d(w).norm() > 1e-8 * grad_norm) || grad_norm == 0.0 {
        return Err(Error::ChartFailure(jet.d(w).norm()));
    }
    let chart: Vec<usize> = (0..m).filter(|&j| j != w).collect();
    let n = chart.len();
    let vectors: Vec<Vec<Complex64>> = chart
        .iter()
        .map(|&c| {
            let mut v = vec![ZERO; m];
            v[c] = jet.d(w);
            v[w] = -jet.d(c);
            v
        })
        .collect();
    let mixed = CMat::from_fn(m, m, |j, k| jet.mixed(j, k));
    let holm = CMat::from_fn(m, m, |j, k| jet.hol2(j, k));
    let mut levi = CMat::from_fn(n, n, |x, y| sesquilinear(&mixed, &vectors[x], &vectors[y]));
    // exact Hermitian symmetry
    for x in 0..n {
        levi[(x, x)].im = 0.0;
        for y in x + 1..n {
            levi[(y, x)] = levi[(x, y)].conj();
        }
    }
    let mut hol = CMat::from_fn(n, n, |x, y| bilinear(&holm, &vectors[x], &vectors[y]));
    for x in 0..n {
        for y in x + 1..n {
            hol[(y, x)] = hol[(x, y)];
        }
    }
    let ev = hermitian_eigenvalues(&levi);
    let scale = ev[n - 1].abs().max(f64::MIN_POSITIVE);
    if !(ev[0] > 1e-12 * scale) {
        return Err(Error::NotPseudoconvex(ev[0]));
    }
    let d1: Vec<Complex64> = (0..m).map(|j| jet.d(j)).collect();
    let drho2 = a.covector_norm2(&d1);
    Ok(SurfaceFrame {
        point: jet.point().to_vec(),
        jet,
        w,
        chart,
        vectors,
        levi_condition: condition_number(&levi),
        levi,
        hol,
        drho2,
        levi_min: ev[0],
    })
}

/// Euclidean-orthonormal complex basis of the complex tangent plane
/// `{sum rho_j eta_j = 0}`, obtained by Gram-Schmidt on the frame vectors.
pub fn tangent_basis(frame: &SurfaceFrame) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in frame.vectors() {
        let mut u = v.clone();
        for e in &basis {
            let c: Complex64 = e.iter().zip(&u).map(|(x, y)| x.conj() * y).sum();
            for (ui, ei) in u.iter_mut().zip(e) {
                *ui -= c * ei;
            }
        }
        let norm = u.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        u.iter_mut().for_each(|x| *x /= norm);
        basis.push(u);
    }
    basis
}

/// Real Hessian form `Re(rho_jk u_j v_k) + Re(rho_{j kbar} u_j conj(v_k))`
/// on the complex tangent plane, in the real basis `{e_alpha, i e_alpha}`.
pub fn behnke_peschl_form(frame: &SurfaceFrame) -> DMatrix<f64> {
    let jet = frame.jet();
    let m = jet.dim();
    let holm = CMat::from_fn(m, m, |j, k| jet.hol2(j, k));
    let mixed = CMat::from_fn(m, m, |j, k| jet.mixed(j, k));
    let basis = tangent_basis(frame);
    let mut real_basis = basis.clone();
    real_basis.extend(
        basis
            .iter()
            .map(|e| e.iter().map(|x| I * x).collect::<Vec<_>>()),
    );
    let d = real_basis.len();
    let mut form = DMatrix::<f64>::zeros(d, d);
    for x in 0..d {
        for y in x..d {
            let u = &real_basis[x];
            let v = &real_basis[y];
            let val = bilinear(&holm, u, v).re + sesquilinear(&mixed, u, v).re;
            form[(x, y)] = val;
            form[(y, x)] = val;
        }
    }
    form
}

/// Minimum eigenvalue and matrix of the Behnke-Peschl form at `p`.
pub fn behnke_peschl(
    f: &DefiningFunction,
    a: &AmbientMetric,
    p: &[Complex64],
) -> Result<(f64, DMatrix<f64>)> {
    let frame = frame_at(f, a, p)?;
    let form = behnke_peschl_form(&frame);
    Ok((min_symmetric_eigenvalue(&form), form))
}

pub fn behnke_peschl_min(frame: &SurfaceFrame) -> f64 {
    min_symmetric_eigenvalue(&behnke_peschl_form(frame))
}

/// Draws `count` strictly pseudoconvex surface points: Gaussian ambient
/// starts, projected, with non-convergent or degenerate hits redrawn. Sample
/// `i` depends only on `(seed, i)`.
pub fn sample_surface(
    f: &DefiningFunction,
    a: &AmbientMetric,
    count: usize,
    seed: u64,
) -> Result<Vec<SurfaceFrame>> {
    sample_surface_from(f, a, count, seed, gaussian_vector)
}

/// As [`sample_surface`], with a caller-supplied distribution of starts.
pub fn sample_surface_from<G>(
    f: &DefiningFunction,
    a: &AmbientMetric,
    count: usize,
    seed: u64,
    start: G,
) -> Result<Vec<SurfaceFrame>>
where
    G: Fn(&mut crate::sampling::StreamRng, usize) -> Vec<Complex64> + Sync,
{
    let m = f.dim();
    let results = par_indexed(seed, count, |i, rng| {
        let mut last = None;
        for _ in 0..SAMPLE_RETRIES {
            let x0 = start(rng, m);
            match project_to_surface(f, &x0).and_then(|p| frame_at(f, a, &p)) {
                Ok(frame) => return Ok(frame),
                Err(
                    e @ (Error::Syntax { .. }
                    | Error::UnboundParameter(_)
                    | Error::DimensionMismatch { .. }),
                ) => return Err(e),
                Err(e) => last = Some(e),
            }
        }
        Err(Error::Sampling(format!(
            "sample {i}: no strictly pseudoconvex surface point after {SAMPLE_RETRIES} attempts (last error: {})",
            last.map(|e| e.to_string()).unwrap_or_default()
        )))
    });
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defn::builtin_family;
    use std::collections::BTreeMap;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn family(name: &str, params: &[(&str, f64)]) -> (DefiningFunction, AmbientMetric) {
        let p: BTreeMap<String, f64> = params.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        builtin_family(name, &p).unwrap()
    }

    #[test]
    fn projections() {
        let (s, _) = family("sphere", &[]);
        let p = project_to_surface(&s, &[c(2.0, 0.0), ZERO]).unwrap();
        assert!((p[0] - c(1.0, 0.0)).norm() < 1e-12 && p[1].norm() == 0.0);

        let (e, _) = family("perturbed_sphere_E", &[]);
        let p = project_to_surface(&e, &[ZERO, c(2.0, 0.0)]).unwrap();
        assert!(p[0].norm() == 0.0);
        assert!((p[1] - c(0.5f64.sqrt(), 0.0)).norm() < 1e-12);

        let (h, _) = family("hartogs", &[("t", 1.0)]);
        let p = project_to_surface(&h, &[ZERO, c(2.0, 0.0)]).unwrap();
        assert!((p[1] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn vanishing_gradient_is_reported() {
        let (s, _) = family("sphere", &[]);
        assert_eq!(
            project_to_surface(&s, &[ZERO, ZERO]),
            Err(Error::VanishingGradient)
        );
    }

    #[test]
    fn sphere_frame_at_pole() {
        let (s, a) = family("sphere", &[]);
        let fr = frame_at(&s, &a, &[ZERO, c(1.0, 0.0)]).unwrap();
        assert_eq!(fr.w_index(), 1);
        assert_eq!(fr.vectors()[0], vec![c(1.0, 0.0), ZERO]);
        assert_eq!(fr.levi()[(0, 0)], c(1.0, 0.0));
        assert_eq!(fr.drho2(), 1.0);
        assert_eq!(fr.h2(), 1.0);
        let (bp, form) = behnke_peschl(&s, &a, &[ZERO, c(1.0, 0.0)]).unwrap();
        assert!((bp - 1.0).abs() < 1e-15);
        assert_eq!(form.nrows(), 2);
    }

    #[test]
    fn perturbed_sphere_has_constant_gradient_norm() {
        let (e, a) = family("perturbed_sphere_E", &[("n", 2.0)]);
        for fr in sample_surface(&e, &a, 20, 3).unwrap() {
            assert!((fr.drho2() - 2.0).abs() < 1e-12);
            assert!((fr.h2() - 0.5).abs() < 1e-12);
            assert!((fr.drho2() * fr.h2() - 1.0).abs() == 0.0);
        }
    }

    #[test]
    fn ellipsoid_gradient_norm_formula() {
        let (alpha, beta) = (1.5, 2.0);
        let (f, a) = family(
            "ellipsoid",
            &[
                ("alpha", alpha),
                ("beta", beta),
                ("gamma", 0.3),
                ("sigma", 0.4),
            ],
        );
        for fr in sample_surface(&f, &a, 10, 1).unwrap() {
            let (rz, rw) = (fr.jet().d(0), fr.jet().d(1));
            let expected = (beta * rz.norm_sqr() + alpha * rw.norm_sqr()) / (alpha * beta);
            assert!((fr.drho2() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_annihilates_rho() {
        let (h, a) = family("hartogs", &[("t", 0.6)]);
        for fr in sample_surface(&h, &a, 10, 9).unwrap() {
            assert!(fr.jet().value().abs() < ON_SURFACE_TOL);
            for v in fr.vectors() {
                let zr: Complex64 = v.iter().enumerate().map(|(j, x)| x * fr.jet().d(j)).sum();
                assert!(zr.norm() < 1e-10);
            }
            assert!(fr.levi_condition().is_finite() && fr.levi_condition() >= 1.0);
        }
    }

    #[test]
    fn unitary_change_preserves_invariants() {
        let (e, a) = family("perturbed_sphere_E", &[("n", 2.0)]);
        let fr = &sample_surface(&e, &a, 1, 11).unwrap()[0];
        // U unitary w.r.t. h: U = V L^{-1} with h = L L^H and V unitary
        let l = crate::linalg::cholesky(fr.levi()).unwrap();
        let theta = 0.7f64;
        let v = CMat::from_row_slice(
            2,
            2,
            &[
                c(theta.cos(), 0.0),
                c(0.0, theta.sin()),
                c(0.0, theta.sin()),
                c(theta.cos(), 0.0),
            ],
        );
        let u = v * l.try_inverse().unwrap();
        let g = fr.transformed(&u);
        assert!(crate::linalg::max_abs(&(g.levi() - CMat::identity(2, 2))) < 1e-12);
        assert!((behnke_peschl_min(&g) - behnke_peschl_min(fr)).abs() < 1e-10);
        assert_eq!(g.drho2(), fr.drho2());
    }

    #[test]
    fn scaling_rho() {
        let (h, a) = family("hartogs", &[("t", 0.4)]);
        let hs = h.scaled(3.0);
        for fr in sample_surface(&h, &a, 5, 2).unwrap() {
            let g = frame_at(&hs, &a, fr.point()).unwrap();
            assert!((g.drho2() - 9.0 * fr.drho2()).abs() < 1e-10 * g.drho2());
            let (b1, b3) = (behnke_peschl_min(&fr), behnke_peschl_min(&g));
            assert!((b3 - 3.0 * b1).abs() < 1e-10);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let (h, a) = family("hartogs", &[("t", 1.0)]);
        let x = sample_surface(&h, &a, 8, 5).unwrap();
        let y = sample_surface(&h, &a, 8, 5).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert_eq!(p.point(), q.point());
        }
    }
}
