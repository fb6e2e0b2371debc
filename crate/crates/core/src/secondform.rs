//! Second fundamental form, pseudohermitian torsion and its extremal value.

use num_complex::Complex64;

use crate::defn::AmbientMetric;
use crate::error::{Error, Result};
use crate::linalg::{bilinear, cholesky, sesquilinear, takagi_top, CMat, I, ZERO};
use crate::surface::{behnke_peschl_min, SurfaceFrame};
use crate::wirtinger::Jet3;

/// The four-term operator
/// `D_ab(phi) = rho_w^2 phi_ab - rho_w rho_a phi_wb - rho_w rho_b phi_wa + rho_a rho_b phi_ww`
/// for ambient indices `a`, `b` and the chart coordinate `w`; `phi_hess(i, j)`
/// supplies the holomorphic second partials of phi.
pub fn d_operator<F>(jet: &Jet3, w: usize, a: usize, b: usize, phi_hess: F) -> Complex64
where
    F: Fn(usize, usize) -> Complex64,
{
    let (rw, ra, rb) = (jet.d(w), jet.d(a), jet.d(b));
    rw * rw * phi_hess(a, b) - rw * ra * phi_hess(w, b) - rw * rb * phi_hess(w, a)
        + ra * rb * phi_hess(w, w)
}

/// [`d_operator`] applied to `phi = rho_kbar`, whose holomorphic Hessian is
/// `rho_{ij kbar}`.
pub fn d_operator_rho_bar(jet: &Jet3, w: usize, a: usize, b: usize, k: usize) -> Complex64 {
    d_operator(jet, w, a, b, |i, j| jet.mixed3(i, j, k))
}

/// `rho^{kbar} = a^{j kbar} rho_j / |d rho|^2_a`, so that `rho^{kbar} rho_kbar = 1`.
pub fn raised_normal(frame: &SurfaceFrame, a: &AmbientMetric) -> Vec<Complex64> {
    let jet = frame.jet();
    let d1: Vec<Complex64> = (0..jet.dim()).map(|j| jet.d(j)).collect();
    let n2 = frame.drho2();
    a.raise(&d1).into_iter().map(|x| x / n2).collect()
}

/// Coefficients `c_ab` with `II(Z_a, Z_b) = c_ab H`:
/// `c_ab = -(rho^{kbar} D_ab(rho_kbar) - h_ab)`, where `D_ab(phi) = phi_ZZ(Z_a, Z_b)`.
pub fn second_form(frame: &SurfaceFrame, a: &AmbientMetric) -> CMat {
    let jet = frame.jet();
    let m = jet.dim();
    let n = frame.n();
    let up = raised_normal(frame, a);
    let vs = frame.vectors();
    let mut c = CMat::from_element(n, n, ZERO);
    for x in 0..n {
        for y in x..n {
            let mut acc = ZERO;
            for k in 0..m {
                let hess = CMat::from_fn(m, m, |i, j| jet.mixed3(i, j, k));
                acc += up[k] * bilinear(&hess, &vs[x], &vs[y]);
            }
            let v = -(acc - frame.hol()[(x, y)]);
            c[(x, y)] = v;
            c[(y, x)] = v;
        }
    }
    c
}

/// Torsion matrix `A_ab = -i c_ab |H|^2` (from `i A_ab = c_ab |H|^2`).
pub fn torsion_matrix(frame: &SurfaceFrame, c: &CMat) -> CMat {
    c.map(|x| -I * x * frame.h2())
}

/// `|Z|^2 = h_{a bbar} zeta^a conj(zeta^b)`.
pub fn levi_norm2(levi: &CMat, zeta: &[Complex64]) -> f64 {
    sesquilinear(levi, zeta, zeta).re
}

fn check_direction(levi: &CMat, zeta: &[Complex64]) -> Result<f64> {
    let n2 = levi_norm2(levi, zeta);
    if !(n2 > 0.0) || zeta.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::ZeroDirection);
    }
    Ok(n2)
}

/// `A(Z) = i A_ab zeta^a zeta^b / |Z|^2`.
pub fn a_of(levi: &CMat, a: &CMat, zeta: &[Complex64]) -> Result<Complex64> {
    let n2 = check_direction(levi, zeta)?;
    Ok(I * bilinear(a, zeta, zeta) / n2)
}

/// `Tor(Z, Z) = i A_ab zeta zeta - i A_abar bbar conj(zeta zeta) = 2 Re(i A_ab zeta^a zeta^b)`.
pub fn tor_of(levi: &CMat, a: &CMat, zeta: &[Complex64]) -> Result<f64> {
    check_direction(levi, zeta)?;
    Ok(2.0 * (I * bilinear(a, zeta, zeta)).re)
}

/// The scalar form of the immersion on `X = Z + conj(Z)`:
/// `2 (h_{a bbar} zeta conj(zeta) + Re(c_ab zeta zeta))`.
pub fn scalar_form(levi: &CMat, c: &CMat, zeta: &[Complex64]) -> f64 {
    2.0 * (levi_norm2(levi, zeta) + bilinear(c, zeta, zeta).re)
}

/// Largest `|A_ab zeta^a zeta^b|` over h-unit directions together with a
/// maximizing direction. With `h = L L^H` and `zeta = L^{-T} u`, the problem
/// becomes the top Takagi value of `L^{-1} A L^{-T}` over unit `u`.
pub fn torsion_sup_with_direction(a: &CMat, levi: &CMat) -> Result<(f64, Vec<Complex64>)> {
    let l = cholesky(levi)?;
    let linv = l.try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let b = &linv * a * linv.transpose();
    let b = (&b + b.transpose()) * Complex64::new(0.5, 0.0);
    let (s, u) = takagi_top(&b);
    let zeta = linv.transpose() * u;
    Ok((s, zeta.iter().copied().collect()))
}

pub fn torsion_sup(a: &CMat, levi: &CMat) -> Result<f64> {
    torsion_sup_with_direction(a, levi).map(|(s, _)| s)
}

/// Pseudohermitian data at one surface point.
#[derive(Debug, Clone)]
pub struct PseudohermitianData {
    /// `c_ab` with `II(Z_a, Z_b) = c_ab H`.
    pub ii_hol: CMat,
    pub a: CMat,
    pub sup_a: f64,
    /// h-unit direction attaining `sup_a`.
    pub extremal: Vec<Complex64>,
    pub bp_min: f64,
}

impl PseudohermitianData {
    pub fn compute(frame: &SurfaceFrame, metric: &AmbientMetric) -> Result<PseudohermitianData> {
        let ii_hol = second_form(frame, metric);
        let a = torsion_matrix(frame, &ii_hol);
        let (sup_a, extremal) = torsion_sup_with_direction(&a, frame.levi())?;
        Ok(PseudohermitianData {
            ii_hol,
            a,
            sup_a,
            extremal,
            bp_min: behnke_peschl_min(frame),
        })
    }

    pub fn a_of(&self, frame: &SurfaceFrame, zeta: &[Complex64]) -> Result<Complex64> {
        a_of(frame.levi(), &self.a, zeta)
    }

    pub fn tor_of(&self, frame: &SurfaceFrame, zeta: &[Complex64]) -> Result<f64> {
        tor_of(frame.levi(), &self.a, zeta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defn::builtin_family;
    use crate::linalg::max_abs;
    use crate::sampling::{gaussian_vector, stream_rng};
    use crate::surface::{frame_at, sample_surface};
    use crate::wirtinger::jet3;
    use std::collections::BTreeMap;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn family(name: &str, params: &[(&str, f64)]) -> (crate::DefiningFunction, AmbientMetric) {
        let p: BTreeMap<String, f64> = params.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        builtin_family(name, &p).unwrap()
    }

    #[test]
    fn d_operator_kills_holomorphic_coordinates() {
        let (h, _) = family("hartogs", &[("t", 0.5)]);
        let jet = jet3(&h, &[c(0.3, 0.1), c(0.8, -0.2)]).unwrap();
        assert_eq!(d_operator(&jet, 1, 0, 0, |_, _| ZERO), ZERO);
        let (e, _) = family("perturbed_sphere_E", &[]);
        let jet = jet3(&e, &[c(0.3, 0.1), c(0.6, -0.2)]).unwrap();
        for k in 0..2 {
            assert_eq!(d_operator_rho_bar(&jet, 1, 0, 0, k), ZERO);
        }
    }

    #[test]
    fn four_term_formula_matches_frame_contraction() {
        let (h, a) = family("hartogs", &[("t", 0.8)]);
        for fr in sample_surface(&h, &a, 5, 4).unwrap() {
            let jet = fr.jet();
            let w = fr.w_index();
            let alpha = fr.chart()[0];
            for k in 0..2 {
                let four = d_operator_rho_bar(jet, w, alpha, alpha, k);
                let hess = CMat::from_fn(2, 2, |i, j| jet.mixed3(i, j, k));
                let contr = bilinear(&hess, &fr.vectors()[0], &fr.vectors()[0]);
                assert!((four - contr).norm() < 1e-12 * contr.norm().max(1.0));
            }
        }
    }

    #[test]
    fn hartogs_d_operator_at_reference_point() {
        // rho_zbar = z + t zbar (z^2 + zbar^2), so phi_zz = 2 t zbar and phi_zw = phi_ww = 0
        let t = 1.0;
        let (h, _) = family("hartogs", &[("t", t)]);
        let z = [c(0.3, 0.0), c(0.8, 0.0)];
        let jet = jet3(&h, &z).unwrap();
        let v = d_operator_rho_bar(&jet, 1, 0, 0, 0);
        let expected = jet.d(1) * jet.d(1) * c(2.0 * t * 0.3, 0.0);
        assert!((v - expected).norm() < 1e-12);
        assert!(v.norm() > 0.0);
    }

    #[test]
    fn sphere_is_umbilical() {
        let (s, a) = family("sphere", &[("n", 2.0)]);
        for fr in sample_surface(&s, &a, 10, 2).unwrap() {
            let d = PseudohermitianData::compute(&fr, &a).unwrap();
            assert!(max_abs(&d.ii_hol) < 1e-14);
            assert!(d.sup_a < 1e-14);
        }
    }

    #[test]
    fn example_e_torsion_is_half_h() {
        for n in [1.0, 2.0] {
            let (e, a) = family("perturbed_sphere_E", &[("n", n)]);
            for fr in sample_surface(&e, &a, 10, 8).unwrap() {
                let d = PseudohermitianData::compute(&fr, &a).unwrap();
                let scale = max_abs(fr.hol());
                assert!(max_abs(&(&d.ii_hol - fr.hol())) < 1e-13 * scale);
                assert!(max_abs(&(d.a.map(|x| x * I) - fr.hol().map(|x| x * 0.5))) < 1e-13 * scale);
                assert!((d.sup_a - 0.5).abs() < 1e-12);
                let attained = d.a_of(&fr, &d.extremal).unwrap().norm();
                assert!((attained - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn direction_invariances() {
        let (e, a) = family(
            "ellipsoid",
            &[
                ("alpha", 1.5),
                ("beta", 2.0),
                ("gamma", 0.3),
                ("sigma", 0.4),
            ],
        );
        let fr = frame_at(
            &e,
            &a,
            &crate::surface::project_to_surface(&e, &[c(0.4, 0.2), c(0.3, -0.5)]).unwrap(),
        )
        .unwrap();
        let d = PseudohermitianData::compute(&fr, &a).unwrap();
        let zeta = [c(0.7, -0.3)];
        let base = d.a_of(&fr, &zeta).unwrap();
        let phase = Complex64::from_polar(1.0, 1.3);
        let rotated = d.a_of(&fr, &[zeta[0] * phase]).unwrap().norm();
        assert!((rotated - base.norm()).abs() <= 4.0 * f64::EPSILON * base.norm());
        let s = c(2.0, -1.5);
        let scaled = d.a_of(&fr, &[zeta[0] * s]).unwrap();
        assert!((scaled - base * s * s / s.norm_sqr()).norm() < 1e-14);
        assert_eq!(d.a_of(&fr, &[ZERO]), Err(Error::ZeroDirection));
        assert!(max_abs(&(&d.a - d.a.transpose())) < 1e-12);
    }

    #[test]
    fn sup_matches_brute_force_random_n3() {
        let mut rng = stream_rng(42, 0);
        let n = 3;
        let g = CMat::from_fn(n, n, |_, _| crate::sampling::complex_normal(&mut rng));
        let levi = &g * g.adjoint() + CMat::identity(n, n) * c(0.5, 0.0);
        let r = CMat::from_fn(n, n, |_, _| crate::sampling::complex_normal(&mut rng));
        let a = (&r + r.transpose()) * c(0.5, 0.0);
        let (sup, zeta) = torsion_sup_with_direction(&a, &levi).unwrap();
        assert!((a_of(&levi, &a, &zeta).unwrap().norm() - sup).abs() < 1e-10);
        let value = |z: &[Complex64]| a_of(&levi, &a, z).unwrap().norm();
        let mut best = (0.0f64, vec![ZERO; n]);
        for _ in 0..100_000 {
            let z = gaussian_vector(&mut rng, n);
            let v = value(&z);
            if v > best.0 {
                best = (v, z);
            }
        }
        assert!(best.0 <= sup + 1e-12);
        // local random search from the best sample
        let mut step = 0.1;
        for _ in 0..20_000 {
            let trial: Vec<Complex64> = best
                .1
                .iter()
                .map(|x| x + crate::sampling::complex_normal(&mut rng) * step)
                .collect();
            let v = value(&trial);
            if v > best.0 {
                best = (v, trial);
            } else {
                step = (step * 0.999).max(1e-6);
            }
        }
        assert!(best.0 <= sup + 1e-12);
        assert!(sup - best.0 < 1e-3, "sup {sup} vs search {}", best.0);
        assert_eq!(torsion_sup(&CMat::zeros(n, n), &levi).unwrap(), 0.0);
    }

    #[test]
    fn covariance_under_unitary_change() {
        let (e, a) = family("perturbed_sphere_E", &[("n", 2.0)]);
        let fr = &sample_surface(&e, &a, 1, 6).unwrap()[0];
        let d = PseudohermitianData::compute(fr, &a).unwrap();
        let u = CMat::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.8), c(0.6, 0.0)]);
        let g = fr.transformed(&u);
        let dg = PseudohermitianData::compute(&g, &a).unwrap();
        assert!((dg.sup_a - d.sup_a).abs() < 1e-10);
    }
}
