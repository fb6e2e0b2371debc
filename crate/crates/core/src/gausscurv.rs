//! Holomorphic sectional curvature through the Gauss identity
//! `K(Z) + |A(Z)|^2 / (2|H|^2) = K_ambient(Z) / 2 + |H|^2`, the lower bound
//! `K >= K_ambient / 2 + |H|^2 / 2` under pseudohermitian C-convexity, and
//! bounds on the first positive eigenvalue of the Kohn Laplacian.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::defn::{AmbientMetric, DefiningFunction};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMat, ZERO};
use crate::sampling::{gaussian_vector, stream_rng};
use crate::secondform::{a_of, levi_norm2, PseudohermitianData};
use crate::surface::{sample_surface, SurfaceFrame};
use crate::webster3::tw_direct;

/// Tolerance on `|rho_{j kbar}(p) - rho_{j kbar}(p0)|` for the constant
/// Hessian gate.
pub const HESSIAN_TOL: f64 = 1e-10;
/// Verdict tolerance for torsion margins and Behnke-Peschl eigenvalues.
pub const VERDICT_TOL: f64 = 1e-8;
/// Tolerance on the lower bound `K >= K_ambient/2 + |H|^2/2`.
pub const BOUND_TOL: f64 = 1e-9;
const DIRECTION_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

pub const GATE_FLAG: &str = "constant-Hessian hypothesis violated";

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSample {
    pub point: Vec<Complex64>,
    /// h-unit direction in frame coordinates.
    pub zeta: Vec<Complex64>,
    pub k: f64,
    pub k_ambient: f64,
    pub h2: f64,
    pub abs_a: f64,
    /// `K - K_ambient/2 - |H|^2/2`
    pub bound_residual: f64,
    /// `|H|^2 - |A(Z)|`
    pub torsion_margin: f64,
}

/// `K(Z) = K_ambient/2 + |H|^2 - |A(Z)|^2 / (2|H|^2)`.
pub fn sectional_curvature(
    frame: &SurfaceFrame,
    a: &CMat,
    zeta: &[Complex64],
    k_ambient: f64,
) -> Result<f64> {
    let az = a_of(frame.levi(), a, zeta)?;
    let h2 = frame.h2();
    Ok(0.5 * k_ambient + h2 - 0.5 * az.norm_sqr() / h2)
}

pub fn curvature_sample(
    frame: &SurfaceFrame,
    a: &CMat,
    zeta: &[Complex64],
    k_ambient: f64,
) -> Result<CurvatureSample> {
    let n2 = levi_norm2(frame.levi(), zeta);
    if !(n2 > 0.0) {
        return Err(Error::ZeroDirection);
    }
    let unit: Vec<Complex64> = zeta.iter().map(|z| z / n2.sqrt()).collect();
    let k = sectional_curvature(frame, a, &unit, k_ambient)?;
    let abs_a = a_of(frame.levi(), a, &unit)?.norm();
    let h2 = frame.h2();
    Ok(CurvatureSample {
        point: frame.point().to_vec(),
        zeta: unit,
        k,
        k_ambient,
        h2,
        abs_a,
        bound_residual: k - 0.5 * k_ambient - 0.5 * h2,
        torsion_margin: h2 - abs_a,
    })
}

/// Largest entrywise deviation of `rho_{j kbar}` over the frames from its
/// value at the first frame.
pub fn hessian_spread(frames: &[SurfaceFrame]) -> f64 {
    let Some(first) = frames.first() else {
        return 0.0;
    };
    let m = first.jet().dim();
    let mut worst = 0.0f64;
    for fr in frames {
        for j in 0..m {
            for k in 0..m {
                worst = worst.max((fr.jet().mixed(j, k) - first.jet().mixed(j, k)).norm());
            }
        }
    }
    worst
}

/// Largest entrywise deviation of `rho_{j kbar}` from the identity.
pub fn identity_defect(frames: &[SurfaceFrame]) -> f64 {
    let mut worst = 0.0f64;
    for fr in frames {
        let m = fr.jet().dim();
        for j in 0..m {
            for k in 0..m {
                let delta = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((fr.jet().mixed(j, k) - delta).norm());
            }
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub point: Vec<Complex64>,
    pub h2: f64,
    pub sup_a: f64,
    pub bp_min: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub min_bound_residual: f64,
    pub max_bound_residual: f64,
    pub min_torsion_margin: f64,
    pub samples: Vec<CurvatureSample>,
}

impl PointRecord {
    /// Torsion verdict: `sup |A| <= |H|^2`.
    pub fn torsion_convex(&self) -> bool {
        self.sup_a <= self.h2 + VERDICT_TOL
    }

    /// Behnke-Peschl verdict.
    pub fn bp_convex(&self) -> bool {
        self.bp_min >= -VERDICT_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub records: Vec<PointRecord>,
    pub hessian_spread: f64,
    /// Whether `rho_{j kbar}` equals the ambient metric at every sample.
    pub semi_isometric: bool,
    pub flags: Vec<String>,
    pub k_min: f64,
    pub k_max: f64,
    pub min_torsion_margin: f64,
    pub min_bound_residual: f64,
    pub max_bound_residual: f64,
    /// C-convexity verdict from the Behnke-Peschl test over all samples.
    pub c_convex: bool,
    /// Points where the Behnke-Peschl and torsion verdicts disagree
    /// (counted only when the Gauss path is valid).
    pub equivalence_disagreements: usize,
    /// `Some(ok)` when the bound applies (valid Gauss path and nonnegative
    /// torsion margins), `None` otherwise.
    pub theorem_holds: Option<bool>,
}

impl TheoremReport {
    pub fn gauss_path_valid(&self) -> bool {
        !self.flags.iter().any(|f| f == GATE_FLAG)
    }

    pub fn samples(&self) -> impl Iterator<Item = &CurvatureSample> {
        self.records.iter().flat_map(|r| r.samples.iter())
    }
}

/// Curvature data at one frame: `n_dirs` Gaussian h-unit directions plus
/// the Takagi extremal direction.
pub fn point_record(
    frame: &SurfaceFrame,
    metric: &AmbientMetric,
    n_dirs: usize,
    rng_index: u64,
    seed: u64,
) -> Result<PointRecord> {
    let data = PseudohermitianData::compute(frame, metric)?;
    let mut rng = stream_rng(seed.wrapping_add(DIRECTION_SEED_OFFSET), rng_index);
    let n = frame.n();
    let mut dirs: Vec<Vec<Complex64>> = Vec::with_capacity(n_dirs + 1);
    while dirs.len() < n_dirs {
        let z = gaussian_vector(&mut rng, n);
        if levi_norm2(frame.levi(), &z) > 0.0 {
            dirs.push(z);
        }
    }
    dirs.push(data.extremal.clone());
    let samples = dirs
        .iter()
        .map(|z| curvature_sample(frame, &data.a, z, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let fold = |f: fn(&CurvatureSample) -> f64, init: f64, pick: fn(f64, f64) -> f64| {
        samples.iter().map(f).fold(init, pick)
    };
    Ok(PointRecord {
        point: frame.point().to_vec(),
        h2: frame.h2(),
        sup_a: data.sup_a,
        bp_min: data.bp_min,
        k_min: fold(|s| s.k, f64::INFINITY, f64::min),
        k_max: fold(|s| s.k, f64::NEG_INFINITY, f64::max),
        min_bound_residual: fold(|s| s.bound_residual, f64::INFINITY, f64::min),
        max_bound_residual: fold(|s| s.bound_residual, f64::NEG_INFINITY, f64::max),
        min_torsion_margin: fold(|s| s.torsion_margin, f64::INFINITY, f64::min),
        samples,
    })
}

/// Samples `n_points` surface points and `n_dirs` directions per point (plus
/// the extremal one) and checks the curvature lower bound where it applies.
pub fn verify_main_theorem(
    f: &DefiningFunction,
    a: &AmbientMetric,
    n_points: usize,
    n_dirs: usize,
    seed: u64,
) -> Result<TheoremReport> {
    let frames = sample_surface(f, a, n_points, seed)?;
    verify_on_frames(&frames, a, n_dirs, seed)
}

pub fn verify_on_frames(
    frames: &[SurfaceFrame],
    a: &AmbientMetric,
    n_dirs: usize,
    seed: u64,
) -> Result<TheoremReport> {
    if frames.is_empty() {
        return Err(Error::Sampling("no surface points".into()));
    }
    let spread = hessian_spread(frames);
    let semi = frames
        .iter()
        .map(|fr| crate::webster3::semi_isometry_defect(fr, a))
        .fold(0.0, f64::max)
        <= HESSIAN_TOL;
    let mut flags = Vec::new();
    if spread > HESSIAN_TOL || !semi {
        flags.push(GATE_FLAG.to_string());
    }
    let records = frames
        .par_iter()
        .enumerate()
        .map(|(i, fr)| point_record(fr, a, n_dirs, i as u64, seed))
        .collect::<Result<Vec<_>>>()?;
    let fold = |f: fn(&PointRecord) -> f64, init: f64, pick: fn(f64, f64) -> f64| {
        records.iter().map(f).fold(init, pick)
    };
    let k_min = fold(|r| r.k_min, f64::INFINITY, f64::min);
    let k_max = fold(|r| r.k_max, f64::NEG_INFINITY, f64::max);
    let min_torsion_margin = fold(|r| r.min_torsion_margin, f64::INFINITY, f64::min);
    let min_bound_residual = fold(|r| r.min_bound_residual, f64::INFINITY, f64::min);
    let max_bound_residual = fold(|r| r.max_bound_residual, f64::NEG_INFINITY, f64::max);
    let c_convex = records.iter().all(PointRecord::bp_convex);
    let valid = flags.is_empty();
    let equivalence_disagreements = if valid {
        records
            .iter()
            .filter(|r| r.bp_convex() != r.torsion_convex())
            .count()
    } else {
        0
    };
    let theorem_holds =
        (valid && min_torsion_margin >= -VERDICT_TOL).then_some(min_bound_residual >= -BOUND_TOL);
    Ok(TheoremReport {
        records,
        hessian_spread: spread,
        semi_isometric: semi,
        flags,
        k_min,
        k_max,
        min_torsion_margin,
        min_bound_residual,
        max_bound_residual,
        c_convex,
        equivalence_disagreements,
        theorem_holds,
    })
}

/// Closed-form curvature tensor of the perturbed sphere in its coordinate
/// frame, built from the Levi matrix `levi` and the holomorphic Hessian
/// `hol` of the frame:
/// `R_{a bbar g sbar} = -hol_{ag} conj(hol_{bs}) / 2 + (h_{a bbar} h_{g sbar} + h_{a sbar} h_{g bbar}) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTensor {
    n: usize,
    levi: CMat,
    levi_inv: CMat,
    r: Vec<Complex64>,
    pub ricci: CMat,
    pub scalar: f64,
}

pub fn reference_tensor_e(levi: &CMat, hol: &CMat) -> Result<ReferenceTensor> {
    let n = levi.nrows();
    if hol.nrows() != n || hol.ncols() != n || levi.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: hol.nrows(),
        });
    }
    let levi_inv = levi
        .clone()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite)?;
    let mut r = vec![ZERO; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for g in 0..n {
                for s in 0..n {
                    let t1 = hol[(a, g)] * hol[(b, s)].conj();
                    let t2 = levi[(a, b)] * levi[(g, s)];
                    let t3 = levi[(a, s)] * levi[(g, b)];
                    r[((a * n + b) * n + g) * n + s] = -0.5 * t1 + 0.5 * (t2 + t3);
                }
            }
        }
    }
    // h^{g sbar} is the (s, g) entry of the inverse of h_{a bbar}
    let ricci = CMat::from_fn(n, n, |a, b| {
        let mut acc = ZERO;
        for g in 0..n {
            for s in 0..n {
                acc += levi_inv[(s, g)] * r[((a * n + b) * n + g) * n + s];
            }
        }
        acc
    });
    let mut scalar = ZERO;
    for a in 0..n {
        for b in 0..n {
            scalar += levi_inv[(b, a)] * ricci[(a, b)];
        }
    }
    Ok(ReferenceTensor {
        n,
        levi: levi.clone(),
        levi_inv,
        r,
        ricci,
        scalar: scalar.re,
    })
}

impl ReferenceTensor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize, g: usize, s: usize) -> Complex64 {
        self.r[((a * self.n + b) * self.n + g) * self.n + s]
    }

    /// `K(Z) = R(Z, Zbar, Z, Zbar) / (2 |Z|^4)`.
    pub fn k(&self, zeta: &[Complex64]) -> Result<f64> {
        let n2 = levi_norm2(&self.levi, zeta);
        if !(n2 > 0.0) {
            return Err(Error::ZeroDirection);
        }
        let n = self.n;
        let mut acc = ZERO;
        for a in 0..n {
            for b in 0..n {
                for g in 0..n {
                    for s in 0..n {
                        acc += self.get(a, b, g, s)
                            * zeta[a]
                            * zeta[b].conj()
                            * zeta[g]
                            * zeta[s].conj();
                    }
                }
            }
        }
        Ok(0.5 * acc.re / (n2 * n2))
    }

    /// Largest violation of `R_{a bbar g sbar} = R_{g bbar a sbar} = R_{a sbar g bbar}`
    /// and of `conj(R_{a bbar g sbar}) = R_{b abar s gbar}`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for g in 0..n {
                    for s in 0..n {
                        let v = self.get(a, b, g, s);
                        worst = worst
                            .max((v - self.get(g, b, a, s)).norm())
                            .max((v - self.get(a, s, g, b)).norm())
                            .max((v.conj() - self.get(b, a, s, g)).norm());
                    }
                }
            }
        }
        worst
    }

    /// Smallest eigenvalue of `h^{-1} Ricci`.
    pub fn ricci_min(&self) -> Result<f64> {
        let l = crate::linalg::cholesky(&self.levi)?;
        let linv = l.try_inverse().ok_or(Error::NotPositiveDefinite)?;
        let m = &linv * &self.ricci * linv.adjoint();
        let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(hermitian_eigenvalues(&m)[0])
    }

    pub fn levi_inverse(&self) -> &CMat {
        &self.levi_inv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// `lambda_1 >= min R / 2` (n = 1).
    HalfMinR,
    /// `lambda_1 >= min |H|^2 / 2` for C-convex constant-Hessian surfaces.
    HalfMinH2,
    /// `lambda_1 >= n kappa / (n + 1)` with `Ricci >= kappa h` (n >= 2).
    Ricci,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::HalfMinR => "half_min_R",
            BoundKind::HalfMinH2 => "half_min_H2",
            BoundKind::Ricci => "ricci",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lambda1Bound {
    pub kind: BoundKind,
    /// `Err(reason)` when the bound does not apply.
    pub value: std::result::Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lambda1Report {
    pub n: usize,
    pub samples: usize,
    pub lower_bounds: Vec<Lambda1Bound>,
    pub best_lower: Option<f64>,
    /// Sample mean of `1/|d rho|^2`, for `n = 1` and `rho_{j kbar} = delta`.
    pub upper: Option<f64>,
    /// Whether `1/|d rho|^2` is constant over the samples, so that the mean
    /// is exact.
    pub upper_exact: bool,
    pub c_convex: bool,
    pub constant_hessian: bool,
    pub identity_hessian: bool,
    /// `best_lower <= upper`, when both exist.
    pub consistent: Option<bool>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Lambda1Options {
    /// Use the closed-form perturbed-sphere tensor for R and Ricci.
    pub use_reference_tensor: bool,
}

pub fn lambda1_report(
    f: &DefiningFunction,
    a: &AmbientMetric,
    n_points: usize,
    seed: u64,
    opts: Lambda1Options,
) -> Result<Lambda1Report> {
    let frames = sample_surface(f, a, n_points, seed)?;
    let n = f.dim() - 1;
    let constant_hessian = hessian_spread(&frames) <= HESSIAN_TOL;
    let identity_defect = identity_defect(&frames);
    let identity_hessian = identity_defect <= HESSIAN_TOL;
    let bp: Vec<f64> = frames
        .par_iter()
        .map(crate::surface::behnke_peschl_min)
        .collect();
    let c_convex = bp.iter().all(|&b| b >= -VERDICT_TOL);
    let min_h2 = frames
        .iter()
        .map(SurfaceFrame::h2)
        .fold(f64::INFINITY, f64::min);

    let references = || -> Result<Vec<ReferenceTensor>> {
        frames
            .par_iter()
            .map(|fr| reference_tensor_e(fr.levi(), fr.hol()))
            .collect()
    };

    let mut lower_bounds = Vec::new();
    let half_min_r = if n != 1 {
        Err("needs n = 1".to_string())
    } else if opts.use_reference_tensor {
        references()
            .map(|rs| 0.5 * rs.iter().map(|r| r.scalar).fold(f64::INFINITY, f64::min))
            .map_err(|e| e.to_string())
    } else {
        frames
            .par_iter()
            .map(|fr| tw_direct(f, fr.point()).map(|s| s.r))
            .collect::<Result<Vec<f64>>>()
            .map(|rs| 0.5 * rs.into_iter().fold(f64::INFINITY, f64::min))
            .map_err(|e| e.to_string())
    };
    lower_bounds.push(Lambda1Bound {
        kind: BoundKind::HalfMinR,
        value: half_min_r,
    });
    let half_min_h2 = if !constant_hessian {
        Err(GATE_FLAG.to_string())
    } else if !c_convex {
        Err("not C-convex".to_string())
    } else {
        Ok(0.5 * min_h2)
    };
    lower_bounds.push(Lambda1Bound {
        kind: BoundKind::HalfMinH2,
        value: half_min_h2,
    });
    let ricci = if n < 2 {
        Err("needs n >= 2".to_string())
    } else if !opts.use_reference_tensor {
        Err("Ricci curvature unavailable".to_string())
    } else {
        references()
            .and_then(|rs| {
                rs.iter()
                    .map(ReferenceTensor::ricci_min)
                    .collect::<Result<Vec<f64>>>()
            })
            .map(|ks| n as f64 / (n as f64 + 1.0) * ks.into_iter().fold(f64::INFINITY, f64::min))
            .map_err(|e| e.to_string())
    };
    lower_bounds.push(Lambda1Bound {
        kind: BoundKind::Ricci,
        value: ricci,
    });

    let best_lower = lower_bounds
        .iter()
        .filter_map(|b| b.value.as_ref().ok().copied())
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |x| x.max(v)))
        });
    let (upper, upper_exact) = if identity_hessian && n == 1 {
        let inv: Vec<f64> = frames.iter().map(SurfaceFrame::h2).collect();
        let mean = inv.iter().sum::<f64>() / inv.len() as f64;
        let spread = inv.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
        (Some(mean), spread <= 1e-12 * mean.abs().max(1.0))
    } else {
        (None, false)
    };
    let consistent = match (best_lower, upper) {
        (Some(l), Some(u)) => Some(l <= u + BOUND_TOL),
        _ => None,
    };
    Ok(Lambda1Report {
        n,
        samples: frames.len(),
        lower_bounds,
        best_lower,
        upper,
        upper_exact,
        c_convex,
        constant_hessian,
        identity_hessian,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defn::builtin_family;
    use std::collections::BTreeMap;

    fn family(name: &str, params: &[(&str, f64)]) -> (DefiningFunction, AmbientMetric) {
        let p: BTreeMap<String, f64> = params.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        builtin_family(name, &p).unwrap()
    }

    #[test]
    fn sphere_has_unit_curvature() {
        for n in [1.0, 2.0] {
            let (f, a) = family("sphere", &[("n", n)]);
            let rep = verify_main_theorem(&f, &a, 30, 5, 1).unwrap();
            assert!((rep.k_min - 1.0).abs() < 1e-9 && (rep.k_max - 1.0).abs() < 1e-9);
            assert_eq!(rep.theorem_holds, Some(true));
            assert!(rep.flags.is_empty());
        }
    }

    #[test]
    fn example_e_n1_is_sharp() {
        let (f, a) = family("perturbed_sphere_E", &[("n", 1.0)]);
        let rep = verify_main_theorem(&f, &a, 40, 5, 2).unwrap();
        assert!((rep.k_min - 0.25).abs() < 1e-9 && (rep.k_max - 0.25).abs() < 1e-9);
        assert!(rep.min_bound_residual.abs() < 1e-9 && rep.max_bound_residual.abs() < 1e-9);
        assert_eq!(rep.theorem_holds, Some(true));
    }

    #[test]
    fn example_e_extremal_direction_is_sharp() {
        let (f, a) = family("perturbed_sphere_E", &[("n", 3.0)]);
        let rep = verify_main_theorem(&f, &a, 10, 5, 2).unwrap();
        for r in &rep.records {
            let extremal = r.samples.last().unwrap();
            assert!(extremal.bound_residual.abs() < 1e-9);
            assert!(extremal.torsion_margin.abs() < 1e-9);
        }
        assert!(rep.min_bound_residual >= -1e-9);
    }

    #[test]
    fn hartogs_trips_the_gate() {
        let (f, a) = family("hartogs", &[("t", 1.0)]);
        let rep = verify_main_theorem(&f, &a, 20, 3, 3).unwrap();
        assert!(!rep.gauss_path_valid());
        assert_eq!(rep.theorem_holds, None);
        assert_eq!(rep.equivalence_disagreements, 0);
    }

    #[test]
    fn scale_invariance_of_k() {
        let (f, a) = family(
            "ellipsoid",
            &[("a", 1.0), ("b", 2.0), ("c", 3.0), ("d", 4.0)],
        );
        let frames = sample_surface(&f, &a, 5, 4).unwrap();
        for fr in &frames {
            let data = PseudohermitianData::compute(fr, &a).unwrap();
            let z = vec![Complex64::new(0.3, -0.2)];
            let k1 = sectional_curvature(fr, &data.a, &z, 0.0).unwrap();
            let k2 =
                sectional_curvature(fr, &data.a, &[z[0] * Complex64::new(-2.0, 5.0)], 0.0).unwrap();
            assert!((k1 - k2).abs() < 1e-12);
            assert_eq!(
                sectional_curvature(fr, &data.a, &[ZERO], 0.0),
                Err(Error::ZeroDirection)
            );
        }
    }

    #[test]
    fn reference_tensor_scalar_curvature() {
        for n in 1..=3 {
            let (f, a) = family("perturbed_sphere_E", &[("n", n as f64)]);
            let fr = &sample_surface(&f, &a, 1, 5).unwrap()[0];
            let t = reference_tensor_e(fr.levi(), fr.hol()).unwrap();
            let nn = n as f64;
            assert!(
                (t.scalar - nn * nn / 2.0).abs() < 1e-9,
                "n={n} R={}",
                t.scalar
            );
            assert!(t.symmetry_defect() == 0.0);
            assert!((t.ricci_min().unwrap() - nn / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn lambda1_sphere_and_e() {
        let (f, a) = family("sphere", &[]);
        let rep = lambda1_report(&f, &a, 20, 1, Lambda1Options::default()).unwrap();
        assert!((rep.best_lower.unwrap() - 1.0).abs() < 1e-9);
        assert!((rep.upper.unwrap() - 1.0).abs() < 1e-9);
        assert!(rep.upper_exact);
        assert_eq!(rep.consistent, Some(true));

        let (f, a) = family("perturbed_sphere_E", &[]);
        let rep = lambda1_report(&f, &a, 20, 1, Lambda1Options::default()).unwrap();
        let r = rep.lower_bounds[0].value.clone().unwrap();
        let h = rep.lower_bounds[1].value.clone().unwrap();
        assert!((r - 0.25).abs() < 1e-9 && (h - 0.25).abs() < 1e-9);
        assert!((rep.upper.unwrap() - 0.5).abs() < 1e-12);
        assert!(rep.lower_bounds[2].value.is_err());
    }

    #[test]
    fn lambda1_ricci_route() {
        let (f, a) = family("perturbed_sphere_E", &[("n", 2.0)]);
        let opts = Lambda1Options {
            use_reference_tensor: true,
        };
        let rep = lambda1_report(&f, &a, 10, 1, opts).unwrap();
        let ricci = rep.lower_bounds[2].value.clone().unwrap();
        assert!((ricci - 2.0 / 3.0).abs() < 1e-9);
        assert!(rep.lower_bounds[0].value.is_err());
        assert_eq!(rep.upper, None);
        assert_eq!(rep.consistent, None);
    }
}
