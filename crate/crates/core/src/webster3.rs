//! Direct Tanaka-Webster invariants of a real hypersurface in C^2 with
//! `theta = i dbar rho`, obtained from the structure equations
//!
//! ```text
//! d theta^1 = theta^1 ^ omega + A theta ^ theta^1bar
//! d h       = h (omega + conj(omega))
//! d omega   = R h theta^1 ^ theta^1bar   (mod theta)
//! ```
//!
//! Every field (frame, coframe, Levi scalar, connection coefficients) is
//! carried as a truncated Taylor series around the point, so exterior
//! derivatives are exact to roundoff. Fourth-order jets of rho are enough.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::defn::{AmbientMetric, DefiningFunction};
use crate::error::{Error, Result};
use crate::linalg::{I, ONE, ZERO};
use crate::sampling::complex_normal;
use crate::secondform::PseudohermitianData;
use crate::series::Series;
use crate::surface::{sample_surface, SurfaceFrame};

/// Default acceptance threshold for [`structural_residual`].
pub const RESIDUAL_TOL: f64 = 1e-7;
const SERIES_ORDER: usize = 4;

/// Vector field with components along `(d_z1, d_z2, d_zbar1, d_zbar2)`.
#[derive(Clone)]
struct Field(Vec<Series>);

/// 1-form with components along `(dz1, dz2, dzbar1, dzbar2)`.
#[derive(Clone)]
struct Form1(Vec<Series>);

/// 2-form `sum F_IJ dx^I (x) dx^J` with `F` antisymmetric.
struct Form2(Vec<Vec<Series>>);

fn swap_blocks<T: Clone>(v: &[T]) -> Vec<T> {
    let m = v.len() / 2;
    v[m..].iter().chain(&v[..m]).cloned().collect()
}

impl Field {
    fn conj(&self) -> Field {
        Field(swap_blocks(&self.0).iter().map(Series::conj).collect())
    }

    fn apply(&self, s: &Series) -> Series {
        let mut acc = &self.0[0] * &s.deriv(0);
        for i in 1..self.0.len() {
            acc = acc + &self.0[i] * &s.deriv(i);
        }
        acc
    }

    fn values(&self) -> Vec<Complex64> {
        self.0.iter().map(Series::value).collect()
    }
}

impl Form1 {
    fn conj(&self) -> Form1 {
        Form1(swap_blocks(&self.0).iter().map(Series::conj).collect())
    }

    fn scale(&self, c: &Series) -> Form1 {
        Form1(self.0.iter().map(|x| x * c).collect())
    }

    fn add(&self, other: &Form1) -> Form1 {
        Form1(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn d(&self) -> Form2 {
        let k = self.0.len();
        let derivs: Vec<Vec<Series>> = self
            .0
            .iter()
            .map(|c| (0..k).map(|i| c.deriv(i)).collect())
            .collect();
        // F_IJ = d_I alpha_J - d_J alpha_I
        Form2(
            (0..k)
                .map(|i| (0..k).map(|j| &derivs[j][i] - &derivs[i][j]).collect())
                .collect(),
        )
    }
}

impl Form2 {
    fn apply(&self, x: &Field, y: &Field) -> Series {
        let k = x.0.len();
        let mut acc: Option<Series> = None;
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let t = &(&self.0[i][j] * &x.0[i]) * &y.0[j];
                acc = Some(match acc {
                    None => t,
                    Some(a) => a + t,
                });
            }
        }
        acc.expect("at least two coordinates")
    }

    fn apply_at(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let k = x.len();
        let mut acc = ZERO;
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    acc += self.0[i][j].value() * x[i] * y[j];
                }
            }
        }
        acc
    }
}

fn form1_at(f: &Form1, x: &[Complex64]) -> Complex64 {
    f.0.iter().zip(x).map(|(a, v)| a.value() * v).sum()
}

/// Values at the point that the structural residual is re-evaluated from.
/// Vectors are indexed `[Z1, Z1bar, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTables {
    pub theta: [Complex64; 3],
    pub theta1: [Complex64; 3],
    pub theta1_bar: [Complex64; 3],
    pub omega: [Complex64; 3],
    pub omega_bar: [Complex64; 3],
    pub dh: [Complex64; 3],
    pub d_theta: [[Complex64; 3]; 3],
    pub d_theta1: [[Complex64; 3]; 3],
}

/// Tanaka-Webster data at one point of a 3-dimensional hypersurface.
#[derive(Debug, Clone, PartialEq)]
pub struct TW3State {
    pub point: Vec<Complex64>,
    /// Ambient coordinate playing the role of w.
    pub w: usize,
    /// Levi scalar h_{1 1bar} of the frame used.
    pub h: f64,
    /// omega = a theta^1 + b theta^1bar + c theta.
    pub omega: [Complex64; 3],
    /// A^1_{1bar}.
    pub torsion: Complex64,
    /// Tanaka-Webster scalar curvature.
    pub r: f64,
    /// Imaginary part of the extracted curvature (roundoff for a valid state).
    pub r_imag: f64,
    pub tables: StructureTables,
}

impl TW3State {
    /// `A_11 = h_{1 1bar} conj(A^1_{1bar})`.
    pub fn a11(&self) -> Complex64 {
        self.torsion.conj() * self.h
    }

    /// `|A_11| / h_{1 1bar}`, the value of `sup |A(Z)|`.
    pub fn torsion_norm(&self) -> f64 {
        self.torsion.norm()
    }

    /// Holomorphic sectional curvature `K = R / 2`.
    pub fn k(&self) -> f64 {
        0.5 * self.r
    }
}

/// Optional rescaling of the frame, `Z1 -> Z1 / lambda`, by a nonvanishing
/// complex function given as an expression in the coordinates.
pub type Gauge = DefiningFunction;

/// Solves the structure equations at `p`.
pub fn tw_direct(f: &DefiningFunction, p: &[Complex64]) -> Result<TW3State> {
    tw_direct_with_gauge(f, p, None)
}

pub fn tw_direct_with_gauge(
    f: &DefiningFunction,
    p: &[Complex64],
    gauge: Option<&Gauge>,
) -> Result<TW3State> {
    if f.dim() != 2 {
        return Err(Error::NotApplicable(format!(
            "direct solver needs a hypersurface in C^2, got C^{}",
            f.dim()
        )));
    }
    let rho = f.series(p, SERIES_ORDER)?;
    if rho.value().re.abs() > crate::surface::ON_SURFACE_TOL {
        return Err(Error::Domain(format!(
            "point is off the hypersurface (rho = {:e})",
            rho.value().re
        )));
    }
    let layout = rho.layout().clone();
    let m = 2;
    let d: Vec<Series> = (0..m).map(|j| rho.d_hol(j)).collect();
    let dbar: Vec<Series> = (0..m).map(|j| rho.d_anti(j)).collect();
    let grad = (d[0].value().norm_sqr() + d[1].value().norm_sqr()).sqrt();
    let w = if d[1].value().norm() >= d[0].value().norm() {
        1
    } else {
        0
    };
    let zi = 1 - w;
    if !(d[w].value().norm() > 1e-8 * grad) || grad == 0.0 {
        return Err(Error::ChartFailure(d[w].value().norm()));
    }
    let g: Vec<Vec<Series>> = (0..m)
        .map(|j| (0..m).map(|k| d[j].d_anti(k)).collect())
        .collect();
    let zero = Series::constant(&layout, ZERO);

    // Reeb field: sum_j g_{j kbar} s^j = rho_kbar, t = i s / (rho_k s^k)
    let det = &(&g[0][0] * &g[1][1]) - &(&g[1][0] * &g[0][1]);
    if det.value().norm() < 1e-14 {
        return Err(Error::NotPseudoconvex(det.value().re));
    }
    let s0 = (&(&dbar[0] * &g[1][1]) - &(&g[1][0] * &dbar[1])).div(&det)?;
    let s1 = (&(&g[0][0] * &dbar[1]) - &(&g[0][1] * &dbar[0])).div(&det)?;
    let norm = &(&d[0] * &s0) + &(&d[1] * &s1);
    if !(norm.value().re > 0.0) {
        return Err(Error::NotPseudoconvex(norm.value().re));
    }
    let tz = s0.scale(I).div(&norm)?;
    let tw = s1.scale(I).div(&norm)?;
    let t_field = Field(vec![tz.clone(), tw.clone(), tz.conj(), tw.conj()]);

    let lambda = match gauge {
        Some(gf) => gf.series(p, SERIES_ORDER)?,
        None => Series::constant(&layout, ONE),
    };
    if lambda.value().norm() == 0.0 {
        return Err(Error::Domain("gauge vanishes at the point".into()));
    }
    let inv_lambda = lambda.recip()?;
    let mut zc = vec![zero.clone(); 4];
    zc[zi] = &d[w] * &inv_lambda;
    zc[w] = -(&d[zi] * &inv_lambda);
    let z1 = Field(zc);
    let z1b = z1.conj();

    // theta = i dbar rho
    let mut th = vec![zero.clone(); 4];
    th[2] = dbar[0].scale(I);
    th[3] = dbar[1].scale(I);
    let theta = Form1(th);

    // theta^1 = lambda (dz - t^z theta) / rho_w
    let coef = lambda.div(&d[w])?;
    let t_z = if zi == 0 { &tz } else { &tw };
    let mut dz = vec![zero.clone(); 4];
    dz[zi] = Series::constant(&layout, ONE);
    let theta1 = Form1(dz).add(&theta.scale(&-t_z)).scale(&coef);
    let theta1_bar = theta1.conj();

    // Levi scalar h = g(Z1, Z1bar)
    let mut h = zero.clone();
    for j in 0..m {
        for k in 0..m {
            h = h + &(&g[j][k] * &z1.0[j]) * &z1b.0[m + k];
        }
    }
    let hv = h.value();
    if !(hv.re > 0.0) {
        return Err(Error::NotPseudoconvex(hv.re));
    }

    let dtheta1 = theta1.d();
    let b = dtheta1.apply(&z1, &z1b);
    let c = -dtheta1.apply(&t_field, &z1);
    let a_torsion = dtheta1.apply(&t_field, &z1b);
    let a = &z1.apply(&h).div(&h)? - &b.conj();
    let omega = theta1
        .scale(&a)
        .add(&theta1_bar.scale(&b))
        .add(&theta.scale(&c));
    let omega_bar = omega.conj();

    let vz = z1.values();
    let vzb = z1b.values();
    let vt = t_field.values();
    let r11 = omega.d().apply_at(&vz, &vzb);
    let r = r11 / hv.re;

    let vecs = [vz.as_slice(), vzb.as_slice(), vt.as_slice()];
    let dtheta = theta.d();
    let hfield = [
        z1.apply(&h).value(),
        z1b.apply(&h).value(),
        t_field.apply(&h).value(),
    ];
    let eval1 = |form: &Form1| {
        [
            form1_at(form, vecs[0]),
            form1_at(form, vecs[1]),
            form1_at(form, vecs[2]),
        ]
    };
    let eval2 = |form: &Form2| {
        let mut out = [[ZERO; 3]; 3];
        for x in 0..3 {
            for y in 0..3 {
                out[x][y] = form.apply_at(vecs[x], vecs[y]);
            }
        }
        out
    };
    let tables = StructureTables {
        theta: eval1(&theta),
        theta1: eval1(&theta1),
        theta1_bar: eval1(&theta1_bar),
        omega: eval1(&omega),
        omega_bar: eval1(&omega_bar),
        dh: hfield,
        d_theta: eval2(&dtheta),
        d_theta1: eval2(&dtheta1),
    };
    let state = TW3State {
        point: p.to_vec(),
        w,
        h: hv.re,
        omega: [a.value(), b.value(), c.value()],
        torsion: a_torsion.value(),
        r: r.re,
        r_imag: r.im,
        tables,
    };
    if !(state.r.is_finite() && state.torsion.norm().is_finite()) {
        return Err(Error::Overflow("non-finite curvature".into()));
    }
    Ok(state)
}

/// Largest violation of the structure equations on the frame
/// `{Z1, Z1bar, T}`, re-evaluated from the contracted forms:
/// `d theta^1 - theta^1 ^ omega - A theta ^ theta^1bar` on all pairs,
/// `dh - h (omega + conj omega)` on all vectors and
/// `d theta - i h theta^1 ^ theta^1bar` on all pairs.
pub fn structural_residual(state: &TW3State) -> f64 {
    let t = &state.tables;
    let h = Complex64::new(state.h, 0.0);
    let wedge =
        |a: &[Complex64; 3], b: &[Complex64; 3], x: usize, y: usize| a[x] * b[y] - a[y] * b[x];
    let mut worst = 0.0f64;
    for x in 0..3 {
        for y in 0..3 {
            let e1 = t.d_theta1[x][y]
                - wedge(&t.theta1, &t.omega, x, y)
                - state.torsion * wedge(&t.theta, &t.theta1_bar, x, y);
            let e3 = t.d_theta[x][y] - I * h * wedge(&t.theta1, &t.theta1_bar, x, y);
            worst = worst.max(e1.norm()).max(e3.norm());
        }
        let e2 = t.dh[x] - h * (t.omega[x] + t.omega_bar[x]);
        worst = worst.max(e2.norm());
    }
    worst
}

/// Solves the same structure equations at the point as a real least-squares
/// problem in `(a, b, c, A)`; returns the solution and its residual norm.
pub fn point_least_squares(state: &TW3State) -> ([Complex64; 4], f64) {
    let t = &state.tables;
    let h = state.h;
    // unknown vector (Re a, Im a, Re b, Im b, Re c, Im c, Re A, Im A); each complex
    // equation contributes two rows
    let mut rows: Vec<([Complex64; 4], [Complex64; 4], Complex64)> = Vec::new();
    // d theta^1 (Z1, Z1bar) = b
    rows.push(([ZERO, ONE, ZERO, ZERO], [ZERO; 4], t.d_theta1[0][1]));
    // d theta^1 (T, Z1) = -c
    rows.push(([ZERO, ZERO, -ONE, ZERO], [ZERO; 4], t.d_theta1[2][0]));
    // d theta^1 (T, Z1bar) = A
    rows.push(([ZERO, ZERO, ZERO, ONE], [ZERO; 4], t.d_theta1[2][1]));
    // dh(Z1) = h a + h conj(b)
    rows.push((
        [ONE * h, ZERO, ZERO, ZERO],
        [ZERO, ONE * h, ZERO, ZERO],
        t.dh[0],
    ));
    // dh(Z1bar) = h b + h conj(a)
    rows.push((
        [ZERO, ONE * h, ZERO, ZERO],
        [ONE * h, ZERO, ZERO, ZERO],
        t.dh[1],
    ));
    // dh(T) = h c + h conj(c)
    rows.push((
        [ZERO, ZERO, ONE * h, ZERO],
        [ZERO, ZERO, ONE * h, ZERO],
        t.dh[2],
    ));
    let mut mat = DMatrix::<f64>::zeros(2 * rows.len(), 8);
    let mut rhs = DVector::<f64>::zeros(2 * rows.len());
    for (r, (lin, anti, v)) in rows.iter().enumerate() {
        for k in 0..4 {
            // lin * (x + iy) + anti * (x - iy)
            let cx = lin[k] + anti[k];
            let cy = (lin[k] - anti[k]) * I;
            mat[(2 * r, 2 * k)] = cx.re;
            mat[(2 * r, 2 * k + 1)] = cy.re;
            mat[(2 * r + 1, 2 * k)] = cx.im;
            mat[(2 * r + 1, 2 * k + 1)] = cy.im;
        }
        rhs[2 * r] = v.re;
        rhs[2 * r + 1] = v.im;
    }
    let svd = mat.clone().svd(true, true);
    let x = svd.solve(&rhs, 1e-14).expect("SVD with both factors");
    let res = (&mat * &x - &rhs).norm();
    let sol = [
        Complex64::new(x[0], x[1]),
        Complex64::new(x[2], x[3]),
        Complex64::new(x[4], x[5]),
        Complex64::new(x[6], x[7]),
    ];
    (sol, res)
}

/// `R |Z|^2 + C0 Tor(Z, Z)` with `|Z|^2 = h |zeta|^2` and
/// `Tor(Z, Z) = 2 Re(i A_11 zeta^2)`.
pub fn c0_form(state: &TW3State, zeta: Complex64, c0: f64) -> Result<f64> {
    if zeta.norm() == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let tor = 2.0 * (I * state.a11() * zeta * zeta).re;
    Ok(state.r * state.h * zeta.norm_sqr() + c0 * tor)
}

/// Minimum of the C0-form over `h`-unit directions: `R - 2 C0 |A_11| / h`.
pub fn c0_min(state: &TW3State, c0: f64) -> f64 {
    state.r - 2.0 * c0.abs() * state.torsion_norm()
}

/// Result of comparing the direct solver with the Gauss identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub samples: usize,
    /// max |R_direct - 2 K_gauss|
    pub max_discrepancy: f64,
    /// max | |A_11|/h - sup|A(Z)| |
    pub max_torsion_discrepancy: f64,
    pub max_structural_residual: f64,
}

/// Maximum absolute deviation between `rho_{j kbar}` at the frame point and
/// the ambient metric.
pub fn semi_isometry_defect(frame: &SurfaceFrame, a: &AmbientMetric) -> f64 {
    let m = frame.jet().dim();
    let mut worst = 0.0f64;
    for j in 0..m {
        for k in 0..m {
            worst = worst.max((frame.jet().mixed(j, k) - a.matrix()[(j, k)]).norm());
        }
    }
    worst
}

/// Gauss-path curvature for n = 1: `K = |H|^2 - |A|^2 / (2 |H|^2)`.
pub fn gauss_k(frame: &SurfaceFrame, a: &AmbientMetric) -> Result<(f64, f64)> {
    let data = PseudohermitianData::compute(frame, a)?;
    let h2 = frame.h2();
    Ok((h2 - 0.5 * data.sup_a * data.sup_a / h2, data.sup_a))
}

/// Compares `R_direct` with `2 K_gauss` at `n_points` samples.
pub fn cross_validate(
    f: &DefiningFunction,
    a: &AmbientMetric,
    n_points: usize,
    seed: u64,
) -> Result<CrossValidation> {
    if f.dim() != 2 {
        return Err(Error::NotApplicable("cross validation needs n = 1".into()));
    }
    let frames = sample_surface(f, a, n_points, seed)?;
    let defect = frames
        .iter()
        .map(|fr| semi_isometry_defect(fr, a))
        .fold(0.0, f64::max);
    if defect > crate::gausscurv::HESSIAN_TOL {
        return Err(Error::HypothesisViolated(format!(
            "semi-isometry violated: max |rho_(j kbar) - a_(j kbar)| = {defect:e}"
        )));
    }
    let rows: Vec<Result<(f64, f64, f64)>> = frames
        .par_iter()
        .map(|fr| {
            let st = tw_direct(f, fr.point())?;
            let (k, sup_a) = gauss_k(fr, a)?;
            Ok((
                (st.r - 2.0 * k).abs(),
                (st.torsion_norm() - sup_a).abs(),
                structural_residual(&st),
            ))
        })
        .collect();
    let mut out = CrossValidation {
        samples: frames.len(),
        max_discrepancy: 0.0,
        max_torsion_discrepancy: 0.0,
        max_structural_residual: 0.0,
    };
    for r in rows {
        let (d, t, s) = r?;
        out.max_discrepancy = out.max_discrepancy.max(d);
        out.max_torsion_discrepancy = out.max_torsion_discrepancy.max(t);
        out.max_structural_residual = out.max_structural_residual.max(s);
    }
    Ok(out)
}

/// Minimum of `c0_form` over `count` random unit directions plus the
/// extremal one.
pub fn c0_sampled_min<R: rand::Rng>(state: &TW3State, c0: f64, count: usize, rng: &mut R) -> f64 {
    let norm = state.h.sqrt();
    let mut best = f64::INFINITY;
    for _ in 0..count {
        let z = complex_normal(rng);
        if z.norm() == 0.0 {
            continue;
        }
        let z = z / (z.norm() * norm);
        best = best.min(c0_form(state, z, c0).unwrap_or(f64::INFINITY));
    }
    // i A_11 zeta^2 = -|A_11| for zeta^2 = i conj(A_11)/|A_11| (times 1/h)
    if state.a11().norm() > 0.0 && c0 != 0.0 {
        let target = I * state.a11().conj() / state.a11().norm() * c0.signum();
        let z = target.sqrt() / norm;
        best = best.min(c0_form(state, z, c0).unwrap_or(f64::INFINITY));
    }
    best
}
