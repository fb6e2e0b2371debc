//! Wirtinger jets of a defining function up to order three, and a finite
//! difference oracle for them.

use num_complex::Complex64;

use crate::defn::DefiningFunction;
use crate::error::{Error, Result};
use crate::linalg::ZERO;
use crate::series::Series;

/// All Wirtinger partials of rho at a point up to total order 3.
///
/// Only one representative of each conjugate pair is stored; the others are
/// recovered by conjugation, so `rho_jbar == conj(rho_j)` holds bitwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet3 {
    z: Vec<Complex64>,
    value: f64,
    d1: Vec<Complex64>,
    hol2: Vec<Complex64>,
    mix2: Vec<Complex64>,
    hol3: Vec<Complex64>,
    mix3: Vec<Complex64>,
}

impl Jet3 {
    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn point(&self) -> &[Complex64] {
        &self.z
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// rho_j
    pub fn d(&self, j: usize) -> Complex64 {
        self.d1[j]
    }

    /// rho_jbar
    pub fn dbar(&self, j: usize) -> Complex64 {
        self.d1[j].conj()
    }

    /// rho_jk
    pub fn hol2(&self, j: usize, k: usize) -> Complex64 {
        self.hol2[j * self.dim() + k]
    }

    /// rho_{j kbar}
    pub fn mixed(&self, j: usize, k: usize) -> Complex64 {
        self.mix2[j * self.dim() + k]
    }

    /// rho_{jbar kbar}
    pub fn anti2(&self, j: usize, k: usize) -> Complex64 {
        self.hol2(j, k).conj()
    }

    /// rho_jkl
    pub fn hol3(&self, j: usize, k: usize, l: usize) -> Complex64 {
        let m = self.dim();
        self.hol3[(j * m + k) * m + l]
    }

    /// rho_{jk lbar}
    pub fn mixed3(&self, j: usize, k: usize, l: usize) -> Complex64 {
        let m = self.dim();
        self.mix3[(j * m + k) * m + l]
    }

    /// rho_{j kbar lbar} = conj(rho_{kl jbar})
    pub fn mixed3_bar(&self, j: usize, k: usize, l: usize) -> Complex64 {
        self.mixed3(k, l, j).conj()
    }

    /// rho_{jbar kbar lbar}
    pub fn anti3(&self, j: usize, k: usize, l: usize) -> Complex64 {
        self.hol3(j, k, l).conj()
    }

    /// Generic accessor: `hol` lists holomorphic indices, `anti`
    /// antiholomorphic ones, total length at most 3.
    pub fn partial(&self, hol: &[usize], anti: &[usize]) -> Complex64 {
        match (hol, anti) {
            ([], []) => Complex64::new(self.value, 0.0),
            ([j], []) => self.d(*j),
            ([], [j]) => self.dbar(*j),
            ([j, k], []) => self.hol2(*j, *k),
            ([j], [k]) => self.mixed(*j, *k),
            ([], [j, k]) => self.anti2(*j, *k),
            ([j, k, l], []) => self.hol3(*j, *k, *l),
            ([j, k], [l]) => self.mixed3(*j, *k, *l),
            ([j], [k, l]) => self.mixed3_bar(*j, *k, *l),
            ([], [j, k, l]) => self.anti3(*j, *k, *l),
            _ => panic!("jet order above 3"),
        }
    }

    /// Builds the jet from an order-3 expansion, symmetrizing like-type
    /// indices and the Hermitian pair.
    pub fn from_series(s: &Series) -> Jet3 {
        let m = s.layout().dim();
        let mut e = vec![0u8; 2 * m];
        let mut p = |hol: &[usize], anti: &[usize]| {
            e.iter_mut().for_each(|x| *x = 0);
            hol.iter().for_each(|&j| e[j] += 1);
            anti.iter().for_each(|&j| e[m + j] += 1);
            s.partial(&e)
        };
        let z: Vec<Complex64> = (0..m).map(|_| ZERO).collect();
        let value = p(&[], &[]).re;
        let d1: Vec<Complex64> = (0..m).map(|j| p(&[j], &[])).collect();
        let mut hol2 = vec![ZERO; m * m];
        let mut mix2 = vec![ZERO; m * m];
        let mut hol3 = vec![ZERO; m * m * m];
        let mut mix3 = vec![ZERO; m * m * m];
        for j in 0..m {
            for k in 0..m {
                hol2[j * m + k] = p(&[j, k], &[]);
                mix2[j * m + k] = p(&[j], &[k]);
                for l in 0..m {
                    hol3[(j * m + k) * m + l] = p(&[j, k, l], &[]);
                    mix3[(j * m + k) * m + l] = p(&[j, k], &[l]);
                }
            }
        }
        // the series products are already symmetric up to roundoff; make the
        // Hermitian pair exact
        for j in 0..m {
            for k in j..m {
                let h = 0.5 * (mix2[j * m + k] + mix2[k * m + j].conj());
                mix2[j * m + k] = h;
                mix2[k * m + j] = h.conj();
            }
            mix2[j * m + j].im = 0.0;
        }
        Jet3 {
            z,
            value,
            d1,
            hol2,
            mix2,
            hol3,
            mix3,
        }
    }
}

/// Wirtinger 3-jet of `f` at `z`.
pub fn jet3(f: &DefiningFunction, z: &[Complex64]) -> Result<Jet3> {
    let s = f.series(z, 3)?;
    let mut j = Jet3::from_series(&s);
    j.z = z.to_vec();
    Ok(j)
}

/// Step sizes of the finite-difference oracle for derivative orders 1..=3.
pub const FD_STEPS: [f64; 3] = [1e-3, 1e-3, 5e-3];

/// Multi-indices (holomorphic, antiholomorphic) of total order 1..=3.
pub fn multi_indices(m: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for order in 1..=3usize {
        for nh in 0..=order {
            let hs = nondecreasing(m, nh);
            let as_ = nondecreasing(m, order - nh);
            for h in &hs {
                for a in &as_ {
                    out.push((h.clone(), a.clone()));
                }
            }
        }
    }
    out
}

fn nondecreasing(m: usize, len: usize) -> Vec<Vec<usize>> {
    fn go(m: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for j in start..m {
            cur.push(j);
            go(m, len, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(m, len, 0, &mut Vec::new(), &mut out);
    out
}

/// Central-difference estimate of a Wirtinger partial with two Richardson
/// levels. Each Wirtinger derivative is `(d_x -+ i d_y)/2`, so the mixed
/// partial is a sum over real directional derivatives.
pub fn fd_partial(
    f: &DefiningFunction,
    z: &[Complex64],
    hol: &[usize],
    anti: &[usize],
) -> Result<Complex64> {
    let slots: Vec<(usize, f64)> = hol
        .iter()
        .map(|&j| (j, -1.0))
        .chain(anti.iter().map(|&j| (j, 1.0)))
        .collect();
    let k = slots.len();
    if k == 0 {
        return Ok(Complex64::new(f.eval(z)?, 0.0));
    }
    let h = FD_STEPS[k - 1];
    let d1 = fd_wirtinger(f, z, &slots, h)?;
    let d2 = fd_wirtinger(f, z, &slots, h / 2.0)?;
    let d4 = fd_wirtinger(f, z, &slots, h / 4.0)?;
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d4 - d2) / 3.0;
    Ok((16.0 * r2 - r1) / 15.0)
}

fn fd_wirtinger(
    f: &DefiningFunction,
    z: &[Complex64],
    slots: &[(usize, f64)],
    h: f64,
) -> Result<Complex64> {
    let k = slots.len();
    let mut total = ZERO;
    // choose the real (bit 0) or imaginary (bit 1) axis for every slot
    for axes in 0..(1u32 << k) {
        let mut weight = Complex64::new(0.5f64.powi(k as i32), 0.0);
        let mut dirs = Vec::with_capacity(k);
        for (s, &(j, sign)) in slots.iter().enumerate() {
            if axes >> s & 1 == 1 {
                weight *= Complex64::new(0.0, sign);
                dirs.push((j, Complex64::new(0.0, 1.0)));
            } else {
                dirs.push((j, Complex64::new(1.0, 0.0)));
            }
        }
        total += weight * fd_directional(f, z, &dirs, h)?;
    }
    Ok(total)
}

fn fd_directional(
    f: &DefiningFunction,
    z: &[Complex64],
    dirs: &[(usize, Complex64)],
    h: f64,
) -> Result<f64> {
    let k = dirs.len();
    let mut acc = 0.0;
    let mut x = z.to_vec();
    for signs in 0..(1u32 << k) {
        x.copy_from_slice(z);
        let mut parity = 1.0;
        for (s, &(j, v)) in dirs.iter().enumerate() {
            let sg = if signs >> s & 1 == 1 { -1.0 } else { 1.0 };
            parity *= sg;
            x[j] += v * (sg * h);
        }
        acc += parity * f.eval(&x)?;
    }
    Ok(acc / (2.0 * h).powi(k as i32))
}

/// Maximum relative discrepancy `|jet - fd| / max(1, |jet|)` over every
/// partial of order 1..=3.
pub fn fd_residual(f: &DefiningFunction, z: &[Complex64]) -> Result<f64> {
    let jet = jet3(f, z)?;
    let mut worst = 0.0f64;
    for (hol, anti) in multi_indices(f.dim()) {
        let exact = jet.partial(&hol, &anti);
        let approx = fd_partial(f, z, &hol, &anti)?;
        worst = worst.max((exact - approx).norm() / exact.norm().max(1.0));
    }
    if !worst.is_finite() {
        return Err(Error::Overflow(
            "finite-difference residual is not finite".into(),
        ));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defn::builtin_family;
    use std::collections::BTreeMap;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sphere_jet_at_pole() {
        let (f, _) = builtin_family("sphere", &BTreeMap::new()).unwrap();
        let j = jet3(&f, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(j.value(), 0.0);
        assert_eq!(j.d(0), c(1.0, 0.0));
        assert_eq!(j.mixed(0, 0), c(1.0, 0.0));
        assert_eq!(j.mixed(0, 1), ZERO);
        for (h, a) in multi_indices(2) {
            if h.len() + a.len() == 3 || (h.len() + a.len() == 2 && (h.is_empty() || a.is_empty()))
            {
                assert_eq!(j.partial(&h, &a), ZERO);
            }
        }
    }

    #[test]
    fn perturbed_sphere_second_partials() {
        let mut p = BTreeMap::new();
        p.insert("n".to_string(), 2.0);
        let (f, _) = builtin_family("perturbed_sphere_E", &p).unwrap();
        let j = jet3(&f, &[c(0.3, -0.1), c(0.2, 0.5), c(-0.4, 0.0)]).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let delta = if a == b { 1.0 } else { 0.0 };
                assert!((j.hol2(a, b) - delta).norm() < 1e-15);
                assert!((j.mixed(a, b) - delta).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn hartogs_levi_entry() {
        let mut p = BTreeMap::new();
        p.insert("t".to_string(), 0.7);
        let (f, _) = builtin_family("hartogs", &p).unwrap();
        let z = [c(0.3, 0.0), c(0.8, 0.0)];
        let j = jet3(&f, &z).unwrap();
        // rho = |z|^2 + t Re(z^2)^2 + ...; at real z, rho_{z zbar} = 1 + 2 t |z|^2
        assert!((j.mixed(0, 0) - c(1.0 + 0.18 * 0.7, 0.0)).norm() < 1e-14);
        assert!(fd_residual(&f, &z).unwrap() < 1e-6);
    }

    #[test]
    fn index_counts() {
        // orders 1..=3 over 2m variables: 4 + 10 + 20 for m = 2
        assert_eq!(multi_indices(2).len(), 34);
    }

    #[test]
    fn fd_oracle_detects_wrong_jet() {
        let f = DefiningFunction::parse("abs2(z1)^2+re(z2^3)", 2).unwrap();
        let z = [c(0.4, 0.3), c(-0.2, 0.6)];
        let est = fd_partial(&f, &z, &[0, 0], &[0]).unwrap();
        // d^2/dz^2 dbar of (z zbar)^2 = 4 zbar
        assert!((est - 4.0 * z[0].conj()).norm() < 1e-8);
        let est = fd_partial(&f, &z, &[1, 1], &[]).unwrap();
        // Re(w^3) = (w^3 + wbar^3)/2 -> 3 w
        assert!((est - 3.0 * z[1]).norm() < 1e-8);
    }
}
