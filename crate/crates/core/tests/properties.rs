use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;
use twlab::brieskorn::{
    ambient_sectional, link_sectional, sample_link, tangent_frame, BrieskornLink,
};
use twlab::gausscurv::sectional_curvature;
use twlab::linalg::{max_abs, CMat};
use twlab::secondform::{a_of, PseudohermitianData};
use twlab::surface::{behnke_peschl_min, frame_at, sample_surface};
use twlab::webster3::{structural_residual, tw_direct, tw_direct_with_gauge};
use twlab::wirtinger::jet3;
use twlab::{builtin_family, AmbientMetric, DefiningFunction};

fn family(name: &str, params: &[(&str, f64)]) -> (DefiningFunction, AmbientMetric) {
    let p: BTreeMap<String, f64> = params.iter().map(|&(k, v)| (k.to_string(), v)).collect();
    builtin_family(name, &p).unwrap()
}

fn cx() -> impl Strategy<Value = Complex64> {
    (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(a, b)| Complex64::new(a, b))
}

fn num() -> impl Strategy<Value = String> {
    prop_oneof![
        (-3.0f64..3.0).prop_map(|x| format!("{x:.3}")),
        (1u8..9).prop_map(|k| k.to_string()),
    ]
}

/// Complex-valued expressions in z1, z2.
fn complex_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("z1".to_string()),
        Just("z2".to_string()),
        Just("conj(z1)".to_string()),
        Just("conj(z2)".to_string()),
        (num(), num()).prop_map(|(a, b)| format!("({a}+{b}i)")),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}+{b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}*{b}")),
            (inner.clone(), 1u8..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.prop_map(|a| format!("-({a})")),
        ]
    })
}

/// Real-valued expressions built from real parts, moduli and real constants.
fn real_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        complex_expr().prop_map(|c| format!("re({c})")),
        complex_expr().prop_map(|c| format!("im({c})")),
        complex_expr().prop_map(|c| format!("abs2({c})")),
        num(),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}+{b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a})-({b})")),
        ]
    })
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

fn surface_point(
    f: &DefiningFunction,
    a: &AmbientMetric,
    seed: u64,
) -> twlab::surface::SurfaceFrame {
    sample_surface(f, a, 1, seed).unwrap().remove(0)
}

fn random_matrix(entries: &[Complex64], n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| entries[i * n + j])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_expressions_reparse_identically(text in real_expr()) {
        let f = DefiningFunction::parse(&text, 2).unwrap();
        let printed = f.expr().to_string();
        let g = DefiningFunction::parse(&printed, 2).unwrap();
        prop_assert_eq!(f.expr(), g.expr());
    }

    #[test]
    fn substitution_commutes_with_evaluation(
        a in 0.1f64..3.0, b in -2.0f64..2.0, c in 0.1f64..2.0, z1 in cx(), z2 in cx()
    ) {
        let params = BTreeMap::from([
            ("a".to_string(), Complex64::new(a, 0.0)),
            ("b".to_string(), Complex64::new(b, 0.0)),
            ("c".to_string(), Complex64::new(c, 0.0)),
        ]);
        let f = DefiningFunction::parse_with_params("a*abs2(z1)+abs2(z2)^2+re(b*z1^2*z2)-c", 2, params).unwrap();
        let z = [z1, z2];
        let bound = f.eval(&z).unwrap();
        let subst = f.substituted().eval(&z).unwrap();
        prop_assert!((bound - subst).abs() <= 1e-14 * bound.abs().max(1.0));
    }

    #[test]
    fn jets_follow_sum_and_leibniz_rules(fs in real_expr(), gs in real_expr(), z1 in cx(), z2 in cx()) {
        let f = DefiningFunction::parse(&fs, 2).unwrap();
        let g = DefiningFunction::parse(&gs, 2).unwrap();
        let sum = DefiningFunction::parse(&format!("({fs})+({gs})"), 2).unwrap();
        let prod = DefiningFunction::parse(&format!("({fs})*({gs})"), 2).unwrap();
        let z = [z1, z2];
        let (jf, jg, js, jp) = (jet3(&f, &z).unwrap(), jet3(&g, &z).unwrap(), jet3(&sum, &z).unwrap(), jet3(&prod, &z).unwrap());
        let (f0, g0) = (Complex64::new(jf.value(), 0.0), Complex64::new(jg.value(), 0.0));
        for j in 0..2 {
            prop_assert!(rel(js.d(j), jf.d(j) + jg.d(j)) < 1e-12);
            prop_assert!(rel(jp.d(j), jf.d(j) * g0 + f0 * jg.d(j)) < 1e-12);
            for k in 0..2 {
                prop_assert!(rel(js.mixed(j, k), jf.mixed(j, k) + jg.mixed(j, k)) < 1e-12);
                let leib = jf.mixed(j, k) * g0 + jf.d(j) * jg.dbar(k) + jf.dbar(k) * jg.d(j) + f0 * jg.mixed(j, k);
                prop_assert!(rel(jp.mixed(j, k), leib) < 1e-12);
                for l in 0..2 {
                    prop_assert!(rel(js.mixed3(j, k, l), jf.mixed3(j, k, l) + jg.mixed3(j, k, l)) < 1e-12);
                    let leib3 = jf.mixed3(j, k, l) * g0
                        + jf.hol2(j, k) * jg.dbar(l)
                        + jf.mixed(j, l) * jg.d(k)
                        + jf.mixed(k, l) * jg.d(j)
                        + jf.d(j) * jg.mixed(k, l)
                        + jf.d(k) * jg.mixed(j, l)
                        + jf.dbar(l) * jg.hol2(j, k)
                        + f0 * jg.mixed3(j, k, l);
                    prop_assert!(rel(jp.mixed3(j, k, l), leib3) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn conjugate_partials_are_exact_conjugates(fs in real_expr(), z1 in cx(), z2 in cx()) {
        let f = DefiningFunction::parse(&fs, 2).unwrap();
        let j = jet3(&f, &[z1, z2]).unwrap();
        for a in 0..2 {
            prop_assert_eq!(j.dbar(a), j.d(a).conj());
            for b in 0..2 {
                prop_assert_eq!(j.anti2(a, b), j.hol2(a, b).conj());
                prop_assert_eq!(j.mixed(a, b), j.mixed(b, a).conj());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn frame_change_leaves_invariants(seed in 0u64..100_000, u in proptest::collection::vec(cx(), 4)) {
        let (f, a) = family("ellipsoid", &[("a", 1.0), ("b", 2.0), ("c", 3.0), ("d", 4.0)]);
        let (f3, a3) = family("perturbed_sphere_E", &[("n", 2.0)]);
        let u = random_matrix(&u, 2);
        prop_assume!(u.determinant().norm() > 0.1);
        {
            let fr = surface_point(&f3, &a3, seed);
            let moved = fr.transformed(&u);
            prop_assert!((behnke_peschl_min(&fr) - behnke_peschl_min(&moved)).abs() < 1e-10);
            let d0 = PseudohermitianData::compute(&fr, &a3).unwrap();
            let d1 = PseudohermitianData::compute(&moved, &a3).unwrap();
            prop_assert!((d0.sup_a - d1.sup_a).abs() < 1e-10);
            prop_assert!(max_abs(&(&d1.a - d1.a.transpose())) < 1e-12);
        }
        {
            let fr = surface_point(&f, &a, seed);
            let d = PseudohermitianData::compute(&fr, &a).unwrap();
            prop_assert!(max_abs(&(&d.a - d.a.transpose())) < 1e-12);
        }
    }

    #[test]
    fn scaling_rho(seed in 0u64..100_000, c in 0.1f64..10.0, t in 0.0f64..1.0) {
        let (f, a) = family("hartogs", &[("t", t)]);
        let fs = f.scaled(c);
        {
            let fr = surface_point(&f, &a, seed);
            let frs = frame_at(&fs, &a, fr.point()).unwrap();
            prop_assert!((frs.drho2() - c * c * fr.drho2()).abs() < 1e-10 * frs.drho2());
            let (b1, bc) = (behnke_peschl_min(&fr), behnke_peschl_min(&frs));
            prop_assert!((bc - c * b1).abs() < 1e-10 * bc.abs().max(1.0));
            let s1 = tw_direct(&f, fr.point()).unwrap();
            let sc = tw_direct(&fs, fr.point()).unwrap();
            let (g1, gc) = (fr.drho2().sqrt(), frs.drho2().sqrt());
            prop_assert!((s1.r * g1 - sc.r * gc).abs() < 1e-8 * (s1.r * g1).abs().max(1.0));
            prop_assert!((s1.torsion_norm() * g1 - sc.torsion_norm() * gc).abs() < 1e-8);
        }
    }

    #[test]
    fn torsion_direction_homogeneity(seed in 0u64..100_000, z in cx(), c in cx()) {
        let (f, a) = family("ellipsoid", &[("alpha", 1.5), ("beta", 2.0), ("gamma", 0.3), ("sigma", 0.4)]);
        prop_assume!(z.norm() > 1e-3 && c.norm() > 1e-3);
        {
            let fr = surface_point(&f, &a, seed);
            let d = PseudohermitianData::compute(&fr, &a).unwrap();
            let a0 = a_of(fr.levi(), &d.a, &[z]).unwrap();
            let a1 = a_of(fr.levi(), &d.a, &[c * z]).unwrap();
            let expected = a0 * c * c / c.norm_sqr();
            prop_assert!((a1 - expected).norm() < 1e-12 * a0.norm().max(1.0));
            let k0 = sectional_curvature(&fr, &d.a, &[z], 0.0).unwrap();
            let k1 = sectional_curvature(&fr, &d.a, &[c * z], 0.0).unwrap();
            prop_assert!((k0 - k1).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_solver_gauge_and_residual(seed in 0u64..100_000, phi in 0.0f64..6.3, t in 0.0f64..1.0) {
        let (f, a) = family("hartogs", &[("t", t)]);
        {
            let fr = surface_point(&f, &a, seed);
            let s0 = tw_direct(&f, fr.point()).unwrap();
            prop_assert!(structural_residual(&s0) < 1e-7);
            prop_assert!(s0.r_imag.abs() < 1e-10);
            let gauge = DefiningFunction::from_expr(
                twlab::defn::Expr::Num(Complex64::from_polar(1.0, phi)),
                2,
                BTreeMap::new(),
            );
            let s1 = tw_direct_with_gauge(&f, fr.point(), Some(&gauge)).unwrap();
            prop_assert!((s0.r - s1.r).abs() < 1e-10);
            prop_assert!((s0.torsion_norm() - s1.torsion_norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn brieskorn_homogeneity_and_identity(seed in 0u64..1000, modulus in 0.2f64..1.3, arg in 0.0f64..6.3) {
        let link = BrieskornLink::new(&[2, 3, 5], 1.0).unwrap();
        let lambda = Complex64::from_polar(modulus, arg);
        for z in sample_link(&link, 2, seed).unwrap() {
            prop_assert!(link.homogeneity_defect(&z, lambda) < 1e-10);
            for w in tangent_frame(&link, &z).unwrap() {
                let k = link_sectional(&link, &z, &w).unwrap();
                let ka = ambient_sectional(&link, &z, &w).unwrap();
                prop_assert!(ka <= 1e-12);
                prop_assert!((k - 0.5 * ka - link.h2(&z)).abs() < 1e-10);
            }
        }
    }
}
