use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::{AmbientMetric, DefiningFunction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Sphere,
    Ellipsoid,
    PerturbedSphereE,
    Hartogs,
    Reinhardt,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Sphere,
        Family::Ellipsoid,
        Family::PerturbedSphereE,
        Family::Hartogs,
        Family::Reinhardt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Sphere => "sphere",
            Family::Ellipsoid => "ellipsoid",
            Family::PerturbedSphereE => "perturbed_sphere_E",
            Family::Hartogs => "hartogs",
            Family::Reinhardt => "reinhardt",
        }
    }

    /// Parameters the family accepts (the first listed is the sweep default).
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            Family::Sphere | Family::PerturbedSphereE => &["n"],
            Family::Ellipsoid => &["alpha", "beta", "gamma", "sigma", "a", "b", "c", "d"],
            Family::Hartogs => &["t"],
            Family::Reinhardt => &["eps"],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Family> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

fn get(params: &BTreeMap<String, f64>, name: &str) -> Result<f64> {
    let v = *params.get(name).ok_or_else(|| Error::InvalidParameter {
        name: name.into(),
        reason: "missing".into(),
    })?;
    if !v.is_finite() {
        return Err(Error::InvalidParameter {
            name: name.into(),
            reason: "not finite".into(),
        });
    }
    Ok(v)
}

fn cr_dim(params: &BTreeMap<String, f64>) -> Result<usize> {
    let n = params.get("n").copied().unwrap_or(1.0);
    if !(1.0..=8.0).contains(&n) || n.fract() != 0.0 {
        return Err(Error::InvalidParameter {
            name: "n".into(),
            reason: format!("must be an integer in 1..=8, got {n}"),
        });
    }
    Ok(n as usize)
}

fn check_unknown(family: Family, params: &BTreeMap<String, f64>) -> Result<()> {
    for k in params.keys() {
        if !family.parameter_names().contains(&k.as_str()) {
            return Err(Error::InvalidParameter {
                name: k.clone(),
                reason: format!("not a parameter of {family}"),
            });
        }
    }
    Ok(())
}

fn real_bindings(pairs: &[(&str, f64)]) -> BTreeMap<String, Complex64> {
    pairs
        .iter()
        .map(|&(k, v)| (k.to_string(), Complex64::new(v, 0.0)))
        .collect()
}

/// Ellipsoid `a x^2 + b y^2 + c u^2 + d v^2 = 1` in the (alpha, beta, gamma, sigma) form.
pub fn ellipsoid_from_axes(a: f64, b: f64, c: f64, d: f64) -> [f64; 4] {
    [(a + b) / 2.0, (c + d) / 2.0, (a - b) / 2.0, (c - d) / 2.0]
}

/// Defining function and flat ambient metric of a built-in family.
///
/// `n` is the CR dimension for the families that generalize (sphere,
/// perturbed_sphere_E); the ambient space is C^{n+1}. The remaining families
/// live in C^2. The Reinhardt family is normalized by 1/eps^2 so that
/// `i dbar rho` is the structure locally equivalent to example E.
pub fn builtin_family(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<(DefiningFunction, AmbientMetric)> {
    let family: Family = name.parse()?;
    check_unknown(family, params)?;
    match family {
        Family::Sphere => {
            let m = cr_dim(params)? + 1;
            let text = (1..=m)
                .map(|j| format!("abs2(z{j})"))
                .collect::<Vec<_>>()
                .join("+")
                + "-1";
            Ok((
                DefiningFunction::parse(&text, m)?,
                AmbientMetric::identity(m),
            ))
        }
        Family::PerturbedSphereE => {
            let m = cr_dim(params)? + 1;
            let herm = (1..=m)
                .map(|j| format!("abs2(z{j})"))
                .collect::<Vec<_>>()
                .join("+");
            let hol = (1..=m)
                .map(|j| format!("z{j}^2"))
                .collect::<Vec<_>>()
                .join("+");
            let text = format!("{herm}+re({hol})-1");
            Ok((
                DefiningFunction::parse(&text, m)?,
                AmbientMetric::identity(m),
            ))
        }
        Family::Ellipsoid => {
            let [alpha, beta, gamma, sigma] =
                if params.contains_key("a") || params.contains_key("b") {
                    ellipsoid_from_axes(
                        get(params, "a")?,
                        get(params, "b")?,
                        get(params, "c")?,
                        get(params, "d")?,
                    )
                } else {
                    [
                        get(params, "alpha")?,
                        get(params, "beta")?,
                        get(params, "gamma")?,
                        get(params, "sigma")?,
                    ]
                };
            if alpha <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "alpha".into(),
                    reason: format!("must be positive, got {alpha}"),
                });
            }
            if beta <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "beta".into(),
                    reason: format!("must be positive, got {beta}"),
                });
            }
            if gamma.abs() >= alpha {
                return Err(Error::InvalidParameter {
                    name: "gamma".into(),
                    reason: "|gamma| < alpha required for an ellipsoid".into(),
                });
            }
            if sigma.abs() >= beta {
                return Err(Error::InvalidParameter {
                    name: "sigma".into(),
                    reason: "|sigma| < beta required for an ellipsoid".into(),
                });
            }
            let f = DefiningFunction::parse_with_params(
                "alpha*abs2(z1)+beta*abs2(z2)+re(gamma*z1^2+sigma*z2^2)-1",
                2,
                real_bindings(&[
                    ("alpha", alpha),
                    ("beta", beta),
                    ("gamma", gamma),
                    ("sigma", sigma),
                ]),
            )?;
            Ok((f, AmbientMetric::diagonal(&[alpha, beta])?))
        }
        Family::Hartogs => {
            let t = get(params, "t")?;
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidParameter {
                    name: "t".into(),
                    reason: format!("must lie in [0, 1], got {t}"),
                });
            }
            let f = DefiningFunction::parse_with_params(
                "-1+abs2(z1)+abs2(z2)+t*re(z1^2)^2",
                2,
                real_bindings(&[("t", t)]),
            )?;
            Ok((f, AmbientMetric::identity(2)))
        }
        Family::Reinhardt => {
            let eps = get(params, "eps")?;
            if eps <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "eps".into(),
                    reason: format!("must be positive, got {eps}"),
                });
            }
            // (log|z|)^2 = (log|z|^2)^2 / 4
            let f = DefiningFunction::parse_with_params(
                "(0.25*log(abs2(z1))^2+0.25*log(abs2(z2))^2)/eps^2-1",
                2,
                real_bindings(&[("eps", eps)]),
            )?;
            Ok((f, AmbientMetric::identity(2)))
        }
    }
}
