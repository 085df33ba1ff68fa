//! The four ratio-type estimator families.
//!
//! Every family has the form `t = ȳ · h(p / P)` with a shape function `h`
//! satisfying `h(1) = 1`. Writing `u = 1 + e1`, the Taylor coefficients
//! `h_j` of `h` at `u = 1` drive all bias and MSE approximations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Estimator family, without its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `(1 − α)ȳ + αȳP/p`
    Chakrabarty,
    /// `ȳ [P / (βp + (1 − β)P)]^g`
    KhoshnevisanRatio,
    /// `ȳ [2 − (p/P)^w]`
    SahaiRay,
    /// `ȳ [2 − (p/P)^λ exp(δ(p − P)/(p + P))]`
    Solanki,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Chakrabarty,
        Family::KhoshnevisanRatio,
        Family::SahaiRay,
        Family::Solanki,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Chakrabarty => "chakrabarty",
            Family::KhoshnevisanRatio => "khoshnevisan_ratio",
            Family::SahaiRay => "sahai_ray",
            Family::Solanki => "solanki",
        }
    }

    /// Conventional short label (`t1` .. `t4`).
    pub fn label(self) -> &'static str {
        match self {
            Family::Chakrabarty => "t1",
            Family::KhoshnevisanRatio => "t2",
            Family::SahaiRay => "t3",
            Family::Solanki => "t4",
        }
    }

    /// Parameter names accepted by [`EstimatorSpec::from_params`].
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            Family::Chakrabarty => &["alpha"],
            Family::KhoshnevisanRatio => &["g", "beta"],
            Family::SahaiRay => &["w"],
            Family::Solanki => &["lambda", "delta"],
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

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "chakrabarty" | "t1" => Ok(Family::Chakrabarty),
            "khoshnevisan_ratio" | "khoshnevisan" | "t2" => Ok(Family::KhoshnevisanRatio),
            "sahai_ray" | "sahairay" | "t3" => Ok(Family::SahaiRay),
            "solanki" | "t4" => Ok(Family::Solanki),
            _ => Err(Error::InvalidParameter(format!("unknown family {s:?}"))),
        }
    }
}

/// One estimator family together with its tuning parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum EstimatorSpec {
    Chakrabarty { alpha: f64 },
    KhoshnevisanRatio { g: f64, beta: f64 },
    SahaiRay { w: f64 },
    Solanki { lambda: f64, delta: f64 },
}

impl EstimatorSpec {
    pub fn family(&self) -> Family {
        match self {
            EstimatorSpec::Chakrabarty { .. } => Family::Chakrabarty,
            EstimatorSpec::KhoshnevisanRatio { .. } => Family::KhoshnevisanRatio,
            EstimatorSpec::SahaiRay { .. } => Family::SahaiRay,
            EstimatorSpec::Solanki { .. } => Family::Solanki,
        }
    }

    /// The parameter setting that reduces the family to the sample mean.
    pub fn neutral(family: Family) -> Self {
        match family {
            Family::Chakrabarty => EstimatorSpec::Chakrabarty { alpha: 0.0 },
            Family::KhoshnevisanRatio => EstimatorSpec::KhoshnevisanRatio { g: 0.0, beta: 0.0 },
            Family::SahaiRay => EstimatorSpec::SahaiRay { w: 0.0 },
            Family::Solanki => EstimatorSpec::Solanki {
                lambda: 0.0,
                delta: 0.0,
            },
        }
    }

    /// Builds a spec from named parameters; every name the family needs must be present.
    pub fn from_params(family: Family, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |name: &str| {
            params.get(name).copied().ok_or_else(|| {
                Error::InvalidParameter(format!("{family} requires parameter {name:?}"))
            })
        };
        let spec = match family {
            Family::Chakrabarty => EstimatorSpec::Chakrabarty {
                alpha: get("alpha")?,
            },
            Family::KhoshnevisanRatio => EstimatorSpec::KhoshnevisanRatio {
                g: get("g")?,
                beta: get("beta")?,
            },
            Family::SahaiRay => EstimatorSpec::SahaiRay { w: get("w")? },
            Family::Solanki => EstimatorSpec::Solanki {
                lambda: get("lambda")?,
                delta: get("delta")?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let pairs: Vec<(&str, f64)> = match *self {
            EstimatorSpec::Chakrabarty { alpha } => vec![("alpha", alpha)],
            EstimatorSpec::KhoshnevisanRatio { g, beta } => vec![("g", g), ("beta", beta)],
            EstimatorSpec::SahaiRay { w } => vec![("w", w)],
            EstimatorSpec::Solanki { lambda, delta } => vec![("lambda", lambda), ("delta", delta)],
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.params().values().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "non-finite parameter in {self}"
            )))
        }
    }

    /// First-order slope `θ = −h1`: α, gβ, w or k.
    pub fn slope(&self) -> f64 {
        match *self {
            EstimatorSpec::Chakrabarty { alpha } => alpha,
            EstimatorSpec::KhoshnevisanRatio { g, beta } => g * beta,
            EstimatorSpec::SahaiRay { w } => w,
            EstimatorSpec::Solanki { lambda, delta } => solanki_k(lambda, delta),
        }
    }

    /// Shape function `h(u)` with `u = p / P`.
    pub fn shape(&self, u: f64) -> Result<f64> {
        self.factor(u, 1.0)
    }

    /// `t / ȳ` evaluated directly from `p` and `P`, following each family's
    /// formula so that equivalent estimators round identically.
    fn factor(&self, p: f64, big_p: f64) -> Result<f64> {
        if p == big_p {
            return Ok(1.0);
        }
        match *self {
            EstimatorSpec::Chakrabarty { alpha } => {
                if alpha == 0.0 {
                    return Ok(1.0);
                }
                if p == 0.0 {
                    return Err(Error::DegenerateSample(
                        "sample proportion p = 0 in ratio term P/p".into(),
                    ));
                }
                Ok((1.0 - alpha) + alpha * (big_p / p))
            }
            EstimatorSpec::KhoshnevisanRatio { g, beta } => {
                let denominator = beta * p + (1.0 - beta) * big_p;
                if denominator > 0.0 {
                    Ok((big_p / denominator).powf(g))
                } else {
                    checked_pow(denominator / big_p, -g, "beta*p + (1-beta)*P")
                }
            }
            EstimatorSpec::SahaiRay { w } => Ok(2.0 - checked_pow(p / big_p, w, "p/P")?),
            EstimatorSpec::Solanki { lambda, delta } => {
                let power = checked_pow(p / big_p, lambda, "p/P")?;
                Ok(2.0 - power * (delta * (p - big_p) / (p + big_p)).exp())
            }
        }
    }

    /// Taylor coefficients `h_1 .. h_4` of the shape function at `u = 1`.
    pub fn h_coefficients(&self) -> [f64; 4] {
        let mut h = [0.0; 4];
        match *self {
            EstimatorSpec::Chakrabarty { alpha } => {
                for (j, hj) in h.iter_mut().enumerate() {
                    *hj = if j % 2 == 0 { -alpha } else { alpha };
                }
            }
            EstimatorSpec::KhoshnevisanRatio { g, beta } => {
                // (1 + β e)^(−g) = Σ C(−g, j) β^j e^j
                let mut c = 1.0;
                for (j, hj) in h.iter_mut().enumerate() {
                    let j = j as f64;
                    c *= (-g - j) / (j + 1.0) * beta;
                    *hj = c;
                }
            }
            EstimatorSpec::SahaiRay { w } => {
                let mut c = 1.0;
                for (j, hj) in h.iter_mut().enumerate() {
                    let j = j as f64;
                    c *= (w - j) / (j + 1.0);
                    *hj = -c;
                }
            }
            EstimatorSpec::Solanki { lambda, delta } => {
                let f = solanki_series(lambda, delta);
                for (hj, fj) in h.iter_mut().zip(&f[1..]) {
                    *hj = -fj;
                }
            }
        }
        h
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.family())?;
        for (i, (k, v)) in self.params().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str(")")
    }
}

/// The derived Solanki slope `k = (δ + 2λ)/2`.
pub fn solanki_k(lambda: f64, delta: f64) -> f64 {
    (delta + 2.0 * lambda) / 2.0
}

/// Coefficients `f_0 .. f_4` of `(1 + e)^λ · exp(δ e / (2 + e))` in powers of `e`.
///
/// The exponential factor is expanded with the recurrence obtained from
/// `B' = s' B`, i.e. `b_k = (1/k) Σ_{m=1..k} m s_m b_{k−m}`.
fn solanki_series(lambda: f64, delta: f64) -> [f64; 5] {
    // binomial series of (1 + e)^λ
    let mut a = [1.0; 5];
    for j in 1..5 {
        a[j] = a[j - 1] * (lambda - (j - 1) as f64) / j as f64;
    }
    // s(e) = δ e / (2 + e) = δ Σ_{m≥1} (−1)^(m−1) (e/2)^m
    let mut s = [0.0; 5];
    for (m, sm) in s.iter_mut().enumerate().skip(1) {
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        *sm = sign * delta * 0.5f64.powi(m as i32);
    }
    let mut b = [0.0; 5];
    b[0] = 1.0;
    for k in 1..5 {
        let acc: f64 = (1..=k).map(|m| m as f64 * s[m] * b[k - m]).sum();
        b[k] = acc / k as f64;
    }
    let mut f = [0.0; 5];
    for (k, fk) in f.iter_mut().enumerate() {
        *fk = (0..=k).map(|i| a[i] * b[k - i]).sum();
    }
    f
}

/// `base^exponent`, refusing zero bases with non-positive-integer exponents
/// and negative bases with fractional exponents.
fn checked_pow(base: f64, exponent: f64, what: &str) -> Result<f64> {
    let integral = exponent.fract() == 0.0;
    if base > 0.0 {
        Ok(base.powf(exponent))
    } else if exponent == 0.0 {
        Ok(1.0)
    } else if base == 0.0 {
        if integral && exponent > 0.0 {
            Ok(0.0)
        } else {
            Err(Error::DegenerateSample(format!(
                "{what} = 0 raised to power {exponent}"
            )))
        }
    } else if integral {
        Ok(base.powf(exponent))
    } else {
        Err(Error::DegenerateSample(format!(
            "{what} = {base} < 0 raised to fractional power {exponent}"
        )))
    }
}

/// Summary of one drawn sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    /// Sample mean of y.
    pub ybar: f64,
    /// Sample proportion with the attribute.
    pub p: f64,
}

/// Evaluates the estimator on a sample, given the known population proportion `P`.
pub fn point_estimate(spec: &EstimatorSpec, stats: &SampleStats, proportion: f64) -> Result<f64> {
    if !(proportion > 0.0 && proportion < 1.0) {
        return Err(Error::DegenerateProportion(proportion));
    }
    Ok(stats.ybar * spec.factor(stats.p, proportion)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(ybar: f64, p: f64) -> SampleStats {
        SampleStats { n: 4, ybar, p }
    }

    #[test]
    fn classical_forms() {
        let t = |spec, ybar, p, big_p| point_estimate(&spec, &stats(ybar, p), big_p).unwrap();
        assert_eq!(
            t(EstimatorSpec::Chakrabarty { alpha: 1.0 }, 3.0, 0.2, 0.1),
            1.5
        );
        assert_eq!(
            t(
                EstimatorSpec::KhoshnevisanRatio { g: -1.0, beta: 1.0 },
                2.0,
                0.25,
                0.5
            ),
            1.0
        );
        assert_eq!(t(EstimatorSpec::SahaiRay { w: 1.0 }, 2.0, 0.25, 0.5), 3.0);
        assert_eq!(
            t(
                EstimatorSpec::Solanki {
                    lambda: 1.0,
                    delta: 0.0
                },
                2.0,
                0.25,
                0.5
            ),
            3.0
        );
    }

    #[test]
    fn h_coefficient_examples() {
        assert_eq!(
            EstimatorSpec::SahaiRay { w: 2.0 }.h_coefficients(),
            [-2.0, -1.0, 0.0, 0.0]
        );
        assert_eq!(
            EstimatorSpec::KhoshnevisanRatio { g: 1.0, beta: 1.0 }.h_coefficients(),
            [-1.0, 1.0, -1.0, 1.0]
        );
        let h = EstimatorSpec::Solanki {
            lambda: 0.0,
            delta: 2.0,
        }
        .h_coefficients();
        assert!((h[0] + 1.0).abs() < 1e-15);
        for spec in [
            EstimatorSpec::Chakrabarty { alpha: 0.7 },
            EstimatorSpec::KhoshnevisanRatio { g: 1.5, beta: 0.4 },
            EstimatorSpec::SahaiRay { w: -0.3 },
            EstimatorSpec::Solanki {
                lambda: 0.2,
                delta: 1.1,
            },
        ] {
            assert!(
                (spec.h_coefficients()[0] + spec.slope()).abs() < 1e-15,
                "{spec}"
            );
        }
    }

    #[test]
    fn degenerate_samples() {
        let zero = stats(2.0, 0.0);
        let err = |spec: EstimatorSpec| point_estimate(&spec, &zero, 0.5);
        assert!(matches!(
            err(EstimatorSpec::Chakrabarty { alpha: 1.0 }),
            Err(Error::DegenerateSample(_))
        ));
        assert!(matches!(
            err(EstimatorSpec::KhoshnevisanRatio { g: 1.0, beta: 1.0 }),
            Err(Error::DegenerateSample(_))
        ));
        assert!(matches!(
            err(EstimatorSpec::SahaiRay { w: 0.5 }),
            Err(Error::DegenerateSample(_))
        ));
        assert!(matches!(
            err(EstimatorSpec::Solanki {
                lambda: 0.5,
                delta: 1.0
            }),
            Err(Error::DegenerateSample(_))
        ));
        // integer powers of zero are fine
        assert_eq!(err(EstimatorSpec::SahaiRay { w: 2.0 }).unwrap(), 4.0);
        // β > 1 can make the denominator negative
        assert!(matches!(
            point_estimate(
                &EstimatorSpec::KhoshnevisanRatio { g: 0.5, beta: 3.0 },
                &stats(2.0, 0.1),
                0.5
            ),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn spec_json_shape() {
        let spec = EstimatorSpec::KhoshnevisanRatio { g: 1.0, beta: 0.5 };
        let json = serde_json::to_value(spec).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"family": "khoshnevisan_ratio", "params": {"g": 1.0, "beta": 0.5}})
        );
        let back: EstimatorSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn from_params_requires_every_name() {
        let mut params = BTreeMap::new();
        params.insert("lambda".to_string(), 1.0);
        assert!(EstimatorSpec::from_params(Family::Solanki, &params).is_err());
        params.insert("delta".to_string(), 0.5);
        assert_eq!(
            EstimatorSpec::from_params(Family::Solanki, &params).unwrap(),
            EstimatorSpec::Solanki {
                lambda: 1.0,
                delta: 0.5
            }
        );
    }

    #[test]
    fn family_names_round_trip() {
        for family in Family::ALL {
            assert_eq!(family.name().parse::<Family>().unwrap(), family);
            assert_eq!(family.label().parse::<Family>().unwrap(), family);
        }
    }
}
