//! Taylor coefficients of the shape functions against high-precision
//! Richardson-extrapolated central differences.

use astro_float::{BigFloat, Consts, RoundingMode};
use attrest::estimator::solanki_k;
use attrest::{EstimatorSpec, Family};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PRECISION: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;
const STEP: f64 = 1e-3;
const DRAWS: usize = 50;

struct Ctx {
    cc: Consts,
}

impl Ctx {
    fn new() -> Self {
        Self {
            cc: Consts::new().expect("constants cache"),
        }
    }

    fn num(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, PRECISION)
    }

    fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(PRECISION, RM, &mut self.cc)
    }

    fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(PRECISION, RM, &mut self.cc)
    }

    /// `h(u)` for the given spec, evaluated at high precision.
    fn shape(&mut self, spec: &EstimatorSpec, u: &BigFloat) -> BigFloat {
        let one = self.num(1.0);
        let two = self.num(2.0);
        match *spec {
            EstimatorSpec::Chakrabarty { alpha } => {
                let inv = one.div(u, PRECISION, RM).sub(&one, PRECISION, RM);
                one.add(&self.num(alpha).mul(&inv, PRECISION, RM), PRECISION, RM)
            }
            EstimatorSpec::KhoshnevisanRatio { g, beta } => {
                let shift = u
                    .sub(&one, PRECISION, RM)
                    .mul(&self.num(beta), PRECISION, RM);
                let base = one.add(&shift, PRECISION, RM);
                let log = self.ln(&base);
                self.exp(&log.mul(&self.num(-g), PRECISION, RM))
            }
            EstimatorSpec::SahaiRay { w } => {
                let log = self.ln(u);
                let power = self.exp(&log.mul(&self.num(w), PRECISION, RM));
                two.sub(&power, PRECISION, RM)
            }
            EstimatorSpec::Solanki { lambda, delta } => {
                let log = self.ln(u).mul(&self.num(lambda), PRECISION, RM);
                let frac = u
                    .sub(&one, PRECISION, RM)
                    .div(&u.add(&one, PRECISION, RM), PRECISION, RM)
                    .mul(&self.num(delta), PRECISION, RM);
                let value = self.exp(&log.add(&frac, PRECISION, RM));
                two.sub(&value, PRECISION, RM)
            }
        }
    }

    /// Central-difference estimates of `h^{(j)}(1) / j!` for `j = 1..=4` at step `h`.
    fn central(&mut self, spec: &EstimatorSpec, h: f64) -> [BigFloat; 4] {
        let hb = self.num(h);
        let one = self.num(1.0);
        let at = |ctx: &mut Ctx, k: f64| {
            let u = one.add(&ctx.num(k).mul(&hb, PRECISION, RM), PRECISION, RM);
            ctx.shape(spec, &u)
        };
        let fm2 = at(self, -2.0);
        let fm1 = at(self, -1.0);
        let f0 = at(self, 0.0);
        let fp1 = at(self, 1.0);
        let fp2 = at(self, 2.0);
        let c = |v: f64| BigFloat::from_f64(v, PRECISION);
        let lin = |terms: &[(f64, &BigFloat)]| {
            terms.iter().fold(c(0.0), |acc, (w, f)| {
                acc.add(&c(*w).mul(f, PRECISION, RM), PRECISION, RM)
            })
        };
        let hp = |k: i32| {
            let mut out = c(1.0);
            for _ in 0..k {
                out = out.mul(&hb, PRECISION, RM);
            }
            out
        };
        // Numerators divided by j! · h^j · (stencil normalization).
        let d1 = lin(&[(1.0, &fp1), (-1.0, &fm1)]).div(
            &c(2.0).mul(&hp(1), PRECISION, RM),
            PRECISION,
            RM,
        );
        let d2 = lin(&[(1.0, &fp1), (-2.0, &f0), (1.0, &fm1)]).div(
            &c(2.0).mul(&hp(2), PRECISION, RM),
            PRECISION,
            RM,
        );
        let d3 = lin(&[(1.0, &fp2), (-2.0, &fp1), (2.0, &fm1), (-1.0, &fm2)]).div(
            &c(12.0).mul(&hp(3), PRECISION, RM),
            PRECISION,
            RM,
        );
        let d4 = lin(&[
            (1.0, &fp2),
            (-4.0, &fp1),
            (6.0, &f0),
            (-4.0, &fm1),
            (1.0, &fm2),
        ])
        .div(&c(24.0).mul(&hp(4), PRECISION, RM), PRECISION, RM);
        [d1, d2, d3, d4]
    }

    /// Richardson extrapolation `(4·D(h/2) − D(h)) / 3`, converted to `f64`.
    fn richardson(&mut self, spec: &EstimatorSpec) -> [f64; 4] {
        let coarse = self.central(spec, STEP);
        let fine = self.central(spec, STEP / 2.0);
        let four = self.num(4.0);
        let three = self.num(3.0);
        std::array::from_fn(|j| {
            let v = four
                .mul(&fine[j], PRECISION, RM)
                .sub(&coarse[j], PRECISION, RM)
                .div(&three, PRECISION, RM);
            to_f64(&v)
        })
    }
}

fn to_f64(v: &BigFloat) -> f64 {
    let text = v.to_string();
    text.parse()
        .unwrap_or_else(|e| panic!("cannot parse {text:?} as f64: {e}"))
}

fn random_spec(family: Family, rng: &mut ChaCha8Rng) -> EstimatorSpec {
    match family {
        Family::Chakrabarty => EstimatorSpec::Chakrabarty {
            alpha: rng.random_range(-3.0..3.0),
        },
        Family::KhoshnevisanRatio => EstimatorSpec::KhoshnevisanRatio {
            g: rng.random_range(-3.0..3.0),
            beta: rng.random_range(-2.0..2.0),
        },
        Family::SahaiRay => EstimatorSpec::SahaiRay {
            w: rng.random_range(-3.0..3.0),
        },
        Family::Solanki => EstimatorSpec::Solanki {
            lambda: rng.random_range(-3.0..3.0),
            delta: rng.random_range(-3.0..3.0),
        },
    }
}

/// Relative comparison with an absolute floor for coefficients that are
/// (numerically) zero, e.g. falling factorials near an integer exponent.
fn assert_close(spec: &EstimatorSpec, j: usize, analytic: f64, numeric: f64) {
    let scale = analytic.abs().max(1e-9);
    let rel = (analytic - numeric).abs() / scale;
    assert!(
        rel <= 1e-6,
        "{spec:?}: h{} analytic {analytic:e} vs finite difference {numeric:e} (rel {rel:e})",
        j + 1
    );
}

#[test]
fn conversion_round_trips() {
    for v in [1.0, -0.5, 1.0e-9, 12345.678, -2.5e7] {
        assert_eq!(to_f64(&BigFloat::from_f64(v, PRECISION)), v);
    }
}

#[test]
fn coefficients_match_finite_differences() {
    let mut ctx = Ctx::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for family in Family::ALL {
        for _ in 0..DRAWS {
            let spec = random_spec(family, &mut rng);
            let analytic = spec.h_coefficients();
            let numeric = ctx.richardson(&spec);
            for j in 0..4 {
                assert_close(&spec, j, analytic[j], numeric[j]);
            }
        }
    }
}

#[test]
fn slope_is_minus_first_coefficient() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for family in Family::ALL {
        for _ in 0..DRAWS {
            let spec = random_spec(family, &mut rng);
            assert_eq!(spec.h_coefficients()[0], -spec.slope());
        }
    }
    assert_eq!(solanki_k(0.0, 2.0), 1.0);
}

#[test]
fn worked_coefficient_examples() {
    assert_eq!(
        EstimatorSpec::SahaiRay { w: 2.0 }.h_coefficients(),
        [-2.0, -1.0, 0.0, 0.0]
    );
    assert_eq!(
        EstimatorSpec::KhoshnevisanRatio { g: 1.0, beta: 1.0 }.h_coefficients(),
        [-1.0, 1.0, -1.0, 1.0]
    );
    let mut ctx = Ctx::new();
    let spec = EstimatorSpec::Solanki {
        lambda: 0.0,
        delta: 2.0,
    };
    let numeric = ctx.richardson(&spec);
    assert!((numeric[0] + 1.0).abs() < 1e-9);
    assert_eq!(spec.h_coefficients()[0], -1.0);
}
