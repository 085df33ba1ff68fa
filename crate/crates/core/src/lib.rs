//! Ratio-type estimators of a finite-population mean that borrow strength
//! from a binary auxiliary attribute with known population proportion.
//!
//! The crate covers the whole workflow:
//!
//! * [`population`]: populations, normalized moments `C_pq`, design coefficients `L1..L4`;
//! * [`estimator`]: the four estimator families and their shape coefficients;
//! * [`expansion`]: first/second-order bias and MSE, engine-derived and as published;
//! * [`optimizer`]: first-order closed form and second-order numerical optima;
//! * [`sampling`]: exhaustive SRSWOR enumeration and seeded Monte Carlo;
//! * [`verify`]: lemma audits against enumeration;
//! * [`synth`]: seeded synthetic populations.

pub mod error;
pub mod estimator;
pub mod expansion;
pub mod numeric;
pub mod optimizer;
pub mod population;
pub mod sampling;
pub mod synth;
pub mod verify;

pub use error::{Error, Result};
pub use estimator::{point_estimate, EstimatorSpec, Family, SampleStats};
pub use expansion::{
    as_printed, bias_mse_first_order, bias_second_order, discrepancy_report, engine_derived,
    mse_second_order, ApproxResult, DiscrepancyReport, JointFourthForm, Method, MomentProvider,
    Order,
};
pub use optimizer::{first_order_optimum, second_order_optimum, OptimumResult};
pub use population::{
    design_coefficients, load_population, moments, read_population, DesignCoefficients, MomentSet,
    Population,
};
pub use sampling::{
    enumerate_exact, exact_moment, simulate, srswor_sample, DegeneratePolicy, ExactResult,
    MomentTable, SimulationOptions, SimulationReport,
};
pub use synth::{synthesize, SynthParams};
