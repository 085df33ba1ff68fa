//! Finite populations with a binary auxiliary attribute, their normalized
//! mixed central moments, and the SRSWOR design coefficients.
//!
//! Moments use divisor `N`:
//!
//! ```text
//! C_pq = [ (1/N) Σ (φ_i − P)^p (y_i − Ȳ)^q ] / (P^p Ȳ^q)
//! ```
//!
//! With that normalization the second- and third-order sampling moments of
//! `e0 = (ȳ − Ȳ)/Ȳ` and `e1 = (p − P)/P` are exactly `L1·C` and `L2·C`.

use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Highest total order `p + q` stored in a [`MomentSet`].
pub const MAX_MOMENT_ORDER: usize = 4;

/// A finite population of `(y, φ)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    y: Vec<f64>,
    phi: Vec<bool>,
    ybar: f64,
    attribute_count: usize,
}

impl Population {
    /// Builds a population, checking `N ≥ 4`, `0 < P < 1` and `Ȳ ≠ 0`.
    pub fn new(y: Vec<f64>, phi: Vec<bool>) -> Result<Self> {
        if y.len() != phi.len() {
            return Err(Error::LengthMismatch {
                y: y.len(),
                phi: phi.len(),
            });
        }
        if let Some(unit) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { unit: unit + 1 });
        }
        let units = y.len();
        if units < 4 {
            return Err(Error::TooFewUnits(units));
        }
        let attribute_count = phi.iter().filter(|&&b| b).count();
        if attribute_count == 0 || attribute_count == units {
            return Err(Error::DegenerateProportion(
                attribute_count as f64 / units as f64,
            ));
        }
        let ybar = mean(&y);
        if ybar == 0.0 {
            return Err(Error::ZeroMean);
        }
        Ok(Self {
            y,
            phi,
            ybar,
            attribute_count,
        })
    }

    /// Builds a population from `0/1` attribute values.
    pub fn from_bits(y: Vec<f64>, phi: &[u8]) -> Result<Self> {
        let mut bits = Vec::with_capacity(phi.len());
        for (i, &b) in phi.iter().enumerate() {
            match b {
                0 => bits.push(false),
                1 => bits.push(true),
                other => {
                    return Err(Error::NonBinaryAttribute {
                        line: i + 1,
                        value: other.to_string(),
                    })
                }
            }
        }
        Self::new(y, bits)
    }

    pub fn size(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn phi(&self) -> &[bool] {
        &self.phi
    }

    /// Population mean `Ȳ`.
    pub fn ybar(&self) -> f64 {
        self.ybar
    }

    /// Number of units possessing the attribute (`A`).
    pub fn attribute_count(&self) -> usize {
        self.attribute_count
    }

    /// Attribute proportion `P = A / N`.
    pub fn proportion(&self) -> f64 {
        self.attribute_count as f64 / self.size() as f64
    }

    /// Repeats every unit `times` times. All normalized moments are unchanged.
    pub fn replicate(&self, times: usize) -> Result<Self> {
        let mut y = Vec::with_capacity(self.size() * times);
        let mut phi = Vec::with_capacity(self.size() * times);
        for _ in 0..times {
            y.extend_from_slice(&self.y);
            phi.extend_from_slice(&self.phi);
        }
        Self::new(y, phi)
    }

    /// Writes the population in the `y,phi` text format, with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("y,phi\n");
        for (y, &phi) in self.y.iter().zip(&self.phi) {
            out.push_str(&format!("{},{}\n", y, u8::from(phi)));
        }
        out
    }
}

fn mean(values: &[f64]) -> f64 {
    let mut sum = NeumaierSum::default();
    for &v in values {
        sum.add(v);
    }
    sum.total() / values.len() as f64
}

/// Reads a population from a `y,phi` file.
pub fn load_population(path: impl AsRef<Path>) -> Result<Population> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    read_population(file)
}

/// Parses a population from any reader producing the `y,phi` format.
///
/// One record per line, optional `y,phi` header on the first line, LF or
/// CRLF endings. Blank lines are ignored.
pub fn read_population(reader: impl Read) -> Result<Population> {
    let mut y = Vec::new();
    let mut phi = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        if idx == 0 && is_header(line) {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(yf), Some(pf), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected two comma-separated fields, got {line:?}"),
            });
        };
        let value: f64 = yf.trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("cannot parse y value {:?}", yf.trim()),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("non-finite y value {:?}", yf.trim()),
            });
        }
        let bit = match pf.trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::NonBinaryAttribute {
                    line: lineno,
                    value: other.to_string(),
                })
            }
        };
        y.push(value);
        phi.push(bit);
    }
    Population::new(y, phi)
}

fn is_header(line: &str) -> bool {
    let mut parts = line.split(',').map(str::trim);
    matches!(
        (parts.next(), parts.next(), parts.next()),
        (Some("y"), Some("phi"), None)
    )
}

/// Normalized mixed central moments `C_pq` for `p + q ≤ 4`.
///
/// Index `p` belongs to the attribute, `q` to the study variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub population_size: usize,
    pub ybar: f64,
    pub proportion: f64,
    c: [[f64; MAX_MOMENT_ORDER + 1]; MAX_MOMENT_ORDER + 1],
}

impl MomentSet {
    /// `C_pq`. Panics if `p + q > 4`.
    pub fn c(&self, p: usize, q: usize) -> f64 {
        assert!(p + q <= MAX_MOMENT_ORDER, "C_{p}{q} is not stored");
        self.c[p][q]
    }

    /// Builds a moment set from explicit values, for tests and what-if runs.
    /// Entries with `p + q > 4` are ignored.
    pub fn from_parts(
        population_size: usize,
        ybar: f64,
        proportion: f64,
        mut c: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let mut table = [[0.0; MAX_MOMENT_ORDER + 1]; MAX_MOMENT_ORDER + 1];
        for (p, row) in table.iter_mut().enumerate() {
            for (q, cell) in row.iter_mut().enumerate() {
                if p + q <= MAX_MOMENT_ORDER {
                    *cell = c(p, q);
                }
            }
        }
        Self {
            population_size,
            ybar,
            proportion,
            c: table,
        }
    }

    /// Point-biserial correlation between φ and y.
    pub fn point_biserial(&self) -> f64 {
        self.c(1, 1) / (self.c(2, 0) * self.c(0, 2)).sqrt()
    }

    /// Coefficient of variation of y.
    pub fn cv_y(&self) -> f64 {
        self.c(0, 2).sqrt()
    }

    /// First-order optimal slope `C11 / C20`.
    pub fn regression_slope(&self) -> f64 {
        self.c(1, 1) / self.c(2, 0)
    }
}

impl fmt::Display for MomentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N={} Ybar={} P={}",
            self.population_size, self.ybar, self.proportion
        )?;
        for order in 2..=MAX_MOMENT_ORDER {
            for p in (0..=order).rev() {
                write!(f, " C{}{}={:.6e}", p, order - p, self.c(p, order - p))?;
            }
        }
        Ok(())
    }
}

/// Computes `C_pq` for all `p + q ≤ 4` in two passes (means, then centered powers).
pub fn moments(pop: &Population) -> MomentSet {
    let big_p = pop.proportion();
    let ybar = pop.ybar();
    let mut sums = [[NeumaierSum::default(); MAX_MOMENT_ORDER + 1]; MAX_MOMENT_ORDER + 1];
    for (&y, &phi) in pop.y().iter().zip(pop.phi()) {
        let dphi = f64::from(u8::from(phi)) - big_p;
        let dy = y - ybar;
        let mut phi_pow = 1.0;
        for (p, row) in sums.iter_mut().enumerate() {
            let mut term = phi_pow;
            for cell in row.iter_mut().take(MAX_MOMENT_ORDER + 1 - p) {
                cell.add(term);
                term *= dy;
            }
            phi_pow *= dphi;
        }
    }
    let units = pop.size() as f64;
    MomentSet::from_parts(pop.size(), ybar, big_p, |p, q| {
        sums[p][q].total() / units / (big_p.powi(p as i32) * ybar.powi(q as i32))
    })
}

/// SRSWOR design coefficients `L1..L4` for population size `N` and sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignCoefficients {
    pub population_size: usize,
    pub sample_size: usize,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
}

/// Evaluates `L1..L4`. Each coefficient is formed as an exact integer ratio
/// and rounded once, so results are correctly rounded while the products
/// fit in 128 bits.
pub fn design_coefficients(population: usize, sample: usize) -> Result<DesignCoefficients> {
    if population < 4 || sample == 0 || sample >= population {
        return Err(Error::InvalidDesign { population, sample });
    }
    let big_n = population as i128;
    let n = sample as i128;
    let l1 = exact_ratio(&[big_n - n], &[big_n - 1, n]);
    let l2 = exact_ratio(&[big_n - n, big_n - 2 * n], &[big_n - 1, big_n - 2, n, n]);
    let l3 = exact_ratio(
        &[big_n - n, big_n * big_n + big_n - 6 * n * big_n + 6 * n * n],
        &[big_n - 1, big_n - 2, big_n - 3, n, n, n],
    );
    let l4 = exact_ratio(
        &[big_n, big_n - n, big_n - n - 1, n - 1],
        &[big_n - 1, big_n - 2, big_n - 3, n, n, n],
    );
    Ok(DesignCoefficients {
        population_size: population,
        sample_size: sample,
        l1,
        l2,
        l3,
        l4,
    })
}

fn exact_ratio(numer: &[i128], denom: &[i128]) -> f64 {
    let product = |fs: &[i128]| fs.iter().try_fold(1i128, |acc, &f| acc.checked_mul(f));
    match (product(numer), product(denom)) {
        (Some(a), Some(b)) => Ratio::new(a, b).to_f64().unwrap_or(f64::NAN),
        _ => {
            let a: f64 = numer.iter().map(|&f| f as f64).product();
            let b: f64 = denom.iter().map(|&f| f as f64).product();
            a / b
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Population {
        Population::from_bits(vec![1.0, 2.0, 3.0, 4.0], &[0, 0, 1, 1]).unwrap()
    }

    #[test]
    fn loads_tiny_file() {
        let pop = read_population("y,phi\r\n1,0\r\n2,0\r\n3,1\r\n4,1\r\n".as_bytes()).unwrap();
        assert_eq!(pop.size(), 4);
        assert_eq!(pop.ybar(), 2.5);
        assert_eq!(pop.proportion(), 0.5);
    }

    #[test]
    fn header_is_optional() {
        let pop = read_population("1,0\n2,0\n3,1\n4,1\n".as_bytes()).unwrap();
        assert_eq!(pop, tiny());
    }

    #[test]
    fn rejects_non_binary_attribute() {
        let err = read_population("y,phi\n1,0\n2,2\n3,1\n4,1\n".as_bytes()).unwrap_err();
        assert_eq!(
            err,
            Error::NonBinaryAttribute {
                line: 3,
                value: "2".into()
            }
        );
        assert!(err.to_string().contains("non-binary attribute"));
    }

    #[test]
    fn rejects_degenerate_proportion() {
        let err = read_population("1,1\n2,1\n3,1\n4,1\n".as_bytes()).unwrap_err();
        assert_eq!(err, Error::DegenerateProportion(1.0));
        assert!(err.to_string().contains("degenerate proportion P=1"));
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(matches!(
            read_population("1,0\nabc,1\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_population("1,0,3\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert_eq!(
            read_population("1,0\n2,1\n3,0\n".as_bytes()),
            Err(Error::TooFewUnits(3))
        );
        assert_eq!(
            read_population("1,0\n-1,1\n2,0\n-2,1\n".as_bytes()),
            Err(Error::ZeroMean)
        );
    }

    #[test]
    fn tiny_moments() {
        let ms = moments(&tiny());
        assert!((ms.c(2, 0) - 1.0).abs() < 1e-15);
        assert!((ms.c(1, 1) - 0.4).abs() < 1e-15);
        assert!((ms.c(0, 2) - 0.2).abs() < 1e-15);
        assert_eq!(ms.c(0, 0), 1.0);
        // P = 1/2 symmetry
        assert!(ms.c(3, 0).abs() < 1e-15);
        assert!((ms.c(4, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn design_examples() {
        let dc = design_coefficients(10, 2).unwrap();
        assert!((dc.l1 - 4.0 / 9.0).abs() < 1e-15);
        assert!((dc.l2 - 1.0 / 6.0).abs() < 1e-15);
        assert!((dc.l3 - 1.0 / 36.0).abs() < 1e-15);
        assert!((dc.l4 - 5.0 / 36.0).abs() < 1e-15);
        assert_eq!(design_coefficients(4, 2).unwrap().l1, 1.0 / 3.0);
        assert_eq!(design_coefficients(10, 5).unwrap().l2, 0.0);
    }

    #[test]
    fn design_domain() {
        assert!(design_coefficients(10, 10).is_err());
        assert!(design_coefficients(10, 0).is_err());
        assert!(design_coefficients(3, 1).is_err());
    }

    #[test]
    fn replication_keeps_moments() {
        let base = moments(&tiny());
        let big = moments(&tiny().replicate(25).unwrap());
        for order in 0..=MAX_MOMENT_ORDER {
            for p in 0..=order {
                let (a, b) = (base.c(p, order - p), big.c(p, order - p));
                assert!(
                    (a - b).abs() <= 1e-12 * a.abs().max(1e-12),
                    "C{p}{}",
                    order - p
                );
            }
        }
    }
}
