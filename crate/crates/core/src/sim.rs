//! Seeded generators for the two simulation designs.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngExt};
use rand_distr::{ChiSquared, Distribution};

use crate::error::{GalorError, Result};
use crate::model::OrdinalDataset;
use crate::random::open_unit;

const MAX_REGENERATIONS: usize = 100;

/// Which simulation design to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    /// Standard logistic errors, `β = (2, −3, 4)`, `ξ = (0, 2, 4)`.
    One,
    /// Demeaned `χ²(4)` errors, `β = (3, −7, 5)`, `ξ = (0, 3, 6)`.
    Two,
}

impl Study {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Study::One),
            2 => Ok(Study::Two),
            other => Err(GalorError::Config(format!("study must be 1 or 2, got {other}"))),
        }
    }

    pub fn number(&self) -> u8 {
        match self {
            Study::One => 1,
            Study::Two => 2,
        }
    }

    pub fn beta(&self) -> [f64; 3] {
        match self {
            Study::One => [2.0, -3.0, 4.0],
            Study::Two => [3.0, -7.0, 5.0],
        }
    }

    /// Finite interior cut-points.
    pub fn cutpoints(&self) -> [f64; 3] {
        match self {
            Study::One => [0.0, 2.0, 4.0],
            Study::Two => [0.0, 3.0, 6.0],
        }
    }

    /// Second cut-point held fixed when fitting.
    pub fn cut2(&self) -> f64 {
        self.cutpoints()[1]
    }

    fn error<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Study::One => {
                let u = open_unit(rng);
                (u / (1.0 - u)).ln()
            }
            Study::Two => ChiSquared::new(4.0).expect("valid degrees of freedom").sample(rng) - 4.0,
        }
    }
}

/// A simulated dataset together with the latent responses that produced it.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub data: OrdinalDataset,
    pub z: DVector<f64>,
}

/// `y_i = j` iff `ξ_{j−1} < z_i ≤ ξ_j`; `xi` lists the finite cut-points.
pub fn discretize(z: &[f64], xi: &[f64]) -> Vec<usize> {
    z.iter().map(|&v| 1 + xi.iter().filter(|&&c| v > c).count()).collect()
}

/// Draws `n` observations from `study`. Covariates are an intercept and two
/// standard uniform columns.
pub fn generate<R: Rng + ?Sized>(study: Study, n: usize, rng: &mut R) -> Result<SimulatedData> {
    if n < 50 {
        return Err(GalorError::Config(format!("simulation needs n >= 50, got {n}")));
    }
    let beta = DVector::from_column_slice(&study.beta());
    let xi = study.cutpoints();
    let names = vec!["intercept".to_string(), "x1".to_string(), "x2".to_string()];
    for attempt in 1..=MAX_REGENERATIONS {
        let x = DMatrix::from_fn(n, 3, |_, j| if j == 0 { 1.0 } else { rng.random::<f64>() });
        let eps = DVector::from_fn(n, |_, _| study.error(rng));
        let z = &x * &beta + eps;
        let y = discretize(z.as_slice(), &xi);
        let mut seen = [false; 4];
        for &v in &y {
            seen[v - 1] = true;
        }
        if seen.iter().all(|&s| s) {
            let data = OrdinalDataset::with_categories(x, y, 4, names)?;
            return Ok(SimulatedData { data, z });
        }
        log::warn!("simulated dataset (attempt {attempt}) misses a category; regenerating");
    }
    Err(GalorError::Data("could not generate a dataset covering every category".into()))
}

pub fn generate_study1<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SimulatedData> {
    generate(Study::One, n, rng)
}

pub fn generate_study2<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SimulatedData> {
    generate(Study::Two, n, rng)
}
