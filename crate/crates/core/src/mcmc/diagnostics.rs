use crate::error::{GalorError, Result};

/// Batch-means inefficiency factor with batches of `floor(√N)` draws.
///
/// Equals `b · Var(batch means) / Var(draws)`; a constant series has no
/// defined ratio and returns `+∞`.
pub fn inefficiency_factor(draws: &[f64]) -> Result<f64> {
    let n = draws.len();
    if n < 100 {
        return Err(GalorError::Domain(format!(
            "inefficiency factor needs at least 100 draws, got {n}"
        )));
    }
    let b = (n as f64).sqrt().floor() as usize;
    let batches = n / b;
    let used = &draws[n - batches * b..];
    let variance = sample_variance(used);
    if !(variance > 0.0) {
        log::warn!("inefficiency factor of a constant series is undefined; reporting +inf");
        return Ok(f64::INFINITY);
    }
    let means: Vec<f64> = used.chunks_exact(b).map(|c| c.iter().sum::<f64>() / b as f64).collect();
    Ok(b as f64 * sample_variance(&means) / variance)
}

fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}
