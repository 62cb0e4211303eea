//! Degrees of freedom from the high-SNR slope of a rate curve.

use crate::error::{SimError, SimResult};

/// Rate gained per dB by one interference-free stream: `log2(10) / 10`.
pub fn bits_per_db() -> f64 {
    std::f64::consts::LOG2_10 / 10.0
}

/// Least-squares slope of `rate` against `snr_db`, in streams.
///
/// Needs at least two distinct SNR points.
pub fn estimate_dof(points: &[(f64, f64)]) -> SimResult<f64> {
    if points.len() < 2 {
        return Err(SimError::Config(format!(
            "DOF needs at least two SNR points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SimError::Config(
            "DOF needs at least two distinct SNR values".into(),
        ));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    Ok(sxy / sxx / bits_per_db())
}

/// The points of `points` whose SNR lies in `window` (inclusive).
pub fn in_window(points: &[(f64, f64)], window: (f64, f64)) -> Vec<(f64, f64)> {
    points
        .iter()
        .copied()
        .filter(|p| p.0 >= window.0 && p.0 <= window.1)
        .collect()
}

/// The default high-SNR grid, 30 to 50 dB in 5 dB steps.
pub fn default_window_grid() -> Vec<f64> {
    vec![30.0, 35.0, 40.0, 45.0, 50.0]
}
