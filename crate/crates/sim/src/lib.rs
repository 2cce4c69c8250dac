//! Reproducible, parallel BER sweeps for grouped code index modulation
//! downlinks, plus the CSV/JSON formats used by the `grcim` command-line tool.
//!
//! A sweep splits each SNR point into fixed-size blocks of symbols. Block `b`
//! of point `p` always draws from ChaCha stream `(p << 32) | b` of the master
//! seed, and blocks are scheduled in waves whose size does not depend on the
//! worker count, so results are bit-identical for any thread pool size.

pub mod compare;
mod error;
pub mod output;
pub mod sweep;

pub use compare::{compare_configs, ClaimKind, Comparison, OrderingClaim};
pub use error::SweepError;
pub use sweep::{run_sweep, BerSweepResult, PointFlag, SnrAxis, StoppingRule, SweepPoint, SweepSpec, UserPoint};

/// Parses `start:stop:step` (dB) into an inclusive grid.
pub fn parse_snr_range(text: &str) -> Result<Vec<f64>, SweepError> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| SweepError::InvalidSpec(format!("bad SNR range {text:?}: {e}")))?;
    let [start, stop, step] = parts[..] else {
        return Err(SweepError::InvalidSpec(format!(
            "SNR range {text:?} must look like start:stop:step"
        )));
    };
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(SweepError::InvalidSpec(format!(
            "empty or unbounded SNR range {text:?}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

/// Parses a comma-separated list of positive fading variances.
pub fn parse_variances(text: &str) -> Result<Vec<f64>, SweepError> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x > 0.0)
                .ok_or_else(|| SweepError::InvalidSpec(format!("bad fading variance {v:?}")))
        })
        .collect()
}
