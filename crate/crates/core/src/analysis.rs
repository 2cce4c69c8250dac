//! Closed-form error analysis and system comparison metrics.
//!
//! All SNR arguments are linear chip SNR `E_c/N_0` unless the name says `db`.

use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use num_rational::Ratio;

use crate::channel::{SystemConfig, TrafficMode};

/// Gaussian tail probability `Q(x) = P[N(0,1) > x]`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * libm::log10(linear)
}

/// Which pairwise error event a PEP refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PepKind {
    /// Wrong code index, `n ≠ ñ`.
    Index,
    /// Right code index, wrong BPSK label.
    Bpsk,
}

/// Pairwise error probability conditioned on the power factor `β`.
///
/// Index errors use `Q(sqrt(β² L_c E_c / (2 N_0)))`, BPSK errors
/// `Q(sqrt(2 β² L_c E_c / N_0))`; the BPSK argument is four times larger
/// under the square root.
pub fn conditional_pep(beta: f64, code_length: usize, chip_snr: f64, kind: PepKind) -> f64 {
    let energy = beta * beta * code_length as f64 * chip_snr;
    let arg = match kind {
        PepKind::Index => energy / 2.0,
        PepKind::Bpsk => 2.0 * energy,
    };
    q_function(libm::sqrt(arg))
}

/// Upper-bound BER for one channel realization: `N_c·PEP_index + PEP_bpsk`.
pub fn conditional_upper_bound(beta: f64, code_length: usize, codes_per_user: usize, chip_snr: f64) -> f64 {
    codes_per_user as f64 * conditional_pep(beta, code_length, chip_snr, PepKind::Index)
        + conditional_pep(beta, code_length, chip_snr, PepKind::Bpsk)
}

/// `E[Q(sqrt(2 γ X))]` for `X ~ Gamma(order, 1)`, the average BPSK error
/// probability with `order`-fold maximal-ratio diversity and mean branch SNR `γ`:
///
/// `((1-μ)/2)^L Σ_{n<L} C(L-1+n, n) ((1+μ)/2)^n` with `μ = sqrt(γ/(1+γ))`.
pub fn diversity_average(gamma: f64, order: usize) -> f64 {
    if order == 0 {
        return 0.0;
    }
    let mu = libm::sqrt(gamma / (1.0 + gamma));
    // 1 - μ without cancellation at large γ.
    let lower = 0.5 / ((1.0 + gamma) * (1.0 + mu));
    let upper = 0.5 * (1.0 + mu);
    let mut coeff = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for n in 0..order {
        if n > 0 {
            coeff *= (order - 1 + n) as f64 / n as f64;
            power *= upper;
        }
        sum += coeff * power;
    }
    libm::pow(lower, order as f64) * sum
}

/// Inputs of the closed-form upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub num_tx_antennas: usize,
    pub codes_per_user: usize,
    pub code_length: usize,
    /// Normalization coefficient `P`.
    pub power_coefficient: f64,
    /// Linear `E_c/N_0`.
    pub chip_snr: f64,
}

impl BoundParams {
    pub fn from_config(config: &SystemConfig, chip_snr: f64) -> Self {
        Self {
            num_tx_antennas: config.num_tx_antennas,
            codes_per_user: config.codes_per_user(),
            code_length: config.code_length,
            power_coefficient: config.power_coefficient(),
            chip_snr,
        }
    }

    /// `(γ_1, γ_2)` with `γ_2 = P L_c E_c/N_0` and `γ_1 = γ_2 / 4`.
    pub fn gammas(&self) -> (f64, f64) {
        let gamma2 = self.power_coefficient * self.code_length as f64 * self.chip_snr;
        (gamma2 / 4.0, gamma2)
    }
}

/// `N_c Ω_1 + Ω_2`, the fading-averaged upper bound on each user's BER.
///
/// It does not depend on the individual `σ_k²`, only on `P`. At low SNR the
/// value can exceed 1; see [`is_loose`].
pub fn upper_bound_ber(params: &BoundParams) -> f64 {
    let (gamma1, gamma2) = params.gammas();
    params.codes_per_user as f64 * diversity_average(gamma1, params.num_tx_antennas)
        + diversity_average(gamma2, params.num_tx_antennas)
}

/// The bound carries no information once it exceeds 1.
pub fn is_loose(bound: f64) -> bool {
    bound > 1.0
}

/// Chip SNR in dB at which the upper bound reaches `target`, by bisection
/// on `[lo_db, hi_db]`. Returns `None` if the target is not bracketed.
pub fn bound_crossing_db(config: &SystemConfig, target: f64, lo_db: f64, hi_db: f64) -> Option<f64> {
    let f = |db: f64| upper_bound_ber(&BoundParams::from_config(config, db_to_linear(db))) - target;
    let (mut lo, mut hi) = (lo_db, hi_db);
    if f(lo) < 0.0 || f(hi) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Per-user and base-station rates in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rates {
    /// `R_UE = 2m + 2`
    pub per_user: u64,
    /// Broadcast: `2 m N_u + 2`
    pub bs_min: u64,
    /// Unicast: `N_u (2m + 2)`
    pub bs_max: u64,
}

impl Rates {
    pub fn base_station(&self, mode: TrafficMode) -> u64 {
        match mode {
            TrafficMode::Broadcast => self.bs_min,
            TrafficMode::Unicast => self.bs_max,
        }
    }
}

pub fn rates(index_bits: u32, num_users: usize) -> Rates {
    let m = u64::from(index_bits);
    let nu = num_users as u64;
    Rates {
        per_user: 2 * m + 2,
        bs_min: 2 * m * nu + 2,
        bs_max: nu * (2 * m + 2),
    }
}

/// Private and common APM bits per channel use for one user of a
/// conventional (non-spread) SDMA downlink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SdmaSplit {
    pub private_bits: u64,
    pub common_bits: u64,
}

/// Exact spectral efficiency in bps/Hz.
pub type Utilization = Ratio<u64>;

/// Spectrum utilization in bps/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumUtilization {
    /// `(2m+2) / L_c`
    pub ue_grcim: Utilization,
    /// `R_BS / L_c`
    pub bs_grcim: Utilization,
    /// `m_{k,p} + m_{k,c}` per user.
    pub ue_sdma: Vec<u64>,
    /// `Σ_k (m_{k,p} + m_{k,c})`
    pub bs_sdma: u64,
    /// Spreading leaves GrCIM below the conventional scheme at the BS.
    pub grcim_lower: bool,
}

/// Panics if `code_length` is zero.
pub fn spectrum_utilization(
    index_bits: u32,
    code_length: usize,
    bs_rate: u64,
    sdma: &[SdmaSplit],
) -> SpectrumUtilization {
    let lc = code_length as u64;
    let ue_grcim = Ratio::new(2 * u64::from(index_bits) + 2, lc);
    let bs_grcim = Ratio::new(bs_rate, lc);
    let ue_sdma: Vec<u64> = sdma.iter().map(|s| s.private_bits + s.common_bits).collect();
    let bs_sdma = ue_sdma.iter().sum();
    SpectrumUtilization {
        ue_grcim,
        bs_grcim,
        grcim_lower: bs_grcim < Ratio::from_integer(bs_sdma),
        ue_sdma,
        bs_sdma,
    }
}

/// `E_c/N_0` in dB for a given `E_b/N_0` in dB, using `E_c = E_b Λ_BS`.
pub fn chip_snr_db_from_bit_snr_db(bit_snr_db: f64, bs_utilization: f64) -> f64 {
    bit_snr_db + linear_to_db(bs_utilization)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MaxUsers {
    /// `floor(L_c / N_c)`; equals `L_c` in the CDMA case `N_c = 1`.
    pub grcim: usize,
    /// One beam per transmit antenna.
    pub sdma: usize,
}

/// Panics if `codes_per_user` is zero.
pub fn max_users(code_length: usize, codes_per_user: usize, num_tx_antennas: usize) -> MaxUsers {
    MaxUsers {
        grcim: code_length / codes_per_user,
        sdma: num_tx_antennas,
    }
}

/// Everything needed to compare a GrCIM configuration with conventional SDMA.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rates: Rates,
    pub spectrum: SpectrumUtilization,
    pub max_users: MaxUsers,
}

/// `sdma` gives the conventional scheme's per-user bit split.
pub fn comparison_report(config: &SystemConfig, sdma: &[SdmaSplit]) -> ComparisonReport {
    let rates = rates(config.index_bits, config.num_users);
    ComparisonReport {
        spectrum: spectrum_utilization(
            config.index_bits,
            config.code_length,
            rates.base_station(config.traffic_mode),
            sdma,
        ),
        max_users: max_users(config.code_length, config.codes_per_user(), config.num_tx_antennas),
        rates,
    }
}
