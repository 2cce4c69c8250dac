//! Rayleigh fading, zero-forcing precoding with fairness power allocation,
//! and complex AWGN.
//!
//! Conventions: user `k` sees `y_k[t] = h_kᴴ x[t] + n_k[t]` where `x[t]` is the
//! `N_T`-antenna transmit vector at chip instant `t`, and the precoder is
//! `w_k = β_k h_k / ‖h_k‖²`, so `h_kᴴ w_k = β_k`. Power is split as
//! `P_k = P / σ_k²` with `P = 1 / Σ 1/σ_i²`, which gives
//! `β_k = sqrt(P ‖h_k‖² / σ_k²)` and `Σ P_k = 1` for every realization.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TrafficMode {
    /// Every user carries the same common bits.
    #[default]
    Broadcast,
    /// Every user carries its own common bits.
    Unicast,
}

/// How the noise density `N_0` maps onto per-rail noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NoiseCalibration {
    /// Complex noise samples of total variance `N_0` (`N_0/2` per rail).
    /// Correlator noise then has variance `L_c N_0 / 2` per rail.
    #[default]
    ComplexVariance,
    /// `N_0/4` per rail, so correlator noise has variance `L_c N_0 / 4`.
    QuarterPerRail,
}

impl NoiseCalibration {
    pub fn rail_variance(self, noise_density: f64) -> f64 {
        match self {
            NoiseCalibration::ComplexVariance => noise_density / 2.0,
            NoiseCalibration::QuarterPerRail => noise_density / 4.0,
        }
    }
}

/// Scenario parameters shared by the link simulator and the analysis.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SystemConfig {
    /// `N_T`
    pub num_tx_antennas: usize,
    /// `N_u`
    pub num_users: usize,
    /// `L_c`
    pub code_length: usize,
    /// `m`, so that `N_c = 2^m`.
    pub index_bits: u32,
    /// `σ_k²` per user.
    pub fading_variances: Vec<f64>,
    pub traffic_mode: TrafficMode,
    #[cfg_attr(feature = "serde", serde(default))]
    pub noise: NoiseCalibration,
}

impl SystemConfig {
    /// Unit fading variance for every user, broadcast traffic.
    pub fn new(num_tx_antennas: usize, num_users: usize, code_length: usize, index_bits: u32) -> Self {
        Self {
            num_tx_antennas,
            num_users,
            code_length,
            index_bits,
            fading_variances: vec![1.0; num_users],
            traffic_mode: TrafficMode::Broadcast,
            noise: NoiseCalibration::default(),
        }
    }

    pub fn with_fading_variances(mut self, variances: Vec<f64>) -> Self {
        self.fading_variances = variances;
        self
    }

    pub fn with_traffic_mode(mut self, mode: TrafficMode) -> Self {
        self.traffic_mode = mode;
        self
    }

    pub fn with_noise(mut self, noise: NoiseCalibration) -> Self {
        self.noise = noise;
        self
    }

    /// `N_c = 2^m`
    pub fn codes_per_user(&self) -> usize {
        1usize << self.index_bits
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_tx_antennas == 0 {
            return Err(Error::InvalidParameter("at least one transmit antenna is required"));
        }
        if self.num_users == 0 {
            return Err(Error::InvalidParameter("at least one user is required"));
        }
        if self.code_length < 2 || !self.code_length.is_power_of_two() {
            return Err(Error::CodeLength(self.code_length));
        }
        if self.index_bits >= usize::BITS - 1 {
            return Err(Error::InvalidParameter("index bits out of range"));
        }
        if self.num_users.saturating_mul(self.codes_per_user()) > self.code_length {
            return Err(Error::Capacity {
                num_users: self.num_users,
                codes_per_user: self.codes_per_user(),
                code_length: self.code_length,
            });
        }
        if self.fading_variances.len() != self.num_users {
            return Err(Error::Framing {
                expected: self.num_users,
                actual: self.fading_variances.len(),
            });
        }
        if !self.fading_variances.iter().all(|&v| v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter("fading variances must be positive and finite"));
        }
        Ok(())
    }

    /// Normalization coefficient `P = 1 / Σ_i 1/σ_i²`.
    pub fn power_coefficient(&self) -> f64 {
        1.0 / self.fading_variances.iter().map(|v| v.recip()).sum::<f64>()
    }

    /// Allocated power `P_k = P / σ_k²`.
    pub fn user_power(&self, user: usize) -> f64 {
        self.power_coefficient() / self.fading_variances[user]
    }
}

/// One block-fading draw: channel vectors and the derived power factors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelRealization {
    num_tx: usize,
    fading: Vec<Complex64>,
    norms_sqr: Vec<f64>,
    beta: Vec<f64>,
    power_coefficient: f64,
}

impl ChannelRealization {
    /// Builds a realization from explicit channel vectors (one per user).
    pub fn from_channels(config: &SystemConfig, channels: &[Vec<Complex64>]) -> Result<Self> {
        config.validate()?;
        if channels.len() != config.num_users {
            return Err(Error::Framing {
                expected: config.num_users,
                actual: channels.len(),
            });
        }
        let mut out = Self::default();
        out.reset(config);
        for (k, h) in channels.iter().enumerate() {
            if h.len() != config.num_tx_antennas {
                return Err(Error::Framing {
                    expected: config.num_tx_antennas,
                    actual: h.len(),
                });
            }
            out.fading[k * out.num_tx..(k + 1) * out.num_tx].copy_from_slice(h);
        }
        out.derive_power(config);
        Ok(out)
    }

    fn reset(&mut self, config: &SystemConfig) {
        self.num_tx = config.num_tx_antennas;
        self.fading.clear();
        self.fading
            .resize(config.num_users * config.num_tx_antennas, Complex64::new(0.0, 0.0));
        self.norms_sqr.clear();
        self.beta.clear();
    }

    fn derive_power(&mut self, config: &SystemConfig) {
        let p = config.power_coefficient();
        self.power_coefficient = p;
        self.norms_sqr.clear();
        self.beta.clear();
        for (h, &var) in self.fading.chunks_exact(self.num_tx).zip(&config.fading_variances) {
            let norm_sqr: f64 = h.iter().map(Complex64::norm_sqr).sum();
            self.norms_sqr.push(norm_sqr);
            self.beta.push(libm::sqrt(p * norm_sqr / var));
        }
    }

    pub fn num_users(&self) -> usize {
        self.beta.len()
    }

    pub fn num_tx_antennas(&self) -> usize {
        self.num_tx
    }

    /// `h_k`
    pub fn fading(&self, user: usize) -> &[Complex64] {
        &self.fading[user * self.num_tx..(user + 1) * self.num_tx]
    }

    /// `‖h_k‖²`
    pub fn norm_sqr(&self, user: usize) -> f64 {
        self.norms_sqr[user]
    }

    /// `β_k`
    pub fn beta(&self, user: usize) -> f64 {
        self.beta[user]
    }

    /// `P`
    pub fn power_coefficient(&self) -> f64 {
        self.power_coefficient
    }

    /// Transmit power spent on `user`: `β_k² / ‖h_k‖²`.
    pub fn user_power(&self, user: usize) -> f64 {
        self.beta[user] * self.beta[user] / self.norms_sqr[user]
    }

    /// `w_k = β_k h_k / ‖h_k‖²`
    pub fn precoder(&self, user: usize) -> Result<Vec<Complex64>> {
        let norm_sqr = self.norms_sqr[user];
        if norm_sqr <= 0.0 {
            return Err(Error::DegenerateChannel { user });
        }
        let scale = self.beta[user] / norm_sqr;
        Ok(self.fading(user).iter().map(|h| h * scale).collect())
    }

    /// `h_kᴴ w_i`, the gain user `receiver` sees on user `transmitter`'s stream.
    pub fn effective_gain(&self, receiver: usize, transmitter: usize) -> Result<Complex64> {
        let w = self.precoder(transmitter)?;
        Ok(self.fading(receiver).iter().zip(&w).map(|(h, w)| h.conj() * w).sum())
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, rail_std: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * rail_std, im * rail_std)
}

/// Draws i.i.d. `CN(0, σ_k²)` channel entries for every user and derives `β_k`.
pub fn draw_channel<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> Result<ChannelRealization> {
    config.validate()?;
    let mut out = ChannelRealization::default();
    draw_channel_into(config, rng, &mut out);
    Ok(out)
}

/// Like [`draw_channel`], reusing `out`'s storage. `config` must be valid.
pub fn draw_channel_into<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R, out: &mut ChannelRealization) {
    out.reset(config);
    let num_tx = out.num_tx;
    for (h, &var) in out.fading.chunks_exact_mut(num_tx).zip(&config.fading_variances) {
        let rail_std = libm::sqrt(var / 2.0);
        for entry in h {
            *entry = complex_normal(rng, rail_std);
        }
    }
    out.derive_power(config);
}

/// Precoded transmit signal, `N_T` antenna samples per chip instant.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransmitFrame {
    num_tx: usize,
    samples: Vec<Complex64>,
}

impl TransmitFrame {
    pub fn num_tx_antennas(&self) -> usize {
        self.num_tx
    }

    pub fn num_chips(&self) -> usize {
        self.samples.len().checked_div(self.num_tx).unwrap_or(0)
    }

    /// Antenna samples `x[t]` at chip instant `t`.
    pub fn chip(&self, t: usize) -> &[Complex64] {
        &self.samples[t * self.num_tx..(t + 1) * self.num_tx]
    }

    /// Total transmitted energy `Σ_t ‖x[t]‖²`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(Complex64::norm_sqr).sum()
    }
}

/// `x[t] = Σ_k w_k · chips_k[t]`
pub fn zf_precode<C: AsRef<[Complex64]>>(
    realization: &ChannelRealization,
    per_user_chips: &[C],
) -> Result<TransmitFrame> {
    let mut frame = TransmitFrame::default();
    zf_precode_into(realization, per_user_chips, &mut frame)?;
    Ok(frame)
}

pub fn zf_precode_into<C: AsRef<[Complex64]>>(
    realization: &ChannelRealization,
    per_user_chips: &[C],
    frame: &mut TransmitFrame,
) -> Result<()> {
    if per_user_chips.len() != realization.num_users() {
        return Err(Error::Framing {
            expected: realization.num_users(),
            actual: per_user_chips.len(),
        });
    }
    let num_chips = per_user_chips.first().map_or(0, |c| c.as_ref().len());
    let num_tx = realization.num_tx;
    frame.num_tx = num_tx;
    frame.samples.clear();
    frame.samples.resize(num_chips * num_tx, Complex64::new(0.0, 0.0));
    for (k, chips) in per_user_chips.iter().enumerate() {
        let chips = chips.as_ref();
        if chips.len() != num_chips {
            return Err(Error::Framing {
                expected: num_chips,
                actual: chips.len(),
            });
        }
        let norm_sqr = realization.norms_sqr[k];
        if norm_sqr <= 0.0 {
            return Err(Error::DegenerateChannel { user: k });
        }
        let scale = realization.beta[k] / norm_sqr;
        let h = realization.fading(k);
        for (x, chip) in frame.samples.chunks_exact_mut(num_tx).zip(chips) {
            let c = chip * scale;
            for (xa, ha) in x.iter_mut().zip(h) {
                *xa += ha * c;
            }
        }
    }
    Ok(())
}

/// Per-user received chip sequences.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReceivedFrame {
    code_length: usize,
    noise_density: f64,
    samples: Vec<Complex64>,
}

impl ReceivedFrame {
    /// `y_k`
    pub fn user(&self, user: usize) -> &[Complex64] {
        &self.samples[user * self.code_length..(user + 1) * self.code_length]
    }

    pub fn num_users(&self) -> usize {
        self.samples.len().checked_div(self.code_length).unwrap_or(0)
    }

    pub fn code_length(&self) -> usize {
        self.code_length
    }

    /// `N_0`
    pub fn noise_density(&self) -> f64 {
        self.noise_density
    }
}

/// Passes the frame through every user's channel and adds complex AWGN.
pub fn apply_channel<R: Rng + ?Sized>(
    frame: &TransmitFrame,
    realization: &ChannelRealization,
    noise_density: f64,
    calibration: NoiseCalibration,
    rng: &mut R,
) -> Result<ReceivedFrame> {
    let mut out = ReceivedFrame::default();
    apply_channel_into(frame, realization, noise_density, calibration, rng, &mut out)?;
    Ok(out)
}

pub fn apply_channel_into<R: Rng + ?Sized>(
    frame: &TransmitFrame,
    realization: &ChannelRealization,
    noise_density: f64,
    calibration: NoiseCalibration,
    rng: &mut R,
    out: &mut ReceivedFrame,
) -> Result<()> {
    if noise_density.is_nan() || noise_density < 0.0 || noise_density.is_infinite() {
        return Err(Error::InvalidParameter("noise density must be finite and non-negative"));
    }
    if frame.num_tx != realization.num_tx {
        return Err(Error::Framing {
            expected: realization.num_tx,
            actual: frame.num_tx,
        });
    }
    let num_chips = frame.num_chips();
    let rail_std = libm::sqrt(calibration.rail_variance(noise_density));
    out.code_length = num_chips;
    out.noise_density = noise_density;
    out.samples.clear();
    out.samples.reserve(num_chips * realization.num_users());
    for k in 0..realization.num_users() {
        let h = realization.fading(k);
        for x in frame.samples.chunks_exact(frame.num_tx) {
            let mut y: Complex64 = h.iter().zip(x).map(|(h, x)| h.conj() * x).sum();
            if rail_std > 0.0 {
                y += complex_normal(rng, rail_std);
            }
            out.samples.push(y);
        }
    }
    Ok(())
}
