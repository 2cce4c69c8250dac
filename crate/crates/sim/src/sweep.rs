use std::time::{Duration, Instant};

use grcim_core::analysis::{chip_snr_db_from_bit_snr_db, db_to_linear, is_loose, rates, upper_bound_ber, BoundParams};
use grcim_core::channel::SystemConfig;
use grcim_core::link::{Link, UserCounts};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::SweepError;

/// Symbols per work block. Part of the reproducibility contract: changing it
/// changes every result.
pub const BLOCK_SYMBOLS: u64 = 1024;
/// Waves start at one block and double up to this many.
const MAX_WAVE_BLOCKS: u64 = 256;

/// Which SNR the grid values refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrAxis {
    /// `E_c/N_0` per spreading chip.
    #[default]
    Chip,
    /// `E_b/N_0` per information bit, with `E_c = E_b R_BS / L_c`.
    Bit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingRule {
    /// Stop a point once every user has at least this many bit errors ...
    pub min_bit_errors: u64,
    /// ... or after this many symbols, whichever comes first.
    pub max_symbols: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            min_bit_errors: 100,
            max_symbols: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub config: SystemConfig,
    /// Grid in dB on `axis`, strictly increasing.
    pub snr_grid_db: Vec<f64>,
    #[serde(default)]
    pub axis: SnrAxis,
    #[serde(default)]
    pub stopping: StoppingRule,
    pub master_seed: u64,
}

impl SweepSpec {
    pub fn new(config: SystemConfig, snr_grid_db: Vec<f64>, master_seed: u64) -> Self {
        Self {
            label: None,
            config,
            snr_grid_db,
            axis: SnrAxis::Chip,
            stopping: StoppingRule::default(),
            master_seed,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_axis(mut self, axis: SnrAxis) -> Self {
        self.axis = axis;
        self
    }

    pub fn with_stopping(mut self, stopping: StoppingRule) -> Self {
        self.stopping = stopping;
        self
    }

    /// The explicit label, or one derived from `N_T`, `N_u`, `L_c`, `N_c`.
    pub fn display_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            let c = &self.config;
            format!(
                "nt{}_nu{}_lc{}_nc{}",
                c.num_tx_antennas,
                c.num_users,
                c.code_length,
                c.codes_per_user()
            )
        })
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        self.config.validate()?;
        if self.snr_grid_db.is_empty() {
            return Err(SweepError::InvalidSpec("SNR grid is empty".into()));
        }
        if self.snr_grid_db.iter().any(|x| !x.is_finite()) {
            return Err(SweepError::InvalidSpec("SNR grid has non-finite values".into()));
        }
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SweepError::InvalidSpec("SNR grid must be strictly increasing".into()));
        }
        if self.stopping.min_bit_errors == 0 || self.stopping.max_symbols == 0 {
            return Err(SweepError::InvalidSpec("stopping thresholds must be positive".into()));
        }
        Ok(())
    }

    /// Base-station spectral efficiency `Λ_BS = R_BS / L_c` in bps/Hz.
    pub fn bs_utilization(&self) -> f64 {
        let r = rates(self.config.index_bits, self.config.num_users).base_station(self.config.traffic_mode);
        r as f64 / self.config.code_length as f64
    }

    /// `E_c/N_0` in dB for a grid value.
    pub fn chip_snr_db(&self, grid_db: f64) -> f64 {
        match self.axis {
            SnrAxis::Chip => grid_db,
            SnrAxis::Bit => chip_snr_db_from_bit_snr_db(grid_db, self.bs_utilization()),
        }
    }

    /// Short SHA-256 digest of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("sweep specs always serialize");
        Sha256::digest(&json)
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointFlag {
    /// The analytical bound exceeds 1.
    BoundLoose,
    /// `max_symbols` was reached before every user collected `min_bit_errors`.
    MaxSymbols,
    /// No errors at all; the BER is below this one-sided 95% estimate (3/bits).
    NoErrors { ber_below: f64 },
}

impl std::fmt::Display for PointFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PointFlag::BoundLoose => f.write_str("bound_loose"),
            PointFlag::MaxSymbols => f.write_str("max_symbols"),
            PointFlag::NoErrors { ber_below } => write!(f, "no_errors_ber_below={ber_below:.3e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserPoint {
    /// 0-based user index.
    pub user: usize,
    pub private_bits: u64,
    pub private_errors: u64,
    pub common_bits: u64,
    pub common_errors: u64,
    pub flags: Vec<PointFlag>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl UserPoint {
    pub fn bits(&self) -> u64 {
        self.private_bits + self.common_bits
    }

    pub fn errors(&self) -> u64 {
        self.private_errors + self.common_errors
    }

    pub fn ber(&self) -> f64 {
        ratio(self.errors(), self.bits())
    }

    pub fn ber_private(&self) -> f64 {
        ratio(self.private_errors, self.private_bits)
    }

    pub fn ber_common(&self) -> f64 {
        ratio(self.common_errors, self.common_bits)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Grid value on the sweep's axis.
    pub snr_db: f64,
    pub chip_snr_db: f64,
    pub bound_ber: f64,
    pub symbols: u64,
    pub users: Vec<UserPoint>,
}

impl SweepPoint {
    /// Bits and errors summed over all users.
    pub fn totals(&self) -> (u64, u64) {
        self.users
            .iter()
            .fold((0, 0), |(b, e), u| (b + u.bits(), e + u.errors()))
    }

    pub fn ber(&self) -> f64 {
        let (bits, errors) = self.totals();
        ratio(errors, bits)
    }

    pub fn min_user_errors(&self) -> u64 {
        self.users.iter().map(UserPoint::errors).min().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BerSweepResult {
    pub spec: SweepSpec,
    pub config_hash: String,
    pub wall_time: Duration,
    pub points: Vec<SweepPoint>,
}

impl BerSweepResult {
    pub fn label(&self) -> String {
        self.spec.display_label()
    }
}

fn block_rng(master_seed: u64, point: usize, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((point as u64) << 32) | block);
    rng
}

fn simulate_point(spec: &SweepSpec, point: usize, noise_density: f64) -> Result<(u64, Vec<UserCounts>), SweepError> {
    let nu = spec.config.num_users;
    let StoppingRule {
        min_bit_errors,
        max_symbols,
    } = spec.stopping;
    let mut totals = vec![UserCounts::default(); nu];
    let mut symbols = 0u64;
    let mut next_block = 0u64;
    let mut wave_blocks = 1u64;
    while symbols < max_symbols && totals.iter().any(|c| c.errors() < min_bit_errors) {
        let mut jobs = Vec::new();
        let mut planned = symbols;
        while (jobs.len() as u64) < wave_blocks && planned < max_symbols {
            let n = BLOCK_SYMBOLS.min(max_symbols - planned);
            jobs.push((next_block, n));
            next_block += 1;
            planned += n;
        }
        let partials = jobs
            .par_iter()
            .map_init(
                || Link::new(spec.config.clone()),
                |link, &(block, n)| -> Result<Vec<UserCounts>, SweepError> {
                    let link = link.as_mut().map_err(|e| e.clone())?;
                    let mut rng = block_rng(spec.master_seed, point, block);
                    let mut counts = vec![UserCounts::default(); nu];
                    link.run(noise_density, n, &mut rng, &mut counts)?;
                    Ok(counts)
                },
            )
            .collect::<Result<Vec<_>, _>>()?;
        for counts in partials {
            for (total, c) in totals.iter_mut().zip(counts) {
                *total += c;
            }
        }
        symbols = planned;
        wave_blocks = (wave_blocks * 2).min(MAX_WAVE_BLOCKS);
    }
    Ok((symbols, totals))
}

/// Runs the Monte Carlo sweep on `workers` threads (all cores if `None`).
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<BerSweepResult, SweepError> {
    spec.validate()?;
    let started = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let mut points = Vec::with_capacity(spec.snr_grid_db.len());
    for (p, &snr_db) in spec.snr_grid_db.iter().enumerate() {
        let chip_snr_db = spec.chip_snr_db(snr_db);
        let chip_snr = db_to_linear(chip_snr_db);
        // Unit chip energy, so N_0 = 1 / (E_c/N_0).
        let noise_density = chip_snr.recip();
        let (symbols, totals) = pool.install(|| simulate_point(spec, p, noise_density))?;
        let bound_ber = upper_bound_ber(&BoundParams::from_config(&spec.config, chip_snr));
        let users = totals
            .iter()
            .enumerate()
            .map(|(user, c)| {
                let mut flags = Vec::new();
                if is_loose(bound_ber) {
                    flags.push(PointFlag::BoundLoose);
                }
                if c.errors() < spec.stopping.min_bit_errors {
                    flags.push(PointFlag::MaxSymbols);
                }
                if c.errors() == 0 {
                    flags.push(PointFlag::NoErrors {
                        ber_below: 3.0 / c.bits() as f64,
                    });
                }
                UserPoint {
                    user,
                    private_bits: c.private_bits,
                    private_errors: c.private_errors,
                    common_bits: c.common_bits,
                    common_errors: c.common_errors,
                    flags,
                }
            })
            .collect();
        points.push(SweepPoint {
            snr_db,
            chip_snr_db,
            bound_ber,
            symbols,
            users,
        });
    }
    Ok(BerSweepResult {
        config_hash: spec.config_hash(),
        spec: spec.clone(),
        wall_time: started.elapsed(),
        points,
    })
}
