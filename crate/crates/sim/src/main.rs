use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use grcim_core::analysis::{comparison_report, SdmaSplit, Utilization};
use grcim_core::channel::{NoiseCalibration, SystemConfig, TrafficMode};
use grcim_core::codebook::{generate_hadamard, group_codebook};
use grcim_sim::output::{codebook_json, read_spec, write_bound_csv, write_sidecar, write_sweep_csv};
use grcim_sim::{compare_configs, parse_snr_range, parse_variances, run_sweep, SnrAxis, StoppingRule, SweepSpec};
use serde_json::json;

/// Grouped code index modulation downlink: codebooks, analytical bounds and
/// Monte Carlo BER sweeps.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the Walsh-Hadamard matrix and per-user code assignment as JSON.
    Codebook {
        #[arg(long)]
        lc: usize,
        #[arg(long, default_value_t = 1)]
        nu: usize,
        #[arg(long, default_value_t = 1)]
        nc: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the closed-form upper-bound BER over an E_c/N_0 grid (CSV).
    Analyze {
        #[command(flatten)]
        system: SystemArgs,
        /// start:stop:step in dB
        #[arg(long = "snr-db", allow_hyphen_values = true)]
        snr_db: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print rates, spectrum utilization and user capacity as JSON.
    Metrics {
        #[command(flatten)]
        system: SystemArgs,
        /// Conventional SDMA split per user as private:common bits, comma separated.
        #[arg(long = "sdma-bits")]
        sdma_bits: Option<String>,
    },
    /// Run a Monte Carlo BER sweep; writes CSV plus a JSON sidecar.
    Simulate(SimulateArgs),
    /// Run several sweeps (from spec or sidecar JSON files) on a shared grid
    /// and evaluate the ordering claims.
    Compare {
        specs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long, default_value_t = 8)]
    lc: usize,
    #[arg(long, default_value_t = 2)]
    nt: usize,
    #[arg(long, default_value_t = 2)]
    nu: usize,
    /// Codes per user, a power of two.
    #[arg(long, default_value_t = 2)]
    nc: usize,
    /// Fading variance per user, comma separated; defaults to 1 for all.
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long, value_enum, default_value_t = Mode::Broadcast)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = Noise::Complex)]
    noise: Noise,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// start:stop:step in dB
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: String,
    /// Interpret the grid as E_c/N_0 (chip) or E_b/N_0 (bit).
    #[arg(long, value_enum, default_value_t = Axis::Chip)]
    axis: Axis,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long = "min-errors", default_value_t = 100)]
    min_errors: u64,
    #[arg(long = "max-symbols", default_value_t = 10_000_000)]
    max_symbols: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    label: Option<String>,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Broadcast,
    Unicast,
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    /// Complex noise variance N_0 (N_0/2 per rail).
    Complex,
    /// N_0/4 per rail.
    Quarter,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Chip,
    Bit,
}

fn index_bits(nc: usize) -> Result<u32> {
    if nc == 0 || !nc.is_power_of_two() {
        bail!("--nc must be a power of two, got {nc}");
    }
    Ok(nc.trailing_zeros())
}

impl SystemArgs {
    fn config(&self) -> Result<SystemConfig> {
        let mut cfg = SystemConfig::new(self.nt, self.nu, self.lc, index_bits(self.nc)?)
            .with_traffic_mode(match self.mode {
                Mode::Broadcast => TrafficMode::Broadcast,
                Mode::Unicast => TrafficMode::Unicast,
            })
            .with_noise(match self.noise {
                Noise::Complex => NoiseCalibration::ComplexVariance,
                Noise::Quarter => NoiseCalibration::QuarterPerRail,
            });
        if let Some(sigma) = &self.sigma {
            cfg = cfg.with_fading_variances(parse_variances(sigma)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn parse_splits(text: &str) -> Result<Vec<SdmaSplit>> {
    text.split(',')
        .map(|item| {
            let (p, c) = item
                .split_once(':')
                .with_context(|| format!("expected private:common, got {item:?}"))?;
            Ok(SdmaSplit {
                private_bits: p.trim().parse()?,
                common_bits: c.trim().parse()?,
            })
        })
        .collect()
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Codebook { lc, nu, nc, out } => {
            let h = generate_hadamard(lc)?;
            let g = group_codebook(&h, nu, nc)?;
            let mut w = output(out.as_deref())?;
            serde_json::to_writer(&mut w, &codebook_json(&h, &g))?;
            writeln!(w)?;
        }
        Command::Analyze { system, snr_db, out } => {
            let cfg = system.config()?;
            write_bound_csv(&cfg, &parse_snr_range(&snr_db)?, output(out.as_deref())?)?;
        }
        Command::Metrics { system, sdma_bits } => {
            let cfg = system.config()?;
            let splits = sdma_bits.as_deref().map(parse_splits).transpose()?.unwrap_or_default();
            let r = comparison_report(&cfg, &splits);
            let ratio = |x: Utilization| json!({"exact": format!("{}/{}", x.numer(), x.denom()), "value": *x.numer() as f64 / *x.denom() as f64});
            let report = json!({
                "rate_ue_bpcu": r.rates.per_user,
                "rate_bs_bpcu": {"min": r.rates.bs_min, "max": r.rates.bs_max},
                "spectrum_ue_grcim": ratio(r.spectrum.ue_grcim),
                "spectrum_bs_grcim": ratio(r.spectrum.bs_grcim),
                "spectrum_ue_sdma": r.spectrum.ue_sdma,
                "spectrum_bs_sdma": r.spectrum.bs_sdma,
                "grcim_lower_than_sdma": r.spectrum.grcim_lower,
                "max_users_grcim": r.max_users.grcim,
                "max_users_sdma": r.max_users.sdma,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Simulate(args) => {
            let mut spec = SweepSpec::new(args.system.config()?, parse_snr_range(&args.snr_db)?, args.seed)
                .with_axis(match args.axis {
                    Axis::Chip => SnrAxis::Chip,
                    Axis::Bit => SnrAxis::Bit,
                })
                .with_stopping(StoppingRule {
                    min_bit_errors: args.min_errors,
                    max_symbols: args.max_symbols,
                });
            spec.label = args.label;
            let result = run_sweep(&spec, args.threads)?;
            write_sweep_csv(&result, output(Some(&args.out))?)?;
            write_sidecar(&result, output(Some(&args.out.with_extension("json")))?)?;
            eprintln!(
                "{}: {} points in {:.1}s -> {}",
                result.label(),
                result.points.len(),
                result.wall_time.as_secs_f64(),
                args.out.display()
            );
        }
        Command::Compare { specs, out, threads } => {
            let specs = specs
                .iter()
                .map(|p| {
                    let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
                    Ok(read_spec(f)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let cmp = compare_configs(&specs, threads)?;
            cmp.write_table(output(Some(&out))?)?;
            cmp.write_claims(output(Some(&out.with_extension("claims.csv")))?)?;
            for c in &cmp.claims {
                eprintln!(
                    "{:?}: {} vs {} over {} points -> {}",
                    c.kind, c.better, c.worse, c.points_compared, c.holds
                );
            }
        }
    }
    Ok(())
}
