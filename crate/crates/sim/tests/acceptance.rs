//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p grcim-sim --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use grcim_core::analysis::{
    bound_crossing_db, comparison_report, conditional_pep, db_to_linear, max_users, rates, spectrum_utilization,
    upper_bound_ber, BoundParams, PepKind, SdmaSplit,
};
use grcim_core::channel::{draw_channel, SystemConfig, TrafficMode};
use grcim_core::codebook::generate_hadamard;
use grcim_core::link::Link;
use grcim_core::modem::{bits_to_symbol, symbol_to_bits, word_len, CimSymbol};
use grcim_core::Complex64;
use grcim_sim::output::write_sweep_csv;
use grcim_sim::{compare_configs, run_sweep, ClaimKind, SnrAxis, StoppingRule, SweepSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn orthogonality() -> Outcome {
    for lc in [2usize, 4, 8, 16, 32] {
        let h = generate_hadamard(lc).map_err(|e| e.to_string())?;
        for i in 0..lc {
            for k in 0..lc {
                let dot: i64 = h
                    .row(i)
                    .iter()
                    .zip(h.row(k))
                    .map(|(&a, &b)| i64::from(a) * i64::from(b))
                    .sum();
                let want = if i == k { lc as i64 } else { 0 };
                ensure(dot == want, || format!("L_c={lc} rows {i},{k}: dot {dot}"))?;
            }
        }
    }
    Ok("L_c in {2,4,8,16,32}, all row pairs exact".into())
}

fn noiseless_loopback() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut configs = 0;
    let mut words = 0u64;
    for lc in [2usize, 4, 8, 16] {
        let mut m = 0u32;
        while (1usize << m) <= lc {
            let nc = 1usize << m;
            for nu in 1..=lc / nc {
                let cfg = SystemConfig::new(2, nu, lc, m);
                let mut link = Link::new(cfg).map_err(|e| e.to_string())?;
                let count = 1u64 << word_len(m);
                for w in 0..count {
                    // User k carries word w + k, so co-scheduled users send different words.
                    let sent: Vec<CimSymbol> = (0..nu as u64)
                        .map(|k| {
                            let word = (w + k) % count;
                            let bits: Vec<bool> = (0..word_len(m)).rev().map(|b| word >> b & 1 == 1).collect();
                            bits_to_symbol(&bits, m).unwrap()
                        })
                        .collect();
                    let detected = link.transmit(&sent, 0.0, &mut rng).map_err(|e| e.to_string())?;
                    for (k, (s, d)) in sent.iter().zip(detected).enumerate() {
                        let (a, b) = (symbol_to_bits(s, m).unwrap(), symbol_to_bits(d, m).unwrap());
                        ensure(a == b, || {
                            format!("L_c={lc} N_c={nc} N_u={nu} user {k}: {s:?} -> {d:?}")
                        })?;
                    }
                    words += nu as u64;
                }
                configs += 1;
            }
            m += 1;
        }
    }
    Ok(format!("{configs} configurations, {words} words, zero errors"))
}

fn power_and_zf() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let setups = [
        SystemConfig::new(2, 2, 8, 1),
        SystemConfig::new(4, 4, 16, 1).with_fading_variances(vec![1.0, 4.0, 0.3, 2.5]),
        SystemConfig::new(4, 2, 8, 2).with_fading_variances(vec![1.0, 4.0]),
        SystemConfig::new(2, 8, 8, 0).with_fading_variances((1..=8).map(|i| i as f64 * 0.7).collect()),
    ];
    let (mut worst_sum, mut worst_zf) = (0.0f64, 0.0f64);
    for i in 0..10_000 {
        let cfg = &setups[i % setups.len()];
        let r = draw_channel(cfg, &mut rng).map_err(|e| e.to_string())?;
        let total: f64 = (0..cfg.num_users).map(|k| r.user_power(k)).sum();
        worst_sum = worst_sum.max((total - 1.0).abs());
        for k in 0..cfg.num_users {
            let w = r.precoder(k).map_err(|e| e.to_string())?;
            let g: Complex64 = r.fading(k).iter().zip(&w).map(|(h, w)| h.conj() * w).sum();
            worst_zf = worst_zf.max((g - r.beta(k)).norm());
        }
    }
    ensure(worst_sum < 1e-12, || format!("max |sum P_k - 1| = {worst_sum:.3e}"))?;
    ensure(worst_zf < 1e-10, || format!("max |h^H w - beta| = {worst_zf:.3e}"))?;
    Ok(format!(
        "10^4 realizations, max |sum P_k - 1| = {worst_sum:.1e}, max |h^H w - beta| = {worst_zf:.1e}"
    ))
}

const ORACLE_DRAWS: usize = 1_000_000;

/// Importance-sampled estimate of `E[pep(β)]` with `β² = P ‖h‖²`,
/// `h ~ CN(0, I_{N_T})`. Channels are drawn with per-entry variance `τ` and
/// reweighted by `τ^N exp(‖h‖² (1/τ - 1))`.
fn sampled_pep(params: &BoundParams, kind: PepKind, tau: f64, rng: &mut ChaCha8Rng) -> f64 {
    let nt = params.num_tx_antennas;
    let scale = (tau / 2.0).sqrt();
    let prefactor = tau.powi(nt as i32);
    let mut acc = 0.0;
    for _ in 0..ORACLE_DRAWS {
        let mut x = 0.0;
        for _ in 0..2 * nt {
            let z: f64 = rng.sample(StandardNormal);
            x += (scale * z).powi(2);
        }
        let weight = prefactor * (x * (1.0 / tau - 1.0)).exp();
        let beta = (params.power_coefficient * x).sqrt();
        acc += weight * conditional_pep(beta, params.code_length, params.chip_snr, kind);
    }
    acc / ORACLE_DRAWS as f64
}

fn bound_vs_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = (0.0f64, String::new());
    let mut cases = 0;
    for nt in [2usize, 4] {
        for lc in [8usize, 16] {
            for m in [1u32, 2] {
                let cfg = SystemConfig::new(nt, 2, lc, m);
                for db in 0..=12 {
                    let snr = db_to_linear(f64::from(db));
                    let params = BoundParams::from_config(&cfg, snr);
                    let (g1, g2) = params.gammas();
                    let index = sampled_pep(&params, PepKind::Index, 1.0 / (1.0 + g1), &mut rng);
                    let bpsk = sampled_pep(&params, PepKind::Bpsk, 1.0 / (1.0 + g2), &mut rng);
                    let oracle = cfg.codes_per_user() as f64 * index + bpsk;
                    let closed = upper_bound_ber(&params);
                    let rel = (closed - oracle).abs() / oracle;
                    if rel > worst.0 {
                        worst = (rel, format!("N_T={nt} L_c={lc} N_c={} {db} dB", 1 << m));
                    }
                    cases += 1;
                    ensure(rel < 0.01, || {
                        format!(
                            "N_T={nt} L_c={lc} N_c={} {db} dB: closed {closed:.6e} vs oracle {oracle:.6e}",
                            1 << m
                        )
                    })?;
                }
            }
        }
    }
    Ok(format!(
        "{cases} grid points, 10^6 draws each, worst rel err {:.2e} at {}",
        worst.0, worst.1
    ))
}

/// SNR (dB) at which a decreasing BER curve crosses `target`, interpolating
/// linearly in log10(BER) between the two bracketing points.
fn log_crossing(points: &[(f64, f64)], target: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        (y0 >= target && y1 < target && y1 > 0.0).then(|| {
            let (l0, l1, lt) = (y0.log10(), y1.log10(), target.log10());
            x0 + (x1 - x0) * (l0 - lt) / (l0 - l1)
        })
    })
}

fn figure_reproduction() -> Outcome {
    const TARGET: f64 = 1e-4;
    let setups = [
        (2usize, 1u32, 2usize),
        (2, 2, 2),
        (4, 1, 2),
        (4, 2, 2),
        (2, 1, 4),
        (4, 1, 4),
    ];
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for (seed, &(nt, m, nu)) in setups.iter().enumerate() {
        let cfg = SystemConfig::new(nt, nu, 8, m);
        let crossing = bound_crossing_db(&cfg, TARGET, -20.0, 60.0).ok_or("bound never reaches 1e-4")?;
        let last = (crossing * 2.0).ceil() / 2.0;
        let grid: Vec<f64> = (0..=(last * 2.0) as usize).map(|i| i as f64 * 0.5).collect();
        let spec = SweepSpec::new(cfg, grid, 100 + seed as u64).with_stopping(StoppingRule {
            min_bit_errors: 1000,
            max_symbols: 20_000_000,
        });
        let result = run_sweep(&spec, None).map_err(|e| e.to_string())?;
        let label = result.label();
        for p in &result.points {
            for u in &p.users {
                if u.errors() >= 100 && u.ber() > p.bound_ber {
                    failures.push(format!(
                        "{label} user {} at {} dB: sim {:.3e} > bound {:.3e}",
                        u.user + 1,
                        p.snr_db,
                        u.ber(),
                        p.bound_ber
                    ));
                }
            }
        }
        let curve: Vec<(f64, f64)> = result
            .points
            .iter()
            .filter(|p| p.min_user_errors() >= 100)
            .map(|p| (p.snr_db, p.ber()))
            .collect();
        let limit = if nt == 4 { 0.5 } else { 2.0 };
        match log_crossing(&curve, TARGET) {
            Some(sim) => {
                let gap = crossing - sim;
                summary.push(format!("{label} gap {gap:.2} dB"));
                if gap >= limit {
                    failures.push(format!("{label}: gap {gap:.3} dB >= {limit} dB"));
                }
            }
            None => failures.push(format!(
                "{label}: simulated curve does not cross 1e-4 with >= 100 errors"
            )),
        }
    }
    if failures.is_empty() {
        Ok(format!("sim <= bound everywhere; {}", summary.join(", ")))
    } else {
        Err(failures.join("; "))
    }
}

fn ordering_claims() -> Outcome {
    let stopping = StoppingRule {
        min_bit_errors: 1000,
        max_symbols: 10_000_000,
    };
    let grid: Vec<f64> = (0..=12).map(f64::from).collect();
    let spec = |nt, nu, m, axis, seed| {
        SweepSpec::new(SystemConfig::new(nt, nu, 8, m), grid.clone(), seed)
            .with_axis(axis)
            .with_stopping(stopping)
    };
    // Antennas and users on the chip-SNR axis. Codes per user on the bit-SNR
    // axis, where the extra index bits are credited to the energy budget.
    let chip = compare_configs(
        &[
            spec(2, 2, 1, SnrAxis::Chip, 21),
            spec(4, 2, 1, SnrAxis::Chip, 22),
            spec(2, 4, 1, SnrAxis::Chip, 23),
        ],
        None,
    )
    .map_err(|e| e.to_string())?;
    let bit = compare_configs(
        &[spec(2, 2, 1, SnrAxis::Bit, 24), spec(2, 2, 2, SnrAxis::Bit, 25)],
        None,
    )
    .map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut ok = true;
    for (cmp, kind) in [
        (&chip, ClaimKind::MoreAntennasBetter),
        (&bit, ClaimKind::MoreCodesBetter),
        (&chip, ClaimKind::MoreUsersWorse),
    ] {
        let claims: Vec<_> = cmp.claims_of(kind).collect();
        ok &= claims.len() == 1 && claims[0].holds;
        for c in claims {
            lines.push(format!(
                "{kind:?} {} vs {} over {} points: {}",
                c.better, c.worse, c.points_compared, c.holds
            ));
        }
    }
    if ok {
        Ok(lines.join("; "))
    } else {
        Err(lines.join("; "))
    }
}

fn fairness() -> Outcome {
    let cfg = SystemConfig::new(2, 2, 8, 1).with_fading_variances(vec![1.0, 4.0]);
    let spec = SweepSpec::new(cfg.clone(), vec![6.0], 31).with_stopping(StoppingRule {
        min_bit_errors: 2000,
        max_symbols: 50_000_000,
    });
    let result = run_sweep(&spec, None).map_err(|e| e.to_string())?;
    let p = &result.points[0];
    let (a, b) = (&p.users[0], &p.users[1]);
    ensure(a.errors() >= 1000 && b.errors() >= 1000, || {
        format!("too few errors: {} and {}", a.errors(), b.errors())
    })?;
    let (n1, n2) = (a.bits() as f64, b.bits() as f64);
    let pooled = (a.errors() + b.errors()) as f64 / (n1 + n2);
    let z = (a.ber() - b.ber()) / (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    ensure(z.abs() < 2.575_829_303_549, || {
        format!("z = {z:.3} rejects equality (BER {:.4e} vs {:.4e})", a.ber(), b.ber())
    })?;
    // Each user's bound depends on its average SNR P_k σ_k² L_c E_c/N_0.
    let snr = db_to_linear(6.0);
    let per_user: Vec<f64> = (0..2)
        .map(|k| {
            let mut params = BoundParams::from_config(&cfg, snr);
            params.power_coefficient = cfg.user_power(k) * cfg.fading_variances[k];
            upper_bound_ber(&params)
        })
        .collect();
    ensure((per_user[0] - per_user[1]).abs() <= 1e-15 * per_user[0], || {
        format!("bounds differ: {:.17e} vs {:.17e}", per_user[0], per_user[1])
    })?;
    ensure((per_user[0] - p.bound_ber).abs() <= 1e-15 * per_user[0], || {
        format!("per-user bound {:.17e} vs reported {:.17e}", per_user[0], p.bound_ber)
    })?;
    Ok(format!(
        "BER {:.4e} ({} errors) vs {:.4e} ({} errors), z = {z:.3}, bound {:.4e} for both",
        a.ber(),
        a.errors(),
        b.ber(),
        b.errors(),
        p.bound_ber
    ))
}

fn metrics() -> Outcome {
    use num_rational::Ratio;
    ensure(rates(2, 1).per_user == 6, || "m=2 should give R_UE = 6".into())?;
    let r = rates(1, 4);
    ensure(r.bs_min == 10 && r.bs_max == 16, || format!("m=1, N_u=4: {r:?}"))?;
    for m in 0..6u32 {
        for nu in 1..9usize {
            let r = rates(m, nu);
            let (mm, n) = (u64::from(m), nu as u64);
            ensure(r.per_user == 2 * mm + 2, || format!("R_UE for m={m}"))?;
            ensure(r.bs_min == 2 * mm * n + 2 && r.bs_max == n * (2 * mm + 2), || {
                format!("R_BS for m={m}, N_u={nu}: {r:?}")
            })?;
            ensure(r.bs_min <= r.bs_max, || {
                format!("R_BS range inverted for m={m}, N_u={nu}")
            })?;
        }
    }
    let s = spectrum_utilization(2, 8, rates(2, 2).bs_min, &[]);
    ensure(s.ue_grcim == Ratio::new(3, 4), || format!("m=2, L_c=8: {}", s.ue_grcim))?;
    ensure(s.bs_grcim == Ratio::new(10, 8), || {
        format!("BS utilization {}", s.bs_grcim)
    })?;
    let splits = [
        SdmaSplit {
            private_bits: 4,
            common_bits: 2,
        },
        SdmaSplit {
            private_bits: 2,
            common_bits: 2,
        },
    ];
    let s = spectrum_utilization(1, 16, 6, &splits);
    ensure(s.ue_sdma == [6, 4] && s.bs_sdma == 10 && s.grcim_lower, || {
        format!("{s:?}")
    })?;
    for lc in [2usize, 4, 8, 16, 32, 64] {
        ensure(max_users(lc, 1, 4).grcim == lc, || format!("N_c=1, L_c={lc}"))?;
        let mut nc = 1;
        while nc <= lc {
            let u = max_users(lc, nc, 3);
            ensure(u.grcim * nc == lc && u.sdma == 3, || {
                format!("L_c={lc}, N_c={nc}: {u:?}")
            })?;
            nc *= 2;
        }
    }
    let report = comparison_report(
        &SystemConfig::new(4, 2, 8, 1).with_traffic_mode(TrafficMode::Unicast),
        &splits,
    );
    ensure(report.rates.base_station(TrafficMode::Unicast) == 8, || {
        "unicast R_BS".into()
    })?;
    ensure(report.spectrum.bs_grcim == Ratio::new(1, 1), || {
        format!("{}", report.spectrum.bs_grcim)
    })?;
    ensure(report.max_users.grcim == 4 && report.max_users.sdma == 4, || {
        format!("{:?}", report.max_users)
    })?;
    Ok("rates, utilization and max-UE formulas exact".into())
}

fn determinism() -> Outcome {
    let spec = SweepSpec::new(
        SystemConfig::new(4, 2, 8, 1).with_fading_variances(vec![1.0, 4.0]),
        (0..=8).map(f64::from).collect(),
        41,
    )
    .with_stopping(StoppingRule {
        min_bit_errors: 200,
        max_symbols: 300_000,
    });
    let csv = |workers| -> Result<Vec<u8>, String> {
        let mut buf = Vec::new();
        let result = run_sweep(&spec, Some(workers)).map_err(|e| e.to_string())?;
        write_sweep_csv(&result, &mut buf).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    let reference = csv(1)?;
    for workers in [2, 3, 8] {
        ensure(csv(workers)? == reference, || {
            format!("CSV with {workers} workers differs from 1 worker")
        })?;
    }
    ensure(csv(1)? == reference, || "repeated single-worker run differs".into())?;
    Ok(format!(
        "{} bytes identical across 1, 2, 3, 8 workers and a repeat",
        reference.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("orthogonality", orthogonality),
        ("noiseless loopback", noiseless_loopback),
        ("power normalization and ZF identity", power_and_zf),
        ("bound vs Monte Carlo oracle", bound_vs_oracle),
        ("simulation vs bound, L_c=8", figure_reproduction),
        ("ordering claims", ordering_claims),
        ("fairness", fairness),
        ("comparison metrics", metrics),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.1}s): {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
