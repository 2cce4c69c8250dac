//! Side-by-side comparison of several sweeps on a shared SNR grid.

use std::io::Write;

use serde::Serialize;

use crate::sweep::{run_sweep, BerSweepResult, SweepSpec};
use crate::SweepError;

/// Errors each user must collect at a point before it counts toward a claim.
pub const MIN_ERRORS_FOR_CLAIM: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    /// More transmit antennas give lower BER.
    MoreAntennasBetter,
    /// More codes per user give lower BER.
    MoreCodesBetter,
    /// More users (equal fading variances) give higher BER.
    MoreUsersWorse,
}

/// One ordering between two sweeps that differ in a single parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingClaim {
    pub kind: ClaimKind,
    /// Label of the sweep expected to have the lower BER.
    pub better: String,
    pub worse: String,
    /// Grid points where every user of both sweeps had enough errors.
    pub points_compared: usize,
    /// `better` BER <= `worse` BER at every compared point, and at least one
    /// point was compared.
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub results: Vec<BerSweepResult>,
    pub claims: Vec<OrderingClaim>,
}

/// Runs every spec and compares the curves.
pub fn compare_configs(specs: &[SweepSpec], workers: Option<usize>) -> Result<Comparison, SweepError> {
    if specs.len() < 2 {
        return Err(SweepError::TooFewSpecs(specs.len()));
    }
    check_alignment(specs.iter())?;
    let results = specs
        .iter()
        .map(|s| run_sweep(s, workers))
        .collect::<Result<Vec<_>, _>>()?;
    Comparison::from_results(results)
}

fn check_alignment<'a>(mut specs: impl Iterator<Item = &'a SweepSpec>) -> Result<(), SweepError> {
    let Some(first) = specs.next() else {
        return Ok(());
    };
    for s in specs {
        if s.axis != first.axis {
            return Err(SweepError::Alignment(format!(
                "{} uses {:?} axis, {} uses {:?}",
                first.display_label(),
                first.axis,
                s.display_label(),
                s.axis
            )));
        }
        let same = s.snr_grid_db.len() == first.snr_grid_db.len()
            && s.snr_grid_db
                .iter()
                .zip(&first.snr_grid_db)
                .all(|(a, b)| a.to_bits() == b.to_bits());
        if !same {
            return Err(SweepError::Alignment(format!(
                "{} and {} have different grids",
                first.display_label(),
                s.display_label()
            )));
        }
    }
    Ok(())
}

/// If `a` and `b` differ only in one of the compared parameters, the claim
/// kind plus whether `a` is the one expected to be better.
fn classify(a: &SweepSpec, b: &SweepSpec) -> Option<(ClaimKind, bool)> {
    let (ca, cb) = (&a.config, &b.config);
    if ca.code_length != cb.code_length || ca.traffic_mode != cb.traffic_mode || ca.noise != cb.noise {
        return None;
    }
    let nt = ca.num_tx_antennas != cb.num_tx_antennas;
    let nc = ca.index_bits != cb.index_bits;
    let nu = ca.num_users != cb.num_users;
    match (nt, nc, nu) {
        (true, false, false) if ca.fading_variances == cb.fading_variances => {
            Some((ClaimKind::MoreAntennasBetter, ca.num_tx_antennas > cb.num_tx_antennas))
        }
        (false, true, false) if ca.fading_variances == cb.fading_variances => {
            Some((ClaimKind::MoreCodesBetter, ca.index_bits > cb.index_bits))
        }
        (false, false, true) => {
            let v = ca.fading_variances.first()?;
            let equal = ca.fading_variances.iter().chain(&cb.fading_variances).all(|x| x == v);
            equal.then_some((ClaimKind::MoreUsersWorse, ca.num_users < cb.num_users))
        }
        _ => None,
    }
}

fn evaluate(kind: ClaimKind, better: &BerSweepResult, worse: &BerSweepResult) -> OrderingClaim {
    let mut compared = 0;
    let mut holds = true;
    for (pb, pw) in better.points.iter().zip(&worse.points) {
        if pb.min_user_errors() < MIN_ERRORS_FOR_CLAIM || pw.min_user_errors() < MIN_ERRORS_FOR_CLAIM {
            continue;
        }
        compared += 1;
        holds &= pb.ber() <= pw.ber();
    }
    OrderingClaim {
        kind,
        better: better.label(),
        worse: worse.label(),
        points_compared: compared,
        holds: holds && compared > 0,
    }
}

impl Comparison {
    pub fn from_results(results: Vec<BerSweepResult>) -> Result<Self, SweepError> {
        if results.len() < 2 {
            return Err(SweepError::TooFewSpecs(results.len()));
        }
        check_alignment(results.iter().map(|r| &r.spec))?;
        let mut claims = Vec::new();
        for i in 0..results.len() {
            for j in i + 1..results.len() {
                if let Some((kind, first_better)) = classify(&results[i].spec, &results[j].spec) {
                    let (better, worse) = if first_better {
                        (&results[i], &results[j])
                    } else {
                        (&results[j], &results[i])
                    };
                    claims.push(evaluate(kind, better, worse));
                }
            }
        }
        Ok(Self { results, claims })
    }

    pub fn claims_of(&self, kind: ClaimKind) -> impl Iterator<Item = &OrderingClaim> {
        self.claims.iter().filter(move |c| c.kind == kind)
    }

    /// One row per grid point; for each sweep the all-user BER, the bound and
    /// the total error count.
    pub fn write_table<W: Write>(&self, out: W) -> Result<(), SweepError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["snr_db".to_string()];
        for r in &self.results {
            let l = r.label();
            header.extend([format!("{l}_ber_sim"), format!("{l}_ber_bound"), format!("{l}_errors")]);
        }
        w.write_record(&header)?;
        for (i, snr) in self.results[0].spec.snr_grid_db.iter().enumerate() {
            let mut row = vec![snr.to_string()];
            for r in &self.results {
                let p = &r.points[i];
                row.extend([
                    format!("{:.9e}", p.ber()),
                    format!("{:.9e}", p.bound_ber),
                    p.totals().1.to_string(),
                ]);
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_claims<W: Write>(&self, out: W) -> Result<(), SweepError> {
        let mut w = csv::Writer::from_writer(out);
        for c in &self.claims {
            w.serialize(c)?;
        }
        w.flush()?;
        Ok(())
    }
}
