//! Bit mapping, spreading and correlator-bank detection for one user.
//!
//! A CIM word of `2m + 2` bits is laid out as
//! `[index_i (m bits, MSB first) | index_q (m bits) | label_i | label_q]`.
//! The two indices carry the user's private message, the two BPSK labels
//! carry the common message.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::codebook::CodeSubset;
use crate::{Error, Result};

/// BPSK amplitude, so that `s_I^2 + s_Q^2 = 1`.
pub const BPSK_AMPLITUDE: f64 = FRAC_1_SQRT_2;

/// BPSK constellation point for a label: `false -> +1/√2`, `true -> -1/√2`.
#[inline]
pub fn bpsk(label: bool) -> f64 {
    if label {
        -BPSK_AMPLITUDE
    } else {
        BPSK_AMPLITUDE
    }
}

/// One channel use for one user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CimSymbol {
    /// In-phase code index `n_I`.
    pub index_i: usize,
    /// Quadrature code index `n_Q`.
    pub index_q: usize,
    /// In-phase BPSK label `l_I`.
    pub label_i: bool,
    /// Quadrature BPSK label `l_Q`.
    pub label_q: bool,
}

/// Chip sequence of one user before precoding (or after, at the receiver).
pub type ChipVector = Vec<Complex64>;

/// Number of bits in one CIM word for `index_bits` bits per code index.
#[inline]
pub fn word_len(index_bits: u32) -> usize {
    2 * index_bits as usize + 2
}

fn read_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

fn write_index(index: usize, out: &mut [bool]) {
    let m = out.len();
    for (i, bit) in out.iter_mut().enumerate() {
        *bit = (index >> (m - 1 - i)) & 1 == 1;
    }
}

pub fn bits_to_symbol(bits: &[bool], index_bits: u32) -> Result<CimSymbol> {
    let m = index_bits as usize;
    if bits.len() != word_len(index_bits) {
        return Err(Error::Framing {
            expected: word_len(index_bits),
            actual: bits.len(),
        });
    }
    Ok(CimSymbol {
        index_i: read_index(&bits[..m]),
        index_q: read_index(&bits[m..2 * m]),
        label_i: bits[2 * m],
        label_q: bits[2 * m + 1],
    })
}

pub fn symbol_to_bits(symbol: &CimSymbol, index_bits: u32) -> Result<Vec<bool>> {
    let mut bits = vec![false; word_len(index_bits)];
    symbol_to_bits_into(symbol, index_bits, &mut bits)?;
    Ok(bits)
}

/// Writes the word for `symbol` into `out`, which must hold `2m + 2` bits.
pub fn symbol_to_bits_into(symbol: &CimSymbol, index_bits: u32, out: &mut [bool]) -> Result<()> {
    let m = index_bits as usize;
    let codes = 1usize << m;
    for index in [symbol.index_i, symbol.index_q] {
        if index >= codes {
            return Err(Error::IndexRange { index, codes });
        }
    }
    if out.len() != word_len(index_bits) {
        return Err(Error::Framing {
            expected: word_len(index_bits),
            actual: out.len(),
        });
    }
    write_index(symbol.index_i, &mut out[..m]);
    write_index(symbol.index_q, &mut out[m..2 * m]);
    out[2 * m] = symbol.label_i;
    out[2 * m + 1] = symbol.label_q;
    Ok(())
}

fn check_indices(symbol: &CimSymbol, codes: usize) -> Result<()> {
    for index in [symbol.index_i, symbol.index_q] {
        if index >= codes {
            return Err(Error::IndexRange { index, codes });
        }
    }
    Ok(())
}

/// Spreads a symbol: `c_{n_I} s_{l_I} + j c_{n_Q} s_{l_Q}`.
///
/// The result has squared norm exactly `L_c`.
pub fn modulate(symbol: &CimSymbol, codes: &CodeSubset<'_>) -> Result<ChipVector> {
    let mut chips = vec![Complex64::new(0.0, 0.0); codes.code_length()];
    modulate_into(symbol, codes, &mut chips)?;
    Ok(chips)
}

pub fn modulate_into(symbol: &CimSymbol, codes: &CodeSubset<'_>, out: &mut [Complex64]) -> Result<()> {
    check_indices(symbol, codes.len())?;
    if out.len() != codes.code_length() {
        return Err(Error::Framing {
            expected: codes.code_length(),
            actual: out.len(),
        });
    }
    let (si, sq) = (bpsk(symbol.label_i), bpsk(symbol.label_q));
    let (ci, cq) = (codes.code(symbol.index_i), codes.code(symbol.index_q));
    for ((chip, &a), &b) in out.iter_mut().zip(ci).zip(cq) {
        *chip = Complex64::new(f64::from(a) * si, f64::from(b) * sq);
    }
    Ok(())
}

/// Correlator outputs for both rails, one entry per code in the user's subset.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrelatorBank {
    pub in_phase: Vec<f64>,
    pub quadrature: Vec<f64>,
}

/// `r_I[n] = Re(y) · c_n` and `r_Q[n] = Im(y) · c_n` for every code in the subset.
pub fn correlate(received: &[Complex64], codes: &CodeSubset<'_>) -> Result<CorrelatorBank> {
    let mut bank = CorrelatorBank {
        in_phase: vec![0.0; codes.len()],
        quadrature: vec![0.0; codes.len()],
    };
    correlate_into(received, codes, &mut bank)?;
    Ok(bank)
}

/// Like [`correlate`], reusing the bank's storage.
pub fn correlate_into(received: &[Complex64], codes: &CodeSubset<'_>, bank: &mut CorrelatorBank) -> Result<()> {
    if received.len() != codes.code_length() {
        return Err(Error::Framing {
            expected: codes.code_length(),
            actual: received.len(),
        });
    }
    bank.in_phase.clear();
    bank.quadrature.clear();
    for code in codes.codes() {
        let (mut re, mut im) = (0.0, 0.0);
        for (y, &c) in received.iter().zip(code) {
            let c = f64::from(c);
            re += y.re * c;
            im += y.im * c;
        }
        bank.in_phase.push(re);
        bank.quadrature.push(im);
    }
    Ok(())
}

/// Maximum-likelihood decision on one rail: the code with the largest
/// correlator magnitude, and the BPSK label given by its sign.
///
/// With Gaussian correlator noise, the log-likelihood of `(ñ, l̃)` over the
/// whole bank is `-Σ_j r_j² + 2·β·L_c·s_l̃·r_ñ - const`, so the decision only
/// depends on `s_l̃ · r_ñ`. Ties go to the lowest index, then label 0.
fn detect_rail(bank: &[f64]) -> (usize, bool) {
    let mut best = 0;
    for (n, r) in bank.iter().enumerate().skip(1) {
        if r.abs() > bank[best].abs() {
            best = n;
        }
    }
    (best, bank.get(best).is_some_and(|&r| r < 0.0))
}

/// Decides `(n_I, l_I, n_Q, l_Q)` from a correlator bank.
///
/// `beta` and `code_length` set the expected matched-branch amplitude
/// `β·L_c/√2`. Because the amplitude is common to all hypotheses the decision
/// is scale-invariant, so only `beta > 0` matters.
pub fn ml_detect(bank: &CorrelatorBank, beta: f64, code_length: usize) -> CimSymbol {
    debug_assert!(beta > 0.0 && code_length > 0);
    let (index_i, label_i) = detect_rail(&bank.in_phase);
    let (index_q, label_q) = detect_rail(&bank.quadrature);
    CimSymbol {
        index_i,
        index_q,
        label_i,
        label_q,
    }
}
