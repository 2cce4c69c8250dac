//! End-to-end transmission of CIM symbols for all users over one fading
//! block per symbol, with per-user bit error counters.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::AddAssign;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{
    apply_channel_into, draw_channel_into, zf_precode_into, ChannelRealization, ReceivedFrame, SystemConfig,
    TrafficMode, TransmitFrame,
};
use crate::codebook::{generate_hadamard, group_codebook, CodeGrouping, WalshCodebook};
use crate::modem::{correlate_into, ml_detect, modulate_into, CimSymbol, CorrelatorBank};
use crate::Result;

/// Bit and error tallies for one user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UserCounts {
    pub private_bits: u64,
    pub private_errors: u64,
    pub common_bits: u64,
    pub common_errors: u64,
}

impl UserCounts {
    pub fn bits(&self) -> u64 {
        self.private_bits + self.common_bits
    }

    pub fn errors(&self) -> u64 {
        self.private_errors + self.common_errors
    }

    /// Counts one transmitted/detected symbol pair with `index_bits` per index.
    pub fn record(&mut self, sent: &CimSymbol, detected: &CimSymbol, index_bits: u32) {
        self.private_bits += 2 * u64::from(index_bits);
        self.common_bits += 2;
        self.private_errors += u64::from((sent.index_i ^ detected.index_i).count_ones())
            + u64::from((sent.index_q ^ detected.index_q).count_ones());
        self.common_errors += u64::from(sent.label_i != detected.label_i) + u64::from(sent.label_q != detected.label_q);
    }
}

impl AddAssign for UserCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.private_bits += rhs.private_bits;
        self.private_errors += rhs.private_errors;
        self.common_bits += rhs.common_bits;
        self.common_errors += rhs.common_errors;
    }
}

/// A configured downlink with reusable scratch buffers.
///
/// Every symbol draws a fresh channel realization, so consecutive symbols
/// see independent block fading.
#[derive(Debug, Clone)]
pub struct Link {
    config: SystemConfig,
    codebook: WalshCodebook,
    grouping: CodeGrouping,
    realization: ChannelRealization,
    chips: Vec<Vec<Complex64>>,
    frame: TransmitFrame,
    received: ReceivedFrame,
    bank: CorrelatorBank,
    sent: Vec<CimSymbol>,
    detected: Vec<CimSymbol>,
}

impl Link {
    pub fn new(config: SystemConfig) -> Result<Self> {
        config.validate()?;
        let codebook = generate_hadamard(config.code_length)?;
        let grouping = group_codebook(&codebook, config.num_users, config.codes_per_user())?;
        let nu = config.num_users;
        Ok(Self {
            chips: vec![vec![Complex64::new(0.0, 0.0); config.code_length]; nu],
            codebook,
            grouping,
            realization: ChannelRealization::default(),
            frame: TransmitFrame::default(),
            received: ReceivedFrame::default(),
            bank: CorrelatorBank::default(),
            sent: vec![CimSymbol::default(); nu],
            detected: vec![CimSymbol::default(); nu],
            config,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn codebook(&self) -> &WalshCodebook {
        &self.codebook
    }

    pub fn grouping(&self) -> &CodeGrouping {
        &self.grouping
    }

    /// Draws one symbol per user. Broadcast traffic shares the BPSK labels.
    fn draw_symbols<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let nc = self.config.codes_per_user();
        let shared: (bool, bool) = (rng.random(), rng.random());
        for s in &mut self.sent {
            s.index_i = rng.random_range(0..nc);
            s.index_q = rng.random_range(0..nc);
            let (label_i, label_q) = match self.config.traffic_mode {
                TrafficMode::Broadcast => shared,
                TrafficMode::Unicast => (rng.random(), rng.random()),
            };
            s.label_i = label_i;
            s.label_q = label_q;
        }
    }

    /// Sends one symbol per user through a fresh channel and returns the
    /// detected symbols.
    pub fn transmit<R: Rng + ?Sized>(
        &mut self,
        symbols: &[CimSymbol],
        noise_density: f64,
        rng: &mut R,
    ) -> Result<&[CimSymbol]> {
        if symbols.len() != self.config.num_users {
            return Err(crate::Error::Framing {
                expected: self.config.num_users,
                actual: symbols.len(),
            });
        }
        self.sent.copy_from_slice(symbols);
        self.transmit_sent(noise_density, rng)?;
        Ok(&self.detected)
    }

    fn transmit_sent<R: Rng + ?Sized>(&mut self, noise_density: f64, rng: &mut R) -> Result<()> {
        draw_channel_into(&self.config, rng, &mut self.realization);
        for (k, (symbol, chips)) in self.sent.iter().zip(&mut self.chips).enumerate() {
            modulate_into(symbol, &self.grouping.subset(&self.codebook, k), chips)?;
        }
        zf_precode_into(&self.realization, &self.chips, &mut self.frame)?;
        apply_channel_into(
            &self.frame,
            &self.realization,
            noise_density,
            self.config.noise,
            rng,
            &mut self.received,
        )?;
        for k in 0..self.config.num_users {
            correlate_into(
                self.received.user(k),
                &self.grouping.subset(&self.codebook, k),
                &mut self.bank,
            )?;
            self.detected[k] = ml_detect(&self.bank, self.realization.beta(k), self.config.code_length);
        }
        Ok(())
    }

    /// Simulates `symbols` random channel uses and adds each user's tallies
    /// into `counts` (one entry per user).
    pub fn run<R: Rng + ?Sized>(
        &mut self,
        noise_density: f64,
        symbols: u64,
        rng: &mut R,
        counts: &mut [UserCounts],
    ) -> Result<()> {
        if counts.len() != self.config.num_users {
            return Err(crate::Error::Framing {
                expected: self.config.num_users,
                actual: counts.len(),
            });
        }
        let m = self.config.index_bits;
        for _ in 0..symbols {
            self.draw_symbols(rng);
            self.transmit_sent(noise_density, rng)?;
            for ((c, sent), detected) in counts.iter_mut().zip(&self.sent).zip(&self.detected) {
                c.record(sent, detected, m);
            }
        }
        Ok(())
    }
}
