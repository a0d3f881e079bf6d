//! AWGN channel with reproducible, position-addressable randomness.
//!
//! The received sample is `y = x + w` with `w_I`, `w_Q` independent
//! zero-mean Gaussians of standard deviation `sigma_branch` each, so the
//! total complex noise power is `2 * sigma_branch^2`.
//!
//! Randomness comes from counter-mode ChaCha streams: a (seed, substream)
//! pair names a stream and every draw has a fixed position in it, so any
//! partitioning of work across threads or batches reproduces the exact same
//! values. Gaussians use the Box-Muller transform, which consumes exactly
//! two 64-bit draws per (I, Q) pair.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constellation::GainProfile;
use crate::modem::IqSample;

/// Per-branch noise standard deviation plus the master seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    sigma_branch: f64,
    seed: u64,
}

impl NoiseSpec {
    /// # Panics
    ///
    /// Panics unless `sigma_branch` is finite and strictly positive.
    pub fn new(sigma_branch: f64, seed: u64) -> Self {
        assert!(
            sigma_branch.is_finite() && sigma_branch > 0.0,
            "sigma_branch must be positive and finite"
        );
        Self { sigma_branch, seed }
    }

    pub fn sigma_branch(&self) -> f64 {
        self.sigma_branch
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Total complex noise power `sigma0^2 = 2 * sigma_branch^2`.
    pub fn noise_power(&self) -> f64 {
        2.0 * self.sigma_branch * self.sigma_branch
    }

    /// Open one of this spec's independent substreams.
    pub fn stream(&self, substream: u64) -> ChannelStream {
        ChannelStream::new(self.seed, substream)
    }
}

/// A seekable random stream handle owned by exactly one worker.
#[derive(Debug, Clone)]
pub struct ChannelStream {
    rng: ChaCha8Rng,
}

impl ChannelStream {
    /// Stream `substream` of the generator seeded with `seed`. Distinct
    /// substreams are independent for any fixed seed.
    pub fn new(seed: u64, substream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(substream);
        Self { rng }
    }

    /// Jump to an absolute draw index. Draw `i` is the value `next_u64`
    /// returns after `seek(i)`, independent of any earlier consumption.
    pub fn seek(&mut self, draw_index: u64) {
        self.rng.set_word_pos(u128::from(draw_index) * 2);
    }

    /// The next 64-bit draw (consumes one draw position).
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// One pair of independent standard Gaussians via Box-Muller.
    /// Consumes exactly two draw positions.
    pub fn next_gaussian_pair(&mut self) -> (f64, f64) {
        let a = self.next_u64();
        let b = self.next_u64();
        // u1 in (0, 1], u2 in [0, 1)
        let u1 = ((a >> 11) as f64 + 1.0) * (1.0 / 9007199254740992.0);
        let u2 = (b >> 11) as f64 * (1.0 / 9007199254740992.0);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        (r * theta.cos(), r * theta.sin())
    }
}

/// Pass one sample through the AWGN channel.
pub fn awgn(x: IqSample, spec: &NoiseSpec, stream: &mut ChannelStream) -> IqSample {
    let (wi, wq) = stream.next_gaussian_pair();
    IqSample {
        i: x.i + spec.sigma_branch * wi,
        q: x.q + spec.sigma_branch * wq,
    }
}

/// Per-branch sigma for a symbol-energy SNR: `Es/N0` in dB, with
/// `N0 = sigma0^2` the total complex noise power.
pub fn sigma_from_esn0(profile: &GainProfile, esn0_db: f64) -> f64 {
    let es = profile.average_symbol_energy();
    (es / (2.0 * 10f64.powf(esn0_db / 10.0))).sqrt()
}

/// Per-branch sigma for a bit-energy SNR: `Eb = Es / n`.
pub fn sigma_from_ebn0(profile: &GainProfile, ebn0_db: f64) -> f64 {
    let es = profile.average_symbol_energy();
    let n = profile.n() as f64;
    (es / (2.0 * n * 10f64.powf(ebn0_db / 10.0))).sqrt()
}
