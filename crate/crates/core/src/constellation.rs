//! Hierarchical QAM gain profiles and the constellations they generate.
//!
//! A `2^(k+m)` constellation is described entirely by two lists of positive
//! sub-channel gains: `B_1..B_k` on the I branch and `A_1..A_m` on the Q
//! branch. Each branch is the superposition of BPSK sub-channels, so a
//! branch level is a signed sum of its gains. Unique decodability requires
//! the layered-formation constraint: every gain must exceed the sum of all
//! weaker gains on its branch (the worst case over all sign patterns).

use serde::{Deserialize, Serialize};

use crate::error::{Branch, Error, Result};
use crate::modem::{self, CodeWord, IqSample};

/// Enumeration cap: constellations are limited to `2^MAX_BITS` points so
/// that table-based detection stays tractable.
pub const MAX_BITS: usize = 24;

/// Validated sub-channel gains defining a hierarchical `2^(k+m)` QAM
/// constellation.
///
/// Profiles are immutable once constructed and cheap to share across
/// threads; all operations on them are pure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGainProfile")]
pub struct GainProfile {
    i_gains: Vec<f64>,
    q_gains: Vec<f64>,
}

#[derive(Deserialize)]
struct RawGainProfile {
    i_gains: Vec<f64>,
    q_gains: Vec<f64>,
}

impl TryFrom<RawGainProfile> for GainProfile {
    type Error = Error;

    fn try_from(raw: RawGainProfile) -> Result<Self> {
        GainProfile::new(raw.i_gains, raw.q_gains)
    }
}

fn validate_branch(branch: Branch, gains: &[f64]) -> Result<()> {
    let mut interference = 0.0;
    for (idx, &g) in gains.iter().enumerate() {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::NonPositiveGain {
                branch,
                index: idx + 1,
                value: g,
            });
        }
        if idx > 0 && g <= interference {
            return Err(Error::ConstraintViolation {
                branch,
                index: idx + 1,
                gain: g,
                interference,
            });
        }
        interference += g;
    }
    Ok(())
}

impl GainProfile {
    /// Validate and build a profile from raw gain lists.
    ///
    /// Gains are ordered weakest first. The Q branch must be non-empty; the
    /// I branch may be empty (pure PAM/BPSK). Every gain must be strictly
    /// positive and strictly exceed the sum of the weaker gains on its
    /// branch, so that every sign pattern of the weaker sub-channels leaves
    /// the stronger one uniquely decodable.
    pub fn new(i_gains: Vec<f64>, q_gains: Vec<f64>) -> Result<Self> {
        if q_gains.is_empty() {
            return Err(Error::QuadratureBranchEmpty);
        }
        let n = i_gains.len() + q_gains.len();
        if n > MAX_BITS {
            return Err(Error::TooLarge {
                bits: n,
                cap: MAX_BITS,
            });
        }
        validate_branch(Branch::I, &i_gains)?;
        validate_branch(Branch::Q, &q_gains)?;
        Ok(Self { i_gains, q_gains })
    }

    /// Build a profile without validating the gain constraints.
    ///
    /// Detection on such a profile is well defined but not necessarily
    /// equivalent to maximum likelihood; this exists for experiments that
    /// deliberately break the layered-formation constraint. Both lists must
    /// still fit the bit cap and the Q branch must be non-empty.
    pub fn new_unchecked(i_gains: Vec<f64>, q_gains: Vec<f64>) -> Self {
        assert!(!q_gains.is_empty(), "Q branch must be non-empty");
        assert!(i_gains.len() + q_gains.len() <= MAX_BITS);
        Self { i_gains, q_gains }
    }

    /// The standard equally spaced grid: `k` I gains and `m` Q gains of
    /// `base * 2^(j-1)`. Satisfies the gain constraint with margin `base`.
    pub fn uniform(k: usize, m: usize, base: f64) -> Result<Self> {
        let pow2 = |j: usize| base * (1u64 << j) as f64;
        Self::new(
            (0..k).map(pow2).collect(),
            (0..m).map(pow2).collect(),
        )
    }

    /// Stretch the constellation towards the I axis: every I gain is
    /// multiplied by `r >= 1`, leaving the Q branch untouched. Scaling one
    /// branch uniformly preserves the gain constraint.
    pub fn stretch(&self, r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 1.0) {
            return Err(Error::InvalidStretch { r });
        }
        Ok(Self {
            i_gains: self.i_gains.iter().map(|b| b * r).collect(),
            q_gains: self.q_gains.clone(),
        })
    }

    /// I-branch gains `B_1..B_k`, weakest first.
    pub fn i_gains(&self) -> &[f64] {
        &self.i_gains
    }

    /// Q-branch gains `A_1..A_m`, weakest first.
    pub fn q_gains(&self) -> &[f64] {
        &self.q_gains
    }

    /// Number of I sub-channels (`k`).
    pub fn k(&self) -> usize {
        self.i_gains.len()
    }

    /// Number of Q sub-channels (`m`).
    pub fn m(&self) -> usize {
        self.q_gains.len()
    }

    /// Total bits per symbol (`n = k + m`).
    pub fn n(&self) -> usize {
        self.i_gains.len() + self.q_gains.len()
    }

    /// Peak I amplitude: the sum of all I gains.
    pub fn peak_i(&self) -> f64 {
        self.i_gains.iter().sum()
    }

    /// Peak Q amplitude: the sum of all Q gains.
    pub fn peak_q(&self) -> f64 {
        self.q_gains.iter().sum()
    }

    /// Largest single gain on either branch.
    pub fn max_gain(&self) -> f64 {
        self.i_gains
            .iter()
            .chain(&self.q_gains)
            .fold(0.0f64, |acc, &g| acc.max(g))
    }

    /// Materialize all `2^n` constellation points, one per codeword.
    pub fn enumerate_points(&self) -> Result<Vec<ConstellationPoint>> {
        let n = self.n();
        if n > MAX_BITS {
            return Err(Error::TooLarge {
                bits: n,
                cap: MAX_BITS,
            });
        }
        (0..(1u32 << n))
            .map(|idx| {
                let codeword = CodeWord::from_index(idx, n);
                let point = modem::modulate(self, codeword)?;
                Ok(ConstellationPoint { codeword, point })
            })
            .collect()
    }

    /// Mean symbol energy over equiprobable codewords.
    ///
    /// With independent `+-1` weights the cross terms vanish, leaving the
    /// sum of squared gains.
    pub fn average_symbol_energy(&self) -> f64 {
        self.i_gains
            .iter()
            .chain(&self.q_gains)
            .map(|g| g * g)
            .sum()
    }

    /// Peak-to-average power ratio of the constellation.
    pub fn papr(&self) -> f64 {
        let pi = self.peak_i();
        let pq = self.peak_q();
        (pi * pi + pq * pq) / self.average_symbol_energy()
    }
}

/// One constellation point together with the codeword that produces it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationPoint {
    pub codeword: CodeWord,
    pub point: IqSample,
}
