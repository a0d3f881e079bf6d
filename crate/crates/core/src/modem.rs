//! Vectored modulator and the SAR-ADC style successive interference
//! cancellation detector.
//!
//! The modulator forms each branch as a weighted sum of bipolar bits:
//! `x_Q = sum d_j A_j`, `x_I = sum d_{m+j} B_j` with `d = 2z - 1`, where the
//! zig-zag bits `z` are the Gray-decoded data bits. The detector runs one
//! successive approximation per branch: the strongest bit is a sign decision
//! against threshold 0, and each following bit is a sign decision against a
//! threshold updated by the previous decision's gain. Both branches are
//! fully independent.

use crate::constellation::GainProfile;
use crate::error::{Error, Result};
use crate::graycode;

/// An n-bit Gray-domain data word.
///
/// Bits `g_1..g_m` ride the Q branch (weakest first) and `g_{m+1}..g_{m+k}`
/// the I branch. The canonical serialization is the bit string
/// `g_n g_{n-1} ... g_1`: I bits first, strongest first, then Q bits,
/// strongest first. Packed, bit `j` lives at position `j - 1`, so the
/// canonical integer value of a codeword is simply its packed word.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeWord {
    bits: u32,
    len: u8,
}

impl CodeWord {
    /// Build from the canonical integer value (packed bits).
    pub fn from_index(index: u32, len: usize) -> Self {
        assert!((1..=graycode::MAX_WORD_BITS).contains(&len));
        assert!(index < (1u32 << len));
        Self {
            bits: index,
            len: len as u8,
        }
    }

    /// Parse a canonical bit string such as `"0110"` (`g_n` first).
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let len = s.len();
        if !(1..=graycode::MAX_WORD_BITS).contains(&len) {
            return Err(Error::InvalidConfig(format!(
                "codeword must have 1..={} bits, got {len}",
                graycode::MAX_WORD_BITS
            )));
        }
        let mut bits = 0u32;
        for c in s.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    other => {
                        return Err(Error::InvalidConfig(format!(
                            "codeword may only contain 0 and 1, got {other:?}"
                        )))
                    }
                };
        }
        Ok(Self {
            bits,
            len: len as u8,
        })
    }

    /// Canonical integer value: the packed word, low bit = `g_1`.
    pub fn index(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false // length is always >= 1
    }

    /// Data bit `g_j`, 1-based.
    pub fn bit(&self, j: usize) -> u8 {
        assert!(j >= 1 && j <= self.len());
        ((self.bits >> (j - 1)) & 1) as u8
    }
}

impl std::fmt::Display for CodeWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for j in (1..=self.len()).rev() {
            write!(f, "{}", self.bit(j))?;
        }
        Ok(())
    }
}

impl std::fmt::Debug for CodeWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CodeWord(\"{self}\")")
    }
}

/// One complex baseband sample as an (I, Q) pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IqSample {
    pub i: f64,
    pub q: f64,
}

impl IqSample {
    pub fn new(i: f64, q: f64) -> Self {
        Self { i, q }
    }
}

/// One successive-approximation step: the threshold the sample was compared
/// against and the resulting bipolar decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub threshold: f64,
    pub decision: i8,
}

/// Per-branch record of the detector's threshold trajectory, strongest
/// sub-channel first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionTrace {
    pub i_steps: Vec<TraceStep>,
    pub q_steps: Vec<TraceStep>,
    /// Threshold updates actually performed on the I branch (k - 1 for k > 0).
    pub i_updates: usize,
    /// Threshold updates actually performed on the Q branch (m - 1).
    pub q_updates: usize,
}

/// Map one branch's Gray bits to its PAM level.
fn branch_level(gains: &[f64], gray_word: u32) -> f64 {
    if gains.is_empty() {
        return 0.0;
    }
    let z = graycode::decode_word(gray_word, gains.len());
    gains
        .iter()
        .enumerate()
        .map(|(j, &g)| if (z >> j) & 1 == 1 { g } else { -g })
        .sum()
}

/// Modulate a codeword onto one complex baseband sample.
pub fn modulate(profile: &GainProfile, cw: CodeWord) -> Result<IqSample> {
    let (k, m) = (profile.k(), profile.m());
    if cw.len() != k + m {
        return Err(Error::LengthMismatch {
            expected: k + m,
            actual: cw.len(),
        });
    }
    let q_word = cw.index() & ((1u32 << m) - 1);
    let i_word = cw.index() >> m;
    Ok(IqSample {
        i: branch_level(profile.i_gains(), i_word),
        q: branch_level(profile.q_gains(), q_word),
    })
}

/// Sink for the detector's per-step instrumentation. The no-op sink keeps
/// the plain detection path free of bookkeeping while guaranteeing that the
/// traced and untraced detectors share one decision path.
trait TraceSink {
    fn step(&mut self, threshold: f64, decision: i8);
    fn update(&mut self);
}

struct NoTrace;

impl TraceSink for NoTrace {
    #[inline(always)]
    fn step(&mut self, _: f64, _: i8) {}
    #[inline(always)]
    fn update(&mut self) {}
}

struct Recorder<'a> {
    steps: &'a mut Vec<TraceStep>,
    updates: &'a mut usize,
}

impl TraceSink for Recorder<'_> {
    fn step(&mut self, threshold: f64, decision: i8) {
        self.steps.push(TraceStep {
            threshold,
            decision,
        });
    }
    fn update(&mut self) {
        *self.updates += 1;
    }
}

/// Successive approximation of one branch: returns the zig-zag word.
///
/// The decision rule `y >= threshold` is exactly `Sign(y - threshold) = +1`
/// with `Sign(0) = +1`; IEEE subtraction preserves the comparison, so the
/// threshold (SAR) view and the residual-subtraction (SIC) view decide
/// identically.
#[inline]
fn detect_branch<S: TraceSink>(gains: &[f64], y: f64, sink: &mut S) -> u32 {
    let mut threshold = 0.0f64;
    let mut z = 0u32;
    for p in (0..gains.len()).rev() {
        let up = y >= threshold;
        if up {
            z |= 1 << p;
        }
        sink.step(threshold, if up { 1 } else { -1 });
        if p > 0 {
            threshold += if up { gains[p] } else { -gains[p] };
            sink.update();
        }
    }
    z
}

fn assemble<SI: TraceSink, SQ: TraceSink>(
    profile: &GainProfile,
    y: IqSample,
    i_sink: &mut SI,
    q_sink: &mut SQ,
) -> CodeWord {
    let (k, m) = (profile.k(), profile.m());
    let z_i = detect_branch(profile.i_gains(), y.i, i_sink);
    let z_q = detect_branch(profile.q_gains(), y.q, q_sink);
    let g_q = graycode::encode_word(z_q, m);
    let g_i = if k > 0 {
        graycode::encode_word(z_i, k)
    } else {
        0
    };
    CodeWord {
        bits: g_q | (g_i << m),
        len: (k + m) as u8,
    }
}

/// Detect a noisy sample with per-branch successive interference
/// cancellation. Total function: any finite or non-finite sample yields a
/// codeword.
pub fn sic_detect(profile: &GainProfile, y: IqSample) -> CodeWord {
    assemble(profile, y, &mut NoTrace, &mut NoTrace)
}

/// Like [`sic_detect`], additionally reporting each branch's threshold
/// trajectory, strongest sub-channel first.
pub fn detect_with_trace(profile: &GainProfile, y: IqSample) -> (CodeWord, DetectionTrace) {
    let mut trace = DetectionTrace::default();
    let cw = assemble(
        profile,
        y,
        &mut Recorder {
            steps: &mut trace.i_steps,
            updates: &mut trace.i_updates,
        },
        &mut Recorder {
            steps: &mut trace.q_steps,
            updates: &mut trace.q_updates,
        },
    );
    (cw, trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cw(s: &str) -> CodeWord {
        CodeWord::from_bit_str(s).unwrap()
    }

    #[test]
    fn codeword_serialization_order() {
        let w = cw("1011");
        assert_eq!(w.index(), 0b1011);
        assert_eq!(w.bit(1), 1); // g_1 is the last character
        assert_eq!(w.bit(4), 1); // g_4 is the first
        assert_eq!(w.bit(3), 0);
        assert_eq!(w.to_string(), "1011");
        assert_eq!(CodeWord::from_index(0b1011, 4), w);
    }

    #[test]
    fn codeword_rejects_garbage() {
        assert!(CodeWord::from_bit_str("01x1").is_err());
        assert!(CodeWord::from_bit_str("").is_err());
    }

    #[test]
    fn modulate_16qam_corners() {
        let p = GainProfile::uniform(2, 2, 1.0).unwrap();
        assert_eq!(
            modulate(&p, cw("0000")).unwrap(),
            IqSample::new(-3.0, -3.0)
        );
        // g = [1,1] per branch -> z = [0,1] -> level -1 + 2 = +1
        assert_eq!(modulate(&p, cw("1111")).unwrap(), IqSample::new(1.0, 1.0));
    }

    #[test]
    fn modulate_bpsk() {
        let p = GainProfile::uniform(0, 1, 1.0).unwrap();
        assert_eq!(modulate(&p, cw("1")).unwrap(), IqSample::new(0.0, 1.0));
        assert_eq!(modulate(&p, cw("0")).unwrap(), IqSample::new(0.0, -1.0));
    }

    #[test]
    fn modulate_length_mismatch() {
        let p = GainProfile::uniform(2, 2, 1.0).unwrap();
        assert!(matches!(
            modulate(&p, cw("000")),
            Err(Error::LengthMismatch {
                expected: 4,
                actual: 3
            })
        ));
    }

    #[test]
    fn sic_detect_examples() {
        let p = GainProfile::uniform(2, 2, 1.0).unwrap();
        assert_eq!(
            sic_detect(&p, IqSample::new(-3.4, -2.6)).to_string(),
            "0000"
        );
        // the Sign(0) = +1 rule: both branches start +1 then fall back
        assert_eq!(sic_detect(&p, IqSample::new(0.0, 0.0)).to_string(), "1111");
    }

    #[test]
    fn noiseless_round_trip_16qam() {
        let p = GainProfile::uniform(2, 2, 1.0).unwrap();
        for idx in 0..16u32 {
            let w = CodeWord::from_index(idx, 4);
            let x = modulate(&p, w).unwrap();
            assert_eq!(sic_detect(&p, x), w);
        }
    }

    #[test]
    fn trace_16qam_q_branch() {
        let p = GainProfile::uniform(2, 2, 1.0).unwrap();
        let (w, trace) = detect_with_trace(&p, IqSample::new(0.0, 0.0));
        assert_eq!(w.to_string(), "1111");
        let thresholds: Vec<f64> = trace.q_steps.iter().map(|s| s.threshold).collect();
        let decisions: Vec<i8> = trace.q_steps.iter().map(|s| s.decision).collect();
        assert_eq!(thresholds, vec![0.0, 2.0]);
        assert_eq!(decisions, vec![1, -1]);
    }

    #[test]
    fn trace_bpsk_single_step() {
        let p = GainProfile::uniform(0, 1, 1.0).unwrap();
        for y in [-2.5, -0.1, 0.0, 1.7] {
            let (w, trace) = detect_with_trace(&p, IqSample::new(0.0, y));
            assert!(trace.i_steps.is_empty());
            assert_eq!(trace.q_steps.len(), 1);
            assert_eq!(trace.q_steps[0].threshold, 0.0);
            let expect = if y >= 0.0 { 1 } else { -1 };
            assert_eq!(trace.q_steps[0].decision, expect);
            assert_eq!(w.bit(1), u8::from(y >= 0.0));
        }
    }

    #[test]
    fn trace_counts_and_threshold_recursion() {
        let p = GainProfile::uniform(3, 4, 1.0).unwrap().stretch(2.0).unwrap();
        let samples = [
            IqSample::new(3.3, -6.1),
            IqSample::new(-13.9, 14.9),
            IqSample::new(0.0, 0.0),
        ];
        for y in samples {
            let (w, trace) = detect_with_trace(&p, y);
            assert_eq!(trace.i_steps.len(), 3);
            assert_eq!(trace.q_steps.len(), 4);
            assert_eq!(trace.i_updates, 2);
            assert_eq!(trace.q_updates, 3);
            assert_eq!(trace.i_steps[0].threshold, 0.0);
            assert_eq!(trace.q_steps[0].threshold, 0.0);
            // V_TH(step t+1) = V_TH(step t) + d(step t) * gain(step t)
            let gains_desc: Vec<f64> = p.q_gains().iter().rev().copied().collect();
            for (t, gain) in gains_desc.iter().take(3).enumerate() {
                let s = &trace.q_steps[t];
                let expected = s.threshold + f64::from(s.decision) * gain;
                assert_eq!(trace.q_steps[t + 1].threshold, expected);
            }
            assert_eq!(sic_detect(&p, y), w);
        }
    }

    #[test]
    fn sar_thresholds_decide_like_residuals() {
        // comparing y against V_TH must reproduce the codeword bit for bit
        let p = GainProfile::uniform(3, 3, 1.0).unwrap();
        for t in 0..2000 {
            let y = IqSample::new((t as f64) * 0.0113 - 11.0, 10.7 - (t as f64) * 0.0101);
            let (w, trace) = detect_with_trace(&p, y);
            for (steps, sample) in [(&trace.i_steps, y.i), (&trace.q_steps, y.q)] {
                for s in steps.iter() {
                    let d = if sample >= s.threshold { 1 } else { -1 };
                    assert_eq!(d, s.decision);
                }
            }
            assert_eq!(sic_detect(&p, y), w);
        }
    }

    #[test]
    fn detector_is_total() {
        let p = GainProfile::uniform(2, 2, 1.0).unwrap();
        for y in [
            IqSample::new(f64::NAN, 0.0),
            IqSample::new(f64::INFINITY, f64::NEG_INFINITY),
            IqSample::new(1e308, -1e308),
        ] {
            let _ = sic_detect(&p, y);
        }
        assert_eq!(
            sic_detect(&p, IqSample::new(f64::INFINITY, f64::INFINITY)).to_string(),
            "1010" // all z bits 1 -> gray 10 per branch
        );
    }

    #[test]
    fn negation_flips_all_decisions() {
        let p = GainProfile::uniform(3, 4, 1.0).unwrap().stretch(1.5).unwrap();
        for t in 0..500 {
            let y = IqSample::new((t as f64) * 0.037 - 9.2 + 1e-3, (t as f64) * 0.061 - 15.1 + 1e-3);
            let (_, fwd) = detect_with_trace(&p, y);
            let (_, rev) = detect_with_trace(&p, IqSample::new(-y.i, -y.q));
            let off_boundary = fwd
                .i_steps
                .iter()
                .all(|s| (y.i - s.threshold).abs() > 1e-9)
                && fwd.q_steps.iter().all(|s| (y.q - s.threshold).abs() > 1e-9);
            if !off_boundary {
                continue;
            }
            for (a, b) in fwd.i_steps.iter().zip(&rev.i_steps) {
                assert_eq!(a.decision, -b.decision);
            }
            for (a, b) in fwd.q_steps.iter().zip(&rev.q_steps) {
                assert_eq!(a.decision, -b.decision);
            }
        }
    }
}
