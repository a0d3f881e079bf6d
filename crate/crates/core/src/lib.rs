//! Baseband hierarchical `2^n` QAM modem and Monte Carlo toolkit.
//!
//! A `2^(k+m)` constellation is built by superposing BPSK sub-channels with
//! layered gains on the I and Q branches. Detection runs one successive
//! approximation (SAR-ADC style interference cancellation) per branch
//! followed by a Gray encoder, and matches table-lookup maximum-likelihood
//! detection everywhere off the decision boundaries while needing only
//! `max(k, m)` comparators instead of a `2^(n+1)`-entry table.
//!
//! ```
//! use hqam::{modem, GainProfile};
//!
//! let profile = GainProfile::uniform(3, 4, 1.0)?.stretch(2.0)?;
//! let sent = modem::CodeWord::from_bit_str("1011010")?;
//! let x = modem::modulate(&profile, sent)?;
//! assert_eq!(modem::sic_detect(&profile, x), sent);
//! # Ok::<(), hqam::Error>(())
//! ```

pub mod channel;
pub mod constellation;
pub mod error;
pub mod graycode;
pub mod harness;
pub mod modem;
pub mod oracle;

pub use channel::{ChannelStream, NoiseSpec};
pub use constellation::{ConstellationPoint, GainProfile, MAX_BITS};
pub use error::{Branch, Error, Result};
pub use graycode::BitVector;
pub use harness::{BerRecord, Detector, Mismatch, ScanMode, SnrMetric, SweepConfig};
pub use modem::{CodeWord, DetectionTrace, IqSample};
pub use oracle::{BerVector, MlDetector};
