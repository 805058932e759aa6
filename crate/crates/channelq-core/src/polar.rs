//! Polar construction harness: sandwiches the mutual information of each
//! synthetic channel between a degraded-only and an upgraded-only chain.
//!
//! Both Arikan transforms square (or double-square) the output alphabet, so
//! after every transform each chain is canonicalized with
//! `merge_duplicate_letters` and quantized back to at most `L` letters with
//! the selected degrader or upgrader. The degraded chain can only lose
//! mutual information and the upgraded chain can only gain it, so for every
//! synthetic index `lower_i ≤ upper_i` up to numerical noise.

use alloc::vec::Vec;
use core::fmt;

use crate::channel::{build_channel, Channel, VALIDATION_TOL};
use crate::degrade::{greedy_merge, optimal_degrade_binary, DegradeError};
use crate::upgrade::{greedy_split, optimal_upgrade_binary, UpgradeError};

pub const MAX_DEPTH: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum PolarError {
    NotBinaryInput { input_size: usize },
    NonUniformInput,
    BadDepth { depth: usize },
    BadTargetSize { l: usize },
    Degrade(DegradeError),
    Upgrade(UpgradeError),
}

impl fmt::Display for PolarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolarError::NotBinaryInput { input_size } => {
                write!(f, "polar transforms require binary input, got {input_size}")
            }
            PolarError::NonUniformInput => write!(f, "input distribution is not uniform"),
            PolarError::BadDepth { depth } => {
                write!(f, "depth {depth} exceeds the supported maximum {MAX_DEPTH}")
            }
            PolarError::BadTargetSize { l } => {
                write!(f, "quantization size {l} must be at least 8")
            }
            PolarError::Degrade(e) => write!(f, "degrader failed: {e}"),
            PolarError::Upgrade(e) => write!(f, "upgrader failed: {e}"),
        }
    }
}

impl core::error::Error for PolarError {}

impl From<DegradeError> for PolarError {
    fn from(e: DegradeError) -> Self {
        PolarError::Degrade(e)
    }
}

impl From<UpgradeError> for PolarError {
    fn from(e: UpgradeError) -> Self {
        PolarError::Upgrade(e)
    }
}

fn check_binary_uniform(ch: &Channel) -> Result<(), PolarError> {
    if ch.input_size() != 2 {
        return Err(PolarError::NotBinaryInput {
            input_size: ch.input_size(),
        });
    }
    if !ch.is_uniform_input() {
        return Err(PolarError::NonUniformInput);
    }
    Ok(())
}

/// The minus (check) transform: outputs `(y₁, y₂)` with
/// `W⁻(y₁y₂|u₁) = Σ_{u₂} ½ W(y₁|u₁⊕u₂) W(y₂|u₂)`. Zero-mass outputs are
/// dropped. Output index `y₁·|𝒴| + y₂` before dropping.
pub fn polar_transform_minus(ch: &Channel) -> Result<Channel, PolarError> {
    check_binary_uniform(ch)?;
    let m = ch.output_size();
    let mut rows = Vec::with_capacity(2);
    for u1 in 0..2usize {
        let mut row = Vec::with_capacity(m * m);
        for y1 in 0..m {
            for y2 in 0..m {
                let mut w = 0.0;
                for u2 in 0..2usize {
                    w += 0.5 * ch.w(y1, u1 ^ u2) * ch.w(y2, u2);
                }
                row.push(w);
            }
        }
        rows.push(row);
    }
    Ok(build_channel(rows, ch.input_dist().to_vec(), None)
        .expect("transform output is valid")
        .0)
}

/// The plus (bit) transform: outputs `(y₁, y₂, u₁)` with
/// `W⁺(y₁y₂u₁|u₂) = ½ W(y₁|u₁⊕u₂) W(y₂|u₂)`. Zero-mass outputs are dropped.
/// Output index `(y₁·|𝒴| + y₂)·2 + u₁` before dropping.
pub fn polar_transform_plus(ch: &Channel) -> Result<Channel, PolarError> {
    check_binary_uniform(ch)?;
    let m = ch.output_size();
    let mut rows = Vec::with_capacity(2);
    for u2 in 0..2usize {
        let mut row = Vec::with_capacity(m * m * 2);
        for y1 in 0..m {
            for y2 in 0..m {
                for u1 in 0..2usize {
                    row.push(0.5 * ch.w(y1, u1 ^ u2) * ch.w(y2, u2));
                }
            }
        }
        rows.push(row);
    }
    Ok(build_channel(rows, ch.input_dist().to_vec(), None)
        .expect("transform output is valid")
        .0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegraderKind {
    GreedyMerge,
    OptimalBinary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpgraderKind {
    GreedySplit,
    OptimalBinary,
}

/// Mutual-information sandwich for one synthetic channel. `index` encodes
/// the transform sequence, most significant bit first, 0 = minus, 1 = plus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarEntry {
    pub index: usize,
    pub lower_i: f64,
    pub upper_i: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarReport {
    pub depth: usize,
    pub l: usize,
    pub degrader: DegraderKind,
    pub upgrader: UpgraderKind,
    pub entries: Vec<PolarEntry>,
}

fn quantize_down(ch: &Channel, l: usize, kind: DegraderKind) -> Result<Channel, PolarError> {
    let merged = ch.merge_duplicate_letters(VALIDATION_TOL);
    if merged.output_size() <= l {
        return Ok(merged);
    }
    let result = match kind {
        DegraderKind::GreedyMerge => greedy_merge(&merged, l)?,
        DegraderKind::OptimalBinary => optimal_degrade_binary(&merged, l)?,
    };
    Ok(result.channel)
}

fn quantize_up(ch: &Channel, l: usize, kind: UpgraderKind) -> Result<Channel, PolarError> {
    let merged = ch.merge_duplicate_letters(VALIDATION_TOL);
    if merged.output_size() <= l {
        return Ok(merged);
    }
    let result = match kind {
        UpgraderKind::GreedySplit => greedy_split(&merged, l)?,
        UpgraderKind::OptimalBinary => optimal_upgrade_binary(&merged, l)?,
    };
    Ok(result.channel)
}

/// Tracks every synthetic channel of `ch` to `depth` levels, quantizing the
/// degraded chain down and the upgraded chain up to at most `l` letters
/// after each transform, and reports per-index mutual-information sandwiches.
pub fn polar_construct(
    ch: &Channel,
    depth: usize,
    l: usize,
    degrader: DegraderKind,
    upgrader: UpgraderKind,
) -> Result<PolarReport, PolarError> {
    check_binary_uniform(ch)?;
    if depth > MAX_DEPTH {
        return Err(PolarError::BadDepth { depth });
    }
    if l < 8 {
        return Err(PolarError::BadTargetSize { l });
    }
    let mut chains = Vec::with_capacity(1 << depth);
    chains.push((ch.clone(), ch.clone()));
    for _ in 0..depth {
        let mut next = Vec::with_capacity(chains.len() * 2);
        for (lower, upper) in &chains {
            let lower_minus = quantize_down(&polar_transform_minus(lower)?, l, degrader)?;
            let upper_minus = quantize_up(&polar_transform_minus(upper)?, l, upgrader)?;
            next.push((lower_minus, upper_minus));
            let lower_plus = quantize_down(&polar_transform_plus(lower)?, l, degrader)?;
            let upper_plus = quantize_up(&polar_transform_plus(upper)?, l, upgrader)?;
            next.push((lower_plus, upper_plus));
        }
        chains = next;
    }
    let entries = chains
        .iter()
        .enumerate()
        .map(|(index, (lower, upper))| PolarEntry {
            index,
            lower_i: lower.mutual_information(),
            upper_i: upper.mutual_information(),
        })
        .collect();
    Ok(PolarReport {
        depth,
        l,
        degrader,
        upgrader,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Channel;
    use crate::testutil::{bec, bsc};
    use alloc::vec;
    use core::f64::consts::LN_2;

    #[test]
    fn bec_transforms_follow_erasure_recursion() {
        let eps = 0.3;
        let minus = polar_transform_minus(&bec(eps)).unwrap();
        let plus = polar_transform_plus(&bec(eps)).unwrap();
        let expect_minus = 2.0 * eps - eps * eps;
        let expect_plus = eps * eps;
        assert!(
            (minus.mutual_information() - (1.0 - expect_minus) * LN_2).abs() < 1e-12
        );
        assert!((plus.mutual_information() - (1.0 - expect_plus) * LN_2).abs() < 1e-12);
        // After duplicate merging the minus transform is exactly a BEC.
        let merged = minus.merge_duplicate_letters(1e-9);
        assert!(merged.output_size() <= 4);
    }

    #[test]
    fn noiseless_stays_noiseless() {
        let ch = bsc(0.0);
        for t in [polar_transform_minus(&ch).unwrap(), polar_transform_plus(&ch).unwrap()] {
            assert!((t.mutual_information() - LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn transform_conserves_information() {
        let ch = bsc(0.11);
        let minus = polar_transform_minus(&ch).unwrap();
        let plus = polar_transform_plus(&ch).unwrap();
        let sum = minus.mutual_information() + plus.mutual_information();
        assert!((sum - 2.0 * ch.mutual_information()).abs() < 1e-10);
    }

    #[test]
    fn depth_zero_reports_channel_information() {
        let ch = bsc(0.11);
        let report = polar_construct(
            &ch,
            0,
            64,
            DegraderKind::GreedyMerge,
            UpgraderKind::GreedySplit,
        )
        .unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].lower_i, ch.mutual_information());
        assert_eq!(report.entries[0].upper_i, ch.mutual_information());
    }

    #[test]
    fn bec_sandwich_is_tight() {
        let report = polar_construct(
            &bec(0.5),
            3,
            64,
            DegraderKind::GreedyMerge,
            UpgraderKind::GreedySplit,
        )
        .unwrap();
        assert_eq!(report.entries.len(), 8);
        for entry in &report.entries {
            assert!((entry.upper_i - entry.lower_i).abs() < 1e-9);
            assert!(entry.lower_i <= entry.upper_i + 1e-9);
        }
    }

    #[test]
    fn bsc_sandwich_valid_and_conserving() {
        let ch = bsc(0.11);
        let report = polar_construct(
            &ch,
            4,
            16,
            DegraderKind::GreedyMerge,
            UpgraderKind::GreedySplit,
        )
        .unwrap();
        let total = (1u64 << 4) as f64 * ch.mutual_information();
        let lower_sum: f64 = report.entries.iter().map(|e| e.lower_i).sum();
        let upper_sum: f64 = report.entries.iter().map(|e| e.upper_i).sum();
        assert!(lower_sum <= total + 1e-6);
        assert!(upper_sum >= total - 1e-6);
        for entry in &report.entries {
            assert!(entry.lower_i <= entry.upper_i + 1e-9);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let ch = bsc(0.11);
        assert!(matches!(
            polar_construct(&ch, 13, 64, DegraderKind::GreedyMerge, UpgraderKind::GreedySplit),
            Err(PolarError::BadDepth { .. })
        ));
        assert!(matches!(
            polar_construct(&ch, 2, 4, DegraderKind::GreedyMerge, UpgraderKind::GreedySplit),
            Err(PolarError::BadTargetSize { .. })
        ));
        let skew = Channel::new(
            vec![vec![0.9, 0.1], vec![0.1, 0.9]],
            vec![0.3, 0.7],
            None,
        )
        .unwrap();
        assert!(matches!(
            polar_transform_minus(&skew),
            Err(PolarError::NonUniformInput)
        ));
    }
}
