//! Scalar and vector functionals: η, entropy, binary KL divergence, the
//! d₁/d₂/d distances, exact per-merge and per-split ΔI, the `i_y` curve and
//! the `q(ζ)` ratio.
//!
//! Everything here is a pure function in nats.

use alloc::vec::Vec;
use core::fmt;

use crate::channel::JointView;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionalError {
    DomainError { what: &'static str, value: f64 },
    DimensionMismatch { left: usize, right: usize },
    IndexError { index: usize, len: usize },
    BoundaryLetter { index: usize },
    DegenerateNeighbors { index: usize },
}

impl fmt::Display for FunctionalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionalError::DomainError { what, value } => {
                write!(f, "argument {what} = {value} outside domain")
            }
            FunctionalError::DimensionMismatch { left, right } => {
                write!(f, "vector lengths differ: {left} vs {right}")
            }
            FunctionalError::IndexError { index, len } => {
                write!(f, "letter index {index} out of range for {len} letters")
            }
            FunctionalError::BoundaryLetter { index } => {
                write!(f, "letter {index} is extreme in posterior order")
            }
            FunctionalError::DegenerateNeighbors { index } => {
                write!(f, "neighbors of letter {index} share a posterior")
            }
        }
    }
}

impl core::error::Error for FunctionalError {}

/// `η(p) = −p ln p` for `p > 0`, with `η(0) = 0`.
pub fn eta(p: f64) -> Result<f64, FunctionalError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(FunctionalError::DomainError { what: "p", value: p });
    }
    Ok(eta_raw(p))
}

/// Unchecked η; callers guarantee `p` is a probability (tiny excursions past
/// 1 from rounding are tolerated).
#[inline]
pub(crate) fn eta_raw(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        // `+ 0.0` turns the -0.0 produced at p = 1 into +0.0.
        -p * math::ln(p) + 0.0
    }
}

/// `h(𝐲) = Σ_x η(y_x)`, the posterior entropy of one output letter.
pub fn entropy_h(posterior: &[f64]) -> Result<f64, FunctionalError> {
    let mut sum = 0.0;
    for &p in posterior {
        if p < 0.0 {
            return Err(FunctionalError::DomainError { what: "entry", value: p });
        }
        sum += p;
    }
    if math::abs(sum - 1.0) > 1e-9 {
        return Err(FunctionalError::DomainError { what: "sum", value: sum });
    }
    Ok(entropy_raw(posterior))
}

#[inline]
pub(crate) fn entropy_raw(posterior: &[f64]) -> f64 {
    posterior.iter().map(|&p| eta_raw(p)).sum()
}

/// Binary entropy in nats.
#[inline]
pub(crate) fn h2(p: f64) -> f64 {
    eta_raw(p) + eta_raw(1.0 - p)
}

/// Binary Kullback-Leibler divergence `d(p‖q)`, `p ∈ [0,1]`, `q ∈ (0,1)`.
pub fn binary_kl(p: f64, q: f64) -> Result<f64, FunctionalError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(FunctionalError::DomainError { what: "p", value: p });
    }
    if q <= 0.0 || q >= 1.0 {
        return Err(FunctionalError::DomainError { what: "q", value: q });
    }
    let t0 = if p > 0.0 { p * math::ln(p / q) } else { 0.0 };
    let t1 = if p < 1.0 {
        (1.0 - p) * math::ln((1.0 - p) / (1.0 - q))
    } else {
        0.0
    };
    Ok(t0 + t1)
}

/// A non-negative extended real. `Infinite` is produced only by [`d2`] on a
/// non-positive argument; keeping it explicit keeps `min`/`max` total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceValue {
    Finite(f64),
    Infinite,
}

impl DistanceValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, DistanceValue::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            DistanceValue::Finite(v) => Some(*v),
            DistanceValue::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            DistanceValue::Finite(v) => *v,
            DistanceValue::Infinite => f64::INFINITY,
        }
    }

    pub fn min(self, other: Self) -> Self {
        match (self, other) {
            (DistanceValue::Finite(a), DistanceValue::Finite(b)) => {
                DistanceValue::Finite(if a <= b { a } else { b })
            }
            (DistanceValue::Finite(a), DistanceValue::Infinite) => DistanceValue::Finite(a),
            (DistanceValue::Infinite, other) => other,
        }
    }

    pub fn max(self, other: Self) -> Self {
        match (self, other) {
            (DistanceValue::Finite(a), DistanceValue::Finite(b)) => {
                DistanceValue::Finite(if a >= b { a } else { b })
            }
            _ => DistanceValue::Infinite,
        }
    }
}

/// `d₁(a, ζ) = |ζ − a|`.
pub fn d1(a: f64, z: f64) -> f64 {
    math::abs(z - a)
}

/// `d₂(a, ζ) = (ζ−a)²/min(a,ζ)` when both are positive, ∞ otherwise.
pub fn d2(a: f64, z: f64) -> DistanceValue {
    if a > 0.0 && z > 0.0 {
        let diff = z - a;
        DistanceValue::Finite(diff * diff / if a <= z { a } else { z })
    } else {
        DistanceValue::Infinite
    }
}

/// `d = min(d₁, d₂)`; always finite since d₁ is.
pub fn d_scalar(a: f64, z: f64) -> DistanceValue {
    DistanceValue::Finite(d1(a, z)).min(d2(a, z))
}

/// `d(𝛂, 𝛇) = max_x d(α_x, ζ_x)`.
pub fn d_vector(alpha: &[f64], zeta: &[f64]) -> Result<DistanceValue, FunctionalError> {
    if alpha.len() != zeta.len() {
        return Err(FunctionalError::DimensionMismatch {
            left: alpha.len(),
            right: zeta.len(),
        });
    }
    let mut out = DistanceValue::Finite(0.0);
    for (&a, &z) in alpha.iter().zip(zeta.iter()) {
        out = out.max(d_scalar(a, z));
    }
    Ok(out)
}

/// Exact mutual-information drop from merging letters with masses `pa`, `pb`
/// and posteriors `a`, `b`:
/// `ΔI = Σ_x [π_γ η(γ_x) − π_α η(α_x) − π_β η(β_x)]` with
/// `γ_x = (π_α α_x + π_β β_x)/(π_α + π_β)`.
pub(crate) fn merge_delta_raw(pa: f64, a: &[f64], pb: f64, b: &[f64]) -> f64 {
    let pg = pa + pb;
    let mut acc = 0.0;
    for x in 0..a.len() {
        let gx = (pa * a[x] + pb * b[x]) / pg;
        acc += pg * eta_raw(gx) - pa * eta_raw(a[x]) - pb * eta_raw(b[x]);
    }
    acc
}

/// Exact ΔI of merging output letters `i` and `j`; symmetric in its letter
/// arguments (they are canonicalized by index before evaluation).
pub fn merge_delta_i(view: &JointView, i: usize, j: usize) -> Result<f64, FunctionalError> {
    let n = view.len();
    if i >= n {
        return Err(FunctionalError::IndexError { index: i, len: n });
    }
    if j >= n || i == j {
        return Err(FunctionalError::IndexError { index: j, len: n });
    }
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    Ok(merge_delta_raw(
        view.mass(i),
        view.posterior(i),
        view.mass(j),
        view.posterior(j),
    ))
}

/// `φ = ‖𝐲_R − 𝐲‖₂ / ‖𝐲_R − 𝐲_L‖₂`, the weight the split letter hands to its
/// left neighbor. For binary posteriors the difference vector is
/// `(Δ₀, −Δ₀)` up to rounding, so the norm is evaluated as `|Δ₀|·√2`; the
/// naive coordinate sum cancels catastrophically for near-equal neighbors.
/// Equals the scalar ratio `(ζ_R − y₀)/(ζ_R − ζ_L)`, asserted below.
pub(crate) fn split_phi(y: &[f64], yl: &[f64], yr: &[f64]) -> f64 {
    let dist = |u: &[f64], v: &[f64]| {
        if u.len() == 2 {
            return math::abs(u[0] - v[0]) * core::f64::consts::SQRT_2;
        }
        let sq: f64 = u
            .iter()
            .zip(v.iter())
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum();
        math::sqrt(sq)
    };
    let phi = dist(yr, y) / dist(yr, yl);
    debug_assert!(
        math::abs(phi - (yr[0] - y[0]) / (yr[0] - yl[0])) <= 1e-12,
        "norm-ratio and scalar-ratio phi disagree"
    );
    phi
}

pub(crate) fn split_delta_raw(py: f64, y: &[f64], yl: &[f64], yr: &[f64]) -> f64 {
    let phi = split_phi(y, yl, yr);
    py * ((entropy_raw(y) - phi * entropy_raw(yl)) - (1.0 - phi) * entropy_raw(yr))
}

/// Exact mutual-information gain from splitting the interior letter `idx` of
/// a binary-input view between its posterior-order neighbors:
/// `ΔI = π_y h(𝐲) − π_y φ h(𝐲_L) − π_y (1−φ) h(𝐲_R)`.
pub fn split_delta_i(view: &JointView, idx: usize) -> Result<f64, FunctionalError> {
    let n = view.len();
    if idx >= n {
        return Err(FunctionalError::IndexError { index: idx, len: n });
    }
    if view.input_size() != 2 {
        return Err(FunctionalError::DomainError {
            what: "input_size",
            value: view.input_size() as f64,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        view.posterior(a)[0]
            .partial_cmp(&view.posterior(b)[0])
            .unwrap()
            .then(a.cmp(&b))
    });
    let pos = order.iter().position(|&y| y == idx).unwrap();
    if pos == 0 || pos == n - 1 {
        return Err(FunctionalError::BoundaryLetter { index: idx });
    }
    let (left, right) = (order[pos - 1], order[pos + 1]);
    if view.posterior(left)[0] == view.posterior(right)[0] {
        return Err(FunctionalError::DegenerateNeighbors { index: idx });
    }
    Ok(split_delta_raw(
        view.mass(idx),
        view.posterior(idx),
        view.posterior(left),
        view.posterior(right),
    ))
}

/// `i_y(ζ₁, ζ₂) = φ h(𝐳₁) + (1−φ) h(𝐳₂)` with `φ = (ζ₂−y₀)/(ζ₂−ζ₁)`, for
/// `0 < ζ₁ < y₀ < ζ₂ < 1`. Increasing in ζ₁ and decreasing in ζ₂.
pub fn iy_curve(y0: f64, zeta1: f64, zeta2: f64) -> Result<f64, FunctionalError> {
    if !(zeta1 > 0.0 && zeta1 < y0 && y0 < zeta2 && zeta2 < 1.0) {
        return Err(FunctionalError::DomainError { what: "ordering", value: y0 });
    }
    let phi = (zeta2 - y0) / (zeta2 - zeta1);
    Ok(phi * h2(zeta1) + (1.0 - phi) * h2(zeta2))
}

/// `q(ζ) = d(ζ₂‖ζ)(ζ−ζ₁)² / [d(ζ₁‖ζ)(ζ₂−ζ)²]` for `0 ≤ ζ₁ < ζ < ζ₂ ≤ 1`;
/// non-decreasing in ζ.
pub fn q_ratio(zeta1: f64, zeta2: f64, zeta: f64) -> Result<f64, FunctionalError> {
    if !(zeta1 >= 0.0 && zeta1 < zeta && zeta < zeta2 && zeta2 <= 1.0) {
        return Err(FunctionalError::DomainError { what: "ordering", value: zeta });
    }
    let num = binary_kl(zeta2, zeta)? * (zeta - zeta1) * (zeta - zeta1);
    let den = binary_kl(zeta1, zeta)? * (zeta2 - zeta) * (zeta2 - zeta);
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Channel;
    use alloc::vec;
    use core::f64::consts::{E, LN_2};

    #[test]
    fn eta_values() {
        assert_eq!(eta(0.0).unwrap(), 0.0);
        assert_eq!(eta(1.0).unwrap(), 0.0);
        assert!((eta(1.0 / E).unwrap() - 1.0 / E).abs() < 1e-15);
        assert!(eta(-0.1).is_err());
        assert!(eta(1.1).is_err());
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy_h(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((entropy_h(&[0.5, 0.5]).unwrap() - LN_2).abs() < 1e-15);
        let third = 1.0 / 3.0;
        assert!((entropy_h(&[third, third, third]).unwrap() - 3.0f64.ln()).abs() < 1e-15);
        assert!(entropy_h(&[-0.1, 1.1]).is_err());
        assert!(entropy_h(&[0.5, 0.4]).is_err());
    }

    #[test]
    fn binary_kl_values() {
        assert_eq!(binary_kl(0.3, 0.3).unwrap(), 0.0);
        assert!((binary_kl(1.0, 0.5).unwrap() - LN_2).abs() < 1e-15);
        // Frozen 50-digit evaluation.
        assert!((binary_kl(0.2, 0.6).unwrap() - 0.33479528671433431).abs() < 1e-15);
        assert!(binary_kl(0.5, 0.0).is_err());
        assert!(binary_kl(0.5, 1.0).is_err());
    }

    #[test]
    fn distance_values() {
        assert_eq!(d1(0.3, 0.3), 0.0);
        assert_eq!(d2(0.3, 0.3), DistanceValue::Finite(0.0));
        assert_eq!(d_scalar(0.3, 0.3), DistanceValue::Finite(0.0));
        assert_eq!(d2(0.0, 0.1), DistanceValue::Infinite);
        assert_eq!(d_scalar(0.0, 0.1), DistanceValue::Finite(0.1));
        let d = d_scalar(0.5, 0.6).finite().unwrap();
        assert!((d - 0.02).abs() < 1e-15);
    }

    #[test]
    fn d_vector_matches_triangle_counterexample() {
        // The three displayed values around the failed triangle inequality.
        let a = [0.1, 0.9];
        let b = [0.2, 0.8];
        let c = [0.3, 0.7];
        assert!((d_vector(&a, &b).unwrap().to_f64() - 0.1).abs() < 1e-15);
        assert!((d_vector(&b, &c).unwrap().to_f64() - 0.05).abs() < 1e-15);
        assert!((d_vector(&a, &c).unwrap().to_f64() - 0.2).abs() < 1e-15);
        assert_eq!(
            d_vector(&a, &a).unwrap(),
            DistanceValue::Finite(0.0)
        );
        assert!(d_vector(&a, &[0.5]).is_err());
    }

    #[test]
    fn merge_delta_equal_posteriors_is_zero() {
        let view = JointView::from_parts(
            vec![0.25, 0.75],
            vec![vec![0.3, 0.7], vec![0.3, 0.7]],
        );
        assert!(merge_delta_i(&view, 0, 1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn merge_delta_is_symmetric_and_matches_recompute() {
        let ch = crate::testutil::example_channel();
        let view = ch.joint_view();
        let a = merge_delta_i(&view, 1, 2).unwrap();
        let b = merge_delta_i(&view, 2, 1).unwrap();
        assert_eq!(a, b);
        // Full recompute: merge letters b and c via an intermediate map.
        let q = ch
            .apply_intermediate(&crate::channel::IntermediateChannel::Deterministic {
                map: vec![0, 1, 1, 2],
                target_count: 3,
            })
            .unwrap();
        let recompute = ch.mutual_information() - q.mutual_information();
        assert!((a - recompute).abs() < 1e-12);
    }

    #[test]
    fn merge_delta_respects_distance_bound() {
        let ch = crate::testutil::example_channel();
        let view = ch.joint_view();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let delta = merge_delta_i(&view, i, j).unwrap();
                let bound = (view.mass(i) + view.mass(j))
                    * view.input_size() as f64
                    * d_vector(view.posterior(i), view.posterior(j))
                        .unwrap()
                        .to_f64();
                assert!(delta <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn split_delta_collinear_midpoint() {
        let view = JointView::from_parts(
            vec![0.45, 0.1, 0.45],
            vec![vec![0.2, 0.8], vec![0.4, 0.6], vec![0.6, 0.4]],
        );
        let delta = split_delta_i(&view, 1).unwrap();
        // Frozen: 0.1 * (h(0.4) - h(0.2)/2 - h(0.6)/2).
        assert!((delta - 0.0086304621735534278).abs() < 1e-15);
        assert!(split_delta_i(&view, 0) == Err(FunctionalError::BoundaryLetter { index: 0 }));
        assert!(split_delta_i(&view, 2) == Err(FunctionalError::BoundaryLetter { index: 2 }));
    }

    #[test]
    fn split_delta_at_left_neighbor_is_zero() {
        let view = JointView::from_parts(
            vec![0.4, 0.2, 0.4],
            vec![vec![0.2, 0.8], vec![0.2, 0.8], vec![0.7, 0.3]],
        );
        assert_eq!(split_delta_i(&view, 1).unwrap(), 0.0);
    }

    #[test]
    fn split_delta_matches_full_recompute() {
        let ch = Channel::new(
            vec![
                vec![0.1, 0.3, 0.25, 0.35],
                vec![0.4, 0.2, 0.3, 0.1],
            ],
            vec![0.4, 0.6],
            None,
        )
        .unwrap();
        let view = ch.joint_view();
        // Order letters by posterior, split an interior one, rebuild, compare.
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| view.posterior(a)[0].partial_cmp(&view.posterior(b)[0]).unwrap());
        let (il, iy, ir) = (order[0], order[1], order[2]);
        let delta = split_delta_i(&view, iy).unwrap();
        let phi = split_phi(view.posterior(iy), view.posterior(il), view.posterior(ir));
        let mut masses = vec![];
        let mut posts = vec![];
        for y in 0..4 {
            if y == iy {
                continue;
            }
            let mut m = view.mass(y);
            if y == il {
                m += phi * view.mass(iy);
            }
            if y == ir {
                m += (1.0 - phi) * view.mass(iy);
            }
            masses.push(m);
            posts.push(view.posterior(y).to_vec());
        }
        let upgraded = JointView::from_parts(masses, posts)
            .to_channel(ch.input_dist())
            .unwrap();
        let recompute = upgraded.mutual_information() - ch.mutual_information();
        assert!((delta - recompute).abs() < 1e-12);
        assert!(delta >= 0.0);
    }

    #[test]
    fn iy_curve_values_and_monotonicity() {
        let at = iy_curve(0.5, 0.25, 0.75).unwrap();
        assert!((at - (0.5 * h2(0.25) + 0.5 * h2(0.75))).abs() < 1e-15);
        // Degenerate limit recovers h(y0).
        assert!((iy_curve(0.4, 0.4 - 1e-9, 0.4 + 1e-9).unwrap() - h2(0.4)).abs() < 1e-7);
        // Increasing in zeta1 at fixed y0 = 0.4, zeta2 = 0.8.
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=30 {
            let z1 = 0.05 + 0.30 * i as f64 / 30.0;
            let v = iy_curve(0.4, z1, 0.8).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        assert!(iy_curve(0.4, 0.5, 0.8).is_err());
    }

    #[test]
    fn q_ratio_values_and_monotonicity() {
        assert_eq!(q_ratio(0.0, 1.0, 0.5).unwrap(), 1.0);
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=60 {
            let z = 0.1 + 0.8 * i as f64 / 61.0;
            let q = q_ratio(0.1, 0.9, z).unwrap();
            assert!(q >= prev - 1e-12, "q regressed at z = {z}");
            prev = q;
        }
        assert!(q_ratio(0.5, 0.4, 0.45).is_err());
    }

    #[test]
    fn kl_derivative_identity_central_difference() {
        // (p-q) d/dp KL(p||q) = KL(p||q) + KL(q||p), checked numerically.
        let (p, q) = (0.3, 0.6);
        let h = 1e-6;
        let deriv = (binary_kl(p + h, q).unwrap() - binary_kl(p - h, q).unwrap()) / (2.0 * h);
        let lhs = (p - q) * deriv;
        let rhs = binary_kl(p, q).unwrap() + binary_kl(q, p).unwrap();
        assert!((lhs - rhs).abs() < 1e-6);
    }
}
