//! Channels, their joint/posterior views, and intermediate channels.
//!
//! A [`Channel`] couples a fixed input distribution with a row-stochastic
//! transition matrix `W(y|x)`. Construction validates both and silently drops
//! output letters with zero marginal mass, so every surviving letter has
//! `π(y) > 0` and a well-defined posterior vector.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::functionals::eta_raw;
use crate::math;

/// Tolerance used when validating stochasticity and distributions.
pub const VALIDATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelError {
    /// A transition row does not sum to 1 within [`VALIDATION_TOL`], or
    /// contains a negative entry.
    NonStochasticRow { row: usize, sum: f64 },
    /// The input distribution has a non-positive entry or a bad sum.
    BadInputDist { index: Option<usize>, sum: f64 },
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
}

impl fmt::Display for ChannelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelError::NonStochasticRow { row, sum } => {
                write!(f, "transition row {row} is not stochastic (sum {sum})")
            }
            ChannelError::BadInputDist {
                index: Some(i),
                sum: _,
            } => {
                write!(f, "input distribution entry {i} is not positive")
            }
            ChannelError::BadInputDist { index: None, sum } => {
                write!(f, "input distribution sums to {sum}, expected 1")
            }
            ChannelError::DimensionMismatch {
                context,
                expected,
                actual,
            } => {
                write!(f, "dimension mismatch in {context}: expected {expected}, got {actual}")
            }
        }
    }
}

impl core::error::Error for ChannelError {}

/// A discrete memoryless channel together with its input distribution.
///
/// Invariants established at construction:
/// * every transition row sums to 1 within [`VALIDATION_TOL`];
/// * every input probability is positive and they sum to 1 within tolerance;
/// * every output letter has marginal mass `π(y) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    input_dist: Vec<f64>,
    /// Row per input letter: `transition[x][y] = W(y|x)`.
    transition: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
}

/// Builds a validated [`Channel`], dropping output letters with zero marginal
/// mass. Returns the channel and the kept-letter index map (original indices
/// of the surviving letters, in order).
pub fn build_channel(
    transition: Vec<Vec<f64>>,
    input_dist: Vec<f64>,
    labels: Option<Vec<String>>,
) -> Result<(Channel, Vec<usize>), ChannelError> {
    if transition.len() < 2 {
        return Err(ChannelError::DimensionMismatch {
            context: "input alphabet size",
            expected: 2,
            actual: transition.len(),
        });
    }
    if input_dist.len() != transition.len() {
        return Err(ChannelError::DimensionMismatch {
            context: "input distribution length",
            expected: transition.len(),
            actual: input_dist.len(),
        });
    }
    let cols = transition[0].len();
    if cols == 0 {
        return Err(ChannelError::DimensionMismatch {
            context: "output alphabet size",
            expected: 1,
            actual: 0,
        });
    }
    for (x, row) in transition.iter().enumerate() {
        if row.len() != cols {
            return Err(ChannelError::DimensionMismatch {
                context: "transition row length",
                expected: cols,
                actual: row.len(),
            });
        }
        let mut sum = 0.0;
        for &w in row {
            if w < 0.0 || !w.is_finite() {
                return Err(ChannelError::NonStochasticRow { row: x, sum: w });
            }
            sum += w;
        }
        if math::abs(sum - 1.0) > VALIDATION_TOL {
            return Err(ChannelError::NonStochasticRow { row: x, sum });
        }
    }
    let mut dist_sum = 0.0;
    for (i, &p) in input_dist.iter().enumerate() {
        if p <= 0.0 || !p.is_finite() {
            return Err(ChannelError::BadInputDist {
                index: Some(i),
                sum: p,
            });
        }
        dist_sum += p;
    }
    if math::abs(dist_sum - 1.0) > VALIDATION_TOL {
        return Err(ChannelError::BadInputDist {
            index: None,
            sum: dist_sum,
        });
    }
    if let Some(ref l) = labels {
        if l.len() != cols {
            return Err(ChannelError::DimensionMismatch {
                context: "label count",
                expected: cols,
                actual: l.len(),
            });
        }
    }

    let mut kept = Vec::with_capacity(cols);
    for y in 0..cols {
        let mass: f64 = input_dist
            .iter()
            .zip(transition.iter())
            .map(|(&px, row)| px * row[y])
            .sum();
        if mass > 0.0 {
            kept.push(y);
        }
    }
    let (transition, labels) = if kept.len() == cols {
        (transition, labels)
    } else {
        let slim = transition
            .iter()
            .map(|row| kept.iter().map(|&y| row[y]).collect())
            .collect();
        let slim_labels =
            labels.map(|l| kept.iter().map(|&y| l[y].clone()).collect::<Vec<_>>());
        (slim, slim_labels)
    };
    Ok((
        Channel {
            input_dist,
            transition,
            labels,
        },
        kept,
    ))
}

impl Channel {
    /// [`build_channel`] without the kept-letter map.
    pub fn new(
        transition: Vec<Vec<f64>>,
        input_dist: Vec<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, ChannelError> {
        build_channel(transition, input_dist, labels).map(|(ch, _)| ch)
    }

    pub fn input_size(&self) -> usize {
        self.input_dist.len()
    }

    pub fn output_size(&self) -> usize {
        self.transition[0].len()
    }

    pub fn input_dist(&self) -> &[f64] {
        &self.input_dist
    }

    /// `W(y|x)`.
    pub fn w(&self, y: usize, x: usize) -> f64 {
        self.transition[x][y]
    }

    /// Transition rows, one per input letter.
    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn is_uniform_input(&self) -> bool {
        let u = 1.0 / self.input_size() as f64;
        self.input_dist
            .iter()
            .all(|&p| math::abs(p - u) <= VALIDATION_TOL)
    }

    /// Output marginal `π(y) = Σ_x π(x) W(y|x)`.
    pub fn output_mass(&self, y: usize) -> f64 {
        self.input_dist
            .iter()
            .zip(self.transition.iter())
            .map(|(&px, row)| px * row[y])
            .sum()
    }

    /// Mutual information `I(X;Y)` in nats.
    pub fn mutual_information(&self) -> f64 {
        let input_entropy: f64 = self.input_dist.iter().map(|&p| eta_raw(p)).sum();
        let view = self.joint_view();
        let cond: f64 = (0..view.len())
            .map(|y| {
                view.mass(y)
                    * view
                        .posterior(y)
                        .iter()
                        .map(|&p| eta_raw(p))
                        .sum::<f64>()
            })
            .sum();
        input_entropy - cond
    }

    /// The per-letter (mass, posterior) representation.
    pub fn joint_view(&self) -> JointView {
        let n = self.output_size();
        let k = self.input_size();
        let mut masses = Vec::with_capacity(n);
        let mut posteriors = Vec::with_capacity(n);
        for y in 0..n {
            let mass = self.output_mass(y);
            let mut post = Vec::with_capacity(k);
            for x in 0..k {
                post.push(self.input_dist[x] * self.transition[x][y] / mass);
            }
            masses.push(mass);
            posteriors.push(post);
        }
        JointView { masses, posteriors }
    }

    /// Merges output letters whose posteriors differ by less than `tol` in
    /// max-norm. Masses are summed (exact column summation), so mutual
    /// information is unchanged for exact duplicates.
    pub fn merge_duplicate_letters(&self, tol: f64) -> Channel {
        self.merge_duplicate_letters_with_map(tol).0
    }

    /// [`Channel::merge_duplicate_letters`] plus the map from original letter
    /// index to merged letter index.
    pub fn merge_duplicate_letters_with_map(&self, tol: f64) -> (Channel, Vec<usize>) {
        let view = self.joint_view();
        let n = view.len();
        // Each group: (mass, center posterior, smallest original member).
        let mut groups: Vec<(f64, Vec<f64>, usize)> = (0..n)
            .map(|y| (view.mass(y), view.posterior(y).to_vec(), y))
            .collect();
        let mut membership: Vec<usize> = (0..n).collect(); // original letter -> group slot
        loop {
            let m = groups.len();
            if m <= 1 {
                break;
            }
            // Candidate pairs live inside first-coordinate windows of width tol.
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| {
                groups[a].1[0]
                    .partial_cmp(&groups[b].1[0])
                    .unwrap()
                    .then(groups[a].2.cmp(&groups[b].2))
            });
            let mut parent: Vec<usize> = (0..m).collect();
            fn find(parent: &mut [usize], mut i: usize) -> usize {
                while parent[i] != i {
                    parent[i] = parent[parent[i]];
                    i = parent[i];
                }
                i
            }
            let mut merged_any = false;
            for a in 0..m {
                for b in (a + 1)..m {
                    let (ga, gb) = (order[a], order[b]);
                    if groups[gb].1[0] - groups[ga].1[0] >= tol {
                        break;
                    }
                    let close = groups[ga]
                        .1
                        .iter()
                        .zip(groups[gb].1.iter())
                        .all(|(&u, &v)| math::abs(u - v) < tol);
                    if close {
                        let (ra, rb) = (find(&mut parent, ga), find(&mut parent, gb));
                        if ra != rb {
                            // Root at the group with the smaller original member.
                            let (keep, gone) = if groups[ra].2 <= groups[rb].2 {
                                (ra, rb)
                            } else {
                                (rb, ra)
                            };
                            parent[gone] = keep;
                            merged_any = true;
                        }
                    }
                }
            }
            if !merged_any {
                break;
            }
            // Collapse union-find classes into new groups.
            let mut root_to_new: Vec<Option<usize>> = vec![None; m];
            let mut new_groups: Vec<(f64, Vec<f64>, usize)> = Vec::new();
            let mut slot_to_new: Vec<usize> = vec![0; m];
            for g in 0..m {
                let r = find(&mut parent, g);
                let idx = match root_to_new[r] {
                    Some(idx) => {
                        let (mass, center, min_member) = &mut new_groups[idx];
                        let add = groups[g].0;
                        let total = *mass + add;
                        for (c, p) in center.iter_mut().zip(groups[g].1.iter()) {
                            *c = (*mass * *c + add * p) / total;
                        }
                        *mass = total;
                        *min_member = (*min_member).min(groups[g].2);
                        idx
                    }
                    None => {
                        root_to_new[r] = Some(new_groups.len());
                        new_groups.push(groups[g].clone());
                        new_groups.len() - 1
                    }
                };
                slot_to_new[g] = idx;
            }
            for slot in membership.iter_mut() {
                *slot = slot_to_new[*slot];
            }
            groups = new_groups;
        }
        // Order merged letters by smallest original member.
        let m = groups.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&g| groups[g].2);
        let mut rank = vec![0usize; m];
        for (r, &g) in order.iter().enumerate() {
            rank[g] = r;
        }
        let map: Vec<usize> = membership.iter().map(|&g| rank[g]).collect();
        let transition = self
            .transition
            .iter()
            .map(|row| {
                let mut out = vec![0.0; m];
                for (y, &w) in row.iter().enumerate() {
                    out[map[y]] += w;
                }
                out
            })
            .collect();
        let channel = Channel {
            input_dist: self.input_dist.clone(),
            transition,
            labels: None,
        };
        (channel, map)
    }

    /// Composes the channel with an intermediate channel:
    /// `Q(z|x) = Σ_y W(y|x) Φ(z|y)`. Deterministic maps compose by exact
    /// column summation. Output letters left with zero mass are dropped.
    pub fn apply_intermediate(
        &self,
        phi: &IntermediateChannel,
    ) -> Result<Channel, ChannelError> {
        if phi.source_count() != self.output_size() {
            return Err(ChannelError::DimensionMismatch {
                context: "intermediate channel source alphabet",
                expected: self.output_size(),
                actual: phi.source_count(),
            });
        }
        let t = phi.target_count();
        let rows: Vec<Vec<f64>> = self
            .transition
            .iter()
            .map(|row| {
                let mut out = vec![0.0; t];
                match phi {
                    IntermediateChannel::Deterministic { map, .. } => {
                        for (y, &w) in row.iter().enumerate() {
                            out[map[y]] += w;
                        }
                    }
                    IntermediateChannel::Stochastic { forward, .. } => {
                        for (y, &w) in row.iter().enumerate() {
                            for (z, &f) in forward[y].iter().enumerate() {
                                out[z] += w * f;
                            }
                        }
                    }
                }
                out
            })
            .collect();
        build_channel(rows, self.input_dist.clone(), None).map(|(ch, _)| ch)
    }
}

/// Per-output-letter masses `π_y` and posterior vectors `(y_x)_{x∈𝒳}`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointView {
    masses: Vec<f64>,
    posteriors: Vec<Vec<f64>>,
}

impl JointView {
    pub fn from_parts(masses: Vec<f64>, posteriors: Vec<Vec<f64>>) -> Self {
        assert_eq!(masses.len(), posteriors.len());
        JointView { masses, posteriors }
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn input_size(&self) -> usize {
        self.posteriors.first().map_or(0, Vec::len)
    }

    pub fn mass(&self, y: usize) -> f64 {
        self.masses[y]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn posterior(&self, y: usize) -> &[f64] {
        &self.posteriors[y]
    }

    pub fn posteriors(&self) -> &[Vec<f64>] {
        &self.posteriors
    }

    /// Rebuilds the channel for a given input distribution by Bayes
    /// inversion: `W(y|x) = y_x π_y / π(x)`.
    pub fn to_channel(&self, input_dist: &[f64]) -> Result<Channel, ChannelError> {
        let k = self.input_size();
        if input_dist.len() != k {
            return Err(ChannelError::DimensionMismatch {
                context: "input distribution length",
                expected: k,
                actual: input_dist.len(),
            });
        }
        let rows = (0..k)
            .map(|x| {
                (0..self.len())
                    .map(|y| self.posteriors[y][x] * self.masses[y] / input_dist[x])
                    .collect()
            })
            .collect();
        build_channel(rows, input_dist.to_vec(), None).map(|(ch, _)| ch)
    }
}

/// The channel Φ linking an original channel to its degraded or upgraded
/// counterpart.
///
/// `forward` rows are indexed by the source alphabet (the composed channel's
/// output): for degrading, `Φ(z|y)`; for upgrading, `Φ(y|z)`. Upgrading
/// intermediates also carry the reverse channel `Φ_{z|y} = Φ(y|z) π_z / π_y`,
/// rows indexed by `y`.
#[derive(Debug, Clone, PartialEq)]
pub enum IntermediateChannel {
    Deterministic {
        /// `map[y] = z`.
        map: Vec<usize>,
        target_count: usize,
    },
    Stochastic {
        forward: Vec<Vec<f64>>,
        reverse: Vec<Vec<f64>>,
    },
}

impl IntermediateChannel {
    pub fn identity(n: usize) -> Self {
        IntermediateChannel::Deterministic {
            map: (0..n).collect(),
            target_count: n,
        }
    }

    pub fn source_count(&self) -> usize {
        match self {
            IntermediateChannel::Deterministic { map, .. } => map.len(),
            IntermediateChannel::Stochastic { forward, .. } => forward.len(),
        }
    }

    pub fn target_count(&self) -> usize {
        match self {
            IntermediateChannel::Deterministic { target_count, .. } => *target_count,
            IntermediateChannel::Stochastic { forward, .. } => {
                forward.first().map_or(0, Vec::len)
            }
        }
    }

    /// Checks the row-stochasticity invariants within `tol`.
    pub fn validate(&self, tol: f64) -> Result<(), ChannelError> {
        match self {
            IntermediateChannel::Deterministic { map, target_count } => {
                for (y, &z) in map.iter().enumerate() {
                    if z >= *target_count {
                        return Err(ChannelError::DimensionMismatch {
                            context: "deterministic map target",
                            expected: *target_count,
                            actual: y,
                        });
                    }
                }
                Ok(())
            }
            IntermediateChannel::Stochastic { forward, reverse } => {
                for (i, row) in forward.iter().enumerate() {
                    let sum: f64 = row.iter().sum();
                    if math::abs(sum - 1.0) > tol {
                        return Err(ChannelError::NonStochasticRow { row: i, sum });
                    }
                }
                for (i, row) in reverse.iter().enumerate() {
                    let sum: f64 = row.iter().sum();
                    if math::abs(sum - 1.0) > tol {
                        return Err(ChannelError::NonStochasticRow { row: i, sum });
                    }
                }
                Ok(())
            }
        }
    }
}
