//! Upgrading algorithms for binary-input channels.
//!
//! The optimal upgraded channel with at most `L` letters keeps a subset of
//! the source posteriors (always including both extremes), and every source
//! letter is generated by its two neighbors among the kept posteriors. That
//! characterization drives three routes:
//!
//! * [`optimal_phi_binary`] — given the kept posteriors, the best reverse
//!   channel assigns each letter to its two neighbors with inverse-distance
//!   weights;
//! * [`optimal_upgrade_binary`] — dynamic programming over the sorted source
//!   posteriors to pick the optimal subset in O(L·|𝒴|²);
//! * [`greedy_split`] — iteratively removes the interior letter whose mass
//!   can be pushed to its neighbors at the least gain, in O(|𝒴| log |𝒴|);
//!   [`greedy_split_symmetric`] does the same while preserving conjugate
//!   symmetry.
//!
//! [`upgrade_lower_bound`] computes the Hölder-defect lower bound
//! `Σ_z ½ Σ_{y∈𝒜_z} π_y ‖𝐲−𝐲̄_z‖²` over the Voronoi partition of the source
//! letters, valid for any upgraded pair.

use alloc::collections::{BinaryHeap, BTreeMap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::channel::{Channel, IntermediateChannel, JointView, VALIDATION_TOL};
use crate::functionals::{entropy_raw, split_delta_raw, split_phi};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpgradeError {
    NotBinaryInput { input_size: usize },
    BadTargetSize { l: usize },
    /// The subset does not cover the extreme source posteriors.
    MissingExtremes,
    /// The subset is not sorted, not distinct, or has wrong arity.
    BadSubset,
    NotSymmetric,
    NonUniformInput,
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
}

impl fmt::Display for UpgradeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpgradeError::NotBinaryInput { input_size } => {
                write!(f, "algorithm requires binary input, got {input_size}")
            }
            UpgradeError::BadTargetSize { l } => write!(f, "target size {l} must be at least 2"),
            UpgradeError::MissingExtremes => {
                write!(f, "subset does not cover the extreme posteriors")
            }
            UpgradeError::BadSubset => write!(f, "subset must be sorted, distinct, binary"),
            UpgradeError::NotSymmetric => write!(f, "channel has no conjugate-pair structure"),
            UpgradeError::NonUniformInput => write!(f, "input distribution is not uniform"),
            UpgradeError::DimensionMismatch {
                context,
                expected,
                actual,
            } => write!(f, "dimension mismatch in {context}: expected {expected}, got {actual}"),
        }
    }
}

impl core::error::Error for UpgradeError {}

/// One greedy-split step: `letter` is the original-channel index of the
/// removed letter (smallest member if duplicates were pre-merged).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitStep {
    pub letter: usize,
    pub delta_i: f64,
}

/// An upgraded channel with its stochastic intermediate channel and exact ΔI
/// ledger.
///
/// `view` holds the authoritative per-letter masses and posterior vectors of
/// the upgraded channel; `channel` is derived from it by Bayes inversion.
/// The optimal DP copies selected source posteriors into `view` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct UpgradeResult {
    pub channel: Channel,
    pub view: JointView,
    pub intermediate: IntermediateChannel,
    pub delta_i: f64,
    /// Original-channel indices of the selected letters (optimal DP only).
    pub chosen_subset: Option<Vec<usize>>,
    /// Split ledger (greedy variants only).
    pub step_log: Option<Vec<SplitStep>>,
}

pub(crate) struct PhiOutcome {
    pub intermediate: IntermediateChannel,
    pub delta_i: f64,
    /// Mass of each kept target letter.
    #[cfg_attr(not(test), allow(dead_code))]
    pub masses: Vec<f64>,
    /// Indices into the provided subset that received mass.
    pub kept: Vec<usize>,
}

/// The optimal reverse channel for a fixed set of target posteriors `Z`:
/// each source letter maps to its two posterior-order neighbors in `Z` with
/// weights `‖𝐳_R−𝐲‖/‖𝐳_R−𝐳_L‖` and complement; a letter coinciding with some
/// `𝐳` maps there with weight 1. Returns the intermediate channel (forward
/// and reverse) and the exact upgrading gain `ΔI = Σ_y π_y (h(𝐲) − i_y)`.
///
/// Interior targets that receive no mass are dropped from the result.
pub fn optimal_phi_binary(
    view: &JointView,
    subset: &[Vec<f64>],
) -> Result<(IntermediateChannel, f64), UpgradeError> {
    optimal_phi_binary_full(view, subset).map(|o| (o.intermediate, o.delta_i))
}

pub(crate) fn optimal_phi_binary_full(
    view: &JointView,
    subset: &[Vec<f64>],
) -> Result<PhiOutcome, UpgradeError> {
    if view.input_size() != 2 {
        return Err(UpgradeError::NotBinaryInput {
            input_size: view.input_size(),
        });
    }
    if subset.is_empty() || subset.iter().any(|z| z.len() != 2) {
        return Err(UpgradeError::BadSubset);
    }
    let zs: Vec<f64> = subset.iter().map(|z| z[0]).collect();
    if zs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(UpgradeError::BadSubset);
    }
    let n = view.len();
    let m = subset.len();
    let coverage = 1e-12;
    for y in 0..n {
        let y0 = view.posterior(y)[0];
        if y0 < zs[0] - coverage || y0 > zs[m - 1] + coverage {
            return Err(UpgradeError::MissingExtremes);
        }
    }

    let hz: Vec<f64> = subset.iter().map(|z| entropy_raw(z)).collect();
    let mut reverse = vec![vec![0.0; m]; n];
    let mut masses = vec![0.0; m];
    let mut delta_i = 0.0;
    for y in 0..n {
        let post = view.posterior(y);
        let y0 = post[0];
        let mass = view.mass(y);
        let pos = zs.partition_point(|&z| z < y0);
        let iy = if pos < m && zs[pos] == y0 {
            reverse[y][pos] = 1.0;
            masses[pos] += mass;
            hz[pos]
        } else if pos == 0 {
            // y0 within coverage tolerance left of the leftmost target.
            reverse[y][0] = 1.0;
            masses[0] += mass;
            hz[0]
        } else if pos == m {
            reverse[y][m - 1] = 1.0;
            masses[m - 1] += mass;
            hz[m - 1]
        } else {
            let (lo, hi) = (pos - 1, pos);
            let w_lo = split_phi(post, &subset[lo], &subset[hi]);
            let w_hi = 1.0 - w_lo;
            reverse[y][lo] = w_lo;
            reverse[y][hi] = w_hi;
            masses[lo] += w_lo * mass;
            masses[hi] += w_hi * mass;
            w_lo * hz[lo] + w_hi * hz[hi]
        };
        delta_i += mass * (entropy_raw(post) - iy);
    }

    let kept: Vec<usize> = (0..m).filter(|&z| masses[z] > 0.0).collect();
    let (reverse, masses) = if kept.len() == m {
        (reverse, masses)
    } else {
        let slim_rev = reverse
            .iter()
            .map(|row| kept.iter().map(|&z| row[z]).collect())
            .collect();
        let slim_mass = kept.iter().map(|&z| masses[z]).collect();
        (slim_rev, slim_mass)
    };
    let forward: Vec<Vec<f64>> = (0..masses.len())
        .map(|z| {
            (0..n)
                .map(|y| reverse[y][z] * view.mass(y) / masses[z])
                .collect()
        })
        .collect();
    Ok(PhiOutcome {
        intermediate: IntermediateChannel::Stochastic { forward, reverse },
        delta_i,
        masses,
        kept,
    })
}

/// Sorted positions of the deduplicated letters plus bookkeeping shared by
/// the upgrade entry points.
pub(crate) struct SortedSource {
    #[allow(dead_code)]
    pub(crate) dedup: Channel,
    pub(crate) view: JointView,
    /// original letter -> dedup letter
    pub(crate) dedup_map: Vec<usize>,
    /// sorted position -> dedup letter
    pub(crate) order: Vec<usize>,
    /// dedup letter -> sorted position
    pub(crate) pos_of: Vec<usize>,
    /// sorted position -> smallest original member
    pub(crate) orig_of: Vec<usize>,
}

pub(crate) fn sorted_source(ch: &Channel) -> SortedSource {
    let (dedup, dedup_map) = ch.merge_duplicate_letters_with_map(VALIDATION_TOL);
    let view = dedup.joint_view();
    let m = view.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        view.posterior(a)[0]
            .partial_cmp(&view.posterior(b)[0])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut pos_of = vec![0; m];
    for (pos, &d) in order.iter().enumerate() {
        pos_of[d] = pos;
    }
    let mut orig_of = vec![usize::MAX; m];
    for (y, &d) in dedup_map.iter().enumerate() {
        let pos = pos_of[d];
        if orig_of[pos] == usize::MAX {
            orig_of[pos] = y;
        }
    }
    SortedSource {
        dedup,
        view,
        dedup_map,
        order,
        pos_of,
        orig_of,
    }
}

/// Builds an [`UpgradeResult`] from per-sorted-position reverse rows over the
/// deduplicated letters and the kept positions (ascending).
fn assemble_result(
    ch: &Channel,
    src: &SortedSource,
    kept_positions: &[usize],
    reverse_dedup: Vec<Vec<f64>>, // row per sorted position, col per kept letter
    delta_i: f64,
    chosen_subset: Option<Vec<usize>>,
    step_log: Option<Vec<SplitStep>>,
) -> UpgradeResult {
    let n = ch.output_size();
    let orig_view = ch.joint_view();
    let reverse: Vec<Vec<f64>> = (0..n)
        .map(|y| reverse_dedup[src.pos_of[src.dedup_map[y]]].clone())
        .collect();
    let t = kept_positions.len();
    let mut masses = vec![0.0; t];
    for y in 0..n {
        for z in 0..t {
            masses[z] += reverse[y][z] * orig_view.mass(y);
        }
    }
    let posteriors: Vec<Vec<f64>> = kept_positions
        .iter()
        .map(|&pos| src.view.posterior(src.order[pos]).to_vec())
        .collect();
    let forward: Vec<Vec<f64>> = (0..t)
        .map(|z| {
            (0..n)
                .map(|y| reverse[y][z] * orig_view.mass(y) / masses[z])
                .collect()
        })
        .collect();
    let result_view = JointView::from_parts(masses, posteriors);
    let channel = result_view
        .to_channel(ch.input_dist())
        .expect("upgraded channel is valid");
    UpgradeResult {
        channel,
        view: result_view,
        intermediate: IntermediateChannel::Stochastic { forward, reverse },
        delta_i,
        chosen_subset,
        step_log,
    }
}

fn identity_upgrade(ch: &Channel, src: &SortedSource, optimal: bool) -> UpgradeResult {
    let m = src.view.len();
    let kept: Vec<usize> = (0..m).collect();
    let reverse_dedup: Vec<Vec<f64>> = (0..m)
        .map(|pos| {
            let mut row = vec![0.0; m];
            row[pos] = 1.0;
            row
        })
        .collect();
    let chosen = optimal.then(|| src.orig_of.clone());
    let steps = (!optimal).then(Vec::new);
    assemble_result(ch, src, &kept, reverse_dedup, 0.0, chosen, steps)
}

/// Optimal binary upgrading: selects the ΔI-minimizing subset of at most `l`
/// source posteriors (both extremes always included) by dynamic programming,
/// then applies [`optimal_phi_binary`]. Selected posteriors are copied into
/// the result view unchanged.
pub fn optimal_upgrade_binary(ch: &Channel, l: usize) -> Result<UpgradeResult, UpgradeError> {
    if ch.input_size() != 2 {
        return Err(UpgradeError::NotBinaryInput {
            input_size: ch.input_size(),
        });
    }
    if l < 2 {
        return Err(UpgradeError::BadTargetSize { l });
    }
    let src = sorted_source(ch);
    let m = src.view.len();
    if m <= l {
        return Ok(identity_upgrade(ch, &src, true));
    }

    // Prefix sums over sorted letters: mass, mass*y0, mass*h(y).
    let mut pref_mass = vec![0.0; m + 1];
    let mut pref_moment = vec![0.0; m + 1];
    let mut pref_entropy = vec![0.0; m + 1];
    let zeta: Vec<f64> = src
        .order
        .iter()
        .map(|&d| src.view.posterior(d)[0])
        .collect();
    let hz: Vec<f64> = src
        .order
        .iter()
        .map(|&d| entropy_raw(src.view.posterior(d)))
        .collect();
    for pos in 0..m {
        let mass = src.view.mass(src.order[pos]);
        pref_mass[pos + 1] = pref_mass[pos] + mass;
        pref_moment[pos + 1] = pref_moment[pos] + mass * zeta[pos];
        pref_entropy[pos + 1] = pref_entropy[pos] + mass * hz[pos];
    }
    // Cost of a segment with chosen endpoints i < j: the letters strictly
    // inside lose pi*(h(y) - i_y), and i_y is affine in y0 for fixed
    // endpoints, so prefix sums give O(1) evaluation.
    let cost = |i: usize, j: usize| -> f64 {
        if j == i + 1 {
            return 0.0;
        }
        let mass = pref_mass[j] - pref_mass[i + 1];
        let moment = pref_moment[j] - pref_moment[i + 1];
        let entropy = pref_entropy[j] - pref_entropy[i + 1];
        let width = zeta[j] - zeta[i];
        entropy - (hz[i] * (zeta[j] * mass - moment) + hz[j] * (moment - zeta[i] * mass)) / width
    };

    let lmax = l.min(m);
    // dp[k][j]: minimal cost with k chosen letters, position j chosen last,
    // covering everything up to j. Position 0 is always chosen.
    let mut dp = vec![vec![f64::INFINITY; m]; lmax + 1];
    let mut from = vec![vec![0usize; m]; lmax + 1];
    dp[1][0] = 0.0;
    for k in 2..=lmax {
        for j in (k - 1)..m {
            let mut best = f64::INFINITY;
            let mut arg = 0;
            for i in (k - 2)..j {
                let prev = dp[k - 1][i];
                if prev.is_finite() {
                    let c = prev + cost(i, j);
                    if c < best {
                        best = c;
                        arg = i;
                    }
                }
            }
            dp[k][j] = best;
            from[k][j] = arg;
        }
    }
    let mut kbest = 2;
    for k in 3..=lmax {
        if dp[k][m - 1] < dp[kbest][m - 1] {
            kbest = k;
        }
    }
    let mut chosen_positions = Vec::with_capacity(kbest);
    let mut j = m - 1;
    let mut k = kbest;
    loop {
        chosen_positions.push(j);
        if k == 1 {
            break;
        }
        j = from[k][j];
        k -= 1;
    }
    chosen_positions.reverse();
    debug_assert_eq!(chosen_positions[0], 0);

    let subset: Vec<Vec<f64>> = chosen_positions
        .iter()
        .map(|&pos| src.view.posterior(src.order[pos]).to_vec())
        .collect();
    let outcome = optimal_phi_binary_full(&src.view, &subset)?;
    debug_assert_eq!(outcome.kept.len(), subset.len());
    debug_assert!((outcome.delta_i - dp[kbest][m - 1]).abs() <= 1e-9);

    // Reverse rows from optimal_phi_binary_full are indexed by dedup letter
    // order (the view passed in); re-index them by sorted position.
    let IntermediateChannel::Stochastic { reverse, .. } = &outcome.intermediate else {
        unreachable!()
    };
    let reverse_by_pos: Vec<Vec<f64>> = (0..m)
        .map(|pos| reverse[src.order[pos]].clone())
        .collect();
    let chosen_orig: Vec<usize> = chosen_positions.iter().map(|&p| src.orig_of[p]).collect();
    Ok(assemble_result(
        ch,
        &src,
        &chosen_positions,
        reverse_by_pos,
        outcome.delta_i,
        Some(chosen_orig),
        None,
    ))
}

#[derive(Debug, Clone, Copy)]
struct SplitEntry {
    delta: f64,
    pos: usize,
    version: u32,
}

impl PartialEq for SplitEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for SplitEntry {}
impl PartialOrd for SplitEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for SplitEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.delta
            .total_cmp(&other.delta)
            .then(self.pos.cmp(&other.pos))
    }
}

/// Mutable state shared by the greedy split variants: a doubly linked list
/// over sorted positions with per-position mass, plus the reverse-channel
/// composition (which original letters currently sit on each position).
struct SplitState {
    mass: Vec<f64>,
    left: Vec<usize>,
    right: Vec<usize>,
    alive: Vec<bool>,
    version: Vec<u32>,
    supporters: Vec<BTreeMap<usize, f64>>,
    count: usize,
}

const NIL: usize = usize::MAX;

impl SplitState {
    fn new(src: &SortedSource) -> Self {
        let m = src.view.len();
        let mut supporters: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); m];
        for (y, &d) in src.dedup_map.iter().enumerate() {
            supporters[src.pos_of[d]].insert(y, 1.0);
        }
        let mut left = vec![NIL; m];
        let mut right = vec![NIL; m];
        for pos in 0..m {
            if pos > 0 {
                left[pos] = pos - 1;
            }
            if pos + 1 < m {
                right[pos] = pos + 1;
            }
        }
        SplitState {
            mass: src.order.iter().map(|&d| src.view.mass(d)).collect(),
            left,
            right,
            alive: vec![true; m],
            version: vec![0; m],
            supporters,
            count: m,
        }
    }

    fn interior(&self, pos: usize) -> bool {
        self.left[pos] != NIL && self.right[pos] != NIL
    }

    fn delta(&self, src: &SortedSource, pos: usize) -> f64 {
        split_delta_raw(
            self.mass[pos],
            src.view.posterior(src.order[pos]),
            src.view.posterior(src.order[self.left[pos]]),
            src.view.posterior(src.order[self.right[pos]]),
        )
    }

    /// Splits `pos` between its neighbors; returns (left, right).
    fn split(&mut self, src: &SortedSource, pos: usize) -> (usize, usize) {
        let (l, r) = (self.left[pos], self.right[pos]);
        let phi = split_phi(
            src.view.posterior(src.order[pos]),
            src.view.posterior(src.order[l]),
            src.view.posterior(src.order[r]),
        );
        self.mass[l] += phi * self.mass[pos];
        self.mass[r] += (1.0 - phi) * self.mass[pos];
        let moved = core::mem::take(&mut self.supporters[pos]);
        for (y, w) in moved {
            *self.supporters[l].entry(y).or_insert(0.0) += w * phi;
            *self.supporters[r].entry(y).or_insert(0.0) += w * (1.0 - phi);
        }
        self.alive[pos] = false;
        self.right[l] = r;
        self.left[r] = l;
        self.version[l] += 1;
        self.version[r] += 1;
        self.count -= 1;
        (l, r)
    }

    fn entry_valid(&self, e: &SplitEntry) -> bool {
        self.alive[e.pos] && self.version[e.pos] == e.version && self.interior(e.pos)
    }

    fn finish(
        self,
        ch: &Channel,
        src: &SortedSource,
        delta_i: f64,
        step_log: Vec<SplitStep>,
    ) -> UpgradeResult {
        let m = self.alive.len();
        let kept: Vec<usize> = (0..m).filter(|&p| self.alive[p]).collect();
        let t = kept.len();
        let mut col_of = vec![usize::MAX; m];
        for (c, &p) in kept.iter().enumerate() {
            col_of[p] = c;
        }
        let n = ch.output_size();
        let mut reverse_orig = vec![vec![0.0; t]; n];
        for (p, map) in self.supporters.iter().enumerate() {
            if !self.alive[p] {
                continue;
            }
            for (&y, &w) in map {
                reverse_orig[y][col_of[p]] = w;
            }
        }
        // Re-index rows by sorted position for assemble_result.
        let reverse_by_pos: Vec<Vec<f64>> = (0..m)
            .map(|pos| reverse_orig[src.orig_of[pos]].clone())
            .collect();
        assemble_result(ch, src, &kept, reverse_by_pos, delta_i, None, Some(step_log))
    }
}

/// Greedy-split: while more than `l` letters remain, removes the interior
/// letter with the smallest exact split gain, handing its mass to its two
/// posterior-order neighbors. Ties break toward the smallest position.
pub fn greedy_split(ch: &Channel, l: usize) -> Result<UpgradeResult, UpgradeError> {
    if ch.input_size() != 2 {
        return Err(UpgradeError::NotBinaryInput {
            input_size: ch.input_size(),
        });
    }
    if l < 2 {
        return Err(UpgradeError::BadTargetSize { l });
    }
    let src = sorted_source(ch);
    let m = src.view.len();
    if m <= l {
        return Ok(identity_upgrade(ch, &src, false));
    }
    let mut state = SplitState::new(&src);
    let mut heap: BinaryHeap<core::cmp::Reverse<SplitEntry>> = BinaryHeap::new();
    for pos in 1..(m - 1) {
        heap.push(core::cmp::Reverse(SplitEntry {
            delta: state.delta(&src, pos),
            pos,
            version: 0,
        }));
    }
    let mut step_log = Vec::with_capacity(m - l);
    while state.count > l {
        let e = loop {
            let core::cmp::Reverse(e) = heap.pop().expect("interior letter exists");
            if state.entry_valid(&e) {
                break e;
            }
        };
        step_log.push(SplitStep {
            letter: src.orig_of[e.pos],
            delta_i: e.delta,
        });
        let (lpos, rpos) = state.split(&src, e.pos);
        for p in [lpos, rpos] {
            if state.interior(p) {
                heap.push(core::cmp::Reverse(SplitEntry {
                    delta: state.delta(&src, p),
                    pos: p,
                    version: state.version[p],
                }));
            }
        }
    }
    let delta_i = step_log.iter().map(|s| s.delta_i).sum();
    Ok(state.finish(ch, &src, delta_i, step_log))
}

/// Conjugate-pair structure of a symmetric binary channel over sorted
/// positions: position `p` pairs with `m-1-p`; an odd count has a
/// self-conjugate center letter at posterior 1/2.
fn check_symmetric(src: &SortedSource) -> Result<(), UpgradeError> {
    let m = src.view.len();
    for p in 0..(m + 1) / 2 {
        let q = m - 1 - p;
        let a = src.view.posterior(src.order[p]);
        let b = src.view.posterior(src.order[q]);
        if math::abs(a[0] - (1.0 - b[0])) > VALIDATION_TOL {
            return Err(UpgradeError::NotSymmetric);
        }
        let ma = src.view.mass(src.order[p]);
        let mb = src.view.mass(src.order[q]);
        if math::abs(ma - mb) > VALIDATION_TOL {
            return Err(UpgradeError::NotSymmetric);
        }
    }
    Ok(())
}

/// Greedy-split restricted to conjugate pairs: the candidate letter must sit
/// strictly left of posterior 1/2 with its right neighbor not past 1/2; its
/// conjugate is split in the same step, so the output keeps the channel's
/// symmetry. A letter exactly at 1/2 is its own conjugate and is split once.
pub fn greedy_split_symmetric(ch: &Channel, l: usize) -> Result<UpgradeResult, UpgradeError> {
    if ch.input_size() != 2 {
        return Err(UpgradeError::NotBinaryInput {
            input_size: ch.input_size(),
        });
    }
    if l < 2 {
        return Err(UpgradeError::BadTargetSize { l });
    }
    if !ch.is_uniform_input() {
        return Err(UpgradeError::NonUniformInput);
    }
    let src = sorted_source(ch);
    check_symmetric(&src)?;
    let m = src.view.len();
    if m <= l {
        return Ok(identity_upgrade(ch, &src, false));
    }
    let center = (m % 2 == 1).then_some(m / 2);
    let zeta = |pos: usize| src.view.posterior(src.order[pos])[0];

    let mut state = SplitState::new(&src);
    let mut heap: BinaryHeap<core::cmp::Reverse<SplitEntry>> = BinaryHeap::new();
    let eligible = |state: &SplitState, pos: usize| -> bool {
        if !state.alive[pos] || !state.interior(pos) {
            return false;
        }
        if Some(pos) == center {
            return true;
        }
        zeta(pos) < 0.5 && zeta(state.right[pos]) <= 0.5
    };
    let push = |heap: &mut BinaryHeap<core::cmp::Reverse<SplitEntry>>,
                state: &SplitState,
                pos: usize| {
        if eligible(state, pos) {
            heap.push(core::cmp::Reverse(SplitEntry {
                delta: state.delta(&src, pos),
                pos,
                version: state.version[pos],
            }));
        }
    };
    for pos in 1..(m - 1) {
        push(&mut heap, &state, pos);
    }

    let mut step_log = Vec::new();
    let mut split_and_log = |state: &mut SplitState,
                             heap: &mut BinaryHeap<core::cmp::Reverse<SplitEntry>>,
                             pos: usize| {
        step_log.push(SplitStep {
            letter: src.orig_of[pos],
            delta_i: state.delta(&src, pos),
        });
        let (lpos, rpos) = state.split(&src, pos);
        // Both neighbors changed; refresh their candidate entries.
        if eligible(state, lpos) {
            heap.push(core::cmp::Reverse(SplitEntry {
                delta: state.delta(&src, lpos),
                pos: lpos,
                version: state.version[lpos],
            }));
        }
        if eligible(state, rpos) {
            heap.push(core::cmp::Reverse(SplitEntry {
                delta: state.delta(&src, rpos),
                pos: rpos,
                version: state.version[rpos],
            }));
        }
    };

    while state.count > l {
        let center_alive = center.map_or(false, |c| state.alive[c]);
        if state.count - l == 1 && center_alive {
            let c = center.unwrap();
            split_and_log(&mut state, &mut heap, c);
            continue;
        }
        let candidate = loop {
            match heap.pop() {
                Some(core::cmp::Reverse(e)) if state.entry_valid(&e) => break Some(e.pos),
                Some(_) => continue,
                None => break None,
            }
        };
        let pos = match candidate {
            Some(pos) => pos,
            None => {
                // The innermost left-half letter is blocked when its right
                // neighbor lies past 1/2; splitting it with its conjugate
                // still preserves symmetry.
                let mut fallback = None;
                let mut p = 0;
                while p != NIL {
                    if state.interior(p) && zeta(p) < 0.5 {
                        fallback = Some(p);
                    }
                    p = state.right[p];
                }
                fallback
                    .or(center.filter(|&c| state.alive[c] && state.interior(c)))
                    .expect("splittable letter exists")
            }
        };
        if Some(pos) == center {
            split_and_log(&mut state, &mut heap, pos);
            continue;
        }
        let conj = m - 1 - pos;
        split_and_log(&mut state, &mut heap, pos);
        split_and_log(&mut state, &mut heap, conj);
    }
    let delta_i = step_log.iter().map(|s| s.delta_i).sum();
    Ok(state.finish(ch, &src, delta_i, step_log))
}

/// The Voronoi partition of the source letters around the upgraded letters,
/// with mass-weighted centers. Ties go to the smallest target index.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiAssignment {
    pub sets: Vec<Vec<usize>>,
    pub centers: Vec<Option<Vec<f64>>>,
}

pub fn voronoi_assignment(w_view: &JointView, q_view: &JointView) -> VoronoiAssignment {
    let t = q_view.len();
    let mut sets: Vec<Vec<usize>> = vec![Vec::new(); t];
    for y in 0..w_view.len() {
        let post = w_view.posterior(y);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for z in 0..t {
            let d: f64 = q_view
                .posterior(z)
                .iter()
                .zip(post.iter())
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            if d < best_d {
                best_d = d;
                best = z;
            }
        }
        sets[best].push(y);
    }
    let centers = sets
        .iter()
        .map(|members| {
            if members.is_empty() {
                return None;
            }
            let k = w_view.input_size();
            let mut total = 0.0;
            let mut center = vec![0.0; k];
            for &y in members {
                let mass = w_view.mass(y);
                total += mass;
                for x in 0..k {
                    center[x] += mass * w_view.posterior(y)[x];
                }
            }
            for c in center.iter_mut() {
                *c /= total;
            }
            Some(center)
        })
        .collect();
    VoronoiAssignment { sets, centers }
}

/// Hölder-defect lower bound on the upgrading gain:
/// `ΔI ≥ Σ_z ½ Σ_{y∈𝒜_z} π_y ‖𝐲 − 𝐲̄_z‖²` where 𝒜_z is the Voronoi cell of z
/// and 𝐲̄_z its mass-weighted center.
pub fn upgrade_lower_bound(w: &Channel, q: &Channel) -> Result<f64, UpgradeError> {
    if w.input_size() != q.input_size() {
        return Err(UpgradeError::DimensionMismatch {
            context: "input alphabet",
            expected: w.input_size(),
            actual: q.input_size(),
        });
    }
    if w
        .input_dist()
        .iter()
        .zip(q.input_dist().iter())
        .any(|(&a, &b)| math::abs(a - b) > VALIDATION_TOL)
    {
        return Err(UpgradeError::DimensionMismatch {
            context: "input distribution",
            expected: w.input_size(),
            actual: q.input_size(),
        });
    }
    let w_view = w.joint_view();
    let q_view = q.joint_view();
    let assignment = voronoi_assignment(&w_view, &q_view);
    let mut bound = 0.0;
    for (members, center) in assignment.sets.iter().zip(assignment.centers.iter()) {
        let Some(center) = center else { continue };
        for &y in members {
            let sq: f64 = w_view
                .posterior(y)
                .iter()
                .zip(center.iter())
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            bound += 0.5 * w_view.mass(y) * sq;
        }
    }
    Ok(bound)
}

/// Checks that `result` genuinely upgrades `w` within `tol`: the reverse
/// channel is row-stochastic and reconstructs every source posterior and
/// mass, and composing the upgraded channel with the forward Φ reproduces
/// `w`.
pub fn verify_upgraded(w: &Channel, result: &UpgradeResult, tol: f64) -> bool {
    let IntermediateChannel::Stochastic { forward, reverse } = &result.intermediate else {
        return false;
    };
    let n = w.output_size();
    let t = result.view.len();
    if reverse.len() != n || forward.len() != t {
        return false;
    }
    let w_view = w.joint_view();
    for y in 0..n {
        let row = &reverse[y];
        if row.len() != t {
            return false;
        }
        let sum: f64 = row.iter().sum();
        if math::abs(sum - 1.0) > tol {
            return false;
        }
        for x in 0..w.input_size() {
            let rebuilt: f64 = (0..t)
                .map(|z| row[z] * result.view.posterior(z)[x])
                .sum();
            if math::abs(rebuilt - w_view.posterior(y)[x]) > tol {
                return false;
            }
        }
    }
    for z in 0..t {
        let mass: f64 = (0..n).map(|y| reverse[y][z] * w_view.mass(y)).sum();
        if math::abs(mass - result.view.mass(z)) > tol {
            return false;
        }
    }
    match result.channel.apply_intermediate(&result.intermediate) {
        Ok(composed) => {
            if composed.output_size() != n {
                return false;
            }
            for x in 0..w.input_size() {
                for y in 0..n {
                    if math::abs(composed.w(y, x) - w.w(y, x)) > tol {
                        return false;
                    }
                }
            }
            true
        }
        Err(_) => false,
    }
}
