//! Brute-force reference implementations and seeded instance generators,
//! used exclusively for verification.
//!
//! All generators draw from a ChaCha20 stream seeded with
//! `seed_from_u64(seed)`, so instances are reproducible across platforms.
//! The exact derivations are documented on each generator and treated as
//! frozen: changing them invalidates recorded expectations.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha20Rng;
use rand_core::{Rng, SeedableRng};

use crate::channel::{build_channel, Channel, IntermediateChannel};
use crate::degrade::DegradeResult;
use crate::functionals::entropy_raw;
use crate::math;
use crate::upgrade::{optimal_phi_binary_full, sorted_source};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleError {
    TooLarge { output_size: usize, limit: usize },
    NotBinaryInput { input_size: usize },
    InfeasibleFloor { mass_floor: f64, output_size: usize },
    BadSpec(&'static str),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooLarge { output_size, limit } => {
                write!(f, "output alphabet {output_size} exceeds brute-force limit {limit}")
            }
            OracleError::NotBinaryInput { input_size } => {
                write!(f, "oracle requires binary input, got {input_size}")
            }
            OracleError::InfeasibleFloor {
                mass_floor,
                output_size,
            } => write!(f, "mass floor {mass_floor} infeasible for {output_size} letters"),
            OracleError::BadSpec(what) => write!(f, "bad generator spec: {what}"),
        }
    }
}

impl core::error::Error for OracleError {}

/// Parameters of a seeded random channel instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub input_size: usize,
    pub output_size: usize,
    pub seed: u64,
    /// Minimum output-letter mass enforced by construction.
    pub mass_floor: f64,
}

impl RandomSpec {
    pub const DEFAULT_MASS_FLOOR: f64 = 1e-4;

    pub fn new(input_size: usize, output_size: usize, seed: u64) -> Self {
        RandomSpec {
            input_size,
            output_size,
            seed,
            mass_floor: Self::DEFAULT_MASS_FLOOR,
        }
    }
}

/// Uniform draw in (0, 1): 53 mantissa bits offset by half an ulp so the
/// endpoints are unreachable.
fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// Standard exponential via inversion.
fn exponential(rng: &mut ChaCha20Rng) -> f64 {
    -math::ln(uniform(rng))
}

fn check_spec(spec: &RandomSpec) -> Result<(), OracleError> {
    if spec.input_size < 2 {
        return Err(OracleError::BadSpec("input_size must be at least 2"));
    }
    if spec.output_size < spec.input_size {
        return Err(OracleError::BadSpec("output_size must be at least input_size"));
    }
    if !(0.0..1.0).contains(&spec.mass_floor) {
        return Err(OracleError::BadSpec("mass_floor must lie in [0, 1)"));
    }
    if spec.mass_floor >= 1.0 / spec.output_size as f64 {
        return Err(OracleError::InfeasibleFloor {
            mass_floor: spec.mass_floor,
            output_size: spec.output_size,
        });
    }
    Ok(())
}

/// Mixes the transition toward the uniform-column channel with the smallest
/// coefficient that lifts every output mass to the floor.
fn enforce_floor(transition: &mut [Vec<f64>], input_dist: &[f64], floor: f64) {
    let m = transition[0].len();
    let uniform_col = 1.0 / m as f64;
    let mut lambda: f64 = 0.0;
    for y in 0..m {
        let mass: f64 = input_dist
            .iter()
            .zip(transition.iter())
            .map(|(&px, row)| px * row[y])
            .sum();
        if mass < floor {
            lambda = lambda.max((floor - mass) / (uniform_col - mass));
        }
    }
    if lambda == 0.0 {
        return;
    }
    let lambda = (lambda * (1.0 + 1e-9)).min(1.0);
    for row in transition.iter_mut() {
        for w in row.iter_mut() {
            *w = (1.0 - lambda) * *w + lambda * uniform_col;
        }
    }
}

/// Seeded random channel.
///
/// Frozen derivation: draw `input_size` exponentials for the input
/// distribution (normalized, then mixed 10% toward uniform), then one row of
/// `output_size` exponentials per input letter (each row normalized, a
/// Dirichlet(1,…,1) sample). If any output mass falls below `mass_floor`,
/// the whole transition is mixed toward the uniform-column channel just
/// enough to lift it.
pub fn random_channel(spec: &RandomSpec) -> Result<Channel, OracleError> {
    check_spec(spec)?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let k = spec.input_size;
    let raw: Vec<f64> = (0..k).map(|_| exponential(&mut rng)).collect();
    let total: f64 = raw.iter().sum();
    let input_dist: Vec<f64> = raw
        .iter()
        .map(|&e| 0.9 * (e / total) + 0.1 / k as f64)
        .collect();
    finish_random(rng, spec, input_dist)
}

/// [`random_channel`] with a uniform input distribution; the stream then
/// starts directly with the transition rows.
pub fn random_uniform_input_channel(spec: &RandomSpec) -> Result<Channel, OracleError> {
    check_spec(spec)?;
    let rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let input_dist = vec![1.0 / spec.input_size as f64; spec.input_size];
    finish_random(rng, spec, input_dist)
}

fn finish_random(
    mut rng: ChaCha20Rng,
    spec: &RandomSpec,
    input_dist: Vec<f64>,
) -> Result<Channel, OracleError> {
    let m = spec.output_size;
    let mut transition: Vec<Vec<f64>> = (0..spec.input_size)
        .map(|_| {
            let raw: Vec<f64> = (0..m).map(|_| exponential(&mut rng)).collect();
            let total: f64 = raw.iter().sum();
            raw.iter().map(|&e| e / total).collect()
        })
        .collect();
    enforce_floor(&mut transition, &input_dist, spec.mass_floor);
    Ok(build_channel(transition, input_dist, None)
        .expect("generated channel is valid")
        .0)
}

/// Seeded random cyclo-symmetric channel with uniform input.
///
/// Frozen derivation: `output_size` must be a multiple of `input_size`;
/// draw one base value per (group, input letter) in group order, normalize
/// by the grand total (rows then sum to 1 automatically), lift group weights
/// to `input_size·mass_floor` by mixing toward the uniform base, lay letters
/// out as `W(y_i^{(θ)}|x) = b_i[(x−θ) mod |𝒳|]`, then shuffle the letters
/// with a Fisher-Yates pass over the same stream.
pub fn random_cyclo_channel(spec: &RandomSpec) -> Result<Channel, OracleError> {
    check_spec(spec)?;
    if spec.output_size % spec.input_size != 0 {
        return Err(OracleError::BadSpec(
            "output_size must be a multiple of input_size",
        ));
    }
    let k = spec.input_size;
    let m = spec.output_size;
    let groups = m / k;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut base: Vec<Vec<f64>> = (0..groups)
        .map(|_| (0..k).map(|_| exponential(&mut rng)).collect())
        .collect();
    let total: f64 = base.iter().flatten().sum();
    for b in base.iter_mut().flatten() {
        *b /= total;
    }
    // Group weight |b_i| is k times each member letter's mass.
    let group_floor = k as f64 * spec.mass_floor;
    let uniform_base = 1.0 / m as f64;
    let mut lambda: f64 = 0.0;
    for b in &base {
        let weight: f64 = b.iter().sum();
        if weight < group_floor {
            lambda = lambda.max((group_floor - weight) / (1.0 / groups as f64 - weight));
        }
    }
    if lambda > 0.0 {
        let lambda = (lambda * (1.0 + 1e-9)).min(1.0);
        for b in base.iter_mut().flatten() {
            *b = (1.0 - lambda) * *b + lambda * uniform_base;
        }
    }
    let mut perm: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    let mut transition = vec![vec![0.0; m]; k];
    for (i, b) in base.iter().enumerate() {
        for theta in 0..k {
            let letter = perm[i * k + theta];
            for (x, row) in transition.iter_mut().enumerate() {
                row[letter] = b[(x + k - theta) % k];
            }
        }
    }
    let input_dist = vec![1.0 / k as f64; k];
    Ok(build_channel(transition, input_dist, None)
        .expect("generated channel is valid")
        .0)
}

/// Exhaustive optimal degrading: enumerates every partition of the output
/// letters into at most `l` blocks and returns the smallest loss with an
/// achieving assignment (letter -> block). Guarded to |𝒴| ≤ 10.
pub fn brute_degrade(ch: &Channel, l: usize) -> Result<(f64, Vec<usize>), OracleError> {
    const LIMIT: usize = 10;
    let n = ch.output_size();
    if n > LIMIT {
        return Err(OracleError::TooLarge {
            output_size: n,
            limit: LIMIT,
        });
    }
    if l == 0 {
        return Err(OracleError::BadSpec("l must be at least 1"));
    }
    let view = ch.joint_view();
    let k = ch.input_size();
    let total_entropy: f64 = (0..n)
        .map(|y| view.mass(y) * entropy_raw(view.posterior(y)))
        .sum();

    struct Search<'a> {
        view: &'a crate::channel::JointView,
        k: usize,
        l: usize,
        total_entropy: f64,
        assign: Vec<usize>,
        mass: Vec<f64>,
        moment: Vec<f64>, // flattened blocks x inputs
        best: f64,
        best_assign: Vec<usize>,
    }
    impl Search<'_> {
        fn go(&mut self, letter: usize, open: usize) {
            let n = self.assign.len();
            if letter == n {
                let mut delta = -self.total_entropy;
                let mut center = vec![0.0; self.k];
                for b in 0..open {
                    for x in 0..self.k {
                        center[x] = self.moment[b * self.k + x] / self.mass[b];
                    }
                    delta += self.mass[b] * entropy_raw(&center);
                }
                if delta < self.best {
                    self.best = delta;
                    self.best_assign = self.assign.clone();
                }
                return;
            }
            let mass = self.view.mass(letter);
            let reach = if open < self.l { open + 1 } else { open };
            for b in 0..reach {
                self.assign[letter] = b;
                self.mass[b] += mass;
                for x in 0..self.k {
                    self.moment[b * self.k + x] += mass * self.view.posterior(letter)[x];
                }
                self.go(letter + 1, open.max(b + 1));
                self.mass[b] -= mass;
                for x in 0..self.k {
                    self.moment[b * self.k + x] -= mass * self.view.posterior(letter)[x];
                }
            }
        }
    }
    let mut search = Search {
        view: &view,
        k,
        l,
        total_entropy,
        assign: vec![0; n],
        mass: vec![0.0; n.min(l)],
        moment: vec![0.0; n.min(l) * k],
        best: f64::INFINITY,
        best_assign: vec![0; n],
    };
    search.go(0, 0);
    Ok((search.best, search.best_assign))
}

/// Exhaustive optimal binary upgrading within the subset class: enumerates
/// every subset of distinct source posteriors that contains both extremes
/// and has at most `l` members, evaluating each with the optimal reverse
/// channel. Guarded to |𝒴| ≤ 14. Returns the minimal gain and an achieving
/// subset as original letter indices.
pub fn brute_upgrade_binary(ch: &Channel, l: usize) -> Result<(f64, Vec<usize>), OracleError> {
    const LIMIT: usize = 14;
    let n = ch.output_size();
    if n > LIMIT {
        return Err(OracleError::TooLarge {
            output_size: n,
            limit: LIMIT,
        });
    }
    if ch.input_size() != 2 {
        return Err(OracleError::NotBinaryInput {
            input_size: ch.input_size(),
        });
    }
    if l < 2 {
        return Err(OracleError::BadSpec("l must be at least 2"));
    }
    let src = sorted_source(ch);
    let m = src.view.len();
    if m <= l {
        return Ok((0.0, src.orig_of.clone()));
    }
    let interior = m - 2;
    let max_extra = l - 2;
    let mut best = f64::INFINITY;
    let mut best_positions: Vec<usize> = Vec::new();
    for mask in 0u64..(1u64 << interior) {
        if (mask.count_ones() as usize) > max_extra {
            continue;
        }
        let mut positions = Vec::with_capacity(2 + max_extra);
        positions.push(0);
        for b in 0..interior {
            if mask & (1 << b) != 0 {
                positions.push(b + 1);
            }
        }
        positions.push(m - 1);
        let subset: Vec<Vec<f64>> = positions
            .iter()
            .map(|&pos| src.view.posterior(src.order[pos]).to_vec())
            .collect();
        let outcome =
            optimal_phi_binary_full(&src.view, &subset).expect("source subsets are valid");
        if outcome.delta_i < best {
            best = outcome.delta_i;
            best_positions = positions;
        }
    }
    let chosen = best_positions.iter().map(|&p| src.orig_of[p]).collect();
    Ok((best, chosen))
}

/// Checks that a degrading result is consistent: its intermediate map is
/// deterministic and composing it with `w` reproduces the reduced channel
/// within `tol`.
pub fn verify_degraded(w: &Channel, result: &DegradeResult, tol: f64) -> bool {
    if !matches!(result.intermediate, IntermediateChannel::Deterministic { .. }) {
        return false;
    }
    let composed = match w.apply_intermediate(&result.intermediate) {
        Ok(c) => c,
        Err(_) => return false,
    };
    if composed.output_size() != result.channel.output_size()
        || composed.input_size() != result.channel.input_size()
    {
        return false;
    }
    for x in 0..composed.input_size() {
        for z in 0..composed.output_size() {
            if math::abs(composed.w(z, x) - result.channel.w(z, x)) > tol {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrade::{greedy_merge, optimal_degrade_binary};
    use crate::testutil::example_channel;

    #[test]
    fn random_channel_is_deterministic_and_valid() {
        let spec = RandomSpec::new(2, 50, 1);
        let a = random_channel(&spec).unwrap();
        let b = random_channel(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.output_size(), 50);
        let c = random_channel(&RandomSpec::new(2, 50, 2)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_channel_respects_floor() {
        let spec = RandomSpec::new(3, 30, 7);
        let ch = random_channel(&spec).unwrap();
        for y in 0..30 {
            assert!(ch.output_mass(y) >= spec.mass_floor);
        }
        let tight = RandomSpec {
            mass_floor: 0.03,
            ..RandomSpec::new(3, 30, 7)
        };
        let ch = random_channel(&tight).unwrap();
        for y in 0..30 {
            assert!(ch.output_mass(y) >= tight.mass_floor);
        }
        let infeasible = RandomSpec {
            mass_floor: 0.05,
            ..RandomSpec::new(2, 30, 7)
        };
        assert!(matches!(
            random_channel(&infeasible).unwrap_err(),
            OracleError::InfeasibleFloor { .. }
        ));
    }

    #[test]
    fn random_cyclo_channel_detects() {
        for seed in 0..5 {
            let ch = random_cyclo_channel(&RandomSpec::new(3, 12, seed)).unwrap();
            crate::degrade::detect_cyclo_symmetry(&ch).unwrap();
        }
    }

    #[test]
    fn brute_degrade_example() {
        let ch = example_channel();
        let (delta, assign) = brute_degrade(&ch, 2).unwrap();
        assert!((delta - 0.13230412471889828).abs() < 1e-12);
        assert_eq!(assign, vec![0, 0, 1, 1]);
        let (full, _) = brute_degrade(&ch, 4).unwrap();
        assert!(full.abs() < 1e-15);
        // Greedy never beats the oracle.
        let greedy = greedy_merge(&ch, 2).unwrap();
        assert!(delta <= greedy.delta_i + 1e-12);
        // And the binary DP matches it.
        let dp = optimal_degrade_binary(&ch, 2).unwrap();
        assert!((dp.delta_i - delta).abs() < 1e-10);
    }

    #[test]
    fn brute_degrade_guard() {
        let ch = random_channel(&RandomSpec::new(2, 12, 3)).unwrap();
        assert!(matches!(
            brute_degrade(&ch, 3).unwrap_err(),
            OracleError::TooLarge { .. }
        ));
    }

    #[test]
    fn brute_upgrade_example() {
        let ch = example_channel();
        let (delta, subset) = brute_upgrade_binary(&ch, 2).unwrap();
        assert_eq!(subset, vec![0, 3]);
        let expected = core::f64::consts::LN_2 - ch.mutual_information();
        assert!((delta - expected).abs() < 1e-12);
        let (full, _) = brute_upgrade_binary(&ch, 4).unwrap();
        assert_eq!(full, 0.0);
    }

    #[test]
    fn verify_degraded_catches_wrong_map() {
        let ch = example_channel();
        let mut result = greedy_merge(&ch, 2).unwrap();
        assert!(verify_degraded(&ch, &result, 1e-12));
        if let IntermediateChannel::Deterministic { map, .. } = &mut result.intermediate {
            map[3] = 0;
        }
        assert!(!verify_degraded(&ch, &result, 1e-12));
    }
}
