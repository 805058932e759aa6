//! Closed-form envelope constants and bound evaluators.
//!
//! The degrading side is governed by ν(|𝒳|) (total-loss envelope
//! `ν·L^(−2/(|𝒳|−1))`) and μ(|𝒳|) = 2ν/(|𝒳|−1) (per-merge envelope
//! `μ·m^(−(|𝒳|+1)/(|𝒳|−1))` at current alphabet size m). Binary upgrading is
//! governed by the doubled constants `2ν(2)·L⁻²` and `2μ(2)·m⁻³`, and the
//! upgrading cost is lower-bounded by κ(|𝒳|)·L^(−2/(|𝒳|−1)). The critical
//! sphere-packing radius r ties μ to the per-merge bound through
//! `μ·|𝒴|^(−(|𝒳|+1)/(|𝒳|−1)) = (4|𝒳|/|𝒴|)·r`.
//!
//! Γ is only ever needed at integer and half-integer points and is evaluated
//! exactly there (factorial recurrence from Γ(1/2) = √π), never through a
//! general approximation.

use core::f64::consts::PI;
use core::fmt;

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundsError {
    DomainError { what: &'static str, value: f64 },
}

impl fmt::Display for BoundsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundsError::DomainError { what, value } => {
                write!(f, "argument {what} = {value} outside domain")
            }
        }
    }
}

impl core::error::Error for BoundsError {}

/// Γ(twice/2) for positive `twice`, via the recurrence Γ(x+1) = xΓ(x) from
/// Γ(1/2) = √π and Γ(1) = 1.
fn gamma_half(twice: u64) -> f64 {
    debug_assert!(twice >= 1);
    let mut value;
    let mut arg; // current argument, in halves
    if twice % 2 == 0 {
        value = 1.0; // Γ(1)
        arg = 2;
    } else {
        value = math::sqrt(PI); // Γ(1/2)
        arg = 1;
    }
    while arg < twice {
        value *= arg as f64 / 2.0;
        arg += 2;
    }
    value
}

fn check_input_size(input_size: usize) -> Result<f64, BoundsError> {
    if input_size < 2 {
        return Err(BoundsError::DomainError {
            what: "input_size",
            value: input_size as f64,
        });
    }
    Ok(input_size as f64)
}

/// ν(|𝒳|) = π|𝒳|(|𝒳|−1)/(2(√(1+1/(2(|𝒳|−1)))−1)²) ·
/// (2|𝒳|/Γ(1+(|𝒳|−1)/2))^(2/(|𝒳|−1)).
pub fn nu(input_size: usize) -> Result<f64, BoundsError> {
    let k = check_input_size(input_size)?;
    let root = math::sqrt(1.0 + 1.0 / (2.0 * (k - 1.0))) - 1.0;
    let gamma = gamma_half(input_size as u64 + 1); // Γ(1 + (k-1)/2) = Γ((k+1)/2)
    let front = PI * k * (k - 1.0) / (2.0 * root * root);
    Ok(front * math::powf(2.0 * k / gamma, 2.0 / (k - 1.0)))
}

/// μ(|𝒳|) = 2ν(|𝒳|)/(|𝒳|−1).
pub fn mu(input_size: usize) -> Result<f64, BoundsError> {
    let k = check_input_size(input_size)?;
    Ok(2.0 / (k - 1.0) * nu(input_size)?)
}

/// κ(|𝒳|) = (|𝒳|−1)/(2π(|𝒳|+1)) · (Γ(1+(|𝒳|−1)/2)/(|𝒳|−1)!)^(2/(|𝒳|−1)).
pub fn kappa(input_size: usize) -> Result<f64, BoundsError> {
    let k = check_input_size(input_size)?;
    let gamma = gamma_half(input_size as u64 + 1);
    let mut factorial = 1.0;
    for i in 2..input_size {
        factorial *= i as f64;
    }
    let front = (k - 1.0) / (2.0 * PI * (k + 1.0));
    Ok(front * math::powf(gamma / factorial, 2.0 / (k - 1.0)))
}

/// The critical sphere-packing radius
/// r = (π/4)(√(1+1/(2(|𝒳|−1)))−1)^(−2) · (2|𝒳|/Γ(1+(|𝒳|−1)/2))^(2/(|𝒳|−1))
/// · |𝒴|^(−2/(|𝒳|−1)), defined for |𝒴| > 2|𝒳|.
pub fn r_critical(input_size: usize, alphabet_size: usize) -> Result<f64, BoundsError> {
    let k = check_input_size(input_size)?;
    if alphabet_size <= 2 * input_size {
        return Err(BoundsError::DomainError {
            what: "alphabet_size",
            value: alphabet_size as f64,
        });
    }
    let root = math::sqrt(1.0 + 1.0 / (2.0 * (k - 1.0))) - 1.0;
    let gamma = gamma_half(input_size as u64 + 1);
    let y = alphabet_size as f64;
    Ok(PI / 4.0 / (root * root)
        * math::powf(2.0 * k / gamma, 2.0 / (k - 1.0))
        * math::powf(y, -2.0 / (k - 1.0)))
}

/// Total degrading-loss envelope `ν(|𝒳|)·L^(−2/(|𝒳|−1))`, valid for
/// L ≥ 2|𝒳|.
pub fn degrade_envelope(input_size: usize, l: usize) -> Result<f64, BoundsError> {
    let k = check_input_size(input_size)?;
    Ok(nu(input_size)? * math::powf(l as f64, -2.0 / (k - 1.0)))
}

/// Per-merge envelope `μ(|𝒳|)·m^(−(|𝒳|+1)/(|𝒳|−1))`, valid while the current
/// alphabet size m exceeds 2|𝒳|.
pub fn degrade_step_envelope(input_size: usize, m: usize) -> Result<f64, BoundsError> {
    let k = check_input_size(input_size)?;
    Ok(mu(input_size)? * math::powf(m as f64, -(k + 1.0) / (k - 1.0)))
}

/// Total binary upgrading-gain envelope `2ν(2)·L⁻²`, valid for L ≥ 8.
pub fn upgrade_envelope_binary(l: usize) -> Result<f64, BoundsError> {
    let lf = l as f64;
    Ok(2.0 * nu(2)? / (lf * lf))
}

/// Per-split binary envelope `2μ(2)·m⁻³`, valid while the current alphabet
/// size m exceeds 8.
pub fn upgrade_step_envelope_binary(m: usize) -> Result<f64, BoundsError> {
    let mf = m as f64;
    Ok(2.0 * mu(2)? / (mf * mf * mf))
}

/// Lower envelope on the upgrading cost, `κ(|𝒳|)·L^(−2/(|𝒳|−1))`.
pub fn upgrade_lower_envelope(input_size: usize, l: usize) -> Result<f64, BoundsError> {
    let k = check_input_size(input_size)?;
    Ok(kappa(input_size)? * math::powf(l as f64, -2.0 / (k - 1.0)))
}

/// The theoretical envelope values evaluated for one (|𝒳|, |𝒴|, L) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub input_size: usize,
    pub alphabet_size: Option<usize>,
    pub target_l: usize,
    pub nu: f64,
    pub mu: f64,
    pub kappa: f64,
    /// Present when an alphabet size > 2|𝒳| was supplied.
    pub r_critical: Option<f64>,
    /// ν·L^(−2/(|𝒳|−1)).
    pub degrade_envelope: f64,
    /// 2ν(2)·L⁻², binary input only.
    pub upgrade_envelope: Option<f64>,
    /// κ·L^(−2/(|𝒳|−1)).
    pub upgrade_lower_envelope: f64,
}

impl BoundReport {
    pub fn evaluate(
        input_size: usize,
        target_l: usize,
        alphabet_size: Option<usize>,
    ) -> Result<Self, BoundsError> {
        if target_l == 0 {
            return Err(BoundsError::DomainError {
                what: "target_l",
                value: 0.0,
            });
        }
        let r_critical = match alphabet_size {
            Some(y) => Some(r_critical(input_size, y)?),
            None => None,
        };
        Ok(BoundReport {
            input_size,
            alphabet_size,
            target_l,
            nu: nu(input_size)?,
            mu: mu(input_size)?,
            kappa: kappa(input_size)?,
            r_critical,
            degrade_envelope: degrade_envelope(input_size, target_l)?,
            upgrade_envelope: if input_size == 2 {
                Some(upgrade_envelope_binary(target_l)?)
            } else {
                None
            },
            upgrade_lower_envelope: upgrade_lower_envelope(input_size, target_l)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nu_matches_high_precision_oracle() {
        // Frozen 50-digit evaluations of the closed form.
        assert!((nu(2).unwrap() - 1267.0693741524936).abs() / 1267.0693741524936 < 1e-14);
        assert!((nu(3).unwrap() - 4058.8986820659152).abs() / 4058.8986820659152 < 1e-14);
    }

    #[test]
    fn nu_large_input_approximation() {
        // nu(|X|) ~ 16*pi*e*|X|^3; the ratio at 64 is 1.0434 (oracle-confirmed).
        let k = 64.0f64;
        let ratio = nu(64).unwrap() / (16.0 * PI * core::f64::consts::E * k * k * k);
        assert!((ratio - 1.0).abs() < 0.25);
        assert!((ratio - 1.0433890823642359).abs() < 1e-12);
    }

    #[test]
    fn mu_is_scaled_nu() {
        assert_eq!(mu(2).unwrap(), 2.0 * nu(2).unwrap());
        let k = 5.0;
        assert!((mu(5).unwrap() - 2.0 / (k - 1.0) * nu(5).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn kappa_binary_is_one_twenty_fourth() {
        // Gamma(3/2)^2 = pi/4 collapses the closed form to 1/24.
        let k2 = kappa(2).unwrap();
        assert!((k2 - 1.0 / 24.0).abs() < (1.0 / 24.0) * 1e-12);
    }

    #[test]
    fn kappa_large_input_approximation() {
        let ratio = kappa(64).unwrap() * 4.0 * PI * 63.0 / core::f64::consts::E;
        assert!((ratio - 1.0).abs() < 0.25);
        assert!((ratio - 0.9586656684492305).abs() < 1e-12);
    }

    #[test]
    fn kappa_below_nu() {
        for k in 2..=16 {
            assert!(kappa(k).unwrap() < nu(k).unwrap());
        }
    }

    #[test]
    fn r_consistency_with_mu() {
        // mu(|X|)*|Y|^(-(|X|+1)/(|X|-1)) = (4|X|/|Y|) * r.
        for (k, y) in [(2usize, 100usize), (3, 50), (4, 200)] {
            let kf = k as f64;
            let yf = y as f64;
            let lhs = mu(k).unwrap() * math::powf(yf, -(kf + 1.0) / (kf - 1.0));
            let rhs = 4.0 * kf / yf * r_critical(k, y).unwrap();
            assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(rhs));
        }
    }

    #[test]
    fn r_scaling_and_monotonicity() {
        // Binary: r proportional to |Y|^-2 exactly.
        let ratio = r_critical(2, 200).unwrap() / r_critical(2, 100).unwrap();
        assert_eq!(ratio, 0.25);
        let mut prev = f64::INFINITY;
        for y in [7, 10, 100, 1000] {
            let r = r_critical(3, y).unwrap();
            assert!(r < prev);
            prev = r;
        }
        assert!(r_critical(2, 4).is_err());
    }

    #[test]
    fn envelopes_positive_and_decreasing() {
        let mut prev = f64::INFINITY;
        for l in [4, 8, 16, 32, 64] {
            let env = degrade_envelope(2, l).unwrap();
            assert!(env > 0.0 && env < prev);
            prev = env;
        }
        // kappa envelope sits below the doubled-nu upgrade envelope.
        for l in [8, 16, 32] {
            assert!(
                upgrade_lower_envelope(2, l).unwrap() < upgrade_envelope_binary(l).unwrap()
            );
        }
    }

    #[test]
    fn report_shape() {
        let report = BoundReport::evaluate(2, 16, Some(100)).unwrap();
        assert!(report.r_critical.is_some());
        assert!(report.upgrade_envelope.is_some());
        assert!(report.nu > 0.0 && report.mu > 0.0 && report.kappa > 0.0);
        let ternary = BoundReport::evaluate(3, 16, None).unwrap();
        assert!(ternary.upgrade_envelope.is_none());
        assert!(ternary.r_critical.is_none());
    }
}
