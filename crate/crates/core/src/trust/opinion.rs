use serde::{Deserialize, Serialize};

use super::TrustError;

/// Additivity tolerance for `belief + disbelief + uncertainty = 1`.
pub const OPINION_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_BASE_RATE: f64 = 0.5;
const BASE_RATE_TOLERANCE: f64 = 1e-12;

/// A binomial subjective-logic opinion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Opinion {
    pub belief: f64,
    pub disbelief: f64,
    pub uncertainty: f64,
    pub base_rate: f64,
}

fn unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// Snaps rounding noise just outside [0, 1] back in.
fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

impl Opinion {
    pub fn new(belief: f64, disbelief: f64, uncertainty: f64, base_rate: f64) -> Result<Opinion, TrustError> {
        let o = Opinion { belief, disbelief, uncertainty, base_rate };
        o.validate()?;
        Ok(o)
    }

    pub fn vacuous(base_rate: f64) -> Opinion {
        Opinion { belief: 0.0, disbelief: 0.0, uncertainty: 1.0, base_rate }
    }

    /// Full belief in the hypothesis, as asserted by a signed sign or signal.
    pub fn certain(base_rate: f64) -> Opinion {
        Opinion { belief: 1.0, disbelief: 0.0, uncertainty: 0.0, base_rate }
    }

    pub fn validate(&self) -> Result<(), TrustError> {
        let parts = [self.belief, self.disbelief, self.uncertainty, self.base_rate];
        if parts.iter().any(|x| !x.is_finite() || !unit(*x)) {
            return Err(TrustError::InvalidOpinion(*self));
        }
        if (self.belief + self.disbelief + self.uncertainty - 1.0).abs() > OPINION_TOLERANCE {
            return Err(TrustError::InvalidOpinion(*self));
        }
        Ok(())
    }

    pub fn is_vacuous(&self) -> bool {
        self.belief == 0.0 && self.disbelief == 0.0 && self.uncertainty == 1.0
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// Projected probability `b + a·u`.
    pub fn expected(&self) -> f64 {
        self.belief + self.base_rate * self.uncertainty
    }

    /// Weakens the opinion by the trust placed in its source. The uncertainty is
    /// computed as `u + (1 - t)(b + d)`, equal to `1 - t(b + d)` for a valid
    /// opinion but exact at `t = 1`.
    pub fn discount(&self, trust: f64) -> Result<Opinion, TrustError> {
        if !trust.is_finite() || !unit(trust) {
            return Err(TrustError::DomainError(format!("trust {trust} outside [0, 1]")));
        }
        Ok(Opinion {
            belief: trust * self.belief,
            disbelief: trust * self.disbelief,
            uncertainty: clamp_unit(self.uncertainty + (1.0 - trust) * (self.belief + self.disbelief)),
            base_rate: self.base_rate,
        })
    }

    fn check_base_rate(&self, other: &Opinion) -> Result<(), TrustError> {
        if (self.base_rate - other.base_rate).abs() > BASE_RATE_TOLERANCE {
            return Err(TrustError::BaseRateMismatch(self.base_rate, other.base_rate));
        }
        Ok(())
    }

    fn mean(&self, other: &Opinion) -> Opinion {
        Opinion {
            belief: (self.belief + other.belief) / 2.0,
            disbelief: (self.disbelief + other.disbelief) / 2.0,
            uncertainty: (self.uncertainty + other.uncertainty) / 2.0,
            base_rate: self.base_rate,
        }
    }

    /// Cumulative fusion of independent evidence. The vacuous opinion is the
    /// identity; two dogmatic opinions fuse to their mean.
    pub fn fuse_cumulative(&self, other: &Opinion) -> Result<Opinion, TrustError> {
        self.check_base_rate(other)?;
        if self.is_vacuous() {
            return Ok(*other);
        }
        if other.is_vacuous() {
            return Ok(*self);
        }
        let (ua, ub) = (self.uncertainty, other.uncertainty);
        let kappa = ua + ub - ua * ub;
        if kappa == 0.0 {
            return Ok(self.mean(other));
        }
        Ok(Opinion {
            belief: clamp_unit((self.belief * ub + other.belief * ua) / kappa),
            disbelief: clamp_unit((self.disbelief * ub + other.disbelief * ua) / kappa),
            uncertainty: clamp_unit(ua * ub / kappa),
            base_rate: self.base_rate,
        })
    }

    /// Averaging fusion of dependent evidence; idempotent.
    pub fn fuse_averaging(&self, other: &Opinion) -> Result<Opinion, TrustError> {
        self.check_base_rate(other)?;
        let (ua, ub) = (self.uncertainty, other.uncertainty);
        let sum = ua + ub;
        if sum == 0.0 {
            return Ok(self.mean(other));
        }
        Ok(Opinion {
            belief: clamp_unit((self.belief * ub + other.belief * ua) / sum),
            disbelief: clamp_unit((self.disbelief * ub + other.disbelief * ua) / sum),
            uncertainty: clamp_unit(2.0 * ua * ub / sum),
            base_rate: self.base_rate,
        })
    }
}

/// Averaging fusion over any number of opinions: the mean of their evidence.
/// Identical inputs return that opinion exactly. Reduces to [`Opinion::fuse_averaging`] for two inputs and is invariant under
/// permutation. If any input is dogmatic, the result is the mean of the
/// dogmatic inputs (the limit of the evidence mean).
pub fn fuse_averaging_all(opinions: &[Opinion]) -> Result<Opinion, TrustError> {
    let first = opinions.first().ok_or(TrustError::NoOpinions)?;
    if opinions.iter().all(|o| o == first) {
        return Ok(*first);
    }
    for o in &opinions[1..] {
        first.check_base_rate(o)?;
    }
    let dogmatic: Vec<&Opinion> = opinions.iter().filter(|o| o.uncertainty == 0.0).collect();
    if !dogmatic.is_empty() {
        let n = dogmatic.len() as f64;
        let belief = dogmatic.iter().map(|o| o.belief).sum::<f64>() / n;
        let disbelief = dogmatic.iter().map(|o| o.disbelief).sum::<f64>() / n;
        return Ok(Opinion {
            belief,
            disbelief,
            uncertainty: clamp_unit(1.0 - belief - disbelief),
            base_rate: first.base_rate,
        });
    }
    let n = opinions.len() as f64;
    let r = opinions.iter().map(|o| o.belief / o.uncertainty).sum::<f64>() / n;
    let s = opinions.iter().map(|o| o.disbelief / o.uncertainty).sum::<f64>() / n;
    let total = r + s + 1.0;
    Ok(Opinion {
        belief: clamp_unit(r / total),
        disbelief: clamp_unit(s / total),
        uncertainty: clamp_unit(1.0 / total),
        base_rate: first.base_rate,
    })
}

/// Left fold of cumulative fusion; the vacuous opinion for an empty slice.
pub fn fuse_cumulative_all(opinions: &[Opinion], base_rate: f64) -> Result<Opinion, TrustError> {
    opinions.iter().try_fold(Opinion::vacuous(base_rate), |acc, o| acc.fuse_cumulative(o))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(b: f64, d: f64, u: f64) -> Opinion {
        Opinion::new(b, d, u, 0.5).unwrap()
    }

    fn close(x: &Opinion, y: &Opinion) -> bool {
        (x.belief - y.belief).abs() < 1e-12
            && (x.disbelief - y.disbelief).abs() < 1e-12
            && (x.uncertainty - y.uncertainty).abs() < 1e-12
    }

    #[test]
    fn validation() {
        assert!(Opinion::new(0.5, 0.5, 0.5, 0.5).is_err());
        assert!(Opinion::new(-0.1, 0.6, 0.5, 0.5).is_err());
        assert!(Opinion::new(0.2, 0.3, 0.5, 1.1).is_err());
        assert!(Opinion::new(f64::NAN, 0.0, 1.0, 0.5).is_err());
        assert!(Opinion::new(0.2, 0.3, 0.5, 0.0).is_ok());
    }

    #[test]
    fn discount_edges() {
        let x = op(0.8, 0.1, 0.1);
        assert_eq!(x.discount(1.0).unwrap(), x);
        let v = x.discount(0.0).unwrap();
        assert_eq!((v.belief, v.disbelief), (0.0, 0.0));
        assert!((v.uncertainty - 1.0).abs() < 1e-15);
        assert!(matches!(x.discount(1.5), Err(TrustError::DomainError(_))));
        assert!(x.discount(-0.01).is_err());
    }

    #[test]
    fn base_rate_mismatch() {
        let x = op(0.3, 0.3, 0.4);
        let y = Opinion::new(0.3, 0.3, 0.4, 0.2).unwrap();
        assert!(matches!(x.fuse_cumulative(&y), Err(TrustError::BaseRateMismatch(..))));
        assert!(matches!(x.fuse_averaging(&y), Err(TrustError::BaseRateMismatch(..))));
    }

    #[test]
    fn dogmatic_pairs_average() {
        let x = op(1.0, 0.0, 0.0);
        let y = op(0.0, 1.0, 0.0);
        let m = op(0.5, 0.5, 0.0);
        assert_eq!(x.fuse_cumulative(&y).unwrap(), m);
        assert_eq!(x.fuse_averaging(&y).unwrap(), m);
        assert_eq!(fuse_averaging_all(&[x, y, op(0.2, 0.2, 0.6)]).unwrap(), m);
    }

    #[test]
    fn nary_averaging_matches_pairwise_for_two() {
        let x = op(0.6, 0.2, 0.2);
        let y = op(0.3, 0.3, 0.4);
        assert!(close(&fuse_averaging_all(&[x, y]).unwrap(), &x.fuse_averaging(&y).unwrap()));
    }

    #[test]
    fn empty_nary_inputs() {
        assert_eq!(fuse_averaging_all(&[]), Err(TrustError::NoOpinions));
        assert_eq!(fuse_cumulative_all(&[], 0.5).unwrap(), Opinion::vacuous(0.5));
    }
}
