//! Separable one-dimensional penalties: prox, prox derivative, subdifferential.
//!
//! Every prox returns exact endpoint values (`0.0`, `C`) in its flat regions,
//! so support comparisons downstream are bitwise and need no tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Penalty {
    /// `lambda * |x|`
    L1 { lambda: f64 },
    /// Indicator of `[0, c]`.
    BoxIndicator { c: f64 },
    /// `lambda * |x| + lambda2 / 2 * x^2`
    ElasticNet { lambda: f64, lambda2: f64 },
}

/// Closed interval `[lo, hi]` with possibly infinite endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubdiffInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SubdiffInterval {
    pub fn singleton(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        v >= self.lo - slack && v <= self.hi + slack
    }

    /// Point of the interval closest to `v`.
    pub fn project(&self, v: f64) -> f64 {
        v.max(self.lo).min(self.hi)
    }

    /// Distance from `v` to the nearest endpoint, positive strictly inside,
    /// zero on the boundary and negative outside.
    pub fn interior_margin(&self, v: f64) -> f64 {
        (v - self.lo).min(self.hi - v)
    }
}

fn soft_threshold(z: f64, threshold: f64) -> f64 {
    if z > threshold {
        z - threshold
    } else if z < -threshold {
        z + threshold
    } else {
        0.0
    }
}

impl Penalty {
    pub fn l1(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidProblem(format!("lambda must be >= 0, got {lambda}")));
        }
        Ok(Self::L1 { lambda })
    }

    pub fn box_indicator(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidProblem(format!("box upper bound must be > 0, got {c}")));
        }
        Ok(Self::BoxIndicator { c })
    }

    pub fn elastic_net(lambda: f64, lambda2: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite() && lambda2 >= 0.0 && lambda2.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "elastic net weights must be >= 0, got ({lambda}, {lambda2})"
            )));
        }
        Ok(Self::ElasticNet { lambda, lambda2 })
    }

    /// `g(x)`; `+inf` outside the box for the indicator.
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Self::L1 { lambda } => lambda * x.abs(),
            Self::BoxIndicator { c } => {
                if (0.0..=c).contains(&x) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::ElasticNet { lambda, lambda2 } => lambda * x.abs() + 0.5 * lambda2 * x * x,
        }
    }

    pub fn in_domain(&self, x: f64) -> bool {
        match *self {
            Self::BoxIndicator { c } => (0.0..=c).contains(&x),
            _ => x.is_finite(),
        }
    }

    /// `argmin_u (z - u)^2 / (2 gamma) + g(u)`.
    pub fn prox(&self, gamma: f64, z: f64) -> f64 {
        match *self {
            Self::L1 { lambda } => soft_threshold(z, gamma * lambda),
            // gamma-invariant projection
            Self::BoxIndicator { c } => {
                if z <= 0.0 {
                    0.0
                } else if z >= c {
                    c
                } else {
                    z
                }
            }
            Self::ElasticNet { lambda, lambda2 } => {
                soft_threshold(z, gamma * lambda) / (1.0 + gamma * lambda2)
            }
        }
    }

    /// Derivative of `z -> prox(gamma, z)`. Fails on the kink set, where no
    /// derivative exists.
    pub fn prox_derivative(&self, gamma: f64, z: f64) -> Result<f64> {
        match *self {
            Self::L1 { lambda } => {
                let t = gamma * lambda;
                if z.abs() == t {
                    Err(Error::NonDifferentiable { value: z })
                } else if z.abs() > t {
                    Ok(1.0)
                } else {
                    Ok(0.0)
                }
            }
            Self::BoxIndicator { c } => {
                if z == 0.0 || z == c {
                    Err(Error::NonDifferentiable { value: z })
                } else if z > 0.0 && z < c {
                    Ok(1.0)
                } else {
                    Ok(0.0)
                }
            }
            Self::ElasticNet { lambda, lambda2 } => {
                let t = gamma * lambda;
                if z.abs() == t {
                    Err(Error::NonDifferentiable { value: z })
                } else if z.abs() > t {
                    Ok(1.0 / (1.0 + gamma * lambda2))
                } else {
                    Ok(0.0)
                }
            }
        }
    }

    pub fn subdiff_interval(&self, x: f64) -> Result<SubdiffInterval> {
        match *self {
            Self::L1 { lambda } => Ok(if x == 0.0 {
                SubdiffInterval { lo: -lambda, hi: lambda }
            } else {
                SubdiffInterval::singleton(lambda * x.signum())
            }),
            Self::BoxIndicator { c } => {
                if !(0.0..=c).contains(&x) {
                    Err(Error::Domain { value: x })
                } else if x == 0.0 {
                    Ok(SubdiffInterval { lo: f64::NEG_INFINITY, hi: 0.0 })
                } else if x == c {
                    Ok(SubdiffInterval { lo: 0.0, hi: f64::INFINITY })
                } else {
                    Ok(SubdiffInterval::singleton(0.0))
                }
            }
            Self::ElasticNet { lambda, lambda2 } => Ok(if x == 0.0 {
                SubdiffInterval { lo: -lambda, hi: lambda }
            } else {
                SubdiffInterval::singleton(lambda * x.signum() + lambda2 * x)
            }),
        }
    }

    /// Whether `g` is differentiable at `x`, i.e. its subdifferential is a
    /// singleton. This is the membership test for the generalized support.
    pub fn is_differentiable_at(&self, x: f64) -> Result<bool> {
        Ok(self.subdiff_interval(x)?.is_singleton())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const L1: Penalty = Penalty::L1 { lambda: 1.0 };

    fn penalty_strategy() -> impl Strategy<Value = Penalty> {
        prop_oneof![
            (0.0f64..5.0).prop_map(|lambda| Penalty::L1 { lambda }),
            (0.01f64..5.0).prop_map(|c| Penalty::BoxIndicator { c }),
            (0.0f64..5.0, 0.0f64..5.0).prop_map(|(lambda, lambda2)| Penalty::ElasticNet { lambda, lambda2 }),
        ]
    }

    fn kinks(p: &Penalty, gamma: f64) -> Vec<f64> {
        match *p {
            Penalty::L1 { lambda } | Penalty::ElasticNet { lambda, .. } => vec![-gamma * lambda, gamma * lambda],
            Penalty::BoxIndicator { c } => vec![0.0, c],
        }
    }

    #[test]
    fn prox_examples() {
        assert_eq!(L1.prox(1.5, 2.0), 0.5);
        let b = Penalty::BoxIndicator { c: 2.0 };
        assert_eq!(b.prox(1.0, 3.0), 2.0);
        assert_eq!(b.prox(1.0, -1.0), 0.0);
        let en = Penalty::ElasticNet { lambda: 1.0, lambda2: 1.0 };
        assert_eq!(en.prox(1.0, 3.0), 1.0);
    }

    #[test]
    fn prox_derivative_examples() {
        assert_eq!(L1.prox_derivative(1.0, 3.0).unwrap(), 1.0);
        assert_eq!(L1.prox_derivative(1.0, 0.5).unwrap(), 0.0);
        let b = Penalty::BoxIndicator { c: 2.0 };
        assert_eq!(b.prox_derivative(1.0, 1.2).unwrap(), 1.0);
        assert_eq!(b.prox_derivative(1.0, 2.5).unwrap(), 0.0);
        let en = Penalty::ElasticNet { lambda: 1.0, lambda2: 3.0 };
        assert_eq!(en.prox_derivative(1.0, 5.0).unwrap(), 0.25);
    }

    #[test]
    fn prox_derivative_rejects_kinks() {
        assert!(matches!(L1.prox_derivative(2.0, -2.0), Err(Error::NonDifferentiable { .. })));
        let b = Penalty::BoxIndicator { c: 2.0 };
        assert!(b.prox_derivative(1.0, 0.0).is_err());
        assert!(b.prox_derivative(1.0, 2.0).is_err());
        let en = Penalty::ElasticNet { lambda: 1.0, lambda2: 3.0 };
        assert!(en.prox_derivative(0.5, 0.5).is_err());
    }

    #[test]
    fn subdiff_examples() {
        let l1 = Penalty::L1 { lambda: 2.0 };
        assert_eq!(l1.subdiff_interval(0.0).unwrap(), SubdiffInterval { lo: -2.0, hi: 2.0 });
        assert_eq!(l1.subdiff_interval(-3.0).unwrap(), SubdiffInterval::singleton(-2.0));
        let b = Penalty::BoxIndicator { c: 1.0 };
        assert_eq!(
            b.subdiff_interval(1.0).unwrap(),
            SubdiffInterval { lo: 0.0, hi: f64::INFINITY }
        );
        assert_eq!(
            b.subdiff_interval(0.0).unwrap(),
            SubdiffInterval { lo: f64::NEG_INFINITY, hi: 0.0 }
        );
        assert!(matches!(b.subdiff_interval(1.5), Err(Error::Domain { .. })));
        assert!(b.is_differentiable_at(-0.1).is_err());
        let en = Penalty::ElasticNet { lambda: 1.0, lambda2: 2.0 };
        assert_eq!(en.subdiff_interval(0.5).unwrap(), SubdiffInterval::singleton(2.0));
    }

    #[test]
    fn differentiability_examples() {
        assert!(!L1.is_differentiable_at(0.0).unwrap());
        let b = Penalty::BoxIndicator { c: 2.0 };
        assert!(b.is_differentiable_at(1.0).unwrap());
        assert!(!b.is_differentiable_at(2.0).unwrap());
        let en = Penalty::ElasticNet { lambda: 1.0, lambda2: 1.0 };
        assert!(en.is_differentiable_at(0.1).unwrap());
    }

    #[test]
    fn constructors_validate() {
        assert!(Penalty::l1(-1.0).is_err());
        assert!(Penalty::box_indicator(0.0).is_err());
        assert!(Penalty::elastic_net(1.0, -0.1).is_err());
        assert!(Penalty::elastic_net(1.0, 0.0).is_ok());
    }

    #[test]
    fn exact_zero_and_endpoint_semantics() {
        for z in [-0.999, -0.0, 0.0, 1e-300, 0.5, 1.0] {
            assert_eq!(L1.prox(1.0, z).to_bits(), 0.0f64.to_bits());
        }
        let b = Penalty::BoxIndicator { c: 0.3 };
        for z in [-5.0, -0.0, 0.0, -1e-300] {
            assert_eq!(b.prox(1.0, z).to_bits(), 0.0f64.to_bits());
        }
        for z in [0.3, 0.30000000000000004, 7.0] {
            assert_eq!(b.prox(1.0, z).to_bits(), 0.3f64.to_bits());
        }
    }

    proptest! {
        #[test]
        fn prox_is_nonexpansive(p in penalty_strategy(), gamma in 0.01f64..10.0, a in -20.0f64..20.0, b in -20.0f64..20.0) {
            prop_assert!((p.prox(gamma, a) - p.prox(gamma, b)).abs() <= (a - b).abs() * (1.0 + 1e-14) + 1e-15);
        }

        #[test]
        fn prox_satisfies_optimality(p in penalty_strategy(), gamma in 0.01f64..10.0, z in -20.0f64..20.0) {
            let u = p.prox(gamma, z);
            let interval = p.subdiff_interval(u).unwrap();
            let v = (z - u) / gamma;
            let slack = 1e-12 * (1.0 + v.abs());
            prop_assert!(interval.contains(v, slack), "{:?} u={} v={} {:?}", p, u, v, interval);
        }

        #[test]
        fn prox_derivative_matches_finite_differences(p in penalty_strategy(), gamma in 0.05f64..5.0, z in -20.0f64..20.0) {
            prop_assume!(kinks(&p, gamma).iter().all(|k| (z - k).abs() >= 1e-3));
            let h = 1e-7;
            let fd = (p.prox(gamma, z + h) - p.prox(gamma, z - h)) / (2.0 * h);
            let d = p.prox_derivative(gamma, z).unwrap();
            prop_assert!((fd - d).abs() <= 1e-6, "fd {} vs {}", fd, d);
        }
    }
}
