//! Count-based association measures.
//!
//! Everything here is a pure function of integer counts. Products of two
//! counts are formed in `u128`, so no intermediate overflows for any pair
//! of `u64` inputs; the final quotient is a single `f64` division of two
//! exactly-rounded operands (relative error below 3 * 2^-53).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default half-width of the neutral band around 1.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("zero denominator: {0} is 0, the quantity is undefined")]
    ZeroDenominator(&'static str),
    #[error("{what} ({value}) exceeds {bound_name} ({bound})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        bound_name: &'static str,
        bound: f64,
    },
    #[error("universe size must be at least 1")]
    EmptyUniverse,
    #[error("neutrality tolerance must be finite and non-negative, got {0}")]
    InvalidEpsilon(f64),
}

pub type Result<T> = std::result::Result<T, MeasureError>;

/// Number of documents containing a query.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Count(pub u64);

impl Count {
    pub fn get(self) -> u64 {
        self.0
    }
}

impl From<u64> for Count {
    fn from(v: u64) -> Self {
        Count(v)
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Total number of documents in the counting universe. Never zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UniverseSize(u64);

impl UniverseSize {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            Err(MeasureError::EmptyUniverse)
        } else {
            Ok(UniverseSize(n))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for UniverseSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Joint count n(A,B). Exact when it comes straight from a consistent
/// oracle, estimated when it went through [`corrected_joint_count`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JointCount {
    Exact(Count),
    Estimated(f64),
}

impl JointCount {
    pub fn as_f64(self) -> f64 {
        match self {
            JointCount::Exact(c) => c.0 as f64,
            JointCount::Estimated(v) => v,
        }
    }
}

impl From<Count> for JointCount {
    fn from(c: Count) -> Self {
        JointCount::Exact(c)
    }
}

/// The four counts a meaning bound is computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    n_a: Count,
    n_b: Count,
    n_ab: JointCount,
    n_www: UniverseSize,
}

impl BoundInputs {
    /// Validates `n_ab <= min(n_a, n_b)` and `n_a, n_b <= n_www`.
    ///
    /// Zero marginals are accepted here and rejected by [`meaning_bound`],
    /// so that callers get the more specific zero-denominator error.
    pub fn new(
        n_a: Count,
        n_b: Count,
        n_ab: impl Into<JointCount>,
        n_www: UniverseSize,
    ) -> Result<Self> {
        let n_ab = n_ab.into();
        let www = n_www.get();
        for (what, c) in [("n(A)", n_a), ("n(B)", n_b)] {
            if c.0 > www {
                return Err(MeasureError::OutOfRange {
                    what,
                    value: c.0 as f64,
                    bound_name: "n(www)",
                    bound: www as f64,
                });
            }
        }
        let ceiling = n_a.min(n_b);
        let over = match n_ab {
            JointCount::Exact(c) => c > ceiling,
            JointCount::Estimated(v) => !(v >= 0.0 && v <= ceiling.0 as f64),
        };
        if over {
            return Err(MeasureError::OutOfRange {
                what: "n(A,B)",
                value: n_ab.as_f64(),
                bound_name: "min(n(A), n(B))",
                bound: ceiling.0 as f64,
            });
        }
        Ok(BoundInputs {
            n_a,
            n_b,
            n_ab,
            n_www,
        })
    }

    pub fn n_a(&self) -> Count {
        self.n_a
    }

    pub fn n_b(&self) -> Count {
        self.n_b
    }

    pub fn n_ab(&self) -> JointCount {
        self.n_ab
    }

    pub fn n_www(&self) -> UniverseSize {
        self.n_www
    }
}

/// w(A,B): fraction of documents containing A that also contain B.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct RelativeWeight(f64);

impl RelativeWeight {
    pub(crate) fn from_ratio(v: f64) -> Self {
        RelativeWeight(v)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// w(www,A): fraction of the universe containing A.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct AbsoluteWeight(f64);

impl AbsoluteWeight {
    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttractionClass {
    Attractive,
    Neutral,
    Repulsive,
}

impl AttractionClass {
    /// `value > 1 + epsilon` is attractive, `value < 1 - epsilon` repulsive,
    /// anything in between (inclusive) neutral. NaN is treated as neutral so
    /// that the function stays total; no measure in this crate produces it.
    pub fn classify(value: f64, epsilon: Epsilon) -> Self {
        let eps = epsilon.get();
        if value > 1.0 + eps {
            AttractionClass::Attractive
        } else if value < 1.0 - eps {
            AttractionClass::Repulsive
        } else {
            AttractionClass::Neutral
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AttractionClass::Attractive => "attractive",
            AttractionClass::Neutral => "neutral",
            AttractionClass::Repulsive => "repulsive",
        }
    }
}

impl fmt::Display for AttractionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Neutral-band tolerance around 1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps >= 0.0 {
            Ok(Epsilon(eps))
        } else {
            Err(MeasureError::InvalidEpsilon(eps))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for Epsilon {
    fn default() -> Self {
        Epsilon(DEFAULT_EPSILON)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeaningBound {
    pub value: f64,
    pub class: AttractionClass,
}

impl MeaningBound {
    fn from_value(value: f64, epsilon: Epsilon) -> Self {
        MeaningBound {
            value,
            class: AttractionClass::classify(value, epsilon),
        }
    }
}

fn ratio(num: u128, den: u128) -> f64 {
    num as f64 / den as f64
}

pub fn relative_weight(n_ab: Count, n_a: Count) -> Result<RelativeWeight> {
    if n_a.0 == 0 {
        return Err(MeasureError::ZeroDenominator("n(A)"));
    }
    if n_ab > n_a {
        return Err(MeasureError::OutOfRange {
            what: "n(A,B)",
            value: n_ab.0 as f64,
            bound_name: "n(A)",
            bound: n_a.0 as f64,
        });
    }
    Ok(RelativeWeight(ratio(n_ab.0.into(), n_a.0.into())))
}

pub fn absolute_weight(n_a: Count, n_www: UniverseSize) -> Result<AbsoluteWeight> {
    if n_a.0 > n_www.0 {
        return Err(MeasureError::OutOfRange {
            what: "n(A)",
            value: n_a.0 as f64,
            bound_name: "n(www)",
            bound: n_www.0 as f64,
        });
    }
    Ok(AbsoluteWeight(ratio(n_a.0.into(), n_www.0.into())))
}

/// M(A,B) = n(A,B) * n(www) / (n(A) * n(B)).
pub fn meaning_bound(inputs: &BoundInputs, epsilon: Epsilon) -> Result<MeaningBound> {
    if inputs.n_a.0 == 0 {
        return Err(MeasureError::ZeroDenominator("n(A)"));
    }
    if inputs.n_b.0 == 0 {
        return Err(MeasureError::ZeroDenominator("n(B)"));
    }
    let den = u128::from(inputs.n_a.0) * u128::from(inputs.n_b.0);
    let www = u128::from(inputs.n_www.0);
    let value = match inputs.n_ab {
        JointCount::Exact(c) => ratio(u128::from(c.0) * www, den),
        // n(A,B) / n(A) first keeps the estimate's own rounding from being
        // amplified by the large universe factor.
        JointCount::Estimated(v) => (v / inputs.n_a.0 as f64) * (www as f64 / inputs.n_b.0 as f64),
    };
    Ok(MeaningBound::from_value(value, epsilon))
}

/// M(A,A) = n(www) / n(A).
pub fn self_meaning_bound(
    n_a: Count,
    n_www: UniverseSize,
    epsilon: Epsilon,
) -> Result<MeaningBound> {
    if n_a.0 == 0 {
        return Err(MeasureError::ZeroDenominator("n(A)"));
    }
    let abs = absolute_weight(n_a, n_www)?;
    debug_assert!(abs.0 > 0.0);
    Ok(MeaningBound::from_value(
        ratio(n_www.0.into(), n_a.0.into()),
        epsilon,
    ))
}

/// Outcome of checking n(A) against n(A and B) + n(A and not B).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub n_a: Count,
    pub n_ab_raw: Count,
    pub n_a_not_b_raw: Count,
    pub factor: f64,
    pub consistent: bool,
}

pub fn consistency_factor(
    n_a: Count,
    n_ab_raw: Count,
    n_a_not_b_raw: Count,
) -> Result<ConsistencyReport> {
    let sum = u128::from(n_ab_raw.0) + u128::from(n_a_not_b_raw.0);
    if sum == 0 {
        return Err(MeasureError::ZeroDenominator("n(A,B) + n(A,not B)"));
    }
    let consistent = sum == u128::from(n_a.0);
    let factor = if consistent {
        1.0
    } else {
        ratio(n_a.0.into(), sum)
    };
    Ok(ConsistencyReport {
        n_a,
        n_ab_raw,
        n_a_not_b_raw,
        factor,
        consistent,
    })
}

/// n(A,B) * n(A) / (n(A,B) + n(A,not B)): the joint count rescaled so the
/// partition n(A) = n(A,B) + n(A,not B) holds. Returns the raw joint count
/// unchanged when the inputs are already consistent.
pub fn corrected_joint_count(n_a: Count, n_ab_raw: Count, n_a_not_b_raw: Count) -> Result<f64> {
    let report = consistency_factor(n_a, n_ab_raw, n_a_not_b_raw)?;
    if report.consistent {
        return Ok(n_ab_raw.0 as f64);
    }
    let sum = u128::from(n_ab_raw.0) + u128::from(n_a_not_b_raw.0);
    Ok(ratio(u128::from(n_ab_raw.0) * u128::from(n_a.0), sum))
}

/// Real-valued form of the correction: rescales both halves of the
/// partition so they sum to `n_a`. Returns `(joint, complement)`.
pub fn rescale_partition(n_a: f64, n_ab: f64, n_a_not_b: f64) -> Result<(f64, f64)> {
    let sum = n_ab + n_a_not_b;
    if sum.is_nan() || sum <= 0.0 {
        return Err(MeasureError::ZeroDenominator("n(A,B) + n(A,not B)"));
    }
    if sum == n_a {
        return Ok((n_ab, n_a_not_b));
    }
    let factor = n_a / sum;
    Ok((n_ab * factor, n_a_not_b * factor))
}
