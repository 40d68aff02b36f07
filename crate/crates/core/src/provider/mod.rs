//! Count oracles and end-to-end bound computation.
//!
//! A [`CountProvider`] answers "how many documents match this conjunction
//! (optionally minus another conjunction)" and reports the size of its
//! universe. The local index answers exactly. A snapshot replays counts
//! reported by some external engine; those may violate the partition
//! n(A) = n(A and B) + n(A and not B), in which case the joint count is
//! rescaled before use (see [`resolved_joint_count`]).

mod local;
mod snapshot;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::measures::{
    self, absolute_weight, meaning_bound, relative_weight, AbsoluteWeight, BoundInputs,
    ConsistencyReport, Count, Epsilon, JointCount, MeaningBound, MeasureError, RelativeWeight,
    UniverseSize,
};
use crate::query::QueryExpr;

pub use snapshot::{CountKey, EntryRole, SnapshotEntry, SnapshotError, SnapshotTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProviderError {
    #[error("no stored count for query {0}")]
    MissingEntry(String),
    #[error("query {0} matches no documents, the bound is undefined")]
    ZeroCount(String),
    #[error("universe is empty, no bound can be computed")]
    EmptyUniverse,
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Local,
    Snapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProviderDescriptor {
    pub kind: ProviderKind,
    /// Whether every count satisfies the partition identity.
    pub exact: bool,
    /// Universe size; 0 only for an empty local corpus.
    pub universe: u64,
}

/// `include` and not `exclude`. A multi-term exclusion removes documents
/// containing the whole exclusion conjunction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CountQuery {
    pub include: QueryExpr,
    pub exclude: Option<QueryExpr>,
}

impl CountQuery {
    pub fn all(include: QueryExpr) -> Self {
        CountQuery {
            include,
            exclude: None,
        }
    }

    pub fn but_not(include: QueryExpr, exclude: QueryExpr) -> Self {
        CountQuery {
            include,
            exclude: Some(exclude),
        }
    }
}

impl fmt::Display for CountQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.include)?;
        if let Some(ex) = &self.exclude {
            write!(f, " not [{ex}]")?;
        }
        Ok(())
    }
}

pub trait CountProvider: Sync {
    fn descriptor(&self) -> ProviderDescriptor;

    /// The hit count for `query`. Never fabricated: a backend that does not
    /// know the answer returns an error.
    fn count(&self, query: &CountQuery) -> Result<Count, ProviderError>;

    /// A joint count for `joint` that was already reconciled upstream and
    /// must be used as-is. Only meaningful for inexact backends.
    fn reconciled_joint(&self, _joint: &QueryExpr) -> Option<Count> {
        None
    }
}

impl<P: CountProvider + ?Sized> CountProvider for &P {
    fn descriptor(&self) -> ProviderDescriptor {
        (**self).descriptor()
    }

    fn count(&self, query: &CountQuery) -> Result<Count, ProviderError> {
        (**self).count(query)
    }

    fn reconciled_joint(&self, joint: &QueryExpr) -> Option<Count> {
        (**self).reconciled_joint(joint)
    }
}

impl<P: CountProvider + ?Sized> CountProvider for Box<P> {
    fn descriptor(&self) -> ProviderDescriptor {
        (**self).descriptor()
    }

    fn count(&self, query: &CountQuery) -> Result<Count, ProviderError> {
        (**self).count(query)
    }

    fn reconciled_joint(&self, joint: &QueryExpr) -> Option<Count> {
        (**self).reconciled_joint(joint)
    }
}

/// Replaces the universe size reported by `inner`.
#[derive(Debug, Clone)]
pub struct WithUniverse<P> {
    pub inner: P,
    pub universe: u64,
}

impl<P: CountProvider> CountProvider for WithUniverse<P> {
    fn descriptor(&self) -> ProviderDescriptor {
        ProviderDescriptor {
            universe: self.universe,
            ..self.inner.descriptor()
        }
    }

    fn count(&self, query: &CountQuery) -> Result<Count, ProviderError> {
        self.inner.count(query)
    }

    fn reconciled_joint(&self, joint: &QueryExpr) -> Option<Count> {
        self.inner.reconciled_joint(joint)
    }
}

pub fn provider_count<P: CountProvider + ?Sized>(
    provider: &P,
    query: &CountQuery,
) -> Result<Count, ProviderError> {
    provider.count(query)
}

pub fn universe_size<P: CountProvider + ?Sized>(provider: &P) -> u64 {
    provider.descriptor().universe
}

/// How the joint count n(A,B) used in a bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointResolution {
    /// The count the provider reports for A and B together.
    pub raw: Count,
    /// The value fed into the bound.
    #[serde(serialize_with = "ser_joint")]
    pub resolved: JointCount,
    /// Present when the partition check ran.
    pub correction: Option<ConsistencyReport>,
}

fn ser_joint<S: serde::Serializer>(j: &JointCount, s: S) -> Result<S::Ok, S::Error> {
    match j {
        JointCount::Exact(c) => s.serialize_u64(c.0),
        JointCount::Estimated(v) => s.serialize_f64(*v),
    }
}

impl JointResolution {
    pub fn value(&self) -> f64 {
        self.resolved.as_f64()
    }

    pub fn differs_from_raw(&self) -> bool {
        self.resolved != JointCount::Exact(self.raw)
    }
}

/// n(A,B) as it should enter a bound.
///
/// Exact providers return the conjunction count unchanged. Inexact ones
/// return an upstream-reconciled count when the backend stores one, and
/// otherwise rescale the raw joint count by n(A) / (n(A,B) + n(A,not B)).
pub fn resolved_joint_count<P: CountProvider + ?Sized>(
    provider: &P,
    a: &QueryExpr,
    b: &QueryExpr,
) -> Result<JointResolution, ProviderError> {
    let joint = a.union(b);
    let raw = provider.count(&CountQuery::all(joint.clone()))?;
    if provider.descriptor().exact {
        return Ok(JointResolution {
            raw,
            resolved: JointCount::Exact(raw),
            correction: None,
        });
    }
    if let Some(c) = provider.reconciled_joint(&joint) {
        return Ok(JointResolution {
            raw,
            resolved: JointCount::Exact(c),
            correction: None,
        });
    }
    let n_a = provider.count(&CountQuery::all(a.clone()))?;
    let n_a_not_b = provider.count(&CountQuery::but_not(a.clone(), b.clone()))?;
    let report = measures::consistency_factor(n_a, raw, n_a_not_b)?;
    let resolved = if report.consistent {
        JointCount::Exact(raw)
    } else {
        JointCount::Estimated(measures::corrected_joint_count(n_a, raw, n_a_not_b)?)
    };
    Ok(JointResolution {
        raw,
        resolved,
        correction: Some(report),
    })
}

/// Every quantity behind one bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub a: String,
    pub b: String,
    pub n_a: Count,
    pub n_b: Count,
    pub joint: JointResolution,
    pub universe: u64,
    pub relative_weight: RelativeWeight,
    pub absolute_weight: AbsoluteWeight,
    pub bound: MeaningBound,
}

fn nonzero_count<P: CountProvider + ?Sized>(
    provider: &P,
    q: &QueryExpr,
) -> Result<Count, ProviderError> {
    let n = provider.count(&CountQuery::all(q.clone()))?;
    if n.0 == 0 {
        return Err(ProviderError::ZeroCount(q.label()));
    }
    Ok(n)
}

/// M(A,B) over `provider`, with all intermediate counts.
pub fn bound_report<P: CountProvider + ?Sized>(
    provider: &P,
    a: &QueryExpr,
    b: &QueryExpr,
    epsilon: Epsilon,
) -> Result<BoundReport, ProviderError> {
    let universe = UniverseSize::new(provider.descriptor().universe)
        .map_err(|_| ProviderError::EmptyUniverse)?;
    let n_a = nonzero_count(provider, a)?;
    let (n_b, joint) = if a == b {
        (
            n_a,
            JointResolution {
                raw: n_a,
                resolved: JointCount::Exact(n_a),
                correction: None,
            },
        )
    } else {
        (
            nonzero_count(provider, b)?,
            resolved_joint_count(provider, a, b)?,
        )
    };
    let inputs = BoundInputs::new(n_a, n_b, joint.resolved, universe)?;
    let bound = meaning_bound(&inputs, epsilon)?;
    let rel = match joint.resolved {
        JointCount::Exact(c) => relative_weight(c, n_a)?,
        JointCount::Estimated(_) => relative_weight_real(joint.value(), n_a),
    };
    Ok(BoundReport {
        a: a.label(),
        b: b.label(),
        n_a,
        n_b,
        joint,
        universe: universe.get(),
        relative_weight: rel,
        absolute_weight: absolute_weight(n_b, universe)?,
        bound,
    })
}

fn relative_weight_real(n_ab: f64, n_a: Count) -> RelativeWeight {
    RelativeWeight::from_ratio(n_ab / n_a.0 as f64)
}

pub fn bound_between<P: CountProvider + ?Sized>(
    provider: &P,
    a: &QueryExpr,
    b: &QueryExpr,
    epsilon: Epsilon,
) -> Result<MeaningBound, ProviderError> {
    bound_report(provider, a, b, epsilon).map(|r| r.bound)
}
