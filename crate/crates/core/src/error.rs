use thiserror::Error;

use crate::geometry::GeometryError;
use crate::model::{CredalNetwork, Evidence, LocalSetId, ModelError, VarId};

/// Failure of an inference routine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("evidence has zero probability under every vertex selection")]
    ZeroEvidence,
    #[error("query variable {0:?} is also observed")]
    QueryObserved(String),
    #[error("variable index {0} is out of range")]
    UnknownVariable(VarId),
    #[error("category {category} is out of range for variable {variable:?}")]
    UnknownCategory { variable: String, category: usize },
    #[error("local set {set} has {len} vertices; a precise network needs exactly one")]
    NotPrecise { set: LocalSetId, len: usize },
    #[error("{count} vertex selections exceed the cap of {cap}")]
    CapExceeded { count: String, cap: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub(crate) fn check_evidence(net: &CredalNetwork, evidence: &Evidence) -> Result<(), InferenceError> {
    for (v, c) in evidence.iter() {
        if v >= net.len() {
            return Err(InferenceError::UnknownVariable(v));
        }
        if c >= net.cardinality(v) {
            return Err(InferenceError::UnknownCategory {
                variable: net.variable(v).name().to_string(),
                category: c,
            });
        }
    }
    Ok(())
}

pub(crate) fn check_query(net: &CredalNetwork, query: VarId, evidence: &Evidence) -> Result<(), InferenceError> {
    if query >= net.len() {
        return Err(InferenceError::UnknownVariable(query));
    }
    if evidence.contains(query) {
        return Err(InferenceError::QueryObserved(net.variable(query).name().to_string()));
    }
    check_evidence(net, evidence)
}

pub(crate) fn check_category(net: &CredalNetwork, query: VarId, category: usize) -> Result<(), InferenceError> {
    if category >= net.cardinality(query) {
        return Err(InferenceError::UnknownCategory {
            variable: net.variable(query).name().to_string(),
            category,
        });
    }
    Ok(())
}
