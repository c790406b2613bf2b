//! JSON documents for profiles and allocations.
//!
//! ```json
//! { "agents": ["a1","a2"], "goods": ["g1","g2","g3"],
//!   "utilities": [["1","1","1/2"],["2","2","0"]] }
//! { "bundles": [["g3"],["g1","g2"]] }
//! ```
//!
//! Utilities are strings holding an integer or `p/q`, so values stay exact.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Allocation, ModelError, Profile};
use crate::scalar::{parse_rational, Utility};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{location}: {message}")]
pub struct DocumentError {
    pub location: String,
    pub message: String,
}

impl DocumentError {
    fn at(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            location: location.into(),
            message: message.into(),
        }
    }

    fn from_json(err: serde_json::Error) -> Self {
        Self::at(
            format!("line {}, column {}", err.line(), err.column()),
            err.to_string(),
        )
    }

    fn from_model(err: ModelError) -> Self {
        let location = match &err {
            ModelError::NegativeUtility { agent, good, .. } => {
                format!("utilities[{agent}][{good}]")
            }
            ModelError::DuplicateName { kind, .. } => format!("{kind}s"),
            _ => "document".to_string(),
        };
        Self::at(location, err.to_string())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    agents: Vec<String>,
    goods: Vec<String>,
    utilities: Vec<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AllocationDoc {
    bundles: Vec<Vec<String>>,
}

pub fn parse_profile<U: Utility>(text: &[u8]) -> Result<Profile<U>, DocumentError> {
    let doc: ProfileDoc = serde_json::from_slice(text).map_err(DocumentError::from_json)?;
    let utilities = doc
        .utilities
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(g, cell)| {
                    let value = parse_rational(cell).map_err(|e| {
                        DocumentError::at(format!("utilities[{i}][{g}]"), e.to_string())
                    })?;
                    if value < num_traits::Zero::zero() {
                        return Err(DocumentError::at(
                            format!("utilities[{i}][{g}]"),
                            format!("negative utility {cell:?}"),
                        ));
                    }
                    Ok(U::from_rational(&value))
                })
                .collect::<Result<Vec<U>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Profile::new(doc.agents, doc.goods, utilities).map_err(DocumentError::from_model)
}

pub fn serialize_profile<U: Utility>(profile: &Profile<U>) -> String {
    let doc = ProfileDoc {
        agents: profile.agent_names().to_vec(),
        goods: profile.good_names().to_vec(),
        utilities: profile
            .utilities()
            .iter()
            .map(|row| row.iter().map(Utility::render).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("profile documents always serialize")
}

/// Parses an allocation document against `profile`'s good names.
pub fn parse_allocation<U: Utility>(
    text: &[u8],
    profile: &Profile<U>,
) -> Result<Allocation, DocumentError> {
    let doc: AllocationDoc = serde_json::from_slice(text).map_err(DocumentError::from_json)?;
    if doc.bundles.len() != profile.n() {
        return Err(DocumentError::at(
            "bundles",
            format!("{} bundles for {} agents", doc.bundles.len(), profile.n()),
        ));
    }
    let index: HashMap<&str, usize> = profile
        .good_names()
        .iter()
        .enumerate()
        .map(|(g, name)| (name.as_str(), g))
        .collect();
    let bundles = doc
        .bundles
        .iter()
        .enumerate()
        .map(|(i, bundle)| {
            bundle
                .iter()
                .enumerate()
                .map(|(k, name)| {
                    index.get(name.as_str()).copied().ok_or_else(|| {
                        DocumentError::at(
                            format!("bundles[{i}][{k}]"),
                            format!("unknown good {name:?}"),
                        )
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Allocation::new(bundles, profile.m()).map_err(|e| DocumentError::at("bundles", e.to_string()))
}

pub fn serialize_allocation<U: Utility>(alloc: &Allocation, profile: &Profile<U>) -> String {
    let doc = AllocationDoc {
        bundles: alloc
            .bundles()
            .iter()
            .map(|b| b.iter().map(|&g| profile.good_names()[g].clone()).collect())
            .collect(),
    };
    serde_json::to_string(&doc).expect("allocation documents always serialize")
}
