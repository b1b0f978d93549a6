//! JSON file formats: instances (named variables and values, sorted tuples,
//! byte-stable round trips) and decompositions (nested leaf/left/right
//! objects).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value as Json};

use crate::decomposition::{DecompNode, JoinDecomposition};
use crate::error::{Error, Result};
use crate::relation::{Constraint, Instance, Scope, Value};

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    variables: Vec<String>,
    domain: Vec<String>,
    constraints: Vec<ConstraintFile>,
}

#[derive(Serialize, Deserialize)]
struct ConstraintFile {
    scope: Vec<String>,
    tuples: Vec<Vec<String>>,
}

/// Parses an instance from its JSON text.
pub fn parse_instance_str(text: &str) -> Result<Instance> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("instance JSON: {e}")))?;
    let var_index: BTreeMap<&str, usize> = file
        .variables
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    if var_index.len() != file.variables.len() {
        return Err(Error::Parse("duplicate variable name".into()));
    }
    let val_index: BTreeMap<&str, Value> = file
        .domain
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i as Value))
        .collect();
    if val_index.len() != file.domain.len() {
        return Err(Error::Parse("duplicate domain value".into()));
    }
    let mut constraints = Vec::with_capacity(file.constraints.len());
    for (i, cf) in file.constraints.iter().enumerate() {
        let scope_ids: Vec<usize> = cf
            .scope
            .iter()
            .map(|n| {
                var_index.get(n.as_str()).copied().ok_or_else(|| {
                    Error::Parse(format!("constraint {i}: unknown variable {n:?}"))
                })
            })
            .collect::<Result<_>>()?;
        let scope = Scope::new(scope_ids)
            .map_err(|e| Error::Parse(format!("constraint {i}: {e}")))?;
        let tuples: Vec<Vec<Value>> = cf
            .tuples
            .iter()
            .map(|t| {
                if t.len() != cf.scope.len() {
                    return Err(Error::Parse(format!(
                        "constraint {i}: tuple length {} does not match scope length {}",
                        t.len(),
                        cf.scope.len()
                    )));
                }
                t.iter()
                    .map(|n| {
                        val_index.get(n.as_str()).copied().ok_or_else(|| {
                            Error::Parse(format!("constraint {i}: unknown value {n:?}"))
                        })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        constraints.push(
            Constraint::new(scope, tuples)
                .map_err(|e| Error::Parse(format!("constraint {i}: {e}")))?,
        );
    }
    Instance::new(file.variables, file.domain, constraints)
}

/// Serializes an instance deterministically: fixed key order, tuples sorted.
pub fn instance_to_string(inst: &Instance) -> String {
    let file = InstanceFile {
        variables: inst.variable_names().to_vec(),
        domain: inst.domain_names().to_vec(),
        constraints: inst
            .constraints()
            .iter()
            .map(|c| ConstraintFile {
                scope: c
                    .scope()
                    .vars()
                    .iter()
                    .map(|&v| inst.variable_name(v).to_string())
                    .collect(),
                tuples: c
                    .sorted_tuples()
                    .into_iter()
                    .map(|t| {
                        t.into_iter()
                            .map(|v| inst.domain_names()[v as usize].clone())
                            .collect()
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("instance serialization");
    s.push('\n');
    s
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    parse_instance_str(&std::fs::read_to_string(path)?)
}

pub fn write_instance(inst: &Instance, path: &Path) -> Result<()> {
    Ok(std::fs::write(path, instance_to_string(inst))?)
}

fn decomposition_to_json(dec: &JoinDecomposition, at: usize) -> Json {
    match dec.nodes()[at] {
        DecompNode::Leaf(l) => json!({ "leaf": l }),
        DecompNode::Internal(a, b) => json!({
            "left": decomposition_to_json(dec, a),
            "right": decomposition_to_json(dec, b),
        }),
    }
}

/// Serializes a decomposition as nested `{"leaf": i}` / `{"left", "right"}`
/// objects.
pub fn decomposition_to_string(dec: &JoinDecomposition) -> String {
    let mut s = serde_json::to_string_pretty(&decomposition_to_json(dec, dec.root()))
        .expect("decomposition serialization");
    s.push('\n');
    s
}

fn node_from_json(v: &Json, nodes: &mut Vec<DecompNode>) -> Result<usize> {
    let obj: &Map<String, Json> = v
        .as_object()
        .ok_or_else(|| Error::Parse("decomposition node must be an object".into()))?;
    match (obj.get("leaf"), obj.get("left"), obj.get("right")) {
        (Some(l), None, None) => {
            let l = l
                .as_u64()
                .ok_or_else(|| Error::Parse("leaf label must be a nonnegative integer".into()))?;
            nodes.push(DecompNode::Leaf(l as usize));
            Ok(nodes.len() - 1)
        }
        (None, Some(left), Some(right)) => {
            let a = node_from_json(left, nodes)?;
            let b = node_from_json(right, nodes)?;
            nodes.push(DecompNode::Internal(a, b));
            Ok(nodes.len() - 1)
        }
        _ => Err(Error::Parse(
            "decomposition node must have either \"leaf\" or both \"left\" and \"right\"".into(),
        )),
    }
}

pub fn parse_decomposition_str(text: &str) -> Result<JoinDecomposition> {
    let v: Json =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("decomposition JSON: {e}")))?;
    let mut nodes = Vec::new();
    let root = node_from_json(&v, &mut nodes)?;
    JoinDecomposition::from_nodes(nodes, root)
}

pub fn read_decomposition(path: &Path) -> Result<JoinDecomposition> {
    parse_decomposition_str(&std::fs::read_to_string(path)?)
}

pub fn write_decomposition(dec: &JoinDecomposition, path: &Path) -> Result<()> {
    Ok(std::fs::write(path, decomposition_to_string(dec))?)
}
