use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::generator::GeneratorConfig;
use super::{rational_text, DataError};
use crate::model::{Agent, AgentId, Allocation, Assignment, Category, CategoryId, Instance};
use crate::scalar::{Rational, Scalar};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    schema_version: u64,
    #[serde(with = "rational_text")]
    discount: Rational,
    daily_supply: Vec<u32>,
    categories: Vec<CategoryDoc>,
    agents: Vec<AgentDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<GeneratorConfig>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoryDoc {
    name: String,
    daily_quota: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    overall_quota: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    name: String,
    #[serde(with = "rational_text")]
    priority: Rational,
    /// One character per day, `1` when available.
    availability: String,
    eligible: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AllocationDoc {
    schema_version: u64,
    assignments: Vec<AssignmentDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase", deny_unknown_fields)]
enum AssignmentDoc {
    Matched { agent: String, category: String, day: usize },
    Unmatched { agent: String },
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: Option<u64>,
}

fn check_version(text: &str) -> Result<(), DataError> {
    let probe: VersionProbe = serde_json::from_str(text)?;
    match probe.schema_version {
        Some(found) if found != SCHEMA_VERSION => Err(DataError::Version {
            found,
            expected: SCHEMA_VERSION,
        }),
        // a missing version is reported by the full parse
        _ => Ok(()),
    }
}

/// An instance plus the generator settings that produced it, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceDocument<S> {
    pub instance: Instance<S>,
    pub generator: Option<GeneratorConfig>,
}

fn to_doc<S: Scalar>(doc: &InstanceDocument<S>) -> Result<InstanceDoc, DataError> {
    let inst = &doc.instance;
    let exact = |v: &S, field: String| v.to_exact().ok_or_else(|| DataError::field(field, "not a finite number"));
    let cat_name = |c: &CategoryId, k: usize| {
        inst.categories
            .get(c.0)
            .map(|cat| cat.name.clone())
            .ok_or_else(|| DataError::field(format!("agents[{k}].eligible"), format!("no category {c}")))
    };
    let agents = inst
        .agents
        .iter()
        .enumerate()
        .map(|(k, a)| {
            Ok(AgentDoc {
                name: a.name.clone(),
                priority: exact(&a.priority, format!("agents[{k}].priority"))?,
                availability: a.availability.iter().map(|&b| if b { '1' } else { '0' }).collect(),
                eligible: a.eligible.iter().map(|c| cat_name(c, k)).collect::<Result<_, _>>()?,
                group: a.group.clone(),
            })
        })
        .collect::<Result<_, DataError>>()?;
    Ok(InstanceDoc {
        schema_version: SCHEMA_VERSION,
        discount: exact(&inst.discount, "discount".into())?,
        daily_supply: inst.daily_supply.clone(),
        categories: inst
            .categories
            .iter()
            .map(|c| CategoryDoc {
                name: c.name.clone(),
                daily_quota: c.daily_quota.clone(),
                overall_quota: c.overall_quota,
            })
            .collect(),
        agents,
        generator: doc.generator.clone(),
    })
}

fn from_doc<S: Scalar>(doc: InstanceDoc) -> Result<InstanceDocument<S>, DataError> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(DataError::Version {
            found: doc.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    let cat_ids: HashMap<&str, CategoryId> = doc
        .categories
        .iter()
        .enumerate()
        .map(|(i, c)| (c.name.as_str(), CategoryId(i)))
        .collect();
    let mut agents = Vec::with_capacity(doc.agents.len());
    for (k, a) in doc.agents.iter().enumerate() {
        let availability = a
            .availability
            .chars()
            .map(|ch| match ch {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(DataError::field(
                    format!("agents[{k}].availability"),
                    format!("unexpected character `{other}` (use 0 and 1)"),
                )),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut eligible = a
            .eligible
            .iter()
            .map(|name| {
                cat_ids.get(name.as_str()).copied().ok_or_else(|| {
                    DataError::field(format!("agents[{k}].eligible"), format!("unknown category `{name}`"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        eligible.sort();
        agents.push(Agent {
            name: a.name.clone(),
            priority: S::from_exact(&a.priority),
            availability,
            eligible,
            group: a.group.clone(),
        });
    }
    let instance = Instance {
        agents,
        categories: doc
            .categories
            .into_iter()
            .map(|c| Category {
                name: c.name,
                daily_quota: c.daily_quota,
                overall_quota: c.overall_quota,
            })
            .collect(),
        daily_supply: doc.daily_supply,
        discount: S::from_exact(&doc.discount),
    };
    Ok(InstanceDocument {
        instance,
        generator: doc.generator,
    })
}

pub fn instance_to_string<S: Scalar>(doc: &InstanceDocument<S>) -> Result<String, DataError> {
    let mut text = serde_json::to_string_pretty(&to_doc(doc)?)?;
    text.push('\n');
    Ok(text)
}

pub fn instance_from_str<S: Scalar>(text: &str) -> Result<InstanceDocument<S>, DataError> {
    check_version(text)?;
    from_doc(serde_json::from_str(text)?)
}

pub fn read_instance_document<S: Scalar>(path: &Path) -> Result<InstanceDocument<S>, DataError> {
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    instance_from_str(&text)
}

pub fn read_instance<S: Scalar>(path: &Path) -> Result<Instance<S>, DataError> {
    Ok(read_instance_document(path)?.instance)
}

pub fn write_instance_document<S: Scalar>(doc: &InstanceDocument<S>, path: &Path) -> Result<(), DataError> {
    fs::write(path, instance_to_string(doc)?).map_err(|e| DataError::io(path, e))
}

pub fn write_instance<S: Scalar>(instance: &Instance<S>, path: &Path) -> Result<(), DataError> {
    write_instance_document(
        &InstanceDocument {
            instance: instance.clone(),
            generator: None,
        },
        path,
    )
}

/// Agents and categories are written by name, in agent order.
pub fn allocation_to_string<S: Scalar>(instance: &Instance<S>, alloc: &Allocation) -> Result<String, DataError> {
    if alloc.len() != instance.agents.len() {
        return Err(DataError::field(
            "assignments",
            format!("{} entries for {} agents", alloc.len(), instance.agents.len()),
        ));
    }
    let assignments = alloc
        .assignments()
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let agent = instance.agents[k].name.clone();
            match *a {
                Assignment::Matched { category, day } => {
                    let category = instance
                        .categories
                        .get(category.0)
                        .ok_or_else(|| DataError::field(format!("assignments[{k}]"), format!("no category {category}")))?
                        .name
                        .clone();
                    Ok(AssignmentDoc::Matched { agent, category, day })
                }
                Assignment::Unmatched => Ok(AssignmentDoc::Unmatched { agent }),
            }
        })
        .collect::<Result<_, DataError>>()?;
    let mut text = serde_json::to_string_pretty(&AllocationDoc {
        schema_version: SCHEMA_VERSION,
        assignments,
    })?;
    text.push('\n');
    Ok(text)
}

/// Every agent of `instance` must appear exactly once.
pub fn allocation_from_str<S: Scalar>(instance: &Instance<S>, text: &str) -> Result<Allocation, DataError> {
    check_version(text)?;
    let doc: AllocationDoc = serde_json::from_str(text)?;
    let mut seen = vec![false; instance.agents.len()];
    let mut alloc = Allocation::unmatched(instance.agents.len());
    for (k, entry) in doc.assignments.iter().enumerate() {
        let name = match entry {
            AssignmentDoc::Matched { agent, .. } | AssignmentDoc::Unmatched { agent } => agent,
        };
        let field = || format!("assignments[{k}]");
        let id = instance
            .agent_by_name(name)
            .ok_or_else(|| DataError::field(field(), format!("unknown agent `{name}`")))?;
        if std::mem::replace(&mut seen[id.0], true) {
            return Err(DataError::field(field(), format!("agent `{name}` listed twice")));
        }
        if let AssignmentDoc::Matched { category, day, .. } = entry {
            let c = instance
                .category_by_name(category)
                .ok_or_else(|| DataError::field(field(), format!("unknown category `{category}`")))?;
            alloc.assign(id, c, *day);
        }
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(DataError::field(
            "assignments",
            format!("agent `{}` missing", instance.agent(AgentId(k)).name),
        ));
    }
    Ok(alloc)
}

pub fn read_allocation<S: Scalar>(instance: &Instance<S>, path: &Path) -> Result<Allocation, DataError> {
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    allocation_from_str(instance, &text)
}

pub fn write_allocation<S: Scalar>(instance: &Instance<S>, alloc: &Allocation, path: &Path) -> Result<(), DataError> {
    fs::write(path, allocation_to_string(instance, alloc)?).map_err(|e| DataError::io(path, e))
}
