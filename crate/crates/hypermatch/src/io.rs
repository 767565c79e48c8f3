//! JSON wire formats for instances, outcomes, and traces — all numeric
//! content as exact rational strings — plus schedule-argument parsing.

use crate::discounts::Schedule;
use crate::hypergraph::{Hypergraph, HypergraphError, Matching, WeightedInstance};
use crate::rational::{format_rat, parse_rat, Rat};
use crate::rounding::{
    RoundingOutcome, StuckCertificate, StuckReport, SuccessReport, TraceAction, TraceStep,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error("bad rational '{text}'")]
    Rational { text: String },
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error("bad schedule argument '{arg}': {reason}")]
    Schedule { arg: String, reason: String },
}

fn rat_from(text: &str) -> Result<Rat, IoError> {
    parse_rat(text).map_err(|_| IoError::Rational {
        text: text.to_string(),
    })
}

fn rats_from(texts: &[String]) -> Result<Vec<Rat>, IoError> {
    texts.iter().map(|t| rat_from(t)).collect()
}

fn rats_to(values: &[Rat]) -> Vec<String> {
    values.iter().map(format_rat).collect()
}

/// Reads a whole file, attaching the path to any failure.
pub fn read_file(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

// ---------------------------------------------------------------------------
// instances

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    vertices: usize,
    edges: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<String>>,
}

/// Parses the JSON instance format: vertex count, edge lists, and optional
/// exact rational weights (defaulting to 1 everywhere).
pub fn parse_instance(text: &str) -> Result<WeightedInstance, IoError> {
    let raw: InstanceJson = serde_json::from_str(text)?;
    let h = Hypergraph::build(raw.vertices, raw.edges)?;
    match raw.weights {
        None => Ok(WeightedInstance::unit(h)),
        Some(texts) => {
            let weights = rats_from(&texts)?;
            Ok(WeightedInstance::new(h, weights)?)
        }
    }
}

/// Serializes an instance to the JSON instance format with explicit weights.
pub fn instance_to_json(inst: &WeightedInstance) -> String {
    let raw = InstanceJson {
        vertices: inst.hypergraph().vertex_count(),
        edges: inst.hypergraph().edges().map(<[usize]>::to_vec).collect(),
        weights: Some(rats_to(inst.weights())),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("instance serializes");
    out.push('\n');
    out
}

/// Loads and parses an instance file.
pub fn load_instance(path: &Path) -> Result<WeightedInstance, IoError> {
    parse_instance(&read_file(path)?)
}

// ---------------------------------------------------------------------------
// outcomes

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateJson {
    edges: Vec<usize>,
    x: Vec<String>,
    slacks: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeJson {
    status: String,
    schedule: String,
    discounts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matching: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    guarantee: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lp_optimum: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<CertificateJson>,
}

/// The payload of an outcome document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutcomeBody {
    Success {
        matching: Vec<usize>,
        guarantee: Rat,
        lp_optimum: Rat,
    },
    Stuck {
        certificate: StuckCertificate,
    },
    /// A stuckness search that exhausted its space without finding a
    /// certificate.
    Absent,
}

/// A self-contained serialized outcome: which schedule produced it, the
/// exact per-edge discounts, and the result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeDocument {
    pub schedule: String,
    pub discounts: Vec<Rat>,
    pub body: OutcomeBody,
}

impl OutcomeDocument {
    pub fn from_outcome(schedule: String, discounts: Vec<Rat>, outcome: &RoundingOutcome) -> Self {
        let body = match outcome {
            RoundingOutcome::Success(report) => OutcomeBody::Success {
                matching: report.matching.edge_indices().collect(),
                guarantee: report.guarantee.clone(),
                lp_optimum: report.lp_optimum.clone(),
            },
            RoundingOutcome::Stuck(report) => OutcomeBody::Stuck {
                certificate: report.certificate.clone(),
            },
        };
        Self {
            schedule,
            discounts,
            body,
        }
    }

    pub fn absent(schedule: String, discounts: Vec<Rat>) -> Self {
        Self {
            schedule,
            discounts,
            body: OutcomeBody::Absent,
        }
    }

    /// Rebuilds the in-memory outcome against a concrete hypergraph (traces
    /// are not part of the document and come back empty).  Fails on `Absent`
    /// documents and on matchings that are not matchings of `h`.
    pub fn to_outcome(&self, h: &Hypergraph) -> Result<RoundingOutcome, IoError> {
        match &self.body {
            OutcomeBody::Success {
                matching,
                guarantee,
                lp_optimum,
            } => {
                let matching = Matching::new(h, matching.iter().copied())?;
                Ok(RoundingOutcome::Success(SuccessReport {
                    matching,
                    guarantee: guarantee.clone(),
                    lp_optimum: lp_optimum.clone(),
                    trace: Vec::new(),
                }))
            }
            OutcomeBody::Stuck { certificate } => Ok(RoundingOutcome::Stuck(StuckReport {
                certificate: certificate.clone(),
                trace: Vec::new(),
            })),
            OutcomeBody::Absent => Err(IoError::Malformed(
                "outcome records an absent search; there is nothing to verify".to_string(),
            )),
        }
    }
}

/// Serializes an outcome document.
pub fn outcome_to_json(doc: &OutcomeDocument) -> String {
    let mut raw = OutcomeJson {
        status: String::new(),
        schedule: doc.schedule.clone(),
        discounts: rats_to(&doc.discounts),
        matching: None,
        guarantee: None,
        lp_optimum: None,
        certificate: None,
    };
    match &doc.body {
        OutcomeBody::Success {
            matching,
            guarantee,
            lp_optimum,
        } => {
            raw.status = "success".to_string();
            raw.matching = Some(matching.clone());
            raw.guarantee = Some(format_rat(guarantee));
            raw.lp_optimum = Some(format_rat(lp_optimum));
        }
        OutcomeBody::Stuck { certificate } => {
            raw.status = "stuck".to_string();
            raw.certificate = Some(CertificateJson {
                edges: certificate.edges.clone(),
                x: rats_to(&certificate.x),
                slacks: rats_to(&certificate.slacks),
            });
        }
        OutcomeBody::Absent => raw.status = "absent".to_string(),
    }
    let mut out = serde_json::to_string_pretty(&raw).expect("outcome serializes");
    out.push('\n');
    out
}

/// Parses an outcome document, insisting the fields present match the
/// status.
pub fn parse_outcome(text: &str) -> Result<OutcomeDocument, IoError> {
    let raw: OutcomeJson = serde_json::from_str(text)?;
    let discounts = rats_from(&raw.discounts)?;
    let field_error = |msg: &str| IoError::Malformed(format!("status '{}' {msg}", raw.status));
    let body = match raw.status.as_str() {
        "success" => {
            if raw.certificate.is_some() {
                return Err(field_error("must not carry a certificate"));
            }
            let matching = raw
                .matching
                .ok_or_else(|| field_error("requires a matching"))?;
            let guarantee = raw
                .guarantee
                .ok_or_else(|| field_error("requires a guarantee"))?;
            let lp_optimum = raw
                .lp_optimum
                .ok_or_else(|| field_error("requires an lp_optimum"))?;
            OutcomeBody::Success {
                matching,
                guarantee: rat_from(&guarantee)?,
                lp_optimum: rat_from(&lp_optimum)?,
            }
        }
        "stuck" => {
            if raw.matching.is_some() || raw.guarantee.is_some() || raw.lp_optimum.is_some() {
                return Err(field_error("must carry only a certificate"));
            }
            let cert = raw
                .certificate
                .ok_or_else(|| field_error("requires a certificate"))?;
            OutcomeBody::Stuck {
                certificate: StuckCertificate {
                    edges: cert.edges,
                    x: rats_from(&cert.x)?,
                    slacks: rats_from(&cert.slacks)?,
                },
            }
        }
        "absent" => {
            if raw.matching.is_some() || raw.certificate.is_some() || raw.guarantee.is_some() {
                return Err(field_error("carries no result fields"));
            }
            OutcomeBody::Absent
        }
        other => {
            return Err(IoError::Malformed(format!(
                "unknown outcome status '{other}'"
            )))
        }
    };
    Ok(OutcomeDocument {
        schedule: raw.schedule,
        discounts,
        body,
    })
}

// ---------------------------------------------------------------------------
// traces

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceStepJson {
    edge: usize,
    action: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kept: Option<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceJson {
    steps: Vec<TraceStepJson>,
}

pub fn trace_to_json(steps: &[TraceStep]) -> String {
    let steps = steps
        .iter()
        .map(|s| match &s.action {
            TraceAction::DropNonpositive => TraceStepJson {
                edge: s.edge,
                action: "drop_nonpositive".to_string(),
                weight: None,
                kept: None,
            },
            TraceAction::Peel { weight, kept } => TraceStepJson {
                edge: s.edge,
                action: "peel".to_string(),
                weight: Some(format_rat(weight)),
                kept: Some(*kept),
            },
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&TraceJson { steps }).expect("trace serializes");
    out.push('\n');
    out
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceStep>, IoError> {
    let raw: TraceJson = serde_json::from_str(text)?;
    raw.steps
        .into_iter()
        .map(|s| {
            let action = match s.action.as_str() {
                "drop_nonpositive" => {
                    if s.weight.is_some() || s.kept.is_some() {
                        return Err(IoError::Malformed(
                            "drop steps carry no weight or kept flag".to_string(),
                        ));
                    }
                    TraceAction::DropNonpositive
                }
                "peel" => {
                    let weight = s
                        .weight
                        .ok_or_else(|| IoError::Malformed("peel step lacks weight".to_string()))?;
                    let kept = s
                        .kept
                        .ok_or_else(|| IoError::Malformed("peel step lacks kept".to_string()))?;
                    TraceAction::Peel {
                        weight: rat_from(&weight)?,
                        kept,
                    }
                }
                other => {
                    return Err(IoError::Malformed(format!(
                        "unknown trace action '{other}'"
                    )))
                }
            };
            Ok(TraceStep {
                edge: s.edge,
                action,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// schedule arguments

/// Parses the `--schedule` argument grammar:
/// `hstar | hr:<r> | hinf:<terms> | htilde | baseline | constant:<rational>
/// | table:<file>`, where the table file is a JSON object mapping edge
/// sizes to exact rational discount strings.
pub fn parse_schedule(arg: &str) -> Result<Schedule, IoError> {
    let bad = |reason: String| IoError::Schedule {
        arg: arg.to_string(),
        reason,
    };
    match arg {
        "hstar" => return Ok(Schedule::HStar),
        "htilde" => return Ok(Schedule::HTildeInf),
        "baseline" => return Ok(Schedule::Baseline),
        _ => {}
    }
    let Some((kind, param)) = arg.split_once(':') else {
        return Err(bad("unknown schedule name".to_string()));
    };
    match kind {
        "hr" => {
            let r: u32 = param
                .parse()
                .map_err(|_| bad(format!("'{param}' is not an integer horizon")))?;
            if r < 2 {
                return Err(bad("horizon must be at least 2".to_string()));
            }
            Ok(Schedule::Hr { r })
        }
        "hinf" => {
            let terms: u32 = param
                .parse()
                .map_err(|_| bad(format!("'{param}' is not a term count")))?;
            if terms == 0 {
                return Err(bad("term count must be positive".to_string()));
            }
            Ok(Schedule::HInfTruncated { terms })
        }
        "constant" => {
            let c = parse_rat(param).map_err(|_| bad(format!("'{param}' is not a rational")))?;
            Ok(Schedule::Constant(c))
        }
        "table" => load_schedule_table(Path::new(param)),
        _ => Err(bad("unknown schedule name".to_string())),
    }
}

/// Loads a table schedule: a JSON object whose keys are edge sizes and
/// whose values are exact rational strings, e.g. `{"2": "2/3", "3": "3/7"}`.
pub fn load_schedule_table(path: &Path) -> Result<Schedule, IoError> {
    let text = read_file(path)?;
    let raw: BTreeMap<String, String> = serde_json::from_str(&text)?;
    if raw.is_empty() {
        return Err(IoError::Malformed(
            "schedule table defines no sizes".to_string(),
        ));
    }
    let mut map = BTreeMap::new();
    for (k, v) in raw {
        let size: u32 = k
            .parse()
            .map_err(|_| IoError::Malformed(format!("table key '{k}' is not an edge size")))?;
        map.insert(size, rat_from(&v)?);
    }
    Ok(Schedule::Table(map))
}
