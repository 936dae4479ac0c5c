//! JSON and CSV artifacts.
//!
//! Every JSON document goes through [`serde_json::Value`], whose object map
//! is ordered, so keys always come out sorted and the text is reproducible.
//! Readers ignore keys they do not know, which lets a fit result double as
//! a model file and a perturbed attractor double as an attractor.

use attractor_core::attractor::{Attractor, ConceptRatio, SeparationProfile, SubAttractorTree, TokenScore};
use attractor_core::guardrail::{Decision, GuardrailPolicy, PolicyEntry, SweepPoint};
use attractor_core::ifs::{AffineMap, FitResult, IfsModel, PointSet};
use attractor_core::steering::{ApplyAt, PerturbedAttractor, SteeringMode, SteeringSpec};
use attractor_core::{ActivationSet, Error, Matrix};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::{KitError, Result};

/// Compact JSON with sorted keys and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("artifact serializes");
    let mut s = serde_json::to_string(&v).expect("value serializes");
    s.push('\n');
    s
}

fn parse<T: DeserializeOwned>(what: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| KitError::Parse {
        what: what.into(),
        message: e.to_string(),
    })
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

// ---------------------------------------------------------------- attractors

#[derive(Serialize, Deserialize)]
struct AttractorDoc {
    concept: String,
    dim: usize,
    layer: u32,
    spread: Option<f64>,
    spread_euclidean: f64,
    support: usize,
    vector: Vec<f64>,
}

impl From<&Attractor> for AttractorDoc {
    fn from(a: &Attractor) -> Self {
        AttractorDoc {
            concept: a.concept.clone(),
            dim: a.dim(),
            layer: a.layer,
            spread: a.spread,
            spread_euclidean: a.spread_euclidean,
            support: a.support,
            vector: a.vector.clone(),
        }
    }
}

pub fn attractor_to_json(a: &Attractor) -> String {
    to_json(&AttractorDoc::from(a))
}

pub fn attractor_from_json(text: &str) -> Result<Attractor> {
    let d: AttractorDoc = parse("attractor", text)?;
    if d.dim != d.vector.len() {
        return Err(Error::DimMismatch {
            expected: d.dim,
            found: d.vector.len(),
        }
        .into());
    }
    if d.vector.iter().any(|v| !v.is_finite()) || !d.spread_euclidean.is_finite() {
        return Err(Error::NonFiniteInput("attractor").into());
    }
    Ok(Attractor {
        concept: d.concept,
        layer: d.layer,
        vector: d.vector,
        support: d.support,
        spread: d.spread,
        spread_euclidean: d.spread_euclidean,
    })
}

pub fn perturbed_to_json(p: &PerturbedAttractor) -> String {
    let mut doc = serde_json::to_value(AttractorDoc::from(&p.base)).expect("serializes");
    let obj = doc.as_object_mut().expect("object");
    obj.insert("vector".into(), json!(p.vector));
    obj.insert("base_vector".into(), json!(p.base.vector));
    obj.insert("rho".into(), json!(p.rho));
    obj.insert("seed".into(), json!(p.seed));
    obj.insert("sigma".into(), json!(p.sigma));
    to_json(&doc)
}

pub fn subtree_to_json(tree: &SubAttractorTree, set: &ActivationSet) -> String {
    fn node(t: &SubAttractorTree, set: &ActivationSet) -> Value {
        json!({
            "attractor": AttractorDoc::from(&t.attractor),
            "children": t.children.iter().map(|c| node(c, set)).collect::<Vec<_>>(),
            "members": t.members.iter().map(|&i| set.prompts()[i].id.as_str()).collect::<Vec<_>>(),
            "split_gain": t.split_gain,
        })
    }
    to_json(&node(tree, set))
}

pub fn tokens_to_json(attr: &Attractor, tokens: &[TokenScore]) -> String {
    to_json(&json!({
        "concept": attr.concept,
        "layer": attr.layer,
        "tokens": tokens.iter().map(|t| json!({"score": t.score, "token_id": t.token_id})).collect::<Vec<_>>(),
    }))
}

pub fn tokens_to_csv(tokens: &[TokenScore]) -> String {
    csv_text(
        &["token_id", "score"],
        tokens.iter().map(|t| vec![t.token_id.to_string(), t.score.to_string()]),
    )
}

// ------------------------------------------------------------ set analyses

pub fn profile_to_json(p: &SeparationProfile) -> String {
    to_json(&json!({
        "num_concepts": p.num_concepts,
        "records": p.records.iter().map(|r| json!({
            "inter": r.inter,
            "intra": r.intra,
            "layer": r.layer,
            "separation": r.separation,
        })).collect::<Vec<_>>(),
        "selected_layer": p.selected_layer,
    }))
}

pub fn profile_to_csv(p: &SeparationProfile) -> String {
    csv_text(
        &["layer", "inter", "intra", "separation"],
        p.records.iter().map(|r| {
            vec![
                r.layer.to_string(),
                r.inter.to_string(),
                r.intra.to_string(),
                r.separation.to_string(),
            ]
        }),
    )
}

pub fn similarity_to_json(set: &ActivationSet, layer: u32, sim: &Matrix) -> String {
    to_json(&json!({
        "layer": layer,
        "prompt_ids": set.prompts().iter().map(|p| p.id.as_str()).collect::<Vec<_>>(),
        "similarity": sim.to_rows(),
    }))
}

pub fn similarity_to_csv(set: &ActivationSet, sim: &Matrix) -> String {
    let mut header = vec!["prompt_id"];
    header.extend(set.prompts().iter().map(|p| p.id.as_str()));
    csv_text(
        &header,
        set.prompts().iter().enumerate().map(|(i, p)| {
            let mut row = vec![p.id.clone()];
            row.extend(sim.row(i).iter().map(f64::to_string));
            row
        }),
    )
}

pub fn contraction_to_json(layer: u32, ratios: &[ConceptRatio]) -> String {
    to_json(&json!({
        "layer": layer,
        "ratios": ratios.iter().map(|r| json!({"concept": r.concept, "ratio": r.ratio})).collect::<Vec<_>>(),
    }))
}

pub fn contraction_to_csv(ratios: &[ConceptRatio]) -> String {
    csv_text(
        &["concept", "ratio"],
        ratios.iter().map(|r| vec![r.concept.clone(), r.ratio.to_string()]),
    )
}

pub fn embedding_to_csv(set: &ActivationSet, xy: &Matrix) -> String {
    csv_text(
        &["prompt_id", "concept", "x", "y"],
        set.prompts().iter().enumerate().map(|(i, p)| {
            vec![
                p.id.clone(),
                p.concept.clone(),
                xy[(i, 0)].to_string(),
                xy[(i, 1)].to_string(),
            ]
        }),
    )
}

pub fn embedding_to_json(set: &ActivationSet, xy: &Matrix) -> String {
    to_json(
        &set.prompts()
            .iter()
            .enumerate()
            .map(|(i, p)| json!({"concept": p.concept, "prompt_id": p.id, "x": xy[(i, 0)], "y": xy[(i, 1)]}))
            .collect::<Vec<_>>(),
    )
}

// ---------------------------------------------------------------- guardrail

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    concept: String,
    message_template: String,
    request_id: String,
    vector: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PolicyDoc {
    entries: Vec<EntryDoc>,
    layer: u32,
    tau: f64,
}

pub fn policy_to_json(p: &GuardrailPolicy) -> String {
    to_json(&PolicyDoc {
        entries: p
            .entries()
            .iter()
            .map(|e| EntryDoc {
                concept: e.concept.clone(),
                message_template: e.message_template.clone(),
                request_id: e.request_id.clone(),
                vector: e.vector.clone(),
            })
            .collect(),
        layer: p.layer(),
        tau: p.tau(),
    })
}

pub fn policy_from_json(text: &str) -> Result<GuardrailPolicy> {
    let d: PolicyDoc = parse("guardrail policy", text)?;
    let entries = d
        .entries
        .into_iter()
        .map(|e| PolicyEntry {
            concept: e.concept,
            request_id: e.request_id,
            message_template: e.message_template,
            vector: e.vector,
        })
        .collect();
    Ok(GuardrailPolicy::new(d.layer, d.tau, entries)?)
}

pub fn decision_to_json(d: &Decision) -> String {
    to_json(&json!({
        "best_concept": d.best_concept,
        "best_similarity": d.best_similarity,
        "blocked": d.blocked,
        "rendered_message": d.rendered_message,
    }))
}

pub fn cutoff_to_json(policy: &GuardrailPolicy, num_prompts: usize, cutoff: f64) -> String {
    to_json(&json!({
        "cutoff": cutoff,
        "layer": policy.layer(),
        "num_prompts": num_prompts,
        "tau": policy.tau(),
    }))
}

pub fn sweep_to_json(points: &[SweepPoint]) -> String {
    to_json(
        &points
            .iter()
            .map(|p| json!({"cutoff": p.cutoff, "false_block_rate": p.false_block_rate, "tau": p.tau}))
            .collect::<Vec<_>>(),
    )
}

pub fn sweep_to_csv(points: &[SweepPoint]) -> String {
    csv_text(
        &["tau", "cutoff", "false_block_rate"],
        points
            .iter()
            .map(|p| vec![p.tau.to_string(), p.cutoff.to_string(), p.false_block_rate.to_string()]),
    )
}

// ----------------------------------------------------------------- steering

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    apply_at: String,
    lambda: f32,
    layer: u32,
    mode: String,
    source_vector: Option<Vec<f32>>,
    target_vector: Option<Vec<f32>>,
}

pub fn spec_to_json(s: &SteeringSpec) -> String {
    to_json(&SpecDoc {
        apply_at: s.apply_at.as_str().into(),
        lambda: s.lambda,
        layer: s.layer,
        mode: s.mode.as_str().into(),
        source_vector: s.source_vector.clone(),
        target_vector: s.target_vector.clone(),
    })
}

pub fn spec_from_json(text: &str) -> Result<SteeringSpec> {
    let d: SpecDoc = parse("steering spec", text)?;
    let bad = |field: &str, value: &str| KitError::Parse {
        what: "steering spec".into(),
        message: format!("unknown {field} `{value}`"),
    };
    let spec = SteeringSpec {
        layer: d.layer,
        mode: SteeringMode::parse(&d.mode).ok_or_else(|| bad("mode", &d.mode))?,
        lambda: d.lambda,
        target_vector: d.target_vector,
        source_vector: d.source_vector,
        apply_at: ApplyAt::parse(&d.apply_at).ok_or_else(|| bad("apply_at", &d.apply_at))?,
    };
    spec.validate()?;
    Ok(spec)
}

/// A hidden state given either as a JSON array or as raw little-endian `f32`.
pub fn parse_vector(bytes: &[u8], what: &str) -> Result<Vec<f32>> {
    let trimmed = bytes.trim_ascii_start();
    if trimmed.first() == Some(&b'[') {
        if let Ok(v) = serde_json::from_slice::<Vec<f32>>(bytes) {
            return Ok(v);
        }
    }
    if bytes.is_empty() || !bytes.len().is_multiple_of(4) {
        return Err(KitError::Parse {
            what: what.into(),
            message: format!(
                "expected a JSON array or little-endian f32 values, got {} bytes",
                bytes.len()
            ),
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("four bytes")))
        .collect())
}

pub fn vector_to_json(v: &[f32]) -> String {
    to_json(&v)
}

// ---------------------------------------------------------------------- ifs

#[derive(Serialize, Deserialize)]
struct MapDoc {
    matrix: Vec<Vec<f64>>,
    translation: Vec<f64>,
}

#[derive(Deserialize)]
struct ModelDoc {
    iter: usize,
    maps: Vec<MapDoc>,
}

fn map_doc(m: &AffineMap) -> Value {
    json!({
        "matrix": m.matrix().to_rows(),
        "operator_norm_bound": m.operator_norm_bound(),
        "translation": m.translation(),
    })
}

pub fn model_to_json(model: &IfsModel) -> String {
    to_json(&json!({
        "iter": model.iter_count(),
        "maps": model.maps().iter().map(map_doc).collect::<Vec<_>>(),
    }))
}

pub fn model_from_json(text: &str) -> Result<IfsModel> {
    let d: ModelDoc = parse("IFS model", text)?;
    let maps = d
        .maps
        .into_iter()
        .map(|m| {
            let matrix = if m.matrix.is_empty() {
                Matrix::zeros(0, 0)
            } else {
                Matrix::from_rows(&m.matrix)?
            };
            AffineMap::new(matrix, m.translation)
        })
        .collect::<attractor_core::Result<Vec<_>>>()?;
    Ok(IfsModel::new(maps, d.iter)?)
}

pub fn fit_to_json(concept: &str, layer: u32, fit: &FitResult) -> String {
    to_json(&json!({
        "concept": concept,
        "cosine_residual": fit.cosine_residual,
        "fixed_point": fit.fixed_point,
        "iter": fit.iter,
        "layer": layer,
        "maps": [map_doc(&fit.map)],
        "per_prompt_residuals": fit.per_prompt_residuals,
        "refinement_steps": fit.refinement_steps,
        "residual": fit.residual,
        "underdetermined": fit.underdetermined,
    }))
}

pub fn points_from_json(text: &str) -> Result<PointSet> {
    let rows: Vec<Vec<f64>> = parse("point set", text)?;
    if rows.is_empty() {
        return Err(Error::EmptySet.into());
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("point set").into());
    }
    Ok(PointSet::from_rows(&rows)?)
}

fn point_rows(p: &PointSet) -> Vec<Vec<f64>> {
    p.iter().map(<[f64]>::to_vec).collect()
}

pub fn trajectory_to_json(mode: &str, seed: Option<u64>, sets: &[PointSet]) -> String {
    to_json(&json!({
        "mode": mode,
        "seed": seed,
        "sets": sets.iter().map(point_rows).collect::<Vec<_>>(),
    }))
}

pub fn trajectory_to_csv(sets: &[PointSet]) -> String {
    let dim = sets.first().map_or(0, PointSet::dim);
    let names: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    let mut header = vec!["step", "index"];
    header.extend(names.iter().map(String::as_str));
    csv_text(
        &header,
        sets.iter().enumerate().flat_map(|(step, s)| {
            s.iter()
                .enumerate()
                .map(move |(i, p)| {
                    let mut row = vec![step.to_string(), i.to_string()];
                    row.extend(p.iter().map(f64::to_string));
                    row
                })
                .collect::<Vec<_>>()
        }),
    )
}
