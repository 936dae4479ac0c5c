//! Concept attractors: estimation, per-layer separation, layer selection,
//! contraction ratios, vocabulary projection, hierarchical sub-attractors and
//! a deterministic 2-D embedding for plotting.
//!
//! The distance between hidden states is the cosine distance
//! `D(u, v) = 1 − cos(u, v)`, so larger separation means better separated
//! concepts. Contraction ratios use the Euclidean norm instead, because they
//! compare magnitudes.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot, norm, Matrix};
use crate::store::{ActivationSet, ConceptFilter};

/// Mean hidden state of one concept at one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Attractor {
    pub concept: String,
    pub layer: u32,
    pub vector: Vec<f64>,
    /// Number of prompts averaged.
    pub support: usize,
    /// Mean cosine distance of the supporting states to `vector`; `None` when
    /// the mean is the zero vector and the distance is undefined.
    pub spread: Option<f64>,
    /// Mean Euclidean distance of the supporting states to `vector`.
    pub spread_euclidean: f64,
}

impl Attractor {
    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    /// Builds the attractor of the given rows.
    pub fn from_rows(concept: impl Into<String>, layer: u32, rows: &Matrix) -> Result<Self> {
        if rows.rows() == 0 {
            return Err(Error::EmptySet);
        }
        let vector = mean_rows(rows);
        let spread = if norm(&vector) == 0.0 {
            None
        } else {
            let mut acc = 0.0;
            for (i, r) in rows.row_iter().enumerate() {
                acc += cosine_distance(r, &vector)
                    .map_err(|_| Error::ZeroVector(format!("supporting row {i} has zero norm")))?;
            }
            Some(acc / rows.rows() as f64)
        };
        let spread_euclidean = rows
            .row_iter()
            .map(|r| linalg::euclidean_distance(r, &vector))
            .sum::<f64>()
            / rows.rows() as f64;
        Ok(Attractor {
            concept: concept.into(),
            layer,
            vector,
            support: rows.rows(),
            spread,
            spread_euclidean,
        })
    }
}

/// Arithmetic mean of the rows, summed in row order.
pub fn mean_rows(rows: &Matrix) -> Vec<f64> {
    let mut acc = vec![0.0; rows.cols()];
    for r in rows.row_iter() {
        linalg::axpy(&mut acc, 1.0, r);
    }
    let n = rows.rows().max(1) as f64;
    acc.iter_mut().for_each(|v| *v /= n);
    acc
}

/// Attractor of `concept` at `layer`: the mean of the matching hidden states.
pub fn estimate_attractor(set: &ActivationSet, concept: &str, layer: u32) -> Result<Attractor> {
    let rows = set.slice(ConceptFilter::Concept(concept), layer)?;
    Attractor::from_rows(concept, layer, &rows)
}

pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    check_dim(u.len(), v.len())?;
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 {
        return Err(Error::ZeroVector("first operand".into()));
    }
    if nv == 0.0 {
        return Err(Error::ZeroVector("second operand".into()));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// `1 − cos(u, v)`, in `[0, 2]`.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    Ok(1.0 - cosine_similarity(u, v)?)
}

fn unit_rows(rows: &Matrix, ids: impl Fn(usize) -> String) -> Result<Matrix> {
    let mut out = rows.clone();
    for i in 0..rows.rows() {
        let n = norm(rows.row(i));
        if n == 0.0 {
            return Err(Error::ZeroVector(format!("hidden state of prompt `{}`", ids(i))));
        }
        out.row_mut(i).iter_mut().for_each(|v| *v /= n);
    }
    Ok(out)
}

/// Cosine similarity between every pair of prompts at `layer`.
pub fn pairwise_similarity(set: &ActivationSet, layer: u32) -> Result<Matrix> {
    let rows = set.slice(ConceptFilter::All, layer)?;
    let unit = unit_rows(&rows, |i| set.prompts()[i].id.clone())?;
    let n = unit.rows();
    let mut sim = Matrix::zeros(n, n);
    for i in 0..n {
        sim[(i, i)] = 1.0;
        for j in i + 1..n {
            let c = dot(unit.row(i), unit.row(j)).clamp(-1.0, 1.0);
            sim[(i, j)] = c;
            sim[(j, i)] = c;
        }
    }
    Ok(sim)
}

/// Separation statistics of one layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSeparation {
    pub layer: u32,
    pub inter: f64,
    pub intra: f64,
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationProfile {
    pub records: Vec<LayerSeparation>,
    pub selected_layer: u32,
    pub num_concepts: usize,
}

impl SeparationProfile {
    /// Assembles a profile from per-layer records and selects the layer.
    pub fn from_records(records: Vec<LayerSeparation>, num_concepts: usize) -> Result<Self> {
        let selected_layer = argmax_layer(&records)?;
        Ok(SeparationProfile {
            records,
            selected_layer,
            num_concepts,
        })
    }
}

fn argmax_layer(records: &[LayerSeparation]) -> Result<u32> {
    let mut best: Option<&LayerSeparation> = None;
    for r in records {
        best = match best {
            None => Some(r),
            Some(b) if r.separation > b.separation => Some(r),
            Some(b) if r.separation == b.separation && r.layer < b.layer => Some(r),
            keep => keep,
        };
    }
    best.map(|r| r.layer).ok_or(Error::EmptyProfile)
}

/// Layer maximising separation; ties go to the lowest layer ordinal.
pub fn select_layer(profile: &SeparationProfile) -> Result<u32> {
    argmax_layer(&profile.records)
}

/// Inter-attractor distance, intra-attractor spread and their difference at one layer.
pub fn layer_separation(set: &ActivationSet, layer: u32) -> Result<LayerSeparation> {
    let slot = set.layer_slot(layer)?;
    let concepts = set.concepts();
    if concepts.len() < 2 {
        return Err(Error::NeedTwoConcepts(concepts.len()));
    }
    let mut attractors = Vec::with_capacity(concepts.len());
    let mut members = Vec::with_capacity(concepts.len());
    for c in &concepts {
        let idx = set.prompts_for(c)?;
        let rows = set.rows_at(&idx, slot);
        attractors.push(mean_rows(&rows));
        members.push(rows);
    }
    let zero = |c: &str| Error::ZeroVector(format!("attractor of concept `{c}` at layer {layer}"));

    let mut inter = 0.0;
    let mut pairs = 0usize;
    for i in 0..attractors.len() {
        for j in i + 1..attractors.len() {
            inter += cosine_distance(&attractors[i], &attractors[j]).map_err(|_| {
                if norm(&attractors[i]) == 0.0 {
                    zero(concepts[i])
                } else {
                    zero(concepts[j])
                }
            })?;
            pairs += 1;
        }
    }
    inter /= pairs as f64;

    let mut intra = 0.0;
    let mut count = 0usize;
    for (ci, rows) in members.iter().enumerate() {
        if norm(&attractors[ci]) == 0.0 {
            return Err(zero(concepts[ci]));
        }
        let idx = set.prompts_for(concepts[ci])?;
        for (k, r) in rows.row_iter().enumerate() {
            intra += cosine_distance(&attractors[ci], r).map_err(|_| {
                Error::ZeroVector(format!(
                    "hidden state of prompt `{}` at layer {layer}",
                    set.prompts()[idx[k]].id
                ))
            })?;
            count += 1;
        }
    }
    intra /= count as f64;

    Ok(LayerSeparation {
        layer,
        inter,
        intra,
        separation: inter - intra,
    })
}

/// Separation for every stored layer plus the selected attractor layer.
pub fn separation_profile(set: &ActivationSet) -> Result<SeparationProfile> {
    let n = set.concepts().len();
    if n < 2 {
        return Err(Error::NeedTwoConcepts(n));
    }
    let records = set
        .layer_indices()
        .iter()
        .map(|&l| layer_separation(set, l))
        .collect::<Result<Vec<_>>>()?;
    SeparationProfile::from_records(records, n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptRatio {
    pub concept: String,
    pub ratio: f64,
}

fn mean_pairwise_euclidean(rows: &Matrix) -> f64 {
    let n = rows.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            acc += linalg::euclidean_distance(rows.row(i), rows.row(j));
        }
    }
    // ordered pairs over n², the diagonal contributes zeros
    2.0 * acc / (n * n) as f64
}

/// Per concept: mean pairwise Euclidean distance at `layer` divided by the
/// same quantity at the first stored layer. Values well below one indicate
/// that the concept's prompts have been squashed together.
pub fn contraction_ratio(set: &ActivationSet, layer: u32) -> Result<Vec<ConceptRatio>> {
    let slot = set.layer_slot(layer)?;
    let mut out = Vec::new();
    for c in set.concepts() {
        let idx = set.prompts_for(c)?;
        if idx.len() < 2 {
            return Err(Error::NeedTwoPrompts(c.to_string()));
        }
        let base = mean_pairwise_euclidean(&set.rows_at(&idx, 0));
        if base == 0.0 {
            return Err(Error::DegenerateBaseline(c.to_string()));
        }
        let here = mean_pairwise_euclidean(&set.rows_at(&idx, slot));
        out.push(ConceptRatio {
            concept: c.to_string(),
            ratio: here / base,
        });
    }
    Ok(out)
}

/// Row-major `V × d` view of an unembedding (output projection) matrix.
#[derive(Debug, Clone, Copy)]
pub struct Unembedding<'a> {
    data: &'a [f32],
    dim: usize,
}

impl<'a> Unembedding<'a> {
    pub fn new(data: &'a [f32], dim: usize) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidShape(format!(
                "{} values do not form rows of width {dim}",
                data.len()
            )));
        }
        Ok(Unembedding { data, dim })
    }

    pub fn vocab_size(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TokenScore {
    pub token_id: usize,
    pub score: f64,
}

/// The `k` tokens with the largest logit `unembedding · vector`, best first;
/// equal scores are ordered by token id.
pub fn project_to_vocab(attr: &Attractor, unembedding: Unembedding<'_>, k: usize) -> Result<Vec<TokenScore>> {
    check_dim(unembedding.dim, attr.dim())?;
    let vocab = unembedding.vocab_size();
    if k > vocab {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds vocabulary size {vocab}"
        )));
    }
    let mut scores: Vec<TokenScore> = unembedding
        .data
        .chunks_exact(unembedding.dim)
        .enumerate()
        .map(|(token_id, row)| TokenScore {
            token_id,
            score: row.iter().zip(&attr.vector).map(|(&w, v)| f64::from(w) * v).sum(),
        })
        .collect();
    let order = |a: &TokenScore, b: &TokenScore| b.score.total_cmp(&a.score).then(a.token_id.cmp(&b.token_id));
    if k < scores.len() && k > 0 {
        scores.select_nth_unstable_by(k - 1, order);
    }
    scores.truncate(k);
    scores.sort_by(order);
    Ok(scores)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOptions {
    /// Minimum spread reduction required to accept a split.
    pub gamma: f64,
    pub max_depth: usize,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions {
            gamma: 0.05,
            max_depth: 3,
        }
    }
}

/// A node of the sub-attractor hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct SubAttractorTree {
    pub attractor: Attractor,
    /// Prompt indices supporting this node, in prompt order.
    pub members: Vec<usize>,
    /// Spread reduction achieved by the split into `children`; 0 for leaves.
    pub split_gain: f64,
    pub children: Vec<SubAttractorTree>,
}

impl SubAttractorTree {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> Vec<&SubAttractorTree> {
        if self.is_leaf() {
            return vec![self];
        }
        self.children.iter().flat_map(|c| c.leaves()).collect()
    }
}

const LLOYD_MAX_ITERS: usize = 50;
const LLOYD_TOL: f64 = 1e-6;

/// Recursive 2-means under cosine distance. A node splits only when both
/// children keep at least two prompts and the spread drops by at least
/// `gamma`.
pub fn split_subattractors(
    set: &ActivationSet,
    concept: &str,
    layer: u32,
    opts: SplitOptions,
) -> Result<SubAttractorTree> {
    let slot = set.layer_slot(layer)?;
    let idx = set.prompts_for(concept)?;
    if idx.len() < 4 {
        return Err(Error::SupportTooSmall {
            concept: concept.to_string(),
            support: idx.len(),
            required: 4,
        });
    }
    let rows = set.rows_at(&idx, slot);
    unit_rows(&rows, |i| set.prompts()[idx[i]].id.clone())?;
    grow(concept, layer, &rows, idx, 0, opts)
}

fn grow(
    concept: &str,
    layer: u32,
    rows: &Matrix,
    members: Vec<usize>,
    depth: usize,
    opts: SplitOptions,
) -> Result<SubAttractorTree> {
    let attractor = Attractor::from_rows(concept, layer, rows)?;
    let mut node = SubAttractorTree {
        attractor,
        members,
        split_gain: 0.0,
        children: Vec::new(),
    };
    if depth >= opts.max_depth || rows.rows() < 4 {
        return Ok(node);
    }
    let Some(parent_spread) = node.attractor.spread else {
        return Ok(node);
    };
    let Some(assign) = two_means(rows)? else {
        return Ok(node);
    };
    let mut parts: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &a) in assign.iter().enumerate() {
        parts[a].push(i);
    }
    if parts.iter().any(|p| p.len() < 2) {
        return Ok(node);
    }
    let sub_rows: Vec<Matrix> = parts.iter().map(|p| pick_rows(rows, p)).collect();
    let mut weighted = 0.0;
    for (p, r) in parts.iter().zip(&sub_rows) {
        let a = Attractor::from_rows(concept, layer, r)?;
        let Some(s) = a.spread else {
            return Ok(node);
        };
        weighted += s * p.len() as f64;
    }
    let gain = parent_spread - weighted / rows.rows() as f64;
    if gain < opts.gamma {
        return Ok(node);
    }
    node.split_gain = gain;
    for (p, r) in parts.iter().zip(&sub_rows) {
        let members = p.iter().map(|&i| node.members[i]).collect();
        node.children.push(grow(concept, layer, r, members, depth + 1, opts)?);
    }
    Ok(node)
}

fn pick_rows(rows: &Matrix, which: &[usize]) -> Matrix {
    let picked: Vec<&[f64]> = which.iter().map(|&i| rows.row(i)).collect();
    Matrix::from_rows(&picked).expect("rows share a width")
}

/// Cluster assignment (0 or 1) per row, or `None` when the rows cannot be
/// split (all collinear or a centre collapsed to zero).
fn two_means(rows: &Matrix) -> Result<Option<Vec<usize>>> {
    let n = rows.rows();
    let mut far = (0, 1, -1.0);
    for i in 0..n {
        for j in i + 1..n {
            let dist = cosine_distance(rows.row(i), rows.row(j))?;
            if dist > far.2 {
                far = (i, j, dist);
            }
        }
    }
    if far.2 <= 0.0 {
        return Ok(None);
    }
    let mut centers = [rows.row(far.0).to_vec(), rows.row(far.1).to_vec()];
    let mut assign = vec![0usize; n];
    for _ in 0..LLOYD_MAX_ITERS {
        for (i, r) in rows.row_iter().enumerate() {
            let d0 = cosine_distance(r, &centers[0])?;
            let d1 = cosine_distance(r, &centers[1])?;
            assign[i] = usize::from(d1 < d0);
        }
        let mut moved: f64 = 0.0;
        for (c, center) in centers.iter_mut().enumerate() {
            let which: Vec<usize> = (0..n).filter(|&i| assign[i] == c).collect();
            if which.is_empty() {
                return Ok(None);
            }
            let next = mean_rows(&pick_rows(rows, &which));
            if norm(&next) == 0.0 {
                return Ok(None);
            }
            moved = moved.max(linalg::euclidean_distance(center, &next));
            *center = next;
        }
        if moved < LLOYD_TOL {
            break;
        }
    }
    Ok(Some(assign))
}

/// Projection of the centred layer matrix onto its top two principal axes.
///
/// Each axis is signed so that its largest-magnitude loading is positive.
/// A missing second axis (rank-one data) yields zero `y` coordinates.
pub fn embed2d(set: &ActivationSet, layer: u32) -> Result<Matrix> {
    let rows = set.slice(ConceptFilter::All, layer)?;
    principal_coordinates(&rows)
}

/// See [`embed2d`]; operates on an explicit row matrix.
pub fn principal_coordinates(rows: &Matrix) -> Result<Matrix> {
    let n = rows.rows();
    let d = rows.cols();
    if n < 2 {
        return Err(Error::TooFewPoints { required: 2, found: n });
    }
    let mean = mean_rows(rows);
    let mut centred = rows.clone();
    for i in 0..n {
        centred.row_mut(i).iter_mut().zip(&mean).for_each(|(v, m)| *v -= m);
    }

    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(2);
    if n <= d {
        // eigenvectors of the Gram matrix map to axes through Xᵀu / √λ
        let gram = centred.matmul(&centred.transpose())?;
        let (vals, vecs) = linalg::symmetric_eigen(&gram)?;
        let floor = vals[0].abs() * 1e-12;
        for k in 0..2.min(n) {
            if vals[k] <= floor || vals[k] <= 0.0 {
                break;
            }
            let u: Vec<f64> = (0..n).map(|i| vecs[(i, k)]).collect();
            let mut axis = centred.transpose_matvec(&u)?;
            let s = norm(&axis);
            axis.iter_mut().for_each(|v| *v /= s);
            axes.push(axis);
        }
    } else {
        let cov = centred.transpose().matmul(&centred)?;
        let (vals, vecs) = linalg::symmetric_eigen(&cov)?;
        let floor = vals[0].abs() * 1e-12;
        for k in 0..2.min(d) {
            if vals[k] <= floor || vals[k] <= 0.0 {
                break;
            }
            axes.push((0..d).map(|i| vecs[(i, k)]).collect());
        }
    }

    let mut out = Matrix::zeros(n, 2);
    for (k, axis) in axes.iter_mut().enumerate() {
        let mut lead = 0;
        for i in 1..axis.len() {
            if axis[i].abs() > axis[lead].abs() {
                lead = i;
            }
        }
        if axis[lead] < 0.0 {
            axis.iter_mut().for_each(|v| *v = -*v);
        }
        for i in 0..n {
            out[(i, k)] = dot(centred.row(i), axis);
        }
    }
    Ok(out)
}

/// Mean silhouette coefficient of a labelled 2-D (or any) embedding.
pub fn silhouette(points: &Matrix, labels: &[usize]) -> Result<f64> {
    check_dim(points.rows(), labels.len())?;
    let n = points.rows();
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    if k < 2 {
        return Err(Error::InvalidArgument("silhouette needs two clusters".into()));
    }
    let mut total = 0.0;
    for i in 0..n {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for j in 0..n {
            if i != j {
                sums[labels[j]] += linalg::euclidean_distance(points.row(i), points.row(j));
                counts[labels[j]] += 1;
            }
        }
        let own = labels[i];
        if counts[own] == 0 {
            continue;
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..k)
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok(total / n as f64)
}
