//! The `attractor-kit` command line.
//!
//! Exit status is 0 on success, 1 on a domain error (one `Name: message`
//! line on standard error) and 2 on a usage error. Outputs named by `--out`
//! are replaced atomically; without `--out` they go to standard output.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use attractor_core::attractor::{
    contraction_ratio, embed2d, estimate_attractor, pairwise_similarity, project_to_vocab, split_subattractors,
    SplitOptions, Unembedding,
};
use attractor_core::guardrail::{check, cutoff_rate, sweep_tau, GuardrailPolicy, PolicyEntry};
use attractor_core::ifs::{collage_error, fixed_point, simulate_ifs, FitOptions, SimulationMode};
use attractor_core::steering::{
    apply_spec, build_add_spec, build_drift_spec, build_reinforce_spec, build_switch_spec, perturb_attractor, ApplyAt,
};
use attractor_core::store::ConceptFilter;
use attractor_core::{ActivationSet, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::formats::{self, to_json};
use crate::io::{read_input, read_text, write_atomic};
use crate::{container, parallel, KitError, Result};

const DEFAULT_TEMPLATE: &str = "This request cannot be answered due to removal request <id>.";

#[derive(Parser, Debug)]
#[command(
    name = "attractor-kit",
    version,
    about = "Concept attractors, contractive map fits and intervention artifacts from hidden-state dumps"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate an ACTV1 container and print its shape.
    IngestValidate(InArg),
    /// Per-concept attractors.
    #[command(subcommand)]
    Attractor(AttractorCmd),
    /// Inter, intra and separation for every stored layer.
    Separation(SetArgs),
    /// The layer with the largest separation.
    SelectLayer(SetArgs),
    /// Cosine similarity of every prompt pair at one layer.
    Simmatrix(LayerArgs),
    /// Per-concept contraction of pairwise distances relative to the first stored layer.
    Contraction(LayerArgs),
    /// Deterministic 2-D projection of one layer.
    Embed2d(LayerArgs),
    /// Concept guardrail policies.
    #[command(subcommand)]
    Guardrail(GuardrailCmd),
    /// Steering specifications and perturbed attractors.
    #[command(subcommand)]
    Steer(SteerCmd),
    /// Affine contractive maps.
    #[command(subcommand)]
    Ifs(IfsCmd),
}

#[derive(Subcommand, Debug)]
enum AttractorCmd {
    /// Mean hidden state of one concept at one layer.
    Estimate {
        #[command(flatten)]
        input: InArg,
        #[arg(long)]
        concept: String,
        #[arg(long)]
        layer: u32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Top vocabulary tokens of an attractor under an unembedding matrix.
    ProjectVocab {
        /// Attractor JSON.
        #[command(flatten)]
        input: InArg,
        /// Row-major vocab×dim matrix of little-endian f32.
        #[arg(long)]
        unembedding: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[command(flatten)]
        out: OutArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Recursive 2-means split of a concept into sub-attractors.
    Split {
        #[command(flatten)]
        input: InArg,
        #[arg(long)]
        concept: String,
        #[arg(long)]
        layer: u32,
        #[arg(long, default_value_t = 0.05)]
        gamma: f64,
        #[arg(long, default_value_t = 3)]
        max_depth: usize,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand, Debug)]
enum GuardrailCmd {
    /// Build a policy from attractor files.
    Build {
        /// Attractor JSON, one per entry.
        #[arg(long = "attractor", required = true)]
        attractors: Vec<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        /// Either one id for every entry or one per attractor.
        #[arg(long = "request-id", required = true)]
        request_ids: Vec<String>,
        #[arg(long, default_value = DEFAULT_TEMPLATE)]
        template: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Decide one hidden state (JSON array or raw f32, from --in or standard input).
    Check {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Overrides the policy threshold.
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Fraction of a forget set that the policy blocks.
    Cutoff {
        #[command(flatten)]
        input: InArg,
        #[arg(long)]
        policy: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Cutoff and false-block rate over a threshold grid.
    Sweep {
        /// Forget set.
        #[command(flatten)]
        input: InArg,
        /// Retain set.
        #[arg(long)]
        retain: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        /// Comma-separated ascending thresholds; defaults to -1 to 1 in steps of 0.05.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Subcommand, Debug)]
enum SteerCmd {
    /// Add an attractor to the hidden state.
    Add(SingleSteer),
    /// Subtract an attractor from the hidden state.
    Drift(SingleSteer),
    /// Move from a source attractor toward a target attractor.
    Switch {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        lambda: f32,
        #[arg(long, value_enum)]
        apply_at: Option<ApplyAtArg>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Re-add the state captured at the first generation step.
    Reinforce {
        #[arg(long)]
        layer: u32,
        #[arg(long, default_value_t = 1.0)]
        lambda: f32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Gaussian perturbation of an attractor.
    Perturb {
        #[command(flatten)]
        input: InArg,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Apply a spec to one hidden state (JSON array or raw f32).
    Apply {
        #[arg(long)]
        spec: PathBuf,
        /// Hidden state; standard input when absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Runtime anchor for reinforce_initial.
        #[arg(long)]
        anchor: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
struct SingleSteer {
    /// Attractor JSON.
    #[command(flatten)]
    input: InArg,
    #[arg(long, default_value_t = 1.0)]
    lambda: f32,
    #[arg(long, value_enum)]
    apply_at: Option<ApplyAtArg>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Subcommand, Debug)]
enum IfsCmd {
    /// Fit one contractive affine map from the first stored layer to --layer.
    Fit {
        #[command(flatten)]
        input: InArg,
        #[arg(long)]
        concept: String,
        #[arg(long)]
        layer: u32,
        #[arg(long, default_value_t = 8)]
        k_max: usize,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        /// Accepted for interface symmetry; the fit is deterministic.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Hausdorff distance between a point set and its image under each map.
    Collage {
        /// IFS model or fit result JSON.
        #[arg(long)]
        map: PathBuf,
        /// JSON array of points.
        #[arg(long)]
        points: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Iterate the Hutchinson operator or the chaos game.
    Simulate {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        iters: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Full)]
        mode: ModeArg,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Fixed point of every map of a model.
    FixedPoint {
        #[arg(long)]
        map: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
struct InArg {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args, Debug)]
struct OutArg {
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SetArgs {
    #[command(flatten)]
    input: InArg,
    #[command(flatten)]
    out: OutArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct LayerArgs {
    #[command(flatten)]
    input: InArg,
    #[arg(long)]
    layer: u32,
    #[command(flatten)]
    out: OutArg,
    /// Defaults to csv for embed2d and json otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Full,
    #[value(name = "chaos_game")]
    ChaosGame,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ApplyAtArg {
    #[value(name = "prefill_last")]
    PrefillLast,
    #[value(name = "all_positions")]
    AllPositions,
    #[value(name = "decode_steps")]
    DecodeSteps,
}

impl From<ApplyAtArg> for ApplyAt {
    fn from(a: ApplyAtArg) -> Self {
        match a {
            ApplyAtArg::PrefillLast => ApplyAt::PrefillLast,
            ApplyAtArg::AllPositions => ApplyAt::AllPositions,
            ApplyAtArg::DecodeSteps => ApplyAt::DecodeSteps,
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                2
            } else {
                let _ = stdout.write_all(text.as_bytes());
                0
            };
        }
    };
    // the worker pool needs Send inputs, so standard input is drained first
    let piped = match &cli.command {
        Command::Guardrail(GuardrailCmd::Check { input: None, .. })
        | Command::Steer(SteerCmd::Apply { input: None, .. }) => read_input(None, stdin).map(Some),
        _ => Ok(None),
    };
    let result = piped.and_then(|piped| {
        let pool = parallel::thread_pool()?;
        pool.install(|| execute(cli.command, piped))
    });
    match result.and_then(|(text, out)| emit(&text, out.as_deref(), stdout)) {
        Ok(()) => 0,
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            let _ = writeln!(stderr, "{}: {}", e.name(), line);
            1
        }
    }
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()).map_err(|source| KitError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| KitError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn vector_input(path: Option<&Path>, piped: Option<Vec<u8>>) -> Result<Vec<u8>> {
    match (path, piped) {
        (Some(p), _) => crate::io::read_file(p),
        (None, piped) => Ok(piped.unwrap_or_default()),
    }
}

fn load_set(path: &Path) -> Result<ActivationSet> {
    Ok(container::read_container(path)?)
}

fn pick(format: Format, json: impl FnOnce() -> String, csv: impl FnOnce() -> String) -> String {
    match format {
        Format::Json => json(),
        Format::Csv => csv(),
    }
}

fn execute(command: Command, piped: Option<Vec<u8>>) -> Result<(String, Option<PathBuf>)> {
    match command {
        Command::IngestValidate(a) => {
            let set = load_set(&a.input)?;
            let concepts: Vec<_> = set
                .concepts()
                .into_iter()
                .map(|c| {
                    let n = set.prompts().iter().filter(|p| p.concept == c).count();
                    json!({"concept": c, "count": n})
                })
                .collect();
            let doc = json!({
                "concepts": concepts,
                "hidden_dim": set.hidden_dim(),
                "layer_indices": set.layer_indices(),
                "num_layers": set.num_layers(),
                "num_prompts": set.num_prompts(),
            });
            Ok((to_json(&doc), None))
        }
        Command::Attractor(cmd) => attractor_cmd(cmd),
        Command::Separation(a) => {
            let profile = parallel::separation_profile(&load_set(&a.input.input)?)?;
            let text = pick(
                a.format,
                || formats::profile_to_json(&profile),
                || formats::profile_to_csv(&profile),
            );
            Ok((text, a.out.out))
        }
        Command::SelectLayer(a) => {
            let profile = parallel::separation_profile(&load_set(&a.input.input)?)?;
            let best = profile
                .records
                .iter()
                .find(|r| r.layer == profile.selected_layer)
                .expect("selected layer is one of the records");
            let text = pick(
                a.format,
                || to_json(&json!({"selected_layer": best.layer, "separation": best.separation})),
                || format!("selected_layer,separation\n{},{}\n", best.layer, best.separation),
            );
            Ok((text, a.out.out))
        }
        Command::Simmatrix(a) => {
            let set = load_set(&a.input.input)?;
            let sim = pairwise_similarity(&set, a.layer)?;
            let text = pick(
                a.format.unwrap_or(Format::Json),
                || formats::similarity_to_json(&set, a.layer, &sim),
                || formats::similarity_to_csv(&set, &sim),
            );
            Ok((text, a.out.out))
        }
        Command::Contraction(a) => {
            let set = load_set(&a.input.input)?;
            let ratios = contraction_ratio(&set, a.layer)?;
            let text = pick(
                a.format.unwrap_or(Format::Json),
                || formats::contraction_to_json(a.layer, &ratios),
                || formats::contraction_to_csv(&ratios),
            );
            Ok((text, a.out.out))
        }
        Command::Embed2d(a) => {
            let set = load_set(&a.input.input)?;
            let xy = embed2d(&set, a.layer)?;
            let text = pick(
                a.format.unwrap_or(Format::Csv),
                || formats::embedding_to_json(&set, &xy),
                || formats::embedding_to_csv(&set, &xy),
            );
            Ok((text, a.out.out))
        }
        Command::Guardrail(cmd) => guardrail_cmd(cmd, piped),
        Command::Steer(cmd) => steer_cmd(cmd, piped),
        Command::Ifs(cmd) => ifs_cmd(cmd),
    }
}

fn attractor_cmd(cmd: AttractorCmd) -> Result<(String, Option<PathBuf>)> {
    match cmd {
        AttractorCmd::Estimate {
            input,
            concept,
            layer,
            out,
        } => {
            let set = load_set(&input.input)?;
            let a = estimate_attractor(&set, &concept, layer)?;
            Ok((formats::attractor_to_json(&a), out.out))
        }
        AttractorCmd::ProjectVocab {
            input,
            unembedding,
            k,
            out,
            format,
        } => {
            let a = formats::attractor_from_json(&read_text(&input.input)?)?;
            let raw = crate::io::read_file(&unembedding)?;
            if raw.len() % 4 != 0 {
                return Err(Error::InvalidShape(format!(
                    "unembedding file holds {} bytes, not a whole number of f32 values",
                    raw.len()
                ))
                .into());
            }
            let w: Vec<f32> = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("four bytes")))
                .collect();
            let tokens = project_to_vocab(&a, Unembedding::new(&w, a.dim())?, k)?;
            let text = pick(
                format,
                || formats::tokens_to_json(&a, &tokens),
                || formats::tokens_to_csv(&tokens),
            );
            Ok((text, out.out))
        }
        AttractorCmd::Split {
            input,
            concept,
            layer,
            gamma,
            max_depth,
            out,
        } => {
            let set = load_set(&input.input)?;
            let tree = split_subattractors(&set, &concept, layer, SplitOptions { gamma, max_depth })?;
            Ok((formats::subtree_to_json(&tree, &set), out.out))
        }
    }
}

fn load_policy(path: &Path, tau: Option<f64>) -> Result<GuardrailPolicy> {
    let policy = formats::policy_from_json(&read_text(path)?)?;
    Ok(match tau {
        Some(t) => policy.with_tau(t)?,
        None => policy,
    })
}

fn default_grid() -> Vec<f64> {
    (0..=40).map(|i| -1.0 + 0.05 * i as f64).collect()
}

fn guardrail_cmd(cmd: GuardrailCmd, piped: Option<Vec<u8>>) -> Result<(String, Option<PathBuf>)> {
    match cmd {
        GuardrailCmd::Build {
            attractors,
            tau,
            request_ids,
            template,
            out,
        } => {
            if request_ids.len() != 1 && request_ids.len() != attractors.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} request ids for {} attractors",
                    request_ids.len(),
                    attractors.len()
                ))
                .into());
            }
            let mut layer = None;
            let mut entries = Vec::with_capacity(attractors.len());
            for (i, path) in attractors.iter().enumerate() {
                let a = formats::attractor_from_json(&read_text(path)?)?;
                match layer {
                    None => layer = Some(a.layer),
                    Some(l) if l != a.layer => {
                        return Err(Error::LayerMismatch {
                            expected: l,
                            found: a.layer,
                        }
                        .into())
                    }
                    Some(_) => {}
                }
                let id = &request_ids[if request_ids.len() == 1 { 0 } else { i }];
                entries.push(PolicyEntry::from_attractor(&a, id.clone(), template.clone()));
            }
            let policy = GuardrailPolicy::new(layer.expect("at least one attractor"), tau, entries)?;
            Ok((formats::policy_to_json(&policy), out.out))
        }
        GuardrailCmd::Check {
            policy,
            input,
            tau,
            out,
        } => {
            let policy = load_policy(&policy, tau)?;
            let raw = vector_input(input.as_deref(), piped)?;
            let hidden = formats::parse_vector(&raw, "hidden state")?;
            let h: Vec<f64> = hidden.iter().map(|&v| f64::from(v)).collect();
            if h.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteInput("hidden state").into());
            }
            let decision = check(&h, &policy)?;
            Ok((formats::decision_to_json(&decision), out.out))
        }
        GuardrailCmd::Cutoff {
            input,
            policy,
            tau,
            out,
        } => {
            let policy = load_policy(&policy, tau)?;
            let set = load_set(&input.input)?;
            let rate = cutoff_rate(&set, &policy)?;
            Ok((formats::cutoff_to_json(&policy, set.num_prompts(), rate), out.out))
        }
        GuardrailCmd::Sweep {
            input,
            retain,
            policy,
            grid,
            out,
            format,
        } => {
            let policy = load_policy(&policy, None)?;
            let forget = load_set(&input.input)?;
            let retain = load_set(&retain)?;
            let curve = sweep_tau(&forget, &retain, &policy, &grid.unwrap_or_else(default_grid))?;
            let text = pick(
                format,
                || formats::sweep_to_json(&curve),
                || formats::sweep_to_csv(&curve),
            );
            Ok((text, out.out))
        }
    }
}

fn steer_cmd(cmd: SteerCmd, piped: Option<Vec<u8>>) -> Result<(String, Option<PathBuf>)> {
    let load = |p: &Path| -> Result<_> { formats::attractor_from_json(&read_text(p)?) };
    match cmd {
        SteerCmd::Add(s) => {
            let spec = build_add_spec(&load(&s.input.input)?, s.lambda, s.apply_at.map(Into::into))?;
            Ok((formats::spec_to_json(&spec), s.out.out))
        }
        SteerCmd::Drift(s) => {
            let spec = build_drift_spec(&load(&s.input.input)?, s.lambda, s.apply_at.map(Into::into))?;
            Ok((formats::spec_to_json(&spec), s.out.out))
        }
        SteerCmd::Switch {
            source,
            target,
            lambda,
            apply_at,
            out,
        } => {
            let mut spec = build_switch_spec(&load(&source)?, &load(&target)?, lambda)?;
            if let Some(a) = apply_at {
                spec.apply_at = a.into();
            }
            Ok((formats::spec_to_json(&spec), out.out))
        }
        SteerCmd::Reinforce { layer, lambda, out } => {
            Ok((formats::spec_to_json(&build_reinforce_spec(layer, lambda)?), out.out))
        }
        SteerCmd::Perturb { input, rho, seed, out } => {
            let p = perturb_attractor(&load(&input.input)?, rho, seed)?;
            Ok((formats::perturbed_to_json(&p), out.out))
        }
        SteerCmd::Apply {
            spec,
            input,
            anchor,
            out,
        } => {
            let spec = formats::spec_from_json(&read_text(&spec)?)?;
            let hidden = formats::parse_vector(&vector_input(input.as_deref(), piped)?, "hidden state")?;
            let anchor = match anchor {
                Some(p) => Some(formats::parse_vector(&crate::io::read_file(&p)?, "anchor")?),
                None => None,
            };
            if hidden.iter().chain(anchor.iter().flatten()).any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteInput("hidden state").into());
            }
            let steered = apply_spec(&spec, &hidden, anchor.as_deref())?;
            Ok((formats::vector_to_json(&steered), out.out))
        }
    }
}

fn ifs_cmd(cmd: IfsCmd) -> Result<(String, Option<PathBuf>)> {
    match cmd {
        IfsCmd::Fit {
            input,
            concept,
            layer,
            k_max,
            epsilon,
            seed: _,
            out,
        } => {
            let set = load_set(&input.input)?;
            let initial = set.slice(ConceptFilter::Concept(&concept), set.first_layer())?;
            let target = set.slice(ConceptFilter::Concept(&concept), layer)?;
            let fit = parallel::fit_affine_ifs(&initial, &target, FitOptions { k_max, epsilon })?;
            Ok((formats::fit_to_json(&concept, layer, &fit), out.out))
        }
        IfsCmd::Collage { map, points, out } => {
            let model = formats::model_from_json(&read_text(&map)?)?;
            let pts = formats::points_from_json(&read_text(&points)?)?;
            let errors = model
                .maps()
                .iter()
                .map(|m| collage_error(&pts, m))
                .collect::<attractor_core::Result<Vec<_>>>()?;
            Ok((to_json(&json!({"collage_errors": errors})), out.out))
        }
        IfsCmd::Simulate {
            map,
            points,
            iters,
            mode,
            seed,
            out,
            format,
        } => {
            let model = formats::model_from_json(&read_text(&map)?)?;
            let s0 = formats::points_from_json(&read_text(&points)?)?;
            let (sim_mode, name) = match mode {
                ModeArg::Full => (SimulationMode::Full, "full"),
                ModeArg::ChaosGame => {
                    let seed = seed.ok_or_else(|| Error::InvalidArgument("chaos_game requires --seed".into()))?;
                    (SimulationMode::ChaosGame { seed }, "chaos_game")
                }
            };
            let sets = simulate_ifs(&model, &s0, iters, sim_mode)?;
            let used_seed = matches!(mode, ModeArg::ChaosGame).then_some(seed).flatten();
            let text = pick(
                format,
                || formats::trajectory_to_json(name, used_seed, &sets),
                || formats::trajectory_to_csv(&sets),
            );
            Ok((text, out.out))
        }
        IfsCmd::FixedPoint { map, out } => {
            let model = formats::model_from_json(&read_text(&map)?)?;
            let points = model
                .maps()
                .iter()
                .map(fixed_point)
                .collect::<attractor_core::Result<Vec<_>>>()?;
            Ok((to_json(&json!({"fixed_points": points})), out.out))
        }
    }
}
