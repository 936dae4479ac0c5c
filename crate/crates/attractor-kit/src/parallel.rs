//! Multi-threaded drivers for the independent loops of the analysis.
//!
//! Work items are reduced in their original order, so results never depend
//! on scheduling or on the number of threads.

use attractor_core::attractor::{layer_separation, SeparationProfile};
use attractor_core::ifs::{fit_candidate, select_fit, FitOptions, FitResult};
use attractor_core::{ActivationSet, Error, Matrix};
use rayon::prelude::*;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "ATTRACTOR_KIT_THREADS";

/// Pool sized by `ATTRACTOR_KIT_THREADS`, or by the machine when unset.
pub fn thread_pool() -> Result<rayon::ThreadPool, Error> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize =
            raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
                Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got `{raw}`"))
            })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker threads: {e}")))
}

/// Same result as [`attractor_core::attractor::separation_profile`], one
/// layer per task.
pub fn separation_profile(set: &ActivationSet) -> Result<SeparationProfile, Error> {
    let n = set.concepts().len();
    if n < 2 {
        return Err(Error::NeedTwoConcepts(n));
    }
    let records: Vec<_> = set
        .layer_indices()
        .par_iter()
        .map(|&l| layer_separation(set, l))
        .collect();
    let records = records.into_iter().collect::<Result<Vec<_>, _>>()?;
    SeparationProfile::from_records(records, n)
}

/// Same result as [`attractor_core::ifs::fit_affine_ifs`], one candidate
/// iteration count per task.
pub fn fit_affine_ifs(initial: &Matrix, target: &Matrix, opts: FitOptions) -> Result<FitResult, Error> {
    if opts.k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let candidates: Vec<_> = (1..=opts.k_max)
        .into_par_iter()
        .map(|k| fit_candidate(initial, target, k, opts.epsilon))
        .collect();
    select_fit(candidates.into_iter().collect::<Result<Vec<_>, _>>()?)
}
