//! Convergence experiments.
//!
//! Each experiment evaluates a parameter grid, records every value it
//! computed, and turns the limit statement it probes into recorded numeric
//! criteria (strict monotone trends along a 3-point grid, or thresholds).
//! Formula-based experiments are deterministic; Monte Carlo ones draw every
//! path from its own `(seed, role, index)` stream and use common random
//! numbers across grid points.

use serde::Serialize;
use serde_json::{json, Value};
use skewwalk_core::quadrature::QuadratureSpec;

use crate::config::ExperimentConfig;
use crate::parallel::Pool;
use crate::report::{ExperimentReport, ReportBuilder};
use crate::Result;

mod analytic;
mod simulation;

pub use analytic::{
    hitting_bound, hitting_transform_convergence, integrand_convergence, potter_bound, skew_ratio_limit,
    tail_functional_limit,
};
pub use simulation::{
    inverse_subordinator_limit, local_time_scaling, part_b_vanishing_perturbation, path_decomposition,
    poisson_hitting_mc, poissonization_equivalence, resolvent_identities,
};

/// What every experiment needs besides its own parameters.
#[derive(Debug)]
pub struct Context<'a> {
    pub pool: &'a Pool,
    pub seed: u64,
    pub spec: QuadratureSpec,
    /// Resolved run configuration, embedded in every report.
    pub run: Value,
}

impl<'a> Context<'a> {
    pub fn new(pool: &'a Pool, seed: u64, spec: QuadratureSpec) -> Self {
        Self {
            pool,
            seed,
            spec,
            run: json!({ "seed": seed, "tolerances": spec_json(&spec) }),
        }
    }

    pub fn with_run(mut self, run: Value) -> Self {
        self.run = run;
        self
    }

    pub(crate) fn builder<P: Serialize>(&self, id: &str, params: &P) -> ReportBuilder {
        let mut b = ReportBuilder::new(id, &json!({ "run": self.run, "experiment": params }));
        b.seed(self.seed);
        b
    }

    /// An independent seed for sub-sample `tag` of this run.
    pub(crate) fn sub_seed(&self, tag: u64) -> u64 {
        splitmix(self.seed ^ splitmix(tag))
    }
}

fn spec_json(s: &QuadratureSpec) -> Value {
    json!({ "abs_tol": s.abs_tol, "rel_tol": s.rel_tol, "max_subdivisions": s.max_subdivisions })
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run(exp: &ExperimentConfig, ctx: &Context<'_>) -> Result<ExperimentReport> {
    use ExperimentConfig::*;
    match exp {
        HittingTransformConvergence(p) => hitting_transform_convergence(p, ctx),
        IntegrandConvergence(p) => integrand_convergence(p, ctx),
        PotterBound(p) => potter_bound(p, ctx),
        LocalTimeScaling(p) => local_time_scaling(p, ctx),
        InverseSubordinatorLimit(p) => inverse_subordinator_limit(p, ctx),
        PartBVanishingPerturbation(p) => part_b_vanishing_perturbation(p, ctx),
        SkewRatioLimit(p) => skew_ratio_limit(p, ctx),
        PoissonizationEquivalence(p) => poissonization_equivalence(p, ctx),
        HittingBound(p) => hitting_bound(p, ctx),
        TailFunctional(p) => tail_functional_limit(p, ctx),
        PoissonHittingMc(p) => poisson_hitting_mc(p, ctx),
        ResolventIdentities(p) => resolvent_identities(p, ctx),
        PathDecomposition(p) => path_decomposition(p, ctx),
    }
}

/// Sort ascending and drop duplicates; grids are evaluated in this order.
pub(crate) fn sorted<T: Copy + PartialOrd>(xs: &[T]) -> Vec<T> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("grid values are comparable"));
    v.dedup_by(|a, b| a == b);
    v
}
