//! Experiments evaluated by quadrature only.

use skewwalk_core::distributions::{LatticeStableLaw, PerturbationLaw};
use skewwalk_core::quadrature::{geometric_points, TransformResult};
use skewwalk_core::resolvent::{
    eta_star_integral, hitting_bound_constant, indicator_outside, power_cap, tail_functional, ContinuousResolvent,
    DiscreteResolvent, EtaStarMeasure, Observable,
};
use skewwalk_core::transforms::{integrand_split, IntegrandSplit, ScaledHitting, StableResolvent};

use super::{sorted, Context};
use crate::config::{
    EtaConfig, HittingBoundParams, HittingTransformParams, IntegrandParams, ObservableConfig, PotterParams,
    SkewRatioParams, TailFunctionalParams,
};
use crate::params;
use crate::report::{ExperimentReport, Verdict};
use crate::Result;

fn ok(r: &skewwalk_core::Result<TransformResult>) -> (Option<f64>, Option<f64>) {
    match r {
        Ok(t) => (Some(t.value), Some(t.err_estimate)),
        Err(_) => (None, None),
    }
}

/// Largest `|E_{⌊xa⌋}e^{-(λ/v)σ} - E_{⌊xa⌋/a}e^{-λσ(U_α)}|` over `x_grid`, per `v`.
pub fn hitting_transform_convergence(p: &HittingTransformParams, ctx: &Context<'_>) -> Result<ExperimentReport> {
    let mut b = ctx.builder("hitting_transform_convergence", p);
    let law = LatticeStableLaw::new(p.alpha)?;
    let stable = StableResolvent::new(p.alpha, p.lambda, ctx.spec)?;
    let v_grid = sorted(&p.v_grid);
    let rows = ctx.pool.map_items(&v_grid, |&v| -> Vec<(f64, Option<(f64, f64)>)> {
        let Ok(hit) = ScaledHitting::new(&law, p.lambda, v, ctx.spec) else {
            return p.x_grid.iter().map(|&x| (x, None)).collect();
        };
        let a = hit.norming();
        p.x_grid
            .iter()
            .map(|&x| {
                let k = hit.start(x);
                let pair = hit.value_at_lattice(k).and_then(|d| {
                    let c = stable.hit_laplace(k as f64 / a)?;
                    Ok(((d.value - c.value).abs(), d.err_estimate + c.err_estimate))
                });
                (x, pair.ok())
            })
            .collect()
    });
    let mut sups = Vec::new();
    let mut at_zero: f64 = 0.0;
    for (&v, row) in v_grid.iter().zip(&rows) {
        let mut sup = Some(0.0f64);
        let mut sup_err = 0.0f64;
        for &(x, e) in row {
            b.point(params![("v", v), ("x", x)], e.map(|e| e.0), e.map(|e| e.1));
            match (e, sup) {
                (Some((d, err)), Some(s)) => {
                    sup = Some(s.max(d));
                    sup_err = sup_err.max(err);
                }
                _ => sup = None,
            }
            if x == 0.0 {
                at_zero = at_zero.max(e.map_or(f64::NAN, |e| e.0));
            }
        }
        b.point(params![("v", v), ("x", "sup")], sup, Some(sup_err));
        sups.push(sup);
    }
    b.strictly_decreasing("sup_error_decreasing", &sups, "sup-error");
    b.criterion(
        "sup_error_final",
        sups.last().copied().flatten(),
        Some(p.final_threshold),
        match sups.last().copied().flatten() {
            Some(s) => Verdict::from_bool(s < p.final_threshold),
            None => Verdict::Inconclusive,
        },
        format!("sup-error at the largest v must be < {}", p.final_threshold),
    );
    if p.x_grid.contains(&0.0) {
        b.criterion(
            "error_at_zero_exact",
            Some(at_zero),
            Some(0.0),
            Verdict::from_bool(at_zero == 0.0),
            "both transforms equal 1 at x = 0, so the error must be exactly 0",
        );
    }
    Ok(b.finish())
}

/// The four pieces `I, J, K, M` of the gap between the discrete and the
/// continuous `θ`-integrals.
pub fn integrand_convergence(p: &IntegrandParams, ctx: &Context<'_>) -> Result<ExperimentReport> {
    let mut b = ctx.builder("integrand_convergence", p);
    let law = LatticeStableLaw::new(p.alpha)?;
    let v_grid = sorted(&p.v_grid);
    let cut_grid = sorted(&p.cut_grid);
    let hits: Vec<_> = ctx
        .pool
        .map_items(&v_grid, |&v| ScaledHitting::new(&law, p.lambda, v, ctx.spec))
        .into_iter()
        .collect::<skewwalk_core::Result<_>>()?;
    let splits = ctx.pool.map_items(&hits, |h| integrand_split(h, p.cut, p.eps).ok());
    let (mut is, mut ms, mut gaps) = (Vec::new(), Vec::new(), Vec::new());
    for (&v, s) in v_grid.iter().zip(&splits) {
        let get = |f: fn(&IntegrandSplit) -> TransformResult| s.as_ref().map(f);
        for (name, r) in [
            ("I", get(|s| s.i)),
            ("M", get(|s| s.m)),
            ("J", get(|s| s.j)),
            ("discrete", get(|s| s.discrete)),
            ("continuous", get(|s| s.continuous)),
        ] {
            b.point(params![("piece", name), ("v", v), ("cut", p.cut)], r.map(|r| r.value), r.map(|r| r.err_estimate));
        }
        is.push(get(|s| s.i).map(|r| r.value));
        ms.push(get(|s| s.m).map(|r| r.value));
        let gap = s.as_ref().map(|s| (s.discrete.value - s.continuous.value).abs());
        b.point(params![("piece", "gap"), ("v", v)], gap, None);
        gaps.push(gap);
    }
    let last = hits.last().expect("v_grid is nonempty");
    let by_cut = ctx.pool.map_items(&cut_grid, |&c| integrand_split(last, c, p.eps).ok());
    let (mut js, mut ks) = (Vec::new(), Vec::new());
    for (&c, s) in cut_grid.iter().zip(&by_cut) {
        let j = s.as_ref().map(|s| s.j);
        let k = s.as_ref().map(|s| s.k);
        let v = last.v();
        b.point(params![("piece", "J"), ("v", v), ("cut", c)], j.map(|r| r.value), j.map(|r| r.err_estimate));
        b.point(params![("piece", "K"), ("cut", c)], k.map(|r| r.value), k.map(|r| r.err_estimate));
        js.push(j.map(|r| r.value));
        ks.push(k.map(|r| r.value));
    }
    b.strictly_decreasing("I_decreasing_in_v", &is, "I(v, A)");
    b.strictly_decreasing("M_decreasing_in_v", &ms, "M(v)");
    b.strictly_decreasing("J_decreasing_in_A", &js, "J(v_max, A)");
    b.strictly_decreasing("K_decreasing_in_A", &ks, "K(A)");
    b.strictly_decreasing("gap_decreasing_in_v", &gaps, "|discrete - continuous|");
    let k_first = ks.first().copied().flatten();
    let bound = IntegrandSplit::k_bound(p.alpha, cut_grid[0]);
    b.at_most("K_below_power_bound", k_first, bound, &format!("K({}) vs 2A^(1-α)/(α-1)", cut_grid[0]));
    Ok(b.finish())
}

/// Smallest ratio `v(1-ψ(θ/a))/(|θ|^{α+δ} ∧ |θ|^{α-δ})` over `0 < |θ| ≤ εa`.
pub fn potter_bound(p: &PotterParams, ctx: &Context<'_>) -> Result<ExperimentReport> {
    let mut b = ctx.builder("potter_bound", p);
    let law = LatticeStableLaw::new(p.alpha)?;
    let v_grid = sorted(&p.v_grid);
    let rows = ctx.pool.map_items(&v_grid, |&v| -> skewwalk_core::Result<(f64, f64, f64)> {
        let a = law.norming_a(v)?;
        let hi = p.eps * a;
        let decades = (hi / p.theta_min).log10().max(1.0);
        let n = (decades * p.points_per_decade as f64).ceil() as usize + 1;
        let ratio = |t: f64| v * law.one_minus_psi(t / a) / (t.powf(p.alpha + p.delta)).min(t.powf(p.alpha - p.delta));
        let (mut c, mut at) = (f64::INFINITY, 0.0);
        for t in geometric_points(p.theta_min, hi, n).into_iter().chain([1.0]) {
            if t > hi {
                continue;
            }
            let r = ratio(t);
            if r < c {
                c = r;
                at = t;
            }
        }
        Ok((c, at, ratio(1.0)))
    });
    let mut c_all: Option<f64> = Some(f64::INFINITY);
    let mut dev1 = Vec::new();
    for (&v, r) in v_grid.iter().zip(&rows) {
        match r {
            Ok((c, at, r1)) => {
                b.point(params![("v", v), ("quantity", "min_ratio"), ("theta_at_min", *at)], Some(*c), None);
                b.point(params![("v", v), ("quantity", "ratio_at_theta_1")], Some(*r1), None);
                c_all = c_all.map(|m| m.min(*c));
                dev1.push(Some((r1 - 1.0).abs()));
            }
            Err(_) => {
                c_all = None;
                dev1.push(None);
            }
        }
    }
    let c_fit = c_all.map(|c| c.min(1.0));
    b.at_least("fitted_c", c_fit, p.c_threshold, &format!("largest c ≤ 1 valid with ε = {}", p.eps));
    b.strictly_decreasing("ratio_at_one_tends_to_one", &dev1, "|ratio(θ=1) - 1|");
    Ok(b.finish())
}

/// The constant `c₂` in `1 - E_{⌊xa⌋}e^{-(λ/v)σ} ≤ c₂|x|^{α-1-δ}`, fitted
/// per `v`.
pub fn hitting_bound(p: &HittingBoundParams, ctx: &Context<'_>) -> Result<ExperimentReport> {
    let mut b = ctx.builder("hitting_bound", p);
    let law = LatticeStableLaw::new(p.alpha)?;
    let v_grid = sorted(&p.v_grid);
    let cs = ctx.pool.map_items(&v_grid, |&v| {
        ScaledHitting::new(&law, p.lambda, v, ctx.spec)
            .and_then(|h| hitting_bound_constant(&h, p.delta, &p.x_grid))
            .ok()
    });
    for (&v, c) in v_grid.iter().zip(&cs) {
        b.point(params![("v", v), ("quantity", "c2")], *c, None);
    }
    let spread = match cs.iter().copied().collect::<Option<Vec<f64>>>() {
        Some(cs) => {
            let reference = *cs.last().expect("v_grid is nonempty");
            Some(cs.iter().map(|c| (c / reference - 1.0).abs()).fold(0.0, f64::max))
        }
        None => None,
    };
    b.at_most("c2_stable", spread, p.stability, "max_v |c₂(v)/c₂(v_max) - 1|");
    let finite = cs.iter().all(|c| c.is_some_and(|c| c.is_finite() && c > 0.0));
    b.criterion(
        "c2_finite",
        cs.iter().flatten().copied().reduce(f64::max),
        None,
        Verdict::from_bool(finite),
        "c₂(v) must be finite and positive at every v",
    );
    Ok(b.finish())
}

/// `E g(η/u)/(β P{|η|>u})` against `∫g dη*` for the indicator of `|x| > 1`
/// and the capped power `|x|^{β+γ} ∧ 1`.
pub fn tail_functional_limit(p: &TailFunctionalParams, ctx: &Context<'_>) -> Result<ExperimentReport> {
    let mut b = ctx.builder("tail_functional", p);
    let eta = p.eta.law()?;
    let beta = eta.beta().ok_or(skewwalk_core::Error::Unsupported("the tail functional needs a heavy-tailed η"))?;
    let measure = EtaStarMeasure::for_law(&eta)?;
    let u_grid = sorted(&p.u_grid);
    let ind = indicator_outside(1.0);
    let cap = power_cap(beta, p.gamma);
    let t_ind = eta_star_integral(&ind, &measure, &ctx.spec)?;
    let t_cap = eta_star_integral(&cap, &measure, &ctx.spec)?;
    let pieces = ctx.pool.map_items(&u_grid, |&u| {
        let i = tail_functional(&ind, &eta, &[u], &ctx.spec).ok().map(|v| v[0]);
        let c = tail_functional(&cap, &eta, &[u], &ctx.spec).ok().map(|v| v[0]);
        (i, c)
    });
    b.point(params![("g", "indicator"), ("u", "limit")], Some(t_ind.value), Some(t_ind.err_estimate));
    b.point(params![("g", "power_cap"), ("u", "limit")], Some(t_cap.value), Some(t_cap.err_estimate));
    let (mut e_ind, mut e_cap) = (Vec::new(), Vec::new());
    for (&u, (i, c)) in u_grid.iter().zip(&pieces) {
        b.point(params![("g", "indicator"), ("u", u)], i.map(|r| r.value), i.map(|r| r.err_estimate));
        b.point(params![("g", "power_cap"), ("u", u)], c.map(|r| r.value), c.map(|r| r.err_estimate));
        e_ind.push(i.map(|r| (r.value / t_ind.value - 1.0).abs()));
        e_cap.push(c.map(|r| (r.value - t_cap.value).abs()));
    }
    b.at_most(
        "indicator_relative_error",
        e_ind.last().copied().flatten(),
        p.indicator_tolerance,
        "relative error at the largest u",
    );
    b.strictly_decreasing("power_cap_error_decreasing", &e_cap, "|E g(η/u)/(βP{|η|>u}) - ∫g dη*|");
    Ok(b.finish())
}

fn heavy(eta: &EtaConfig) -> Result<(PerturbationLaw, EtaStarMeasure)> {
    let law = eta.law()?;
    let m = EtaStarMeasure::for_law(&law)?;
    Ok((law, m))
}

/// `E V̂f(η/a) / E V̂1(η/a)` against the skew-process resolvent
/// `∫Vf dη* / ∫V1 dη*`, per `f` and `v`.
pub fn skew_ratio_limit(p: &SkewRatioParams, ctx: &Context<'_>) -> Result<ExperimentReport> {
    let mut b = ctx.builder("skew_ratio_limit", p);
    let law = LatticeStableLaw::new(p.alpha)?;
    let (eta, measure) = heavy(&p.eta)?;
    let cont = ContinuousResolvent::new(p.alpha, p.lambda, ctx.spec)?;
    let v_grid = sorted(&p.v_grid);
    let fs: Vec<(ObservableConfig, Observable)> = p
        .f_set
        .iter()
        .map(|c| c.observable().map(|o| (*c, o)))
        .collect::<Result<_>>()?;
    let targets = ctx.pool.map_items(&fs, |(_, f)| cont.skew_at_zero(f, &measure));
    let cells: Vec<(usize, f64)> = (0..fs.len()).flat_map(|i| v_grid.iter().map(move |&v| (i, v))).collect();
    let ratios = ctx.pool.map_items(&cells, |&(i, v)| {
        DiscreteResolvent::new(&law, p.lambda, v, ctx.spec).and_then(|d| d.skew_ratio(&fs[i].1, &eta))
    });
    for (i, (fc, _)) in fs.iter().enumerate() {
        let label = fc.label();
        let t = &targets[i];
        let (tv, te) = ok(t);
        b.point(params![("f", label.clone()), ("v", "limit")], tv, te);
        let mut disc = Vec::new();
        for (j, &v) in v_grid.iter().enumerate() {
            let r = &ratios[i * v_grid.len() + j];
            let (rv, re) = ok(r);
            b.point(params![("f", label.clone()), ("v", v), ("quantity", "ratio")], rv, re);
            let d = match (rv, tv) {
                (Some(r), Some(t)) => Some((r - t).abs()),
                _ => None,
            };
            b.point(params![("f", label.clone()), ("v", v), ("quantity", "discrepancy")], d, None);
            disc.push(d);
        }
        b.strictly_decreasing(format!("discrepancy_decreasing[{label}]"), &disc, "|discrete ratio - limit|");
    }
    // f ≡ 1 is exact on both sides
    let mut worst: f64 = 0.0;
    for &v in &v_grid {
        let d = DiscreteResolvent::new(&law, p.lambda, v, ctx.spec)?;
        worst = worst.max((d.skew_ratio(&Observable::One, &eta)?.value - 1.0).abs());
    }
    worst = worst.max((cont.skew_at_zero(&Observable::One, &measure)?.value - 1.0).abs());
    b.criterion(
        "constant_f_exact",
        Some(worst),
        Some(0.0),
        Verdict::from_bool(worst == 0.0),
        "f ≡ 1 must give exactly 1 on both sides at every v",
    );
    // symmetric η against |η| for an even f
    if eta.c_plus() == eta.c_minus() {
        if let Some(beta) = eta.beta() {
            let even = Observable::Gaussian { center: 0.0, width: 1.0 };
            let abs_eta = EtaConfig::OneSided { beta }.law()?;
            let d = DiscreteResolvent::new(&law, p.lambda, v_grid[0], ctx.spec)?;
            let r1 = d.skew_ratio(&even, &eta)?;
            let r2 = d.skew_ratio(&even, &abs_eta)?;
            let tol = 10.0 * (r1.err_estimate + r2.err_estimate) + 1e-9;
            b.at_most("symmetric_eta_matches_abs_eta", Some((r1.value - r2.value).abs()), tol, "|ratio(η) - ratio(|η|)| for even f");
        }
    }
    Ok(b.finish())
}
