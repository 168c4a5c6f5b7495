use super::config::{ExperimentConfig, ExperimentKind};
use super::details::*;
use super::report::{Precondition, Report, SumsetCsvRow, TableRow};
use crate::convolve::{convolve_with, ConvolveOptions};
use crate::dimension::{
    box_estimate_from_sets, estimate_from_measures, linf_exponent, lq_exponent, QOrder, ScaleValue,
};
use crate::error::{Error, Result};
use crate::generators::{
    central_cantor_ahlfors_constant, generate, generate_levels, generate_set, AhlforsExample,
    MeasureSpec,
};
use crate::measure::DyadicMeasure;
use crate::numeric::ls_slope;
use crate::regularity::{
    check_dyadic_porosity, fit_porosity, fit_uniform_perfectness, regularity_report, UpPair,
};
use crate::sumsets::{interval_detect, nfold_sumset_experiment, sumset_with, SumsetMode};
use crate::uniformity::{is_uniform, retention_bound, saturation_check, uniformize};

/// Uniform perfectness is fitted no finer than this; the fit is quadratic-ish in
/// the atom count and coarser levels already show the ratio structure.
pub const UP_FIT_LEVEL_CAP: u32 = 16;

/// Tolerance for monotonicity of repeated-convolution exponents.
pub const MONOTONE_TOL: f64 = 1e-6;

/// Slack of the two-fold stall reading: proxy ≤ α + this.
pub const STALL_SLACK: f64 = 0.05;

fn need<'a>(
    spec: &'a Option<MeasureSpec>,
    name: &str,
    kind: ExperimentKind,
) -> Result<&'a MeasureSpec> {
    spec.as_ref()
        .ok_or_else(|| Error::InvalidConfig(format!("{kind} needs `{name}`")))
}

fn conv_opts(cfg: &ExperimentConfig) -> ConvolveOptions {
    ConvolveOptions::with_max_work(cfg.max_work())
}

fn fit_up(mu: &DyadicMeasure, cfg: &ExperimentConfig) -> Result<(Option<UpPair>, u32)> {
    let level = mu.level().min(UP_FIT_LEVEL_CAP);
    let coarse = mu.discretize(level)?;
    let pair =
        fit_uniform_perfectness(&coarse, &cfg.regularity.n_grid, &cfg.regularity.gamma_grid)?
            .map(|(n, gamma)| UpPair { n, gamma });
    Ok((pair, level))
}

fn diameter_check(mu: &DyadicMeasure, a: f64, name: &str) -> Precondition {
    let d = mu.diameter();
    Precondition::new(
        &format!("{name}_nondegenerate"),
        d > 0.0 && d >= a,
        format!("support diameter {d} (need > 0 and ≥ a = {a})"),
    )
}

/// Rows and series for μ (n = 1) against μ∗ν (n = 2) at every level and q.
fn convolution_series(
    report: &mut Report,
    cfg: &ExperimentConfig,
    mus: &[DyadicMeasure],
    nus: &[DyadicMeasure],
) -> Result<Vec<ConvolutionSeries>> {
    let opts = conv_opts(cfg);
    let convs = mus
        .iter()
        .zip(nus)
        .map(|(a, b)| convolve_with(a, b, &opts))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for &q in &cfg.q {
        let order = QOrder::Finite(q);
        let mu = estimate_from_measures(mus, order, cfg.window)?;
        let nu = estimate_from_measures(nus, order, cfg.window)?;
        let conv = estimate_from_measures(&convs, order, cfg.window)?;
        let improvement: Vec<ScaleValue> = mu
            .per_scale
            .iter()
            .zip(&conv.per_scale)
            .map(|(a, b)| ScaleValue {
                m: a.m,
                value: b.value - a.value,
            })
            .collect();
        for (a, b) in mu.per_scale.iter().zip(&conv.per_scale) {
            report.rows.push(TableRow {
                experiment: report.experiment,
                n: 1,
                m: a.m,
                q: Some(order),
                exponent: a.value,
                improvement: None,
            });
            report.rows.push(TableRow {
                experiment: report.experiment,
                n: 2,
                m: b.m,
                q: Some(order),
                exponent: b.value,
                improvement: Some(b.value - a.value),
            });
        }
        let improvement_top = improvement.last().map_or(0.0, |s| s.value);
        out.push(ConvolutionSeries {
            q: order,
            mu,
            nu,
            conv,
            improvement,
            improvement_top,
        });
    }
    Ok(out)
}

pub fn run_improvement(cfg: &ExperimentConfig) -> Result<Report> {
    let kind = ExperimentKind::Improvement;
    let mut report = Report::new(kind, cfg);
    let mu_spec = need(&cfg.mu, "mu", kind)?;
    let nu_spec = cfg.nu.as_ref().unwrap_or(mu_spec);
    let levels = cfg.resolved_levels(kind);
    let top = *levels.last().unwrap();
    let nus = generate_levels(nu_spec, &levels)?;
    let nu_top = nus.last().unwrap();
    let degenerate = diameter_check(nu_top, cfg.a, "nu");
    if !degenerate.met {
        // no computation: a point mass or too-small ν cannot improve anything
        report.require(degenerate);
        return Ok(report);
    }
    report.require(degenerate);
    let (up, up_level) = fit_up(nu_top, cfg)?;
    report.require(Precondition::new(
        "nu_uniformly_perfect",
        up.is_some(),
        match up {
            Some(p) => format!("(N, γ) = ({}, {}) at level {up_level}", p.n, p.gamma),
            None => format!("no (N, γ) on the grid passes at level {up_level}"),
        },
    ));
    let mus = generate_levels(mu_spec, &levels)?;
    for &q in &cfg.q {
        let e = lq_exponent(mus.last().unwrap(), q)?;
        report.require(Precondition::new(
            "eta",
            e <= 1.0 - cfg.eta,
            format!(
                "exponent(mu, q={q}) at level {top} is {e:.6}, need ≤ 1 − η = {}",
                1.0 - cfg.eta
            ),
        ));
    }
    let series = convolution_series(&mut report, cfg, &mus, &nus)?;
    report.details = Some(Details::Improvement(ImprovementDetails {
        nu_uniform_perfect: up,
        up_level,
        series,
        improvement_claimed: report.is_ok(),
    }));
    Ok(report)
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2)
        .all(|w| w[1] - w[0] > MONOTONE_TOL || w[0] >= 1.0 - MONOTONE_TOL)
}

fn nondecreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] - w[0] >= -MONOTONE_TOL)
}

pub fn run_repeated(cfg: &ExperimentConfig) -> Result<Report> {
    let kind = ExperimentKind::Repeated;
    let mut report = Report::new(kind, cfg);
    let factors: Vec<MeasureSpec> = if cfg.measures.is_empty() {
        let mu = need(&cfg.mu, "mu` or `measures", kind)?;
        vec![mu.clone(); cfg.n_max.unwrap_or(4)]
    } else {
        let n = cfg
            .n_max
            .unwrap_or(cfg.measures.len())
            .min(cfg.measures.len());
        cfg.measures[..n].to_vec()
    };
    let n_max = factors.len();
    let levels = cfg.resolved_levels(kind);
    let top = *levels.last().unwrap();
    // distinct specs only need generating once
    let mut generated: Vec<(MeasureSpec, Vec<DyadicMeasure>)> = Vec::new();
    for f in &factors {
        if !generated.iter().any(|(s, _)| s == f) {
            generated.push((f.clone(), generate_levels(f, &levels)?));
        }
    }
    let series_of = |f: &MeasureSpec| -> &Vec<DyadicMeasure> {
        &generated.iter().find(|(s, _)| s == f).unwrap().1
    };
    let mut ups = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        let t = series_of(f).last().unwrap();
        let d = diameter_check(t, cfg.a, &format!("factor{}", i + 1));
        if !d.met {
            report.require(d);
            return Ok(report);
        }
        let (up, lvl) = fit_up(t, cfg)?;
        report.require(Precondition::new(
            &format!("factor{}_uniformly_perfect", i + 1),
            up.is_some(),
            match up {
                Some(p) => format!("(N, γ) = ({}, {}) at level {lvl}", p.n, p.gamma),
                None => format!("no (N, γ) on the grid passes at level {lvl}"),
            },
        ));
        ups.push(up);
    }
    let opts = conv_opts(cfg);
    // powers[n-1][level index]
    let mut powers: Vec<Vec<DyadicMeasure>> = vec![series_of(&factors[0]).clone()];
    for f in &factors[1..] {
        let prev = powers.last().unwrap();
        let next = prev
            .iter()
            .zip(series_of(f))
            .map(|(a, b)| convolve_with(a, b, &opts))
            .collect::<Result<Vec<_>>>()?;
        powers.push(next);
    }
    let mut series = Vec::new();
    for &q in &cfg.q {
        let order = QOrder::Finite(q);
        let mut prev: Option<Vec<f64>> = None;
        let mut top_seq = Vec::new();
        let mut slopes = Vec::new();
        for (n, p) in powers.iter().enumerate() {
            slopes.push(estimate_from_measures(p, order, cfg.window)?.slope_estimate);
            let vals = p
                .iter()
                .map(|mu| lq_exponent(mu, q))
                .collect::<Result<Vec<_>>>()?;
            for (i, &m) in levels.iter().enumerate() {
                report.rows.push(TableRow {
                    experiment: kind,
                    n: n + 1,
                    m,
                    q: Some(order),
                    exponent: vals[i],
                    improvement: prev.as_ref().map(|pv| vals[i] - pv[i]),
                });
            }
            top_seq.push(*vals.last().unwrap());
            prev = Some(vals);
        }
        series.push(RepeatedSeries {
            q: order,
            strictly_increasing: strictly_increasing(&top_seq),
            nondecreasing: nondecreasing(&top_seq),
            exponents: top_seq,
            slopes,
        });
    }
    let frostman: Vec<f64> = powers
        .iter()
        .map(|p| linf_exponent(p.last().unwrap()))
        .collect();
    for (n, &v) in frostman.iter().enumerate() {
        report.rows.push(TableRow {
            experiment: kind,
            n: n + 1,
            m: top,
            q: Some(QOrder::Infinity),
            exponent: v,
            improvement: (n > 0).then(|| v - frostman[n - 1]),
        });
    }
    report.details = Some(Details::Repeated(RepeatedDetails {
        n_max,
        tolerance: MONOTONE_TOL,
        factors_uniform_perfect: ups,
        series,
        frostman,
    }));
    Ok(report)
}

pub fn run_porous_dual(cfg: &ExperimentConfig) -> Result<Report> {
    let kind = ExperimentKind::PorousDual;
    let mut report = Report::new(kind, cfg);
    let mu_spec = need(&cfg.mu, "mu", kind)?;
    let nu_spec = need(&cfg.nu, "nu", kind)?;
    let levels = cfg.resolved_levels(kind);
    let top = *levels.last().unwrap();
    let mus = generate_levels(mu_spec, &levels)?;
    let support = mus.last().unwrap().support();
    let porosity = if top < 2 {
        None
    } else {
        match cfg.porosity_k {
            Some(k) if k >= 1 && k < top => check_dyadic_porosity(&support, k)?.passed.then_some(k),
            Some(k) => {
                return Err(Error::InvalidConfig(format!(
                    "porosity_k = {k} must lie in 1..{top}"
                )))
            }
            None => fit_porosity(&support)?,
        }
    };
    report.require(Precondition::new(
        "mu_porous",
        porosity.is_some(),
        match (porosity, cfg.porosity_k) {
            (Some(k), _) => format!("support is dyadically {k}-porous at level {top}"),
            (None, Some(k)) => format!("support is not dyadically {k}-porous at level {top}"),
            (None, None) => format!("no porosity depth k < {top} works at level {top}"),
        },
    ));
    let nus = generate_levels(nu_spec, &levels)?;
    let nu_lp = lq_exponent(nus.last().unwrap(), cfg.p)?;
    report.require(Precondition::new(
        "nu_lp_exponent",
        nu_lp >= cfg.sigma,
        format!(
            "exponent(nu, p={}) at level {top} is {nu_lp:.6}, need ≥ σ = {}",
            cfg.p, cfg.sigma
        ),
    ));
    if !report.is_ok() {
        return Ok(report);
    }
    let series = convolution_series(&mut report, cfg, &mus, &nus)?;
    report.details = Some(Details::PorousDual(PorousDualDetails {
        porosity_k: porosity.unwrap(),
        nu_lp_exponent: nu_lp,
        series,
    }));
    Ok(report)
}

/// μ(B(0, r)) with the half-open ball [−r, r) in grid units.
fn ball_at_zero(mu: &DyadicMeasure, r: f64) -> f64 {
    let rc = (r / mu.cell_size()).floor() as i64;
    let idx = mu.indices();
    let lo = idx.partition_point(|&k| k < -rc);
    let hi = idx.partition_point(|&k| k < rc);
    crate::numeric::pairwise_sum(&mu.masses()[lo..hi])
}

pub fn run_infty_jump(cfg: &ExperimentConfig) -> Result<Report> {
    let kind = ExperimentKind::InftyJump;
    let mut report = Report::new(kind, cfg);
    let spec = match (&cfg.mu, cfg.alpha) {
        (Some(s), _) => s.clone(),
        (None, Some(a)) => AhlforsExample::new(a)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .symmetric_spec(),
        (None, None) => {
            return Err(Error::InvalidConfig(format!(
                "{kind} needs `mu` or `alpha`"
            )))
        }
    };
    let ratio = spec.central_cantor_ratio();
    report.require(Precondition::new(
        "symmetric_central_cantor",
        ratio.is_some() && spec.is_symmetric_about_zero(),
        "support must be a central Cantor set symmetric around 0",
    ));
    let Some(ratio) = ratio.filter(|_| report.is_ok()) else {
        return Ok(report);
    };
    let alpha = 2f64.ln() / (1.0 / ratio).ln();
    let constant = central_cantor_ahlfors_constant(ratio);
    let levels = cfg.resolved_levels(kind);
    let top = *levels.last().unwrap();
    let opts = conv_opts(cfg);
    let ones = generate_levels(&spec, &levels)?;
    let twos = ones
        .iter()
        .map(|m| convolve_with(m, m, &opts))
        .collect::<Result<Vec<_>>>()?;
    let threes = twos
        .iter()
        .zip(&ones)
        .map(|(a, b)| convolve_with(a, b, &opts))
        .collect::<Result<Vec<_>>>()?;
    let two_top = twos.last().unwrap();
    let bound_c = constant.powi(-3) * (-2.0 * alpha).exp2();
    let stall_checks: Vec<BallCheck> = (1..=top)
        .map(|j| {
            let radius = (-(j as f64)).exp2();
            let mass = ball_at_zero(two_top, radius);
            let bound = bound_c * radius.powf(alpha);
            BallCheck {
                j,
                radius,
                mass,
                bound,
                passed: mass >= bound,
            }
        })
        .collect();
    let xs: Vec<f64> = stall_checks.iter().map(|c| c.j as f64).collect();
    let ys: Vec<f64> = stall_checks.iter().map(|c| -c.mass.log2()).collect();
    let near_zero_proxy = ls_slope(&xs, &ys).unwrap_or(f64::NAN);
    let frostman = [
        estimate_from_measures(&ones, QOrder::Infinity, cfg.window)?,
        estimate_from_measures(&twos, QOrder::Infinity, cfg.window)?,
        estimate_from_measures(&threes, QOrder::Infinity, cfg.window)?,
    ];
    for (n, est) in frostman.iter().enumerate() {
        for (i, s) in est.per_scale.iter().enumerate() {
            report.rows.push(TableRow {
                experiment: kind,
                n: n + 1,
                m: s.m,
                q: Some(QOrder::Infinity),
                exponent: s.value,
                improvement: (n > 0).then(|| s.value - frostman[n - 1].per_scale[i].value),
            });
        }
    }
    let young_ordering_holds = twos
        .iter()
        .zip(&threes)
        .all(|(a, b)| b.linf_norm() <= a.linf_norm());
    let jump = frostman[2].point_estimate - frostman[1].point_estimate;
    report.details = Some(Details::InftyJump(InftyJumpDetails {
        ratio,
        alpha,
        constant,
        stall_bound_holds: stall_checks.iter().all(|c| c.passed),
        stall_checks,
        near_zero_proxy,
        two_fold_stall: near_zero_proxy <= alpha + STALL_SLACK,
        frostman,
        jump,
        young_ordering_holds,
    }));
    Ok(report)
}

fn lq_rows(
    report: &mut Report,
    cfg: &ExperimentConfig,
    measures: &[DyadicMeasure],
    n: usize,
) -> Result<()> {
    for &q in &cfg.q {
        for mu in measures {
            report.rows.push(TableRow {
                experiment: report.experiment,
                n,
                m: mu.level(),
                q: Some(QOrder::Finite(q)),
                exponent: lq_exponent(mu, q)?,
                improvement: None,
            });
        }
    }
    Ok(())
}

pub fn run_regularity(cfg: &ExperimentConfig) -> Result<Report> {
    let kind = ExperimentKind::Regularity;
    let mut report = Report::new(kind, cfg);
    let spec = need(&cfg.mu, "mu", kind)?;
    let measures = generate_levels(spec, &cfg.resolved_levels(kind))?;
    let top = measures.last().unwrap();
    let d = diameter_check(top, 0.0, "mu");
    if !d.met {
        report.require(d);
        return Ok(report);
    }
    lq_rows(&mut report, cfg, &measures, 1)?;
    report.details = Some(Details::Regularity(RegularityDetails {
        report: regularity_report(top, &cfg.regularity)?,
    }));
    Ok(report)
}

pub fn run_sumset(cfg: &ExperimentConfig) -> Result<Report> {
    let kind = ExperimentKind::Sumset;
    let mut report = Report::new(kind, cfg);
    let f1 = need(&cfg.mu, "mu", kind)?;
    let levels = cfg.resolved_levels(kind);
    let max_work = cfg.max_work();
    let mut details = SumsetDetails {
        nfold: Vec::new(),
        pair: Vec::new(),
        min_gain: None,
        csv_rows: Vec::new(),
    };
    let mut push = |report: &mut Report,
                    n: usize,
                    m: u32,
                    count: usize,
                    e: f64,
                    interval: bool,
                    base: Option<f64>| {
        report.rows.push(TableRow {
            experiment: kind,
            n,
            m,
            q: None,
            exponent: e,
            improvement: base.map(|b| e - b),
        });
        details.csv_rows.push(SumsetCsvRow {
            n,
            level: m,
            count,
            box_estimate: e,
            is_interval: interval,
        });
    };
    let mut pair = Vec::new();
    let mut nfold = Vec::new();
    if let Some(f2) = &cfg.nu {
        for &m in &levels {
            let a = generate_set(f1, m)?;
            let b = generate_set(f2, m)?;
            let s = sumset_with(&a, &b, SumsetMode::Padded, max_work)?;
            let e1 = box_estimate_from_sets(std::slice::from_ref(&a), 1)?.point_estimate;
            let e2 = box_estimate_from_sets(std::slice::from_ref(&b), 1)?.point_estimate;
            let es = box_estimate_from_sets(std::slice::from_ref(&s), 1)?.point_estimate;
            push(&mut report, 1, m, a.len(), e1, interval_detect(&a), None);
            push(
                &mut report,
                2,
                m,
                s.len(),
                es,
                interval_detect(&s),
                Some(e1),
            );
            pair.push(PairSumRow {
                level: m,
                f1: e1,
                f2: e2,
                sum: es,
                gain: es - e1,
            });
        }
    } else {
        let n_max = cfg.n_max.unwrap_or(3);
        for &m in &levels {
            let r = nfold_sumset_experiment(f1, n_max, m, max_work)?;
            let base = r.rows[0].box_exponent;
            for row in &r.rows {
                let b = (row.n > 1).then_some(base);
                push(
                    &mut report,
                    row.n,
                    m,
                    row.count,
                    row.box_exponent,
                    row.is_interval,
                    b,
                );
            }
            nfold.push(r);
        }
    }
    details.min_gain = pair.iter().map(|p| p.gain).reduce(f64::min);
    details.pair = pair;
    details.nfold = nfold;
    report.details = Some(Details::Sumset(details));
    Ok(report)
}

pub fn run_uniformize(cfg: &ExperimentConfig) -> Result<Report> {
    let kind = ExperimentKind::Uniformize;
    let mut report = Report::new(kind, cfg);
    let spec = need(&cfg.mu, "mu", kind)?;
    let level = cfg.top_level(kind);
    let d = cfg.uniformize.d;
    if d == 0 || level % d != 0 {
        return Err(Error::InvalidConfig(format!(
            "level {level} is not a multiple of D = {d}"
        )));
    }
    let ell = level / d;
    let mu = generate(spec, level)?;
    let u = uniformize(&mu, d, ell, cfg.uniformize.objective)?;
    let verified = is_uniform(&u.tree.leaves, d, ell)? == Some(u.tree.branching.clone());
    // exponent of the uniformized measure, improvement over the input
    for &q in &cfg.q {
        let before = lq_exponent(&mu, q)?;
        let after = lq_exponent(&u.measure, q)?;
        report.rows.push(TableRow {
            experiment: kind,
            n: 1,
            m: level,
            q: Some(QOrder::Finite(q)),
            exponent: after,
            improvement: Some(after - before),
        });
    }
    report.details = Some(Details::Uniformize(UniformizeDetails {
        level,
        d,
        ell,
        roots: u.tree.roots,
        branching: u.tree.branching.clone(),
        input_leaves: mu.len(),
        output_leaves: u.tree.leaf_count(),
        leaf_retention: u.leaf_retention,
        weight_retention: u.weight_retention,
        mass_retained: u.mass_retained,
        retention_bound: retention_bound(d, ell),
        verified_uniform: verified,
        saturation: saturation_check(&u.tree.leaves, d, ell)?,
    }));
    Ok(report)
}
