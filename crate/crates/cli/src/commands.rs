use dirdp::accountant::{
    alpha_min_closed_form, alpha_min_for_target, lambda_max, r_for_target, rdp_epsilon, rdp_to_approx_dp,
    PriorFloor, PriorSpec, RdpGuarantee, SensitivityBounds,
};
use dirdp::mechanisms::{
    crossover_summary, histogram_benchmark, kl_utility_benchmark, BenchmarkConfig, KlUtilityConfig,
};
use dirdp::psrl::{psrl_benchmark, rank_test_greater, summarize, PsrlConfig, Variant};
use dirdp::rng::RngSeed;
use dirdp::Bound;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{fmt_num, Cell, Table};
use crate::params::Params;

pub struct Report {
    pub table: Table,
    /// Human-readable form, for the commands that have one.
    pub text: Option<String>,
    pub json_extra: Option<(&'static str, Value)>,
    /// Printed to stderr whatever the output format.
    pub notes: String,
    /// Reported after the output is written.
    pub failure: Option<CliError>,
}

impl Report {
    fn table(table: Table) -> Self {
        Self { table, text: None, json_extra: None, notes: String::new(), failure: None }
    }
}

fn s(x: impl ToString) -> String {
    x.to_string()
}

fn sens(p: &Params) -> Result<SensitivityBounds, CliError> {
    Ok(SensitivityBounds::new(p.get("d2sq")?, p.get("dinf")?)?)
}

fn seed(p: &Params) -> Result<RngSeed, CliError> {
    Ok(RngSeed(p.get("seed")?))
}

pub fn guarantee_defaults() -> Vec<(&'static str, String)> {
    vec![
        ("lambda", s(2)),
        ("d2sq", s(2)),
        ("dinf", s(1)),
        ("alpha_min", String::new()),
        ("alpha", String::new()),
        ("r", s(1)),
    ]
}

pub fn guarantee(p: &Params) -> Result<Report, CliError> {
    let lambda: f64 = p.get("lambda")?;
    let sens = sens(p)?;
    let r: f64 = p.get("r")?;
    let floor = match (p.is_set("alpha_min"), p.is_set("alpha")) {
        (true, false) => PriorFloor::new(p.get("alpha_min")?, r)?,
        (false, true) => {
            let spec = PriorSpec::new(p.list("alpha")?)?.with_r(r)?;
            sens.check_dimension(spec.dim())?;
            spec.floor()
        }
        _ => return Err(CliError::Usage("give exactly one of --alpha-min or --alpha".into())),
    };
    let bound = rdp_epsilon(lambda, &sens, floor)?;
    let upper = lambda_max(floor, &sens);
    let mut table =
        Table::new(&["lambda", "d2sq", "dinf", "alpha_min", "r", "epsilon", "finite", "lambda_upper"]);
    table.push(vec![
        lambda.into(),
        sens.delta2_sq.into(),
        sens.delta_inf.into(),
        floor.alpha_min.into(),
        floor.r.into(),
        bound.value().into(),
        bound.is_finite().into(),
        upper.into(),
    ]);
    let head = match bound {
        Bound::Finite(e) => format!("epsilon = {} at lambda = {}", fmt_num(e), fmt_num(lambda)),
        Bound::Infinite => format!("infinite at this order (lambda = {})", fmt_num(lambda)),
    };
    let text = format!("{head}\nfeasible orders: 1 < lambda < {}\n", fmt_num(upper));
    Ok(Report { text: Some(text), ..Report::table(table) })
}

pub fn solve_defaults() -> Vec<(&'static str, String)> {
    vec![
        ("unknown", "alpha-min".into()),
        ("lambda", s(2)),
        ("epsilon", s(1)),
        ("d2sq", s(2)),
        ("dinf", s(1)),
        ("r", s(1)),
        ("alpha_min", String::new()),
    ]
}

pub fn solve(p: &Params) -> Result<Report, CliError> {
    let target = RdpGuarantee::new(p.get("lambda")?, p.get("epsilon")?)?;
    let sens = sens(p)?;
    let unknown = p.raw("unknown");
    let (name, value, floor) = match unknown {
        "alpha-min" | "alpha-min-closed" => {
            let r: f64 = p.get("r")?;
            let v = if unknown == "alpha-min" {
                alpha_min_for_target(&target, &sens, r)?
            } else {
                alpha_min_closed_form(&target, &sens, r)?
            };
            ("alpha_min", v, PriorFloor::new(v, r)?)
        }
        "r" => {
            let a: f64 = p.get("alpha_min")?;
            let v = r_for_target(&target, &sens, a)?;
            ("r", v, PriorFloor::new(a, v)?)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown must be alpha-min, alpha-min-closed or r, got {other:?}"
            )))
        }
    };
    let check = rdp_epsilon(target.lambda, &sens, floor)?.value();
    let mut table = Table::new(&["unknown", "value", "lambda", "target_epsilon", "check_epsilon"]);
    table.push(vec![unknown.into(), value.into(), target.lambda.into(), target.epsilon.into(), check.into()]);
    let text = format!(
        "{name} = {}\ncheck: epsilon = {} at lambda = {} (target {})\n",
        fmt_num(value),
        fmt_num(check),
        fmt_num(target.lambda),
        fmt_num(target.epsilon)
    );
    Ok(Report { text: Some(text), ..Report::table(table) })
}

pub fn convert_defaults() -> Vec<(&'static str, String)> {
    vec![
        ("alpha_min", s(4)),
        ("r", s(1)),
        ("d2sq", s(2)),
        ("dinf", s(1)),
        ("epsilons", s(1)),
        ("sweep", String::new()),
    ]
}

/// `lo:hi:count`, evenly spaced and inclusive.
fn parse_sweep(v: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("sweep expects lo:hi:count, got {v:?}"));
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    let [lo, hi, n] = parts[..] else { return Err(bad()) };
    let (lo, hi): (f64, f64) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    if n < 2 || hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return Err(bad());
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

pub fn convert(p: &Params) -> Result<Report, CliError> {
    let sens = sens(p)?;
    let r: f64 = p.get("r")?;
    let alphas: Vec<f64> = p.list("alpha_min")?;
    let epsilons = if p.is_set("sweep") { parse_sweep(p.raw("sweep"))? } else { p.list("epsilons")? };
    if alphas.is_empty() || epsilons.is_empty() {
        return Err(CliError::Usage("need at least one alpha_min and one epsilon".into()));
    }
    let mut table = Table::new(&["alpha_min", "r", "epsilon", "delta", "lambda", "vacuous"]);
    let mut text = String::new();
    for &a in &alphas {
        for &eps in &epsilons {
            let c = rdp_to_approx_dp(PriorFloor::new(a, r)?, &sens, eps)?;
            table.push(vec![
                a.into(),
                r.into(),
                eps.into(),
                c.guarantee.delta.into(),
                c.lambda.into(),
                c.vacuous.into(),
            ]);
            text.push_str(&format!(
                "alpha_min = {}, epsilon = {}: delta = {} at lambda = {}{}\n",
                fmt_num(a),
                fmt_num(eps),
                fmt_num(c.guarantee.delta),
                fmt_num(c.lambda),
                if c.vacuous { " (vacuous)" } else { "" }
            ));
        }
    }
    Ok(Report { text: Some(text), ..Report::table(table) })
}

pub fn hist_bench_defaults() -> Vec<(&'static str, String)> {
    let d = BenchmarkConfig::default();
    let join = |v: Vec<String>| v.join(",");
    vec![
        ("dims", join(d.dims.iter().map(s).collect())),
        ("epsilons", join(d.epsilons.iter().map(|e| fmt_num(*e)).collect())),
        ("ns", join(d.ns.iter().map(s).collect())),
        ("trials", s(d.trials)),
        ("lambda", fmt_num(d.lambda)),
        ("d2sq", fmt_num(d.sens.delta2_sq)),
        ("dinf", fmt_num(d.sens.delta_inf)),
        ("l1_sensitivity", fmt_num(d.l1_sensitivity)),
        ("project", s(d.project)),
        ("assert_crossover", String::new()),
        ("seed", s(2024)),
    ]
}

pub fn hist_bench(p: &Params) -> Result<Report, CliError> {
    let config = BenchmarkConfig {
        dims: p.list("dims")?,
        epsilons: p.list("epsilons")?,
        ns: p.list("ns")?,
        trials: p.get("trials")?,
        lambda: p.get("lambda")?,
        sens: sens(p)?,
        l1_sensitivity: p.get("l1_sensitivity")?,
        project: p.get("project")?,
    };
    // check the assertion cells before the run
    let mut cells = Vec::new();
    for item in p.raw("assert_crossover").split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let bad = || CliError::Usage(format!("assert_crossover expects d:epsilon, got {item:?}"));
        let (d, eps) = item.split_once(':').ok_or_else(bad)?;
        let d: usize = d.trim().parse().map_err(|_| bad())?;
        let eps: f64 = eps.trim().parse().map_err(|_| bad())?;
        if !config.dims.contains(&d) || !config.epsilons.contains(&eps) {
            return Err(CliError::Usage(format!("crossover cell {item} is not in the grid")));
        }
        cells.push((d, eps));
    }

    let rows = histogram_benchmark(&config, seed(p)?)?;
    let mut table = Table::new(&[
        "mechanism",
        "d",
        "epsilon",
        "n",
        "trials",
        "mean_l2_loss",
        "stderr",
        "lambda",
        "rdp_epsilon",
    ]);
    for r in &rows {
        table.push(vec![
            r.mechanism.name().into(),
            r.d.into(),
            r.epsilon.into(),
            r.n.into(),
            r.trials.into(),
            r.mean_l2_loss.into(),
            r.stderr.into(),
            r.guarantee.lambda.into(),
            r.guarantee.epsilon.into(),
        ]);
    }
    let mut report = Report::table(table);
    let mut failed = Vec::new();
    for (d, eps) in cells {
        let c = crossover_summary(&rows, d, eps).expect("cell is in the grid");
        report.notes.push_str(&format!(
            "crossover d = {d}, epsilon = {}: {} ({} crossing(s))\n",
            fmt_num(eps),
            if c.holds() { "holds" } else { "violated" },
            c.crossings
        ));
        if !c.holds() {
            failed.push(format!("{d}:{}", fmt_num(eps)));
        }
    }
    if !failed.is_empty() {
        report.failure = Some(CliError::Assertion(format!("no single crossover at {}", failed.join(", "))));
    }
    Ok(report)
}

pub fn kl_utility_defaults() -> Vec<(&'static str, String)> {
    let d = KlUtilityConfig::default();
    let nums = |v: &[f64]| v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(",");
    vec![
        ("etas", nums(&d.etas)),
        ("epsilons", nums(&d.epsilons)),
        ("ns", d.ns.iter().map(s).collect::<Vec<_>>().join(",")),
        ("draws", s(d.draws)),
        ("d", s(d.d)),
        ("base_alpha", fmt_num(d.base_alpha)),
        ("lambda", fmt_num(d.lambda)),
        ("d2sq", fmt_num(d.sens.delta2_sq)),
        ("dinf", fmt_num(d.sens.delta_inf)),
        ("seed", s(2024)),
    ]
}

pub fn kl_utility(p: &Params) -> Result<Report, CliError> {
    let config = KlUtilityConfig {
        etas: p.list("etas")?,
        epsilons: p.list("epsilons")?,
        ns: p.list("ns")?,
        draws: p.get("draws")?,
        d: p.get("d")?,
        base_alpha: p.get("base_alpha")?,
        lambda: p.get("lambda")?,
        sens: sens(p)?,
    };
    let rows = kl_utility_benchmark(&config, seed(p)?)?;
    let mut table =
        Table::new(&["eta", "epsilon", "n", "draws", "alpha_prime", "mean_kl", "stderr_kl", "mean_bound"]);
    for r in rows {
        table.push(vec![
            r.eta.into(),
            r.epsilon.into(),
            r.n.into(),
            r.draws.into(),
            r.alpha_prime.into(),
            r.mean_kl.into(),
            r.stderr_kl.into(),
            r.mean_bound.into(),
        ]);
    }
    Ok(Report::table(table))
}

pub fn psrl_defaults() -> Vec<(&'static str, String)> {
    let c = PsrlConfig::default();
    let e = &c.env;
    let rp = c.reward_privacy.unwrap_or_default();
    let nums = |v: &[f64]| v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(",");
    vec![
        ("epsilons", nums(&c.epsilons)),
        ("episodes", s(c.episodes)),
        ("repetitions", s(c.repetitions)),
        ("variants", c.variants.iter().map(|v| v.name()).collect::<Vec<_>>().join(",")),
        ("lambda", fmt_num(c.lambda)),
        ("prior_alpha", fmt_num(c.agent.prior_alpha)),
        ("delta2_sq", fmt_num(c.agent.sens.delta2_sq)),
        ("delta_inf", fmt_num(c.agent.sens.delta_inf)),
        ("mu0", fmt_num(c.agent.reward_prior.mu0)),
        ("kappa0", fmt_num(c.agent.reward_prior.kappa0)),
        ("a0", fmt_num(c.agent.reward_prior.a0)),
        ("b0", fmt_num(c.agent.reward_prior.b0)),
        ("privatize_rewards", s(c.reward_privacy.is_some())),
        ("reward_epsilon", fmt_num(rp.epsilon)),
        ("reward_lambda_max", fmt_num(rp.lambda_max)),
        ("reward_sensitivity", fmt_num(rp.sensitivity)),
        ("n_states", s(e.n_states)),
        ("horizon", s(e.horizon)),
        ("advance", fmt_num(e.advance)),
        ("stay", fmt_num(e.stay)),
        ("regress", fmt_num(e.regress)),
        ("left_edge_advance", fmt_num(e.left_edge_advance)),
        ("right_edge_stay", fmt_num(e.right_edge_stay)),
        ("reward_left", fmt_num(e.reward_left)),
        ("reward_right", fmt_num(e.reward_right)),
        ("reward_noise", fmt_num(e.reward_noise)),
        ("initial_state", s(e.initial_state)),
        ("seed", s(2024)),
    ]
}

pub fn psrl(p: &Params) -> Result<Report, CliError> {
    let mut config = PsrlConfig::default();
    config.apply(&p.pairs_except(&["seed"]))?;
    let result = psrl_benchmark(&config, seed(p)?)?;
    let mut table = Table::new(&[
        "variant",
        "epsilon",
        "repetition",
        "episode",
        "episodic_reward",
        "cumulative_reward",
        "cumulative_rdp_epsilon",
    ]);
    for r in &result.rows {
        table.push(vec![
            r.variant.name().into(),
            r.epsilon.into(),
            r.repetition.into(),
            r.episode.into(),
            r.episodic_reward.into(),
            r.cumulative_reward.into(),
            r.cumulative_rdp_epsilon.into(),
        ]);
    }

    let summary = summarize(&result.totals);
    let mut notes = String::new();
    let mut means = Vec::new();
    for sm in &summary {
        notes.push_str(&format!(
            "{} epsilon = {}: mean total {} (stderr {}, {} runs)\n",
            sm.variant.name(),
            fmt_num(sm.epsilon),
            fmt_num(sm.mean_total),
            fmt_num(sm.stderr),
            sm.runs
        ));
        means.push(json!({
            "variant": sm.variant.name(),
            "epsilon": Cell::from(sm.epsilon).to_json(),
            "runs": sm.runs,
            "mean_total": Cell::from(sm.mean_total).to_json(),
            "stderr": Cell::from(sm.stderr).to_json(),
        }));
    }
    let mut ordering = Vec::new();
    if config.variants.contains(&Variant::Diffuse) && config.variants.contains(&Variant::Concentrated) {
        for &eps in &config.epsilons {
            let totals = |v: Variant| -> Vec<f64> {
                result.totals.iter().filter(|t| t.variant == v && t.epsilon == eps).map(|t| t.total).collect()
            };
            let pval = rank_test_greater(&totals(Variant::Diffuse), &totals(Variant::Concentrated));
            notes.push_str(&format!(
                "diffuse > concentrated at epsilon = {}: one-sided rank test p = {}\n",
                fmt_num(eps),
                fmt_num(pval)
            ));
            ordering
                .push(json!({ "epsilon": Cell::from(eps).to_json(), "p_value": Cell::from(pval).to_json() }));
        }
    }
    Ok(Report {
        notes,
        json_extra: Some(("summary", json!({ "means": means, "diffuse_vs_concentrated": ordering }))),
        ..Report::table(table)
    })
}
