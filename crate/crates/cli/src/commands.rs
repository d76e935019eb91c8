//! Subcommand bodies. Each returns a finished table; parallelism lives in the
//! Monte Carlo engine.

use clap::ValueEnum;

use vlcnoma_core::analytic::{
    cdf_sq_ordered, cdf_sq_unordered, cdf_strong_twobit_inst, cdf_strong_twobit_mean,
    cdf_weak_twobit_inst, cdf_weak_twobit_mean,
};
use vlcnoma_core::montecarlo::{
    collect_nonzero_gains, collect_scheduled_gains, collect_vertical_angles, estimate_sum_rates,
    nonzero_count_histogram, McSettings, NoiseConfig, SumRatePoint,
};
use vlcnoma_core::numerics::{total_variation, EmpiricalDistribution};
use vlcnoma_core::rates::{
    db_to_linear, outage_pair_analytic, sum_rate_noma, sum_rate_oma, FeedbackMode, Scenario,
};
use vlcnoma_core::stochastic::{cdf_vertical_angle, pmf_nonzero_count_truncated};

use crate::config::Experiment;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};

pub const SUM_RATE_TRIALS: u64 = 1_000_000;
pub const VALIDATION_TRIALS: u64 = 10_000_000;
pub const MIN_TRIALS: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Unordered,
    Ordered,
    #[value(name = "twobit-inst-weak", alias = "twobit_inst_weak")]
    TwobitInstWeak,
    #[value(name = "twobit-inst-strong", alias = "twobit_inst_strong")]
    TwobitInstStrong,
    #[value(name = "twobit-mean-weak", alias = "twobit_mean_weak")]
    TwobitMeanWeak,
    #[value(name = "twobit-mean-strong", alias = "twobit_mean_strong")]
    TwobitMeanStrong,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Unordered => "unordered",
            Family::Ordered => "ordered",
            Family::TwobitInstWeak => "twobit-inst-weak",
            Family::TwobitInstStrong => "twobit-inst-strong",
            Family::TwobitMeanWeak => "twobit-mean-weak",
            Family::TwobitMeanStrong => "twobit-mean-strong",
        }
    }

    fn mode(self) -> FeedbackMode {
        match self {
            Family::Unordered | Family::Ordered => FeedbackMode::FullCsi,
            Family::TwobitInstWeak | Family::TwobitInstStrong => FeedbackMode::TwoBitInstantaneous,
            Family::TwobitMeanWeak | Family::TwobitMeanStrong => FeedbackMode::TwoBitMean,
        }
    }
}

fn manifest(table: &mut Table, exp: &Experiment, command: &str, settings: &McSettings) {
    table.manifest = vec![
        ("tool".into(), "vlcnoma".into()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("command".into(), command.into()),
        ("seed".into(), settings.seed.to_string()),
        ("trials".into(), settings.trials.to_string()),
        ("config_sha256".into(), exp.raw.hash()),
    ];
}

pub fn validate_angle_cdf(exp: &Experiment) -> CliResult<Table> {
    let settings = exp.settings(VALIDATION_TRIALS, MIN_TRIALS)?;
    let model = exp.model()?;
    let points = exp.count("angle_grid_points")?;
    let samples = collect_vertical_angles(&model, &settings)?;
    let e = EmpiricalDistribution::new(samples)?;
    let ks = e.ks_distance(|x| cdf_vertical_angle(x, &model));

    let mut t = Table::new(vec!["x_deg", "analytic_cdf", "empirical_cdf"]);
    manifest(&mut t, exp, "validate-angle-cdf", &settings);
    let lo = model.mean_angle_min - model.max_deviation;
    let hi = model.mean_angle_max + model.max_deviation;
    for k in 0..points {
        let x = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        t.push(vec![
            x.to_degrees().into(),
            cdf_vertical_angle(x, &model).into(),
            e.cdf(x).into(),
        ]);
    }
    t.push(vec!["ks_distance".into(), ks.into(), (e.len() as u64).into()]);
    Ok(t)
}

pub fn validate_knz(exp: &Experiment) -> CliResult<Table> {
    let settings = exp.settings(VALIDATION_TRIALS, MIN_TRIALS)?;
    let scn = exp.scenario(FeedbackMode::FullCsi)?;
    let nz = scn.nonzero_count()?;
    let hist = nonzero_count_histogram(&scn, &settings)?;
    let kept: u64 = hist[nz.k_min..].iter().sum();
    if kept == 0 {
        return Err(CliError::Numeric(format!("no trial reached {} nonzero users", nz.k_min)));
    }
    let mut t = Table::new(vec!["n", "analytic_pmf", "empirical_pmf", "count"]);
    manifest(&mut t, exp, "validate-knz", &settings);
    let (mut ana, mut emp) = (Vec::new(), Vec::new());
    for (n, &c) in hist.iter().enumerate() {
        let a = pmf_nonzero_count_truncated(n, &nz)?;
        let e = if n < nz.k_min { 0.0 } else { c as f64 / kept as f64 };
        ana.push(a);
        emp.push(e);
        t.push(vec![(n as u64).into(), a.into(), e.into(), c.into()]);
    }
    t.push(vec![
        "total_variation".into(),
        total_variation(&emp, &ana).into(),
        Cell::Empty,
        kept.into(),
    ]);
    Ok(t)
}

pub fn validate_channel_cdf(exp: &Experiment, family: Family) -> CliResult<Table> {
    let settings = exp.settings(VALIDATION_TRIALS, MIN_TRIALS)?;
    let scn = exp.scenario(family.mode())?;
    let points = exp.count("cdf_points")?;
    let (m, l, th) = (scn.model, scn.led, scn.noma.thresholds);
    let samples = match family {
        Family::Unordered => {
            // one trial draws the whole population, so scale to roughly `trials` users
            let per = settings.trials.div_ceil(scn.users as u64);
            collect_nonzero_gains(&scn, &McSettings { trials: per, ..settings })?
        }
        Family::Ordered | Family::TwobitInstStrong | Family::TwobitMeanStrong => {
            collect_scheduled_gains(&scn, &settings)?.strong
        }
        Family::TwobitInstWeak | Family::TwobitMeanWeak => collect_scheduled_gains(&scn, &settings)?.weak,
    };
    if samples.is_empty() {
        return Err(CliError::Numeric("no samples were produced".into()));
    }
    let nz = scn.nonzero_count()?;
    let j = scn.noma.strong_rank;
    let cdf = |x: f64| -> CliResult<f64> {
        Ok(match family {
            Family::Unordered => cdf_sq_unordered(x, &m, &l)?,
            Family::Ordered => cdf_sq_ordered(x, j, &nz, &m, &l)?,
            Family::TwobitInstWeak => cdf_weak_twobit_inst(x, &th, &m, &l)?,
            Family::TwobitInstStrong => cdf_strong_twobit_inst(x, &th, &m, &l)?,
            Family::TwobitMeanWeak => cdf_weak_twobit_mean(x, &th, &m, &l)?,
            Family::TwobitMeanStrong => cdf_strong_twobit_mean(x, &th, &m, &l)?,
        })
    };
    let e = EmpiricalDistribution::new(samples)?;
    let mut xs = vec![0.0];
    xs.extend((0..points).map(|k| e.quantile(k as f64 / (points - 1) as f64)));
    xs.dedup();

    let mut t = Table::new(vec!["x_sq_gain", "analytic_cdf", "empirical_cdf"]);
    manifest(&mut t, exp, "validate-channel-cdf", &settings);
    t.manifest.push(("family".into(), family.name().into()));
    let mut nodes = Vec::with_capacity(xs.len());
    for &x in &xs {
        let f = cdf(x)?;
        // an atom at zero (mean feedback) has F(0-) = 0
        nodes.push((x, if x == 0.0 { 0.0 } else { f }, f));
        t.push(vec![x.into(), f.into(), e.cdf(x).into()]);
    }
    t.push(vec![
        "ks_upper_bound".into(),
        e.ks_upper_bound(&nodes).into(),
        (e.len() as u64).into(),
    ]);
    Ok(t)
}

const RATE_COLUMNS: [&str; 9] = [
    "analytic_noma",
    "analytic_oma",
    "mc_noma",
    "mc_noma_stderr",
    "mc_oma",
    "mc_oma_stderr",
    "outage_weak",
    "outage_strong",
    "scheduled_fraction",
];

fn header_with(first: &'static str) -> Vec<&'static str> {
    let mut h = vec![first];
    h.extend(RATE_COLUMNS);
    h
}

fn analytic_pair(scn: &Scenario, exp: &Experiment) -> CliResult<(Option<f64>, Option<f64>)> {
    if !scn.noma.feedback_mode.has_analytic_law() {
        return Ok((None, None));
    }
    let (pw, ps) = outage_pair_analytic(scn)?;
    Ok((
        Some(sum_rate_noma(pw, ps, &scn.noma)),
        Some(sum_rate_oma(scn, exp.oma_mode)?),
    ))
}

fn rate_cells(ana: (Option<f64>, Option<f64>), p: &SumRatePoint) -> Vec<Cell> {
    vec![
        ana.0.into(),
        ana.1.into(),
        p.noma.mean.into(),
        p.noma.stderr.into(),
        p.oma.mean.into(),
        p.oma.stderr.into(),
        p.outage_weak.into(),
        p.outage_strong.into(),
        p.scheduled_fraction.into(),
    ]
}

fn add_mode(t: &mut Table, exp: &Experiment, mode: FeedbackMode) {
    t.manifest.push(("mode".into(), mode.name().into()));
    t.manifest.push(("oma_mode".into(), exp.oma_mode.name().into()));
}

pub fn sweep_snr(exp: &Experiment) -> CliResult<Table> {
    let settings = exp.settings(SUM_RATE_TRIALS, MIN_TRIALS)?.with_noise(NoiseConfig::disabled());
    let mode = exp.mode_or(FeedbackMode::FullCsi);
    let scn = exp.scenario(mode)?;
    let grid = exp.grid("snr_grid_db")?;
    let snrs: Vec<f64> = grid.iter().map(|&g| db_to_linear(g)).collect();
    let mc = estimate_sum_rates(&scn, &snrs, exp.oma_mode, &settings)?;
    let mut t = Table::new(header_with("snr_db"));
    manifest(&mut t, exp, "sweep-snr", &settings);
    add_mode(&mut t, exp, mode);
    for (k, &db) in grid.iter().enumerate() {
        let sc = scn.with_noma(scn.noma.with_snr(snrs[k]));
        let mut row = vec![db.into()];
        row.extend(rate_cells(analytic_pair(&sc, exp)?, &mc[k]));
        t.push(row);
    }
    Ok(t)
}

pub fn sweep_deviation(exp: &Experiment) -> CliResult<Table> {
    let settings = exp.settings(SUM_RATE_TRIALS, MIN_TRIALS)?;
    let mode = exp.mode_or(FeedbackMode::FullCsi);
    let grid = exp.grid("deviation_grid_deg")?;
    let c = exp.coefficients();
    let mut t = Table::new(header_with("max_deviation_deg"));
    manifest(&mut t, exp, "sweep-deviation", &settings);
    add_mode(&mut t, exp, mode);
    t.manifest.push(("snr_db".into(), exp.raw.get("snr_db").into()));
    for &dev in &grid {
        let scn = exp.scenario_with(mode, dev, c)?;
        let mc = estimate_sum_rates(&scn, &[scn.noma.snr], exp.oma_mode, &settings)?;
        let mut row = vec![dev.into()];
        row.extend(rate_cells(analytic_pair(&scn, exp)?, &mc[0]));
        t.push(row);
    }
    Ok(t)
}

pub fn sweep_thresholds(exp: &Experiment) -> CliResult<Table> {
    let settings = exp.settings(SUM_RATE_TRIALS, MIN_TRIALS)?;
    let mode = exp.mode_or(FeedbackMode::TwoBitInstantaneous);
    if !matches!(mode, FeedbackMode::TwoBitInstantaneous | FeedbackMode::TwoBitMean) {
        return Err(CliError::Config(format!(
            "sweep-thresholds needs a two-bit mode, got {mode}"
        )));
    }
    if exp.raw.get("d_th") != "auto" || exp.raw.get("theta_th_deg") != "auto" {
        return Err(CliError::Config(
            "sweep-thresholds sweeps coefficients; leave d_th and theta_th_deg on auto".into(),
        ));
    }
    let cd = exp.grid("c_dth_grid")?;
    let ct = exp.grid("c_theta_grid")?;
    let mut header = vec!["c_dth", "c_theta", "d_th", "theta_th_deg"];
    header.extend(RATE_COLUMNS);
    let mut t = Table::new(header);
    manifest(&mut t, exp, "sweep-thresholds", &settings);
    add_mode(&mut t, exp, mode);
    t.manifest.push(("snr_db".into(), exp.raw.get("snr_db").into()));
    for &a in &cd {
        for &b in &ct {
            let scn = exp.scenario_with(mode, exp.max_deviation_deg(), (a, b))?;
            let mc = estimate_sum_rates(&scn, &[scn.noma.snr], exp.oma_mode, &settings)?;
            let th = scn.noma.thresholds;
            let mut row = vec![a.into(), b.into(), th.d_th.into(), th.theta_th.to_degrees().into()];
            row.extend(rate_cells(analytic_pair(&scn, exp)?, &mc[0]));
            t.push(row);
        }
    }
    Ok(t)
}

pub fn noisy_compare(exp: &Experiment) -> CliResult<Table> {
    let settings = exp.settings(SUM_RATE_TRIALS, MIN_TRIALS)?;
    let grid = exp.grid("snr_grid_db")?;
    let snrs: Vec<f64> = grid.iter().map(|&g| db_to_linear(g)).collect();
    let mut t = Table::new(vec![
        "mode",
        "snr_db",
        "noiseless",
        "noiseless_stderr",
        "noisy",
        "noisy_stderr",
        "difference",
    ]);
    manifest(&mut t, exp, "noisy-compare", &settings);
    t.manifest.push(("sigma_d".into(), exp.raw.get("sigma_d").into()));
    t.manifest.push(("sigma_phi_deg".into(), exp.raw.get("sigma_phi_deg").into()));
    for mode in exp.noisy_modes()? {
        let scn = exp.scenario(mode)?;
        let clean = estimate_sum_rates(&scn, &snrs, exp.oma_mode, &settings.with_noise(NoiseConfig::disabled()))?;
        let noisy = estimate_sum_rates(&scn, &snrs, exp.oma_mode, &settings.with_noise(exp.noise))?;
        for (k, &db) in grid.iter().enumerate() {
            t.push(vec![
                mode.name().into(),
                db.into(),
                clean[k].noma.mean.into(),
                clean[k].noma.stderr.into(),
                noisy[k].noma.mean.into(),
                noisy[k].noma.stderr.into(),
                (noisy[k].noma.mean - clean[k].noma.mean).into(),
            ]);
        }
    }
    Ok(t)
}
