use std::io::Write;

use anyhow::Context;
use serde_json::{json, Value as Json};

use dualrail::analysis::units::natural_time_to_ns;
use dualrail::analysis::{
    fit_peak_scaling, fit_power_law, fit_time_scaling, reproduce_figure, FigureId, FigureParams, PEAK_EXPONENT,
    PEAK_PREFACTOR, TIME_EXPONENT, TIME_FIT_PREFACTOR,
};
use dualrail::dataset::{Dataset, Value};
use dualrail::noise::asymmetric_run;
use dualrail::oracle::{run_conformance, ConformanceOptions};
use dualrail::protocol::run_schedule;
use dualrail::scheduler::{greedy_optimize, greedy_run, time_to_failure_threshold, uniform_schedule};
use dualrail::{Schedule, SpectralDecomposition};

use crate::config::{invalid, RunConfig, ScheduleSource};
use crate::{Exit, FitKind, Format};

const DEFAULT_L_MAX: usize = 20;
const DEFAULT_L_CAP: usize = 100_000;
const DEFAULT_PEAK_N: [usize; 7] = [20, 30, 50, 70, 100, 150, 200];
const DEFAULT_TIME_N: [usize; 5] = [10, 15, 20, 30, 40];
const DEFAULT_TIME_P: [f64; 3] = [0.1, 0.01, 0.001];

fn emit(cfg: &RunConfig, text: &str) -> anyhow::Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn emit_json(cfg: &RunConfig, value: &Json) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(cfg, &text)
}

fn dataset_json(ds: &Dataset) -> Json {
    let metadata: serde_json::Map<String, Json> = ds
        .metadata()
        .iter()
        .map(|(k, v)| (k.clone(), Json::String(v.clone())))
        .collect();
    let rows: Vec<Json> = ds
        .rows()
        .iter()
        .map(|r| {
            Json::Array(
                r.iter()
                    .map(|v| match v {
                        Value::Int(i) => json!(i),
                        Value::Float(f) if f.is_finite() => json!(f),
                        Value::Float(f) => json!(f.to_string()),
                    })
                    .collect(),
            )
        })
        .collect();
    json!({
        "metadata": metadata,
        "digest": format!("sha256:{}", ds.digest()),
        "columns": ds.columns(),
        "rows": rows,
    })
}

fn emit_dataset(cfg: &RunConfig, ds: &Dataset, format: Format) -> anyhow::Result<()> {
    match format {
        Format::Csv => emit(cfg, &ds.to_csv()),
        Format::Json => emit_json(cfg, &dataset_json(ds)),
    }
}

/// Appends `<column>_ns` copies of natural-unit time columns.
fn add_ns_columns(ds: &mut Dataset, cfg: &RunConfig, columns: &[&str]) -> anyhow::Result<()> {
    let Some(j) = cfg.j_kelvin else {
        return Ok(());
    };
    let unit = natural_time_to_ns(1.0, j)?;
    ds.meta("j_kelvin", j);
    for &name in columns {
        let Some(i) = ds.columns().iter().position(|c| c == name) else {
            continue;
        };
        ds.add_column(&format!("{name}_ns"), |row| Value::Float(row[i].as_f64() * unit));
    }
    Ok(())
}

fn describe_chain(ds: &mut Dataset, cfg: &RunConfig) -> anyhow::Result<()> {
    let spec = cfg.chain()?;
    ds.meta("n_sites", spec.n_sites)
        .meta("anisotropy", spec.anisotropy)
        .meta("field", spec.field);
    Ok(())
}

pub fn amplitude(cfg: &RunConfig, format: Format) -> anyhow::Result<()> {
    let spec = cfg.chain()?;
    let n = spec.n_sites;
    let t_max = cfg.t_max.unwrap_or(n as f64);
    let t_step = cfg.t_step.unwrap_or(0.01);
    if !(t_step > 0.0 && t_step.is_finite()) || !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(invalid("--t-step must be positive and --t-max non-negative"));
    }
    let dec = SpectralDecomposition::from_spec(&spec)?;
    let steps = (t_max / t_step + 1e-9).floor() as usize;
    let mut ds = Dataset::new(["t", "abs_f_sq", "re_f", "im_f"]);
    ds.meta("kind", "amplitude");
    describe_chain(&mut ds, cfg)?;
    let peak = dec.first_peak();
    ds.meta("first_peak_time", format!("{:.16e}", peak.time))
        .meta("first_peak_probability", format!("{:.16e}", peak.probability))
        .meta("units", "natural (hbar = 1, J = 1)");
    for i in 0..=steps {
        let t = i as f64 * t_step;
        let f = dec.transition_amplitude(n, 1, t)?;
        ds.push([Value::Float(t), Value::Float(f.norm_sqr()), Value::Float(f.re), Value::Float(f.im)]);
    }
    add_ns_columns(&mut ds, cfg, &["t"])?;
    emit_dataset(cfg, &ds, format)
}

fn load_schedule(path: &std::path::Path) -> anyhow::Result<Schedule> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Schedule::from_json(&text).map_err(|e| invalid(format!("schedule {}: {e}", path.display())))
}

pub fn protocol(cfg: &RunConfig, format: Format) -> anyhow::Result<()> {
    let spec = cfg.chain()?;
    let dec = SpectralDecomposition::from_spec(&spec)?;
    let noise = cfg.noise()?;
    let l_max = cfg.l_max.unwrap_or(DEFAULT_L_MAX);
    let greedy = cfg.greedy()?;
    let source = cfg.schedule.clone().unwrap_or(ScheduleSource::Greedy);

    if let Some(p) = noise.filter(|p| !p.is_symmetric()) {
        let schedule = match &source {
            ScheduleSource::Greedy => greedy_optimize(&dec, l_max, &greedy)?,
            ScheduleSource::Uniform => uniform_schedule(spec.n_sites, l_max)?,
            ScheduleSource::File(path) => load_schedule(path)?,
        };
        let run = asymmetric_run(&dec, &p, &schedule, None)?;
        if format == Format::Json {
            return emit_json(cfg, &serde_json::to_value(&run)?);
        }
        let mut ds = Dataset::new([
            "l",
            "tau_l",
            "t_abs",
            "undamped_success",
            "step_success",
            "fidelity",
            "fidelity_worst_case",
        ]);
        ds.meta("kind", "protocol-asymmetric");
        describe_chain(&mut ds, cfg)?;
        ds.meta("gamma_1", p.gamma_1)
            .meta("gamma_2", p.gamma_2)
            .meta("input", "equal superposition")
            .meta("total_success", format!("{:.16e}", run.total_success))
            .meta("total_success_min", format!("{:.16e}", run.total_success_min))
            .meta("total_success_max", format!("{:.16e}", run.total_success_max));
        for (s, tau) in run.steps.iter().zip(schedule.intervals()) {
            ds.push([
                Value::Int(s.index as i64),
                Value::Float(*tau),
                Value::Float(s.absolute_time),
                Value::Float(s.undamped_success),
                Value::Float(s.success),
                Value::Float(s.fidelity),
                Value::Float(s.fidelity_worst_case),
            ]);
        }
        add_ns_columns(&mut ds, cfg, &["tau_l", "t_abs"])?;
        return emit_dataset(cfg, &ds, format);
    }

    let result = match &source {
        ScheduleSource::Greedy => greedy_run(&dec, l_max, &greedy, noise.as_ref())?.result,
        ScheduleSource::Uniform => run_schedule(&dec, &uniform_schedule(spec.n_sites, l_max)?, noise.as_ref())?,
        ScheduleSource::File(path) => run_schedule(&dec, &load_schedule(path)?, noise.as_ref())?,
    };
    if format == Format::Json {
        return emit_json(cfg, &serde_json::to_value(&result)?);
    }
    let mut ds = result.to_dataset();
    ds.meta("anisotropy", spec.anisotropy).meta("field", spec.field);
    ds.meta(
        "schedule",
        match &source {
            ScheduleSource::Greedy => "greedy".to_owned(),
            ScheduleSource::Uniform => "uniform".to_owned(),
            ScheduleSource::File(p) => p.display().to_string(),
        },
    );
    if let Some(p) = &noise {
        ds.meta("gamma", p.gamma_1);
    }
    ds.meta("total_success", format!("{:.16e}", result.total_success))
        .meta("loss", format!("{:.16e}", result.loss));
    add_ns_columns(&mut ds, cfg, &["tau_l", "t_abs"])?;
    emit_dataset(cfg, &ds, format)
}

pub fn optimize(cfg: &RunConfig) -> anyhow::Result<()> {
    let spec = cfg.chain()?;
    let dec = SpectralDecomposition::from_spec(&spec)?;
    let greedy = cfg.greedy()?;
    let noise = cfg.noise()?;
    let ns = |t: f64| cfg.j_kelvin.map(|j| natural_time_to_ns(t, j)).transpose();
    let out = if let Some(p) = cfg.p_target {
        if noise.is_some() {
            return Err(invalid("--p-target is only supported without damping"));
        }
        let hit = time_to_failure_threshold(&dec, p, cfg.l_cap.unwrap_or(DEFAULT_L_CAP), &greedy)?;
        json!({
            "n_sites": spec.n_sites,
            "p_target": p,
            "l_used": hit.l_used,
            "joint_failure": hit.joint_failure,
            "total_time": hit.total_time,
            "total_time_ns": ns(hit.total_time)?,
            "schedule": hit.schedule,
        })
    } else {
        if noise.is_some_and(|p| !p.is_symmetric()) {
            return Err(invalid("greedy optimization needs symmetric damping"));
        }
        let run = greedy_run(&dec, cfg.l_max.unwrap_or(DEFAULT_L_MAX), &greedy, noise.as_ref())?;
        let total = run.schedule.total_time();
        json!({
            "n_sites": spec.n_sites,
            "l_max": run.schedule.len(),
            "joint_failure": run.result.final_joint_failure(),
            "total_time": total,
            "total_time_ns": ns(total)?,
            "schedule": run.schedule,
        })
    };
    emit_json(cfg, &out)
}

pub fn fit(cfg: &RunConfig, kind: FitKind) -> anyhow::Result<()> {
    let out = match kind {
        FitKind::Peak => {
            let ns = cfg.n_values.clone().unwrap_or_else(|| DEFAULT_PEAK_N.to_vec());
            let fit = fit_peak_scaling::<f64>(&ns)?;
            json!({
                "kind": "peak",
                "n_values": ns,
                "fit": fit,
                "reference": {"prefactor": PEAK_PREFACTOR, "exponent": PEAK_EXPONENT},
            })
        }
        FitKind::Time => {
            let ns = cfg.n_values.clone().unwrap_or_else(|| DEFAULT_TIME_N.to_vec());
            let ps = cfg.p_values.clone().unwrap_or_else(|| DEFAULT_TIME_P.to_vec());
            let res = fit_time_scaling(&ns, &ps, &cfg.greedy()?, cfg.l_cap.unwrap_or(DEFAULT_L_CAP))?;
            json!({
                "kind": "time",
                "n_values": ns,
                "p_values": ps,
                "fit": res.fit,
                "samples": res.samples,
                "reference": {"prefactor": TIME_FIT_PREFACTOR, "exponent": TIME_EXPONENT},
            })
        }
        FitKind::SelfTest => {
            let xs: Vec<f64> = (1..=10).map(|i| 10.0 * i as f64).collect();
            let ys: Vec<f64> = xs.iter().map(|x| TIME_FIT_PREFACTOR * x.powf(TIME_EXPONENT)).collect();
            let fit = fit_power_law(&xs, &ys)?;
            let pass = (fit.exponent - TIME_EXPONENT).abs() < 1e-10
                && (fit.prefactor / TIME_FIT_PREFACTOR - 1.0).abs() < 1e-10;
            let out = json!({"kind": "self-test", "fit": fit, "pass": pass});
            emit_json(cfg, &out)?;
            if !pass {
                return Err(Exit(1, "power-law self-test did not recover its input".into()).into());
            }
            return Ok(());
        }
    };
    emit_json(cfg, &out)
}

pub fn figure(cfg: &RunConfig, format: Format) -> anyhow::Result<()> {
    let id = FigureId::try_from(cfg.fig.ok_or_else(|| invalid("--fig is required"))?)?;
    let params = FigureParams {
        n_values: cfg.n_values.clone(),
        l_max: cfg.l_max,
        p_values: cfg.p_values.clone(),
        j_over_gamma: cfg.j_over_gamma.clone(),
        l_cap: cfg.l_cap,
        greedy: cfg.greedy()?,
    };
    let mut ds = reproduce_figure(id, &params)?;
    add_ns_columns(&mut ds, cfg, &["t_natural"])?;
    emit_dataset(cfg, &ds, format)
}

pub fn oracle_check(cfg: &RunConfig, inject_sign_error: bool, skip_reference: bool) -> anyhow::Result<()> {
    let opts = ConformanceOptions {
        inject_sign_error,
        reference_runs: !skip_reference,
        ..ConformanceOptions::default()
    };
    let report = run_conformance(&opts)?;
    emit_json(cfg, &serde_json::to_value(&report)?)?;
    if !report.all_pass {
        let names: Vec<&str> = report.failures().iter().map(|c| c.name.as_str()).collect();
        return Err(Exit(4, format!("conformance checks failed: {}", names.join(", "))).into());
    }
    Ok(())
}
