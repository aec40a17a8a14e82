//! The five commands as library functions. Each returns an [`Outcome`]
//! carrying the exit status, a JSON report and a short text summary.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::cli::config::{Query, RunConfig};
use crate::cli::manifest::RunDir;
use crate::cli::svg;
use crate::cli::tables::{net_table, points_table, Table};
use crate::criteria::{Criteria, Membership, PredictedSets};
use crate::error::{Error, Result};
use crate::grid::{format_f64, GridFn};
use crate::models::example8::{envelope_holds, envelope_probes};
use crate::models::{Example8Mode, ModelConfig, ModelKind, MomentModel, StarSet};
use crate::sim::{containment_check, run_simulation, ClusterReport};
use crate::strassen::{dirichlet_energy, taut_string};
use crate::verify;

#[derive(Debug, Clone, Default)]
pub struct Globals {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub json: bool,
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    InputError,
    Undecided,
    PropertyFailure,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::InputError => 1,
            Status::Undecided => 2,
            Status::PropertyFailure => 3,
        }
    }

    fn worst(self, o: Status) -> Status {
        if o.code() > self.code() {
            o
        } else {
            self
        }
    }
}

/// Exit status for an error that aborted a command.
pub fn status_of(e: &Error) -> Status {
    match e {
        Error::Undecided(_) => Status::Undecided,
        _ => Status::InputError,
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub report: Value,
    pub text: String,
    pub out_dir: Option<PathBuf>,
}

fn config(g: &Globals) -> Result<RunConfig> {
    let path = g
        .config
        .as_deref()
        .ok_or_else(|| Error::Input("this command needs --config <file>".into()))?;
    let mut cfg = RunConfig::load(path)?.resolved()?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn engine(cfg: &RunConfig, model: MomentModel) -> Result<Criteria> {
    Criteria::new(model, cfg.normalizer(), cfg.classifier.clone())
}

fn opt(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

pub fn criteria(g: &Globals) -> Result<Outcome> {
    let cfg = config(g)?;
    let model = cfg.model.build()?;
    let kind = model.kind();
    let crit = engine(&cfg, model)?;
    let label = cfg.normalizer().label();
    let mut status = Status::Ok;
    let mut records = Vec::new();
    let mut table = Table::new(&["id", "type", "result", "epsilon_star", "estimate", "lower", "upper"]);
    for (i, q) in cfg.queries.iter().enumerate() {
        let id = q.label(i);
        let ctx = |e: Error| match e {
            Error::Undecided(m) => Error::Undecided(m),
            e => Error::Input(format!("queries[{i}] ({id}): {e}")),
        };
        let result: Value = match q {
            Query::Point { x, .. } => {
                let v = crit.point_membership(x).map_err(ctx)?;
                if v.overall == Membership::Undecided {
                    status = status.worst(Status::Undecided);
                }
                table.push(vec![
                    id.clone(),
                    q.type_name().into(),
                    ser(&v.overall),
                    opt(v.epsilon_star),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
                serde_json::to_value(&v)?
            }
            Query::Function { .. } | Query::Product { .. } => {
                let f = q.function()?.expect("function query");
                let v = crit.function_membership(&f).map_err(ctx)?;
                if v.overall == Membership::Undecided {
                    status = status.worst(Status::Undecided);
                }
                table.push(vec![
                    id.clone(),
                    q.type_name().into(),
                    ser(&v.overall),
                    opt(v.epsilon_star),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
                serde_json::to_value(&v)?
            }
            Query::Alpha0 { .. } => match crit.alpha0() {
                Ok(a) => {
                    table.push(vec![
                        id.clone(),
                        q.type_name().into(),
                        "estimated".into(),
                        String::new(),
                        format_f64(a.estimate),
                        format_f64(a.lower),
                        format_f64(a.upper),
                    ]);
                    serde_json::to_value(&a)?
                }
                Err(Error::Undecided(m)) => {
                    status = status.worst(Status::Undecided);
                    table.push(vec![id.clone(), q.type_name().into(), "undecided".into(), String::new(), String::new(), String::new(), String::new()]);
                    json!({ "undecided": m })
                }
                Err(e) => return Err(ctx(e)),
            },
            Query::CoordinateAlphas { .. } => match crit.coordinate_alphas() {
                Ok(v) => {
                    for (k, a) in v.iter().enumerate() {
                        table.push(vec![
                            format!("{id}[{k}]"),
                            q.type_name().into(),
                            "estimated".into(),
                            String::new(),
                            format_f64(a.estimate),
                            format_f64(a.lower),
                            format_f64(a.upper),
                        ]);
                    }
                    serde_json::to_value(&v)?
                }
                Err(Error::Undecided(m)) => {
                    status = status.worst(Status::Undecided);
                    table.push(vec![id.clone(), q.type_name().into(), "undecided".into(), String::new(), String::new(), String::new(), String::new()]);
                    json!({ "undecided": m })
                }
                Err(e) => return Err(ctx(e)),
            },
            Query::PredictedSets { .. } => match predicted(&crit) {
                Ok(p) => {
                    table.push(vec![
                        id.clone(),
                        q.type_name().into(),
                        descriptor_name(&p),
                        String::new(),
                        format_f64(p.alpha0.estimate),
                        format_f64(p.alpha0.lower),
                        format_f64(p.alpha0.upper),
                    ]);
                    serde_json::to_value(&p)?
                }
                Err(Error::Undecided(m)) => {
                    status = status.worst(Status::Undecided);
                    table.push(vec![id.clone(), q.type_name().into(), "undecided".into(), String::new(), String::new(), String::new(), String::new()]);
                    json!({ "undecided": m })
                }
                Err(e) => return Err(ctx(e)),
            },
        };
        records.push(json!({
            "id": id,
            "query": q,
            "model_ref": kind,
            "normalizer": label,
            "result": result,
        }));
    }
    let doc = json!({ "config": cfg.classifier, "results": records });
    let mut run = RunDir::create(g.out.as_deref(), "criteria", &cfg, vec![cfg.seed], 1)?;
    run.write_json("verdicts.json", &doc)?;
    run.write("summary.csv", &table.to_csv()?)?;
    let dir = run.root().to_path_buf();
    let text = table
        .rows
        .iter()
        .map(|r| format!("{:<12} {:<18} {:<12} {}", r[0], r[1], r[2], r[3..].join(" ").trim()))
        .collect::<Vec<_>>()
        .join("\n");
    let summary = json!({ "queries": cfg.queries.len(), "status": status });
    run.finish(summary.clone())?;
    Ok(Outcome {
        status,
        report: doc,
        text,
        out_dir: Some(dir),
    })
}

fn ser(v: &impl Serialize) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn descriptor_name(p: &PredictedSets) -> String {
    serde_json::to_value(&p.a)
        .ok()
        .and_then(|v| v.get("type").and_then(|t| t.as_str()).map(str::to_string))
        .unwrap_or_default()
}

/// Predicted sets: prescribed by the star set for the sampled block model,
/// computed by the criteria otherwise.
fn predicted(crit: &Criteria) -> Result<PredictedSets> {
    match crit.model.example8() {
        Some(m) if m.mode() == Example8Mode::Scaled => Ok(PredictedSets::for_star(m.star())),
        _ => crit.predicted_sets(),
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimulateArgs {
    pub n_max: Option<u64>,
    /// Worker threads; defaults to every available core.
    pub streams: Option<usize>,
    /// Also write every functional snapshot as CSV.
    pub snapshot_csv: bool,
}

struct SimOutput {
    summary: Value,
    status: Status,
}

fn simulate_into(run: &mut RunDir, cfg: &RunConfig, model: MomentModel, workers: usize, snapshot_csv: bool) -> Result<SimOutput> {
    let seq = cfg.normalizer();
    let mut report = run_simulation(&model, &seq, &cfg.simulation, cfg.seed, workers)?;
    let crit = engine(cfg, model)?;
    let (sets, note) = match predicted(&crit) {
        Ok(p) => (Some(p), None),
        Err(Error::Undecided(m)) => (None, Some(m)),
        Err(e) => return Err(e),
    };
    if let Some(p) = &sets {
        report.containment = Some(containment_check(&report, p, cfg.simulation.tol)?);
    }
    write_sim_files(run, &report, sets.as_ref(), snapshot_csv)?;
    let c = report.containment.as_ref();
    Ok(SimOutput {
        summary: json!({
            "tail_points": report.points.len(),
            "net_points": report.net.points.len(),
            "max_net_norm": report.net.max_norm(),
            "burn_in_n": report.burn_in_n,
            "snapshots": report.snapshots.len(),
            "upper_violations": c.map(|c| c.upper_violations.len()),
            "max_upper_distance": c.map(|c| c.max_upper_distance),
            "coverage": c.map(|c| c.coverage),
            "coverage_vacuous": c.map(|c| c.vacuous),
            "max_sqrt_t_distance": c.map(|c| c.max_sqrt_t_distance),
            "max_point_distance": c.map(|c| c.max_point_distance),
            "predicted_sets": note.as_ref().map_or_else(|| json!("available"), |m| json!({ "undecided": m })),
        }),
        status: if note.is_some() { Status::Undecided } else { Status::Ok },
    })
}

fn write_sim_files(run: &mut RunDir, report: &ClusterReport, sets: Option<&PredictedSets>, snapshot_csv: bool) -> Result<()> {
    run.write_json("report.json", report)?;
    run.write("points.csv", &points_table(report).to_csv()?)?;
    run.write("net.csv", &net_table(report).to_csv()?)?;
    if let Some(p) = sets {
        run.write_json("predicted_sets.json", p)?;
    }
    let d = report.net.points.first().map_or(0, |p| p.len());
    if d >= 2 {
        let pts: Vec<Vec<f64>> = report.points.iter().map(|p| p.point.clone()).collect();
        let a = sets.map(|s| s.a.clone()).unwrap_or(crate::criteria::ADescriptor::Origin { dim: d });
        run.write("scatter.svg", svg::scatter(&pts, &report.net.points, &a).as_bytes())?;
    }
    if !report.snapshots.is_empty() {
        let fs: Vec<GridFn> = report.snapshots.iter().map(|s| s.f.clone()).collect();
        run.write("paths.svg", svg::paths(&fs).as_bytes())?;
        if snapshot_csv {
            for s in &report.snapshots {
                run.write(&format!("snapshots/r{}_n{}.csv", s.replica, s.n), s.f.to_csv_string()?.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn summary_text(v: &Value) -> String {
    match v.as_object() {
        Some(m) => m
            .iter()
            .map(|(k, v)| format!("{k:<22} {v}"))
            .collect::<Vec<_>>()
            .join("\n"),
        None => v.to_string(),
    }
}

pub fn simulate(g: &Globals, args: &SimulateArgs) -> Result<Outcome> {
    let mut cfg = config(g)?;
    if let Some(n) = args.n_max {
        cfg.simulation.n_max = n;
    }
    cfg.simulation.validate()?;
    let workers = args.streams.unwrap_or_else(crate::sim::runner::default_workers).max(1);
    let model = cfg.model.build()?;
    let mut run = RunDir::create(g.out.as_deref(), "simulate", &cfg, vec![cfg.seed], workers)?;
    let out = simulate_into(&mut run, &cfg, model, workers, args.snapshot_csv)?;
    let dir = run.root().to_path_buf();
    run.finish(out.summary.clone())?;
    Ok(Outcome {
        status: out.status,
        text: summary_text(&out.summary),
        report: out.summary,
        out_dir: Some(dir),
    })
}

#[derive(Debug, Clone, Default)]
pub struct Example8Args {
    pub k_max: Option<u32>,
    pub mode: Option<Example8Mode>,
    pub kappa: Option<f64>,
    pub streams: Option<usize>,
}

pub const ENVELOPE_PROBES: usize = 1000;
pub const Q_ENUM: u64 = 1000;

pub fn example8(g: &Globals, args: &Example8Args) -> Result<Outcome> {
    let mut cfg = match &g.config {
        Some(_) => config(g)?,
        None => RunConfig {
            model: ModelConfig::example8(StarSet::single(vec![1.0, 0.0])?, Example8Mode::ExactLog),
            normalizer: None,
            classifier: Default::default(),
            queries: Vec::new(),
            simulation: Default::default(),
            seed: g.seed.unwrap_or(0),
        },
    };
    if !matches!(
        cfg.model.kind,
        ModelKind::Example8 | ModelKind::Example8Exact | ModelKind::Example8Scaled
    ) {
        return Err(Error::Input("example8 needs a block-model config (model.kind \"example8\")".into()));
    }
    if let Some(m) = args.mode {
        cfg.model.kind = ModelKind::Example8;
        cfg.model.mode = Some(m);
        if m == Example8Mode::ExactLog {
            cfg.model.kappa = None;
        }
    }
    if args.k_max.is_some() {
        cfg.model.k_max = args.k_max;
    }
    if args.kappa.is_some() {
        cfg.model.kappa = args.kappa;
    }
    cfg.model = cfg.model.resolved()?;
    let cfg = cfg.resolved()?;
    let model = cfg.model.build()?;
    let m8 = model.example8().expect("block model").clone();
    let k_max = cfg.model.k_max.expect("resolved");
    let checks = m8.verify_block_identities(k_max);
    let qmass = m8.q_mass_bound(Q_ENUM);
    let mut status = Status::Ok;
    if checks.iter().any(|c| !c.pass) || !qmass.below_half {
        status = Status::PropertyFailure;
    }
    let workers = args.streams.unwrap_or_else(crate::sim::runner::default_workers).max(1);
    let mut run = RunDir::create(g.out.as_deref(), "example8", &cfg, vec![cfg.seed], workers)?;
    let mut doc = json!({
        "mode": m8.mode(),
        "k_max": k_max,
        "identities": checks,
        "q_mass": qmass,
    });
    match m8.mode() {
        Example8Mode::ExactLog => {
            let probes = envelope_probes(k_max, ENVELOPE_PROBES);
            let failures = probes.iter().filter(|p| !envelope_holds(p)).count();
            if failures > 0 {
                status = Status::PropertyFailure;
            }
            doc["envelope"] = json!({ "probes": probes.len(), "failures": failures });
            let crit = engine(&cfg, model)?;
            doc["alpha0"] = match crit.alpha0() {
                Ok(a) => serde_json::to_value(a)?,
                Err(Error::Undecided(m)) => {
                    status = status.worst(Status::Undecided);
                    json!({ "undecided": m })
                }
                Err(e) => return Err(e),
            };
        }
        Example8Mode::Scaled => {
            let out = simulate_into(&mut run, &cfg, model, workers, false)?;
            status = status.worst(out.status);
            doc["simulation"] = out.summary;
        }
    }
    run.write_json("example8.json", &doc)?;
    let dir = run.root().to_path_buf();
    let passed = doc["identities"].as_array().map_or(0, |a| a.iter().filter(|c| c["pass"] == true).count());
    let mut text = format!(
        "identities            {passed}/{} pass\nq-mass upper bound    {} ({})",
        doc["identities"].as_array().map_or(0, |a| a.len()),
        format_f64(qmass.total_upper),
        if qmass.below_half { "< 1/2" } else { "NOT < 1/2" }
    );
    if let Some(e) = doc.get("envelope") {
        text.push_str(&format!("\nenvelope              {} probes, {} failures", e["probes"], e["failures"]));
    }
    if let Some(a) = doc.get("alpha0") {
        text.push_str(&format!("\nalpha0                [{}, {}]", a["lower"], a["upper"]));
    }
    if let Some(s) = doc.get("simulation") {
        text.push('\n');
        text.push_str(&summary_text(s));
    }
    run.finish(json!({ "status": status }))?;
    Ok(Outcome {
        status,
        report: doc,
        text,
        out_dir: Some(dir),
    })
}

/// Rounds to 12 decimals for display.
fn show(v: f64) -> String {
    format_f64((v * 1e12).round() / 1e12)
}

/// Reads a scalar grid function from CSV, writes its taut string to
/// `out` (default `<input>.taut.csv`) and reports both energies.
pub fn tautstring(g: &Globals, input: &Path, epsilon: f64) -> Result<Outcome> {
    let bytes = std::fs::read(input).map_err(|e| Error::Input(format!("cannot read {}: {e}", input.display())))?;
    let f = GridFn::read_csv(bytes.as_slice())?;
    if f.dim() != 1 {
        return Err(Error::Input(format!("expected a scalar function, got dimension {}", f.dim())));
    }
    let i_g = dirichlet_energy(&f)?.value;
    let sol = taut_string(&f, epsilon).map_err(|e| Error::Input(e.to_string()))?;
    let out = g.out.clone().unwrap_or_else(|| {
        let mut p = input.as_os_str().to_owned();
        p.push(".taut.csv");
        PathBuf::from(p)
    });
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&out, sol.minimizer.to_csv_string()?)?;
    let report = json!({
        "input": input.display().to_string(),
        "epsilon": epsilon,
        "energy": i_g,
        "taut_energy": sol.energy.value,
        "output": out.display().to_string(),
    });
    Ok(Outcome {
        status: Status::Ok,
        text: format!(
            "I(g)      = {}\nI(g_eps)  = {}\nminimizer in {}",
            show(i_g),
            show(sol.energy.value),
            out.display()
        ),
        report,
        out_dir: None,
    })
}

pub fn verify(_g: &Globals, filter: Option<&str>) -> Outcome {
    let results = verify::run(filter);
    let all = results.iter().all(|r| r.passed);
    let text = results
        .iter()
        .map(|r| format!("{} [{:>2}] {:<44} {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name, r.detail))
        .collect::<Vec<_>>()
        .join("\n");
    Outcome {
        status: if all { Status::Ok } else { Status::PropertyFailure },
        report: json!({ "passed": all, "checks": results }),
        text,
        out_dir: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn globals(config: Option<PathBuf>, out: &Path) -> Globals {
        Globals {
            config,
            out: Some(out.to_path_buf()),
            ..Default::default()
        }
    }

    #[test]
    fn criteria_disk_sweep() {
        let d = tempfile::tempdir().unwrap();
        let cfg = write(
            d.path(),
            "c.json",
            r#"{"model": {"kind": "gaussian", "cov": [[1,0],[0,1]]},
                "queries": [
                  {"type": "point", "x": [0.3, 0.4]},
                  {"type": "point", "x": [0.54, 0.72]},
                  {"type": "point", "x": [0.66, 0.88]},
                  {"type": "point", "x": [0.9, 1.2]}]}"#,
        );
        let o = criteria(&globals(Some(cfg), &d.path().join("run"))).unwrap();
        assert_eq!(o.status, Status::Ok);
        let got: Vec<&str> = o.report["results"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["result"]["overall"].as_str().unwrap())
            .collect();
        assert_eq!(got, ["member", "member", "non_member", "non_member"]);
        assert!(d.path().join("run/summary.csv").exists());
        assert!(d.path().join("run/manifest.json").exists());
    }

    #[test]
    fn empty_queries_succeed() {
        let d = tempfile::tempdir().unwrap();
        let cfg = write(d.path(), "c.json", r#"{"model": {"kind": "gaussian", "cov": [[1]]}}"#);
        let o = criteria(&globals(Some(cfg), &d.path().join("run"))).unwrap();
        assert_eq!(o.status, Status::Ok);
        assert_eq!(o.report["results"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn malformed_config_is_an_input_error() {
        let d = tempfile::tempdir().unwrap();
        let cfg = write(d.path(), "c.json", "{\"model\": {\"kind\": \"gaussian\", \"cov\": [[1]]},\n \"extra\": 1}");
        let e = criteria(&globals(Some(cfg), d.path())).unwrap_err();
        assert_eq!(status_of(&e), Status::InputError);
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn tautstring_ramp() {
        let d = tempfile::tempdir().unwrap();
        let f = GridFn::scalar_from_fn(16, |t| t).unwrap();
        let input = write(d.path(), "g.csv", &f.to_csv_string().unwrap());
        let o = tautstring(&Globals::default(), &input, 0.25).unwrap();
        assert!(o.text.starts_with("I(g)      = 1.0\nI(g_eps)  = 0.5625\n"), "{}", o.text);
        let back = GridFn::read_csv(std::fs::File::open(d.path().join("g.csv.taut.csv")).unwrap()).unwrap();
        assert_eq!(back.n_grid(), 16);
        let o = tautstring(&Globals::default(), &input, 2.0).unwrap();
        assert!(o.text.contains("I(g_eps)  = 0.0\n"), "{}", o.text);
        let bad = write(d.path(), "bad.csv", "t,f_1\n0,0\n0.5,x\n");
        assert!(matches!(tautstring(&Globals::default(), &bad, 0.1), Err(Error::Input(_))));
    }

    #[test]
    fn example8_exact_default() {
        let d = tempfile::tempdir().unwrap();
        let o = example8(&globals(None, d.path()), &Example8Args::default()).unwrap();
        assert_eq!(o.status, Status::Ok, "{}", o.text);
        assert_eq!(o.report["envelope"]["failures"], 0);
    }

    #[test]
    fn example8_rejects_bad_star() {
        let d = tempfile::tempdir().unwrap();
        let cfg = write(
            d.path(),
            "c.json",
            r#"{"model": {"kind": "example8", "star_set": {"segments": [{"sigma": 0.9, "z": [1, 0]}]}}}"#,
        );
        let e = example8(&globals(Some(cfg), d.path()), &Example8Args::default()).unwrap_err();
        assert_eq!(status_of(&e), Status::InputError);
        assert!(e.to_string().contains("normalization rule"), "{e}");
    }
}
