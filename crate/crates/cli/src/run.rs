use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use slackcrn::export::{write_distribution_csv, write_series_csv};
use slackcrn::{
    accessibility, build_finite_buffer, build_fsp, build_generator, build_sfsp, build_slack, communication_classes,
    enumerate_states, estimate_mfpt, half_space_region, mfpt, parse_network, reachable_from, stationary_from, survival,
    transient, ConservationSpec, Distribution, Error, Generator, MfptEstimate, ReactionNetwork, Region, Target,
};

use crate::config::{ExperimentConfig, Method, RegionKind, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    /// A property of the truncation, such as an unreachable target under a
    /// finite buffer. Not a failure.
    Finding,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskResult {
    pub method: String,
    #[serde(rename = "N")]
    pub n: i64,
    pub task: &'static str,
    pub states: usize,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub results: Vec<TaskResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ssa: Option<MfptEstimate>,
}

impl Summary {
    pub fn failed(&self) -> bool {
        self.results.iter().any(|r| r.status == Status::Failed)
    }
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn build_method(net: &ReactionNetwork, cfg: &ExperimentConfig, method: &Method, n: i64) -> slackcrn::Result<Generator> {
    let w = &cfg.conservation.w;
    let bounds = vec![n; w.len()];
    let x0 = cfg.x0.as_deref();
    let region = || -> slackcrn::Result<Region> {
        match cfg.region {
            RegionKind::Conservation => half_space_region(net, w, &bounds, x0),
            RegionKind::Rectangle => Ok(Region::Rectangle(vec![n.max(0) as u32; net.n_species()])),
        }
    };
    match method {
        Method::SlackRegular | Method::SlackOptimized => {
            let mut spec = ConservationSpec { w: w.clone(), n: bounds.clone(), u: None, mode: ExperimentConfig::mode_of(method) };
            if let Some(u) = &cfg.conservation.u {
                spec = spec.with_u(u.clone());
            }
            let snet = build_slack(net, &spec, x0)?;
            let space = Arc::new(enumerate_states(&snet)?);
            build_generator(space, &snet)
        }
        Method::Fsp => {
            let x0 = x0.ok_or_else(|| Error::InvalidArgument("FSP needs x0".into()))?;
            build_fsp(net, region()?, x0)
        }
        Method::Sfsp(x_star) => build_sfsp(net, region()?, x_star),
        Method::Buffer => build_finite_buffer(net, w, &bounds, x0),
    }
}

fn label(gen: &Generator, i: usize) -> String {
    match gen.space().state(i) {
        Some(x) => format!("({})", x.iter().map(u32::to_string).collect::<Vec<_>>().join(",")),
        None => "sink".into(),
    }
}

/// Absorbing states reachable from `from`, outside `exclude`.
fn reachable_absorbing(gen: &Generator, from: usize, exclude: &[usize]) -> Vec<usize> {
    let seen = reachable_from(gen, from);
    let mut mark = vec![false; gen.dim()];
    seen.iter().for_each(|&i| mark[i] = true);
    communication_classes(gen)
        .into_iter()
        .filter(|c| c.is_absorbing() && mark[c.states[0]] && !exclude.contains(&c.states[0]))
        .map(|c| c.states[0])
        .collect()
}

struct Outcome {
    status: Status,
    residual: Option<f64>,
    mean: Option<f64>,
    flag: Option<String>,
}

fn is_finding(e: &Error) -> bool {
    matches!(e, Error::NonAccessibleTarget(_) | Error::AmbiguousClosedClass(_) | Error::EmptyTarget)
}

fn run_one(net: &ReactionNetwork, cfg: &ExperimentConfig, method: &Method, n: i64, out: &Path) -> TaskResult {
    let task = cfg.task;
    let file_name = format!("{}_{}_N{}.csv", task.name(), method.label(), n);
    let mut result = TaskResult {
        method: method.label(),
        n,
        task: task.name(),
        states: 0,
        status: Status::Failed,
        residual: None,
        mean: None,
        flag: None,
        error: None,
        file: None,
    };
    let gen = match build_method(net, cfg, method, n) {
        Ok(g) => g,
        Err(e) => {
            result.error = Some(e.to_string());
            return result;
        }
    };
    result.states = gen.space().len();
    match execute(&gen, cfg, &out.join(&file_name)) {
        Ok(o) => {
            result.status = o.status;
            result.residual = o.residual;
            result.mean = o.mean;
            result.flag = o.flag;
            result.file = Some(file_name);
        }
        Err(e) => {
            let finding = e.downcast_ref::<Error>().is_some_and(is_finding);
            result.status = if finding { Status::Finding } else { Status::Failed };
            result.error = Some(format!("{e:#}"));
        }
    }
    result
}

fn targets(gen: &Generator, cfg: &ExperimentConfig) -> Result<Vec<usize>> {
    let text = cfg.target.as_deref().context("no target given")?;
    let t = Target::parse(text, gen.space().species())?;
    Ok(gen.space().select(|x| t.matches(x)))
}

fn start(gen: &Generator, cfg: &ExperimentConfig) -> Result<usize> {
    let x0 = cfg.x0.as_deref().context("no x0 given")?;
    Ok(gen.space().require(x0)?)
}

fn execute(gen: &Generator, cfg: &ExperimentConfig, path: &Path) -> Result<Outcome> {
    let writer = || -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
    };
    let ok = |residual: Option<f64>, mean: Option<f64>| Outcome { status: Status::Ok, residual, mean, flag: None };
    match cfg.task {
        Task::Stationary => {
            let from = match cfg.x0.as_deref() {
                Some(_) => start(gen, cfg)?,
                None => 0,
            };
            let s = stationary_from(gen, from, cfg.solver)?;
            write_distribution_csv(&s.dist, writer()?)?;
            Ok(ok(Some(s.residual), None))
        }
        Task::Transient => {
            let p0 = Distribution::point(gen.space().clone(), start(gen, cfg)?);
            let laws = transient(gen, &p0.p, &cfg.times, None)?;
            let mut w = csv::Writer::from_writer(writer()?);
            let mut header = vec!["t".to_string()];
            header.extend(gen.space().species().iter().cloned());
            header.push("probability".into());
            w.write_record(&header)?;
            for (t, p) in cfg.times.iter().zip(&laws) {
                for (i, v) in p.iter().enumerate() {
                    let mut row = vec![format!("{t:e}")];
                    match gen.space().state(i) {
                        Some(x) => row.extend(x.iter().map(u32::to_string)),
                        None => row.extend(std::iter::repeat_n("sink".to_string(), gen.space().species().len())),
                    }
                    row.push(format!("{v:e}"));
                    w.write_record(&row)?;
                }
            }
            w.flush()?;
            let mass_err = laws.iter().map(|p| (p.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
            Ok(ok(Some(mass_err), None))
        }
        Task::Mfpt => {
            let k = targets(gen, cfg)?;
            let r = mfpt(gen, start(gen, cfg)?, &k, cfg.solver)?;
            let mut w = csv::Writer::from_writer(writer()?);
            w.write_record(["N", "mean", "residual"])?;
            w.write_record([gen.space().len().to_string(), format!("{:e}", r.mean()), format!("{:e}", r.residual)])?;
            w.flush()?;
            Ok(ok(Some(r.residual), Some(r.mean())))
        }
        Task::Survival => {
            let k = targets(gen, cfg)?;
            let s = survival(gen, start(gen, cfg)?, &k, &cfg.times)?;
            let rows: Vec<(f64, f64)> = cfg.times.iter().copied().zip(s).collect();
            write_series_csv(["t", "survival"], &rows, writer()?)?;
            Ok(ok(None, None))
        }
        Task::Compare => {
            let k = targets(gen, cfg)?;
            let from = start(gen, cfg)?;
            let classes = communication_classes(gen);
            let closed = classes.iter().filter(|c| c.closed).count();
            let absorbing = reachable_absorbing(gen, from, &k);
            let accessible = !k.is_empty() && accessibility(gen, from, &k)?;
            let fpt = mfpt(gen, from, &k, cfg.solver);
            let flag = (!absorbing.is_empty())
                .then(|| absorbing.iter().map(|&i| format!("absorbing state {}", label(gen, i))).collect::<Vec<_>>().join("; "));
            let mut w = csv::Writer::from_writer(writer()?);
            w.write_record(["states", "closed_classes", "reachable_absorbing", "accessible", "mfpt", "flag"])?;
            w.write_record([
                gen.space().len().to_string(),
                closed.to_string(),
                absorbing.len().to_string(),
                accessible.to_string(),
                fpt.as_ref().map_or_else(|e| e.to_string(), |r| format!("{:e}", r.mean())),
                flag.clone().unwrap_or_default(),
            ])?;
            w.flush()?;
            let status = if flag.is_some() || fpt.is_err() { Status::Finding } else { Status::Ok };
            let (residual, mean) = fpt.map_or((None, None), |r| (Some(r.residual), Some(r.mean())));
            Ok(Outcome { status, residual, mean, flag })
        }
    }
}

/// Runs every (method, N) pair concurrently, writes per-task CSVs, a summary
/// and a manifest under `cfg.out`.
pub fn run(cfg: &ExperimentConfig) -> Result<Summary> {
    cfg.validate()?;
    let text = std::fs::read_to_string(&cfg.network).with_context(|| format!("reading {}", cfg.network.display()))?;
    let net = parse_network(&text)?;
    if let Some(x0) = &cfg.x0 {
        anyhow::ensure!(x0.len() == net.n_species(), "x0 has {} entries for {} species", x0.len(), net.n_species());
        for (k, row) in cfg.conservation.w.iter().enumerate() {
            let v: i64 = row.iter().zip(x0).map(|(a, &b)| a * i64::from(b)).sum();
            anyhow::ensure!(v <= cfg.n_sweep[0], "x0 violates conservation row {k} at N = {}", cfg.n_sweep[0]);
        }
    }
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;

    let jobs: Vec<(&Method, i64)> = cfg.methods.iter().flat_map(|m| cfg.n_sweep.iter().map(move |&n| (m, n))).collect();
    let results: Vec<TaskResult> = jobs.par_iter().map(|&(m, n)| run_one(&net, cfg, m, n, &cfg.out)).collect();

    let mut files: Vec<String> = results.iter().filter_map(|r| r.file.clone()).collect();
    if cfg.task == Task::Mfpt {
        for m in &cfg.methods {
            let name = format!("mfpt_{}_sweep.csv", m.label());
            let mut w = csv::Writer::from_path(cfg.out.join(&name))?;
            w.write_record(["N", "mean", "residual"])?;
            for r in results.iter().filter(|r| r.method == m.label()) {
                let f = |v: Option<f64>| v.map_or_else(String::new, |v| format!("{v:e}"));
                w.write_record([r.n.to_string(), f(r.mean), f(r.residual)])?;
            }
            w.flush()?;
            files.push(name);
        }
    }

    let ssa = match (&cfg.ssa, cfg.task) {
        (Some(opts), Task::Mfpt) => {
            let t = Target::parse(cfg.target.as_deref().unwrap_or_default(), &net.species_names())?;
            let x0 = cfg.x0.clone().unwrap_or_default();
            let matrix = results.iter().rev().find_map(|r| r.mean);
            let cap = opts.cap.or(matrix.map(|m| 100.0 * m));
            Some(estimate_mfpt(&net, &x0, |x| t.matches(x), opts.n, opts.seed, cap)?)
        }
        _ => None,
    };

    let summary = Summary {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_hash: config_hash(cfg),
        config: cfg.clone(),
        results,
        ssa,
    };
    std::fs::write(cfg.out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    files.push("summary.json".into());
    let manifest = serde_json::json!({ "config_hash": summary.config_hash, "files": files });
    std::fs::write(cfg.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(summary)
}
