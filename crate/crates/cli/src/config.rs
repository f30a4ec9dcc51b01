use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use slackcrn::{LinearMethod, SlackMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SlackRegular,
    SlackOptimized,
    Fsp,
    /// sFSP with the given return state.
    Sfsp(Vec<u32>),
    Buffer,
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::SlackRegular => "slack-regular".into(),
            Method::SlackOptimized => "slack-optimized".into(),
            Method::Fsp => "fsp".into(),
            Method::Sfsp(x) => format!("sfsp-{}", x.iter().map(u32::to_string).collect::<Vec<_>>().join("_")),
            Method::Buffer => "buffer".into(),
        }
    }

    /// Parses `slack-regular`, `fsp`, `sfsp:0,0`, ...
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "slack-regular" | "slack" => Method::SlackRegular,
            "slack-optimized" => Method::SlackOptimized,
            "fsp" => Method::Fsp,
            "buffer" => Method::Buffer,
            _ => match s.strip_prefix("sfsp:") {
                Some(rest) => Method::Sfsp(
                    rest.split(',').map(|v| v.trim().parse()).collect::<Result<_, _>>().context("sfsp return state")?,
                ),
                None => bail!("unknown method `{s}`"),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Stationary,
    Transient,
    Mfpt,
    Survival,
    Compare,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Stationary => "stationary",
            Task::Transient => "transient",
            Task::Mfpt => "mfpt",
            Task::Survival => "survival",
            Task::Compare => "compare",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).with_context(|| format!("unknown task `{s}`"))
    }
}

/// Region used by the FSP and sFSP builders.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    /// `W x <= N`, as for the slack network.
    #[default]
    Conservation,
    /// `x_i <= N` for every species.
    Rectangle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conservation {
    #[serde(rename = "W")]
    pub w: Vec<Vec<i64>>,
    #[serde(default)]
    pub u: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsaOptions {
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Censoring time; defaults to 100 times the matrix estimate.
    #[serde(default)]
    pub cap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: PathBuf,
    pub conservation: Conservation,
    #[serde(rename = "N")]
    pub n_sweep: Vec<i64>,
    pub methods: Vec<Method>,
    pub task: Task,
    #[serde(default)]
    pub x0: Option<Vec<u32>>,
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub region: RegionKind,
    #[serde(default)]
    pub solver: LinearMethod,
    #[serde(default)]
    pub ssa: Option<SsaOptions>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Free-form notes, e.g. where pinned rates come from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        // network paths are relative to the config file
        if cfg.network.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.network = dir.join(&cfg.network);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sweep.is_empty() {
            bail!("the N sweep is empty");
        }
        if self.n_sweep.windows(2).any(|w| w[1] <= w[0]) {
            bail!("the N sweep must be strictly increasing");
        }
        if self.methods.is_empty() {
            bail!("no methods selected");
        }
        if self.conservation.w.is_empty() {
            bail!("conservation.W has no rows");
        }
        let needs_x0 = !matches!(self.task, Task::Stationary);
        if needs_x0 && self.x0.is_none() {
            bail!("task `{}` needs x0", self.task.name());
        }
        if matches!(self.task, Task::Mfpt | Task::Survival | Task::Compare) && self.target.is_none() {
            bail!("task `{}` needs a target", self.task.name());
        }
        if matches!(self.task, Task::Transient | Task::Survival) && self.times.is_empty() {
            bail!("task `{}` needs a time grid", self.task.name());
        }
        if self.methods.iter().any(|m| matches!(m, Method::Fsp | Method::Sfsp(_) | Method::Buffer))
            && self.conservation.w.len() != 1
            && self.region == RegionKind::Conservation
        {
            log::info!("comparison methods use all {} conservation rows", self.conservation.w.len());
        }
        Ok(())
    }

    pub fn mode_of(method: &Method) -> SlackMode {
        match method {
            Method::SlackOptimized => SlackMode::Optimized,
            _ => SlackMode::Regular,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn methods_round_trip_through_json() {
        let v: Vec<Method> = serde_json::from_str(r#"["slack-regular", {"sfsp": [0, 0]}, "buffer"]"#).unwrap();
        assert_eq!(v, vec![Method::SlackRegular, Method::Sfsp(vec![0, 0]), Method::Buffer]);
        assert_eq!(Method::parse("sfsp:1,2").unwrap(), Method::Sfsp(vec![1, 2]));
        assert_eq!(Method::Sfsp(vec![1, 2]).label(), "sfsp-1_2");
    }

    #[test]
    fn sweep_must_increase() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"network": "x.crn", "conservation": {"W": [[1]]}, "N": [5, 5], "methods": ["fsp"], "task": "stationary"}"#,
        )
        .unwrap();
        assert!(cfg.validate().is_err());
    }
}
