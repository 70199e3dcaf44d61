use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use islarr_core::canonical::CanoOptions;
use islarr_core::checker::{SideConditions, Triple};
use islarr_core::syntax::{parse_heap, Exit};
use islarr_core::wpo::WpoBudget;

use crate::output::Format;

/// Resolved run configuration. Also the shape of `--config` files, where
/// every field is optional.
#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub pre: Option<PathBuf>,
    pub post: Option<PathBuf>,
    pub prog: Option<PathBuf>,
    pub exit: Exit,
    pub vmax: u64,
    /// Defaults to `vmax`.
    pub heap_cap: Option<usize>,
    pub loop_bound: usize,
    pub case_cap: usize,
    pub disjunct_cap: usize,
    pub format: Format,
    pub seed: u64,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = WpoBudget::default();
        RunConfig {
            pre: None,
            post: None,
            prog: None,
            exit: Exit::Ok,
            vmax: 4,
            heap_cap: None,
            loop_bound: b.loop_bound,
            case_cap: b.cano.case_cap,
            disjunct_cap: b.disjunct_cap,
            format: Format::Text,
            seed: 0,
            jobs: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: RunConfig = serde_json::from_str(&src).with_context(|| format!("in config {}", path.display()))?;
        // Relative input paths are taken from the config file's directory.
        if let Some(dir) = path.parent() {
            for p in [&mut cfg.pre, &mut cfg.post, &mut cfg.prog].into_iter().flatten() {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vmax == 0 || self.heap_cap == Some(0) || self.case_cap == 0 || self.disjunct_cap == 0 {
            bail!("vmax, heap-cap, case-cap and disjunct-cap must be positive");
        }
        if self.jobs == Some(0) {
            bail!("--jobs must be positive");
        }
        Ok(())
    }

    pub fn budget(&self) -> WpoBudget {
        WpoBudget {
            loop_bound: self.loop_bound,
            disjunct_cap: self.disjunct_cap,
            cano: CanoOptions { case_cap: self.case_cap, ..Default::default() },
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleFile {
    pub pre: String,
    pub prog: String,
    pub exit: Exit,
    pub post: String,
}

impl TripleFile {
    fn parse(&self) -> Result<Triple> {
        Ok(Triple::parse(&self.pre, &self.prog, self.exit, &self.post)?)
    }
}

/// A proof-rule instance in JSON.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleInstanceFile {
    pub rule: Option<String>,
    #[serde(default)]
    pub premises: Vec<TripleFile>,
    pub conclusion: TripleFile,
    /// Frame of Frame-Ok, as a symbolic heap.
    pub frame: Option<String>,
    #[serde(default)]
    pub side: SideConditions,
}

impl RuleInstanceFile {
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_str(&src).with_context(|| format!("in rule instance {}", path.display()))
    }

    pub fn into_parts(self, rule: Option<&str>) -> Result<(String, Vec<Triple>, SideConditions, Triple)> {
        let name = match (rule, self.rule) {
            (Some(r), _) => r.to_string(),
            (None, Some(r)) => r,
            (None, None) => bail!("no rule given"),
        };
        let premises = self.premises.iter().map(TripleFile::parse).collect::<Result<Vec<_>>>()?;
        let mut side = self.side;
        if let Some(f) = &self.frame {
            side.frame = Some(parse_heap(f).context("in frame")?);
        }
        Ok((name, premises, side, self.conclusion.parse()?))
    }
}
