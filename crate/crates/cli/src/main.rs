mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use islarr_core::checker::{
    check_rule_instance, check_triple_both, check_triple_logical, check_triple_semantic, expressiveness_diff,
    find_bugs, DiffStatus, Triple,
};
use islarr_core::gen::{random_cases, GenConfig};
use islarr_core::par;
use islarr_core::semantics::Universe;
use islarr_core::syntax::{parse_assertion, parse_command, Assertion, Command, Exit};
use islarr_core::wpo::{Wpo, WpoOptions};

use config::RunConfig;
use output::{Format, Out};

/// Exit code for usage, input and internal errors.
const EXIT_ERROR: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "islarr", version, about = "Incorrectness separation logic with arrays")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the weakest exact postcondition of a program.
    Wpo(Common),
    /// Check the validity of a triple.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Method::Semantic)]
        method: Method,
    },
    /// Report the satisfiable error disjuncts of the postcondition.
    FindBugs(Common),
    /// Compare symbolic postconditions with the concrete semantics.
    OracleDiff {
        #[command(flatten)]
        common: Common,
        /// Number of random instances to generate instead of reading files.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Validate an instance of a proof rule.
    CheckRule {
        #[command(flatten)]
        common: Common,
        /// Rule name, e.g. `Skip` or `StoreArr2`.
        #[arg(long)]
        rule: Option<String>,
        /// JSON file with the rule, premises, side conditions and conclusion.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Semantic,
    Logical,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ExitArg {
    Ok,
    Er,
}

impl From<ExitArg> for Exit {
    fn from(e: ExitArg) -> Exit {
        match e {
            ExitArg::Ok => Exit::Ok,
            ExitArg::Er => Exit::Er,
        }
    }
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Precondition file.
    #[arg(long)]
    pre: Option<PathBuf>,
    /// Postcondition file.
    #[arg(long)]
    post: Option<PathBuf>,
    /// Program file.
    #[arg(long)]
    prog: Option<PathBuf>,
    #[arg(long, value_enum)]
    exit: Option<ExitArg>,
    /// Largest value in the finite universe.
    #[arg(long)]
    vmax: Option<u64>,
    /// Largest heap domain considered.
    #[arg(long)]
    heap_cap: Option<usize>,
    /// Loop unrollings in the symbolic postcondition.
    #[arg(long)]
    loop_bound: Option<usize>,
    /// Largest term set split over by canonicalisation.
    #[arg(long)]
    case_cap: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON run configuration; explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$( if let Some(v) = &self.$f { cfg.$f = Some(v.clone()); } )*};
        }
        set!(pre, post, prog);
        if let Some(e) = self.exit {
            cfg.exit = e.into();
        }
        macro_rules! set_val {
            ($($f:ident),*) => {$( if let Some(v) = self.$f { cfg.$f = v; } )*};
        }
        set_val!(vmax, loop_bound, case_cap, seed);
        if self.heap_cap.is_some() {
            cfg.heap_cap = self.heap_cap;
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if self.jobs.is_some() {
            cfg.jobs = self.jobs;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn read(path: &Option<PathBuf>, what: &str) -> Result<String> {
    let p = path.as_ref().with_context(|| format!("missing --{what}"))?;
    std::fs::read_to_string(p).with_context(|| format!("cannot read {what} file {}", p.display()))
}

fn load_assertion(path: &Option<PathBuf>, what: &str) -> Result<Assertion> {
    let src = read(path, what)?;
    parse_assertion(&src).with_context(|| format!("in {what} file"))
}

fn load_command(path: &Option<PathBuf>) -> Result<Command> {
    let src = read(path, "prog")?;
    parse_command(&src).context("in prog file")
}

fn universe(cfg: &RunConfig, assertions: &[&Assertion], prog: &Command) -> Result<Universe> {
    let u = Universe::covering(assertions, &[prog], cfg.vmax)?.with_loop_bound(cfg.loop_bound);
    Ok(match cfg.heap_cap {
        Some(h) => u.with_heap_cap(h),
        None => u,
    })
}

fn cmd_wpo(cfg: &RunConfig, out: &mut Out<impl Write>) -> Result<u8> {
    let p = load_assertion(&cfg.pre, "pre")?;
    let c = load_command(&cfg.prog)?;
    let mut w = Wpo::new(WpoOptions { budget: cfg.budget(), ..Default::default() });
    let a = w.run(&p, &c, cfg.exit)?;
    out.wpo(&a, w.trace())?;
    Ok(0)
}

fn cmd_check(cfg: &RunConfig, method: Method, out: &mut Out<impl Write>) -> Result<u8> {
    let tr = Triple::new(
        load_assertion(&cfg.pre, "pre")?,
        load_command(&cfg.prog)?,
        cfg.exit,
        load_assertion(&cfg.post, "post")?,
    );
    let u = universe(cfg, &[&tr.pre, &tr.post], &tr.prog)?;
    let status = match method {
        Method::Semantic => {
            let v = check_triple_semantic(&tr, &u)?;
            out.verdict(&v)?;
            v.status
        }
        Method::Logical => {
            let v = check_triple_logical(&tr, &u, &cfg.budget())?;
            out.verdict(&v)?;
            v.status
        }
        Method::Both => {
            let b = check_triple_both(&tr, &u, &cfg.budget())?;
            if !b.agree {
                log::error!(
                    "checkers disagree (semantic {}, logical {}): this is a bug in islarr",
                    b.semantic.status,
                    b.logical.status
                );
            }
            out.both(&b)?;
            b.status()
        }
    };
    Ok(status.exit_code() as u8)
}

fn cmd_find_bugs(cfg: &RunConfig, out: &mut Out<impl Write>) -> Result<u8> {
    let p = load_assertion(&cfg.pre, "pre")?;
    let c = load_command(&cfg.prog)?;
    let u = universe(cfg, &[&p], &c)?;
    let r = find_bugs(&p, &c, &u, &cfg.budget())?;
    out.bugs(&r)?;
    Ok(0)
}

fn diff_code(s: DiffStatus) -> u8 {
    match s {
        DiffStatus::Pass => 0,
        DiffStatus::Fail => 1,
        DiffStatus::BoundedPass => 2,
    }
}

fn cmd_oracle_diff(cfg: &RunConfig, count: Option<usize>, out: &mut Out<impl Write>) -> Result<u8> {
    let Some(n) = count else {
        let p = load_assertion(&cfg.pre, "pre")?;
        let c = load_command(&cfg.prog)?;
        let u = universe(cfg, &[&p], &c)?;
        let r = expressiveness_diff(&p, &c, cfg.exit, &u, &cfg.budget())?;
        out.diff(&r)?;
        return Ok(diff_code(r.status));
    };
    let cases = random_cases(cfg.seed, n, GenConfig::default());
    let budget = cfg.budget();
    let results = par::with_jobs(cfg.jobs, || {
        par::map(&cases, |g| -> std::result::Result<_, String> {
            let u = universe(cfg, &[&g.pre], &g.prog).map_err(|e| e.to_string())?;
            expressiveness_diff(&g.pre, &g.prog, g.exit, &u, &budget).map_err(|e| e.to_string())
        })
    });
    let rows: Vec<output::CorpusRow> = cases
        .iter()
        .zip(results)
        .map(|(g, r)| output::CorpusRow::new(g.index, &g.pre, &g.prog, g.exit, r))
        .collect();
    let worst = rows.iter().map(|r| r.code()).max().unwrap_or(0);
    out.corpus(cfg.seed, &rows)?;
    Ok(worst)
}

fn cmd_check_rule(cfg: &RunConfig, rule: Option<&str>, instance: Option<&PathBuf>, out: &mut Out<impl Write>) -> Result<u8> {
    let (name, premises, side, conclusion) = match instance {
        Some(path) => config::RuleInstanceFile::load(path)?.into_parts(rule)?,
        None => {
            let Some(rule) = rule else { bail!("missing --rule or --instance") };
            let tr = Triple::new(
                load_assertion(&cfg.pre, "pre")?,
                load_command(&cfg.prog)?,
                cfg.exit,
                load_assertion(&cfg.post, "post")?,
            );
            (rule.to_string(), Vec::new(), Default::default(), tr)
        }
    };
    let r = check_rule_instance(&name, &premises, &side, &conclusion)?;
    out.rule(&r)?;
    Ok(if r.accepted { 0 } else { 1 })
}

fn run(cli: Cli) -> Result<u8> {
    let common = match &cli.cmd {
        Cmd::Wpo(c) | Cmd::FindBugs(c) => c,
        Cmd::Check { common, .. } | Cmd::OracleDiff { common, .. } | Cmd::CheckRule { common, .. } => common,
    };
    let cfg = common.resolve()?;
    let mut out = Out::new(cfg.format, std::io::stdout());
    par::with_jobs(cfg.jobs, || match &cli.cmd {
        Cmd::Wpo(_) => cmd_wpo(&cfg, &mut out),
        Cmd::Check { method, .. } => cmd_check(&cfg, *method, &mut out),
        Cmd::FindBugs(_) => cmd_find_bugs(&cfg, &mut out),
        Cmd::OracleDiff { count, .. } => cmd_oracle_diff(&cfg, *count, &mut out),
        Cmd::CheckRule { rule, instance, .. } => cmd_check_rule(&cfg, rule.as_deref(), instance.as_ref(), &mut out),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ISLARR_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config_defaults() {
        let c = Common { vmax: Some(6), loop_bound: Some(1), ..Default::default() };
        let cfg = c.resolve().unwrap();
        assert_eq!(cfg.vmax, 6);
        assert_eq!(cfg.loop_bound, 1);
        assert_eq!(cfg.budget().loop_bound, 1);
    }
}
