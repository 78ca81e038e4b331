use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use tensorfree::exec::Exec;
use tensorfree_cli::{run, ExperimentConfig};

#[derive(Parser)]
#[command(name = "tensorfree", version, about = "Seeded tensor free probability experiments with JSON reports")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base seed; every draw is a function of (seed, trial).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials (or samples, for axioms-check).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Dims schedule, e.g. `16x16,32x32`.
    #[arg(long, global = true, value_parser = parse_schedule)]
    dims: Option<Schedule>,
    /// The k in |estimate - target| <= k stderr.
    #[arg(long = "tol-mult", global = true)]
    tol_mult: Option<f64>,
    /// Write the report here instead of stdout; artifacts go next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for trial-level parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file with an ExperimentConfig; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Scenario parameter as key=JSON, e.g. `--set p_max=2`.
    #[arg(long = "set", global = true, value_parser = parse_kv)]
    set: Vec<(String, Value)>,
    /// Run trials sequentially.
    #[arg(long, global = true)]
    sequential: bool,
    /// Leave the wall time out of the report so reruns are byte-identical.
    #[arg(long = "no-timing", global = true)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Weingarten tables with closed-form and asymptotic checks.
    WgTable {
        #[arg(long)]
        p: Option<usize>,
        /// unitary, orthogonal or both.
        #[arg(long)]
        kind: Option<String>,
    },
    /// Monte Carlo two-copy twirls against the closed forms.
    TwirlCheck,
    /// Mixed tensor cumulants of independent locally invariant ensembles.
    LuiFreeness {
        #[arg(long = "p-max")]
        p_max: Option<usize>,
        /// Use the exact tensor-product family instead of sampling.
        #[arg(long)]
        exact: bool,
    },
    /// Semicircularity of partial transposes.
    PtSemicircle {
        /// Leg signs, e.g. `1,-1`.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
    },
    /// Asymptotic freeness of the partial transposes of one ensemble.
    PtFreeness {
        #[arg(long = "p-max")]
        p_max: Option<usize>,
    },
    /// Graph embeddings of bipartite ensembles.
    Embedding {
        /// star, grid, or a JSON graph object.
        #[arg(long)]
        graph: Option<String>,
        /// Number of bottom vertices of the star.
        #[arg(long)]
        r: Option<usize>,
        /// Independent copies on the edges instead of one shared matrix.
        #[arg(long)]
        independent: bool,
    },
    /// The bipartite central limit law and its histograms.
    Clt {
        /// Partial-sum sizes, e.g. `1,4,16,64`.
        #[arg(long = "n-list")]
        n_list: Option<String>,
    },
    /// Tensor probability space axioms on random matrices.
    AxiomsCheck,
    /// Run whatever scenario the --config file names.
    Run,
}

#[derive(Clone, Debug)]
struct Schedule(Vec<Vec<usize>>);

fn parse_schedule(s: &str) -> Result<Schedule, String> {
    s.split(',')
        .map(|tuple| {
            tuple
                .split('x')
                .map(|d| d.trim().parse::<usize>().map_err(|e| format!("bad dimension {d:?}: {e}")))
                .collect()
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Schedule)
}

fn parse_kv(s: &str) -> Result<(String, Value), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let v = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.to_string(), v))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',').map(|x| x.trim().parse::<T>().map_err(|e| anyhow::anyhow!("bad list entry {x:?}: {e}"))).collect()
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let g = &cli.global;
    let mut cfg = match &g.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ExperimentConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::new(""),
    };
    let mut params = match std::mem::take(&mut cfg.params) {
        Value::Object(m) => m,
        Value::Null => Default::default(),
        _ => bail!("config params must be a JSON object"),
    };
    let mut set = |k: &str, v: Value| {
        params.insert(k.to_string(), v);
    };
    let scenario = match &cli.command {
        Command::WgTable { p, kind } => {
            if let Some(p) = p {
                set("p", (*p).into());
            }
            if let Some(k) = kind {
                set("kind", k.clone().into());
            }
            "wg-table"
        }
        Command::TwirlCheck => "twirl-check",
        Command::LuiFreeness { p_max, exact } => {
            if let Some(p) = p_max {
                set("p_max", (*p).into());
            }
            if *exact {
                set("exact", true.into());
            }
            "lui-freeness"
        }
        Command::PtSemicircle { t } => {
            if let Some(t) = t {
                set("t", serde_json::to_value(parse_list::<i8>(t)?)?);
            }
            "pt-semicircle"
        }
        Command::PtFreeness { p_max } => {
            if let Some(p) = p_max {
                set("p_max", (*p).into());
            }
            "pt-freeness"
        }
        Command::Embedding { graph, r, independent } => {
            let mut gv = match graph.as_deref() {
                None => None,
                Some("star") => Some(serde_json::json!({"kind": "star"})),
                Some("grid") => Some(serde_json::json!({"kind": "grid"})),
                Some(json) => Some(serde_json::from_str(json).context("--graph is neither star, grid nor JSON")?),
            };
            if let Some(r) = r {
                let g = gv.get_or_insert_with(|| serde_json::json!({"kind": "star"}));
                g["r"] = (*r).into();
            }
            if let Some(g) = gv {
                set("graph", g);
            }
            if *independent {
                set("identical", false.into());
            }
            "embedding"
        }
        Command::Clt { n_list } => {
            if let Some(n) = n_list {
                set("n_list", serde_json::to_value(parse_list::<usize>(n)?)?);
            }
            "clt"
        }
        Command::AxiomsCheck => "axioms-check",
        Command::Run => {
            if cfg.scenario.is_empty() {
                bail!("`run` needs a --config file naming the scenario");
            }
            ""
        }
    };
    for (k, v) in &g.set {
        params.insert(k.clone(), v.clone());
    }
    if !scenario.is_empty() {
        if !cfg.scenario.is_empty() && cfg.scenario != scenario {
            bail!("the config file is for {:?}, not {scenario:?}", cfg.scenario);
        }
        cfg.scenario = scenario.into();
    }
    cfg.params = Value::Object(params);
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if g.trials.is_some() {
        cfg.trials = g.trials;
    }
    if let Some(d) = &g.dims {
        cfg.dims = d.0.clone();
    }
    if g.tol_mult.is_some() {
        cfg.tol_mult = g.tol_mult;
    }
    if g.out.is_some() {
        cfg.out = g.out.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.global.threads {
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
        #[cfg(not(feature = "parallel"))]
        if n > 1 {
            eprintln!("warning: built without the parallel feature; --threads {n} ignored");
        }
    }
    let cfg = build_config(cli)?;
    let exec = if cli.global.sequential { Exec::Sequential } else { Exec::Parallel };
    let mut report = run(&cfg, exec)?;
    if cli.global.no_timing {
        report.wall_time_s = None;
    }
    let json = report.to_json();
    match &cfg.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
        }
        None => println!("{json}"),
    }
    for f in report.failures() {
        eprintln!("FAIL {f}");
    }
    eprintln!("{}: {}", cfg.scenario, if report.pass { "pass" } else { "FAIL" });
    Ok(report.pass)
}
