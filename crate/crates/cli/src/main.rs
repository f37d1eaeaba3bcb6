use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use algstat::complexity::{mutual_info_both, Oracle};
use algstat::enumerate::{kraft_sum, table_to_string, BuildOptions, ComplexityTable, TableCache};
use algstat::infolaws::{expected_mi_audit, prob_mi, theta_suff_audit, JointFile, Statistic};
use algstat::laws::{bless, run_audits, Audit, Constants, LawParams, LawRunner};
use algstat::machine::{Budgets, Condition, MACHINE_VERSION};
use algstat::models_prob::{bernoulli_demo, deficiency_p, suffstat_p, DistClass, DistDescription, DistOptions};
use algstat::models_set::{suffstat, two_part, uniform_condition, ModelClass, ModelOptions, SetAnalyzer, SetDescription};
use algstat::skstats::{mx_in, sk, sk_csv, xr_bound_check, xr_csv};
use algstat::BitString;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

const DEFAULT_MAX_LEN: u32 = 24;
const DEFAULT_COND_LEN: u32 = 22;
const DEFAULT_SK_LEN: u32 = 22;

#[derive(Parser, Debug)]
#[command(name = "algstat", version, about = "Exact algorithmic statistics on a small total prefix machine")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Program length cap of the tables used by the command.
    #[arg(long, global = true)]
    max_len: Option<u32>,
    /// Step budget per run.
    #[arg(long, global = true, default_value_t = 100_000)]
    steps: u64,
    /// Output budget per run, in bits.
    #[arg(long, global = true, default_value_t = 4096)]
    max_out: usize,
    /// Enumeration worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Directory of cached tables.
    #[arg(long, global = true, env = "ALGSTAT_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct CondArgs {
    /// Condition on a literal bit string.
    #[arg(long, conflicts_with = "cond_set")]
    cond: Option<BitString>,
    /// Condition on the uniform model of a SetLang description.
    #[arg(long)]
    cond_set: Option<SetDescription>,
}

#[derive(Args, Debug, Clone, Copy)]
struct ModelArgs {
    /// Models shorter than this many bits are searched.
    #[arg(long, default_value_t = 24)]
    alpha_max: u32,
    /// Slack in bits.
    #[arg(long, default_value_t = 0)]
    beta: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SetClassArg {
    Any,
    Hamming,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DistClassArg {
    Any,
    Bernoulli,
    Uniform,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the effective configuration.
    Config,
    /// Build (or load) a complexity table and export it.
    Enumerate {
        #[command(flatten)]
        cond: CondArgs,
    },
    /// Complexity of a string, optionally conditional.
    K {
        x: BitString,
        #[command(flatten)]
        cond: CondArgs,
    },
    /// Algorithmic mutual information in both argument orders.
    Mi { x: BitString, y: BitString },
    /// Structure function curve as CSV.
    Structfn {
        x: BitString,
        #[arg(long, default_value_t = 24)]
        alpha_max: u32,
    },
    /// Sufficient statistics among set models.
    Suffstat {
        x: BitString,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = SetClassArg::Any)]
        class: SetClassArg,
    },
    /// Least model complexity with bounded deficiency for every string of a length.
    Scan {
        n: usize,
        #[arg(long, default_value_t = 0)]
        beta: i64,
        /// Complexity grid, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [8u32, 12, 16, 20, 24])]
        grid: Vec<u32>,
    },
    /// Members of the set of strings of complexity at most k, as CSV.
    Sk {
        k: u32,
        /// Also report the shared prefix of this member's index and the count.
        x: Option<BitString>,
    },
    /// Exact check of the small-probability bound on strings with long shared prefixes.
    Xr,
    /// Law audits against the frozen constants.
    Laws {
        /// Audit name or `all`; repeatable.
        #[arg(long, default_value = "all")]
        audit: Vec<String>,
        /// Constants file; the built-in file is used when absent.
        #[arg(long)]
        constants: Option<PathBuf>,
        /// Overwrite the constants file with the measured values.
        #[arg(long, requires = "constants")]
        bless: bool,
        /// Audit a joint model file instead of the built-in suite.
        #[arg(long)]
        joint: Option<PathBuf>,
        /// Statistic for the joint audit; overrides the file's.
        #[arg(long)]
        statistic: Option<Statistic>,
    },
    /// Hamming-class sufficiency flags for every string of length n.
    Bernoulli {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        beta: u64,
        #[arg(long, default_value_t = 24)]
        alpha_max: u32,
    },
    /// Probabilistic models: deficiency under a distribution or sufficient statistics.
    Probstat {
        x: BitString,
        /// DistLang description; without it the model search runs.
        #[arg(long)]
        dist: Option<DistDescription>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = DistClassArg::Any)]
        class: DistClassArg,
    },
}

/// Resolved settings shared by all commands.
#[derive(Debug)]
struct Config {
    budgets: Budgets,
    max_len: Option<u32>,
    models: ModelOptions,
    workers: usize,
    cache_dir: Option<PathBuf>,
    out: Option<PathBuf>,
}

impl Config {
    fn from_common(c: &Common) -> Result<Config> {
        if c.max_out == 0 {
            bail!("--max-out must be positive");
        }
        if c.max_len == Some(0) {
            bail!("--max-len must be positive");
        }
        Ok(Config {
            budgets: Budgets::new(c.steps, c.max_out)?,
            max_len: c.max_len,
            models: ModelOptions::default(),
            workers: c.workers,
            cache_dir: c.cache_dir.clone(),
            out: c.out.clone(),
        })
    }

    fn render(&self, constants: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "machine = {MACHINE_VERSION}");
        let _ = writeln!(s, "max_len = {}", self.max_len.unwrap_or(DEFAULT_MAX_LEN));
        let _ = writeln!(s, "cond_max_len = {}", self.max_len.unwrap_or(DEFAULT_COND_LEN));
        let _ = writeln!(s, "steps = {}", self.budgets.max_steps);
        let _ = writeln!(s, "max_out = {}", self.budgets.max_output);
        let _ = writeln!(s, "union_depth = {}", self.models.union_depth);
        let _ = writeln!(s, "union_width = {}", self.models.union_width);
        let _ = writeln!(s, "list_cap = {}", self.models.list_cap);
        let _ = writeln!(s, "alpha_bound = {}", self.models.bound);
        let dir = self.cache_dir.as_ref().map_or("none".to_string(), |d| d.display().to_string());
        let _ = writeln!(s, "cache_dir = {dir}");
        let _ = writeln!(s, "constants = {constants}");
        s
    }
}

enum Status {
    Ok,
    AuditFailed,
}

struct Session {
    config: Config,
    cache: TableCache,
    oracle: Oracle,
}

impl Session {
    fn new(config: Config) -> Session {
        let opts = BuildOptions { workers: config.workers, ..BuildOptions::default() };
        let cache = match &config.cache_dir {
            Some(d) => TableCache::with_dir(d, opts),
            None => TableCache::in_memory(),
        };
        let oracle = Oracle::new(config.budgets);
        Session { config, cache, oracle }
    }

    fn table(&self, max_len: u32, cond: &Condition) -> Result<Arc<ComplexityTable>> {
        let budgets = &self.config.budgets;
        if self.cache.lookup(max_len, cond, budgets)?.is_none() {
            eprintln!(
                "warning: no cached table for L={max_len} ({}); building it now. Prebuild with `algstat enumerate --max-len {max_len}`.",
                cond.fingerprint()
            );
        }
        Ok(self.cache.get_or_build(max_len, cond, budgets)?.0)
    }

    fn condition(&self, args: &CondArgs) -> Result<Condition> {
        Ok(match (&args.cond, &args.cond_set) {
            (Some(s), _) => Condition::Str(s.clone()),
            (None, Some(d)) => uniform_condition(d, self.config.models.denote_cap)?,
            (None, None) => Condition::None,
        })
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.config.out {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn run(cli: Cli) -> Result<Status> {
    let config = Config::from_common(&cli.common)?;
    let s = Session::new(config);
    let models = s.config.models;
    match cli.command {
        Command::Config => s.emit(&s.config.render("built-in"))?,
        Command::Enumerate { cond } => {
            let c = s.condition(&cond)?;
            let default = if matches!(c, Condition::None) { DEFAULT_MAX_LEN } else { DEFAULT_COND_LEN };
            let l = s.config.max_len.unwrap_or(default);
            let table = s.table(l, &c)?;
            match &s.config.out {
                Some(_) => s.emit(&table_to_string(&table))?,
                None => println!(
                    "L={l} condition={} outputs={} programs={} kraft={}",
                    table.condition,
                    table.len(),
                    table.program_count(),
                    kraft_sum(&table)
                ),
            }
        }
        Command::K { x, cond } => {
            let c = s.condition(&cond)?;
            let text = if matches!(c, Condition::None) {
                let l = s.config.max_len.unwrap_or(DEFAULT_MAX_LEN);
                let table = s.table(l, &c)?;
                let e = table.get(&x).ok_or_else(|| algstat::Error::Absent { x: x.to_string(), cap: l })?;
                format!("K={} witness={} m={}\n", e.k, e.witness, e.m)
            } else {
                let found = s.oracle.shortest(&x, &c)?;
                let found = found.ok_or_else(|| anyhow::anyhow!("no program outputs {x} under the condition"))?;
                format!("K={} witness={}\n", found.k, found.witness)
            };
            s.emit(&text)?;
        }
        Command::Mi { x, y } => {
            let (a, b) = mutual_info_both(&s.oracle, &x, &y)?;
            let mut text = String::new();
            for r in [a, b] {
                let _ = writeln!(text, "I({}:{})={} K(x)={} K(y)={} K(pair)={}", r.x, r.y, r.info, r.kx, r.ky, r.kxy);
            }
            s.emit(&text)?;
        }
        Command::Structfn { x, alpha_max } => {
            let curve = SetAnalyzer::new(&s.oracle, models).structfn(&x, alpha_max)?;
            s.emit(&curve.to_csv())?;
        }
        Command::Suffstat { x, model, class } => {
            let class = match class {
                SetClassArg::Any => ModelClass::Any,
                SetClassArg::Hamming => ModelClass::HammingOnly,
            };
            let r = suffstat(&x, model.beta, model.alpha_max, class, &models)?;
            let mut text = String::new();
            let _ = writeln!(text, "lambda_min={}", r.lambda_min);
            let _ = writeln!(text, "class_lambda_min={}", r.class_lambda_min.map_or("none".into(), |v| v.to_string()));
            let _ = writeln!(text, "minimal={}", r.minimal.as_ref().map_or("none".into(), |d| d.to_string()));
            let _ = writeln!(text, "desc,len,log_size,two_part");
            for d in &r.optimal {
                let _ = writeln!(text, "{d},{},{},{}", d.len(), d.log_size(), two_part(d));
            }
            s.emit(&text)?;
        }
        Command::Scan { n, beta, grid } => {
            let r = SetAnalyzer::new(&s.oracle, models).nonstoch_scan(n, &grid, beta)?;
            let mut text = String::from("x,least_alpha\n");
            for (x, a) in &r.per_string {
                let _ = writeln!(text, "{x},{}", a.map_or("none".into(), |v| v.to_string()));
            }
            s.emit(&text)?;
        }
        Command::Sk { k, x } => {
            let table = s.table(s.config.max_len.unwrap_or(DEFAULT_SK_LEN), &Condition::None)?;
            let index = sk(&table, k)?;
            let text = match x {
                Some(x) => {
                    let m = mx_in(&index, &x)?;
                    format!("x={} k={} index={} count={} m={}\n", m.x, m.k, m.index, m.count_word, m.m)
                }
                None => sk_csv(&index),
            };
            s.emit(&text)?;
        }
        Command::Xr => {
            let table = s.table(s.config.max_len.unwrap_or(DEFAULT_SK_LEN), &Condition::None)?;
            let rows = xr_bound_check(&table)?;
            let mut text = String::new();
            for r in &rows {
                let verdict = if r.pass() { "PASS" } else { "FAIL" };
                let _ = writeln!(text, "{verdict} r={} size={} sum={} bound={} slices={}", r.r, r.size, r.sum, r.bound, r.slices_hold);
            }
            match &s.config.out {
                Some(_) => {
                    s.emit(&xr_csv(&rows))?;
                    print!("{text}");
                }
                None => print!("{text}"),
            }
            if !rows.iter().all(|r| r.pass()) {
                return Ok(Status::AuditFailed);
            }
        }
        Command::Laws { audit, constants, bless: do_bless, joint, statistic } => {
            if let Some(path) = joint {
                return joint_audit(&s, &path, statistic);
            }
            let mut table = match &constants {
                Some(p) => std::fs::read_to_string(p)
                    .with_context(|| format!("reading {}", p.display()))?
                    .parse::<Constants>()?,
                None => Constants::builtin(),
            };
            let audits = parse_audits(&audit)?;
            let params = LawParams {
                table_len: s.config.max_len.unwrap_or(LawParams::default().table_len),
                ..LawParams::default()
            };
            let runner = LawRunner { oracle: &s.oracle, cache: &s.cache, params, models };
            let lines = run_audits(&runner, &audits, &table)?;
            if do_bless {
                bless(&lines, &mut table);
                let path = constants.expect("clap enforces --constants with --bless");
                std::fs::write(&path, table.to_string()).with_context(|| format!("writing {}", path.display()))?;
                eprintln!("blessed {} constants into {}", table.len(), path.display());
            }
            let text: String = lines.iter().map(|l| format!("{l}\n")).collect();
            s.emit(&text)?;
            if !do_bless && !lines.iter().all(|l| l.pass()) {
                return Ok(Status::AuditFailed);
            }
        }
        Command::Bernoulli { n, beta, alpha_max } => {
            let rows = bernoulli_demo(&s.oracle, n, beta, alpha_max, &models)?;
            let mut text = String::from("x,weight,K,hamming_total,bernoulli_total,lambda_min,flagged\n");
            for r in rows {
                let bern = r.bernoulli_total.map_or("nan".into(), |v| v.to_string());
                let _ = writeln!(text, "{},{},{},{},{bern},{},{}", r.x, r.weight, r.k, r.hamming_total, r.lambda_min, r.flagged);
            }
            s.emit(&text)?;
        }
        Command::Probstat { x, dist, model, class } => {
            let cap = models.denote_cap;
            let mut text = String::new();
            match dist {
                Some(d) => {
                    let r = deficiency_p(&s.oracle, &x, &d, cap)?;
                    let _ = writeln!(text, "dist={d}");
                    let _ = writeln!(text, "mass={}", r.mass);
                    let _ = writeln!(text, "neglog={:.9}", r.neglog);
                    let _ = writeln!(text, "k_cond={}", r.k_cond);
                    let _ = writeln!(text, "raw={:.9}", r.raw);
                    let _ = writeln!(text, "norm={:.9}", r.norm);
                    let _ = writeln!(text, "typical={}", r.typical(model.beta));
                }
                None => {
                    let class = match class {
                        DistClassArg::Any => DistClass::Any,
                        DistClassArg::Bernoulli => DistClass::BernoulliOnly,
                        DistClassArg::Uniform => DistClass::UniformOnly,
                    };
                    let opts = DistOptions { sets: models, ..DistOptions::default() };
                    let r = suffstat_p(&x, model.beta, model.alpha_max, class, &opts)?;
                    let _ = writeln!(text, "lambda_min={}", r.lambda_min);
                    let _ = writeln!(text, "class_lambda_min={}", r.class_lambda_min.map_or("none".into(), |v| v.to_string()));
                    let _ = writeln!(text, "minimal={}", r.minimal.as_ref().map_or("none".into(), |d| d.to_string()));
                    let _ = writeln!(text, "optimal={}", r.optimal.len());
                }
            }
            s.emit(&text)?;
        }
    }
    Ok(Status::Ok)
}

fn parse_audits(names: &[String]) -> Result<Vec<Audit>> {
    let mut out = Vec::new();
    for n in names {
        if n == "all" {
            out.extend(Audit::ALL);
        } else {
            out.push(n.parse::<Audit>()?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Classical and algorithmic information of a user-supplied joint model.
fn joint_audit(s: &Session, path: &PathBuf, statistic: Option<Statistic>) -> Result<Status> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: JointFile = text.parse()?;
    let stat = statistic.or(file.statistic).unwrap_or(Statistic::Identity);
    let cap = s.config.models.denote_cap;
    let mi = prob_mi(&file.joint, cap)?;
    let e = expected_mi_audit(&file.joint, &s.oracle, cap)?;
    let t = theta_suff_audit(&file.joint, &stat, &s.oracle, 0, cap)?;
    let mut out = String::new();
    let _ = writeln!(out, "# statistic={stat}");
    let _ = writeln!(out, "# mi={:.9} h_theta={:.9} h_x={:.9}", mi.mi, mi.h_theta, mi.h_x);
    let _ = writeln!(out, "# expected={:.9} slack={:.9} model_len={}", e.expected, e.slack, e.model_len);
    let _ = writeln!(out, "# expected_deficiency={:.9} max_abs_claim_gap={}", t.expected_deficiency, t.max_abs_claim_gap);
    let _ = writeln!(out, "# probabilistically_sufficient={}", t.probabilistically_sufficient());
    let _ = writeln!(out, "theta,x,p,deficiency,claim_gap");
    for r in &t.rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.theta, r.x, r.p, r.deficiency, r.claim_gap);
    }
    s.emit(&out)?;
    Ok(Status::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::AuditFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
