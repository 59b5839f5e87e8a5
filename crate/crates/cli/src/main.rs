use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use rankspan::cse::{parse_rooting, CseExpr, EditableIndex, StringDatabase};
use rankspan::slp::CnfSlp;
use rankspan::slp_index::SlpIndex;
use rankspan::string_index::StringIndex;
use rankspan::{Error, Mapping, Nat, VsetAutomaton};

/// Ranked direct access to the answers of a vset automaton over a string or
/// a straight-line program.
#[derive(Parser)]
#[command(name = "rankspan", version)]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report whether the automaton is functional and unambiguous.
    Validate {
        #[arg(long)]
        automaton: PathBuf,
    },
    /// Print the number of answers.
    Count {
        #[command(flatten)]
        input: Input,
    },
    /// Print the answers at the given ranks.
    Access {
        #[command(flatten)]
        input: Input,
        /// One-based rank.
        #[arg(long, conflicts_with = "index_range", required_unless_present = "index_range")]
        index: Option<String>,
        /// Inclusive rank range `a..b`.
        #[arg(long)]
        index_range: Option<String>,
        /// Variable order, e.g. `x2,x1`.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<String>>,
    },
    /// Evaluate an edit expression over a string database, then count or access.
    Edit {
        #[arg(long)]
        automaton: PathBuf,
        /// Grammar holding the database strings.
        #[arg(long)]
        db: PathBuf,
        /// Lines `name = Nonterminal`.
        #[arg(long)]
        roots: PathBuf,
        #[arg(long)]
        expr: PathBuf,
        #[arg(long, conflicts_with = "count")]
        index: Option<String>,
        #[arg(long)]
        count: bool,
        /// Disambiguate the automaton first if needed.
        #[arg(long)]
        disambiguate: bool,
    },
    /// Matrix multiplication counts for building and for random accesses.
    Bench {
        #[arg(long)]
        automaton: PathBuf,
        #[arg(long)]
        text: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Index the text repeated this many times.
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    automaton: PathBuf,
    #[arg(long, conflicts_with = "slp", required_unless_present = "slp")]
    text: Option<PathBuf>,
    #[arg(long)]
    slp: Option<PathBuf>,
    /// Disambiguate the automaton first if needed.
    #[arg(long)]
    disambiguate: bool,
}

#[allow(clippy::large_enum_variant)]
enum Index {
    Text(StringIndex),
    Slp(SlpIndex),
}

impl Index {
    fn count(&self) -> Nat {
        match self {
            Index::Text(i) => i.count(),
            Index::Slp(i) => i.count(),
        }
    }

    fn access(&mut self, t: &Nat) -> rankspan::Result<Mapping> {
        match self {
            Index::Text(i) => i.access(t),
            Index::Slp(i) => i.access(t),
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_automaton(path: &Path, disambiguate: bool) -> anyhow::Result<VsetAutomaton> {
    let a: VsetAutomaton = read(path)?.parse().with_context(|| path.display().to_string())?;
    if disambiguate && a.is_functional() && !a.is_unambiguous() {
        return Ok(a.disambiguate()?);
    }
    Ok(a)
}

fn load_text(path: &Path) -> anyhow::Result<Vec<char>> {
    let raw = read(path)?;
    let body = raw.strip_suffix('\n').map(|s| s.strip_suffix('\r').unwrap_or(s)).unwrap_or(&raw);
    Ok(body.chars().collect())
}

fn load_slp(path: &Path) -> anyhow::Result<CnfSlp> {
    let g: CnfSlp = read(path)?.parse().with_context(|| path.display().to_string())?;
    Ok(g.strongly_balance())
}

fn build(input: &Input, order: Option<&[String]>) -> anyhow::Result<(VsetAutomaton, Index)> {
    let a = load_automaton(&input.automaton, input.disambiguate)?;
    let order = match order {
        Some(names) => a.vars().order_from_names(names)?,
        None => a.vars().default_order(),
    };
    let index = match (&input.text, &input.slp) {
        (Some(t), _) => Index::Text(StringIndex::build_with_order(&a, &load_text(t)?, &order)?),
        (None, Some(s)) => Index::Slp(SlpIndex::build_with_order(&a, &load_slp(s)?, &order)?),
        (None, None) => bail!("one of --text or --slp is required"),
    };
    Ok((a, index))
}

fn parse_rank(s: &str) -> anyhow::Result<Nat> {
    s.trim().parse::<Nat>().map_err(|_| anyhow!(Error::Format { line: 0, message: format!("bad index `{s}`") }))
}

fn parse_range(s: &str) -> anyhow::Result<(Nat, Nat)> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| anyhow!(Error::Format { line: 0, message: format!("bad range `{s}`, expected a..b") }))?;
    Ok((parse_rank(a)?, parse_rank(b)?))
}

fn nat_json(n: &Nat) -> Value {
    match n.to_u64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

fn mapping_json(a: &VsetAutomaton, m: &Mapping) -> Value {
    let obj = a
        .vars()
        .names()
        .iter()
        .zip(m.positions())
        .map(|(name, p)| (name.clone(), nat_json(p)))
        .collect();
    Value::Object(obj)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Validate { automaton } => {
            let a = load_automaton(automaton, false)?;
            let functional = a.check_functional();
            let ambiguity = if functional.is_none() { a.check_unambiguous() } else { None };
            if cli.json {
                let out = json!({
                    "functional": functional.is_none(),
                    "unambiguous": functional.is_none() && ambiguity.is_none(),
                    "invalid_run": functional.as_ref().map(|w| w.describe(&a)),
                    "ambiguous_runs": ambiguity.as_ref().map(|(r1, r2)| vec![r1.describe(&a), r2.describe(&a)]),
                });
                println!("{out}");
            } else {
                match &functional {
                    None => println!("functional: yes"),
                    Some(w) => println!("functional: no\n  invalid run on {:?}: {}", w.word(), w.describe(&a)),
                }
                match (&functional, &ambiguity) {
                    (Some(_), _) => println!("unambiguous: not checked"),
                    (None, None) => println!("unambiguous: yes"),
                    (None, Some((r1, r2))) => {
                        println!("unambiguous: no\n  two runs on {:?} with the same mapping:", r1.word());
                        println!("  {}\n  {}", r1.describe(&a), r2.describe(&a));
                    }
                }
            }
        }
        Command::Count { input } => {
            let (_, index) = build(input, None)?;
            let n = index.count();
            if cli.json {
                println!("{}", json!({ "count": nat_json(&n) }));
            } else {
                println!("{n}");
            }
        }
        Command::Access { input, index, index_range, order } => {
            let (a, mut idx) = build(input, order.as_deref())?;
            let (from, to) = match (index, index_range) {
                (Some(t), _) => {
                    let t = parse_rank(t)?;
                    (t.clone(), t)
                }
                (None, Some(r)) => parse_range(r)?,
                (None, None) => bail!("one of --index or --index-range is required"),
            };
            let mut answers = Vec::new();
            let mut t = from;
            while t <= to {
                let m = idx.access(&t)?;
                if cli.json {
                    answers.push(json!({ "index": nat_json(&t), "mapping": mapping_json(&a, &m) }));
                } else {
                    println!("{}", m.display(a.vars()));
                }
                t = &t + 1;
            }
            if cli.json {
                println!("{}", Value::Array(answers));
            }
        }
        Command::Edit { automaton, db, roots, expr, index, count, disambiguate } => {
            let a = load_automaton(automaton, *disambiguate)?;
            let grammar: CnfSlp = read(db)?.parse().with_context(|| db.display().to_string())?;
            let rooting = parse_rooting(&read(roots)?).with_context(|| roots.display().to_string())?;
            let ex: CseExpr = read(expr)?.parse().with_context(|| expr.display().to_string())?;
            let database = StringDatabase::new(&grammar, &rooting)?;
            let mut idx = EditableIndex::new(&a, &database)?;
            let result = idx.evaluate(&ex)?;
            match index {
                Some(t) if !count => {
                    let m = idx.access(&result, &parse_rank(t)?)?;
                    if cli.json {
                        println!("{}", json!({ "mapping": mapping_json(&a, &m) }));
                    } else {
                        println!("{}", m.display(a.vars()));
                    }
                }
                _ => {
                    let n = idx.count(&result);
                    if cli.json {
                        println!("{}", json!({ "count": nat_json(&n), "fresh_rules": result.fresh }));
                    } else {
                        println!("{n}");
                    }
                }
            }
        }
        Command::Bench { automaton, text, trials, repeat, seed } => {
            let a = load_automaton(automaton, false)?;
            let w = load_text(text)?.repeat((*repeat).max(1));
            let mut idx = StringIndex::build(&a, &w)?;
            let build_mults = idx.multiplications().get();
            let total = idx.count();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut per_access = Vec::with_capacity(*trials);
            if !total.is_zero() {
                let bound = total.to_u64().unwrap_or(u64::MAX);
                for _ in 0..*trials {
                    let t = Nat::from(rng.gen_range(1..=bound));
                    idx.multiplications().reset();
                    idx.access(&t)?;
                    per_access.push(idx.multiplications().get());
                }
            }
            let mean = if per_access.is_empty() {
                0.0
            } else {
                per_access.iter().sum::<u64>() as f64 / per_access.len() as f64
            };
            let min = per_access.iter().min().copied().unwrap_or(0);
            let max = per_access.iter().max().copied().unwrap_or(0);
            let k = a.vars().len();
            if cli.json {
                let out = json!({
                    "n": w.len(),
                    "k": k,
                    "count": nat_json(&total),
                    "build_multiplications": build_mults,
                    "build_bound": (k + 1) * (2 * w.len() - 1),
                    "trials": per_access.len(),
                    "access_multiplications": { "mean": mean, "min": min, "max": max },
                });
                println!("{out}");
            } else {
                println!("n = {}, k = {k}, answers = {total}", w.len());
                println!("build: {build_mults} multiplications (bound {})", (k + 1) * (2 * w.len() - 1));
                println!("access: mean {mean:.1}, min {min}, max {max} over {} trials", per_access.len());
            }
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::OutOfRange { .. } | Error::EditIndex { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = exit_code(&err);
            if cli.json {
                println!("{}", json!({ "error": format!("{err:#}"), "exit_code": code }));
            }
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
