//! Command-line front-end for the multiseq library.
//!
//! Exit codes: 0 success or Holds, 1 Fails (with a witness), 2 usage or
//! parse error, 3 inconclusive or budget exhausted.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use multiseq::corpus;
use multiseq::{
    automaton_to_dot, check_btp, cra_eval, cra_to_dot, cra_to_kseq, decompose_k, degree_of_sequentiality,
    falsify_lipschitz, first_disagreement, kseq_to_cra, parse_automaton, parse_cra, positivize, render_automaton,
    render_cra, sequentialize_btp1, BtpResult, Budget, CostRegisterAutomaton, Degree, Error, GroupElement,
    WeightedAutomaton,
};

const HOLDS: u8 = 0;
const FAILS: u8 = 1;
const USAGE: u8 = 2;
const INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "multiseq", version, about = "Multi-sequentiality of group-weighted automata")]
struct Cli {
    #[command(flatten)]
    limits: Limits,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Limits {
    /// Multiplier applied to the default exploration caps.
    #[arg(long, global = true, env = "MULTISEQ_BUDGET", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Word length for the valuedness estimate and for oracle comparisons.
    #[arg(long, global = true)]
    len_bound: Option<usize>,
    /// Initial delay threshold for determinization and decomposition.
    #[arg(long, global = true)]
    threshold: Option<u64>,
}

impl Limits {
    fn budget(&self) -> Budget {
        Budget {
            len_bound: self.len_bound,
            threshold: self.threshold,
            ..Budget::scaled(usize::try_from(self.budget).unwrap_or(usize::MAX))
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the output set of an automaton or register automaton on a word.
    Eval { file: PathBuf, word: String },
    /// Decide the branching twinning property of order k.
    CheckBtp {
        #[arg(short)]
        k: usize,
        file: PathBuf,
    },
    /// Compute the degree of sequentiality, checking orders up to --max.
    Degree {
        #[arg(long, default_value_t = 8)]
        max: usize,
        file: PathBuf,
    },
    /// Build an equivalent sequential automaton (requires BTP-1).
    Determinize {
        file: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Split into at most k sequential automata, one file each plus a manifest.
    Decompose {
        #[arg(short)]
        k: usize,
        file: PathBuf,
        #[arg(short)]
        o: PathBuf,
    },
    /// Build an independent register automaton with one register per sequential part.
    ToCra {
        /// Number of registers; defaults to the degree of sequentiality.
        #[arg(short)]
        k: Option<usize>,
        #[arg(long, default_value_t = 8)]
        max: usize,
        file: PathBuf,
    },
    /// Turn an independent register automaton into a union of sequential automata.
    FromCra {
        file: PathBuf,
        /// Write each sequential automaton and a manifest here instead of printing the union.
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Rewrite a free-group register automaton into one whose values avoid inverse letters.
    Positivize { file: PathBuf },
    /// Pump a BTP-k counterexample into pairs violating the Lipschitz bound L.
    FalsifyLip {
        #[arg(short)]
        k: usize,
        #[arg(short = 'L')]
        l: u64,
        file: PathBuf,
    },
    /// Compare two automata or register automata on all words up to --len-bound (default 6).
    OracleEquiv { left: PathBuf, right: PathBuf },
    /// Print a Graphviz rendering.
    ExportDot { file: PathBuf },
    /// List the reference automata, or write them to a directory.
    Corpus {
        #[arg(short)]
        o: Option<PathBuf>,
    },
}

/// Either kind of document.
enum Machine {
    Wa(WeightedAutomaton),
    Cra(CostRegisterAutomaton),
}

impl Machine {
    fn alphabet(&self) -> &[char] {
        match self {
            Machine::Wa(w) => w.alphabet(),
            Machine::Cra(c) => c.alphabet(),
        }
    }

    fn eval(&self, word: &[char]) -> multiseq::Result<std::collections::BTreeSet<GroupElement>> {
        match self {
            Machine::Wa(w) => w.eval(word),
            Machine::Cra(c) => cra_eval(c, word),
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn located(path: &Path, e: Error) -> anyhow::Error {
    anyhow::Error::new(e).context(path.display().to_string())
}

fn load_wa(path: &Path) -> anyhow::Result<WeightedAutomaton> {
    parse_automaton(&read(path)?).map_err(|e| located(path, e))
}

fn load_cra(path: &Path) -> anyhow::Result<CostRegisterAutomaton> {
    parse_cra(&read(path)?).map_err(|e| located(path, e))
}

fn load_any(path: &Path) -> anyhow::Result<Machine> {
    let text = read(path)?;
    let is_cra = serde_json::from_str::<serde_json::Value>(&text).ok().is_some_and(|v| v.get("registers").is_some());
    if is_cra { parse_cra(&text).map(Machine::Cra) } else { parse_automaton(&text).map(Machine::Wa) }
        .map_err(|e| located(path, e))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn show_set(set: &std::collections::BTreeSet<GroupElement>) -> String {
    let items: Vec<String> = set.iter().map(ToString::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

fn word_text(word: &[char]) -> String {
    if word.is_empty() {
        "ε".into()
    } else {
        word.iter().collect()
    }
}

/// Writes machines as `machine_<i>.json` plus `manifest.json`.
fn write_machines(dir: &Path, source: &Path, k: Option<usize>, machines: &[WeightedAutomaton]) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut files = Vec::new();
    for (i, m) in machines.iter().enumerate() {
        let name = format!("machine_{}.json", i + 1);
        write(&dir.join(&name), &render_automaton(m))?;
        files.push(name);
    }
    let manifest = serde_json::json!({
        "source": source.display().to_string(),
        "k": k,
        "machines": files,
    });
    write(&dir.join("manifest.json"), &format!("{}\n", serde_json::to_string_pretty(&manifest)?))
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let budget = cli.limits.budget();
    match cli.command {
        Command::Eval { file, word } => {
            let m = load_any(&file)?;
            let word: Vec<char> = word.chars().collect();
            if let Some(a) = word.iter().find(|a| !m.alphabet().contains(a)) {
                return Err(Error::UnknownLetter(*a).into());
            }
            println!("{}", show_set(&m.eval(&word)?));
            Ok(HOLDS)
        }
        Command::CheckBtp { k, file } => {
            let w = load_wa(&file)?;
            match check_btp(&w, k, &budget)? {
                BtpResult::Holds => {
                    println!("BTP-{k} holds");
                    Ok(HOLDS)
                }
                BtpResult::Fails(c) => {
                    println!("BTP-{k} fails");
                    print!("{}", c.render(&w));
                    Ok(FAILS)
                }
                BtpResult::Inconclusive(why) => {
                    println!("BTP-{k} inconclusive: {why}");
                    Ok(INCONCLUSIVE)
                }
            }
        }
        Command::Degree { max, file } => {
            let w = load_wa(&file)?;
            match degree_of_sequentiality(&w, max, &budget)? {
                Degree::Exactly(d) => println!("{d}"),
                Degree::AtLeast(d) => println!(">={d}"),
            }
            Ok(HOLDS)
        }
        Command::Determinize { file, o } => {
            let w = load_wa(&file)?;
            let seq = sequentialize_btp1(&w, &budget)?;
            let text = render_automaton(&seq);
            match o {
                Some(path) => write(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(HOLDS)
        }
        Command::Decompose { k, file, o } => {
            let w = load_wa(&file)?;
            let machines = decompose_k(&w, k, &budget)?;
            write_machines(&o, &file, Some(k), &machines)?;
            println!("wrote {} machines to {}", machines.len(), o.display());
            Ok(HOLDS)
        }
        Command::ToCra { k, max, file } => {
            let w = load_wa(&file)?;
            let k = match k {
                Some(k) => k,
                None => match degree_of_sequentiality(&w, max, &budget)? {
                    Degree::Exactly(d) => d,
                    Degree::AtLeast(d) => return Err(anyhow!("degree of sequentiality is at least {d}")),
                },
            };
            let machines = decompose_k(&w, k, &budget)?;
            print!("{}", render_cra(&kseq_to_cra(&machines)?));
            Ok(HOLDS)
        }
        Command::FromCra { file, o } => {
            let c = load_cra(&file)?;
            let machines = cra_to_kseq(&c)?;
            match o {
                Some(dir) => {
                    write_machines(&dir, &file, None, &machines)?;
                    println!("wrote {} machines to {}", machines.len(), dir.display());
                }
                None => print!("{}", render_automaton(&WeightedAutomaton::union_all(&machines)?)),
            }
            Ok(HOLDS)
        }
        Command::Positivize { file } => {
            let c = load_cra(&file)?;
            let p = positivize(&c, &budget)?;
            eprintln!("residual bound N = {}, {} states", p.bound, p.automaton.num_states());
            print!("{}", render_cra(&p.automaton));
            Ok(HOLDS)
        }
        Command::FalsifyLip { k, l, file } => {
            let w = load_wa(&file)?;
            let c = match check_btp(&w, k, &budget)? {
                BtpResult::Fails(c) => c,
                BtpResult::Holds => {
                    println!("BTP-{k} holds: no Lip-{k} violation exists");
                    return Ok(HOLDS);
                }
                BtpResult::Inconclusive(why) => {
                    println!("BTP-{k} inconclusive: {why}");
                    return Ok(INCONCLUSIVE);
                }
            };
            let wit = falsify_lipschitz(&w, &c, l)?;
            println!("Lip-{k} witness L={l}");
            for (i, (u, x)) in wit.pairs.iter().enumerate() {
                println!("pair {i}: word={} weight={x}", word_text(u));
            }
            for m in wit.margins(&w)? {
                println!("margin ({},{}): distance={} bound={}", m.i, m.j, m.weight_distance, m.bound);
            }
            Ok(FAILS)
        }
        Command::OracleEquiv { left, right } => {
            let len = cli.limits.len_bound.unwrap_or(6);
            let (a, b) = (load_any(&left)?, load_any(&right)?);
            if let (Machine::Wa(x), Machine::Wa(y)) = (&a, &b) {
                if let Some(u) = first_disagreement(x, y, len)? {
                    return differ(&u, &a, &b);
                }
            } else {
                if a.alphabet() != b.alphabet() {
                    return Err(Error::AlphabetMismatch.into());
                }
                for u in multiseq::words_up_to(a.alphabet(), len) {
                    if a.eval(&u)? != b.eval(&u)? {
                        return differ(&u, &a, &b);
                    }
                }
            }
            println!("equivalent on all words of length <= {len}");
            Ok(HOLDS)
        }
        Command::ExportDot { file } => {
            match load_any(&file)? {
                Machine::Wa(w) => print!("{}", automaton_to_dot(&w)),
                Machine::Cra(c) => print!("{}", cra_to_dot(&c)),
            }
            Ok(HOLDS)
        }
        Command::Corpus { o } => {
            if let Some(dir) = &o {
                fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            }
            for e in corpus::builtin_corpus() {
                let degree = e.expected_degree.map_or("none".to_string(), |d| d.to_string());
                let btp: Vec<String> = e.expected_btp.iter().map(|(k, r)| format!("{k}:{r:?}")).collect();
                println!("{} degree={degree} btp=[{}] ({})", e.name, btp.join(" "), e.provenance);
                if let Some(dir) = &o {
                    write(&dir.join(format!("{}.json", e.name)), &render_automaton(&e.automaton))?;
                }
            }
            for (name, c, note) in corpus::builtin_cras() {
                println!("{name} cra ({note})");
                if let Some(dir) = &o {
                    write(&dir.join(format!("{name}.cra.json")), &render_cra(&c))?;
                }
            }
            Ok(HOLDS)
        }
    }
}

fn differ(u: &[char], a: &Machine, b: &Machine) -> anyhow::Result<u8> {
    println!("differ on {}: {} vs {}", word_text(u), show_set(&a.eval(u)?), show_set(&b.eval(u)?));
    Ok(FAILS)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::Inconclusive(_)
            | Error::BudgetExceeded(_)
            | Error::StateCapExceeded { .. }
            | Error::SizeBoundExceeded { .. },
        ) => INCONCLUSIVE,
        Some(Error::BtpViolated { .. } | Error::NotTwinned(_) | Error::NotWordRelation(_)) => FAILS,
        _ => USAGE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
