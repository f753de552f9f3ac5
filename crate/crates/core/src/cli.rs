//! Command-line front end. Exit codes: 0 accepted, 1 rejected, 2 usage or
//! input error, 3 a budget or arity cap prevented a definite answer.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::atm::{accepting_computation, analyze, pad_universal, Machine, MachineError, DEFAULT_CONFIG_BUDGET};
use crate::atm_reduction::{build_atm_instance, decode_and_validate};
use crate::derivation::{check_derivation, Derivation};
use crate::grammar::Grammar;
use crate::parser::{default_arity_cap, parse, ParseConfig, ParseError};
use crate::sat::{brute_force_sat, build_sat_instance, parse_dimacs, solve_run_budgeted, CnfFormula, SatError};

pub const EXIT_ACCEPT: u8 = 0;
pub const EXIT_REJECT: u8 = 1;
pub const EXIT_ERROR: u8 = 2;
pub const EXIT_UNDECIDED: u8 = 3;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "vwccg", version, about = "Recognition and reductions for CCG with rule restrictions")]
struct Cli {
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a grammar derives a string.
    Parse {
        grammar: PathBuf,
        /// Input tokens; each argument is split on whitespace.
        words: Vec<String>,
        /// Parse the empty string.
        #[arg(long, conflicts_with_all = ["words", "input_file"])]
        empty: bool,
        /// Read the input tokens from a file.
        #[arg(long)]
        input_file: Option<PathBuf>,
        #[arg(long)]
        arity_cap: Option<usize>,
        #[arg(long)]
        max_items: Option<usize>,
        /// Write the derivation document here when accepted.
        #[arg(long)]
        derivation: Option<PathBuf>,
        /// Print the derivation as indented text or DOT.
        #[arg(long, value_enum)]
        show: Option<Show>,
    },
    /// Verify a derivation document against a grammar.
    Check { grammar: PathBuf, derivation: PathBuf },
    /// Compile a CNF formula into a grammar and input string.
    ReduceSat {
        cnf: PathBuf,
        #[arg(long)]
        out_grammar: Option<PathBuf>,
        #[arg(long)]
        out_input: Option<PathBuf>,
        #[arg(long)]
        report: bool,
    },
    /// Decide a CNF formula by parsing its compiled instance.
    SolveSat {
        cnf: PathBuf,
        /// Compare against brute-force search.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        max_items: Option<usize>,
    },
    /// Simulate an alternating machine.
    RunAtm {
        machine: PathBuf,
        /// Input over the machine alphabet; `_` is the blank.
        #[arg(default_value = "")]
        input: String,
        /// Write an accepting computation here.
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CONFIG_BUDGET)]
        max_configs: usize,
    },
    /// Compile a machine and input into a grammar over the empty string.
    ReduceAtm {
        machine: PathBuf,
        #[arg(default_value = "")]
        input: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Registry document; defaults to the grammar path with `.meta.json`.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Decide machine acceptance by parsing the compiled grammar.
    SolveAtm {
        machine: PathBuf,
        #[arg(default_value = "")]
        input: String,
        #[arg(long)]
        oracle: bool,
        /// Decode the derivation and write the computation here.
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long)]
        max_items: Option<usize>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Show {
    Text,
    Dot,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Parse { .. } => "parse",
            Command::Check { .. } => "check",
            Command::ReduceSat { .. } => "reduce-sat",
            Command::SolveSat { .. } => "solve-sat",
            Command::RunAtm { .. } => "run-atm",
            Command::ReduceAtm { .. } => "reduce-atm",
            Command::SolveAtm { .. } => "solve-atm",
        }
    }
}

/// What a command produced.
struct Outcome {
    accepted: Option<bool>,
    exit: u8,
    text: String,
    stats: Map<String, Value>,
}

impl Outcome {
    fn new(accepted: Option<bool>, exit: u8, text: String) -> Outcome {
        Outcome {
            accepted,
            exit,
            text,
            stats: Map::new(),
        }
    }

    fn stat(mut self, key: &str, value: impl Into<Value>) -> Outcome {
        self.stats.insert(key.into(), value.into());
        self
    }
}

/// A failure that ends the command with the given exit code.
struct Failure {
    exit: u8,
    message: String,
}

fn input_error(message: impl std::fmt::Display) -> Failure {
    Failure {
        exit: EXIT_ERROR,
        message: message.to_string(),
    }
}

fn undecided(message: impl std::fmt::Display) -> Failure {
    Failure {
        exit: EXIT_UNDECIDED,
        message: message.to_string(),
    }
}

type CmdResult = Result<Outcome, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let fail = |e: std::io::Error| input_error(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn load_grammar(path: &Path) -> Result<Grammar, Failure> {
    Grammar::parse(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_cnf(path: &Path) -> Result<CnfFormula, Failure> {
    parse_dimacs(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_machine(path: &Path) -> Result<Machine, Failure> {
    Machine::parse(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn machine_failure(e: MachineError) -> Failure {
    match e {
        MachineError::Budget { .. } => undecided(e),
        _ => input_error(e),
    }
}

fn parse_failure(e: ParseError) -> Failure {
    match e {
        ParseError::BudgetExhausted { .. } => undecided(e),
        ParseError::UnknownToken { .. } => input_error(e),
    }
}

fn verdict(accepted: bool) -> u8 {
    if accepted {
        EXIT_ACCEPT
    } else {
        EXIT_REJECT
    }
}

fn cmd_parse(
    grammar: &Path,
    words: &[String],
    input_file: Option<&Path>,
    arity_cap: Option<usize>,
    max_items: Option<usize>,
    derivation: Option<&Path>,
    show: Option<Show>,
) -> CmdResult {
    let g = load_grammar(grammar)?;
    let text;
    let tokens: Vec<&str> = match input_file {
        Some(p) => {
            text = read(p)?;
            text.split_whitespace().collect()
        }
        None => words.iter().flat_map(|w| w.split_whitespace()).collect(),
    };
    let default_cap = default_arity_cap(&g, tokens.len()).map_err(input_error)?;
    let cfg = ParseConfig {
        arity_cap: arity_cap.or(Some(default_cap)),
        max_items,
        ..ParseConfig::default()
    };
    let result = parse(&g, &tokens, &cfg).map_err(parse_failure)?;
    // The default cap is a proven bound only for grammars without empty entries.
    let certified = g.is_epsilon_free() && result.arity_cap >= default_cap;
    let exit = if result.accepted {
        EXIT_ACCEPT
    } else if result.cap_hit && !certified {
        EXIT_UNDECIDED
    } else {
        EXIT_REJECT
    };
    let mut out = String::from(match exit {
        EXIT_ACCEPT => "ACCEPT\n",
        EXIT_REJECT => "REJECT\n",
        _ => "UNDECIDED (arity cap reached)\n",
    });
    if let Some(t) = &result.derivation {
        if let Some(path) = derivation {
            write_atomic(path, &(t.to_json_string() + "\n"))?;
        }
        match show {
            Some(Show::Text) => out.push_str(&t.to_indented_text()),
            Some(Show::Dot) => out.push_str(&t.to_dot()),
            None => {}
        }
    }
    let mut outcome = Outcome::new(Some(result.accepted), exit, out)
        .stat("tokens", tokens.len())
        .stat("items", result.items_created)
        .stat("arity_cap", result.arity_cap)
        .stat("cap_hit", result.cap_hit);
    if let Some(t) = &result.derivation {
        outcome = outcome.stat("derivation_nodes", t.node_count());
    }
    Ok(outcome)
}

fn cmd_check(grammar: &Path, derivation: &Path) -> CmdResult {
    let g = load_grammar(grammar)?;
    let t = Derivation::from_json_str(&read(derivation)?).map_err(input_error)?;
    let nodes = t.node_count();
    Ok(match check_derivation(&g, &t) {
        Ok(()) => Outcome::new(Some(true), EXIT_ACCEPT, "OK\n".into()).stat("nodes", nodes),
        Err(v) => Outcome::new(Some(false), EXIT_REJECT, format!("VIOLATION at {}: {}\n", v.path, v.message))
            .stat("nodes", nodes)
            .stat("path", v.path)
            .stat("message", v.message),
    })
}

fn sat_report(phi: &CnfFormula) -> Result<(Map<String, Value>, String, String), Failure> {
    let inst = build_sat_instance(phi).map_err(input_error)?;
    let grammar_text = inst.grammar.to_text();
    let mut input_text = inst.input.join(" ");
    input_text.push('\n');
    let mut report = Map::new();
    report.insert("n".into(), inst.num_vars.into());
    report.insert("m".into(), inst.num_clauses.into());
    report.insert("formula_size".into(), phi.size().into());
    report.insert("rules".into(), inst.grammar.rules().len().into());
    report.insert("clause_rules".into(), inst.clause_rules.into());
    report.insert("lexicon".into(), inst.grammar.lexicon().len().into());
    report.insert("size".into(), grammar_text.len().into());
    report.insert("arity_bound".into(), inst.arity_bound.into());
    Ok((report, grammar_text, input_text))
}

fn cmd_reduce_sat(cnf: &Path, out_grammar: Option<&Path>, out_input: Option<&Path>, report: bool) -> CmdResult {
    let phi = load_cnf(cnf)?;
    let (stats, grammar_text, input_text) = sat_report(&phi)?;
    if let Some(p) = out_grammar {
        write_atomic(p, &grammar_text)?;
    }
    if let Some(p) = out_input {
        write_atomic(p, &input_text)?;
    }
    let mut text = String::new();
    if report {
        for (k, v) in &stats {
            text.push_str(&format!("{k} {v}\n"));
        }
    } else if out_grammar.is_none() && out_input.is_none() {
        text.push_str(&grammar_text);
        text.push_str("# input: ");
        text.push_str(&input_text);
    }
    let mut outcome = Outcome::new(None, EXIT_ACCEPT, text);
    outcome.stats = stats;
    Ok(outcome)
}

fn cmd_solve_sat(cnf: &Path, oracle: bool, max_items: Option<usize>) -> CmdResult {
    let phi = load_cnf(cnf)?;
    if oracle && phi.num_vars > 20 {
        return Err(input_error("the brute-force oracle handles at most 20 variables"));
    }
    let run = solve_run_budgeted(&phi, max_items).map_err(|e| match e {
        SatError::Parse(p) => parse_failure(p),
        e => input_error(e),
    })?;
    let sat = run.assignment.is_some();
    let mut text = match &run.assignment {
        Some(a) => format!("SAT {a}\n"),
        None => "UNSAT\n".into(),
    };
    let mut outcome_stats = Map::new();
    if let Some(r) = &run.parse {
        outcome_stats.insert("items".into(), r.items_created.into());
        outcome_stats.insert("cap_hit".into(), r.cap_hit.into());
    }
    if let Some(a) = &run.assignment {
        outcome_stats.insert("assignment".into(), a.0.clone().into());
    }
    if oracle {
        let expected = brute_force_sat(&phi).is_some();
        let sound = run.assignment.as_ref().is_none_or(|a| a.satisfies(&phi));
        outcome_stats.insert("oracle".into(), expected.into());
        if expected != sat || !sound {
            return Err(input_error(format!(
                "oracle disagreement: grammar says {}, brute force says {}",
                if sat { "SAT" } else { "UNSAT" },
                if expected { "SAT" } else { "UNSAT" }
            )));
        }
        text.push_str("oracle agrees\n");
    }
    let mut outcome = Outcome::new(Some(sat), verdict(sat), text);
    outcome.stats = outcome_stats;
    Ok(outcome)
}

fn machine_input(m: &Machine, input: &str) -> Result<Vec<u8>, Failure> {
    m.input(input).map_err(input_error)
}

fn cmd_run_atm(machine: &Path, input: &str, tree: Option<&Path>, max_configs: usize) -> CmdResult {
    let m = load_machine(machine)?;
    let warnings = crate::atm::validate_machine(&m).map_err(input_error)?;
    let w = machine_input(&m, input)?;
    let a = analyze(&m, &w, max_configs).map_err(machine_failure)?;
    let accepted = a.accepts();
    let mut text = String::from(if accepted { "ACCEPT\n" } else { "REJECT\n" });
    let mut outcome_stats = Map::new();
    outcome_stats.insert("configurations".into(), a.configs.len().into());
    outcome_stats.insert("rounds".into(), a.rounds.into());
    if let Some(depth) = a.level(0) {
        outcome_stats.insert("depth".into(), depth.into());
        text.push_str(&format!("depth {depth}\n"));
    }
    if accepted {
        if let Some(path) = tree {
            let t = accepting_computation(&m, &w).map_err(machine_failure)?.expect("accepting machine has a computation");
            write_atomic(path, &(serde_json::to_string_pretty(&t.to_json(&m)).unwrap() + "\n"))?;
        }
    }
    outcome_stats.insert("warnings".into(), warnings.into());
    let mut outcome = Outcome::new(Some(accepted), verdict(accepted), text);
    outcome.stats = outcome_stats;
    Ok(outcome)
}

fn padded_machine(path: &Path) -> Result<Machine, Failure> {
    pad_universal(&load_machine(path)?).map_err(input_error)
}

fn cmd_reduce_atm(machine: &Path, input: &str, out: Option<&Path>, sidecar: Option<&Path>) -> CmdResult {
    let m = padded_machine(machine)?;
    let w = machine_input(&m, input)?;
    let inst = build_atm_instance(&m, &w).map_err(input_error)?;
    let grammar_text = inst.grammar.to_text();
    let meta = serde_json::to_string_pretty(&inst.sidecar(&m)).unwrap() + "\n";
    let mut text = String::new();
    match out {
        Some(path) => {
            write_atomic(path, &grammar_text)?;
            let side = match sidecar {
                Some(p) => p.to_path_buf(),
                None => path.with_extension("meta.json"),
            };
            write_atomic(&side, &meta)?;
        }
        None => {
            text.push_str(&grammar_text);
            if let Some(p) = sidecar {
                write_atomic(p, &meta)?;
            }
        }
    }
    Ok(Outcome::new(None, EXIT_ACCEPT, text)
        .stat("m", inst.m)
        .stat("arity_bound", inst.arity_bound)
        .stat("rules", inst.grammar.rules().len())
        .stat("lexicon", inst.grammar.lexicon().len())
        .stat("size", grammar_text.len()))
}

fn cmd_solve_atm(machine: &Path, input: &str, oracle: bool, tree: Option<&Path>, max_items: Option<usize>) -> CmdResult {
    let m = padded_machine(machine)?;
    let w = machine_input(&m, input)?;
    let inst = build_atm_instance(&m, &w).map_err(input_error)?;
    let result = inst.run_empty_budgeted(max_items).map_err(parse_failure)?;
    let accepted = result.accepted;
    let mut text = String::from(if accepted { "ACCEPT\n" } else { "REJECT\n" });
    let mut outcome = Outcome::new(Some(accepted), verdict(accepted), String::new())
        .stat("m", inst.m)
        .stat("arity_bound", inst.arity_bound)
        .stat("items", result.items_created)
        .stat("cap_hit", result.cap_hit);
    if let (Some(path), Some(t)) = (tree, &result.derivation) {
        let computation = decode_and_validate(&inst, &m, &w, t).map_err(input_error)?;
        write_atomic(path, &(serde_json::to_string_pretty(&computation.to_json(&m)).unwrap() + "\n"))?;
        outcome = outcome.stat("computation_nodes", computation.size());
    }
    if oracle {
        let expected = crate::atm::accepts(&m, &w).map_err(machine_failure)?;
        outcome = outcome.stat("oracle", expected);
        if expected != accepted {
            return Err(input_error(format!(
                "oracle disagreement: grammar says {}, simulator says {}",
                if accepted { "accept" } else { "reject" },
                if expected { "accept" } else { "reject" }
            )));
        }
        text.push_str("oracle agrees\n");
    }
    outcome.text = text;
    Ok(outcome)
}

fn dispatch(cmd: &Command) -> CmdResult {
    match cmd {
        Command::Parse {
            grammar,
            words,
            empty: _,
            input_file,
            arity_cap,
            max_items,
            derivation,
            show,
        } => cmd_parse(
            grammar,
            words,
            input_file.as_deref(),
            *arity_cap,
            *max_items,
            derivation.as_deref(),
            *show,
        ),
        Command::Check { grammar, derivation } => cmd_check(grammar, derivation),
        Command::ReduceSat {
            cnf,
            out_grammar,
            out_input,
            report,
        } => cmd_reduce_sat(cnf, out_grammar.as_deref(), out_input.as_deref(), *report),
        Command::SolveSat { cnf, oracle, max_items } => cmd_solve_sat(cnf, *oracle, *max_items),
        Command::RunAtm {
            machine,
            input,
            tree,
            max_configs,
        } => cmd_run_atm(machine, input, tree.as_deref(), *max_configs),
        Command::ReduceAtm {
            machine,
            input,
            out,
            sidecar,
        } => cmd_reduce_atm(machine, input, out.as_deref(), sidecar.as_deref()),
        Command::SolveAtm {
            machine,
            input,
            oracle,
            tree,
            max_items,
        } => cmd_solve_atm(machine, input, *oracle, tree.as_deref(), *max_items),
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
                EXIT_ERROR
            } else {
                let _ = out.write_all(rendered.as_bytes());
                EXIT_ACCEPT
            };
        }
    };
    let name = cli.command.name();
    let outcome = dispatch(&cli.command);
    let (accepted, exit, text, mut stats, error) = match outcome {
        Ok(o) => (o.accepted, o.exit, o.text, o.stats, None),
        Err(f) => (None, f.exit, String::new(), Map::new(), Some(f.message)),
    };
    match cli.format {
        Format::Text => {
            let _ = out.write_all(text.as_bytes());
            if let Some(message) = error {
                let _ = writeln!(err, "error: {message}");
            }
        }
        Format::Json => {
            if let Some(message) = error {
                stats.insert("error".into(), message.into());
            }
            let doc = json!({
                "command": name,
                "accepted": accepted,
                "exit": exit,
                "stats": stats,
            });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap());
        }
    }
    exit
}
