use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use imp_core::classical::{self, optimal_deterministic, ClassicalStrategy};
use imp_core::optimize::{search, OptimizerConfig, StrategyParams};
use imp_core::perceptron::{enumerate_separable, lookup, NamedFunction, Party, CATALOGUE};
use imp_core::quantum::{
    behavior_of_quantum, paper_strategy_for, QuantumStrategy, QuantumStrategyDoc,
};
use imp_core::report::{build_report, format_rational, format_sig, round_sig, ExactValue};
use imp_core::witness::{build_witness, Outcome, Probability, Witness};
use imp_core::Error;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "imp",
    version,
    about = "Prediction witnesses and classical/quantum bounds for two-party perceptrons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct SearchArgs {
    /// Optimizer restarts.
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    /// Seed for the restart streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Nelder–Mead iteration cap per restart.
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
}

impl SearchArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_iters: self.max_iters,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// List the fourteen linearly separable two-bit functions.
    Functions,
    /// Show the settings, correct sets and term count of a function's witness.
    Witness {
        function: String,
        #[arg(long)]
        json: bool,
    },
    /// Compute one bound for one function.
    Bound {
        function: String,
        mode: Mode,
        #[command(flatten)]
        search: SearchArgs,
        /// Print a JSON document instead of text.
        #[arg(long)]
        json: bool,
        /// Quantum strategy JSON used as the first restart (quantum-search only).
        #[arg(long, value_name = "PATH")]
        warm_start: Option<PathBuf>,
    },
    /// Evaluate every non-constant function in all four modes.
    Report {
        /// Also write the report as JSON to this path.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    ClassicalPaper,
    ClassicalOptimal,
    QuantumPaper,
    QuantumSearch,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::ClassicalPaper => "classical-paper",
            Mode::ClassicalOptimal => "classical-optimal",
            Mode::QuantumPaper => "quantum-paper",
            Mode::QuantumSearch => "quantum-search",
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnknownFunction(_) | Error::InvalidConfig(_) => 2,
            Error::TrivialFunction(_) => 3,
            Error::NotSeparable(_) => 4,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Functions => {
            print!("{}", functions_table());
            Ok(())
        }
        Command::Witness { function, json } => cmd_witness(&function, json),
        Command::Bound {
            function,
            mode,
            search,
            json,
            warm_start,
        } => cmd_bound(
            &function,
            mode,
            &search.config(),
            json,
            warm_start.as_deref(),
        ),
        Command::Report { json, search } => cmd_report(json.as_deref(), &search.config()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn functions_table() -> String {
    let canonical = enumerate_separable();
    let mut out = format!(
        "{:<10} {:<18} {:<15} {:<6} {:<18} {}\n",
        "id", "function", "type", "table", "canonical (w1,w2,b)", "reference (w1,w2,b)"
    );
    for f in CATALOGUE.iter() {
        let params = canonical
            .iter()
            .find(|c| c.table == f.table)
            .map(|c| c.params.to_string())
            .unwrap_or_default();
        out += &format!(
            "{:<10} {:<18} {:<15} {:<6} {:<18} {}\n",
            f.id,
            f.label,
            f.class().tag.to_string(),
            f.table.to_string(),
            params,
            f.reference_params()
        );
    }
    out
}

fn resolve(name: &str) -> Result<(&'static NamedFunction, Witness), Failure> {
    let f = lookup(name)?;
    let w = build_witness(&f.table)?;
    Ok((f, w))
}

fn cmd_witness(name: &str, as_json: bool) -> Result<(), Failure> {
    let (f, w) = resolve(name)?;
    let doc = w.to_doc();
    if as_json {
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).map_err(Error::from)?
        );
        return Ok(());
    }
    let parties: Vec<String> = doc.scored_parties.iter().map(|p| format!("y{p}")).collect();
    println!("function {} ({}), table {}", f.id, f.label, f.table);
    println!(
        "scored outputs: {}; N = {}",
        parties.join(", "),
        doc.term_count
    );
    let inputs: Vec<String> = if doc.scored_parties.len() == 1 {
        let p = doc.scored_parties[0];
        vec![format!("x{p}0"), format!("x{p}1")]
    } else {
        ["x10", "x11", "x20", "x21"].map(String::from).to_vec()
    };
    println!(
        "{:<3} {:<16} {:<5} correct outcomes",
        "s",
        inputs.join(" "),
        "zcor"
    );
    for st in &doc.settings {
        let x: Vec<String> = st.x.iter().map(u8::to_string).collect();
        let k: Vec<String> = st
            .correct
            .iter()
            .map(|y| y.iter().map(u8::to_string).collect::<String>())
            .collect();
        println!(
            "{:<3} {:<16} {:<5} {}",
            st.s,
            x.join("   "),
            st.z_cor,
            k.join(" ")
        );
    }
    Ok(())
}

fn classical_text(st: &ClassicalStrategy) -> String {
    let mut out = String::new();
    for (i, e) in [st.encoder(Party::One), st.encoder(Party::Two)]
        .iter()
        .enumerate()
    {
        out += &format!(
            "  encoder {}: 00->{} 01->{} 10->{} 11->{}\n",
            i + 1,
            e[0],
            e[1],
            e[2],
            e[3]
        );
    }
    for cell in st.to_doc().decoder {
        out += &format!(
            "  decoder m1={} m2={} s={}: P(00,01,10,11) = {}\n",
            cell.m1,
            cell.m2,
            cell.s,
            cell.distribution.join(" ")
        );
    }
    out
}

fn quantum_text(st: &QuantumStrategy) -> String {
    let doc = st.to_doc();
    let vec3 = |r: &[f64; 3]| {
        format!(
            "({}, {}, {})",
            format_sig(r[0]),
            format_sig(r[1]),
            format_sig(r[2])
        )
    };
    let mut out = String::new();
    for (party, states) in [(1, &doc.states1), (2, &doc.states2)] {
        for (pair, r) in states.iter().enumerate() {
            out += &format!(
                "  party {party} state for x={}{}: Bloch {}\n",
                pair >> 1,
                pair & 1,
                vec3(r)
            );
        }
    }
    for s in 0..2u8 {
        let povm = st.measurement(s);
        for y in Outcome::ALL {
            let e = povm.effect(y);
            let rows: Vec<String> = (0..4)
                .map(|r| {
                    let cells: Vec<String> = (0..4)
                        .map(|c| {
                            let z = e[(r, c)];
                            if round_sig(z.im) == 0.0 {
                                format_sig(z.re)
                            } else {
                                format!("{}{:+}i", format_sig(z.re), round_sig(z.im))
                            }
                        })
                        .collect();
                    format!("[{}]", cells.join(" "))
                })
                .collect();
            out += &format!("  s={s} effect {}{}: {}\n", y.y1, y.y2, rows.join(" "));
        }
    }
    out
}

fn cmd_bound(
    name: &str,
    mode: Mode,
    cfg: &OptimizerConfig,
    as_json: bool,
    warm_start: Option<&Path>,
) -> Result<(), Failure> {
    let (f, w) = resolve(name)?;
    if warm_start.is_some() && !matches!(mode, Mode::QuantumSearch) {
        return Err(Failure {
            code: 2,
            message: "--warm-start applies to quantum-search only".into(),
        });
    }
    let (value_text, value_json, provenance, strategy_text, strategy_json, extra) = match mode {
        Mode::ClassicalPaper => {
            let st = classical::paper_strategy(&f.class())?;
            let v = w.evaluate(&classical::behavior_of(&st, &w))?;
            (
                format_rational(&v),
                serde_json::to_value(ExactValue::from(v)).map_err(Error::from)?,
                "paper strategy".to_string(),
                classical_text(&st),
                serde_json::to_value(st.to_doc()).map_err(Error::from)?,
                json!({}),
            )
        }
        Mode::ClassicalOptimal => {
            let cert = optimal_deterministic(&w);
            (
                format!(
                    "{} ({})",
                    format_rational(&cert.value),
                    format_sig(cert.value.as_f64())
                ),
                serde_json::to_value(ExactValue::from(cert.value)).map_err(Error::from)?,
                format!(
                    "enumerated: {} encoder pairs, best decoder output per cell",
                    cert.enumeration_size
                ),
                classical_text(&cert.strategy),
                serde_json::to_value(cert.strategy.to_doc()).map_err(Error::from)?,
                json!({ "enumeration_size": cert.enumeration_size }),
            )
        }
        Mode::QuantumPaper => {
            let (st, relabeling) = paper_strategy_for(&f.table)?;
            let v = w.evaluate(&behavior_of_quantum(&st, &w)?)?;
            (
                format_sig(v),
                json!(round_sig(v)),
                format!("paper strategy, relabeling: {relabeling}"),
                quantum_text(&st),
                serde_json::to_value(st.to_doc()).map_err(Error::from)?,
                json!({ "relabeling": relabeling.to_string() }),
            )
        }
        Mode::QuantumSearch => {
            let warm = match warm_start {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(Error::from)?;
                    let doc: QuantumStrategyDoc =
                        serde_json::from_str(&text).map_err(Error::from)?;
                    Some(StrategyParams::from_strategy(&QuantumStrategy::from_doc(
                        &doc,
                    )?))
                }
                None => None,
            };
            let paper = paper_strategy_for(&f.table)
                .and_then(|(st, _)| w.evaluate(&behavior_of_quantum(&st, &w)?))?;
            let r = search(&w, cfg, Some(paper), warm.as_ref())?;
            let params: Vec<Value> = r
                .best_params
                .0
                .iter()
                .map(|x| json!(round_sig(*x)))
                .collect();
            (
                format!("{} (numerical lower bound)", format_sig(r.best_value)),
                json!(round_sig(r.best_value)),
                format!(
                    "numerical search, {} restarts, seed {}{}",
                    r.restarts_run,
                    cfg.seed,
                    if warm.is_some() { ", warm start" } else { "" }
                ),
                quantum_text(&r.best_strategy),
                serde_json::to_value(r.best_strategy.to_doc()).map_err(Error::from)?,
                json!({
                    "paper_value": round_sig(paper),
                    "flag_exceeds_paper": r.flag_exceeds_paper,
                    "best_restart": r.best_restart,
                    "max_iters": cfg.max_iters,
                    "params": params,
                }),
            )
        }
    };
    if as_json {
        let mut doc = json!({
            "function": f.id,
            "mode": mode.name(),
            "witness_n": w.term_count(),
            "value": value_json,
            "provenance": provenance,
            "strategy": strategy_json,
        });
        if let (Some(map), Value::Object(more)) = (doc.as_object_mut(), extra) {
            map.extend(more);
        }
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).map_err(Error::from)?
        );
    } else {
        println!(
            "{} {} (N = {}): {}",
            f.id,
            mode.name(),
            w.term_count(),
            value_text
        );
        println!("provenance: {provenance}");
        if let Value::Object(more) = &extra {
            if more.get("flag_exceeds_paper") == Some(&Value::Bool(true)) {
                println!(
                    "flag: SEARCH_EXCEEDS_PAPER_QUANTUM (paper value {})",
                    more["paper_value"]
                );
            }
        }
        println!("strategy:");
        print!("{strategy_text}");
    }
    Ok(())
}

fn cmd_report(out: Option<&Path>, cfg: &OptimizerConfig) -> Result<(), Failure> {
    let report = build_report(cfg)?;
    print!("{}", report.to_table());
    if let Some(path) = out {
        std::fs::write(path, report.to_json()).map_err(|e| Failure {
            code: 5,
            message: format!("cannot write {}: {e}", path.display()),
        })?;
    }
    Ok(())
}
