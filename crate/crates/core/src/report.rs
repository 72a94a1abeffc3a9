//! Per-function summary of classical and quantum witness values.

use std::fmt::Write as _;

use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::classical::{self, optimal_deterministic};
use crate::error::Result;
use crate::optimize::{search, OptimizerConfig};
use crate::perceptron::{non_constant, ClassTag, NamedFunction, TruthTable};
use crate::quantum::{behavior_of_quantum, paper_strategy_for};
use crate::witness::{build_witness, Probability};

pub const SCHEMA_VERSION: u32 = 1;

pub const ENUM_EXCEEDS_PAPER_CLASSICAL: &str = "ENUM_EXCEEDS_PAPER_CLASSICAL";
pub const ENUM_EXCEEDS_PAPER_QUANTUM: &str = "ENUM_EXCEEDS_PAPER_QUANTUM";
pub const CLASSICAL_GE_QUANTUM_SEARCH: &str = "CLASSICAL_GE_QUANTUM_SEARCH";
pub const SEARCH_EXCEEDS_PAPER_QUANTUM: &str = "SEARCH_EXCEEDS_PAPER_QUANTUM";

/// Functions whose tabulated correct set is written with a parity condition.
const PARITY_READING: [&str; 4] = ["or", "nor", "imp_1to2", "imp_2to1"];

/// Rounds to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn rounded<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*x))
}

pub fn format_sig(x: f64) -> String {
    format!("{}", round_sig(x))
}

pub fn format_rational(r: &Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// A rational together with its float value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactValue {
    pub exact: String,
    #[serde(serialize_with = "rounded")]
    pub value: f64,
}

impl From<Rational64> for ExactValue {
    fn from(r: Rational64) -> Self {
        Self {
            exact: format_rational(&r),
            value: r.as_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub id: String,
    pub class: ClassTag,
    pub witness_n: u32,
    pub beta_c_paper: ExactValue,
    pub beta_c_enumerated: ExactValue,
    #[serde(serialize_with = "rounded")]
    pub beta_q_paper: f64,
    /// Numerical lower bound from the product-projective search.
    #[serde(serialize_with = "rounded")]
    pub beta_q_search: f64,
    pub flags: Vec<String>,
    /// Relabeling of the AND-type quantum strategy used for `beta_q_paper`.
    pub relabeling: String,
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub rows: Vec<ReportRow>,
}

pub fn build_row(f: &NamedFunction, cfg: &OptimizerConfig) -> Result<ReportRow> {
    let class = f.class();
    let w = build_witness(&f.table)?;
    let classical_paper = classical::paper_strategy(&class)?;
    let beta_c_paper = w.evaluate(&classical::behavior_of(&classical_paper, &w))?;
    let beta_c_enumerated = optimal_deterministic(&w).value;
    let (quantum_paper, relabeling) = paper_strategy_for(&f.table)?;
    let beta_q_paper = w.evaluate(&behavior_of_quantum(&quantum_paper, &w)?)?;
    let found = search(&w, cfg, Some(beta_q_paper), None)?;

    let enumerated = beta_c_enumerated.as_f64();
    let mut flags = Vec::new();
    if beta_c_enumerated > beta_c_paper {
        flags.push(ENUM_EXCEEDS_PAPER_CLASSICAL.to_string());
    }
    if enumerated > beta_q_paper {
        flags.push(ENUM_EXCEEDS_PAPER_QUANTUM.to_string());
    }
    if enumerated >= found.best_value {
        flags.push(CLASSICAL_GE_QUANTUM_SEARCH.to_string());
    }
    if found.flag_exceeds_paper {
        flags.push(SEARCH_EXCEEDS_PAPER_QUANTUM.to_string());
    }

    let notes = if PARITY_READING.contains(&f.id) {
        let parity = build_witness(&TruthTable::XOR)?;
        let c_paper = parity.evaluate(&classical::behavior_of(&classical_paper, &parity))?;
        let c_enum = optimal_deterministic(&parity).value;
        let q_paper = parity.evaluate(&behavior_of_quantum(&quantum_paper, &parity)?)?;
        format!(
            "parity reading of the correct set (N={}): classical paper {}, enumerated {}, quantum paper {}",
            parity.term_count(),
            format_rational(&c_paper),
            format_rational(&c_enum),
            format_sig(q_paper),
        )
    } else {
        String::new()
    };

    Ok(ReportRow {
        id: f.id.to_string(),
        class: class.tag,
        witness_n: w.term_count(),
        beta_c_paper: beta_c_paper.into(),
        beta_c_enumerated: beta_c_enumerated.into(),
        beta_q_paper,
        beta_q_search: found.best_value,
        flags,
        relabeling: relabeling.to_string(),
        notes,
    })
}

/// One row per non-constant function, in catalogue order.
pub fn build_report(cfg: &OptimizerConfig) -> Result<Report> {
    cfg.validate()?;
    let functions: Vec<&NamedFunction> = non_constant().collect();
    let rows = functions
        .par_iter()
        .map(|f| build_row(f, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        restarts: cfg.restarts,
        max_iters: cfg.max_iters,
        rows,
    })
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_table(&self) -> String {
        let headers = [
            "function",
            "class",
            "N",
            "bC paper",
            "bC enumerated",
            "bQ paper",
            "bQ search",
            "flags",
        ];
        let cells: Vec<[String; 8]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.id.clone(),
                    r.class.to_string(),
                    r.witness_n.to_string(),
                    r.beta_c_paper.exact.clone(),
                    r.beta_c_enumerated.exact.clone(),
                    format_sig(r.beta_q_paper),
                    format_sig(r.beta_q_search),
                    r.flags.join(","),
                ]
            })
            .collect();
        let mut widths = headers.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, row: &[String]| {
            let padded: Vec<String> = row
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        };
        line(&mut out, &headers.map(String::from));
        line(&mut out, &widths.map(|w| "-".repeat(w)));
        for row in &cells {
            line(&mut out, row);
        }
        let _ = writeln!(
            out,
            "\nbQ search: best of {} restarts (seed {}, at most {} iterations each), a numerical lower bound.",
            self.restarts, self.seed, self.max_iters
        );
        for r in &self.rows {
            if r.relabeling != "identity" {
                let _ = writeln!(
                    out,
                    "{}: quantum paper strategy relabeled by {}",
                    r.id, r.relabeling
                );
            }
        }
        for r in self.rows.iter().filter(|r| !r.notes.is_empty()) {
            let _ = writeln!(out, "{}: {}", r.id, r.notes);
        }
        out
    }
}
