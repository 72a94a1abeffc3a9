//! Brute-force oracles. They read only the truth table and scope of a
//! witness and recompute everything else from scratch.

#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

use imp_core::classical::cell_index;
use imp_core::perceptron::TruthTable;
use imp_core::witness::{Scope, Witness};
use num_rational::Rational64;
use rayon::prelude::*;

pub struct OracleResult {
    pub value: Rational64,
    pub method: String,
}

fn depends_on(f: &TruthTable, party: usize) -> bool {
    (0..2u8).any(|other| {
        let (a, b) = if party == 0 {
            ((0, other), (1, other))
        } else {
            ((other, 0), (other, 1))
        };
        f.eval(a.0, a.1) != f.eval(b.0, b.1)
    })
}

/// Bits `(s, x10, x11, x20, x21)` of full setting number `t` in `0..32`.
fn setting_bits(t: usize) -> (usize, [u8; 4]) {
    let x = t & 15;
    (
        t >> 4,
        [
            (x >> 3) as u8 & 1,
            (x >> 2) as u8 & 1,
            (x >> 1) as u8 & 1,
            x as u8 & 1,
        ],
    )
}

fn slots(t: usize) -> (usize, u8, u8) {
    let (s, x) = setting_bits(t);
    (s, x[s], x[2 + s])
}

/// `correct[t][y]` over the full 32 settings and 4 outcomes, with
/// `y = 2·y1 + y2`. A bit that `f` ignores never changes membership.
fn correct_table(f: &TruthTable) -> [[bool; 4]; 32] {
    let mut out = [[false; 4]; 32];
    for (t, row) in out.iter_mut().enumerate() {
        let (_, a, b) = slots(t);
        let z = f.eval(a, b);
        for (y, cell) in row.iter_mut().enumerate() {
            *cell = f.eval((y >> 1) as u8, (y & 1) as u8) == z;
        }
    }
    out
}

/// Number of terms in the witness sum, counted setting by setting.
///
/// A function of one variable is scored only on that party's output bit
/// over that party's own inputs.
pub fn oracle_witness_count(f: &TruthTable) -> u32 {
    let (d1, d2) = (depends_on(f, 0), depends_on(f, 1));
    assert!(d1 || d2, "constant function");
    let mut n = 0;
    for t in 0..32 {
        let (s, x) = setting_bits(t);
        let (a, b) = (x[s], x[2 + s]);
        let z = f.eval(a, b);
        if d1 && d2 {
            n += (0..4u8).filter(|y| f.eval(y >> 1, y & 1) == z).count() as u32;
        } else {
            let other = if d1 { [x[2], x[3]] } else { [x[0], x[1]] };
            if other != [0, 0] {
                continue;
            }
            n += (0..2u8)
                .filter(|&bit| {
                    if d1 {
                        f.eval(bit, 0) == z
                    } else {
                        f.eval(0, bit) == z
                    }
                })
                .count() as u32;
        }
    }
    n
}

fn denominator(w: &Witness) -> i64 {
    let n = i64::from(oracle_witness_count(&w.function()));
    match w.scope() {
        Scope::Both => n,
        // each scored setting is an average over the other party's 4 input pairs
        Scope::Single(_) => 4 * n,
    }
}

fn message(encoder: u8, x0: u8, x1: u8) -> usize {
    usize::from((encoder >> (2 * x0 + x1)) & 1)
}

fn cells_of(e1: u8, e2: u8) -> [usize; 32] {
    std::array::from_fn(|t| {
        let (s, x) = setting_bits(t);
        4 * message(e1, x[0], x[1]) + 2 * message(e2, x[2], x[3]) + s
    })
}

/// Exact classical optimum by trying every deterministic strategy: 16 × 16
/// encoder pairs times 4⁸ decoders, each scored over all 32 settings.
pub fn oracle_classical(w: &Witness) -> OracleResult {
    let correct = correct_table(&w.function());
    let best = (0u16..256)
        .into_par_iter()
        .map(|pair| {
            let cells = cells_of((pair >> 4) as u8, (pair & 15) as u8);
            let mut best = 0u32;
            for decoder in 0u32..1 << 16 {
                let mut hits = 0u32;
                for t in 0..32 {
                    let y = (decoder >> (2 * cells[t])) & 3;
                    hits += u32::from(correct[t][y as usize]);
                }
                best = best.max(hits);
            }
            best
        })
        .max()
        .expect("nonempty");
    OracleResult {
        value: Rational64::new(i64::from(best), denominator(w)),
        method: "exhaustive search over 16x16 encoder pairs and 4^8 decoders".into(),
    }
}

/// Every deterministic strategy reaching `value`, as (encoder 1, encoder 2,
/// decoder) with encoders indexed by `2·x_{i,0} + x_{i,1}` and the decoder
/// indexed by [`cell_index`].
pub fn optimal_strategies(w: &Witness, value: Rational64) -> Vec<([[u8; 4]; 2], [usize; 8])> {
    let correct = correct_table(&w.function());
    let target = value * Rational64::from(denominator(w));
    assert!(target.is_integer());
    let target = *target.numer() as u32;
    let mut out = Vec::new();
    for pair in 0u16..256 {
        let (e1, e2) = ((pair >> 4) as u8, (pair & 15) as u8);
        let cells = cells_of(e1, e2);
        let mut counts = [[0u32; 4]; 8];
        for t in 0..32 {
            for y in 0..4 {
                counts[cells[t]][y] += u32::from(correct[t][y]);
            }
        }
        let maxima = counts.map(|c| *c.iter().max().unwrap());
        if maxima.iter().sum::<u32>() != target {
            continue;
        }
        let choices: Vec<Vec<usize>> = (0..8)
            .map(|c| (0..4).filter(|&y| counts[c][y] == maxima[c]).collect())
            .collect();
        let encoders = [e1, e2].map(|e| [0u8, 1, 2, 3].map(|p| message(e, p >> 1, p & 1) as u8));
        let mut index = [0usize; 8];
        loop {
            let mut decoder = [0usize; 8];
            for m1 in 0..2u8 {
                for m2 in 0..2u8 {
                    for s in 0..2u8 {
                        let mine = usize::from(4 * m1 + 2 * m2 + s);
                        decoder[cell_index(m1, m2, s)] = choices[mine][index[mine]];
                    }
                }
            }
            out.push((encoders, decoder));
            let mut k = 0;
            while k < 8 {
                index[k] += 1;
                if index[k] < choices[k].len() {
                    break;
                }
                index[k] = 0;
                k += 1;
            }
            if k == 8 {
                break;
            }
        }
    }
    out
}

pub fn imp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_imp"))
}

pub fn run(args: &[&str]) -> Output {
    imp().args(args).output().expect("binary runs")
}

pub fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("imp-tests-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
