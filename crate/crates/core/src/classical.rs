//! Classical strategies under the one-bit channel restriction and the exact
//! optimum of a witness over all deterministic strategies.

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perceptron::{ClassTag, FunctionClass, Party};
use crate::witness::{Behavior, Outcome, Relabeling, Setting, Witness};

/// Decoder cells are indexed `m1·4 + m2·2 + s`.
pub const CELLS: usize = 8;

pub fn cell_index(m1: u8, m2: u8, s: u8) -> usize {
    usize::from(4 * m1 + 2 * m2 + s)
}

/// Two one-bit encoders and a node decoder with exact outcome distributions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassicalStrategy {
    /// `encoders[party][2·x_{p,0} + x_{p,1}]` is the transmitted bit.
    encoders: [[u8; 4]; 2],
    /// Outcome distribution per decoder cell, indexed by [`Outcome::index`].
    decoder: [[Rational64; 4]; CELLS],
}

impl ClassicalStrategy {
    pub fn new(encoders: [[u8; 4]; 2], decoder: [[Rational64; 4]; CELLS]) -> Result<Self> {
        if encoders.iter().flatten().any(|&m| m > 1) {
            return Err(Error::InvalidBehavior(
                "encoder output must be a bit".into(),
            ));
        }
        for (cell, dist) in decoder.iter().enumerate() {
            if dist.iter().any(|p| *p < Rational64::zero())
                || dist.iter().sum::<Rational64>() != Rational64::one()
            {
                return Err(Error::InvalidBehavior(format!(
                    "decoder cell {cell} is not a distribution"
                )));
            }
        }
        Ok(Self { encoders, decoder })
    }

    /// Deterministic strategy; `decoder[cell]` is an outcome index.
    pub fn deterministic(encoders: [[u8; 4]; 2], decoder: [usize; CELLS]) -> Result<Self> {
        if decoder.iter().any(|&y| y > 3) {
            return Err(Error::InvalidBehavior(
                "decoder outcome out of range".into(),
            ));
        }
        let mut dists = [[Rational64::zero(); 4]; CELLS];
        for (dist, &y) in dists.iter_mut().zip(&decoder) {
            dist[y] = Rational64::one();
        }
        Self::new(encoders, dists)
    }

    /// Encoder from its 4-bit table number (`f(00)` is the most significant bit).
    pub fn encoder_table(n: u8) -> [u8; 4] {
        [(n >> 3) & 1, (n >> 2) & 1, (n >> 1) & 1, n & 1]
    }

    pub fn encoder(&self, party: Party) -> [u8; 4] {
        self.encoders[party.index()]
    }

    pub fn decoder(&self) -> &[[Rational64; 4]; CELLS] {
        &self.decoder
    }

    /// Message sent by `party` for the given setting.
    pub fn message(&self, party: Party, setting: &Setting) -> u8 {
        self.encoders[party.index()][usize::from(setting.pair(party))]
    }

    /// Outcome table when every decoder cell is a point mass.
    pub fn deterministic_decoder(&self) -> Option<[usize; CELLS]> {
        let mut out = [0usize; CELLS];
        for (slot, dist) in out.iter_mut().zip(&self.decoder) {
            *slot = dist.iter().position(|p| p.is_one())?;
        }
        Some(out)
    }

    /// Full-setting outcome distribution.
    pub fn distribution(&self, setting: &Setting) -> &[Rational64; 4] {
        let m1 = self.message(Party::One, setting);
        let m2 = self.message(Party::Two, setting);
        &self.decoder[cell_index(m1, m2, setting.s)]
    }

    /// Strategy for the relabeled task: inputs are renamed before encoding
    /// and outputs renamed after decoding.
    pub fn relabeled(&self, r: &Relabeling) -> Self {
        let mut encoders = self.encoders;
        for party in [Party::One, Party::Two] {
            let mask = if r.flips(party) { 3 } else { 0 };
            encoders[party.index()] =
                std::array::from_fn(|pair| self.encoders[party.index()][pair ^ mask]);
        }
        let mut decoder = self.decoder;
        for (cell, dist) in self.decoder.iter().enumerate() {
            for (y, p) in dist.iter().enumerate() {
                decoder[cell][r.apply_outcome(Outcome::from_index(y)).index()] = *p;
            }
        }
        Self { encoders, decoder }
    }

    pub fn to_doc(&self) -> ClassicalStrategyDoc {
        ClassicalStrategyDoc {
            encoder1: self.encoders[0],
            encoder2: self.encoders[1],
            decoder: (0..2u8)
                .flat_map(|m1| (0..2u8).flat_map(move |m2| (0..2u8).map(move |s| (m1, m2, s))))
                .map(|(m1, m2, s)| DecoderCellDoc {
                    m1,
                    m2,
                    s,
                    distribution: self.decoder[cell_index(m1, m2, s)]
                        .iter()
                        .map(|p| p.to_string())
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalStrategyDoc {
    pub encoder1: [u8; 4],
    pub encoder2: [u8; 4],
    pub decoder: Vec<DecoderCellDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderCellDoc {
    pub m1: u8,
    pub m2: u8,
    pub s: u8,
    /// Probabilities of outcomes 00, 01, 10, 11 as exact rationals.
    pub distribution: Vec<String>,
}

/// Compiles a strategy into the witness's behavior. For a single-party
/// witness the other party's inputs are averaged uniformly and its output bit
/// summed out.
pub fn behavior_of(st: &ClassicalStrategy, w: &Witness) -> Behavior<Rational64> {
    let scope = w.scope();
    let mut table = vec![Rational64::zero(); scope.setting_count() * scope.outcome_count()];
    let weight = Rational64::new(scope.setting_count() as i64, 32);
    for full in Setting::all() {
        let row = scope.setting_index(&full);
        for (y, p) in st.distribution(&full).iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let o = scope.outcome_index(Outcome::from_index(y));
            table[row * scope.outcome_count() + o] += *p * weight;
        }
    }
    Behavior::new(scope, table).expect("decoder distributions are normalized")
}

/// Send `x_{i,0}`; decode the messages verbatim on query 0 and guess
/// uniformly on query 1.
pub fn paper_strategy(class: &FunctionClass) -> Result<ClassicalStrategy> {
    if class.tag == ClassTag::Constant {
        return Err(Error::TrivialFunction("constant class".into()));
    }
    let first_bit = [0, 0, 1, 1];
    let quarter = Rational64::new(1, 4);
    let mut decoder = [[Rational64::zero(); 4]; CELLS];
    for m1 in 0..2u8 {
        for m2 in 0..2u8 {
            decoder[cell_index(m1, m2, 0)][Outcome::new(m1, m2).index()] = Rational64::one();
            decoder[cell_index(m1, m2, 1)] = [quarter; 4];
        }
    }
    ClassicalStrategy::new([first_bit, first_bit], decoder)
}

/// Exact classical optimum with the strategy attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCertificate {
    pub value: Rational64,
    pub strategy: ClassicalStrategy,
    /// Number of encoder pairs examined.
    pub enumeration_size: usize,
}

/// Per full setting and outcome, whether the outcome is correct, plus the
/// factor turning a hit count into the witness value.
pub(crate) fn hit_table(w: &Witness) -> ([[bool; 4]; 32], Rational64) {
    let mut hits = [[false; 4]; 32];
    for (i, full) in Setting::all().enumerate() {
        for y in Outcome::ALL {
            hits[i][y.index()] = w.is_correct(&full, y);
        }
    }
    let multiplicity = (32 / w.scope().setting_count()) as i64;
    (
        hits,
        Rational64::new(1, i64::from(w.term_count()) * multiplicity),
    )
}

/// Maximizes the witness over all deterministic strategies.
///
/// For a fixed encoder pair every setting is routed to exactly one decoder
/// cell, so the objective splits into independent per-cell maximizations.
/// Ties go to the lexicographically smallest (encoder1, encoder2, decoder).
pub fn optimal_deterministic(w: &Witness) -> BoundCertificate {
    let (hits, scale) = hit_table(w);
    let mut best: Option<(u32, [[u8; 4]; 2], [usize; CELLS])> = None;
    for e1 in 0..16u8 {
        for e2 in 0..16u8 {
            let encoders = [
                ClassicalStrategy::encoder_table(e1),
                ClassicalStrategy::encoder_table(e2),
            ];
            let mut cell_scores = [[0u32; 4]; CELLS];
            for (i, full) in Setting::all().enumerate() {
                let m1 = encoders[0][usize::from(full.pair(Party::One))];
                let m2 = encoders[1][usize::from(full.pair(Party::Two))];
                let cell = &mut cell_scores[cell_index(m1, m2, full.s)];
                for (score, &hit) in cell.iter_mut().zip(&hits[i]) {
                    *score += u32::from(hit);
                }
            }
            let mut decoder = [0usize; CELLS];
            let mut total = 0;
            for (choice, scores) in decoder.iter_mut().zip(&cell_scores) {
                let max = *scores.iter().max().expect("four outcomes");
                *choice = scores.iter().position(|&v| v == max).expect("max exists");
                total += max;
            }
            if best.as_ref().is_none_or(|(v, _, _)| total > *v) {
                best = Some((total, encoders, decoder));
            }
        }
    }
    let (count, encoders, decoder) = best.expect("non-empty enumeration");
    BoundCertificate {
        value: Rational64::from(i64::from(count)) * scale,
        strategy: ClassicalStrategy::deterministic(encoders, decoder)
            .expect("enumerated decoder is valid"),
        enumeration_size: 256,
    }
}
