//! Prediction witnesses: for every node query `s` and input assignment `x`,
//! the set of node outcomes that make the perceptron output the correct value,
//! and the normalized sum of their probabilities under a behavior.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perceptron::{classify, ClassTag, Party, TruthTable};

/// Node query plus the four input bits `(x_{1,0}, x_{1,1}, x_{2,0}, x_{2,1})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Setting {
    pub s: u8,
    pub x: [u8; 4],
}

impl Setting {
    pub fn new(s: u8, x: [u8; 4]) -> Self {
        Self { s, x }
    }

    /// Every setting, in index order `s·16 + x_{1,0}·8 + x_{1,1}·4 + x_{2,0}·2 + x_{2,1}`.
    pub fn all() -> impl Iterator<Item = Setting> {
        (0u8..32).map(|n| Setting::new(n >> 4, [(n >> 3) & 1, (n >> 2) & 1, (n >> 1) & 1, n & 1]))
    }

    /// The two bits held by `party`, packed as `2·x_{p,0} + x_{p,1}`.
    pub fn pair(&self, party: Party) -> u8 {
        let i = 2 * party.index();
        2 * self.x[i] + self.x[i + 1]
    }

    /// The bit of `party` selected by the query, `x_{p,s}`.
    pub fn slot(&self, party: Party) -> u8 {
        self.x[2 * party.index() + usize::from(self.s)]
    }
}

/// Node outcome `(y_{1,s}, y_{2,s})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome {
    pub y1: u8,
    pub y2: u8,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [
        Outcome { y1: 0, y2: 0 },
        Outcome { y1: 0, y2: 1 },
        Outcome { y1: 1, y2: 0 },
        Outcome { y1: 1, y2: 1 },
    ];

    pub fn new(y1: u8, y2: u8) -> Self {
        Self { y1, y2 }
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn index(&self) -> usize {
        usize::from(2 * self.y1 + self.y2)
    }

    pub fn bit(&self, party: Party) -> u8 {
        match party {
            Party::One => self.y1,
            Party::Two => self.y2,
        }
    }
}

/// Which output bits a witness scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Both parties: 32 settings, 4 outcomes each.
    Both,
    /// One party only: its 4 input pairs times 2 queries, outcomes are its bit.
    Single(Party),
}

impl Scope {
    pub fn setting_count(&self) -> usize {
        match self {
            Scope::Both => 32,
            Scope::Single(_) => 8,
        }
    }

    pub fn outcome_count(&self) -> usize {
        match self {
            Scope::Both => 4,
            Scope::Single(_) => 2,
        }
    }

    /// Scored settings in index order. For a single party the other party's
    /// bits are zero.
    pub fn settings(&self) -> Vec<Setting> {
        match *self {
            Scope::Both => Setting::all().collect(),
            Scope::Single(p) => (0u8..8)
                .map(|n| {
                    let (s, hi, lo) = (n >> 2, (n >> 1) & 1, n & 1);
                    let mut x = [0u8; 4];
                    x[2 * p.index()] = hi;
                    x[2 * p.index() + 1] = lo;
                    Setting::new(s, x)
                })
                .collect(),
        }
    }

    /// Index of the scored projection of a full setting.
    pub fn setting_index(&self, st: &Setting) -> usize {
        match *self {
            Scope::Both => {
                16 * usize::from(st.s)
                    + usize::from(8 * st.x[0] + 4 * st.x[1] + 2 * st.x[2] + st.x[3])
            }
            Scope::Single(p) => 4 * usize::from(st.s) + usize::from(st.pair(p)),
        }
    }

    /// Index of the scored projection of a full outcome.
    pub fn outcome_index(&self, y: Outcome) -> usize {
        match *self {
            Scope::Both => y.index(),
            Scope::Single(p) => usize::from(y.bit(p)),
        }
    }
}

/// Number type a behavior can be expressed in: exact rationals for classical
/// strategies, floats for Born-rule probabilities.
pub trait Probability:
    Clone
    + fmt::Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
{
    fn from_ratio(num: i64, den: i64) -> Self;
    fn as_f64(&self) -> f64;
}

impl Probability for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Probability for Rational64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational64::new(num, den)
    }

    fn as_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Conditional distribution `p(y | s, x)` over a witness's scored settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior<T> {
    scope: Scope,
    table: Vec<T>,
}

const NORMALIZATION_TOL: f64 = 1e-12;
const NEGATIVITY_TOL: f64 = 1e-14;

impl<T: Probability> Behavior<T> {
    /// `table[setting_index · outcomes + outcome_index]`, validated for
    /// normalization and non-negativity.
    pub fn new(scope: Scope, table: Vec<T>) -> Result<Self> {
        let expected = scope.setting_count() * scope.outcome_count();
        if table.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for scope {scope:?}, expected {expected}",
                table.len()
            )));
        }
        for (i, row) in table.chunks(scope.outcome_count()).enumerate() {
            if let Some(bad) = row.iter().find(|p| p.as_f64() < -NEGATIVITY_TOL) {
                return Err(Error::InvalidBehavior(format!(
                    "negative probability {bad:?} at setting {i}"
                )));
            }
            let total = row.iter().fold(T::zero(), |acc, p| acc + p.clone());
            if (total.as_f64() - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidBehavior(format!(
                    "setting {i} sums to {total:?}"
                )));
            }
        }
        Ok(Self { scope, table })
    }

    pub fn from_fn(scope: Scope, mut prob: impl FnMut(&Setting, usize) -> T) -> Result<Self> {
        let mut table = Vec::with_capacity(scope.setting_count() * scope.outcome_count());
        for st in scope.settings() {
            for o in 0..scope.outcome_count() {
                table.push(prob(&st, o));
            }
        }
        Self::new(scope, table)
    }

    /// Point mass on the same outcome for every setting.
    pub fn constant(scope: Scope, outcome: usize) -> Result<Self> {
        Self::from_fn(
            scope,
            |_, o| if o == outcome { T::one() } else { T::zero() },
        )
    }

    pub fn uniform(scope: Scope) -> Result<Self> {
        let n = scope.outcome_count() as i64;
        Self::from_fn(scope, |_, _| T::from_ratio(1, n))
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn prob(&self, setting_index: usize, outcome_index: usize) -> &T {
        &self.table[setting_index * self.scope.outcome_count() + outcome_index]
    }

    /// Distribution for one scored setting.
    pub fn row(&self, setting_index: usize) -> &[T] {
        let k = self.scope.outcome_count();
        &self.table[setting_index * k..(setting_index + 1) * k]
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    /// `λ·self + (1 − λ)·other`.
    pub fn mix(&self, other: &Self, lambda: T) -> Result<Self> {
        if self.scope != other.scope {
            return Err(Error::ShapeMismatch(
                "mixing behaviors of different scope".into(),
            ));
        }
        let rest = T::one() - lambda.clone();
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| lambda.clone() * a.clone() + rest.clone() * b.clone())
            .collect();
        Self::new(self.scope, table)
    }

    /// Behavior seen after renaming the flipped parties' input and output bits.
    pub fn relabeled(&self, r: &Relabeling) -> Self {
        let k = self.scope.outcome_count();
        let mut table = self.table.clone();
        for st in self.scope.settings() {
            let src = self.scope.setting_index(&st);
            let dst = self.scope.setting_index(&r.apply_setting(&st));
            for o in 0..k {
                let o2 = match self.scope {
                    Scope::Both => r.apply_outcome(Outcome::from_index(o)).index(),
                    Scope::Single(p) => o ^ usize::from(r.flips(p)),
                };
                table[dst * k + o2] = self.table[src * k + o].clone();
            }
        }
        Self {
            scope: self.scope,
            table,
        }
    }
}

/// Bit renaming on the parties' inputs/outputs plus optional output negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Relabeling {
    pub flip1: bool,
    pub flip2: bool,
    pub negate: bool,
}

impl Relabeling {
    pub const IDENTITY: Relabeling = Relabeling {
        flip1: false,
        flip2: false,
        negate: false,
    };

    pub fn all() -> impl Iterator<Item = Relabeling> {
        (0u8..8).map(|n| Relabeling {
            flip1: n & 4 != 0,
            flip2: n & 2 != 0,
            negate: n & 1 != 0,
        })
    }

    pub fn flips(&self, party: Party) -> bool {
        match party {
            Party::One => self.flip1,
            Party::Two => self.flip2,
        }
    }

    /// `f'(y1, y2) = negate ⊕ f(y1 ⊕ flip1, y2 ⊕ flip2)`.
    pub fn apply_function(&self, f: &TruthTable) -> TruthTable {
        f.relabeled(self.flip1, self.flip2, self.negate)
    }

    pub fn apply_setting(&self, st: &Setting) -> Setting {
        let (a, b) = (u8::from(self.flip1), u8::from(self.flip2));
        Setting::new(st.s, [st.x[0] ^ a, st.x[1] ^ a, st.x[2] ^ b, st.x[3] ^ b])
    }

    pub fn apply_outcome(&self, y: Outcome) -> Outcome {
        Outcome::new(y.y1 ^ u8::from(self.flip1), y.y2 ^ u8::from(self.flip2))
    }

    /// Relabeling that turns AND into `f`, if `f` is in the AND orbit
    /// (AND/OR and asymmetric classes).
    pub fn from_and(f: &TruthTable) -> Option<Relabeling> {
        let and = TruthTable::new([0, 0, 0, 1]).expect("static table");
        Self::all().find(|r| r.apply_function(&and) == *f)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }
}

impl fmt::Display for Relabeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.flip1 {
            parts.push("flip party 1");
        }
        if self.flip2 {
            parts.push("flip party 2");
        }
        if self.negate {
            parts.push("negate output");
        }
        if parts.is_empty() {
            f.write_str("identity")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// `z_cor = f(x_{1,s}, x_{2,s})`.
pub fn correct_output(f: &TruthTable, setting: &Setting) -> u8 {
    f.eval(setting.slot(Party::One), setting.slot(Party::Two))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    function: TruthTable,
    scope: Scope,
    /// Correct outcome indices per scored setting.
    correct: Vec<Vec<usize>>,
    term_count: u32,
}

/// Builds the witness for a non-constant function.
///
/// Two-variable functions score both output bits over all 32 settings.
/// Single-variable functions score only the relevant party's bit over its
/// own inputs, which gives `N = 8`.
pub fn build_witness(f: &TruthTable) -> Result<Witness> {
    let class = classify(f);
    let scope = match class.tag {
        ClassTag::Constant => return Err(Error::TrivialFunction(f.to_string())),
        ClassTag::SingleVariable => Scope::Single(class.dependent_vars[0]),
        _ => Scope::Both,
    };
    let correct: Vec<Vec<usize>> = scope
        .settings()
        .iter()
        .map(|st| {
            let z = correct_output(f, st);
            match scope {
                Scope::Both => Outcome::ALL
                    .iter()
                    .filter(|y| f.eval(y.y1, y.y2) == z)
                    .map(Outcome::index)
                    .collect(),
                Scope::Single(p) => (0u8..2)
                    .filter(|&bit| {
                        let y = match p {
                            Party::One => Outcome::new(bit, 0),
                            Party::Two => Outcome::new(0, bit),
                        };
                        f.eval(y.y1, y.y2) == z
                    })
                    .map(usize::from)
                    .collect(),
            }
        })
        .collect();
    let term_count = correct.iter().map(Vec::len).sum::<usize>() as u32;
    Ok(Witness {
        function: *f,
        scope,
        correct,
        term_count,
    })
}

impl Witness {
    pub fn function(&self) -> TruthTable {
        self.function
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    /// `N`, the number of probability terms in the sum.
    pub fn term_count(&self) -> u32 {
        self.term_count
    }

    /// Parties whose output bit is scored.
    pub fn reduced_parties(&self) -> Vec<Party> {
        match self.scope {
            Scope::Both => vec![Party::One, Party::Two],
            Scope::Single(p) => vec![p],
        }
    }

    pub fn settings(&self) -> Vec<Setting> {
        self.scope.settings()
    }

    /// Correct outcome indices (in the scope's outcome numbering) for a scored setting.
    pub fn correct_set(&self, setting_index: usize) -> &[usize] {
        &self.correct[setting_index]
    }

    pub fn is_correct(&self, setting: &Setting, y: Outcome) -> bool {
        let i = self.scope.setting_index(setting);
        self.correct[i].contains(&self.scope.outcome_index(y))
    }

    /// `p_cor = (1/N) Σ_settings Σ_{y ∈ K} p(y | setting)`.
    pub fn evaluate<T: Probability>(&self, b: &Behavior<T>) -> Result<T> {
        if b.scope() != self.scope {
            return Err(Error::ShapeMismatch(format!(
                "witness scope {:?}, behavior scope {:?}",
                self.scope,
                b.scope()
            )));
        }
        let mut total = T::zero();
        for (i, k) in self.correct.iter().enumerate() {
            for &o in k {
                total = total + b.prob(i, o).clone();
            }
        }
        let value = total / T::from_ratio(i64::from(self.term_count), 1);
        let v = value.as_f64();
        assert!(
            (-1e-12..=1.0 + 1e-12).contains(&v),
            "witness value {v} outside [0, 1]"
        );
        Ok(value)
    }

    pub fn to_doc(&self) -> WitnessDoc {
        let scored = self.reduced_parties();
        let settings = self
            .settings()
            .iter()
            .zip(&self.correct)
            .map(|(st, k)| SettingDoc {
                s: st.s,
                x: scored
                    .iter()
                    .flat_map(|&p| {
                        let i = 2 * p.index();
                        [st.x[i], st.x[i + 1]]
                    })
                    .collect(),
                z_cor: correct_output(&self.function, st),
                correct: k
                    .iter()
                    .map(|&o| match self.scope {
                        Scope::Both => {
                            let y = Outcome::from_index(o);
                            vec![y.y1, y.y2]
                        }
                        Scope::Single(_) => vec![o as u8],
                    })
                    .collect(),
            })
            .collect();
        WitnessDoc {
            function: self.function.to_string(),
            scored_parties: scored.iter().map(|p| p.number()).collect(),
            term_count: self.term_count,
            settings,
        }
    }
}

/// Serialized witness: one entry per scored setting with its correct-outcome
/// list. `x` and outcome tuples list only the scored parties' bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub function: String,
    pub scored_parties: Vec<u8>,
    pub term_count: u32,
    pub settings: Vec<SettingDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingDoc {
    pub s: u8,
    pub x: Vec<u8>,
    pub z_cor: u8,
    pub correct: Vec<Vec<u8>>,
}
