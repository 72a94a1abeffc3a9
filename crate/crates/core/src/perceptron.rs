//! Rosenblatt threshold units over two binary inputs and the catalogue of the
//! fourteen linearly separable two-bit Boolean functions they realize.

use std::fmt;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights and bias of a two-input threshold unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PerceptronParams {
    pub w1: Rational64,
    pub w2: Rational64,
    pub b: Rational64,
}

impl PerceptronParams {
    pub fn new(w1: Rational64, w2: Rational64, b: Rational64) -> Self {
        Self { w1, w2, b }
    }

    /// Parameters given in halves, so `(2, 2, -3)` is `(1, 1, -3/2)`.
    pub fn from_halves(w1: i64, w2: i64, b: i64) -> Self {
        let half = |n| Rational64::new(n, 2);
        Self::new(half(w1), half(w2), half(b))
    }

    pub fn is_half_integer(&self) -> bool {
        [self.w1, self.w2, self.b]
            .iter()
            .all(|r| 2 % *r.denom() == 0)
    }

    pub fn scaled(&self, factor: Rational64) -> Self {
        Self::new(self.w1 * factor, self.w2 * factor, self.b * factor)
    }
}

impl fmt::Display for PerceptronParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.w1, self.w2, self.b)
    }
}

/// Step activation: 1 iff `w1·x1 + w2·x2 + b ≥ 0`, compared exactly.
pub fn eval_threshold(p: &PerceptronParams, x1: u8, x2: u8) -> u8 {
    let sum = p.w1 * Rational64::from(i64::from(x1 & 1))
        + p.w2 * Rational64::from(i64::from(x2 & 1))
        + p.b;
    u8::from(sum.is_zero() || sum.is_positive())
}

/// Outputs of a two-bit Boolean function in input order `00, 01, 10, 11`
/// (first character is `f(0,0)`; index is `2·x1 + x2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruthTable([u8; 4]);

impl TruthTable {
    pub const XOR: TruthTable = TruthTable([0, 1, 1, 0]);

    pub fn new(outputs: [u8; 4]) -> Result<Self> {
        if outputs.iter().any(|&b| b > 1) {
            return Err(Error::UnknownFunction(format!("{outputs:?}")));
        }
        Ok(Self(outputs))
    }

    pub fn outputs(&self) -> [u8; 4] {
        self.0
    }

    pub fn eval(&self, x1: u8, x2: u8) -> u8 {
        self.0[usize::from(2 * (x1 & 1) + (x2 & 1))]
    }

    /// Every two-bit function, ordered by its bit string.
    pub fn all() -> impl Iterator<Item = TruthTable> {
        (0u8..16).map(|n| TruthTable([(n >> 3) & 1, (n >> 2) & 1, (n >> 1) & 1, n & 1]))
    }

    /// `g(y1, y2) = negate_out ⊕ f(y1 ⊕ flip1, y2 ⊕ flip2)`.
    pub fn relabeled(&self, flip1: bool, flip2: bool, negate_out: bool) -> Self {
        let mut out = [0u8; 4];
        for y1 in 0..2u8 {
            for y2 in 0..2u8 {
                out[usize::from(2 * y1 + y2)] =
                    self.eval(y1 ^ u8::from(flip1), y2 ^ u8::from(flip2)) ^ u8::from(negate_out);
            }
        }
        Self(out)
    }

    /// `g(y1, y2) = f(y2, y1)`.
    pub fn swapped(&self) -> Self {
        Self([self.0[0], self.0[2], self.0[1], self.0[3]])
    }

    pub fn negated(&self) -> Self {
        self.relabeled(false, false, true)
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&b| b == self.0[0])
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for TruthTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        if bytes.len() != 4 || bytes.iter().any(|c| !matches!(c, b'0' | b'1')) {
            return Err(Error::UnknownFunction(s.to_string()));
        }
        let mut out = [0u8; 4];
        for (o, c) in out.iter_mut().zip(bytes) {
            *o = c - b'0';
        }
        Ok(Self(out))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    Constant,
    SingleVariable,
    AndOr,
    Asymmetric,
    NonSeparable,
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassTag::Constant => "Constant",
            ClassTag::SingleVariable => "SingleVariable",
            ClassTag::AndOr => "AndOr",
            ClassTag::Asymmetric => "Asymmetric",
            ClassTag::NonSeparable => "NonSeparable",
        };
        f.write_str(s)
    }
}

/// Input party (1 or 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    One,
    Two,
}

impl Party {
    pub fn index(self) -> usize {
        match self {
            Party::One => 0,
            Party::Two => 1,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Party::One => 1,
            Party::Two => 2,
        }
    }

    pub fn other(self) -> Party {
        match self {
            Party::One => Party::Two,
            Party::Two => Party::One,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionClass {
    pub tag: ClassTag,
    /// Inputs the output is sensitive to, in increasing order.
    pub dependent_vars: Vec<Party>,
}

impl FunctionClass {
    /// The single input a single-variable function reads.
    pub fn single_party(&self) -> Option<Party> {
        match (self.tag, self.dependent_vars.as_slice()) {
            (ClassTag::SingleVariable, [p]) => Some(*p),
            _ => None,
        }
    }
}

const AND_OR_TABLES: [[u8; 4]; 4] = [[0, 0, 0, 1], [1, 1, 1, 0], [0, 1, 1, 1], [1, 0, 0, 0]];
const XOR_TABLES: [[u8; 4]; 2] = [[0, 1, 1, 0], [1, 0, 0, 1]];

pub fn classify(t: &TruthTable) -> FunctionClass {
    let sensitive_to_1 = (0..2).any(|y2| t.eval(0, y2) != t.eval(1, y2));
    let sensitive_to_2 = (0..2).any(|y1| t.eval(y1, 0) != t.eval(y1, 1));
    let mut dependent_vars = Vec::new();
    if sensitive_to_1 {
        dependent_vars.push(Party::One);
    }
    if sensitive_to_2 {
        dependent_vars.push(Party::Two);
    }
    let tag = match dependent_vars.len() {
        0 => ClassTag::Constant,
        1 => ClassTag::SingleVariable,
        _ if XOR_TABLES.contains(&t.0) => ClassTag::NonSeparable,
        _ if AND_OR_TABLES.contains(&t.0) => ClassTag::AndOr,
        _ => ClassTag::Asymmetric,
    };
    FunctionClass {
        tag,
        dependent_vars,
    }
}

pub fn truth_table(p: &PerceptronParams) -> TruthTable {
    let mut out = [0u8; 4];
    for x1 in 0..2u8 {
        for x2 in 0..2u8 {
            out[usize::from(2 * x1 + x2)] = eval_threshold(p, x1, x2);
        }
    }
    TruthTable(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparableFunction {
    pub table: TruthTable,
    /// First grid point (in lexicographic `(w1, w2, b)` order) realizing the table.
    pub params: PerceptronParams,
    pub class: FunctionClass,
}

/// Half-integer grid `{-2, -3/2, ..., 3/2, 2}`, in halves.
const GRID_HALVES: std::ops::RangeInclusive<i64> = -4..=4;

/// Scans the half-integer weight/bias grid and returns every realizable truth
/// table with its lexicographically first parameter witness, ordered by
/// truth table.
pub fn enumerate_separable() -> Vec<SeparableFunction> {
    let mut found: Vec<SeparableFunction> = Vec::new();
    for w1 in GRID_HALVES {
        for w2 in GRID_HALVES {
            for b in GRID_HALVES {
                let params = PerceptronParams::from_halves(w1, w2, b);
                let table = truth_table(&params);
                if found.iter().all(|f| f.table != table) {
                    found.push(SeparableFunction {
                        table,
                        params,
                        class: classify(&table),
                    });
                }
            }
        }
    }
    assert_eq!(
        found.len(),
        14,
        "threshold grid must realize exactly the 14 separable functions"
    );
    found.sort_by_key(|f| f.table);
    found
}

/// Catalogue entry: stable CLI identifier plus a reference parameter choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NamedFunction {
    pub id: &'static str,
    pub label: &'static str,
    pub table: TruthTable,
    /// `(w1, w2, b)` in halves.
    reference_halves: (i64, i64, i64),
}

impl NamedFunction {
    pub fn reference_params(&self) -> PerceptronParams {
        let (w1, w2, b) = self.reference_halves;
        PerceptronParams::from_halves(w1, w2, b)
    }

    pub fn class(&self) -> FunctionClass {
        classify(&self.table)
    }
}

macro_rules! named {
    ($id:literal, $label:literal, [$a:literal, $b:literal, $c:literal, $d:literal], ($w1:literal, $w2:literal, $bias:literal)) => {
        NamedFunction {
            id: $id,
            label: $label,
            table: TruthTable([$a, $b, $c, $d]),
            reference_halves: ($w1, $w2, $bias),
        }
    };
}

/// The fourteen separable functions in catalogue order.
pub const CATALOGUE: [NamedFunction; 14] = [
    named!("const0", "0", [0, 0, 0, 0], (0, 0, -2)),
    named!("const1", "1", [1, 1, 1, 1], (0, 0, 2)),
    named!("x1", "x1", [0, 0, 1, 1], (2, 0, -1)),
    named!("not_x1", "¬x1", [1, 1, 0, 0], (-2, 0, 1)),
    named!("x2", "x2", [0, 1, 0, 1], (0, 2, -1)),
    named!("not_x2", "¬x2", [1, 0, 1, 0], (0, -2, 1)),
    named!("and", "x1 ∧ x2", [0, 0, 0, 1], (2, 2, -3)),
    named!("nand", "¬(x1 ∧ x2)", [1, 1, 1, 0], (-2, -2, 3)),
    named!("or", "x1 ∨ x2", [0, 1, 1, 1], (2, 2, -1)),
    named!("nor", "¬(x1 ∨ x2)", [1, 0, 0, 0], (-2, -2, 1)),
    named!("imp_1to2", "¬x1 ∨ x2", [1, 1, 0, 1], (-2, 2, 1)),
    named!("imp_2to1", "x1 ∨ ¬x2", [1, 0, 1, 1], (2, -2, 1)),
    named!("and_not2", "x1 ∧ ¬x2", [0, 0, 1, 0], (2, -2, -1)),
    named!("and_not1", "¬x1 ∧ x2", [0, 1, 0, 0], (-2, 2, -1)),
];

/// The twelve non-constant catalogue entries.
pub fn non_constant() -> impl Iterator<Item = &'static NamedFunction> {
    CATALOGUE.iter().filter(|f| !f.table.is_constant())
}

pub fn by_table(table: TruthTable) -> Option<&'static NamedFunction> {
    CATALOGUE.iter().find(|f| f.table == table)
}

/// Resolves a catalogue id or a 4-bit truth-table string.
///
/// XOR/XNOR (by name or bits) fail with [`Error::NotSeparable`]; constant
/// functions resolve normally and are rejected later where a witness is needed.
pub fn lookup(name: &str) -> Result<&'static NamedFunction> {
    let key = name.trim().to_ascii_lowercase();
    if let Some(f) = CATALOGUE.iter().find(|f| f.id == key) {
        return Ok(f);
    }
    let table = match key.as_str() {
        "xor" => TruthTable(XOR_TABLES[0]),
        "xnor" => TruthTable(XOR_TABLES[1]),
        _ => key.parse::<TruthTable>()?,
    };
    by_table(table).ok_or_else(|| Error::NotSeparable(table.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn threshold_examples() {
        let and = PerceptronParams::from_halves(2, 2, -3);
        assert_eq!(eval_threshold(&and, 1, 1), 1);
        let x1 = PerceptronParams::from_halves(2, 0, -1);
        assert_eq!(eval_threshold(&x1, 0, 1), 0);
        let zero = PerceptronParams::from_halves(0, 0, -2);
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_eq!(eval_threshold(&zero, a, b), 0);
        }
    }

    #[test]
    fn threshold_boundary_is_closed() {
        // 1/2 + 1/2 - 1 = 0 exactly
        let p = PerceptronParams::from_halves(1, 1, -2);
        assert_eq!(eval_threshold(&p, 1, 1), 1);
        assert_eq!(eval_threshold(&p, 1, 0), 0);
    }

    #[test]
    fn truth_table_examples() {
        assert_eq!(
            truth_table(&PerceptronParams::from_halves(2, 2, -3)).to_string(),
            "0001"
        );
        assert_eq!(
            truth_table(&PerceptronParams::from_halves(-2, -2, 1)).to_string(),
            "1000"
        );
        assert_eq!(
            truth_table(&PerceptronParams::from_halves(0, 0, 2)).to_string(),
            "1111"
        );
    }

    #[test]
    fn enumeration_finds_fourteen_without_xor() {
        let all = enumerate_separable();
        assert_eq!(all.len(), 14);
        let tables: BTreeSet<String> = all.iter().map(|f| f.table.to_string()).collect();
        assert!(!tables.contains("0110"));
        assert!(!tables.contains("1001"));
        let catalogue: BTreeSet<String> = CATALOGUE.iter().map(|f| f.table.to_string()).collect();
        assert_eq!(tables, catalogue);
        let imp = all.iter().find(|f| f.table.to_string() == "1101").unwrap();
        assert_eq!(imp.class.tag, ClassTag::Asymmetric);
        for f in &all {
            assert_eq!(truth_table(&f.params), f.table);
            assert!(f.params.is_half_integer());
        }
    }

    #[test]
    fn canonical_witness_is_first_grid_hit() {
        let all = enumerate_separable();
        let and = all.iter().find(|f| f.table.to_string() == "0001").unwrap();
        assert_eq!(and.params, PerceptronParams::from_halves(1, 1, -2));
        let const0 = all.iter().find(|f| f.table.to_string() == "0000").unwrap();
        assert_eq!(const0.params, PerceptronParams::from_halves(-4, -4, -4));
    }

    #[test]
    fn reference_params_realize_their_tables() {
        for f in &CATALOGUE {
            assert_eq!(truth_table(&f.reference_params()), f.table, "{}", f.id);
        }
    }

    #[test]
    fn classify_examples() {
        let c = classify(&"0011".parse().unwrap());
        assert_eq!(c.tag, ClassTag::SingleVariable);
        assert_eq!(c.dependent_vars, vec![Party::One]);
        assert_eq!(classify(&"1110".parse().unwrap()).tag, ClassTag::AndOr);
        assert_eq!(
            classify(&"0110".parse().unwrap()).tag,
            ClassTag::NonSeparable
        );
        assert_eq!(
            classify(&"1001".parse().unwrap()).tag,
            ClassTag::NonSeparable
        );
        let k = classify(&"1111".parse().unwrap());
        assert_eq!(k.tag, ClassTag::Constant);
        assert!(k.dependent_vars.is_empty());
    }

    #[test]
    fn non_separable_only_for_xor_pair() {
        let separable: BTreeSet<TruthTable> = CATALOGUE.iter().map(|f| f.table).collect();
        for t in TruthTable::all() {
            let non_sep = classify(&t).tag == ClassTag::NonSeparable;
            assert_eq!(non_sep, !separable.contains(&t), "{t}");
        }
    }

    #[test]
    fn lookup_by_id_bits_and_rejections() {
        assert_eq!(lookup("and").unwrap().table.to_string(), "0001");
        assert_eq!(lookup("0001").unwrap().id, "and");
        assert_eq!(lookup("imp_1to2").unwrap().table.to_string(), "1101");
        assert!(matches!(lookup("0110"), Err(Error::NotSeparable(_))));
        assert!(matches!(lookup("xnor"), Err(Error::NotSeparable(_))));
        assert!(matches!(lookup("maybe"), Err(Error::UnknownFunction(_))));
        assert!(lookup("const1").unwrap().table.is_constant());
    }

    proptest! {
        #[test]
        fn positive_scaling_preserves_function(
            w1 in -4i64..=4, w2 in -4i64..=4, b in -4i64..=4,
            num in 1i64..50, den in 1i64..50,
        ) {
            let p = PerceptronParams::from_halves(w1, w2, b);
            let lambda = Rational64::new(num, den);
            prop_assert_eq!(truth_table(&p.scaled(lambda)), truth_table(&p));
        }

        #[test]
        fn classification_agrees_across_witnesses(
            w1 in -4i64..=4, w2 in -4i64..=4, b in -4i64..=4,
        ) {
            let t = truth_table(&PerceptronParams::from_halves(w1, w2, b));
            let canonical = enumerate_separable().into_iter().find(|f| f.table == t).unwrap();
            prop_assert_eq!(classify(&truth_table(&canonical.params)), classify(&t));
            prop_assert_eq!(canonical.class, classify(&t));
        }
    }
}
