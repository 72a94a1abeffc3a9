//! Qubit strategies: product input states, one 4-outcome POVM per node query,
//! and their Born-rule behaviors.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::{cell_index, ClassicalStrategy};
use crate::error::{Error, Result};
use crate::perceptron::{classify, ClassTag, Party, TruthTable};
use crate::qmath::{
    hermitian_eigenvalues, tensor, trace_product, ComplexMatrix, QubitState, ALGEBRA_TOL,
    POSITIVITY_TOL,
};
use crate::witness::{Behavior, Outcome, Relabeling, Scope, Setting, Witness};

/// Four-outcome measurement on the two incoming qubits; effect `i` belongs to
/// outcome [`Outcome::from_index`]`(i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Povm {
    effects: [ComplexMatrix; 4],
}

impl Povm {
    /// Validates and orders labeled effects.
    pub fn new(labeled: Vec<(Outcome, ComplexMatrix)>) -> Result<Self> {
        if labeled.len() != 4 {
            return Err(Error::InvalidPovm(format!(
                "{} effects, expected 4",
                labeled.len()
            )));
        }
        let mut slots: [Option<ComplexMatrix>; 4] = [None; 4];
        for (y, m) in labeled {
            if y.y1 > 1 || y.y2 > 1 {
                return Err(Error::InvalidPovm(format!("bad outcome label {y:?}")));
            }
            let slot = &mut slots[y.index()];
            if slot.is_some() {
                return Err(Error::InvalidPovm(format!("duplicate outcome {y:?}")));
            }
            *slot = Some(m);
        }
        let effects = slots.map(|m| m.expect("four distinct labels fill every slot"));
        let povm = Self { effects };
        povm.validate()?;
        Ok(povm)
    }

    pub(crate) fn from_effects_unchecked(effects: [ComplexMatrix; 4]) -> Self {
        Self { effects }
    }

    pub fn effect(&self, y: Outcome) -> &ComplexMatrix {
        &self.effects[y.index()]
    }

    pub fn effects(&self) -> &[ComplexMatrix; 4] {
        &self.effects
    }

    /// Hermitian, positive semidefinite effects summing to the identity.
    pub fn validate(&self) -> Result<()> {
        let mut total = ComplexMatrix::zeros(4)?;
        for (i, e) in self.effects.iter().enumerate() {
            if e.dim() != 4 {
                return Err(Error::InvalidPovm(format!(
                    "effect {i} has dimension {}",
                    e.dim()
                )));
            }
            let herm = e.hermiticity_error();
            if herm > ALGEBRA_TOL {
                return Err(Error::InvalidPovm(format!(
                    "effect {i} not Hermitian ({herm:e})"
                )));
            }
            let min = hermitian_eigenvalues(e)?[0];
            if min < -POSITIVITY_TOL {
                return Err(Error::InvalidPovm(format!(
                    "effect {i} has negative eigenvalue {min:e}"
                )));
            }
            total = total + *e;
        }
        let err = total.max_abs_diff(&ComplexMatrix::identity(4)?)?;
        if err > ALGEBRA_TOL {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {err:e}"
            )));
        }
        Ok(())
    }

    fn relabeled(&self, r: &Relabeling) -> Self {
        let mut effects = self.effects;
        for y in Outcome::ALL {
            effects[r.apply_outcome(y).index()] = self.effects[y.index()];
        }
        Self { effects }
    }
}

/// Input states for both parties plus the node measurement for each query.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumStrategy {
    /// `states[party][2·x_{p,0} + x_{p,1}]`.
    states: [[QubitState; 4]; 2],
    /// `measurements[s]`.
    measurements: [Povm; 2],
}

impl QuantumStrategy {
    /// States and POVMs are validated by their own constructors.
    pub fn new(
        states1: [QubitState; 4],
        states2: [QubitState; 4],
        measurements: [Povm; 2],
    ) -> Self {
        Self {
            states: [states1, states2],
            measurements,
        }
    }

    pub fn state(&self, party: Party, pair: u8) -> &QubitState {
        &self.states[party.index()][usize::from(pair)]
    }

    pub fn measurement(&self, s: u8) -> &Povm {
        &self.measurements[usize::from(s)]
    }

    pub fn validate(&self) -> Result<()> {
        for m in &self.measurements {
            m.validate()?;
        }
        for st in self.states.iter().flatten() {
            QubitState::new(*st.density())?;
        }
        Ok(())
    }

    /// Strategy for the relabeled task (inputs renamed before preparation,
    /// outcomes renamed after measurement).
    pub fn relabeled(&self, r: &Relabeling) -> Self {
        let mut states = self.states;
        for party in [Party::One, Party::Two] {
            let mask = if r.flips(party) { 3 } else { 0 };
            states[party.index()] =
                std::array::from_fn(|pair| self.states[party.index()][pair ^ mask]);
        }
        Self {
            states,
            measurements: self.measurements.map(|m| m.relabeled(r)),
        }
    }

    pub fn to_doc(&self) -> QuantumStrategyDoc {
        let bloch = |p: usize| self.states[p].map(|s| s.bloch());
        QuantumStrategyDoc {
            states1: bloch(0),
            states2: bloch(1),
            measurements: (0..2u8)
                .map(|s| MeasurementDoc {
                    s,
                    effects: Outcome::ALL
                        .iter()
                        .map(|y| EffectDoc {
                            outcome: [y.y1, y.y2],
                            entries: self
                                .measurement(s)
                                .effect(*y)
                                .entries()
                                .iter()
                                .map(|z| [z.re, z.im])
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &QuantumStrategyDoc) -> Result<Self> {
        let states = |rs: &[[f64; 3]; 4]| -> Result<[QubitState; 4]> {
            Ok([
                QubitState::from_bloch(rs[0])?,
                QubitState::from_bloch(rs[1])?,
                QubitState::from_bloch(rs[2])?,
                QubitState::from_bloch(rs[3])?,
            ])
        };
        if doc.measurements.len() != 2 {
            return Err(Error::InvalidPovm(format!(
                "{} measurements, expected one per query",
                doc.measurements.len()
            )));
        }
        let mut povms = Vec::with_capacity(2);
        for s in 0..2u8 {
            let m = doc
                .measurements
                .iter()
                .find(|m| m.s == s)
                .ok_or_else(|| Error::InvalidPovm(format!("missing measurement for s={s}")))?;
            let labeled = m
                .effects
                .iter()
                .map(|e| {
                    let entries: Vec<Complex64> = e
                        .entries
                        .iter()
                        .map(|[re, im]| Complex64::new(*re, *im))
                        .collect();
                    Ok((
                        Outcome::new(e.outcome[0], e.outcome[1]),
                        ComplexMatrix::new(4, &entries)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            povms.push(Povm::new(labeled)?);
        }
        Ok(Self::new(
            states(&doc.states1)?,
            states(&doc.states2)?,
            [povms[0], povms[1]],
        ))
    }
}

/// JSON interchange form: states as Bloch vectors, effects as row-major
/// `[re, im]` entry lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumStrategyDoc {
    pub states1: [[f64; 3]; 4],
    pub states2: [[f64; 3]; 4],
    pub measurements: Vec<MeasurementDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDoc {
    pub s: u8,
    pub effects: Vec<EffectDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectDoc {
    pub outcome: [u8; 2],
    pub entries: Vec<[f64; 2]>,
}

/// `σx^{x0} σz^{x1} (cos(π/8)|0⟩ + sin(π/8)|1⟩)` as a density operator.
pub fn paper_state(x0: u8, x1: u8) -> QubitState {
    let (c, s) = ((PI / 8.0).cos(), (PI / 8.0).sin());
    let s = if x1 & 1 == 1 { -s } else { s };
    let amps = if x0 & 1 == 1 { [s, c] } else { [c, s] };
    QubitState::pure(amps.map(|a| Complex64::new(a, 0.0))).expect("normalized amplitudes")
}

/// All four states of one party, indexed by `2·x0 + x1`.
pub fn paper_states() -> [QubitState; 4] {
    [
        paper_state(0, 0),
        paper_state(0, 1),
        paper_state(1, 0),
        paper_state(1, 1),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasurementFamily {
    /// Read one party's qubit; the other party's outcome bit is a fair coin.
    SingleVariable(Party),
    /// Product basis measurement on both qubits.
    AndType,
}

fn ket(v: [f64; 2]) -> ComplexMatrix {
    ComplexMatrix::projector(&v.map(|a| Complex64::new(a, 0.0))).expect("static shape")
}

/// `|+_j⟩⟨+_j|` with `|+_j⟩ = (|0⟩ + (-1)^j |1⟩)/√2`.
fn plus_j(j: u8) -> ComplexMatrix {
    let sign = if j == 0 { 1.0 } else { -1.0 };
    ket([FRAC_1_SQRT_2, sign * FRAC_1_SQRT_2])
}

fn basis_proj(i: u8) -> ComplexMatrix {
    if i == 0 {
        ket([1.0, 0.0])
    } else {
        ket([0.0, 1.0])
    }
}

/// Node measurements used for the quantum advantage.
///
/// Outcome 0 of the query-1 single-variable measurement is `|+⟩`; with the
/// states of [`paper_state`] this decodes `x_{p,1}` correctly with
/// probability `cos²(π/8)`.
pub fn paper_measurement(family: MeasurementFamily, s: u8) -> Povm {
    let local = |i: u8| if s == 0 { basis_proj(i) } else { plus_j(i) };
    let half_identity = ComplexMatrix::identity(2)
        .expect("static shape")
        .scale(Complex64::new(0.5, 0.0));
    let effects = Outcome::ALL.map(|y| {
        let (a, b) = match family {
            MeasurementFamily::SingleVariable(Party::One) => (local(y.y1), half_identity),
            MeasurementFamily::SingleVariable(Party::Two) => (half_identity, local(y.y2)),
            MeasurementFamily::AndType => (local(y.y1), local(y.y2)),
        };
        tensor(&a, &b).expect("qubit factors")
    });
    let labeled = Outcome::ALL.iter().copied().zip(effects).collect();
    Povm::new(labeled).expect("paper measurements are valid POVMs")
}

pub fn paper_strategy(family: MeasurementFamily) -> QuantumStrategy {
    QuantumStrategy::new(
        paper_states(),
        paper_states(),
        [paper_measurement(family, 0), paper_measurement(family, 1)],
    )
}

/// Paper strategy adapted to `f`, with the relabeling that maps the AND task
/// onto `f` (identity for single-variable functions).
pub fn paper_strategy_for(f: &TruthTable) -> Result<(QuantumStrategy, Relabeling)> {
    let class = classify(f);
    match class.tag {
        ClassTag::Constant => Err(Error::TrivialFunction(f.to_string())),
        ClassTag::NonSeparable => Err(Error::NotSeparable(f.to_string())),
        ClassTag::SingleVariable => Ok((
            paper_strategy(MeasurementFamily::SingleVariable(class.dependent_vars[0])),
            Relabeling::IDENTITY,
        )),
        ClassTag::AndOr | ClassTag::Asymmetric => {
            let r = Relabeling::from_and(f).expect("AND orbit covers both classes");
            Ok((paper_strategy(MeasurementFamily::AndType).relabeled(&r), r))
        }
    }
}

/// Born-rule behavior of a validated strategy on the witness's scored settings.
pub fn behavior_of_quantum(st: &QuantumStrategy, w: &Witness) -> Result<Behavior<f64>> {
    st.validate()?;
    Behavior::new(w.scope(), born_table(st, w.scope()))
}

/// Born-rule probability table, marginalized onto `scope`, without
/// validating the strategy.
pub(crate) fn born_table(st: &QuantumStrategy, scope: Scope) -> Vec<f64> {
    let mut joint = [[ComplexMatrix::zeros(4).expect("static shape"); 4]; 4];
    for (p1, row) in joint.iter_mut().enumerate() {
        for (p2, rho) in row.iter_mut().enumerate() {
            *rho = tensor(st.states[0][p1].density(), st.states[1][p2].density())
                .expect("qubit states");
        }
    }
    let k = scope.outcome_count();
    let mut table = vec![0.0; scope.setting_count() * k];
    let weight = scope.setting_count() as f64 / 32.0;
    for full in Setting::all() {
        let rho = &joint[usize::from(full.pair(Party::One))][usize::from(full.pair(Party::Two))];
        let row = scope.setting_index(&full);
        let povm = st.measurement(full.s);
        for y in Outcome::ALL {
            let p = trace_product(povm.effect(y), rho).expect("Hermitian operands");
            table[row * k + scope.outcome_index(y)] += weight * p;
        }
    }
    table
}

/// Orthogonal-state realization of a deterministic classical strategy:
/// message `m` becomes `|m⟩`, and each outcome's effect is the sum of the
/// computational projectors `|m1 m2⟩⟨m1 m2|` the decoder sends to it.
pub fn embed_classical(st: &ClassicalStrategy) -> Result<QuantumStrategy> {
    let decoder = st.deterministic_decoder().ok_or(Error::RandomizedDecoder)?;
    let states = |p: Party| st.encoder(p).map(QubitState::basis);
    let measurements = [0u8, 1].map(|s| {
        let mut diag = [[0.0f64; 4]; 4];
        for m1 in 0..2u8 {
            for m2 in 0..2u8 {
                let y = decoder[cell_index(m1, m2, s)];
                diag[y][usize::from(2 * m1 + m2)] = 1.0;
            }
        }
        Povm::from_effects_unchecked(diag.map(|d| ComplexMatrix::diag(&d).expect("static shape")))
    });
    let strategy = QuantumStrategy::new(states(Party::One), states(Party::Two), measurements);
    strategy.validate()?;
    Ok(strategy)
}
