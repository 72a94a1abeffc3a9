//! Derivative-free search over pure product states and local projective
//! measurements, giving numerical lower bounds on the quantum witness value.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perceptron::Party;
use crate::qmath::{bloch_density, tensor, ComplexMatrix, QubitState};
use crate::quantum::{born_table, Povm, QuantumStrategy};
use crate::witness::{Behavior, Outcome, Witness};

pub const PARAM_COUNT: usize = 24;
const STATE_BLOCK: usize = 16;

/// Bloch angles `(θ, φ)` of every input state and local measurement axis.
///
/// Layout: `2·(4·party + pair)` for states, `16 + 2·(2·s + party)` for the
/// measurement axis of `party` at query `s`. Outcome 0 of a local
/// measurement is the projector onto the axis direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyParams(pub Vec<f64>);

fn wrap_angles(theta: f64, phi: f64) -> (f64, f64) {
    let t = theta.rem_euclid(2.0 * PI);
    let (t, p) = if t > PI {
        (2.0 * PI - t, phi + PI)
    } else {
        (t, phi)
    };
    (t, p.rem_euclid(2.0 * PI))
}

fn direction(theta: f64, phi: f64) -> [f64; 3] {
    [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ]
}

fn angles_of(r: [f64; 3]) -> (f64, f64) {
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if norm == 0.0 {
        return (0.0, 0.0);
    }
    let theta = (r[2] / norm).clamp(-1.0, 1.0).acos();
    let phi = r[1].atan2(r[0]).rem_euclid(2.0 * PI);
    (theta, phi)
}

impl StrategyParams {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != PARAM_COUNT {
            return Err(Error::InvalidConfig(format!(
                "{} parameters, expected {PARAM_COUNT}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite parameter".into()));
        }
        Ok(Self(values))
    }

    pub fn state_index(party: Party, pair: u8) -> usize {
        2 * (4 * party.index() + usize::from(pair))
    }

    pub fn measurement_index(s: u8, party: Party) -> usize {
        STATE_BLOCK + 2 * (2 * usize::from(s) + party.index())
    }

    /// Angles folded into `θ ∈ [0, π]`, `φ ∈ [0, 2π)` without changing the
    /// directions they describe.
    pub fn normalized(&self) -> Self {
        let mut out = self.0.clone();
        for pair in out.chunks_mut(2) {
            let (t, p) = wrap_angles(pair[0], pair[1]);
            pair[0] = t;
            pair[1] = p;
        }
        Self(out)
    }

    pub fn state_direction(&self, party: Party, pair: u8) -> [f64; 3] {
        let i = Self::state_index(party, pair);
        direction(self.0[i], self.0[i + 1])
    }

    pub fn measurement_direction(&self, s: u8, party: Party) -> [f64; 3] {
        let i = Self::measurement_index(s, party);
        direction(self.0[i], self.0[i + 1])
    }

    /// Angles of the states of [`crate::quantum::paper_state`] together with
    /// the AND-type product measurements (Z basis for query 0, X basis for
    /// query 1).
    pub fn paper_and() -> Self {
        let mut v = vec![0.0; PARAM_COUNT];
        for party in [Party::One, Party::Two] {
            for pair in 0..4u8 {
                let (x0, x1) = (pair >> 1, pair & 1);
                let i = Self::state_index(party, pair);
                v[i] = if x0 == 0 { PI / 4.0 } else { 3.0 * PI / 4.0 };
                v[i + 1] = if x1 == 0 { 0.0 } else { PI };
            }
            let i = Self::measurement_index(1, party);
            v[i] = PI / 2.0;
        }
        Self(v)
    }

    /// Best-effort parameters for an arbitrary strategy: state Bloch
    /// directions, and for each party the axis of its reduced outcome-0
    /// effect. Exact for pure product-projective strategies.
    pub fn from_strategy(st: &QuantumStrategy) -> Self {
        let mut v = vec![0.0; PARAM_COUNT];
        for party in [Party::One, Party::Two] {
            for pair in 0..4u8 {
                let (t, p) = angles_of(st.state(party, pair).bloch());
                let i = Self::state_index(party, pair);
                v[i] = t;
                v[i + 1] = p;
            }
        }
        for s in 0..2u8 {
            let povm = st.measurement(s);
            for party in [Party::One, Party::Two] {
                let marginal = match party {
                    Party::One => {
                        *povm.effect(Outcome::new(0, 0)) + *povm.effect(Outcome::new(0, 1))
                    }
                    Party::Two => {
                        *povm.effect(Outcome::new(0, 0)) + *povm.effect(Outcome::new(1, 0))
                    }
                };
                let local = partial_trace(&marginal, party);
                let r = [
                    2.0 * local[(0, 1)].re,
                    -2.0 * local[(0, 1)].im,
                    (local[(0, 0)] - local[(1, 1)]).re,
                ];
                let (t, p) = angles_of(r);
                let i = Self::measurement_index(s, party);
                v[i] = t;
                v[i + 1] = p;
            }
        }
        Self(v)
    }
}

/// Reduced operator on `keep`, scaled by 1/2 so that `P ⊗ 𝟙` maps back to `P`.
fn partial_trace(m: &ComplexMatrix, keep: Party) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(2).expect("static shape");
    for a in 0..2 {
        for b in 0..2 {
            let mut z = num_complex::Complex64::new(0.0, 0.0);
            for k in 0..2 {
                z += match keep {
                    Party::One => m[(2 * a + k, 2 * b + k)],
                    Party::Two => m[(2 * k + a, 2 * k + b)],
                };
            }
            out[(a, b)] = z * 0.5;
        }
    }
    out
}

/// Pure product states and product projective measurements from angles.
pub fn realize(p: &StrategyParams) -> QuantumStrategy {
    let states = |party: Party| {
        [0u8, 1, 2, 3].map(|pair| {
            QubitState::from_bloch(p.state_direction(party, pair)).expect("unit Bloch vector")
        })
    };
    let measurements =
        [0u8, 1].map(|s| {
            let local = |party: Party| {
                let n = p.measurement_direction(s, party);
                [bloch_density(n), bloch_density([-n[0], -n[1], -n[2]])]
            };
            let (a, b) = (local(Party::One), local(Party::Two));
            Povm::from_effects_unchecked(Outcome::ALL.map(|y| {
                tensor(&a[usize::from(y.y1)], &b[usize::from(y.y2)]).expect("qubit factors")
            }))
        });
    QuantumStrategy::new(states(Party::One), states(Party::Two), measurements)
}

/// Negated witness value of the realized strategy, for minimization.
pub fn objective(w: &Witness) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
    move |x: &[f64]| {
        let st = realize(&StrategyParams(x.to_vec()));
        let b = Behavior::new(w.scope(), born_table(&st, w.scope()))
            .expect("realized strategies are valid");
        -w.evaluate(&b).expect("scope matches")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 2000,
            tolerance: 1e-10,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidConfig(
                "restarts and max_iters must be positive".into(),
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance {} outside (0, 1)",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best_value: f64,
    pub best_params: StrategyParams,
    pub best_strategy: QuantumStrategy,
    /// Restart that produced the best value.
    pub best_restart: usize,
    pub restarts_run: usize,
    pub paper_value: Option<f64>,
    pub flag_exceeds_paper: bool,
}

/// Margin by which the search must beat a reference value to be flagged.
pub const EXCEEDS_MARGIN: f64 = 1e-7;

/// Nelder–Mead with seeded random restarts. Restart `i` starts from a point
/// drawn from its own stream `(seed, i)`; restart 0 uses `warm_start` when given.
pub fn search(
    w: &Witness,
    cfg: &OptimizerConfig,
    paper_value: Option<f64>,
    warm_start: Option<&StrategyParams>,
) -> Result<SearchResult> {
    cfg.validate()?;
    let f = objective(w);
    let runs: Vec<(f64, Vec<f64>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|restart| {
            let start = match (restart, warm_start) {
                (0, Some(p)) => p.0.clone(),
                _ => initial_point(cfg.seed, restart as u64),
            };
            let (x, fx) = nelder_mead(&f, &start, cfg.max_iters, cfg.tolerance);
            (-fx, x)
        })
        .collect();
    // ties keep the lower restart index
    let (best_restart, (best_value, best_x)) = runs
        .into_iter()
        .enumerate()
        .fold(
            None,
            |acc: Option<(usize, (f64, Vec<f64>))>, (i, run)| match acc {
                Some((j, best)) if best.0 >= run.0 => Some((j, best)),
                _ => Some((i, run)),
            },
        )
        .expect("at least one restart");
    let best_params = StrategyParams(best_x).normalized();
    let best_strategy = realize(&best_params);
    Ok(SearchResult {
        best_value,
        best_params,
        best_strategy,
        best_restart,
        restarts_run: cfg.restarts,
        paper_value,
        flag_exceeds_paper: paper_value.is_some_and(|p| best_value > p + EXCEEDS_MARGIN),
    })
}

/// Haar-uniform Bloch directions: `cos θ` and `φ` uniform per angle pair.
pub fn initial_point(seed: u64, restart: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart);
    let mut x = Vec::with_capacity(PARAM_COUNT);
    for _ in 0..PARAM_COUNT / 2 {
        let cos_theta: f64 = rng.gen_range(-1.0..=1.0);
        x.push(cos_theta.acos());
        x.push(rng.gen_range(0.0..2.0 * PI));
    }
    x
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
const INITIAL_STEP: f64 = 0.5;

/// Minimizes `f` from `x0`; returns the best vertex and its value.
///
/// Stops after `max_iters` iterations or once the spread of function values
/// over the simplex is at most `tol`.
pub fn nelder_mead(
    f: &impl Fn(&[f64]) -> f64,
    x0: &[f64],
    max_iters: usize,
    tol: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += INITIAL_STEP;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let toward = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
        from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
    };
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[n].1 - simplex[0].1 <= tol {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].0.clone();
        let reflected = toward(&centroid, &worst, -REFLECT);
        let f_reflected = f(&reflected);
        if f_reflected < simplex[0].1 {
            let expanded = toward(&centroid, &worst, -EXPAND);
            let f_expanded = f(&expanded);
            simplex[n] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
        } else if f_reflected < simplex[n - 1].1 {
            simplex[n] = (reflected, f_reflected);
        } else {
            let (candidate, bound) = if f_reflected < simplex[n].1 {
                (toward(&centroid, &reflected, CONTRACT), f_reflected)
            } else {
                (toward(&centroid, &worst, CONTRACT), simplex[n].1)
            };
            let f_candidate = f(&candidate);
            if f_candidate < bound {
                simplex[n] = (candidate, f_candidate);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = toward(&best, &vertex.0, SHRINK);
                    let fx = f(&x);
                    *vertex = (x, fx);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::optimal_deterministic;
    use crate::perceptron::TruthTable;
    use crate::quantum::{behavior_of_quantum, paper_strategy, MeasurementFamily};
    use crate::witness::build_witness;
    use proptest::prelude::*;

    fn witness(bits: &str) -> Witness {
        build_witness(&bits.parse::<TruthTable>().unwrap()).unwrap()
    }

    fn and_paper_value() -> f64 {
        (11.0 + 2.0 * 2f64.sqrt()) / 40.0
    }

    #[test]
    fn paper_angles_reproduce_lemma_value() {
        let w = witness("0001");
        let st = realize(&StrategyParams::paper_and());
        let v = w.evaluate(&behavior_of_quantum(&st, &w).unwrap()).unwrap();
        assert!((v - and_paper_value()).abs() < 1e-9);
        assert!((objective(&w)(&StrategyParams::paper_and().0) + and_paper_value()).abs() < 1e-9);
        let reference =
            behavior_of_quantum(&paper_strategy(MeasurementFamily::AndType), &w).unwrap();
        let realized = behavior_of_quantum(&st, &w).unwrap();
        for (a, b) in reference.table().iter().zip(realized.table()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn input_independent_strategy() {
        let w = witness("0001");
        let mut v = vec![0.7; PARAM_COUNT];
        for s in 0..2u8 {
            for party in [Party::One, Party::Two] {
                v[StrategyParams::measurement_index(s, party)] = 0.0;
            }
        }
        let st = realize(&StrategyParams(v));
        let b = behavior_of_quantum(&st, &w).unwrap();
        for i in 0..32 {
            assert_eq!(b.row(i), b.row(0));
        }
        // q1 = P(1,1), q0 = P(not (1,1)); 4 settings per query need (1,1), 12 need the rest
        let q1 = b.row(0)[3];
        let q0 = 1.0 - q1;
        let v = w.evaluate(&b).unwrap();
        assert!((v - 2.0 * (4.0 * q1 + 12.0 * q0) / 80.0).abs() < 1e-12);
    }

    #[test]
    fn north_pole_states_score_three_tenths() {
        let w = witness("0001");
        let st = realize(&StrategyParams(vec![0.0; PARAM_COUNT]));
        let v = w.evaluate(&behavior_of_quantum(&st, &w).unwrap()).unwrap();
        assert!((v - 0.3).abs() < 1e-15);
    }

    #[test]
    fn from_strategy_recovers_paper_angles() {
        let p = StrategyParams::from_strategy(&paper_strategy(MeasurementFamily::AndType));
        let w = witness("0001");
        assert!((objective(&w)(&p.0) + and_paper_value()).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad = OptimizerConfig {
            restarts: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig {
            tolerance: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(StrategyParams::new(vec![0.0; 3]).is_err());
    }

    #[test]
    fn nelder_mead_minimizes_quadratic() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2) + x[2].powi(2);
        let (x, fx) = nelder_mead(&f, &[0.0, 0.0, 0.0], 5000, 1e-16);
        assert!(fx < 1e-10);
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] + 2.0).abs() < 1e-4);
    }

    #[test]
    fn search_is_deterministic_and_monotone() {
        let w = witness("0001");
        let cfg = OptimizerConfig {
            restarts: 4,
            max_iters: 300,
            ..Default::default()
        };
        let a = search(&w, &cfg, Some(and_paper_value()), None).unwrap();
        let b = search(&w, &cfg, Some(and_paper_value()), None).unwrap();
        assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
        assert_eq!(a.best_params, b.best_params);
        let more = search(
            &w,
            &OptimizerConfig {
                restarts: 6,
                ..cfg.clone()
            },
            None,
            None,
        )
        .unwrap();
        assert!(more.best_value >= a.best_value);
        let round_trip = w
            .evaluate(&behavior_of_quantum(&a.best_strategy, &w).unwrap())
            .unwrap();
        assert!((round_trip - a.best_value).abs() < 1e-9);
        assert!((0.0..=1.0).contains(&a.best_value));
    }

    #[test]
    fn warm_start_is_never_worse_than_start() {
        let w = witness("0001");
        let cfg = OptimizerConfig {
            restarts: 1,
            max_iters: 50,
            ..Default::default()
        };
        let r = search(&w, &cfg, None, Some(&StrategyParams::paper_and())).unwrap();
        assert!(r.best_value >= and_paper_value() - 1e-12);
    }

    #[test]
    fn single_variable_search_beats_classical() {
        let w = witness("0011");
        let cfg = OptimizerConfig {
            restarts: 8,
            ..Default::default()
        };
        let r = search(&w, &cfg, None, None).unwrap();
        let classical = optimal_deterministic(&w).value;
        assert!(r.best_value <= 1.0);
        assert!(r.best_value >= *classical.numer() as f64 / *classical.denom() as f64);
    }

    fn rotation(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
        let norm = (axis.iter().map(|a| a * a).sum::<f64>()).sqrt().max(1e-9);
        let [x, y, z] = axis.map(|a| a / norm);
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn phi_is_periodic(raw in prop::collection::vec(0.0f64..6.0, PARAM_COUNT), which in 0usize..12) {
            let w = witness("0001");
            let f = objective(&w);
            let mut shifted = raw.clone();
            shifted[2 * which + 1] += 2.0 * PI;
            prop_assert!((f(&raw) - f(&shifted)).abs() < 1e-12);
            let wrapped = StrategyParams(raw.clone()).normalized();
            prop_assert!((f(&raw) - f(&wrapped.0)).abs() < 1e-12);
        }

        #[test]
        fn party_one_rotation_invariance(
            raw in prop::collection::vec(0.0f64..6.0, PARAM_COUNT),
            axis in prop::array::uniform3(-1.0f64..1.0),
            angle in 0.0f64..2.0 * PI,
        ) {
            let w = witness("0111");
            let f = objective(&w);
            let rot = rotation(axis, angle);
            let apply = |r: [f64; 3]| {
                [0, 1, 2].map(|i| rot[i][0] * r[0] + rot[i][1] * r[1] + rot[i][2] * r[2])
            };
            let p = StrategyParams(raw.clone());
            let mut rotated = raw.clone();
            for pair in 0..4u8 {
                let (t, ph) = angles_of(apply(p.state_direction(Party::One, pair)));
                let i = StrategyParams::state_index(Party::One, pair);
                rotated[i] = t;
                rotated[i + 1] = ph;
            }
            for s in 0..2u8 {
                let (t, ph) = angles_of(apply(p.measurement_direction(s, Party::One)));
                let i = StrategyParams::measurement_index(s, Party::One);
                rotated[i] = t;
                rotated[i + 1] = ph;
            }
            prop_assert!((f(&raw) - f(&rotated)).abs() < 1e-12);
        }
    }
}
