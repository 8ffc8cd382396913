//! Per-sensor comparison policies.
//!
//! Both decompose the network into independent single-sensor problems. For
//! sensor `l` and belief `p`, sleeping for `u` steps costs the expected
//! number of intruder visits to `l` during the sleep, `sum_{j=1..u} [p P^j]_l`,
//! plus the energy `c` of the next wake-up, plus a continuation term:
//!
//! * **FCR** propagates the belief open-loop (`p <- p P`) and expands the
//!   recursion to a fixed depth.
//! * **Q_MDP** assumes the intruder is seen again at the next wake-up, so
//!   the continuation is `sum_k [p P^{u+1}]_k V_l(e_k)`, with the table
//!   `V_l(e_k)` solved once by value iteration.
//!
//! Without an exit state the undiscounted recursions have no finite fixed
//! point, so the continuation is either discounted by `gamma^{u+1}` or,
//! for Q_MDP, iterated in relative form (subtracting `V_l(e_ref)` per sweep).

use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use crate::control::{Controller, Step};
use crate::env::{SleepAction, SufficientState, TransitionModel};
use crate::features::StateFeatures;
use crate::linalg;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Convention {
    /// Continuation after sleeping `u` steps is weighted by `gamma^{u+1}`.
    Discounted(f64),
    /// Undiscounted; Q_MDP value iteration subtracts the value at `reference`.
    Relative { reference: usize },
}

impl Convention {
    pub fn validate(&self, cells: usize) -> Result<()> {
        match *self {
            Convention::Discounted(g) if !(g > 0.0 && g < 1.0) => {
                Err(Error::InvalidConfig("discount factor must lie in (0, 1)"))
            }
            Convention::Relative { reference } if reference >= cells => Err(Error::InvalidCell {
                index: reference,
                cells,
            }),
            _ => Ok(()),
        }
    }

    fn continuation_weight(&self, sleep: usize) -> f64 {
        match *self {
            Convention::Discounted(g) => libm::pow(g, sleep as f64 + 1.0),
            Convention::Relative { .. } => 1.0,
        }
    }
}

impl Default for Convention {
    fn default() -> Self {
        Convention::Discounted(0.9)
    }
}

/// `p P^j` for `j = 0..=steps`.
fn propagate_powers(p: &[f64], model: &TransitionModel, steps: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(p.to_vec());
    for j in 1..=steps {
        let next = model.propagate(&out[j - 1]);
        out.push(next);
    }
    out
}

/// `V(l, i) ≈ V_l(e_i)`, stored row-major by location `i` then sensor `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerSensorValueTable {
    cells: usize,
    values: Vec<f64>,
    sweeps: usize,
}

impl PerSensorValueTable {
    /// `V_l(e_i)`.
    pub fn value(&self, sensor: usize, location: usize) -> f64 {
        self.values[location * self.cells + sensor]
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Sweeps used to reach the tolerance.
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }
}

/// Solver settings for [`qmdp_values`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmdpSettings {
    pub energy: f64,
    pub max_sleep: usize,
    pub convention: Convention,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for QmdpSettings {
    fn default() -> Self {
        Self {
            energy: 0.1,
            max_sleep: 3,
            convention: Convention::default(),
            tolerance: 1e-9,
            max_sweeps: 10_000,
        }
    }
}

/// One Bellman sweep for every sensor at once. `values` and the result are
/// `N x N` with rows indexed by location and columns by sensor.
fn qmdp_sweep(
    model: &TransitionModel,
    prefix: &[Vec<f64>],
    values: &[f64],
    s: &QmdpSettings,
) -> Vec<f64> {
    let n = model.cells();
    let p = model.as_slice();
    let mut out = vec![f64::INFINITY; n * n];
    // P^{u+1} V, built up one power at a time.
    let mut continuation = linalg::mat_mul(p, values, n);
    for u in 0..=s.max_sleep {
        if u > 0 {
            continuation = linalg::mat_mul(p, &continuation, n);
        }
        let weight = s.convention.continuation_weight(u);
        for (k, o) in out.iter_mut().enumerate() {
            let tracking = if u == 0 { 0.0 } else { prefix[u - 1][k] };
            let q = tracking + s.energy + weight * continuation[k];
            if q < *o {
                *o = q;
            }
        }
    }
    if let Convention::Relative { reference } = s.convention {
        for l in 0..n {
            let offset = out[reference * n + l];
            for i in 0..n {
                out[i * n + l] -= offset;
            }
        }
    }
    out
}

/// `sum_{j=1..u} P^j` for `u = 1..=max_sleep`.
fn power_prefix(model: &TransitionModel, max_sleep: usize) -> Vec<Vec<f64>> {
    let n = model.cells();
    let p = model.as_slice();
    let mut out = Vec::with_capacity(max_sleep);
    let mut power = p.to_vec();
    let mut acc = vec![0.0; n * n];
    for u in 1..=max_sleep {
        if u > 1 {
            power = linalg::mat_mul(p, &power, n);
        }
        acc.iter_mut().zip(&power).for_each(|(a, b)| *a += b);
        out.push(acc.clone());
    }
    out
}

/// Value iteration for every sensor's Q_MDP table until the sup-norm change
/// of every sensor's column drops below `tolerance`.
pub fn qmdp_values(
    model: &TransitionModel,
    settings: &QmdpSettings,
) -> Result<PerSensorValueTable> {
    let n = model.cells();
    settings.convention.validate(n)?;
    if !(settings.tolerance > 0.0) {
        return Err(Error::InvalidConfig("tolerance must be positive"));
    }
    let prefix = power_prefix(model, settings.max_sleep);
    let mut values = vec![0.0; n * n];
    let mut residual = vec![f64::INFINITY; n];
    for sweep in 1..=settings.max_sweeps {
        let next = qmdp_sweep(model, &prefix, &values, settings);
        residual.iter_mut().for_each(|r| *r = 0.0);
        for (k, (a, b)) in next.iter().zip(&values).enumerate() {
            let r = &mut residual[k % n];
            *r = r.max(libm::fabs(a - b));
        }
        values = next;
        if residual.iter().all(|&r| r < settings.tolerance) {
            return Ok(PerSensorValueTable {
                cells: n,
                values,
                sweeps: sweep,
            });
        }
    }
    let (sensor, &worst) = residual
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one sensor");
    Err(Error::NonConvergence {
        sensor,
        sweeps: settings.max_sweeps,
        residual: worst,
    })
}

/// Returns the table after one more sweep, for fixed-point checks.
pub fn qmdp_resweep(
    model: &TransitionModel,
    table: &PerSensorValueTable,
    settings: &QmdpSettings,
) -> PerSensorValueTable {
    let prefix = power_prefix(model, settings.max_sleep);
    PerSensorValueTable {
        cells: table.cells,
        values: qmdp_sweep(model, &prefix, &table.values, settings),
        sweeps: table.sweeps + 1,
    }
}

fn argmin_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (u, v) in values.enumerate() {
        if v < best.1 {
            best = (u, v);
        }
    }
    best.0
}

/// Q_MDP objective for each `u` given precomputed `p P^j`, `j = 0..=u_max+1`.
fn qmdp_objective(
    table: &PerSensorValueTable,
    powers: &[Vec<f64>],
    sensor: usize,
    energy: f64,
    convention: Convention,
) -> Vec<f64> {
    let max_sleep = powers.len() - 2;
    let mut tracking = 0.0;
    (0..=max_sleep)
        .map(|u| {
            if u > 0 {
                tracking += powers[u][sensor];
            }
            let future: f64 = powers[u + 1]
                .iter()
                .enumerate()
                .map(|(k, w)| w * table.value(sensor, k))
                .sum();
            tracking + energy + convention.continuation_weight(u) * future
        })
        .collect()
}

/// Q_MDP sleep time for sensor `sensor` at belief `p`; ties to smaller `u`.
pub fn qmdp_sleep_time(
    table: &PerSensorValueTable,
    p: &[f64],
    sensor: usize,
    model: &TransitionModel,
    energy: f64,
    max_sleep: usize,
    convention: Convention,
) -> usize {
    let powers = propagate_powers(p, model, max_sleep + 1);
    argmin_first(qmdp_objective(table, &powers, sensor, energy, convention).into_iter())
}

/// Belief tree for depth-limited FCR lookahead from one belief. The
/// propagation does not depend on the sensor, so one tree serves all of
/// them.
#[derive(Debug, Clone)]
pub struct FcrPlanner {
    energy: f64,
    max_sleep: usize,
    convention: Convention,
    root: FcrNode,
}

#[derive(Debug, Clone)]
struct FcrNode {
    /// `p P^j` for `j = 0..=u_max+1`.
    powers: Vec<Vec<f64>>,
    /// Child after sleeping `u`, at belief `p P^{u+1}`; empty at the last level.
    children: Vec<FcrNode>,
}

impl FcrNode {
    fn build(p: &[f64], model: &TransitionModel, max_sleep: usize, depth: usize) -> Self {
        let powers = propagate_powers(p, model, max_sleep + 1);
        let children = if depth > 1 {
            (0..=max_sleep)
                .map(|u| FcrNode::build(&powers[u + 1], model, max_sleep, depth - 1))
                .collect()
        } else {
            Vec::new()
        };
        Self { powers, children }
    }
}

impl FcrPlanner {
    pub fn new(
        p: &[f64],
        model: &TransitionModel,
        energy: f64,
        max_sleep: usize,
        depth: usize,
        convention: Convention,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidConfig("FCR depth must be at least 1"));
        }
        convention.validate(model.cells())?;
        Ok(Self {
            energy,
            max_sleep,
            convention,
            root: FcrNode::build(p, model, max_sleep, depth),
        })
    }

    fn node_values(&self, node: &FcrNode, sensor: usize) -> Vec<f64> {
        let mut tracking = 0.0;
        (0..=self.max_sleep)
            .map(|u| {
                if u > 0 {
                    tracking += node.powers[u][sensor];
                }
                let future = match node.children.get(u) {
                    Some(child) => self
                        .node_values(child, sensor)
                        .into_iter()
                        .fold(f64::INFINITY, f64::min),
                    None => 0.0,
                };
                tracking + self.energy + self.convention.continuation_weight(u) * future
            })
            .collect()
    }

    /// Lookahead cost of each first sleep time `u` for `sensor`.
    pub fn action_values(&self, sensor: usize) -> Vec<f64> {
        self.node_values(&self.root, sensor)
    }

    pub fn sleep_time(&self, sensor: usize) -> usize {
        argmin_first(self.action_values(sensor).into_iter())
    }
}

pub fn fcr_sleep_time(
    p: &[f64],
    sensor: usize,
    model: &TransitionModel,
    energy: f64,
    max_sleep: usize,
    depth: usize,
    convention: Convention,
) -> Result<usize> {
    Ok(FcrPlanner::new(p, model, energy, max_sleep, depth, convention)?.sleep_time(sensor))
}

/// Assigns each awake sensor its FCR sleep time.
#[derive(Debug, Clone)]
pub struct FcrController {
    model: TransitionModel,
    energy: f64,
    max_sleep: usize,
    depth: usize,
    convention: Convention,
}

impl FcrController {
    pub fn new(
        model: TransitionModel,
        energy: f64,
        max_sleep: usize,
        depth: usize,
        convention: Convention,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidConfig("FCR depth must be at least 1"));
        }
        convention.validate(model.cells())?;
        Ok(Self {
            model,
            energy,
            max_sleep,
            depth,
            convention,
        })
    }

    fn decide(&self, state: &SufficientState) -> SleepAction {
        let planner = FcrPlanner {
            energy: self.energy,
            max_sleep: self.max_sleep,
            convention: self.convention,
            root: FcrNode::build(&state.belief, &self.model, self.max_sleep, self.depth),
        };
        SleepAction(
            (0..state.cells())
                .map(|l| {
                    if state.is_awake(l) {
                        planner.sleep_time(l)
                    } else {
                        0
                    }
                })
                .collect(),
        )
    }
}

impl Controller for FcrController {
    fn start(
        &mut self,
        state: &SufficientState,
        _: &StateFeatures,
        _: &mut dyn RngCore,
    ) -> SleepAction {
        self.decide(state)
    }

    fn advance(&mut self, _: u64, step: &Step<'_>, _: &mut dyn RngCore) -> SleepAction {
        self.decide(step.next_state)
    }
}

/// Assigns each awake sensor its Q_MDP sleep time from a precomputed table.
#[derive(Debug, Clone)]
pub struct QmdpController {
    model: TransitionModel,
    table: PerSensorValueTable,
    settings: QmdpSettings,
}

impl QmdpController {
    pub fn new(model: TransitionModel, settings: QmdpSettings) -> Result<Self> {
        let table = qmdp_values(&model, &settings)?;
        Ok(Self {
            model,
            table,
            settings,
        })
    }

    pub fn table(&self) -> &PerSensorValueTable {
        &self.table
    }

    fn decide(&self, state: &SufficientState) -> SleepAction {
        let powers = propagate_powers(&state.belief, &self.model, self.settings.max_sleep + 1);
        SleepAction(
            (0..state.cells())
                .map(|l| {
                    if state.is_awake(l) {
                        argmin_first(
                            qmdp_objective(
                                &self.table,
                                &powers,
                                l,
                                self.settings.energy,
                                self.settings.convention,
                            )
                            .into_iter(),
                        )
                    } else {
                        0
                    }
                })
                .collect(),
        )
    }
}

impl Controller for QmdpController {
    fn start(
        &mut self,
        state: &SufficientState,
        _: &StateFeatures,
        _: &mut dyn RngCore,
    ) -> SleepAction {
        self.decide(state)
    }

    fn advance(&mut self, _: u64, step: &Step<'_>, _: &mut dyn RngCore) -> SleepAction {
        self.decide(step.next_state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::GridSpec;

    fn swap2() -> TransitionModel {
        TransitionModel::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn single_cell_closed_form() {
        let settings = QmdpSettings {
            max_sleep: 1,
            ..Default::default()
        };
        let table = qmdp_values(&TransitionModel::identity(1), &settings).unwrap();
        // u = 0 forever: c / (1 - gamma) = 1.
        assert!((table.value(0, 0) - 1.0).abs() < 1e-8);
        assert_eq!(
            qmdp_sleep_time(
                &table,
                &[1.0],
                0,
                &TransitionModel::identity(1),
                0.1,
                1,
                settings.convention
            ),
            0
        );
    }

    #[test]
    fn free_energy_means_always_awake() {
        let grid = GridSpec::new(3, 3).unwrap();
        let model = TransitionModel::lazy_random_walk(&grid);
        let settings = QmdpSettings {
            energy: 0.0,
            ..Default::default()
        };
        let table = qmdp_values(&model, &settings).unwrap();
        for l in 0..9 {
            for i in 0..9 {
                let mut p = vec![0.0; 9];
                p[i] = 1.0;
                assert_eq!(
                    qmdp_sleep_time(&table, &p, l, &model, 0.0, 3, settings.convention),
                    0
                );
            }
        }
    }

    #[test]
    fn table_is_a_fixed_point() {
        let grid = GridSpec::new(3, 4).unwrap();
        let model = TransitionModel::lazy_random_walk(&grid);
        for convention in [
            Convention::Discounted(0.9),
            Convention::Relative { reference: 0 },
        ] {
            let settings = QmdpSettings {
                convention,
                tolerance: 1e-10,
                ..Default::default()
            };
            let table = qmdp_values(&model, &settings).unwrap();
            let again = qmdp_resweep(&model, &table, &settings);
            assert!(linalg::max_abs_diff(&table.values, &again.values) < 1e-10);
        }
    }

    #[test]
    fn zero_max_sleep_never_sleeps() {
        let model = swap2();
        let settings = QmdpSettings {
            max_sleep: 0,
            ..Default::default()
        };
        let table = qmdp_values(&model, &settings).unwrap();
        assert_eq!(
            qmdp_sleep_time(&table, &[0.3, 0.7], 1, &model, 0.1, 0, settings.convention),
            0
        );
    }

    #[test]
    fn non_convergence_names_sensor() {
        let settings = QmdpSettings {
            max_sweeps: 3,
            tolerance: 1e-12,
            ..Default::default()
        };
        assert!(matches!(
            qmdp_values(&swap2(), &settings),
            Err(Error::NonConvergence { sweeps: 3, .. })
        ));
    }

    #[test]
    fn fcr_two_branch() {
        let u = fcr_sleep_time(&[1.0, 0.0], 1, &swap2(), 0.1, 1, 1, Convention::default()).unwrap();
        assert_eq!(u, 0);
        let planner =
            FcrPlanner::new(&[1.0, 0.0], &swap2(), 0.1, 1, 1, Convention::default()).unwrap();
        let values = planner.action_values(1);
        assert!((values[0] - 0.1).abs() < 1e-15);
        assert!((values[1] - 1.1).abs() < 1e-15);
    }

    #[test]
    fn fcr_static_intruder_stays_awake() {
        let model = TransitionModel::identity(4);
        for depth in 1..4 {
            let u = fcr_sleep_time(
                &[0.0, 0.0, 1.0, 0.0],
                2,
                &model,
                0.1,
                3,
                depth,
                Convention::default(),
            )
            .unwrap();
            assert_eq!(u, 0);
        }
    }

    #[test]
    fn fcr_unreachable_sensor_sleeps_longest() {
        // Cells 0 and 1 swap; cell 2 is never entered.
        let model =
            TransitionModel::new(3, vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        for depth in 2..4 {
            let u = fcr_sleep_time(
                &[0.5, 0.5, 0.0],
                2,
                &model,
                0.1,
                3,
                depth,
                Convention::default(),
            )
            .unwrap();
            assert_eq!(u, 3);
        }
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(fcr_sleep_time(
            &[1.0],
            0,
            &TransitionModel::identity(1),
            0.1,
            1,
            0,
            Convention::default()
        )
        .is_err());
        assert!(Convention::Discounted(1.5).validate(2).is_err());
        assert!(Convention::Relative { reference: 2 }.validate(2).is_err());
    }
}
