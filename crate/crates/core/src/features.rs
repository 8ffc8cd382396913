//! Energy-versus-tracking features.
//!
//! For sensor `i` and candidate sleep time `u`,
//!
//! ```text
//! delta_i(u) = 1/(u+1) - sum_{j=1..u} [p P^j]_i / sum_{j=1..H} [p P^j]_i
//! ```
//!
//! The first term is the energy cost of the choice, the second the share of
//! the near-term intruder mass at `i` that the sensor would miss. Values
//! with `|delta| > xi` are replaced by a large constant `top`, which prunes
//! them from every minimisation.
//!
//! [`PowerCache`] holds the partial sums `sum_{j<=u} P^j` (for `u <= u_max`)
//! and `sum_{j<=H} P^j` so a whole state's table costs `O(u_max N^2)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::env::{SleepAction, SufficientState, TransitionModel};
use crate::linalg;
use crate::{Error, Result};

/// Sleep times are stored in a `u64` bitmask.
pub const MAX_SLEEP_LIMIT: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureParams {
    /// Pruning threshold `xi`.
    pub xi: f64,
    /// Value substituted for pruned components.
    pub top: f64,
    /// Truncation horizon `H` of the denominator sum.
    pub horizon: usize,
    /// Largest assignable sleep time `u_max`.
    pub max_sleep: usize,
    pub forced: ForcedFeature,
}

/// Feature value of a sleep time that is taken without being `xi`-close:
/// a sleeping sensor's residual, or the fallback of an empty admissible set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForcedFeature {
    /// Pruned like every other entry, so `top` when `|delta| > xi`.
    Pruned,
    /// The unpruned `delta`. Keeps `top` out of the value of every action
    /// that can actually be taken.
    #[default]
    Raw,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            xi: 0.1,
            top: 1e6,
            horizon: 50,
            max_sleep: 3,
            forced: ForcedFeature::Raw,
        }
    }
}

impl FeatureParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0) {
            return Err(Error::InvalidConfig("xi must be positive"));
        }
        if !(self.top > 1.0) {
            return Err(Error::InvalidConfig("top must exceed 1"));
        }
        if self.max_sleep > MAX_SLEEP_LIMIT {
            return Err(Error::InvalidConfig(
                "max sleep time above 63 is not supported",
            ));
        }
        if self.horizon == 0 || self.horizon < self.max_sleep {
            return Err(Error::InvalidConfig(
                "horizon must be positive and at least the max sleep time",
            ));
        }
        Ok(())
    }

    /// `delta` if it lies within `xi` of zero, `top` otherwise.
    pub fn prune(&self, delta: f64) -> f64 {
        if libm::fabs(delta) <= self.xi {
            delta
        } else {
            self.top
        }
    }
}

/// `delta_i(u)` by direct propagation of `p` through `P`, `H` times.
pub fn feature_delta(
    p: &[f64],
    model: &TransitionModel,
    sensor: usize,
    sleep: usize,
    horizon: usize,
) -> f64 {
    let mut q = p.to_vec();
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for j in 1..=horizon {
        q = model.propagate(&q);
        if j <= sleep {
            numerator += q[sensor];
        }
        denominator += q[sensor];
    }
    delta_from_sums(sleep, numerator, denominator)
}

fn delta_from_sums(sleep: usize, numerator: f64, denominator: f64) -> f64 {
    let energy = 1.0 / (sleep as f64 + 1.0);
    if denominator <= 0.0 {
        return energy;
    }
    energy - (numerator / denominator).min(1.0)
}

/// Set of sleep times in `0..=63`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AdmissibleSet(u64);

impl AdmissibleSet {
    pub fn singleton(u: usize) -> Self {
        Self(1 << u)
    }

    pub fn full(max_sleep: usize) -> Self {
        Self(if max_sleep >= 63 {
            u64::MAX
        } else {
            (1u64 << (max_sleep + 1)) - 1
        })
    }

    pub fn insert(&mut self, u: usize) {
        self.0 |= 1 << u;
    }

    pub fn contains(&self, u: usize) -> bool {
        u < 64 && self.0 & (1 << u) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.0;
        (0..64).filter(move |u| bits & (1 << u) != 0)
    }

    /// The `k`-th smallest member.
    pub fn nth(&self, k: usize) -> Option<usize> {
        self.iter().nth(k)
    }
}

/// `{u : |delta_i(u)| <= xi}`, or the `|delta|`-minimising `u` if that is empty.
fn admissible_from_deltas(deltas: &[f64], xi: f64) -> AdmissibleSet {
    let mut set = AdmissibleSet::default();
    let mut best = 0;
    for (u, &d) in deltas.iter().enumerate() {
        if libm::fabs(d) <= xi {
            set.insert(u);
        }
        if libm::fabs(d) < libm::fabs(deltas[best]) {
            best = u;
        }
    }
    if set.is_empty() {
        set.insert(best);
    }
    set
}

/// Admissible sleep times for awake sensor `sensor`, by direct summation.
pub fn admissible_sleep_times(
    state: &SufficientState,
    model: &TransitionModel,
    sensor: usize,
    params: &FeatureParams,
) -> AdmissibleSet {
    let deltas: Vec<f64> = (0..=params.max_sleep)
        .map(|u| feature_delta(&state.belief, model, sensor, u, params.horizon))
        .collect();
    admissible_from_deltas(&deltas, params.xi)
}

/// The pruned feature vector `sigma_{s,a}` by direct summation.
pub fn feature_vector(
    state: &SufficientState,
    action: &SleepAction,
    model: &TransitionModel,
    params: &FeatureParams,
) -> Vec<f64> {
    (0..state.cells())
        .map(|i| {
            let u = effective_sleep(state.residual[i], action.0[i]);
            let delta = feature_delta(&state.belief, model, i, u, params.horizon);
            let forced = match (params.forced, state.residual[i]) {
                (ForcedFeature::Pruned, _) => false,
                (ForcedFeature::Raw, 0) => {
                    let set = admissible_sleep_times(state, model, i, params);
                    set.len() == 1 && set.contains(u)
                }
                (ForcedFeature::Raw, _) => true,
            };
            if forced {
                delta
            } else {
                params.prune(delta)
            }
        })
        .collect()
}

/// The sleep time that determines sensor `i`'s feature: its own action when
/// awake, its remaining sleep otherwise.
fn effective_sleep(residual: usize, action: usize) -> usize {
    if residual > 0 {
        residual
    } else {
        action
    }
}

/// Precomputed partial sums of matrix powers for one mobility model.
#[derive(Debug, Clone)]
pub struct PowerCache {
    cells: usize,
    params: FeatureParams,
    /// `prefix[u-1] = sum_{j=1..u} P^j` for `u = 1..=max_sleep`.
    prefix: Vec<Vec<f64>>,
    /// `sum_{j=1..H} P^j`.
    total: Vec<f64>,
}

impl PowerCache {
    pub fn new(model: &TransitionModel, params: FeatureParams) -> Result<Self> {
        params.validate()?;
        let n = model.cells();
        let p = model.as_slice();
        let mut prefix = Vec::with_capacity(params.max_sleep);
        let mut power = p.to_vec();
        let mut acc = vec![0.0; n * n];
        for u in 1..=params.max_sleep {
            if u > 1 {
                power = linalg::mat_mul(p, &power, n);
            }
            acc.iter_mut().zip(&power).for_each(|(a, b)| *a += b);
            prefix.push(acc.clone());
        }
        let (total, _) = power_sum(p, n, params.horizon);
        Ok(Self {
            cells: n,
            params,
            prefix,
            total,
        })
    }

    pub fn params(&self) -> &FeatureParams {
        &self.params
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// All `delta_i(u)` for the belief `p`, row-major `N x (u_max+1)`.
    pub fn deltas(&self, p: &[f64]) -> Vec<f64> {
        let n = self.cells;
        let width = self.params.max_sleep + 1;
        let denom = linalg::vec_mat(p, &self.total, n);
        let partial: Vec<Vec<f64>> = self
            .prefix
            .iter()
            .map(|m| linalg::vec_mat(p, m, n))
            .collect();
        let mut out = vec![0.0; n * width];
        for i in 0..n {
            for u in 0..width {
                let numerator = if u == 0 { 0.0 } else { partial[u - 1][i] };
                out[i * width + u] = delta_from_sums(u, numerator, denom[i]);
            }
        }
        out
    }

    pub fn state_features(&self, state: &SufficientState) -> StateFeatures {
        StateFeatures::from_deltas(state, &self.deltas(&state.belief), &self.params)
    }
}

/// `(sum_{j=1..h} P^j, P^h)` by binary splitting.
fn power_sum(p: &[f64], n: usize, h: usize) -> (Vec<f64>, Vec<f64>) {
    if h == 0 {
        return (vec![0.0; n * n], linalg::identity(n));
    }
    if h % 2 == 0 {
        let (s, q) = power_sum(p, n, h / 2);
        let mut shifted = linalg::mat_mul(&q, &s, n);
        shifted.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
        (shifted, linalg::mat_mul(&q, &q, n))
    } else {
        let (mut s, q) = power_sum(p, n, h - 1);
        let q = linalg::mat_mul(p, &q, n);
        s.iter_mut().zip(&q).for_each(|(a, b)| *a += b);
        (s, q)
    }
}

/// Every sensor's pruned feature values and admissible set at one state.
///
/// Sleeping sensors have the singleton set `{r(i)}`, so minimisations over
/// the joint action factor into independent per-sensor minimisations.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFeatures {
    width: usize,
    sigma: Vec<f64>,
    residual: Vec<usize>,
    admissible: Vec<AdmissibleSet>,
}

impl StateFeatures {
    pub fn from_deltas(state: &SufficientState, deltas: &[f64], params: &FeatureParams) -> Self {
        let width = params.max_sleep + 1;
        let n = state.cells();
        debug_assert_eq!(deltas.len(), n * width);
        let mut sigma: Vec<f64> = deltas.iter().map(|&d| params.prune(d)).collect();
        let admissible: Vec<AdmissibleSet> = (0..n)
            .map(|i| match state.residual[i] {
                0 => admissible_from_deltas(&deltas[i * width..(i + 1) * width], params.xi),
                r => AdmissibleSet::singleton(r),
            })
            .collect();
        if params.forced == ForcedFeature::Raw {
            for (i, set) in admissible.iter().enumerate() {
                if set.len() == 1 {
                    let k = i * width + set.nth(0).unwrap_or(0);
                    sigma[k] = deltas[k];
                }
            }
        }
        Self {
            width,
            sigma,
            residual: state.residual.clone(),
            admissible,
        }
    }

    pub fn cells(&self) -> usize {
        self.residual.len()
    }

    pub fn max_sleep(&self) -> usize {
        self.width - 1
    }

    pub fn is_awake(&self, sensor: usize) -> bool {
        self.residual[sensor] == 0
    }

    /// `sigma_i(u)`.
    pub fn value(&self, sensor: usize, sleep: usize) -> f64 {
        self.sigma[sensor * self.width + sleep]
    }

    pub fn values(&self, sensor: usize) -> &[f64] {
        &self.sigma[sensor * self.width..(sensor + 1) * self.width]
    }

    pub fn admissible(&self, sensor: usize) -> AdmissibleSet {
        self.admissible[sensor]
    }

    /// `sigma_{s,a}(i)`.
    pub fn component(&self, sensor: usize, action: &SleepAction) -> f64 {
        self.value(
            sensor,
            effective_sleep(self.residual[sensor], action.0[sensor]),
        )
    }

    pub fn vector(&self, action: &SleepAction) -> Vec<f64> {
        (0..self.cells())
            .map(|i| self.component(i, action))
            .collect()
    }

    /// `theta^T sigma_{s,a}`.
    pub fn dot(&self, theta: &[f64], action: &SleepAction) -> f64 {
        theta
            .iter()
            .enumerate()
            .map(|(i, t)| t * self.component(i, action))
            .sum()
    }

    /// Per-sensor minimiser of `theta_i sigma_i(u)` over the admissible set,
    /// ties to the smaller `u`. Sleeping sensors return their residual.
    pub fn argmin_component(&self, sensor: usize, weight: f64) -> usize {
        let mut best = None;
        for u in self.admissible[sensor].iter() {
            let v = weight * self.value(sensor, u);
            match best {
                Some((_, bv)) if v >= bv => {}
                _ => best = Some((u, v)),
            }
        }
        best.map(|(u, _)| u).unwrap_or(0)
    }

    /// Joint minimiser of `theta^T sigma_{s,v}`; valid because the objective
    /// is separable and `theta > 0`. Entries for sleeping sensors are zero.
    pub fn greedy(&self, theta: &[f64]) -> SleepAction {
        SleepAction(
            (0..self.cells())
                .map(|i| {
                    if self.is_awake(i) {
                        self.argmin_component(i, theta[i])
                    } else {
                        0
                    }
                })
                .collect(),
        )
    }

    /// `min_v theta^T sigma_{s,v}`.
    pub fn min_dot(&self, theta: &[f64]) -> f64 {
        (0..self.cells())
            .map(|i| {
                let u = self.argmin_component(i, theta[i]);
                theta[i] * self.value(i, u)
            })
            .sum()
    }
}
