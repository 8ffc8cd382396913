//! Independent reference computations for the integration tests. Nothing
//! here calls into the crate under test.

#![allow(dead_code)]

use rand::Rng;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        assert!(a[col][col].abs() > 1e-14, "singular system");
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Stationary distribution of an irreducible chain given as rows.
pub fn stationary(p: &[Vec<f64>]) -> Vec<f64> {
    let n = p.len();
    // pi (P - I) = 0 with the last equation replaced by sum(pi) = 1.
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[j][i] = p[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[n - 1] = vec![1.0; n];
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    solve(a, b)
}

/// Tabular MDP given as `cost[x][a]` and `trans[x][a][y]`.
#[derive(Debug, Clone)]
pub struct Mdp {
    pub cost: Vec<Vec<f64>>,
    pub trans: Vec<Vec<Vec<f64>>>,
}

impl Mdp {
    pub fn random<R: Rng>(states: usize, actions: usize, rng: &mut R) -> Self {
        let cost = (0..states)
            .map(|_| (0..actions).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let trans = (0..states)
            .map(|_| {
                (0..actions)
                    .map(|_| {
                        let raw: Vec<f64> = (0..states).map(|_| rng.gen::<f64>() + 1e-3).collect();
                        let s: f64 = raw.iter().sum();
                        raw.into_iter().map(|v| v / s).collect()
                    })
                    .collect()
            })
            .collect();
        Self { cost, trans }
    }

    /// Long-run average cost of a deterministic stationary policy.
    pub fn policy_average(&self, policy: &[usize]) -> f64 {
        let rows: Vec<Vec<f64>> = policy
            .iter()
            .enumerate()
            .map(|(x, &a)| self.trans[x][a].clone())
            .collect();
        let pi = stationary(&rows);
        pi.iter()
            .enumerate()
            .map(|(x, w)| w * self.cost[x][policy[x]])
            .sum()
    }

    /// Minimum average cost over every deterministic stationary policy.
    pub fn optimal_average(&self) -> f64 {
        let states = self.cost.len();
        let actions = self.cost[0].len();
        let total = actions.pow(states as u32);
        (0..total)
            .map(|mut code| {
                let policy: Vec<usize> = (0..states)
                    .map(|_| {
                        let a = code % actions;
                        code /= actions;
                        a
                    })
                    .collect();
                self.policy_average(&policy)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Row-major matrix power applied to a row vector: `p M^k`.
pub fn propagate(p: &[f64], m: &[Vec<f64>], k: usize) -> Vec<f64> {
    let mut v = p.to_vec();
    for _ in 0..k {
        let mut next = vec![0.0; v.len()];
        for (i, &vi) in v.iter().enumerate() {
            for (j, n) in next.iter_mut().enumerate() {
                *n += vi * m[i][j];
            }
        }
        v = next;
    }
    v
}

/// Cost of sleeping `u` steps from belief `p`, then continuing with
/// `future(k)` weighted by `weight`: `sum_{j=1..u} [pP^j]_l + c + weight * E[future]`.
pub fn sleep_cost(
    p: &[f64],
    m: &[Vec<f64>],
    sensor: usize,
    energy: f64,
    u: usize,
    weight: f64,
    future: &dyn Fn(&[f64]) -> f64,
) -> f64 {
    let tracking: f64 = (1..=u).map(|j| propagate(p, m, j)[sensor]).sum();
    tracking + energy + weight * future(&propagate(p, m, u + 1))
}

/// Exact discounted value of a per-sensor sleep rule `rule[i]` applied when
/// the intruder is seen at `i`, by a linear solve.
pub fn sleep_rule_values(
    m: &[Vec<f64>],
    sensor: usize,
    energy: f64,
    gamma: f64,
    rule: &[usize],
) -> Vec<f64> {
    let n = m.len();
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let u = rule[i];
        b[i] = (1..=u).map(|j| propagate(&e, m, j)[sensor]).sum::<f64>() + energy;
        let land = propagate(&e, m, u + 1);
        let w = gamma.powi(u as i32 + 1);
        for k in 0..n {
            a[i][k] = if i == k { 1.0 } else { 0.0 } - w * land[k];
        }
    }
    solve(a, b)
}

/// Monte-Carlo estimate of the same values by simulating the intruder and
/// the sleep rule. Returns the mean over `episodes` runs per start cell.
pub fn sleep_rule_values_mc<R: Rng>(
    m: &[Vec<f64>],
    sensor: usize,
    energy: f64,
    gamma: f64,
    rule: &[usize],
    episodes: usize,
    rng: &mut R,
) -> Vec<f64> {
    let n = m.len();
    let horizon = (1e-7f64.ln() / gamma.ln()).ceil() as usize;
    let step = |x: usize, rng: &mut R| {
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        for (y, &w) in m[x].iter().enumerate() {
            acc += w;
            if r < acc {
                return y;
            }
        }
        n - 1
    };
    (0..n)
        .map(|start| {
            let mut total = 0.0;
            for _ in 0..episodes {
                let (mut x, mut t, mut weight, mut value) = (start, 0usize, 1.0, 0.0);
                while t < horizon {
                    let u = rule[x];
                    let mut block = energy;
                    for _ in 0..u {
                        x = step(x, rng);
                        if x == sensor {
                            block += 1.0;
                        }
                    }
                    x = step(x, rng);
                    value += weight * block;
                    weight *= gamma.powi(u as i32 + 1);
                    t += u + 1;
                }
                total += value;
            }
            total / episodes as f64
        })
        .collect()
}
