//! Sum-rate bounds for the two-user MAC whose state components are known
//! non-causally and separately at the two encoders.
//!
//! Two bounds are evaluated over test channels `P(U_j | S_j)` with
//! deterministic input maps `x_j(u_j, s_j)` under the cost constraint
//! `E[kappa_j(X_j)] <= tau`:
//!
//! - independent binning with iid codes:
//!   `[I(U1 U2; Y) - I(U1; S1) - I(U2; S2)]+`,
//! - correlated partitioning of one coset code over `F_q`:
//!   `[min_j H(U_j | S_j) - H(U1 (+)q U2 | Y)]+`.
//!
//! Every deterministic map pair is enumerated up to relabelings of `U` that
//! leave the objective unchanged, and the laws are optimized by multi-start
//! coordinate ascent on a coarse then a fine grid, followed by a pattern
//! search on the most promising pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel_models::{ChannelModel, CostFn};
use crate::error::{domain, Error, Result};
use crate::finite_math::{Pmf, Prob};
use crate::report::sig9;

/// Slack on the cost constraint when testing feasibility.
pub const COST_SLACK: f64 = 1e-9;
/// Largest auxiliary alphabet.
pub const MAX_AUX_SIZE: usize = 4;
pub const SWEEP_CSV_HEADER: &str = "tau,iid_upper,coset_lower";

/// Pairs whose best restart is within this much of the overall best are
/// polished.
const POLISH_WINDOW: f64 = 1e-2;
const MAX_ROUNDS: usize = 200;
const IMPROVEMENT: f64 = 1e-13;
/// Bound values below this are rounding noise in the entropy sums and are
/// reported as zero.
const NOISE_FLOOR: f64 = 1e-12;

/// An auxiliary test channel for both encoders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DstxTestChannel {
    /// Field size of the auxiliaries for the coset bound, `None` for the
    /// iid bound.
    pub q: Option<u8>,
    pub aux_sizes: [usize; 2],
    /// `u_laws[j][s][u] = P(U_j = u | S_j = s)`.
    pub u_laws: [Vec<Vec<f64>>; 2],
    /// `x_maps[j][u * |S_j| + s] = x_j(u, s)`.
    pub x_maps: [Vec<usize>; 2],
}

/// Best value found and the test channel achieving it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub test_channel: DstxTestChannel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub coarse_step: f64,
    pub fine_step: f64,
    /// Smallest pattern-search step.
    pub polish_tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 20,
            coarse_step: 0.02,
            fine_step: 0.002,
            polish_tolerance: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: Prob,
    pub iid_upper: f64,
    pub coset_lower: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    Iid,
    Coset(u8),
}

fn xlogx_sum(p: impl IntoIterator<Item = f64>) -> f64 {
    -p.into_iter().filter(|&v| v > 0.0).map(|v| v * v.log2()).sum::<f64>()
}

/// The channel seen through a fixed pair of maps:
/// `v[(((u1 * nu2 + u2) * ns1 + s1) * ns2 + s2) * ny + y]`.
struct Evaluator {
    bound: Bound,
    nu: [usize; 2],
    ns: [usize; 2],
    ny: usize,
    state: Vec<f64>,
    state_marginals: [Vec<f64>; 2],
    v: Vec<f64>,
}

/// Channel data shared by every map pair.
struct Setup {
    nx: [usize; 2],
    ns: [usize; 2],
    ny: usize,
    state: Vec<f64>,
    state_marginals: [Vec<f64>; 2],
    costs: [Vec<f64>; 2],
    rows: Vec<Vec<f64>>,
}

impl Setup {
    fn new(ch: &ChannelModel) -> Result<Self> {
        let (&[nx1, nx2], &[ns1, ns2]) = (ch.input_dims(), ch.state_dims()) else {
            return Err(Error::Dimension("expected a channel with two inputs and two state components".into()));
        };
        let state = ch
            .state_law()
            .ok_or_else(|| domain("the channel has no state law"))?
            .probs()
            .to_vec();
        let mut m1 = vec![0.0; ns1];
        let mut m2 = vec![0.0; ns2];
        for s1 in 0..ns1 {
            for s2 in 0..ns2 {
                m1[s1] += state[s1 * ns2 + s2];
                m2[s2] += state[s1 * ns2 + s2];
            }
        }
        let cost_for = |j: usize, n: usize| {
            ch.cost_fns()
                .iter()
                .find(|c| c.terminal == j)
                .map_or_else(|| vec![0.0; n], |c: &CostFn| c.values.clone())
        };
        Ok(Setup {
            nx: [nx1, nx2],
            ns: [ns1, ns2],
            ny: ch.output_dims().iter().product(),
            state,
            state_marginals: [m1, m2],
            costs: [cost_for(0, nx1), cost_for(1, nx2)],
            rows: ch.rows().to_vec(),
        })
    }

    fn evaluator(&self, bound: Bound, nu: [usize; 2], maps: [&[usize]; 2]) -> Evaluator {
        let [ns1, ns2] = self.ns;
        let ny = self.ny;
        let mut v = Vec::with_capacity(nu[0] * nu[1] * ns1 * ns2 * ny);
        for u1 in 0..nu[0] {
            for u2 in 0..nu[1] {
                for s1 in 0..ns1 {
                    for s2 in 0..ns2 {
                        let x1 = maps[0][u1 * ns1 + s1];
                        let x2 = maps[1][u2 * ns2 + s2];
                        let r = ((x1 * self.nx[1] + x2) * ns1 + s1) * ns2 + s2;
                        v.extend_from_slice(&self.rows[r]);
                    }
                }
            }
        }
        Evaluator {
            bound,
            nu,
            ns: self.ns,
            ny,
            state: self.state.clone(),
            state_marginals: self.state_marginals.clone(),
            v,
        }
    }

    /// `kappa_j(x_j(u, s))` laid out as `[s][u]`.
    fn map_costs(&self, j: usize, nu: usize, map: &[usize]) -> Vec<Vec<f64>> {
        let ns = self.ns[j];
        (0..ns)
            .map(|s| (0..nu).map(|u| self.costs[j][map[u * ns + s]]).collect())
            .collect()
    }
}

impl Evaluator {
    fn objective(&self, laws: &[Vec<Vec<f64>>; 2]) -> f64 {
        let [nu1, nu2] = self.nu;
        let [ns1, ns2] = self.ns;
        let ny = self.ny;
        let mut p = vec![0.0; nu1 * nu2 * ny];
        let mut idx = 0;
        for u1 in 0..nu1 {
            for u2 in 0..nu2 {
                let out = &mut p[(u1 * nu2 + u2) * ny..(u1 * nu2 + u2 + 1) * ny];
                for s1 in 0..ns1 {
                    let a = laws[0][s1][u1];
                    for (s2, row2) in laws[1].iter().enumerate() {
                        let w = self.state[s1 * ns2 + s2] * a * row2[u2];
                        if w > 0.0 {
                            for (o, &t) in out.iter_mut().zip(&self.v[idx..idx + ny]) {
                                *o += w * t;
                            }
                        }
                        idx += ny;
                    }
                }
            }
        }
        let mut py = vec![0.0; ny];
        for (i, &v) in p.iter().enumerate() {
            py[i % ny] += v;
        }
        let h_y = xlogx_sum(py.iter().copied());
        let cond = |j: usize| -> f64 {
            laws[j]
                .iter()
                .zip(&self.state_marginals[j])
                .map(|(row, &ps)| ps * xlogx_sum(row.iter().copied()))
                .sum()
        };
        match self.bound {
            Bound::Iid => {
                let h_uuy = xlogx_sum(p.iter().copied());
                let h_uu = xlogx_sum(p.chunks(ny).map(|c| c.iter().sum()));
                let marginal = |j: usize| -> f64 {
                    let mut m = vec![0.0; self.nu[j]];
                    for (row, &ps) in laws[j].iter().zip(&self.state_marginals[j]) {
                        for (mu, &r) in m.iter_mut().zip(row) {
                            *mu += ps * r;
                        }
                    }
                    xlogx_sum(m)
                };
                (h_y + h_uu - h_uuy) - (marginal(0) - cond(0)) - (marginal(1) - cond(1))
            }
            Bound::Coset(q) => {
                let q = q as usize;
                let mut pw = vec![0.0; q * ny];
                for u1 in 0..nu1 {
                    for u2 in 0..nu2 {
                        let w = (u1 + u2) % q;
                        for y in 0..ny {
                            pw[w * ny + y] += p[(u1 * nu2 + u2) * ny + y];
                        }
                    }
                }
                cond(0).min(cond(1)) - (xlogx_sum(pw) - h_y)
            }
        }
    }
}

/// All maps `U x S -> X` as tables indexed `u * |S| + s`, one per orbit of
/// the relabelings in `relabel`.
fn canonical_maps(nu: usize, ns: usize, nx: usize, relabel: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let cells = nu * ns;
    let total = nx.pow(cells as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut map = vec![0; cells];
        let mut c = code;
        for m in map.iter_mut().rev() {
            *m = c % nx;
            c /= nx;
        }
        let is_canonical = relabel.iter().all(|perm| {
            let mut image = vec![0; cells];
            for u in 0..nu {
                for s in 0..ns {
                    image[perm[u] * ns + s] = map[u * ns + s];
                }
            }
            image >= map
        });
        if is_canonical {
            out.push(map);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut next = p.clone();
            next.insert(pos, n - 1);
            out.push(next);
        }
    }
    out
}

fn relabelings(bound: Bound, nu: usize) -> Vec<Vec<usize>> {
    match bound {
        Bound::Iid => permutations(nu),
        Bound::Coset(q) => (0..q as usize).map(|c| (0..nu).map(|u| (u + c) % nu).collect()).collect(),
    }
}

/// Optimization state for one map pair.
struct Problem<'a> {
    eval: Evaluator,
    /// `costs[j][s][u]`.
    costs: [Vec<Vec<f64>>; 2],
    marginals: &'a [Vec<f64>; 2],
    tau: f64,
}

#[derive(Clone, Copy)]
struct Coord {
    j: usize,
    s: usize,
    a: usize,
}

impl Problem<'_> {
    fn cost(&self, j: usize, law: &[Vec<f64>]) -> f64 {
        law.iter()
            .zip(&self.costs[j])
            .zip(&self.marginals[j])
            .map(|((row, c), &ps)| ps * row.iter().zip(c).map(|(p, k)| p * k).sum::<f64>())
            .sum()
    }

    fn min_cost_law(&self, j: usize) -> Vec<Vec<f64>> {
        self.costs[j]
            .iter()
            .map(|c| {
                let best = (0..c.len()).fold(0, |b, u| if c[u] < c[b] { u } else { b });
                let mut row = vec![0.0; c.len()];
                row[best] = 1.0;
                row
            })
            .collect()
    }

    fn feasible_pair(&self) -> bool {
        (0..2).all(|j| self.cost(j, &self.min_cost_law(j)) <= self.tau + COST_SLACK)
    }

    fn coords(&self) -> Vec<Coord> {
        let mut out = Vec::new();
        for j in 0..2 {
            let nu = self.eval.nu[j];
            let free = if nu == 2 { 1 } else { nu };
            for s in 0..self.eval.ns[j] {
                for a in 0..free {
                    out.push(Coord { j, s, a });
                }
            }
        }
        out
    }

    /// Row after setting entry `a` to `t` and rescaling the others.
    fn moved_row(row: &[f64], a: usize, t: f64) -> Vec<f64> {
        let rest = 1.0 - row[a];
        let n = row.len();
        row.iter()
            .enumerate()
            .map(|(b, &p)| {
                if b == a {
                    t
                } else if rest > 0.0 {
                    p * (1.0 - t) / rest
                } else {
                    (1.0 - t) / (n - 1) as f64
                }
            })
            .collect()
    }

    /// Values of `t` keeping encoder `j` within budget when coordinate `c`
    /// moves, as a closed interval in `[0, 1]`.
    fn interval(&self, laws: &[Vec<Vec<f64>>; 2], c: Coord) -> Option<(f64, f64)> {
        let row = &laws[c.j][c.s];
        let ps = self.marginals[c.j][c.s];
        let at = |t: f64| {
            let r = Self::moved_row(row, c.a, t);
            r.iter().zip(&self.costs[c.j][c.s]).map(|(p, k)| p * k).sum::<f64>()
        };
        let own = row.iter().zip(&self.costs[c.j][c.s]).map(|(p, k)| p * k).sum::<f64>();
        let base = self.cost(c.j, &laws[c.j]) - ps * own;
        let (c0, c1) = (base + ps * at(0.0), base + ps * at(1.0));
        let slope = c1 - c0;
        let budget = self.tau;
        if slope.abs() < 1e-15 {
            return (c0 <= budget + COST_SLACK).then_some((0.0, 1.0));
        }
        let t_star = (budget - c0) / slope;
        let (lo, hi) = if slope > 0.0 { (0.0, t_star.min(1.0)) } else { (t_star.max(0.0), 1.0) };
        (lo <= hi).then_some((lo, hi))
    }

    fn with_coord(laws: &[Vec<Vec<f64>>; 2], c: Coord, t: f64) -> [Vec<Vec<f64>>; 2] {
        let mut next = laws.clone();
        next[c.j][c.s] = Self::moved_row(&laws[c.j][c.s], c.a, t);
        next
    }

    /// Tries every candidate value for `c` and keeps the best strict
    /// improvement.
    fn line_search(&self, laws: &mut [Vec<Vec<f64>>; 2], value: &mut f64, c: Coord, candidates: &[f64]) -> bool {
        let mut best: Option<(f64, [Vec<Vec<f64>>; 2])> = None;
        for &t in candidates {
            let next = Self::with_coord(laws, c, t);
            let v = self.eval.objective(&next);
            if v > *value + IMPROVEMENT && best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, next));
            }
        }
        if let Some((v, next)) = best {
            *value = v;
            *laws = next;
            true
        } else {
            false
        }
    }

    fn grid_candidates(lo: f64, hi: f64, step: f64, window: Option<(f64, f64)>) -> Vec<f64> {
        let (wlo, whi) = window.map_or((lo, hi), |(a, b)| (a.max(lo), b.min(hi)));
        let first = (wlo / step).ceil() as i64;
        let last = (whi / step).floor() as i64;
        let mut out: Vec<f64> = (first..=last).map(|i| i as f64 * step).collect();
        out.push(wlo);
        out.push(whi);
        out
    }

    fn ascend(&self, laws: &mut [Vec<Vec<f64>>; 2], cfg: &OptimizerConfig) -> f64 {
        let coords = self.coords();
        let mut value = self.eval.objective(laws);
        for fine in [false, true] {
            for _ in 0..MAX_ROUNDS {
                let mut improved = false;
                for &c in &coords {
                    let Some((lo, hi)) = self.interval(laws, c) else {
                        continue;
                    };
                    let candidates = if fine {
                        let t0 = laws[c.j][c.s][c.a];
                        Self::grid_candidates(lo, hi, cfg.fine_step, Some((t0 - cfg.coarse_step, t0 + cfg.coarse_step)))
                    } else {
                        Self::grid_candidates(lo, hi, cfg.coarse_step, None)
                    };
                    improved |= self.line_search(laws, &mut value, c, &candidates);
                }
                if !improved {
                    break;
                }
            }
        }
        value
    }

    /// Candidate moves of one encoder's laws for the pattern search: each
    /// coordinate stepped by `step` either way, alone or followed by
    /// projecting another coordinate of the same encoder back into the
    /// budget.
    fn encoder_moves(&self, laws: &[Vec<Vec<f64>>; 2], j: usize, step: f64) -> Vec<Vec<Vec<f64>>> {
        let coords: Vec<Coord> = self.coords().into_iter().filter(|c| c.j == j).collect();
        let mut out = Vec::new();
        for &c in &coords {
            for dir in [-1.0, 1.0] {
                let t = (laws[c.j][c.s][c.a] + dir * step).clamp(0.0, 1.0);
                if let Some((lo, hi)) = self.interval(laws, c) {
                    out.push(Self::with_coord(laws, c, t.clamp(lo, hi))[j].clone());
                }
                let moved = Self::with_coord(laws, c, t);
                for &d in &coords {
                    if d.s == c.s && d.a == c.a {
                        continue;
                    }
                    let Some((lo, hi)) = self.interval(&moved, d) else {
                        continue;
                    };
                    let next = Self::with_coord(&moved, d, moved[d.j][d.s][d.a].clamp(lo, hi));
                    if self.cost(j, &next[j]) <= self.tau + COST_SLACK {
                        out.push(next[j].clone());
                    }
                }
            }
        }
        out
    }

    /// Pattern search over moves of either encoder alone and of both
    /// encoders at once, halving the step down to the polish tolerance.
    fn polish(&self, laws: &mut [Vec<Vec<f64>>; 2], value: &mut f64, cfg: &OptimizerConfig) {
        let mut step = cfg.fine_step;
        while step >= cfg.polish_tolerance {
            for _ in 0..MAX_ROUNDS {
                let moves: [Vec<Option<Vec<Vec<f64>>>>; 2] = [0, 1].map(|j| {
                    std::iter::once(None)
                        .chain(self.encoder_moves(laws, j, step).into_iter().map(Some))
                        .collect()
                });
                let mut best: Option<(f64, [Vec<Vec<f64>>; 2])> = None;
                for m0 in &moves[0] {
                    for m1 in &moves[1] {
                        if m0.is_none() && m1.is_none() {
                            continue;
                        }
                        let next = [
                            m0.clone().unwrap_or_else(|| laws[0].clone()),
                            m1.clone().unwrap_or_else(|| laws[1].clone()),
                        ];
                        let v = self.eval.objective(&next);
                        if v > *value + IMPROVEMENT && best.as_ref().is_none_or(|(b, _)| v > *b) {
                            best = Some((v, next));
                        }
                    }
                }
                match best {
                    Some((v, next)) => {
                        *value = v;
                        *laws = next;
                    }
                    None => break,
                }
            }
            step /= 2.0;
        }
    }

    fn random_start(&self, rng: &mut ChaCha8Rng) -> [Vec<Vec<f64>>; 2] {
        let mut laws: [Vec<Vec<f64>>; 2] = Default::default();
        for (j, slot) in laws.iter_mut().enumerate() {
            let nu = self.eval.nu[j];
            let law: Vec<Vec<f64>> = (0..self.eval.ns[j])
                .map(|_| {
                    let w: Vec<f64> = (0..nu).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                    let total: f64 = w.iter().sum();
                    w.into_iter().map(|x| x / total).collect()
                })
                .collect();
            *slot = self.project(j, law);
        }
        laws
    }

    /// Mixes `law` with the minimum-cost law until it meets the budget.
    fn project(&self, j: usize, law: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        let c = self.cost(j, &law);
        if c <= self.tau {
            return law;
        }
        let floor = self.min_cost_law(j);
        let c_min = self.cost(j, &floor);
        let lambda = ((self.tau - c_min) / (c - c_min)).clamp(0.0, 1.0);
        law.iter()
            .zip(&floor)
            .map(|(r, f)| r.iter().zip(f).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect())
            .collect()
    }

    fn is_feasible(&self, laws: &[Vec<Vec<f64>>; 2]) -> bool {
        (0..2).all(|j| self.cost(j, &laws[j]) <= self.tau + COST_SLACK)
    }
}

struct PairOutcome {
    value: f64,
    laws: [Vec<Vec<f64>>; 2],
}

fn optimize(
    ch: &ChannelModel,
    tau: Prob,
    bound: Bound,
    aux_size: usize,
    cfg: &OptimizerConfig,
    warm: Option<&DstxTestChannel>,
) -> Result<BoundResult> {
    if !(1..=MAX_AUX_SIZE).contains(&aux_size) {
        return Err(domain(format!("aux_size {aux_size} outside 1..={MAX_AUX_SIZE}")));
    }
    if tau.value() > 0.5 {
        return Err(domain(format!("tau = {} outside [0, 1/2]", tau.value())));
    }
    if cfg.restarts == 0 || !(cfg.coarse_step > 0.0 && cfg.fine_step > 0.0 && cfg.polish_tolerance > 0.0) {
        return Err(domain("optimizer needs at least one restart and positive steps"));
    }
    let setup = Setup::new(ch)?;
    let nu = [aux_size; 2];
    let maps: [Vec<Vec<usize>>; 2] =
        [0, 1].map(|j| canonical_maps(aux_size, setup.ns[j], setup.nx[j], &relabelings(bound, aux_size)));
    let pairs: Vec<(usize, usize)> = (0..maps[0].len())
        .flat_map(|a| (0..maps[1].len()).map(move |b| (a, b)))
        .collect();

    let problem_for = |(a, b): (usize, usize)| Problem {
        eval: setup.evaluator(bound, nu, [&maps[0][a], &maps[1][b]]),
        costs: [setup.map_costs(0, aux_size, &maps[0][a]), setup.map_costs(1, aux_size, &maps[1][b])],
        marginals: &setup.state_marginals,
        tau: tau.value(),
    };

    let outcomes: Vec<Option<PairOutcome>> = pairs
        .par_iter()
        .enumerate()
        .map(|(index, &pair)| {
            let problem = problem_for(pair);
            if !problem.feasible_pair() {
                return None;
            }
            let mut starts = Vec::new();
            if let Some(w) = warm {
                if w.x_maps[0] == maps[0][pair.0] && w.x_maps[1] == maps[1][pair.1] && problem.is_feasible(&w.u_laws) {
                    starts.push(w.u_laws.clone());
                }
            }
            for restart in 0..cfg.restarts {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(((index as u64) << 20) | restart as u64);
                starts.push(problem.random_start(&mut rng));
            }
            starts
                .into_iter()
                .map(|mut laws| {
                    let value = problem.ascend(&mut laws, cfg);
                    PairOutcome { value, laws }
                })
                .max_by(|x, y| x.value.total_cmp(&y.value))
        })
        .collect();

    let best = outcomes
        .iter()
        .flatten()
        .map(|o| o.value)
        .fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return Err(domain("no input map meets the budget"));
    }
    let polished: Vec<(usize, PairOutcome)> = outcomes
        .into_par_iter()
        .enumerate()
        .filter_map(|(i, o)| o.filter(|o| o.value >= best - POLISH_WINDOW).map(|o| (i, o)))
        .map(|(i, mut o)| {
            problem_for(pairs[i]).polish(&mut o.laws, &mut o.value, cfg);
            (i, o)
        })
        .collect();
    let (index, outcome) = polished
        .into_iter()
        .max_by(|(i, x), (k, y)| x.value.total_cmp(&y.value).then(k.cmp(i)))
        .expect("the best pair is always polished");
    let (a, b) = pairs[index];
    Ok(BoundResult {
        value: if outcome.value < NOISE_FLOOR { 0.0 } else { outcome.value },
        test_channel: DstxTestChannel {
            q: match bound {
                Bound::Iid => None,
                Bound::Coset(q) => Some(q),
            },
            aux_sizes: nu,
            u_laws: outcome.laws,
            x_maps: [maps[0][a].clone(), maps[1][b].clone()],
        },
    })
}

/// Default auxiliary size for a field: 2 for `F_2`, 3 for `F_3`.
pub fn default_aux_size(q: u8) -> usize {
    q as usize
}

pub fn iid_sum_rate_ub(ch: &ChannelModel, tau: Prob, aux_size: usize) -> Result<BoundResult> {
    iid_sum_rate_ub_with(ch, tau, aux_size, &OptimizerConfig::default())
}

pub fn iid_sum_rate_ub_with(ch: &ChannelModel, tau: Prob, aux_size: usize, cfg: &OptimizerConfig) -> Result<BoundResult> {
    optimize(ch, tau, Bound::Iid, aux_size, cfg, None)
}

pub fn coset_sum_rate_lb(ch: &ChannelModel, tau: Prob, q: u8) -> Result<BoundResult> {
    coset_sum_rate_lb_with(ch, tau, q, &OptimizerConfig::default())
}

pub fn coset_sum_rate_lb_with(ch: &ChannelModel, tau: Prob, q: u8, cfg: &OptimizerConfig) -> Result<BoundResult> {
    if !matches!(q, 2 | 3) {
        return Err(Error::UnsupportedField(q));
    }
    optimize(ch, tau, Bound::Coset(q), default_aux_size(q), cfg, None)
}

fn validate_test_channel(ch: &ChannelModel, tc: &DstxTestChannel) -> Result<Setup> {
    let setup = Setup::new(ch)?;
    for j in 0..2 {
        let (nu, ns) = (tc.aux_sizes[j], setup.ns[j]);
        if tc.u_laws[j].len() != ns || tc.x_maps[j].len() != nu * ns {
            return Err(Error::Dimension(format!("test channel of encoder {j} has the wrong shape")));
        }
        for row in &tc.u_laws[j] {
            if row.len() != nu {
                return Err(Error::Dimension(format!("a law of encoder {j} has {} entries", row.len())));
            }
            Pmf::new(row.clone())?;
        }
        if tc.x_maps[j].iter().any(|&x| x >= setup.nx[j]) {
            return Err(domain(format!("map of encoder {j} leaves the input alphabet")));
        }
    }
    if let Some(q) = tc.q {
        if tc.aux_sizes != [q as usize; 2] {
            return Err(Error::Dimension("coset auxiliaries must range over F_q".into()));
        }
    }
    Ok(setup)
}

fn objective_of(ch: &ChannelModel, tc: &DstxTestChannel, bound: Bound) -> Result<f64> {
    let setup = validate_test_channel(ch, tc)?;
    let eval = setup.evaluator(bound, tc.aux_sizes, [&tc.x_maps[0], &tc.x_maps[1]]);
    Ok(eval.objective(&tc.u_laws))
}

/// `I(U1 U2; Y) - I(U1; S1) - I(U2; S2)` for a given test channel, before
/// the positive part.
pub fn iid_objective(ch: &ChannelModel, tc: &DstxTestChannel) -> Result<f64> {
    objective_of(ch, tc, Bound::Iid)
}

/// `min_j H(U_j | S_j) - H(U1 (+)q U2 | Y)` for a given test channel, before
/// the positive part.
pub fn coset_objective(ch: &ChannelModel, tc: &DstxTestChannel) -> Result<f64> {
    let q = tc.q.ok_or_else(|| domain("the coset objective needs a field size"))?;
    objective_of(ch, tc, Bound::Coset(q))
}

/// `E[kappa_j(X_j)]` for both encoders.
pub fn test_channel_costs(ch: &ChannelModel, tc: &DstxTestChannel) -> Result<[f64; 2]> {
    let setup = validate_test_channel(ch, tc)?;
    Ok([0, 1].map(|j| {
        let costs = setup.map_costs(j, tc.aux_sizes[j], &tc.x_maps[j]);
        tc.u_laws[j]
            .iter()
            .zip(&costs)
            .zip(&setup.state_marginals[j])
            .map(|((row, c), &ps)| ps * row.iter().zip(c).map(|(p, k)| p * k).sum::<f64>())
            .sum()
    }))
}

fn binary_state_channel(y: impl Fn(usize, usize, usize, usize) -> usize) -> ChannelModel {
    let mut rows = Vec::with_capacity(16);
    for x1 in 0..2 {
        for x2 in 0..2 {
            for s1 in 0..2 {
                for s2 in 0..2 {
                    let mut row = vec![0.0; 2];
                    row[y(x1, x2, s1, s2)] = 1.0;
                    rows.push(row);
                }
            }
        }
    }
    ChannelModel::new(
        vec![2, 2],
        vec![2, 2],
        vec![2],
        rows,
        vec![CostFn::hamming(0), CostFn::hamming(1)],
        Some(Pmf::uniform(4).expect("static law")),
    )
    .expect("static channel")
}

/// Noiseless `Y = X1 + X2 + S1 + S2` over `F_2` with uniform independent
/// states.
pub fn doubly_dirty_channel() -> ChannelModel {
    binary_state_channel(|x1, x2, s1, s2| x1 ^ x2 ^ s1 ^ s2)
}

/// Noiseless `Y = X1 + X2` over `F_2`; the states have no effect.
pub fn binary_adder_channel() -> ChannelModel {
    binary_state_channel(|x1, x2, _, _| x1 ^ x2)
}

pub fn sweep_tau(ch: &ChannelModel, grid_size: usize) -> Result<Vec<SweepRow>> {
    sweep_tau_with(ch, grid_size, &OptimizerConfig::default())
}

/// Both bounds (binary auxiliaries) on the grid `tau_i = i / (2 (n - 1))`.
///
/// Points are visited in ascending order and each optimization is also
/// started from the previous point's optimum, which stays feasible as the
/// budget grows; this keeps both curves nondecreasing.
pub fn sweep_tau_with(ch: &ChannelModel, grid_size: usize, cfg: &OptimizerConfig) -> Result<Vec<SweepRow>> {
    if grid_size < 2 {
        return Err(domain("grid_size must be at least 2"));
    }
    let mut rows = Vec::with_capacity(grid_size);
    let mut warm: [Option<DstxTestChannel>; 2] = [None, None];
    for i in 0..grid_size {
        let tau = Prob::new(0.5 * i as f64 / (grid_size - 1) as f64)?;
        let iid = optimize(ch, tau, Bound::Iid, 2, cfg, warm[0].as_ref())?;
        let coset = optimize(ch, tau, Bound::Coset(2), 2, cfg, warm[1].as_ref())?;
        rows.push(SweepRow {
            tau,
            iid_upper: iid.value,
            coset_lower: coset.value,
        });
        warm = [Some(iid.test_channel), Some(coset.test_channel)];
    }
    Ok(rows)
}

/// CSV with header [`SWEEP_CSV_HEADER`] and 9 significant digits.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", sig9(r.tau.value()), sig9(r.iid_upper), sig9(r.coset_lower)));
    }
    out
}

/// Smallest and largest `tau` at which the coset bound exceeds the iid bound
/// by more than `margin`.
pub fn coset_advantage_band(rows: &[SweepRow], margin: f64) -> Option<(Prob, Prob)> {
    let mut hits = rows.iter().filter(|r| r.coset_lower - r.iid_upper > margin).map(|r| r.tau);
    let first = hits.next()?;
    Some((first, hits.next_back().unwrap_or(first)))
}
