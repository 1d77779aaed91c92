//! Iid-infeasibility and coset-achievability conditions for the OR
//! interference and broadcast examples, user 1's constrained rate for the
//! non-additive MAC coupling, and sum-decodability margins.
//!
//! Margins are signed so that the report's [`Rule`] decides the verdict:
//! a positive margin for the strict iid-infeasibility checks, a
//! non-negative margin for coset achievability, and a non-positive slack for
//! the coupled-MAC coset condition.

use serde::{Deserialize, Serialize};

use crate::channel_models::{joint_distribution, make_ex1, make_ex3, ChannelModel};
use crate::error::{domain, Error, Result};
use crate::finite_math::{conv, hb, JointPmf, Pmf, PrimeField, Prob};
pub use crate::report::{PropositionReport, Rule};

/// Parameters of the symmetric OR examples: user 1's budget and crossover,
/// and the common budget and crossover of users 2 and 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcParams {
    pub tau1: Prob,
    pub tau: Prob,
    pub delta1: Prob,
    pub delta: Prob,
}

fn open_half(x: f64, name: &str) -> Result<Prob> {
    if x > 0.0 && x < 0.5 {
        Prob::new(x)
    } else {
        Err(domain(format!("{name} = {x} outside the open interval (0, 1/2)")))
    }
}

fn closed_half(x: f64, name: &str) -> Result<Prob> {
    if (0.0..=0.5).contains(&x) {
        Prob::new(x)
    } else {
        Err(domain(format!("{name} = {x} outside [0, 1/2]")))
    }
}

impl IcParams {
    /// All four parameters in the open interval `(0, 1/2)`.
    pub fn new(tau1: f64, tau: f64, delta1: f64, delta: f64) -> Result<Self> {
        Ok(IcParams {
            tau1: open_half(tau1, "tau1")?,
            tau: open_half(tau, "tau")?,
            delta1: open_half(delta1, "delta1")?,
            delta: open_half(delta, "delta")?,
        })
    }

    /// Parameters in the closed interval `[0, 1/2]`, for evaluating limits.
    /// The proposition checks reject these unless they are also open.
    pub fn closed(tau1: f64, tau: f64, delta1: f64, delta: f64) -> Result<Self> {
        Ok(IcParams {
            tau1: closed_half(tau1, "tau1")?,
            tau: closed_half(tau, "tau")?,
            delta1: closed_half(delta1, "delta1")?,
            delta: closed_half(delta, "delta")?,
        })
    }

    /// `tau1 = 1/90, tau = 0.15, delta1 = 0.01, delta = 0.067`.
    pub fn anchor() -> Self {
        IcParams::new(1.0 / 90.0, 0.15, 0.01, 0.067).expect("anchor point is valid")
    }

    pub fn require_open(&self) -> Result<()> {
        IcParams::new(self.tau1.value(), self.tau.value(), self.delta1.value(), self.delta.value()).map(|_| ())
    }

    /// `beta = delta1 * (2 tau - tau^2)`, the crossover of receiver 1 when
    /// the OR interference is treated as noise.
    pub fn beta(&self) -> f64 {
        let t = self.tau.value();
        conv(self.delta1.value(), 2.0 * t - t * t)
    }
}

fn dh(tau: f64, delta: f64) -> f64 {
    hb(conv(tau, delta)) - hb(delta)
}

/// Options shared by the strict checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    /// A strict inequality holds only when its margin exceeds this.
    pub strict_epsilon: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { strict_epsilon: 0.0 }
    }
}

fn iid_infeasibility(name: &str, p: &IcParams, opts: CheckOptions) -> Result<PropositionReport> {
    p.require_open()?;
    let (t1, t, d1, d) = (p.tau1.value(), p.tau.value(), p.delta1.value(), p.delta.value());
    let beta = p.beta();
    let user1 = dh(t1, d1);
    let user23 = dh(t, d);
    let lhs = user1 + 2.0 * user23;
    let rhs = hb(conv(t1, beta)) - hb(d1);
    Ok(
        PropositionReport::new(name, lhs, rhs, lhs - rhs, Rule::MarginPositive, opts.strict_epsilon)
            .with("beta", beta)
            .with("ptp_user1", user1)
            .with("ptp_user23", user23),
    )
}

/// Iid infeasibility of the PTP-capacity triple on the OR interference
/// channel: `dh(tau1, delta1) + 2 dh(tau, delta) > h_b(tau1 * beta) - h_b(delta1)`.
/// `margin = lhs - rhs`.
pub fn check_prop1(p: &IcParams) -> Result<PropositionReport> {
    iid_infeasibility("prop1", p, CheckOptions::default())
}

pub fn check_prop1_with(p: &IcParams, opts: CheckOptions) -> Result<PropositionReport> {
    iid_infeasibility("prop1", p, opts)
}

/// `theta = h_b(tau) - H(U2 + U3) - h_b(tau1 * delta1) + h_b(tau1 * beta)`
/// where `H(U2 + U3) = h_b((1-tau)^2) + (2tau - tau^2) h_b(tau^2 / (2tau - tau^2))`
/// is the entropy of the ternary sum of two `Bern(tau)` symbols.
/// Accepts `tau = 0`.
pub fn compute_theta(p: &IcParams) -> Result<f64> {
    let (t1, t, d1) = (p.tau1.value(), p.tau.value(), p.delta1.value());
    if t >= 0.5 {
        return Err(domain(format!("tau = {t} outside [0, 1/2)")));
    }
    let busy = 2.0 * t - t * t;
    let split = if busy > 0.0 { busy * hb(t * t / busy) } else { 0.0 };
    Ok(hb(t) - hb((1.0 - t) * (1.0 - t)) - split - hb(conv(t1, d1)) + hb(conv(t1, p.beta())))
}

fn coset_achievability(name: &str, p: &IcParams) -> Result<PropositionReport> {
    p.require_open()?;
    let theta = compute_theta(p)?;
    let user23 = dh(p.tau.value(), p.delta.value());
    Ok(
        PropositionReport::new(name, user23, theta, theta - user23, Rule::MarginNonNegative, 0.0)
            .with("beta", p.beta())
            .with("theta", theta)
            .with("ptp_user23", user23),
    )
}

/// Coset achievability of the PTP-capacity triple: `dh(tau, delta) <= theta`.
/// `margin = theta - dh(tau, delta)`.
pub fn check_prop2(p: &IcParams) -> Result<PropositionReport> {
    coset_achievability("prop2", p)
}

/// The pooled-input broadcast version of [`check_prop1`]; identical values.
pub fn check_prop4(p: &IcParams) -> Result<PropositionReport> {
    Ok(iid_infeasibility("prop1", p, CheckOptions::default())?.renamed("prop4"))
}

pub fn check_prop4_with(p: &IcParams, opts: CheckOptions) -> Result<PropositionReport> {
    Ok(iid_infeasibility("prop1", p, opts)?.renamed("prop4"))
}

/// The pooled-input broadcast version of [`check_prop2`]; identical values.
pub fn check_prop5(p: &IcParams) -> Result<PropositionReport> {
    Ok(coset_achievability("prop2", p)?.renamed("prop5"))
}

/// User 1's best rate on the coupled-MAC channel when users 2 and 3 use
/// `Bern(tau)` inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C1Result {
    pub c1: f64,
    /// Maximizing `P(X1 = 1)`.
    pub p_star_x1_1: f64,
    pub iterations: usize,
    pub optimizer_tolerance: f64,
}

pub const C1_GRID_STEP: f64 = 1e-3;
pub const C1_TOLERANCE: f64 = 1e-7;
pub const C1_MAX_ITERATIONS: usize = 200;

fn require_three_binary_users(ch: &ChannelModel) -> Result<()> {
    if ch.input_dims() != [2, 2, 2] || ch.output_dims() != [2, 2, 2] || ch.has_states() {
        return Err(Error::Dimension(
            "expected a stateless channel with three binary inputs and three binary outputs".into(),
        ));
    }
    Ok(())
}

/// Joint over `(X1, X2, X3, Y1, Y2, Y3)` with `X1 ~ Bern(p1)` and
/// `X2, X3 ~ Bern(tau)`.
fn three_user_joint(ch: &ChannelModel, p1: f64, tau: f64) -> Result<JointPmf> {
    let laws = [
        Pmf::bernoulli(Prob::new(p1)?),
        Pmf::bernoulli(Prob::new(tau)?),
        Pmf::bernoulli(Prob::new(tau)?),
    ];
    joint_distribution(ch, &laws, None)
}

/// Axis of `X2 or X3` once appended to a three-user joint.
const OR_AXIS: usize = 6;

fn with_or_axis(j: &JointPmf) -> Result<JointPmf> {
    j.with_derived_axis(2, |i| i[1] | i[2])
}

/// `I(X1; Y1 | X2 or X3)` at `P(X1 = 1) = p1`.
pub fn user1_rate(ch: &ChannelModel, p1: f64, tau: f64) -> Result<f64> {
    require_three_binary_users(ch)?;
    let j = with_or_axis(&three_user_joint(ch, p1, tau)?)?;
    j.cond_mutual_info(&[0], &[3], &[OR_AXIS])
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`, stopping when
/// the bracket is narrower than `tol`. Returns `(argmax, max, iterations)`.
pub(crate) fn golden_section_max(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<(f64, f64, usize)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    let mut iterations = 0;
    while hi - lo > tol {
        if iterations == max_iterations {
            return Err(Error::NonConvergence { iterations });
        }
        iterations += 1;
        // Ties move toward the lower end.
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b)?;
        }
    }
    Ok(if fa >= fb { (a, fa, iterations) } else { (b, fb, iterations) })
}

/// Maximizes `I(X1; Y1 | X2 or X3)` over `P(X1 = 1) in [0, tau1]` with
/// `P(X2 = 1) = P(X3 = 1) = tau`: a `1e-3` grid, then golden-section
/// refinement to `1e-7` around the best grid point. Ties go to the smaller
/// probability.
pub fn compute_c1(ch: &ChannelModel, tau1: f64, tau: f64) -> Result<C1Result> {
    require_three_binary_users(ch)?;
    closed_half(tau1, "tau1")?;
    open_half(tau, "tau")?;
    let objective = |p: f64| user1_rate(ch, p, tau);

    let steps = (tau1 / C1_GRID_STEP).ceil() as usize;
    let mut best = (0.0, objective(0.0)?);
    for i in 1..=steps {
        let p = (i as f64 * C1_GRID_STEP).min(tau1);
        let v = objective(p)?;
        if v > best.1 {
            best = (p, v);
        }
    }
    let mut iterations = 0;
    if tau1 > 0.0 {
        let lo = (best.0 - C1_GRID_STEP).max(0.0);
        let hi = (best.0 + C1_GRID_STEP).min(tau1);
        let (p, v, its) = golden_section_max(objective, lo, hi, C1_TOLERANCE, C1_MAX_ITERATIONS)?;
        iterations = its;
        if v > best.1 {
            best = (p, v);
        }
        // The bracket ends are not sampled by the search itself.
        for end in [lo, hi] {
            let v = objective(end)?;
            if v > best.1 || (v == best.1 && end < best.0) {
                best = (end, v);
            }
        }
    }
    Ok(C1Result {
        c1: best.1.max(0.0),
        p_star_x1_1: best.0,
        iterations,
        optimizer_tolerance: C1_TOLERANCE,
    })
}

/// The iid-infeasibility gap and the coset slack for the coupled-MAC
/// channel, both evaluated at the maximizing law from [`compute_c1`].
///
/// Report A: `G_A = C1 + 2 dh(tau, delta) - I(X1 X2 X3; Y1)`, verdict `G_A > 0`.
/// Report B: `G_B = H(U2 + U3) + H(Y1 | X2 or X3) - H(Y1) - min(H(X2|Y2), H(X3|Y3))`,
/// verdict `G_B <= 0`.
pub fn check_prop3(
    ch: &ChannelModel,
    tau1: f64,
    tau: f64,
    delta: f64,
) -> Result<(PropositionReport, PropositionReport)> {
    open_half(delta, "delta")?;
    let c1 = compute_c1(ch, tau1, tau)?;
    let j = with_or_axis(&three_user_joint(ch, c1.p_star_x1_1, tau)?)?;

    let ptp = dh(tau, delta);
    let i_all = j.mutual_info(&[0, 1, 2], &[3])?;
    let gap_a = c1.c1 + 2.0 * ptp - i_all;
    let report_a = PropositionReport::new("prop3_iid", i_all, c1.c1 + 2.0 * ptp, gap_a, Rule::MarginPositive, 0.0)
        .with("c1", c1.c1)
        .with("p_star_x1_1", c1.p_star_x1_1)
        .with("p_star_x1_0", 1.0 - c1.p_star_x1_1)
        .with("ptp_user23", ptp)
        .with("i_x_y1", i_all);

    let t = tau;
    let sum_entropy = hb(t * t) + (1.0 - t * t) * hb((1.0 - t) * (1.0 - t) / (1.0 - t * t));
    let h_y1_given_or = j.cond_entropy(&[3], &[OR_AXIS])?;
    let h_y1 = j.entropy_of(&[3])?;
    let h_x2_y2 = j.cond_entropy(&[1], &[4])?;
    let h_x3_y3 = j.cond_entropy(&[2], &[5])?;
    let lhs = sum_entropy + h_y1_given_or - h_y1;
    let rhs = h_x2_y2.min(h_x3_y3);
    let report_b = PropositionReport::new("prop3_coset", lhs, rhs, lhs - rhs, Rule::MarginNonPositive, 0.0)
        .with("c1", c1.c1)
        .with("p_star_x1_1", c1.p_star_x1_1)
        .with("h_sum", sum_entropy)
        .with("h_y1_given_or", h_y1_given_or)
        .with("h_y1", h_y1)
        .with("h_x2_given_y2", h_x2_y2)
        .with("h_x3_given_y3", h_x3_y3);
    Ok((report_a, report_b))
}

/// The finite-field auxiliary assignment used for sum decoding: users whose
/// binary inputs are read as elements of `F_q`, `U_j = X_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestChannel {
    pub q: PrimeField,
    pub u_laws: Vec<Pmf>,
    pub x1_law: Pmf,
}

impl TestChannel {
    /// `U_2, U_3` over `F_q` with `P(U_j = 1) = tau`, `X1 ~ Bern(tau1)`.
    pub fn embedded(q: PrimeField, tau1: Prob, tau: Prob) -> Result<Self> {
        let mut u = vec![0.0; q.q() as usize];
        u[0] = 1.0 - tau.value();
        u[1] = tau.value();
        let u = Pmf::new(u)?;
        Ok(TestChannel {
            q,
            u_laws: vec![u.clone(), u],
            x1_law: Pmf::bernoulli(tau1),
        })
    }
}

/// Joint over `(X1, U2, U3, Y1, Y2, Y3)` for the OR interference channel,
/// with `U_j = X_j` embedded in `F_3`.
pub fn ex1_embedded_joint(p: &IcParams) -> Result<JointPmf> {
    let ch = make_ex1(p.delta1, p.delta, p.delta)?;
    let tc = TestChannel::embedded(PrimeField::new(3)?, p.tau1, p.tau)?;
    let binary = |law: &Pmf| Pmf::new(law.probs()[..2].to_vec());
    let laws = [tc.x1_law.clone(), binary(&tc.u_laws[0])?, binary(&tc.u_laws[1])?];
    let j = joint_distribution(&ch, &laws, None)?;
    j.embed_axis(1, 3)?.embed_axis(2, 3)
}

/// Symbols at or above 2 must carry no mass on an embedded axis.
const EMBED_TOLERANCE: f64 = 1e-15;

/// Sum-decodability margin at a receiver: `min_j H(U_j) - H(U_i + U_k | Y)`
/// over the two embedded users, with `+` in `F_q` and `q` the common
/// alphabet size of the two user axes.
pub fn coset_sum_margin(joint: &JointPmf, users: [usize; 2], receiver_axis: usize) -> Result<f64> {
    let dims = joint.dims();
    for &a in users.iter().chain([&receiver_axis]) {
        if a >= dims.len() {
            return Err(Error::Axis(format!("axis {a} out of range")));
        }
    }
    if users[0] == users[1] || users.contains(&receiver_axis) {
        return Err(Error::Axis("user and receiver axes must be distinct".into()));
    }
    let q = dims[users[0]];
    if dims[users[1]] != q {
        return Err(Error::Embedding(format!(
            "user axes have different alphabets {} and {}",
            q, dims[users[1]]
        )));
    }
    let field = PrimeField::new(u8::try_from(q).map_err(|_| Error::UnsupportedField(u8::MAX))?)
        .map_err(|_| Error::Embedding(format!("user alphabet of size {q} is not a supported field")))?;
    for &u in &users {
        let m = joint.marginal(&[u])?;
        let stray: f64 = m.table()[2.min(q)..].iter().sum();
        if stray > EMBED_TOLERANCE {
            return Err(Error::Embedding(format!(
                "axis {u} puts mass {stray} outside {{0, 1}}"
            )));
        }
    }
    let (a, b) = (users[0], users[1]);
    let with_sum = joint.with_derived_axis(q, |i| field.add(i[a] as u8, i[b] as u8) as usize)?;
    let sum_axis = dims.len();
    let h_sum_given_y = with_sum.cond_entropy(&[sum_axis], &[receiver_axis])?;
    let margins = [joint.entropy_of(&[a])?, joint.entropy_of(&[b])?].map(|h| h - h_sum_given_y);
    Ok(margins[0].min(margins[1]))
}

/// Per-receiver sum-decodability check on the symmetric 3-user OR channel:
/// with `U_j = X_j ~ Bern(tau)` in `F_3`, receiver `j` passes when both other
/// users' PTP rates `I(X_m; Y_m | X_i or X_k)` fit under
/// `h_b(tau) - H(U_i + U_k | Y_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimultaneityReport {
    pub receivers: Vec<PropositionReport>,
    pub verdict: bool,
}

pub fn check_ex3_simultaneity(beta: f64, delta: f64, tau: f64) -> Result<SimultaneityReport> {
    let beta = open_half(beta, "beta")?;
    let delta = open_half(delta, "delta")?;
    let tau = open_half(tau, "tau")?;
    let ch = make_ex3(beta, delta)?;
    let law = Pmf::bernoulli(tau);
    let j = joint_distribution(&ch, &[law.clone(), law.clone(), law], None)?;
    let j = j.embed_axis(0, 3)?.embed_axis(1, 3)?.embed_axis(2, 3)?;

    let others = |m: usize| [(m + 1) % 3, (m + 2) % 3];
    let mut rates = [0.0; 3];
    for (m, rate) in rates.iter_mut().enumerate() {
        let [i, k] = others(m);
        let with_or = j.with_derived_axis(2, |x| usize::from(x[i] != 0 || x[k] != 0))?;
        *rate = with_or.cond_mutual_info(&[m], &[3 + m], &[6])?;
    }

    let mut receivers = Vec::with_capacity(3);
    for r in 0..3 {
        let [i, k] = others(r);
        let bound = coset_sum_margin(&j, [i, k], 3 + r)?;
        let need = rates[i].max(rates[k]);
        receivers.push(
            PropositionReport::new(format!("ex3_receiver{}", r + 1), need, bound, bound - need, Rule::MarginNonNegative, 0.0)
                .with(&format!("rate_user{}", i + 1), rates[i])
                .with(&format!("rate_user{}", k + 1), rates[k])
                .with("sum_decode_bound", bound)
                .with("h_u", hb(tau.value())),
        );
    }
    let verdict = receivers.iter().all(|r| r.verdict);
    Ok(SimultaneityReport { receivers, verdict })
}
