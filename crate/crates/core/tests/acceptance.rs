//! Acceptance suite. Prints one line per criterion and exits non-zero if
//! any criterion fails.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use cosetlab::coset_sim::{
    dimension_for_rate, enumerate_coset, independent_sum_support_count, sample_code, simulate_ex1_sum_decode,
    sum_support_count, CosetCodebook, SimParams,
};
use cosetlab::macdstx::{
    coset_advantage_band, coset_sum_rate_lb, coset_sum_rate_lb_with, doubly_dirty_channel, iid_sum_rate_ub,
    iid_sum_rate_ub_with, sweep_tau, OptimizerConfig,
};
use cosetlab::region_analysis::{
    check_ex3_simultaneity, check_prop1, check_prop2, check_prop3, check_prop4, check_prop5, compute_c1,
    compute_theta, ex1_embedded_joint,
};
use cosetlab::{make_ex2, make_ex5, IcParams, JointPmf, MacTable, Pmf, Prob};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and limits.
const ORACLE_TOL: f64 = 1e-9;
const THETA_TOL: f64 = 1e-12;
const ALGEBRA_TOL: f64 = 1e-12;
const EX2_GAP_TOL: f64 = 5e-4;
const EX2_PSTAR_TOL: f64 = 5e-3;
const ORACLE_GRID_STEP: f64 = 1e-5;
const MONOTONE_TOL: f64 = 1e-6;
const ZERO_TOL: f64 = 1e-9;
const DIRTY_TOL: f64 = 1e-6;
const RESTART_STABILITY_TOL: f64 = 1e-3;
const EX5_GOLDEN_TOL: f64 = 1e-3;
const EX5_IID_GOLDEN: f64 = 0.249_881_670;
const EX5_COSET_GOLDEN: f64 = 0.436_076_578;
const SIM_TRIALS: usize = 2000;
const SIM_SEED: u64 = 2024;
const RANDOM_DRAWS: usize = 1000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn hb(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

fn star(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + (1.0 - a) * b
}

fn h(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn err(e: cosetlab::Error) -> String {
    e.to_string()
}

fn anchor_propositions() -> Outcome {
    let start = Instant::now();
    let p = IcParams::new(1.0 / 90.0, 0.15, 0.01, 0.067).map_err(err)?;
    let r1 = check_prop1(&p).map_err(err)?;
    let r2 = check_prop2(&p).map_err(err)?;
    let r4 = check_prop4(&p).map_err(err)?;
    let r5 = check_prop5(&p).map_err(err)?;
    let elapsed = start.elapsed();

    let (t1, t, d1, d) = (1.0 / 90.0, 0.15, 0.01, 0.067);
    let beta = star(d1, 2.0 * t - t * t);
    let dh = hb(star(t, d)) - hb(d);
    let lhs1 = hb(star(t1, d1)) - hb(d1) + 2.0 * dh;
    let rhs1 = hb(star(t1, beta)) - hb(d1);
    let sum_law = [(1.0 - t) * (1.0 - t), 2.0 * t * (1.0 - t), t * t];
    let theta = hb(t) - h(&sum_law) - hb(star(t1, d1)) + hb(star(t1, beta));

    check(r1.verdict && r2.verdict, "a verdict is false")?;
    check((r1.lhs - lhs1).abs() < ORACLE_TOL && (r1.rhs - rhs1).abs() < ORACLE_TOL, "prop1 sides disagree with oracle")?;
    check((r2.lhs - dh).abs() < ORACLE_TOL && (r2.rhs - theta).abs() < ORACLE_TOL, "prop2 sides disagree with oracle")?;
    check(r4.same_values(&r1) && r5.same_values(&r2), "prop4/prop5 differ from prop1/prop2")?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("margins {:.9} and {:.9}, prop4/5 identical, {elapsed:.2?}", r1.margin, r2.margin))
}

/// `I(X1; Y1 | X2 or X3)` from first principles for the coupled MAC.
fn oracle_user1_rate(mac: &[[f64; 2]; 2], p1: f64, tau: f64) -> f64 {
    let busy = 2.0 * tau - tau * tau;
    [(0usize, 1.0 - busy), (1, busy)]
        .iter()
        .map(|&(o, po)| {
            let one = |x: usize| 1.0 - mac[x][o];
            let py1 = (1.0 - p1) * one(0) + p1 * one(1);
            po * (hb(py1) - (1.0 - p1) * hb(one(0)) - p1 * hb(one(1)))
        })
        .sum()
}

fn example2() -> Outcome {
    let start = Instant::now();
    let (t1, t, d) = (0.01, 0.1525, 0.067);
    let zero = [[0.989, 0.01], [0.02, 0.993]];
    let ch = make_ex2(&MacTable::new(zero).map_err(err)?, Prob::new(d).map_err(err)?).map_err(err)?;
    let c1 = compute_c1(&ch, t1, t).map_err(err)?;
    let (a, b) = check_prop3(&ch, t1, t, d).map_err(err)?;

    let steps = (t1 / ORACLE_GRID_STEP).round() as usize;
    let (p_oracle, c1_oracle) = (0..=steps)
        .map(|i| {
            let p = i as f64 * ORACLE_GRID_STEP;
            (p, oracle_user1_rate(&zero, p, t))
        })
        .fold((0.0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let elapsed = start.elapsed();

    let busy = 2.0 * t - t * t;
    let p1 = c1.p_star_x1_1;
    let one = |x: usize, o: usize| 1.0 - zero[x][o];
    let py1 = (1.0 - busy) * ((1.0 - p1) * one(0, 0) + p1 * one(1, 0)) + busy * ((1.0 - p1) * one(0, 1) + p1 * one(1, 1));
    let h_y1_given_x: f64 = [(0, 1.0 - busy), (1, busy)]
        .iter()
        .map(|&(o, po)| po * ((1.0 - p1) * hb(one(0, o)) + p1 * hb(one(1, o))))
        .sum();
    let dh = hb(star(t, d)) - hb(d);
    let g_a = c1_oracle + 2.0 * dh - (hb(py1) - h_y1_given_x);
    let h_y1_given_or = [(0, 1.0 - busy), (1, busy)]
        .iter()
        .map(|&(o, po)| po * hb((1.0 - p1) * one(0, o) + p1 * one(1, o)))
        .sum::<f64>();
    let sum_law = [(1.0 - t) * (1.0 - t), 2.0 * t * (1.0 - t), t * t];
    let h_x_given_y = hb(t) - dh;
    let g_b = h(&sum_law) + h_y1_given_or - hb(py1) - h_x_given_y;

    check((a.margin - 0.0048).abs() <= EX2_GAP_TOL, format!("G_A = {:.6}, expected 0.0048", a.margin))?;
    check((b.margin + 0.0031).abs() <= EX2_GAP_TOL, format!("G_B = {:.6}, expected -0.0031", b.margin))?;
    check(((1.0 - p1) - 0.99).abs() <= EX2_PSTAR_TOL, format!("p*(0) = {:.6}, expected 0.99", 1.0 - p1))?;
    check((c1.c1 - c1_oracle).abs() < ORACLE_TOL, format!("C1 {} vs grid oracle {c1_oracle}", c1.c1))?;
    check((p1 - p_oracle).abs() <= 2.0 * ORACLE_GRID_STEP, format!("argmax {p1} vs grid oracle {p_oracle}"))?;
    check((a.margin - g_a).abs() < ORACLE_TOL && (b.margin - g_b).abs() < ORACLE_TOL, "gaps disagree with oracle")?;
    check(a.verdict && b.verdict, "a verdict is false")?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "G_A = {:.6}, G_B = {:.6}, p*(0) = {:.4}, C1 = {:.7}, {elapsed:.2?}",
        a.margin,
        b.margin,
        1.0 - p1,
        c1.c1
    ))
}

fn example3() -> Outcome {
    let start = Instant::now();
    let (beta, delta, tau) = (0.2210, 0.1, 0.1284);
    let report = check_ex3_simultaneity(beta, delta, tau).map_err(err)?;
    let elapsed = start.elapsed();

    let rate = hb(tau * star(beta, delta) + (1.0 - tau) * delta) - tau * hb(star(beta, delta)) - (1.0 - tau) * hb(delta);
    let e0 = star(tau * beta, delta);
    let idle = (1.0 - tau) * (1.0 - tau);
    let sum_law = [idle, 2.0 * tau * (1.0 - tau), tau * tau];
    let py = idle * e0 + (1.0 - idle) * (1.0 - e0);
    let bound = hb(tau) - (h(&sum_law) + hb(e0) - hb(py));
    let mut margins = Vec::new();
    for r in &report.receivers {
        check((r.lhs - rate).abs() < ORACLE_TOL && (r.rhs - bound).abs() < ORACLE_TOL, format!("{} disagrees with oracle", r.name))?;
        margins.push(format!("{:.6}", r.margin));
    }
    check(report.receivers.len() == 3 && report.verdict, format!("margins {}", margins.join(", ")))?;
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("rate {rate:.6} <= bound {bound:.6}, margins {}, {elapsed:.2?}", margins.join(", ")))
}

fn theta_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..RANDOM_DRAWS {
        let mut draw = || rng.random_range(1e-6..0.5);
        let p = IcParams::new(draw(), draw(), draw(), draw()).map_err(err)?;
        let j = ex1_embedded_joint(&p).map_err(err)?;
        let with_sum = j.with_derived_axis(3, |i| (i[1] + i[2]) % 3).map_err(err)?;
        let generic = hb(p.tau.value()) - with_sum.cond_entropy(&[6], &[3]).map_err(err)?;
        worst = worst.max((compute_theta(&p).map_err(err)? - generic).abs());
    }
    let elapsed = start.elapsed();
    check(worst < THETA_TOL, format!("worst deviation {worst:e}"))?;
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("{RANDOM_DRAWS} draws, worst deviation {worst:.2e}, {elapsed:.2?}"))
}

/// Marginal over `axes` by explicit enumeration of every cell.
fn brute_marginal(j: &JointPmf, axes: &[usize]) -> HashMap<Vec<usize>, f64> {
    let dims = j.dims();
    let mut out = HashMap::new();
    for (flat, &p) in j.table().iter().enumerate() {
        let mut idx = vec![0; dims.len()];
        let mut rem = flat;
        for a in (0..dims.len()).rev() {
            idx[a] = rem % dims[a];
            rem /= dims[a];
        }
        *out.entry(axes.iter().map(|&a| idx[a]).collect()).or_insert(0.0) += p;
    }
    out
}

fn brute_entropy(j: &JointPmf, axes: &[usize]) -> f64 {
    brute_marginal(j, axes).values().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

fn brute_cond_entropy(j: &JointPmf, target: &[usize], given: &[usize]) -> f64 {
    let both: Vec<usize> = target.iter().chain(given).copied().collect();
    let pg = brute_marginal(j, given);
    brute_marginal(j, &both)
        .iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|(k, &p)| -p * (p / pg[&k[target.len()..].to_vec()]).log2())
        .sum()
}

fn brute_mutual_info(j: &JointPmf, a: &[usize], b: &[usize]) -> f64 {
    let both: Vec<usize> = a.iter().chain(b).copied().collect();
    let (pa, pb) = (brute_marginal(j, a), brute_marginal(j, b));
    brute_marginal(j, &both)
        .iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|(k, &p)| p * (p / (pa[&k[..a.len()].to_vec()] * pb[&k[a.len()..].to_vec()])).log2())
        .sum()
}

fn information_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..RANDOM_DRAWS {
        let axes = rng.random_range(2..=4usize);
        let dims: Vec<usize> = (0..axes).map(|_| rng.random_range(1..=4usize)).collect();
        let cells: usize = dims.iter().product();
        let weights: Vec<f64> = (0..cells)
            .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() })
            .collect();
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            continue;
        }
        let j = JointPmf::new(dims, weights.iter().map(|w| w / total).collect()).map_err(err)?;
        let mut order: Vec<usize> = (0..axes).collect();
        for i in (1..axes).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let split = rng.random_range(1..axes);
        let (a, b) = order.split_at(split);
        let pmf = Pmf::new(j.marginal(&[a[0]]).map_err(err)?.table().to_vec()).map_err(err)?;
        let diffs = [
            cosetlab::entropy(&pmf) - brute_entropy(&j, &a[..1]),
            j.entropy_of(a).map_err(err)? - brute_entropy(&j, a),
            cosetlab::cond_entropy(&j, a, b).map_err(err)? - brute_cond_entropy(&j, a, b),
            cosetlab::mutual_info(&j, a, b).map_err(err)? - brute_mutual_info(&j, a, b).max(0.0),
        ];
        worst = diffs.iter().fold(worst, |w, d| w.max(d.abs()));
    }
    check(worst < ALGEBRA_TOL, format!("worst deviation {worst:e}"))?;
    Ok(format!("{RANDOM_DRAWS} joints, worst deviation {worst:.2e}"))
}

/// Size of the row space by enumerating every combination of rows.
fn brute_span_size(g: &[Vec<u8>], q: u8) -> usize {
    let n = g.first().map_or(0, Vec::len);
    let mut words = std::collections::HashSet::new();
    let combos = (q as usize).pow(g.len() as u32);
    for c in 0..combos {
        let mut word = vec![0u8; n];
        let mut rem = c;
        for row in g {
            let coef = (rem % q as usize) as u8;
            rem /= q as usize;
            for (w, &x) in word.iter_mut().zip(row) {
                *w = ((*w as usize + coef as usize * x as usize) % q as usize) as u8;
            }
        }
        words.insert(word);
    }
    words.len()
}

fn closure() -> Outcome {
    let mut deficient = 0;
    for q in [2u8, 3] {
        for i in 0..100u64 {
            let k = (i % 6) as usize;
            let n = k + (i % 4) as usize;
            let n = n.max(1);
            let code = sample_code(n, k.min(n), q, 1000 * q as u64 + i).map_err(err)?;
            let rank = code.rank();
            let span = brute_span_size(code.generator(), q);
            check(span == (q as usize).pow(rank as u32), format!("q={q} code {i}: span {span}, rank {rank}"))?;
            deficient += usize::from(rank < code.k());
            let a = CosetCodebook::with_random_shift(code.clone(), 2 * i);
            let b = CosetCodebook::with_random_shift(code, 2 * i + 1);
            let count = sum_support_count(&a, &b).map_err(err)?;
            check(count == span, format!("q={q} code {i}: {count} sums, q^rank = {span}"))?;
        }
    }
    let mut least = usize::MAX;
    for seed in 0..10 {
        let count = independent_sum_support_count(20, 81, 3, seed).map_err(err)?;
        least = least.min(count);
    }
    check(least > 10 * 81, format!("independent codebooks gave only {least} sums"))?;
    let words = enumerate_coset(&CosetCodebook::with_random_shift(sample_code(20, 4, 3, 7).map_err(err)?, 8)).map_err(err)?;
    check(words.len() == 81, "coset enumeration size")?;
    Ok(format!(
        "200 codes ({deficient} rank-deficient) give q^rank sums; independent contrast >= {least} > 810"
    ))
}

fn macdstx_sweep() -> Outcome {
    let start = Instant::now();
    let rows = sweep_tau(&make_ex5(), 50).map_err(err)?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(300))?;
    check(rows.len() == 50, "row count")?;
    for r in &rows {
        for v in [r.iid_upper, r.coset_lower] {
            check((0.0..=1.0).contains(&v), format!("value {v} at tau {} outside [0, 1]", r.tau.value()))?;
        }
    }
    for w in rows.windows(2) {
        check(w[1].iid_upper >= w[0].iid_upper - MONOTONE_TOL, format!("iid drops at tau {}", w[1].tau.value()))?;
        check(w[1].coset_lower >= w[0].coset_lower - MONOTONE_TOL, format!("coset drops at tau {}", w[1].tau.value()))?;
    }
    check(rows[0].tau.value() == 0.0 && rows[0].iid_upper <= ZERO_TOL && rows[0].coset_lower <= ZERO_TOL, "nonzero at tau = 0")?;

    let dirty = doubly_dirty_channel();
    let mut worst = 0.0f64;
    for i in [5, 15, 25, 35, 45] {
        let tau = Prob::new(0.5 * i as f64 / 49.0).map_err(err)?;
        let v = coset_sum_rate_lb(&dirty, tau, 2).map_err(err)?.value;
        worst = worst.max((v - hb(tau.value())).abs());
    }
    check(worst <= DIRTY_TOL, format!("doubly dirty coset bound off h_b by {worst:e}"))?;
    let dirty_rows = sweep_tau(&dirty, 11).map_err(err)?;
    let band = coset_advantage_band(&dirty_rows, MONOTONE_TOL).ok_or("coset never beats iid on doubly dirty")?;

    let adder = iid_sum_rate_ub(&cosetlab::macdstx::binary_adder_channel(), Prob::HALF, 2).map_err(err)?.value;
    check((adder - 1.0).abs() < ZERO_TOL, format!("adder gives {adder}"))?;

    let ex5 = make_ex5();
    let quarter = Prob::new(0.25).map_err(err)?;
    let base = OptimizerConfig::default();
    let doubled = OptimizerConfig { restarts: 2 * base.restarts, ..base };
    let iid = iid_sum_rate_ub_with(&ex5, quarter, 2, &base).map_err(err)?.value;
    let iid2 = iid_sum_rate_ub_with(&ex5, quarter, 2, &doubled).map_err(err)?.value;
    let coset = coset_sum_rate_lb_with(&ex5, quarter, 2, &base).map_err(err)?.value;
    let coset2 = coset_sum_rate_lb_with(&ex5, quarter, 2, &doubled).map_err(err)?.value;
    check((iid - iid2).abs() < RESTART_STABILITY_TOL && (coset - coset2).abs() < RESTART_STABILITY_TOL, "restart doubling moved a bound")?;
    check((iid - EX5_IID_GOLDEN).abs() < EX5_GOLDEN_TOL && (coset - EX5_COSET_GOLDEN).abs() < EX5_GOLDEN_TOL, format!("tau = 0.25 gives {iid}, {coset}"))?;
    Ok(format!(
        "50 points in {elapsed:.2?}, monotone, zero at tau = 0; doubly dirty within {worst:.1e} of h_b; coset ahead for tau in [{:.2}, {:.2}]",
        band.0.value(),
        band.1.value()
    ))
}

fn simulation_trend() -> Outcome {
    let p = IcParams::anchor();
    let theta = compute_theta(&p).map_err(err)?;
    let run = |n: usize, rate: f64| -> Result<(usize, f64), String> {
        let k = dimension_for_rate(n, 3, rate);
        let params = SimParams { trials: SIM_TRIALS, seed: SIM_SEED, ..SimParams::new(n, k) };
        Ok((k, simulate_ex1_sum_decode(&params).map_err(err)?.decode_error_rate))
    };
    let (k12, e12) = run(12, 0.5 * theta)?;
    let (k24, e24) = run(24, 0.5 * theta)?;
    let (k_hi, e_hi) = run(12, 2.0 * theta)?;
    let detail = format!(
        "half margin: n=12 k={k12} err {e12:.4}, n=24 k={k24} err {e24:.4}; twice margin: n=12 k={k_hi} err {e_hi:.4}"
    );
    check(e24 < e12, format!("error not decreasing; {detail}"))?;
    check(e_hi > 0.9, format!("error at twice the margin too low; {detail}"))?;
    Ok(detail)
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("proposition anchor point", anchor_propositions),
        ("coupled-MAC numeric reproduction", example2),
        ("symmetric OR channel simultaneity", example3),
        ("theta identity", theta_identity),
        ("information-algebra oracle", information_algebra),
        ("coset closure", closure),
        ("MAC-DSTx sweep", macdstx_sweep),
        ("simulation trend", simulation_trend),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} ({name}): FAIL: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
