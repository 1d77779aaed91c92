//! Linear and coset codes over prime fields, the closure of coset sums, and a
//! Monte Carlo demonstration of sum decoding at receiver 1 of the OR
//! interference channel.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::finite_math::{conv, PrimeField};

/// `q^k` limit for enumerating a single coset.
pub const COSET_ENUMERATION_LIMIT: u64 = 1 << 20;
/// Limit on the number of word pairs summed by [`sum_support_count`].
pub const PAIR_ENUMERATION_LIMIT: u64 = 1 << 24;
/// Limit on the size of the sum coset searched by the ML decoder.
pub const DECODER_ENUMERATION_LIMIT: u64 = 1 << 16;
/// Longest blocklength the simulator handles.
pub const MAX_SIM_BLOCKLENGTH: usize = 64;

fn checked_pow(q: u8, k: usize) -> Option<u64> {
    (q as u64).checked_pow(u32::try_from(k).ok()?)
}

/// A `k x n` generator matrix over `F_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearCode {
    n: usize,
    field: PrimeField,
    generator: Vec<Vec<u8>>,
}

impl LinearCode {
    pub fn new(field: PrimeField, n: usize, generator: Vec<Vec<u8>>) -> Result<Self> {
        if generator.len() > n {
            return Err(Error::Dimension(format!("k = {} exceeds n = {n}", generator.len())));
        }
        for (r, row) in generator.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!("generator row {r} has length {}", row.len())));
            }
            if row.iter().any(|&v| v >= field.q()) {
                return Err(domain(format!("generator row {r} has entries outside F_{}", field.q())));
            }
        }
        Ok(LinearCode { n, field, generator })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.generator.len()
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn generator(&self) -> &[Vec<u8>] {
        &self.generator
    }

    /// `m G`.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.k() {
            return Err(Error::Dimension(format!("message of length {} for k = {}", message.len(), self.k())));
        }
        let f = self.field;
        let mut word = vec![0u8; self.n];
        for (&m, row) in message.iter().zip(&self.generator) {
            if m >= f.q() {
                return Err(domain(format!("message symbol {m} outside F_{}", f.q())));
            }
            for (w, &g) in word.iter_mut().zip(row) {
                *w = f.add(*w, f.mul(m, g));
            }
        }
        Ok(word)
    }

    /// Rank of the generator matrix by Gaussian elimination over `F_q`.
    pub fn rank(&self) -> usize {
        let f = self.field;
        let mut m = self.generator.clone();
        let mut rank = 0;
        for col in 0..self.n {
            let Some(pivot) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
                continue;
            };
            m.swap(rank, pivot);
            let inv = f.inv(m[rank][col]).expect("pivot is nonzero");
            let pivot_row: Vec<u8> = m[rank].iter().map(|&v| f.mul(v, inv)).collect();
            for (r, row) in m.iter_mut().enumerate() {
                if r != rank && row[col] != 0 {
                    let factor = row[col];
                    for (v, &p) in row.iter_mut().zip(&pivot_row) {
                        *v = f.sub(*v, f.mul(factor, p));
                    }
                }
            }
            m[rank] = pivot_row;
            rank += 1;
            if rank == m.len() {
                break;
            }
        }
        rank
    }
}

fn random_word(rng: &mut impl Rng, n: usize, q: u8) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..q)).collect()
}

/// A generator matrix with iid uniform entries from a seeded ChaCha8 stream.
pub fn sample_code(n: usize, k: usize, q: u8, seed: u64) -> Result<LinearCode> {
    let field = PrimeField::new(q)?;
    if k > n {
        return Err(Error::Dimension(format!("k = {k} exceeds n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let generator = (0..k).map(|_| random_word(&mut rng, n, q)).collect();
    LinearCode::new(field, n, generator)
}

/// The coset `C + shift`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetCodebook {
    code: LinearCode,
    shift: Vec<u8>,
}

impl CosetCodebook {
    pub fn new(code: LinearCode, shift: Vec<u8>) -> Result<Self> {
        if shift.len() != code.n() {
            return Err(Error::Dimension(format!("shift of length {} for n = {}", shift.len(), code.n())));
        }
        if shift.iter().any(|&v| v >= code.field().q()) {
            return Err(domain("shift has entries outside the field"));
        }
        Ok(CosetCodebook { code, shift })
    }

    /// A coset of `code` with a uniform shift drawn from `seed`.
    pub fn with_random_shift(code: LinearCode, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = random_word(&mut rng, code.n(), code.field().q());
        CosetCodebook { code, shift }
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn shift(&self) -> &[u8] {
        &self.shift
    }
}

/// Visits `c G + shift` for every coefficient vector `c`, in lexicographic
/// order of `c` (first coefficient most significant). Each step adds a
/// single generator row per carried digit.
fn for_each_word(field: PrimeField, rows: &[&[u8]], shift: &[u8], mut visit: impl FnMut(&[u8])) {
    let q = field.q();
    let mut word = shift.to_vec();
    let mut digits = vec![0u8; rows.len()];
    loop {
        visit(&word);
        let mut r = rows.len();
        loop {
            if r == 0 {
                return;
            }
            r -= 1;
            for (w, &g) in word.iter_mut().zip(rows[r]) {
                *w = field.add(*w, g);
            }
            digits[r] += 1;
            if digits[r] < q {
                break;
            }
            digits[r] = 0;
        }
    }
}

/// All words `m G + shift`, with `q^k <= 2^20`.
pub fn enumerate_coset(cb: &CosetCodebook) -> Result<Vec<Vec<u8>>> {
    let size = checked_pow(cb.code.field.q(), cb.code.k())
        .filter(|&s| s <= COSET_ENUMERATION_LIMIT)
        .ok_or_else(|| Error::Guard(format!("q^k exceeds {COSET_ENUMERATION_LIMIT}")))?;
    let rows: Vec<&[u8]> = cb.code.generator.iter().map(Vec::as_slice).collect();
    let mut out = Vec::with_capacity(size as usize);
    for_each_word(cb.code.field, &rows, &cb.shift, |w| out.push(w.to_vec()));
    Ok(out)
}

/// The set `{a + b : a in A, b in B}` over `F_q`.
pub fn sum_set(field: PrimeField, a: &[Vec<u8>], b: &[Vec<u8>]) -> Result<HashSet<Vec<u8>>> {
    let pairs = (a.len() as u64).saturating_mul(b.len() as u64);
    if pairs > PAIR_ENUMERATION_LIMIT {
        return Err(Error::Guard(format!("{pairs} word pairs exceed {PAIR_ENUMERATION_LIMIT}")));
    }
    let mut out = HashSet::new();
    for u in a {
        for v in b {
            if u.len() != v.len() {
                return Err(Error::Dimension("words of different lengths".into()));
            }
            out.insert(u.iter().zip(v).map(|(&x, &y)| field.add(x, y)).collect());
        }
    }
    Ok(out)
}

/// Number of distinct sums `u + v` of words from two cosets of the same
/// linear code, counted exhaustively.
pub fn sum_support_count(a: &CosetCodebook, b: &CosetCodebook) -> Result<usize> {
    if a.code != b.code {
        return Err(domain("sum_support_count needs two cosets of the same linear code"));
    }
    let pairs = checked_pow(a.code.field.q(), 2 * a.code.k()).unwrap_or(u64::MAX);
    if pairs > PAIR_ENUMERATION_LIMIT {
        return Err(Error::Guard(format!("q^(2k) exceeds {PAIR_ENUMERATION_LIMIT}")));
    }
    Ok(sum_set(a.code.field, &enumerate_coset(a)?, &enumerate_coset(b)?)?.len())
}

/// A list of words over `F_q`.
pub type Codebook = Vec<Vec<u8>>;

/// Two codebooks of `size` iid uniform words each.
pub fn independent_codebooks(n: usize, size: usize, q: u8, seed: u64) -> Result<(Codebook, Codebook)> {
    PrimeField::new(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = (0..size).map(|_| random_word(&mut rng, n, q)).collect();
    let b = (0..size).map(|_| random_word(&mut rng, n, q)).collect();
    Ok((a, b))
}

/// Distinct sums of two independent unstructured codebooks with `size`
/// words each.
pub fn independent_sum_support_count(n: usize, size: usize, q: u8, seed: u64) -> Result<usize> {
    let (a, b) = independent_codebooks(n, size, q, seed)?;
    Ok(sum_set(PrimeField::new(q)?, &a, &b)?.len())
}

/// Parameters of the sum-decoding simulation.
///
/// Each trial draws a fresh code with `k + shaping_k` generator rows. A
/// user's message picks the coefficients of the first `k` rows; the
/// remaining `shaping_k` coefficients are chosen to bring the word's symbol
/// composition closest (in L1) to the target law `(1 - tau, tau, 0, ..)`.
/// Receiver 1 searches the whole sum coset, of size `q^(k + shaping_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub n: usize,
    pub k: usize,
    /// `None` selects the largest value the decoder guard and `n` allow.
    pub shaping_k: Option<usize>,
    pub q: u8,
    pub delta1: f64,
    pub tau1: f64,
    pub tau: f64,
    pub trials: usize,
    pub seed: u64,
}

impl SimParams {
    /// Defaults at the OR-channel anchor point over `F_3`.
    pub fn new(n: usize, k: usize) -> Self {
        SimParams {
            n,
            k,
            shaping_k: None,
            q: 3,
            delta1: 0.01,
            tau1: 1.0 / 90.0,
            tau: 0.15,
            trials: 2000,
            seed: 0,
        }
    }

    /// Information rate `k log2 q / n` in bits per symbol.
    pub fn rate(&self) -> f64 {
        self.k as f64 * (self.q as f64).log2() / self.n as f64
    }

    /// Shaping dimension actually used.
    pub fn effective_shaping_k(&self) -> Result<usize> {
        let guard_dims = (0..)
            .take_while(|&d| checked_pow(self.q, d).is_some_and(|s| s <= DECODER_ENUMERATION_LIMIT))
            .last()
            .unwrap_or(0);
        match self.shaping_k {
            Some(s) => Ok(s),
            None => Ok(guard_dims.min(self.n).saturating_sub(self.k)),
        }
    }
}

/// Outcome of [`simulate_ex1_sum_decode`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub k: usize,
    pub shaping_k: usize,
    pub q: u8,
    pub trials: usize,
    pub errors: usize,
    /// Information rate `k log2 q / n`, bits per symbol.
    pub rate: f64,
    pub decode_error_rate: f64,
    pub seed: u64,
}

/// Fixed-width word used by the simulator.
type Word = [u8; MAX_SIM_BLOCKLENGTH];

fn add_into(field: PrimeField, acc: &mut Word, row: &Word) {
    let q = field.q();
    for (a, &g) in acc.iter_mut().zip(row.iter()) {
        let s = *a + g;
        *a = if s >= q { s - q } else { s };
    }
}

fn scaled(field: PrimeField, row: &Word, c: u8) -> Word {
    let mut out = [0u8; MAX_SIM_BLOCKLENGTH];
    for (o, &g) in out.iter_mut().zip(row.iter()) {
        *o = field.mul(g, c);
    }
    out
}

fn nonzero_mask(word: &Word, n: usize) -> u64 {
    word[..n]
        .iter()
        .enumerate()
        .fold(0u64, |m, (i, &v)| m | (u64::from(v != 0) << i))
}

/// Mixed-radix walk over all coefficient vectors for `rows`, visiting the
/// running word `base + c G` each time.
fn walk(field: PrimeField, rows: &[Word], base: &Word, mut visit: impl FnMut(&Word)) {
    let q = field.q();
    let mut word = *base;
    let mut digits = vec![0u8; rows.len()];
    loop {
        visit(&word);
        let mut r = rows.len();
        loop {
            if r == 0 {
                return;
            }
            r -= 1;
            add_into(field, &mut word, &rows[r]);
            digits[r] += 1;
            if digits[r] < q {
                break;
            }
            digits[r] = 0;
        }
    }
}

/// L1 distance between a word's empirical symbol law and `target`.
fn composition_distance(word: &Word, n: usize, target: &[f64]) -> f64 {
    let mut counts = [0usize; 8];
    for &v in &word[..n] {
        counts[v as usize] += 1;
    }
    target
        .iter()
        .enumerate()
        .map(|(v, &t)| (counts[v] as f64 / n as f64 - t).abs())
        .sum()
}

fn run_trial(p: &SimParams, field: PrimeField, shaping_k: usize, trial: u64) -> bool {
    let n = p.n;
    let q = field.q();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    rng.set_stream(trial);

    let draw_word = |rng: &mut ChaCha8Rng| {
        let mut w = [0u8; MAX_SIM_BLOCKLENGTH];
        for v in w[..n].iter_mut() {
            *v = rng.random_range(0..q);
        }
        w
    };
    let rows: Vec<Word> = (0..p.k + shaping_k).map(|_| draw_word(&mut rng)).collect();
    let shifts = [draw_word(&mut rng), draw_word(&mut rng)];
    let (message_rows, shaping_rows) = rows.split_at(p.k);

    let mut target = vec![0.0; q as usize];
    target[0] = 1.0 - p.tau;
    target[1] = p.tau;

    let mut sent = [[0u8; MAX_SIM_BLOCKLENGTH]; 2];
    for (user, shift) in shifts.iter().enumerate() {
        let mut base = *shift;
        for row in message_rows {
            let m = rng.random_range(0..q);
            add_into(field, &mut base, &scaled(field, row, m));
        }
        let mut best = (f64::INFINITY, base);
        walk(field, shaping_rows, &base, |w| {
            let d = composition_distance(w, n, &target);
            if d < best.0 {
                best = (d, *w);
            }
        });
        sent[user] = best.1;
    }

    let interference = nonzero_mask(&sent[0], n) | nonzero_mask(&sent[1], n);
    let mut y = interference;
    for i in 0..n {
        let x1 = rng.random_bool(p.tau1);
        let z = rng.random_bool(p.delta1);
        if x1 ^ z {
            y ^= 1 << i;
        }
    }
    let mut truth = sent[0];
    add_into(field, &mut truth, &sent[1]);

    // Receiver 1 sees the sum word w through P(y = 1 | w = 0) = eps and
    // P(y = 1 | w != 0) = 1 - eps, with eps = tau1 * delta1 <= 1/2, so
    // maximum likelihood is minimum Hamming distance between the nonzero
    // pattern of w and y. Ties are broken uniformly at random.
    let mut base = shifts[0];
    add_into(field, &mut base, &shifts[1]);
    let mut best_distance = u32::MAX;
    let mut ties = 0u64;
    let mut decoded = base;
    walk(field, &rows, &base, |w| {
        let d = (nonzero_mask(w, n) ^ y).count_ones();
        if d < best_distance {
            best_distance = d;
            ties = 1;
            decoded = *w;
        } else if d == best_distance {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                decoded = *w;
            }
        }
    });
    decoded[..n] != truth[..n]
}

/// Runs `trials` independent sum-decoding trials. Trial `t` draws all of its
/// randomness from the ChaCha8 stream `t` under `seed`, so results do not
/// depend on scheduling.
pub fn simulate_ex1_sum_decode(p: &SimParams) -> Result<SimReport> {
    let field = PrimeField::new(p.q)?;
    if p.n == 0 || p.n > MAX_SIM_BLOCKLENGTH {
        return Err(Error::Dimension(format!("n = {} outside 1..={MAX_SIM_BLOCKLENGTH}", p.n)));
    }
    if p.trials == 0 {
        return Err(domain("trials must be at least 1"));
    }
    for (name, v) in [("delta1", p.delta1), ("tau1", p.tau1), ("tau", p.tau)] {
        if !(0.0..=0.5).contains(&v) {
            return Err(domain(format!("{name} = {v} outside [0, 1/2]")));
        }
    }
    let shaping_k = p.effective_shaping_k()?;
    let dims = p.k + shaping_k;
    if !checked_pow(p.q, dims).is_some_and(|s| s <= DECODER_ENUMERATION_LIMIT) {
        return Err(Error::Guard(format!(
            "sum coset of size {}^{dims} exceeds {DECODER_ENUMERATION_LIMIT}",
            p.q
        )));
    }
    debug_assert!(conv(p.tau1, p.delta1) <= 0.5);

    let errors = (0..p.trials as u64)
        .into_par_iter()
        .filter(|&t| run_trial(p, field, shaping_k, t))
        .count();
    Ok(SimReport {
        n: p.n,
        k: p.k,
        shaping_k,
        q: p.q,
        trials: p.trials,
        errors,
        rate: p.rate(),
        decode_error_rate: errors as f64 / p.trials as f64,
        seed: p.seed,
    })
}

/// Message dimension whose rate `k log2 q / n` is nearest to `rate`.
pub fn dimension_for_rate(n: usize, q: u8, rate: f64) -> usize {
    (rate * n as f64 / (q as f64).log2()).round().max(0.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> PrimeField {
        PrimeField::new(3).unwrap()
    }

    #[test]
    fn empty_code_is_just_the_shift() {
        let code = sample_code(4, 0, 3, 1).unwrap();
        let cb = CosetCodebook::new(code, vec![1, 2, 0, 1]).unwrap();
        assert_eq!(enumerate_coset(&cb).unwrap(), vec![vec![1, 2, 0, 1]]);
        assert_eq!(sum_support_count(&cb, &cb).unwrap(), 1);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_code(16, 5, 3, 42).unwrap();
        let b = sample_code(16, 5, 3, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_code(16, 5, 3, 43).unwrap());
        assert!(sample_code(3, 4, 3, 0).is_err());
        assert!(sample_code(3, 1, 4, 0).is_err());
    }

    #[test]
    fn coset_size_tracks_rank() {
        let code = sample_code(8, 3, 3, 5).unwrap();
        let words = enumerate_coset(&CosetCodebook::new(code.clone(), vec![0; 8]).unwrap()).unwrap();
        assert_eq!(words.len(), 27);
        let distinct: HashSet<_> = words.iter().cloned().collect();
        assert_eq!(distinct.len(), 3usize.pow(code.rank() as u32));
        assert!(words.contains(&vec![0; 8]));
    }

    #[test]
    fn rank_of_known_matrices() {
        let f = f3();
        let full = LinearCode::new(f, 3, vec![vec![1, 0, 0], vec![0, 1, 0]]).unwrap();
        assert_eq!(full.rank(), 2);
        let dependent = LinearCode::new(f, 3, vec![vec![1, 2, 0], vec![2, 1, 0]]).unwrap();
        assert_eq!(dependent.rank(), 1);
        assert_eq!(LinearCode::new(f, 3, vec![]).unwrap().rank(), 0);
    }

    #[test]
    fn encode_matches_enumeration_order() {
        let code = sample_code(6, 2, 3, 9).unwrap();
        let words = enumerate_coset(&CosetCodebook::new(code.clone(), vec![0; 6]).unwrap()).unwrap();
        for (i, w) in words.iter().enumerate() {
            let m = [(i / 3) as u8, (i % 3) as u8];
            assert_eq!(&code.encode(&m).unwrap(), w);
        }
    }

    #[test]
    fn full_rank_closure() {
        let f = f3();
        let code = LinearCode::new(f, 5, vec![vec![1, 0, 0, 2, 1], vec![0, 1, 0, 1, 1], vec![0, 0, 1, 1, 2]]).unwrap();
        let a = CosetCodebook::new(code.clone(), vec![1, 1, 0, 2, 0]).unwrap();
        let b = CosetCodebook::new(code, vec![2, 0, 1, 1, 1]).unwrap();
        assert_eq!(sum_support_count(&a, &b).unwrap(), 27);
    }

    #[test]
    fn mismatched_codes_and_guards() {
        let a = CosetCodebook::with_random_shift(sample_code(6, 2, 3, 1).unwrap(), 2);
        let b = CosetCodebook::with_random_shift(sample_code(6, 2, 3, 3).unwrap(), 4);
        assert!(sum_support_count(&a, &b).is_err());
        let big = CosetCodebook::with_random_shift(sample_code(40, 13, 3, 1).unwrap(), 2);
        assert!(matches!(enumerate_coset(&big), Err(Error::Guard(_))));
        let mid = CosetCodebook::with_random_shift(sample_code(40, 8, 3, 1).unwrap(), 2);
        assert!(matches!(sum_support_count(&mid, &mid), Err(Error::Guard(_))));
    }

    #[test]
    fn or_is_determined_by_ternary_sum() {
        for a in 0..2usize {
            for b in 0..2usize {
                let s = (a + b) % 3;
                assert_eq!(a | b, usize::from(s != 0));
            }
        }
    }

    #[test]
    fn walk_visits_every_word() {
        let f = f3();
        let mut r0 = [0u8; MAX_SIM_BLOCKLENGTH];
        let mut r1 = [0u8; MAX_SIM_BLOCKLENGTH];
        r0[0] = 1;
        r1[1] = 1;
        let mut seen = HashSet::new();
        walk(f, &[r0, r1], &[0u8; MAX_SIM_BLOCKLENGTH], |w| {
            seen.insert((w[0], w[1]));
        });
        assert_eq!(seen.len(), 9);
    }

    #[test]
    fn noiseless_without_messages_never_errs() {
        let mut p = SimParams::new(12, 0);
        p.shaping_k = Some(0);
        p.delta1 = 0.0;
        p.tau1 = 0.0;
        p.trials = 200;
        assert_eq!(simulate_ex1_sum_decode(&p).unwrap().errors, 0);
    }

    #[test]
    fn simulation_is_deterministic() {
        let mut p = SimParams::new(12, 2);
        p.trials = 50;
        p.seed = 11;
        let a = simulate_ex1_sum_decode(&p).unwrap();
        let b = simulate_ex1_sum_decode(&p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shaping_k, 8);
    }

    #[test]
    fn simulation_guards() {
        let mut p = SimParams::new(24, 9);
        p.shaping_k = Some(2);
        assert!(matches!(simulate_ex1_sum_decode(&p), Err(Error::Guard(_))));
        let mut p = SimParams::new(80, 1);
        p.shaping_k = Some(0);
        assert!(simulate_ex1_sum_decode(&p).is_err());
        let mut p = SimParams::new(12, 1);
        p.trials = 0;
        assert!(simulate_ex1_sum_decode(&p).is_err());
        let mut p = SimParams::new(12, 1);
        p.tau = 0.7;
        assert!(simulate_ex1_sum_decode(&p).is_err());
    }

    #[test]
    fn dimension_for_rate_rounds() {
        assert_eq!(dimension_for_rate(12, 3, 0.5 * 0.363_302_766), 1);
        assert_eq!(dimension_for_rate(24, 3, 0.5 * 0.363_302_766), 3);
        assert_eq!(dimension_for_rate(12, 3, 2.0 * 0.363_302_766), 6);
    }
}
