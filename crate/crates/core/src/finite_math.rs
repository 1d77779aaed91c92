//! Scalar information-theoretic primitives, entropy algebra over finite
//! joint distributions, and prime-field arithmetic.
//!
//! All information quantities are in bits. `0 log 0` is taken as `0`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerance used when validating that a distribution sums to one.
pub const PMF_TOLERANCE: f64 = 1e-12;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Prob(f64);

impl Prob {
    pub const ZERO: Prob = Prob(0.0);
    pub const HALF: Prob = Prob(0.5);
    pub const ONE: Prob = Prob(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Prob(value))
        } else {
            Err(domain(format!("probability {value} outside [0, 1]")))
        }
    }

    /// Parses a decimal (`0.067`) or integer fraction (`1/90`) string.
    pub fn parse(text: &str) -> Result<Self> {
        Prob::new(parse_decimal(text)?)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn complement(self) -> Prob {
        Prob(1.0 - self.0)
    }
}

impl TryFrom<f64> for Prob {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Prob::new(value)
    }
}

impl From<Prob> for f64 {
    fn from(p: Prob) -> f64 {
        p.0
    }
}

/// Parses a real number written either as a decimal literal or as an integer
/// fraction `a/b`. Fractions are converted with a single rounding step.
pub fn parse_decimal(text: &str) -> Result<f64> {
    let text = text.trim();
    let bad = |message: &str| Error::Parse {
        location: format!("`{text}`"),
        message: message.to_string(),
    };
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad("fraction numerator must be an integer"))?;
        let den: i64 = den.trim().parse().map_err(|_| bad("fraction denominator must be an integer"))?;
        if den == 0 {
            return Err(bad("zero denominator"));
        }
        const EXACT: i64 = 1 << 53;
        if num.abs() > EXACT || den.abs() > EXACT {
            return Err(bad("fraction terms exceed 2^53"));
        }
        Ok(num as f64 / den as f64)
    } else {
        let v: f64 = text.parse().map_err(|_| bad("not a decimal number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad("not a finite number"))
        }
    }
}

/// Computes `1 - x` for a plain decimal string in `[0, 1]`, digit by digit,
/// so that e.g. `"0.92"` maps to `"0.08"` without binary rounding.
pub fn decimal_complement(text: &str) -> Result<String> {
    let bad = || Error::Parse {
        location: format!("`{text}`"),
        message: "expected a plain decimal in [0, 1]".to_string(),
    };
    let (int_part, frac_part) = text.trim().split_once('.').unwrap_or((text.trim(), ""));
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let scale = frac_part.len() as u32;
    if scale > 18 {
        return Err(bad());
    }
    let unit = 10u128.pow(scale);
    let int_val: u128 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
    let frac_val: u128 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| bad())? };
    let value = int_val * unit + frac_val;
    if value > unit {
        return Err(bad());
    }
    let rest = unit - value;
    if scale == 0 {
        return Ok(rest.to_string());
    }
    let digits = format!("{:0width$}", rest % unit, width = scale as usize);
    Ok(format!("{}.{}", rest / unit, digits))
}

#[inline]
fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy on raw floats. Callers guarantee `x` in `[0, 1]`.
#[inline]
pub(crate) fn hb(x: f64) -> f64 {
    -xlog2x(x) - xlog2x(1.0 - x)
}

#[inline]
pub(crate) fn conv(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + (1.0 - a) * b
}

/// Binary entropy `-x log2 x - (1-x) log2 (1-x)`.
pub fn binary_entropy(x: Prob) -> f64 {
    hb(x.0)
}

/// Binary convolution `a(1-b) + (1-a)b`.
pub fn bconv(a: Prob, b: Prob) -> Prob {
    // The convex combination stays in [0, 1] up to rounding.
    Prob(conv(a.0, b.0).clamp(0.0, 1.0))
}

/// Capacity of a BSC with crossover `delta` under Hamming cost `tau`:
/// `h_b(tau * delta) - h_b(delta)`.
pub fn bsc_capacity_cost(tau: Prob, delta: Prob) -> f64 {
    hb(conv(tau.0, delta.0)) - hb(delta.0)
}

/// A probability mass function over `{0, .., m-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    probs: Vec<f64>,
}

fn check_entries(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidPmf(format!("{what} is empty")));
    }
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidPmf(format!("{what} entry {i} is {v}")));
    }
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > PMF_TOLERANCE {
        return Err(Error::InvalidPmf(format!("{what} sums to {total}")));
    }
    Ok(())
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_entries(&probs, "pmf")?;
        Ok(Pmf { probs })
    }

    /// Rescales non-negative weights to sum to one.
    pub fn normalize(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidPmf("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidPmf("weights sum to zero".into()));
        }
        Ok(Pmf {
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidPmf("empty alphabet".into()));
        }
        Ok(Pmf {
            probs: vec![1.0 / m as f64; m],
        })
    }

    pub fn point_mass(m: usize, at: usize) -> Result<Self> {
        if at >= m {
            return Err(Error::InvalidPmf(format!("point mass at {at} outside alphabet of size {m}")));
        }
        let mut probs = vec![0.0; m];
        probs[at] = 1.0;
        Ok(Pmf { probs })
    }

    /// Bernoulli law `(1 - p, p)` on `{0, 1}`.
    pub fn bernoulli(p: Prob) -> Self {
        Pmf {
            probs: vec![1.0 - p.0, p.0],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn entropy(&self) -> f64 {
        -self.probs.iter().map(|&p| xlog2x(p)).sum::<f64>()
    }
}

/// Shannon entropy of a pmf, in bits.
pub fn entropy(p: &Pmf) -> f64 {
    p.entropy()
}

/// A joint pmf over a product of finite alphabets, stored row-major
/// (the first axis is the most significant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    dims: Vec<usize>,
    table: Vec<f64>,
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

impl JointPmf {
    pub fn new(dims: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!("invalid dims {dims:?}")));
        }
        let size: usize = dims.iter().product();
        if size != table.len() {
            return Err(Error::Dimension(format!(
                "dims {dims:?} need {size} entries, got {}",
                table.len()
            )));
        }
        check_entries(&table, "joint table")?;
        Ok(JointPmf { dims, table })
    }

    /// Builds a joint by evaluating `f` on every index tuple.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let size: usize = dims.iter().product();
        let mut idx = vec![0usize; dims.len()];
        let mut table = Vec::with_capacity(size);
        for _ in 0..size {
            table.push(f(&idx));
            increment(&mut idx, &dims);
        }
        JointPmf::new(dims, table)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn num_axes(&self) -> usize {
        self.dims.len()
    }

    pub fn prob(&self, index: &[usize]) -> f64 {
        let s = strides(&self.dims);
        self.table[index.iter().zip(&s).map(|(i, s)| i * s).sum::<usize>()]
    }

    fn check_axes(&self, sets: &[&[usize]]) -> Result<()> {
        let mut seen = vec![false; self.dims.len()];
        for set in sets {
            for &a in *set {
                if a >= self.dims.len() {
                    return Err(Error::Axis(format!("axis {a} out of range for {} axes", self.dims.len())));
                }
                if seen[a] {
                    return Err(Error::Axis(format!("axis {a} repeated")));
                }
                seen[a] = true;
            }
        }
        Ok(())
    }

    /// Marginal over `axes`, in the order given.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointPmf> {
        self.check_axes(&[axes])?;
        if axes.is_empty() {
            return Ok(JointPmf {
                dims: vec![1],
                table: vec![self.table.iter().sum()],
            });
        }
        Ok(JointPmf {
            dims: axes.iter().map(|&a| self.dims[a]).collect(),
            table: self.marginal_table(axes),
        })
    }

    fn marginal_table(&self, axes: &[usize]) -> Vec<f64> {
        let out_dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let out_strides = strides(&out_dims);
        let mut weight = vec![0usize; self.dims.len()];
        for (k, &a) in axes.iter().enumerate() {
            weight[a] = out_strides[k];
        }
        let mut out = vec![0.0; out_dims.iter().product::<usize>().max(1)];
        let mut idx = vec![0usize; self.dims.len()];
        for &p in &self.table {
            let j: usize = idx.iter().zip(&weight).map(|(i, w)| i * w).sum();
            out[j] += p;
            increment(&mut idx, &self.dims);
        }
        out
    }

    /// `H(axes)`; the empty set has entropy zero.
    pub fn entropy_of(&self, axes: &[usize]) -> Result<f64> {
        self.check_axes(&[axes])?;
        if axes.is_empty() {
            return Ok(0.0);
        }
        Ok(-self.marginal_table(axes).iter().map(|&p| xlog2x(p)).sum::<f64>())
    }

    /// `H(target | given)`, summed directly as `-sum p(g,t) log2 p(g,t)/p(g)`.
    pub fn cond_entropy(&self, target: &[usize], given: &[usize]) -> Result<f64> {
        self.check_axes(&[target, given])?;
        if target.is_empty() {
            return Ok(0.0);
        }
        let mut axes = given.to_vec();
        axes.extend_from_slice(target);
        let joint = self.marginal_table(&axes);
        let block: usize = target.iter().map(|&a| self.dims[a]).product();
        let mut h = 0.0;
        for chunk in joint.chunks(block) {
            let pg: f64 = chunk.iter().sum();
            if pg <= 0.0 {
                continue;
            }
            for &p in chunk {
                if p > 0.0 {
                    h -= p * (p / pg).log2();
                }
            }
        }
        Ok(h.max(0.0))
    }

    /// `I(A; B) = H(A) + H(B) - H(A, B)`, clamped at zero.
    pub fn mutual_info(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        self.check_axes(&[a, b])?;
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        let v = self.entropy_of(a)? + self.entropy_of(b)? - self.entropy_of(&ab)?;
        Ok(v.max(0.0))
    }

    /// `I(A; B | C) = H(A|C) + H(B|C) - H(A,B|C)`, clamped at zero.
    pub fn cond_mutual_info(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
        self.check_axes(&[a, b, c])?;
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        let v = self.cond_entropy(a, c)? + self.cond_entropy(b, c)? - self.cond_entropy(&ab, c)?;
        Ok(v.max(0.0))
    }

    /// Appends a new last axis of size `size` holding the deterministic
    /// function `f` of the existing index tuple.
    pub fn with_derived_axis(&self, size: usize, f: impl Fn(&[usize]) -> usize) -> Result<JointPmf> {
        if size == 0 {
            return Err(Error::Dimension("derived axis of size 0".into()));
        }
        let mut dims = self.dims.clone();
        dims.push(size);
        let mut table = vec![0.0; self.table.len() * size];
        let mut idx = vec![0usize; self.dims.len()];
        for (i, &p) in self.table.iter().enumerate() {
            let v = f(&idx);
            if v >= size {
                return Err(Error::Axis(format!("derived value {v} outside alphabet of size {size}")));
            }
            table[i * size + v] = p;
            increment(&mut idx, &self.dims);
        }
        Ok(JointPmf { dims, table })
    }

    /// Re-types `axis` as a larger alphabet of size `new_size`, with zero
    /// mass on the added symbols.
    pub fn embed_axis(&self, axis: usize, new_size: usize) -> Result<JointPmf> {
        self.check_axes(&[&[axis]])?;
        if new_size < self.dims[axis] {
            return Err(Error::Dimension(format!(
                "cannot embed axis of size {} into {new_size}",
                self.dims[axis]
            )));
        }
        let mut dims = self.dims.clone();
        dims[axis] = new_size;
        let new_strides = strides(&dims);
        let mut table = vec![0.0; dims.iter().product()];
        let mut idx = vec![0usize; self.dims.len()];
        for &p in &self.table {
            let j: usize = idx.iter().zip(&new_strides).map(|(i, s)| i * s).sum();
            table[j] = p;
            increment(&mut idx, &self.dims);
        }
        Ok(JointPmf { dims, table })
    }
}

/// Advances a row-major multi-index (last axis fastest).
pub(crate) fn increment(idx: &mut [usize], dims: &[usize]) {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < dims[a] {
            return;
        }
        idx[a] = 0;
    }
}

pub fn cond_entropy(j: &JointPmf, target: &[usize], given: &[usize]) -> Result<f64> {
    j.cond_entropy(target, given)
}

pub fn mutual_info(j: &JointPmf, a: &[usize], b: &[usize]) -> Result<f64> {
    j.mutual_info(a, b)
}

pub fn cond_mutual_info(j: &JointPmf, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
    j.cond_mutual_info(a, b, c)
}

/// A prime field `F_q` for the supported moduli 2, 3, 5 and 7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct PrimeField {
    q: u8,
}

impl PrimeField {
    pub const SUPPORTED: [u8; 4] = [2, 3, 5, 7];

    pub fn new(q: u8) -> Result<Self> {
        if Self::SUPPORTED.contains(&q) {
            Ok(PrimeField { q })
        } else {
            Err(Error::UnsupportedField(q))
        }
    }

    #[inline]
    pub fn q(self) -> u8 {
        self.q
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        (a + b) % self.q
    }

    #[inline]
    pub fn sub(self, a: u8, b: u8) -> u8 {
        (a + self.q - b) % self.q
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        (a * b) % self.q
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        (self.q - a) % self.q
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self, a: u8) -> Option<u8> {
        (1..self.q).find(|&b| self.mul(a, b) == 1)
    }

    pub fn elem(self, v: u8) -> Result<FieldElem> {
        if v < self.q {
            Ok(FieldElem { q: self.q, v })
        } else {
            Err(domain(format!("{v} is not an element of F_{}", self.q)))
        }
    }
}

impl TryFrom<u8> for PrimeField {
    type Error = Error;
    fn try_from(q: u8) -> Result<Self> {
        PrimeField::new(q)
    }
}

impl From<PrimeField> for u8 {
    fn from(f: PrimeField) -> u8 {
        f.q
    }
}

/// An element of a supported prime field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    q: u8,
    v: u8,
}

impl FieldElem {
    pub fn new(q: u8, v: u8) -> Result<Self> {
        PrimeField::new(q)?.elem(v)
    }

    pub fn q(self) -> u8 {
        self.q
    }

    pub fn value(self) -> u8 {
        self.v
    }

    fn field(self) -> PrimeField {
        PrimeField { q: self.q }
    }
}

fn same_field(a: FieldElem, b: FieldElem) -> Result<PrimeField> {
    if a.q == b.q {
        Ok(a.field())
    } else {
        Err(Error::ModulusMismatch(a.q, b.q))
    }
}

pub fn fq_add(a: FieldElem, b: FieldElem) -> Result<FieldElem> {
    let f = same_field(a, b)?;
    Ok(FieldElem { q: a.q, v: f.add(a.v, b.v) })
}

pub fn fq_mul(a: FieldElem, b: FieldElem) -> Result<FieldElem> {
    let f = same_field(a, b)?;
    Ok(FieldElem { q: a.q, v: f.mul(a.v, b.v) })
}

pub fn fq_neg(a: FieldElem) -> FieldElem {
    FieldElem {
        q: a.q,
        v: a.field().neg(a.v),
    }
}
