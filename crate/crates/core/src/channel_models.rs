//! Finite-alphabet channel models, the builders for the five example
//! channels, product-input joint distributions, and the channel file format.
//!
//! Rows of a transition table are indexed lexicographically by the tuple
//! `(x_1, .., x_m, s_1, .., s_r)` with the first coordinate most significant,
//! and each row lists `P(y_1, .., y_k | x, s)` in the same lexicographic order
//! over the outputs. For the MAC with states this is exactly the
//! `x1 x2 s1 s2` order of the usual printed transition tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::finite_math::{conv, decimal_complement, increment, parse_decimal, JointPmf, Pmf, Prob};

/// Row-sum tolerance for transition tables.
pub const ROW_TOLERANCE: f64 = 1e-9;

/// A per-terminal input cost `kappa(x)` with its average budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostFn {
    pub terminal: usize,
    pub values: Vec<f64>,
    pub budget: f64,
}

impl CostFn {
    /// Hamming cost on a binary terminal with the trivial budget 1.
    pub fn hamming(terminal: usize) -> Self {
        CostFn {
            terminal,
            values: vec![0.0, 1.0],
            budget: 1.0,
        }
    }

    pub fn max_cost(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    input_dims: Vec<usize>,
    state_dims: Vec<usize>,
    output_dims: Vec<usize>,
    rows: Vec<Vec<f64>>,
    cost_fns: Vec<CostFn>,
    state_law: Option<Pmf>,
}

fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

fn flat_index(index: &[usize], dims: &[usize]) -> Result<usize> {
    if index.len() != dims.len() {
        return Err(Error::Dimension(format!("index {index:?} does not match dims {dims:?}")));
    }
    let mut flat = 0;
    for (&i, &d) in index.iter().zip(dims) {
        if i >= d {
            return Err(Error::Dimension(format!("index {index:?} out of range for dims {dims:?}")));
        }
        flat = flat * d + i;
    }
    Ok(flat)
}

impl ChannelModel {
    pub fn new(
        input_dims: Vec<usize>,
        state_dims: Vec<usize>,
        output_dims: Vec<usize>,
        rows: Vec<Vec<f64>>,
        cost_fns: Vec<CostFn>,
        state_law: Option<Pmf>,
    ) -> Result<Self> {
        if input_dims.is_empty() || output_dims.is_empty() {
            return Err(Error::Dimension("a channel needs at least one input and one output".into()));
        }
        if input_dims.iter().chain(&state_dims).chain(&output_dims).any(|&d| d == 0) {
            return Err(Error::Dimension("alphabet sizes must be positive".into()));
        }
        let n_rows = product(&input_dims) * product(&state_dims);
        let n_cols = product(&output_dims);
        if rows.len() != n_rows {
            return Err(Error::Dimension(format!("expected {n_rows} rows, got {}", rows.len())));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::Dimension(format!("row {r} has {} entries, expected {n_cols}", row.len())));
            }
            if let Some(v) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0 && **v <= 1.0)) {
                return Err(Error::InvalidPmf(format!("row {r} contains {v}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::Normalization { row: r, sum });
            }
        }
        for c in &cost_fns {
            let dim = *input_dims
                .get(c.terminal)
                .ok_or_else(|| Error::Dimension(format!("cost function on missing terminal {}", c.terminal)))?;
            if c.values.len() != dim {
                return Err(Error::Dimension(format!(
                    "cost function for terminal {} has {} values, alphabet has {dim}",
                    c.terminal,
                    c.values.len()
                )));
            }
            if c.values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(domain("costs must be finite and non-negative"));
            }
            if !(0.0..=c.max_cost()).contains(&c.budget) {
                return Err(domain(format!("budget {} outside [0, {}]", c.budget, c.max_cost())));
            }
        }
        match (&state_law, state_dims.is_empty()) {
            (Some(_), true) => return Err(Error::Dimension("state law given for a stateless channel".into())),
            (Some(law), false) if law.len() != product(&state_dims) => {
                return Err(Error::Dimension(format!(
                    "state law has {} entries, state alphabet has {}",
                    law.len(),
                    product(&state_dims)
                )))
            }
            _ => {}
        }
        Ok(ChannelModel {
            input_dims,
            state_dims,
            output_dims,
            rows,
            cost_fns,
            state_law,
        })
    }

    pub fn input_dims(&self) -> &[usize] {
        &self.input_dims
    }

    pub fn state_dims(&self) -> &[usize] {
        &self.state_dims
    }

    pub fn output_dims(&self) -> &[usize] {
        &self.output_dims
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn cost_fns(&self) -> &[CostFn] {
        &self.cost_fns
    }

    pub fn state_law(&self) -> Option<&Pmf> {
        self.state_law.as_ref()
    }

    pub fn has_states(&self) -> bool {
        !self.state_dims.is_empty()
    }

    /// `P(y | x, s)` as a row over the joint output alphabet.
    pub fn row(&self, inputs: &[usize], states: &[usize]) -> Result<&[f64]> {
        let x = flat_index(inputs, &self.input_dims)?;
        let s = flat_index(states, &self.state_dims)?;
        Ok(&self.rows[x * product(&self.state_dims) + s])
    }

    pub fn transition(&self, outputs: &[usize], inputs: &[usize], states: &[usize]) -> Result<f64> {
        let y = flat_index(outputs, &self.output_dims)?;
        Ok(self.row(inputs, states)?[y])
    }

    /// Sets the budget of each cost function in order.
    pub fn with_budgets(mut self, budgets: &[f64]) -> Result<Self> {
        if budgets.len() != self.cost_fns.len() {
            return Err(Error::Dimension(format!(
                "{} budgets for {} cost functions",
                budgets.len(),
                self.cost_fns.len()
            )));
        }
        for (c, &b) in self.cost_fns.iter_mut().zip(budgets) {
            if !(0.0..=c.max_cost()).contains(&b) {
                return Err(domain(format!("budget {b} outside [0, {}]", c.max_cost())));
            }
            c.budget = b;
        }
        Ok(self)
    }
}

fn bsc(eta: f64, y: usize, x: usize) -> f64 {
    if y == x {
        1.0 - eta
    } else {
        eta
    }
}

fn builder_param(p: Prob, name: &str) -> Result<f64> {
    if p.value() <= 0.5 {
        Ok(p.value())
    } else {
        Err(domain(format!("{name} = {} outside [0, 0.5]", p.value())))
    }
}

/// Builds a channel whose three binary inputs and three binary outputs are
/// related by `rowfn(x, y)`.
fn binary_3x3(rowfn: impl Fn([usize; 3], [usize; 3]) -> f64) -> Result<ChannelModel> {
    let mut rows = Vec::with_capacity(8);
    for x in 0..8 {
        let xs = [x >> 2 & 1, x >> 1 & 1, x & 1];
        let row = (0..8).map(|y| rowfn(xs, [y >> 2 & 1, y >> 1 & 1, y & 1])).collect();
        rows.push(row);
    }
    ChannelModel::new(
        vec![2, 2, 2],
        vec![],
        vec![2, 2, 2],
        rows,
        (0..3).map(CostFn::hamming).collect(),
        None,
    )
}

/// The 3-to-1 OR interference channel:
/// `BSC_d1(y1 | x1 xor (x2 or x3)) BSC_d2(y2 | x2) BSC_d3(y3 | x3)`.
pub fn make_ex1(delta1: Prob, delta2: Prob, delta3: Prob) -> Result<ChannelModel> {
    let d1 = builder_param(delta1, "delta1")?;
    let d2 = builder_param(delta2, "delta2")?;
    let d3 = builder_param(delta3, "delta3")?;
    binary_3x3(|x, y| bsc(d1, y[0], x[0] ^ (x[1] | x[2])) * bsc(d2, y[1], x[1]) * bsc(d3, y[2], x[2]))
}

/// A binary-input, binary-output MAC `P(y | b, c)` stored as `P(y = 0 | b, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacTable {
    zero: [[f64; 2]; 2],
}

impl MacTable {
    pub fn new(zero: [[f64; 2]; 2]) -> Result<Self> {
        if zero.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidPmf(format!("MAC table {zero:?} has entries outside [0, 1]")));
        }
        Ok(MacTable { zero })
    }

    /// `y = b xor c` observed through a BSC with crossover `delta1`.
    pub fn additive(delta1: Prob) -> Self {
        let d = delta1.value();
        MacTable {
            zero: [[1.0 - d, d], [d, 1.0 - d]],
        }
    }

    pub fn prob(&self, y: usize, b: usize, c: usize) -> f64 {
        let z = self.zero[b][c];
        if y == 0 {
            z
        } else {
            1.0 - z
        }
    }
}

impl Default for MacTable {
    /// The non-additive MAC coupling user 1 with the OR interference.
    fn default() -> Self {
        MacTable {
            zero: [[0.989, 0.01], [0.02, 0.993]],
        }
    }
}

/// The 3-to-1 OR interference channel with a non-additive MAC at receiver 1:
/// `MAC(y1 | x1, x2 or x3) BSC_d(y2 | x2) BSC_d(y3 | x3)`.
pub fn make_ex2(mac: &MacTable, delta: Prob) -> Result<ChannelModel> {
    let d = builder_param(delta, "delta")?;
    binary_3x3(|x, y| mac.prob(y[0], x[0], x[1] | x[2]) * bsc(d, y[1], x[1]) * bsc(d, y[2], x[2]))
}

/// The fully symmetric 3-user OR interference channel
/// `Y_j = (X_j and N_j1) xor (X_i or X_k) xor N_j2` with independent
/// `N_j1 ~ Bern(beta)`, `N_j2 ~ Bern(delta)`.
pub fn make_ex3(beta: Prob, delta: Prob) -> Result<ChannelModel> {
    let b = builder_param(beta, "beta")?;
    let d = builder_param(delta, "delta")?;
    binary_3x3(|x, y| {
        (0..3)
            .map(|j| {
                let s = x[(j + 1) % 3] | x[(j + 2) % 3];
                let one = conv(conv(x[j] as f64 * b, d), s as f64);
                if y[j] == 1 {
                    one
                } else {
                    1.0 - one
                }
            })
            .product()
    })
}

/// The 3-user broadcast channel obtained by pooling the inputs of
/// [`make_ex1`] (with `delta2 = delta3 = delta`) into one 8-ary input
/// `x1 x2 x3`, with per-digit Hamming costs.
pub fn make_ex4(delta1: Prob, delta: Prob) -> Result<ChannelModel> {
    let ic = make_ex1(delta1, delta, delta)?;
    let cost_fns = (0..3)
        .map(|j| CostFn {
            terminal: 0,
            values: (0..8).map(|x| ((x >> (2 - j)) & 1) as f64).collect(),
            budget: 1.0,
        })
        .collect();
    ChannelModel::new(vec![8], vec![], vec![2, 2, 2], ic.rows, cost_fns, None)
}

/// `W(y = 0 | x1 x2 s1 s2)` for the binary MAC with distributed states,
/// lexicographic in `x1 x2 s1 s2`.
pub const EX5_ZERO_ROWS: [&str; 16] = [
    "0.92", "0.07", "0.06", "0.96", // 00 s1s2
    "0.10", "0.88", "0.95", "0.11", // 01
    "0.08", "0.92", "0.94", "0.10", // 10
    "0.92", "0.08", "0.06", "0.91", // 11
];

/// The binary MAC with distributed states: uniform independent states and
/// Hamming costs on both inputs.
pub fn make_ex5() -> ChannelModel {
    let rows = EX5_ZERO_ROWS
        .iter()
        .map(|z| {
            let one = decimal_complement(z).expect("static table");
            vec![parse_decimal(z).expect("static table"), parse_decimal(&one).expect("static table")]
        })
        .collect();
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

/// Joint pmf over `(inputs.., states.., outputs..)` for independent inputs
/// with the given laws. A stateful channel uses `state_law` if given and its
/// own law otherwise.
pub fn joint_distribution(ch: &ChannelModel, input_laws: &[Pmf], state_law: Option<&Pmf>) -> Result<JointPmf> {
    if input_laws.len() != ch.input_dims.len() {
        return Err(Error::Dimension(format!(
            "{} input laws for {} input terminals",
            input_laws.len(),
            ch.input_dims.len()
        )));
    }
    for (j, (law, &dim)) in input_laws.iter().zip(&ch.input_dims).enumerate() {
        if law.len() != dim {
            return Err(Error::Dimension(format!("input law {j} has {} entries, alphabet has {dim}", law.len())));
        }
    }
    let state_law = match (ch.has_states(), state_law) {
        (false, Some(_)) => return Err(Error::Dimension("state law given for a stateless channel".into())),
        (false, None) => None,
        (true, Some(law)) => Some(law),
        (true, None) => Some(
            ch.state_law
                .as_ref()
                .ok_or_else(|| Error::Dimension("stateful channel needs a state law".into()))?,
        ),
    };
    if let Some(law) = state_law {
        if law.len() != product(&ch.state_dims) {
            return Err(Error::Dimension("state law does not match state alphabet".into()));
        }
    }

    let m = ch.input_dims.len();
    let n_states = product(&ch.state_dims);
    let n_out = product(&ch.output_dims);
    let mut dims = ch.input_dims.clone();
    dims.extend_from_slice(&ch.state_dims);
    dims.extend_from_slice(&ch.output_dims);

    let mut table = Vec::with_capacity(ch.rows.len() * n_out);
    let mut x = vec![0usize; m];
    for xi in 0..product(&ch.input_dims) {
        let px: f64 = x.iter().zip(input_laws).map(|(&v, law)| law.probs()[v]).product();
        for s in 0..n_states {
            let ps = state_law.map_or(1.0, |law| law.probs()[s]);
            let row = &ch.rows[xi * n_states + s];
            table.extend(row.iter().map(|w| px * ps * w));
        }
        increment(&mut x, &ch.input_dims);
    }
    JointPmf::new(dims, table)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    input_dims: Vec<usize>,
    #[serde(default)]
    state_dims: Vec<usize>,
    output_dims: Vec<usize>,
    rows: Vec<Vec<String>>,
    #[serde(default)]
    cost_fns: Vec<CostFnFile>,
    #[serde(default)]
    state_law: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CostFnFile {
    terminal: usize,
    values: Vec<String>,
    budget: String,
}

fn parse_at(text: &str, location: String) -> Result<f64> {
    parse_decimal(text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse { location, message },
        other => other,
    })
}

fn join_decimals(values: &[f64]) -> String {
    values.iter().map(|v| format!("\"{v}\"")).collect::<Vec<_>>().join(", ")
}

fn join_ints(values: &[usize]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

/// Serializes a channel to its text form. Probabilities are written as the
/// shortest decimal strings that parse back to the same floats.
pub fn channel_to_string(ch: &ChannelModel) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"input_dims\": [{}],", join_ints(&ch.input_dims));
    let _ = writeln!(out, "  \"state_dims\": [{}],", join_ints(&ch.state_dims));
    let _ = writeln!(out, "  \"output_dims\": [{}],", join_ints(&ch.output_dims));
    out.push_str("  \"rows\": [\n");
    for (i, row) in ch.rows.iter().enumerate() {
        let sep = if i + 1 < ch.rows.len() { "," } else { "" };
        let _ = writeln!(out, "    [{}]{sep}", join_decimals(row));
    }
    out.push_str("  ],\n");
    if ch.cost_fns.is_empty() {
        out.push_str("  \"cost_fns\": [],\n");
    } else {
        out.push_str("  \"cost_fns\": [\n");
        for (i, c) in ch.cost_fns.iter().enumerate() {
            let sep = if i + 1 < ch.cost_fns.len() { "," } else { "" };
            let _ = writeln!(
                out,
                "    {{\"terminal\": {}, \"values\": [{}], \"budget\": \"{}\"}}{sep}",
                c.terminal,
                join_decimals(&c.values),
                c.budget
            );
        }
        out.push_str("  ],\n");
    }
    match &ch.state_law {
        Some(law) => {
            let _ = writeln!(out, "  \"state_law\": [{}]", join_decimals(law.probs()));
        }
        None => out.push_str("  \"state_law\": null\n"),
    }
    out.push_str("}\n");
    out
}

/// Parses and validates the text form written by [`channel_to_string`].
pub fn channel_from_str(text: &str) -> Result<ChannelModel> {
    let file: ChannelFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let rows = file
        .rows
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(c, v)| parse_at(v, format!("rows[{r}][{c}]")))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let cost_fns = file
        .cost_fns
        .iter()
        .enumerate()
        .map(|(i, c)| {
            Ok(CostFn {
                terminal: c.terminal,
                values: c
                    .values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| parse_at(v, format!("cost_fns[{i}].values[{k}]")))
                    .collect::<Result<Vec<_>>>()?,
                budget: parse_at(&c.budget, format!("cost_fns[{i}].budget"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let state_law = file
        .state_law
        .map(|law| {
            let probs = law
                .iter()
                .enumerate()
                .map(|(k, v)| parse_at(v, format!("state_law[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            Pmf::new(probs)
        })
        .transpose()?;
    ChannelModel::new(file.input_dims, file.state_dims, file.output_dims, rows, cost_fns, state_law)
}

pub fn load_channel(path: impl AsRef<Path>) -> Result<ChannelModel> {
    channel_from_str(&std::fs::read_to_string(path)?)
}

pub fn dump_channel(ch: &ChannelModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, channel_to_string(ch))?;
    Ok(())
}
