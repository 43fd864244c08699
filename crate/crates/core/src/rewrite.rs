//! Hypergraph rewrites for local `Z`, local `X` and computational-basis
//! measurement, plus the dense `X`-basis measurement that has no rewrite.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hypergraph::{MultiHypergraph, VertexSet};
use crate::statevector::{build_state, root_of_unity, QuditState};

#[derive(Clone, Debug, PartialEq)]
pub struct RewriteOutcome {
    pub hypergraph: MultiHypergraph,
    /// Measured vertex, in the labels of the input hypergraph.
    pub removed_vertex: Option<usize>,
    pub outcome: Option<u32>,
    pub probability: f64,
    /// `label_map[v - 1]` is the new label of input vertex `v`, `None` if removed.
    pub label_map: Vec<Option<usize>>,
}

impl RewriteOutcome {
    fn unitary(hypergraph: MultiHypergraph) -> Self {
        let label_map = (1..=hypergraph.n()).map(Some).collect();
        RewriteOutcome {
            hypergraph,
            removed_vertex: None,
            outcome: None,
            probability: 1.0,
            label_map,
        }
    }
}

/// `Z_k`: the multiplicity of `{k}` grows by one.
pub fn rewrite_z(h: &MultiHypergraph, k: usize) -> Result<RewriteOutcome> {
    h.check_vertex(k)?;
    Ok(RewriteOutcome::unitary(h.add_edge([k], 1)?))
}

/// `X_k`: every edge `e ∋ k` adds `m_e` to the multiplicity of `e ∖ {k}`.
pub fn rewrite_x(h: &MultiHypergraph, k: usize) -> Result<RewriteOutcome> {
    h.check_vertex(k)?;
    let mut out = h.clone();
    for (e, m) in h.edges().filter(|(e, _)| e.contains(k)) {
        out.add_edge_in_place(e.without(k), i64::from(m))?;
    }
    Ok(RewriteOutcome::unitary(out))
}

/// Measurement of `Z_k` with result `outcome`: vertex `k` is deleted and each
/// broken edge `e ∪ {k}` contributes `outcome · m_{e∪{k}}` to `e`. Labels above
/// `k` shift down by one.
pub fn rewrite_z_measurement(
    h: &MultiHypergraph,
    k: usize,
    outcome: u32,
) -> Result<RewriteOutcome> {
    h.check_vertex(k)?;
    if outcome >= h.d() {
        return Err(Error::domain(format!(
            "outcome {outcome} outside 0..{}",
            h.d()
        )));
    }
    if h.n() == 1 {
        return Err(Error::domain("cannot measure the only vertex"));
    }
    let relabel = |v: usize| if v > k { v - 1 } else { v };
    let mut out = MultiHypergraph::new(h.n() - 1, h.d())?;
    for (e, m) in h.edges() {
        let (target, weight) = if e.contains(k) {
            (e.without(k), i64::from(outcome) * i64::from(m))
        } else {
            (e.clone(), i64::from(m))
        };
        out.add_edge_in_place(VertexSet::new(target.iter().map(relabel)), weight)?;
    }
    let label_map = (1..=h.n())
        .map(|v| if v == k { None } else { Some(relabel(v)) })
        .collect();
    Ok(RewriteOutcome {
        hypergraph: out,
        removed_vertex: Some(k),
        outcome: Some(outcome),
        probability: 1.0 / f64::from(h.d()),
        label_map,
    })
}

/// The eigenvector `|x_j⟩ = Σ_i ω^{ij}|i⟩/√d` of `X` with eigenvalue `ω^j`.
pub fn x_eigenvector(d: u32, j: u32) -> Vec<Complex64> {
    let scale = 1.0 / f64::from(d).sqrt();
    (0..u64::from(d))
        .map(|i| root_of_unity(d, i * u64::from(j)) * scale)
        .collect()
}

/// Projects vertex `k` onto `|x_outcome⟩`; returns the residual `(n-1)`-qudit
/// state and the outcome probability.
pub fn dense_x_measurement(s: &QuditState, k: usize, outcome: u32) -> Result<(QuditState, f64)> {
    if outcome >= s.d() {
        return Err(Error::domain(format!(
            "outcome {outcome} outside 0..{}",
            s.d()
        )));
    }
    s.project_vertex(k, &x_eigenvector(s.d(), outcome))
}

/// One step of a rewrite chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewriteOp {
    Z(usize),
    X(usize),
    /// Z-basis measurement; `None` samples the outcome.
    Measure(usize, Option<u32>),
}

impl RewriteOp {
    pub fn apply<R: Rng + ?Sized>(
        &self,
        h: &MultiHypergraph,
        rng: &mut R,
    ) -> Result<RewriteOutcome> {
        match *self {
            RewriteOp::Z(k) => rewrite_z(h, k),
            RewriteOp::X(k) => rewrite_x(h, k),
            RewriteOp::Measure(k, Some(j)) => rewrite_z_measurement(h, k, j),
            // Every outcome has probability 1/d, so sampling is uniform.
            RewriteOp::Measure(k, None) => rewrite_z_measurement(h, k, rng.random_range(0..h.d())),
        }
    }
}

impl FromStr for RewriteOp {
    type Err = Error;

    /// `z:k`, `x:k`, `measure:k` or `measure:k=j`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::domain(format!(
                "bad rewrite op {s:?}; expected z:k, x:k or measure:k[=j]"
            ))
        };
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        match kind.trim() {
            "z" => Ok(RewriteOp::Z(num(arg)?)),
            "x" => Ok(RewriteOp::X(num(arg)?)),
            "measure" => match arg.split_once('=') {
                Some((k, j)) => Ok(RewriteOp::Measure(
                    num(k)?,
                    Some(j.trim().parse::<u32>().map_err(|_| bad())?),
                )),
                None => Ok(RewriteOp::Measure(num(arg)?, None)),
            },
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for RewriteOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewriteOp::Z(k) => write!(f, "z:{k}"),
            RewriteOp::X(k) => write!(f, "x:{k}"),
            RewriteOp::Measure(k, Some(j)) => write!(f, "measure:{k}={j}"),
            RewriteOp::Measure(k, None) => write!(f, "measure:{k}"),
        }
    }
}

/// Applies `ops` left to right; vertex labels in each op refer to the
/// hypergraph produced by the previous step.
pub fn apply_chain<R: Rng + ?Sized>(
    h: &MultiHypergraph,
    ops: &[RewriteOp],
    rng: &mut R,
) -> Result<Vec<RewriteOutcome>> {
    let mut current = h.clone();
    let mut steps = Vec::with_capacity(ops.len());
    for op in ops {
        let step = op.apply(&current, rng)?;
        current = step.hypergraph.clone();
        steps.push(step);
    }
    Ok(steps)
}

/// Dense cross-check of one rewrite on `|H⟩`: returns the largest amplitude
/// deviation between the rewritten state and the dense result, and the
/// difference of outcome probabilities. Measurements are compared after
/// aligning the global phase.
pub fn dense_residual(h: &MultiHypergraph, op: RewriteOp) -> Result<(f64, f64)> {
    let state = build_state(h)?;
    let (dense, p_dense, align) = match op {
        RewriteOp::Z(k) => (state.apply_z(k)?, 1.0, false),
        RewriteOp::X(k) => (state.apply_x(k)?, 1.0, false),
        RewriteOp::Measure(k, Some(j)) => {
            let (s, p) = state.measure_z(k, j)?;
            (s, p, true)
        }
        RewriteOp::Measure(_, None) => {
            return Err(Error::domain(
                "dense check needs a fixed measurement outcome",
            ))
        }
    };
    let step = match op {
        RewriteOp::Z(k) => rewrite_z(h, k)?,
        RewriteOp::X(k) => rewrite_x(h, k)?,
        RewriteOp::Measure(k, j) => rewrite_z_measurement(h, k, j.unwrap_or(0))?,
    };
    let symbolic = build_state(&step.hypergraph)?;
    let residual = if align {
        let overlap: Complex64 = symbolic
            .amplitudes()
            .iter()
            .zip(dense.amplitudes())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        symbolic
            .amplitudes()
            .iter()
            .zip(dense.amplitudes())
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    } else {
        symbolic.max_abs_diff(&dense)?
    };
    Ok((residual, (step.probability - p_dense).abs()))
}
