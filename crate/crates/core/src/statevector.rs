//! Dense `n`-qudit state vectors and the diagonal/shift operators acting on them.
//!
//! Amplitudes are indexed by `I = Σ_k i_k · d^(n-k)`, so vertex 1 is the most
//! significant digit and kets enumerate in the usual `|0…0⟩, |0…1⟩, …` order.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::{MultiHypergraph, VertexSet};
use crate::output::round_sig;

/// Default ceiling on the number of amplitudes of any dense object.
pub const DEFAULT_MAX_AMPLITUDES: u128 = 1 << 24;

/// Environment variable overriding [`DEFAULT_MAX_AMPLITUDES`].
pub const MAX_AMPLITUDES_ENV: &str = "QHS_MAX_AMPLITUDES";

/// Norm tolerance accepted for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-9;

pub fn max_amplitudes() -> u128 {
    std::env::var(MAX_AMPLITUDES_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u128>().ok())
        .unwrap_or(DEFAULT_MAX_AMPLITUDES)
}

/// `d^n` if it is within the amplitude guard.
pub fn checked_dimension(n: usize, d: u32) -> Result<usize> {
    checked_size(n, d, "state vector")
}

pub(crate) fn checked_size(n: usize, d: u32, what: &str) -> Result<usize> {
    let limit = max_amplitudes();
    let mut size: u128 = 1;
    for _ in 0..n {
        size = size.saturating_mul(u128::from(d));
        if size > limit {
            return Err(Error::Capacity {
                what: what.to_string(),
                requested: u128::from(d).saturating_pow(n as u32),
                limit,
            });
        }
    }
    Ok(size as usize)
}

/// `ω_d^k` with `ω_d = exp(2πi/d)`, evaluated from `k mod d`.
pub fn root_of_unity(d: u32, k: u64) -> Complex64 {
    let k = k % u64::from(d);
    // Quarter turns are exact so that real amplitudes stay real.
    match (4 * k).checked_rem(u64::from(d)) {
        Some(0) => [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ][(4 * k / u64::from(d)) as usize],
        _ => Complex64::from_polar(1.0, TAU * k as f64 / f64::from(d)),
    }
}

pub(crate) fn roots_table(d: u32) -> Vec<Complex64> {
    (0..u64::from(d)).map(|k| root_of_unity(d, k)).collect()
}

/// Odometer over digit strings in index order.
pub(crate) struct Digits {
    d: u32,
    digits: Vec<u32>,
}

impl Digits {
    pub(crate) fn new(n: usize, d: u32) -> Self {
        Digits {
            d,
            digits: vec![0; n],
        }
    }

    pub(crate) fn get(&self) -> &[u32] {
        &self.digits
    }

    pub(crate) fn advance(&mut self) {
        for digit in self.digits.iter_mut().rev() {
            *digit += 1;
            if *digit < self.d {
                return;
            }
            *digit = 0;
        }
    }
}

/// `Π_{v∈e} i_v mod d`, with the empty product equal to 1.
pub(crate) fn digit_product(digits: &[u32], e: &VertexSet, d: u32) -> u64 {
    let d = u64::from(d);
    e.iter()
        .fold(1 % d, |acc, v| acc * u64::from(digits[v - 1]) % d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuditState {
    n: usize,
    d: u32,
    amps: Vec<Complex64>,
}

impl QuditState {
    /// `|+⟩_d^{⊗n}`.
    pub fn plus_state(n: usize, d: u32) -> Result<Self> {
        check_shape(n, d)?;
        let dim = checked_dimension(n, d)?;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(QuditState {
            n,
            d,
            amps: vec![a; dim],
        })
    }

    /// The computational basis ket `|i_1 … i_n⟩`.
    pub fn basis(n: usize, d: u32, digits: &[u32]) -> Result<Self> {
        check_shape(n, d)?;
        let dim = checked_dimension(n, d)?;
        if digits.len() != n || digits.iter().any(|&i| i >= d) {
            return Err(Error::domain("basis digits must be n values in 0..d"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index_of(digits, d)] = Complex64::new(1.0, 0.0);
        Ok(QuditState { n, d, amps })
    }

    /// Wraps an amplitude vector that is already normalized.
    pub fn from_amplitudes(n: usize, d: u32, amps: Vec<Complex64>) -> Result<Self> {
        check_shape(n, d)?;
        let dim = checked_dimension(n, d)?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim} amplitudes, got {}",
                amps.len()
            )));
        }
        let norm = norm(&amps);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::domain(format!("state norm is {norm}, expected 1")));
        }
        Ok(QuditState { n, d, amps })
    }

    /// Normalizes `amps`; a zero vector is reported as [`Error::ZeroProbability`].
    pub fn normalized(n: usize, d: u32, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = norm(&amps);
        if norm < 1e-300 {
            return Err(Error::ZeroProbability);
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(n, d, amps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, digits: &[u32]) -> Complex64 {
        self.amps[index_of(digits, self.d)]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// Digit of vertex `k` (1-based) in basis index `index`.
    pub fn digit(&self, index: usize, k: usize) -> u32 {
        ((index / self.stride(k)) % self.d as usize) as u32
    }

    fn stride(&self, k: usize) -> usize {
        (self.d as usize).pow((self.n - k) as u32)
    }

    fn check_vertex(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.n {
            Err(Error::domain(format!(
                "vertex {k} out of range 1..={}",
                self.n
            )))
        } else {
            Ok(())
        }
    }

    /// `C_e^m`: multiplies each amplitude by `ω_d^(m · Π_{v∈e} i_v)`.
    pub fn apply_hyperedge(&self, e: impl Into<VertexSet>, m: i64) -> Result<Self> {
        let e = e.into();
        e.iter().try_for_each(|v| self.check_vertex(v))?;
        let mut out = self.clone();
        out.phase_in_place(&e, m.rem_euclid(i64::from(self.d)) as u64);
        Ok(out)
    }

    pub(crate) fn phase_in_place(&mut self, e: &VertexSet, m: u64) {
        let d = self.d;
        if m.is_multiple_of(u64::from(d)) {
            return;
        }
        let roots = roots_table(d);
        let mut digits = Digits::new(self.n, d);
        for a in &mut self.amps {
            let p = digit_product(digits.get(), e, d) * m % u64::from(d);
            if p != 0 {
                *a *= roots[p as usize];
            }
            digits.advance();
        }
    }

    /// Generalized Pauli `X` on vertex `k`: `X|i⟩ = |i-1 mod d⟩`, so the new
    /// amplitude at digit `i` is the old amplitude at digit `i+1`.
    pub fn apply_x(&self, k: usize) -> Result<Self> {
        self.check_vertex(k)?;
        let mut out = self.clone();
        out.shift_in_place(k, 1);
        Ok(out)
    }

    /// `X_k^power` in place.
    pub(crate) fn shift_in_place(&mut self, k: usize, power: u32) {
        let d = self.d as usize;
        let shift = power as usize % d;
        if shift == 0 {
            return;
        }
        let stride = self.stride(k);
        let block = stride * d;
        let src = self.amps.clone();
        for base in (0..self.amps.len()).step_by(block) {
            for i in 0..d {
                let from = base + ((i + shift) % d) * stride;
                let to = base + i * stride;
                self.amps[to..to + stride].copy_from_slice(&src[from..from + stride]);
            }
        }
    }

    /// Generalized Pauli `Z` on vertex `k`: multiplies by `ω_d^{i_k}`.
    pub fn apply_z(&self, k: usize) -> Result<Self> {
        self.check_vertex(k)?;
        let mut out = self.clone();
        out.phase_in_place(&VertexSet::from([k]), 1);
        Ok(out)
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &QuditState) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// True iff `|⟨self|other⟩| ≥ 1 - tol`.
    pub fn equal_up_to_global_phase(&self, other: &QuditState, tol: f64) -> Result<bool> {
        Ok(self.inner_product(other)?.norm() >= 1.0 - tol)
    }

    /// Largest per-amplitude deviation.
    pub fn max_abs_diff(&self, other: &QuditState) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &QuditState) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    fn check_same_shape(&self, other: &QuditState) -> Result<()> {
        if self.n != other.n || self.d != other.d {
            Err(Error::DimensionMismatch(format!(
                "(n={}, d={}) vs (n={}, d={})",
                self.n, self.d, other.n, other.d
            )))
        } else {
            Ok(())
        }
    }

    /// Contracts vertex `k` with `⟨bra|` (given by its ket components) and
    /// returns the unnormalized amplitudes of the remaining `n-1` qudits.
    pub fn contract_vertex(&self, k: usize, bra: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_vertex(k)?;
        if bra.len() != self.d as usize {
            return Err(Error::DimensionMismatch(format!(
                "single-qudit vector must have {} components",
                self.d
            )));
        }
        if self.n == 1 {
            return Err(Error::domain("cannot remove the only qudit"));
        }
        let d = self.d as usize;
        let stride = self.stride(k);
        let block = stride * d;
        let mut out = Vec::with_capacity(self.amps.len() / d);
        for base in (0..self.amps.len()).step_by(block) {
            for low in 0..stride {
                let s: Complex64 = (0..d)
                    .map(|i| bra[i].conj() * self.amps[base + i * stride + low])
                    .sum();
                out.push(s);
            }
        }
        Ok(out)
    }

    /// Projects vertex `k` onto the normalized single-qudit vector `onto` and
    /// returns the renormalized residual state with the outcome probability.
    pub fn project_vertex(&self, k: usize, onto: &[Complex64]) -> Result<(QuditState, f64)> {
        let rest = self.contract_vertex(k, onto)?;
        let p = norm(&rest).powi(2);
        if p < 1e-24 {
            return Err(Error::ZeroProbability);
        }
        Ok((QuditState::normalized(self.n - 1, self.d, rest)?, p))
    }

    /// Computational-basis measurement of vertex `k` with a fixed outcome.
    pub fn measure_z(&self, k: usize, outcome: u32) -> Result<(QuditState, f64)> {
        if outcome >= self.d {
            return Err(Error::domain(format!(
                "outcome {outcome} outside 0..{}",
                self.d
            )));
        }
        let mut ket = vec![Complex64::new(0.0, 0.0); self.d as usize];
        ket[outcome as usize] = Complex64::new(1.0, 0.0);
        self.project_vertex(k, &ket)
    }

    /// `self ⊗ other`, with `self` on the leading vertices.
    pub fn tensor(&self, other: &QuditState) -> Result<QuditState> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(
                "tensor factors differ in d".into(),
            ));
        }
        checked_dimension(self.n + other.n, self.d)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ok(QuditState {
            n: self.n + other.n,
            d: self.d,
            amps,
        })
    }

    /// JSON dump: `{"n":…,"d":…,"amplitudes":[[re,im],…]}` at 12 significant digits.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Dump {
            n: usize,
            d: u32,
            amplitudes: Vec<[f64; 2]>,
        }
        let dump = Dump {
            n: self.n,
            d: self.d,
            amplitudes: self
                .amps
                .iter()
                .map(|a| [round_sig(a.re), round_sig(a.im)])
                .collect(),
        };
        serde_json::to_string(&dump).expect("state dump serializes")
    }
}

fn check_shape(n: usize, d: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("a state needs at least one qudit"));
    }
    if d < 2 {
        return Err(Error::domain(format!(
            "qudit level must be at least 2, got {d}"
        )));
    }
    Ok(())
}

fn norm(amps: &[Complex64]) -> f64 {
    amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

pub(crate) fn index_of(digits: &[u32], d: u32) -> usize {
    digits
        .iter()
        .fold(0usize, |acc, &i| acc * d as usize + i as usize)
}

/// Exact phase exponents `f(i) = Σ_e m_e Π_{v∈e} i_v mod d` of `|H_d⟩`, in index order.
///
/// Vertices are eliminated one at a time from a table indexed by (digits of
/// the vertices done so far, subset of the vertices left), so the cost is
/// `O(n d^n)` regardless of the number of edges.
pub fn phase_exponents(h: &MultiHypergraph) -> Result<Vec<u32>> {
    let dim = checked_dimension(h.n(), h.d())?;
    let (n, d) = (h.n(), h.d());
    let mut table = vec![0u32; 1usize << n];
    for (e, m) in h.edges() {
        table[e.mask() as usize] = m;
    }
    let mut prefixes = 1usize;
    for k in 0..n {
        let left = 1usize << (n - k - 1);
        let mut next = vec![0u32; prefixes * d as usize * left];
        for p in 0..prefixes {
            let row = &table[p * 2 * left..(p + 1) * 2 * left];
            for i in 0..d {
                let out = &mut next[(p * d as usize + i as usize) * left..][..left];
                for (r, slot) in out.iter_mut().enumerate() {
                    *slot = (row[r << 1] + i * row[r << 1 | 1]) % d;
                }
            }
        }
        table = next;
        prefixes *= d as usize;
    }
    debug_assert_eq!(table.len(), dim);
    Ok(table)
}

/// The hypergraph state `Π_e C_e^{m_e} |+⟩_d^{⊗n}`.
pub fn build_state(h: &MultiHypergraph) -> Result<QuditState> {
    let exps = phase_exponents(h)?;
    let roots = roots_table(h.d());
    let scale = 1.0 / (exps.len() as f64).sqrt();
    let amps = exps.iter().map(|&f| roots[f as usize] * scale).collect();
    Ok(QuditState {
        n: h.n(),
        d: h.d(),
        amps,
    })
}
