//! Class membership: GREWS, graph and stabilizer states, plus exhaustive
//! enumeration of hypergraph states.

use std::collections::HashSet;
use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hypergraph::{MultiHypergraph, VertexSet};
use crate::stabilizer::{generator, STABILIZER_TOLERANCE};
use crate::statevector::{
    build_state, checked_dimension, phase_exponents, root_of_unity, QuditState,
};

/// Largest dense dimension accepted by [`verify_generator_pauli`].
pub const PAULI_CHECK_LIMIT: usize = 1024;
/// Largest number of hypergraphs [`enumerate_states`] will build.
pub const ENUMERATION_LIMIT: u128 = 100_000;
/// Largest `d^n` for which [`count_grews`] expands `d^{d^n}`.
pub const GREWS_COUNT_LIMIT: u128 = 1 << 20;
/// Largest `d` for the one-qudit GREWS census (`d^d` phase functions).
pub const CENSUS_LIMIT: u32 = 7;

/// Exponent `f` with `z ≈ ω_d^f` for a unit-modulus `z`, if within `tol`.
fn root_exponent(z: Complex64, d: u32, tol: f64) -> Option<u32> {
    let f = (z.arg() * f64::from(d) / TAU)
        .round()
        .rem_euclid(f64::from(d)) as u32;
    ((z - root_of_unity(d, u64::from(f))).norm() <= tol).then_some(f)
}

/// Every amplitude has modulus `d^{-n/2}` and a phase that is a `d`-th root of unity.
pub fn is_grews(s: &QuditState, tol: f64) -> bool {
    let modulus = (s.dim() as f64).sqrt().recip();
    s.amplitudes().iter().all(|&a| {
        let r = a.norm();
        (r - modulus).abs() <= tol && r > 0.0 && root_exponent(a / r, s.d(), tol).is_some()
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassReport {
    pub is_hypergraph_state: bool,
    pub is_grews: bool,
    /// Every stored edge has exactly two vertices.
    pub is_graph: bool,
    /// No stored edge has more than two vertices.
    pub is_stabilizer: bool,
    /// `None` when there are no edges.
    pub max_cardinality: Option<usize>,
}

/// Classifies `h` from its edge cardinalities. GREWS membership is checked on
/// the built state when it fits in memory.
pub fn classify(h: &MultiHypergraph) -> ClassReport {
    let max_cardinality = h.max_cardinality();
    let is_grews = match checked_dimension(h.n(), h.d()) {
        Ok(_) => build_state(h).is_ok_and(|s| is_grews(&s, STABILIZER_TOLERANCE)),
        Err(_) => true,
    };
    ClassReport {
        is_hypergraph_state: true,
        is_grews,
        is_graph: h.edges().all(|(e, _)| e.len() == 2),
        is_stabilizer: max_cardinality.is_none_or(|c| c <= 2),
        max_cardinality,
    }
}

/// Dense matrix of `g_k`, column `j` being `g_k |j⟩`.
fn generator_matrix(h: &MultiHypergraph, k: usize) -> Result<DMatrix<Complex64>> {
    let dim = checked_dimension(h.n(), h.d())?;
    if dim > PAULI_CHECK_LIMIT {
        return Err(Error::Capacity {
            what: "dense generator matrix".into(),
            requested: dim as u128,
            limit: PAULI_CHECK_LIMIT as u128,
        });
    }
    let g = generator(h, k)?;
    let mut m = DMatrix::zeros(dim, dim);
    let mut digits = vec![0u32; h.n()];
    for col in 0..dim {
        let mut rem = col;
        for slot in digits.iter_mut().rev() {
            *slot = (rem % h.d() as usize) as u32;
            rem /= h.d() as usize;
        }
        let basis = QuditState::basis(h.n(), h.d(), &digits)?;
        let image = g.apply(&basis)?;
        m.set_column(
            col,
            &nalgebra::DVector::from_column_slice(image.amplitudes()),
        );
    }
    Ok(m)
}

/// `ω^a ⊗_j X_j^{b_j} Z_j^{c_j}` with `X|i⟩ = |i−1⟩`, `Z|i⟩ = ω^i |i⟩`.
fn pauli_matrix(n: usize, d: u32, a: u32, b: &[u32], c: &[u32]) -> DMatrix<Complex64> {
    let dim = (d as usize).pow(n as u32);
    let mut m = DMatrix::zeros(dim, dim);
    let mut digits = vec![0u32; n];
    for col in 0..dim {
        let mut rem = col;
        for slot in digits.iter_mut().rev() {
            *slot = (rem % d as usize) as u32;
            rem /= d as usize;
        }
        let mut phase = u64::from(a);
        let mut row = 0usize;
        for j in 0..n {
            phase += u64::from(c[j]) * u64::from(digits[j]);
            row = row * d as usize + ((digits[j] + d - b[j]) % d) as usize;
        }
        m[(row, col)] = root_of_unity(d, phase % u64::from(d));
    }
    m
}

/// Decides whether the dense `g_k` is a generalized Pauli operator. The shift
/// `b` is read off from `g_k|0…0⟩`, then `a` and each `c_j` from the phases of
/// `g_k|0…0⟩` and `g_k|e_j⟩`; the candidate is finally compared entrywise.
pub fn verify_generator_pauli(h: &MultiHypergraph, k: usize) -> Result<bool> {
    let g = generator_matrix(h, k)?;
    let (n, d) = (h.n(), h.d());
    let du = d as usize;
    let tol = STABILIZER_TOLERANCE;

    let single_entry = |col: usize| -> Option<(usize, u32)> {
        let column = g.column(col);
        let mut hits = column.iter().enumerate().filter(|(_, z)| z.norm() > tol);
        let (row, &z) = hits.next()?;
        if hits.next().is_some() || (z.norm() - 1.0).abs() > tol {
            return None;
        }
        root_exponent(z, d, tol).map(|f| (row, f))
    };

    let Some((row0, a)) = single_entry(0) else {
        return Ok(false);
    };
    let mut b = vec![0u32; n];
    let mut rem = row0;
    for j in (0..n).rev() {
        b[j] = (d - (rem % du) as u32) % d;
        rem /= du;
    }
    let mut c = vec![0u32; n];
    for (j, cj) in c.iter_mut().enumerate() {
        let col = du.pow((n - 1 - j) as u32);
        let Some((_, f)) = single_entry(col) else {
            return Ok(false);
        };
        *cj = (f + d - a) % d;
    }
    let candidate = pauli_matrix(n, d, a, &b, &c);
    Ok((&g - candidate).iter().all(|z| z.norm() <= tol))
}

fn count_hypergraphs(n: usize, d: u32) -> Option<u128> {
    let slots = 1u32.checked_shl(n as u32)?;
    u128::from(d).checked_pow(slots)
}

/// Builds all `d^{2^n}` multi-hypergraphs on `n` vertices and counts distinct
/// states, compared exactly through integer phase-exponent vectors. Returns
/// `(distinct, total)`.
pub fn enumerate_states(n: usize, d: u32) -> Result<(u64, u64)> {
    if n == 0 || d < 2 {
        return Err(Error::domain(format!(
            "need n >= 1 and d >= 2, got n={n}, d={d}"
        )));
    }
    let total = count_hypergraphs(n, d).unwrap_or(u128::MAX);
    if total > ENUMERATION_LIMIT {
        return Err(Error::Capacity {
            what: "hypergraph enumeration".into(),
            requested: total,
            limit: ENUMERATION_LIMIT,
        });
    }
    let subsets = 1usize << n;
    let mut seen: HashSet<Vec<u32>> = HashSet::with_capacity(total as usize);
    let mut mult = vec![0u32; subsets];
    for _ in 0..total {
        let h = MultiHypergraph::from_edges(
            n,
            d,
            mult.iter()
                .enumerate()
                .map(|(mask, &m)| (VertexSet::from_mask(mask as u64), i64::from(m))),
        )?;
        seen.insert(phase_exponents(&h)?);
        for m in mult.iter_mut() {
            *m += 1;
            if *m < d {
                break;
            }
            *m = 0;
        }
    }
    Ok((seen.len() as u64, total as u64))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrewsCount {
    /// `d^{d^n}` GREWS phase patterns.
    pub grews: BigUint,
    /// `d^{2^n}` hypergraph states.
    pub hypergraph_states: BigUint,
}

impl GrewsCount {
    pub fn equal(&self) -> bool {
        self.grews == self.hypergraph_states
    }
}

/// Exact `d^{d^n}` and `d^{2^n}`. Refuses `d^n` above [`GREWS_COUNT_LIMIT`]
/// since the first number then has millions of digits.
pub fn count_grews(n: usize, d: u32) -> Result<GrewsCount> {
    if d < 2 {
        return Err(Error::domain(format!("need d >= 2, got {d}")));
    }
    let d_pow_n = u128::from(d)
        .checked_pow(n as u32)
        .filter(|&x| x <= GREWS_COUNT_LIMIT)
        .ok_or_else(|| Error::Capacity {
            what: "GREWS count exponent d^n".into(),
            requested: u128::from(d).saturating_pow(n as u32),
            limit: GREWS_COUNT_LIMIT,
        })?;
    let base = BigUint::from(d);
    Ok(GrewsCount {
        grews: base.pow(d_pow_n as u32),
        hypergraph_states: base.pow(1u32 << n),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrewsCensus {
    pub d: u32,
    /// `d^d` phase functions `f: Z_d → Z_d`.
    pub phase_functions: u64,
    /// Distinct one-vertex hypergraph states.
    pub hypergraph_states: u64,
    /// First phase function (in lexicographic order) not realized by a hypergraph.
    pub witness: Option<Vec<u32>>,
}

/// Exhaustive one-qudit comparison of GREWS phase functions against the `d²`
/// hypergraphs with edges `∅` and `{1}`.
pub fn grews_census(d: u32) -> Result<GrewsCensus> {
    if !(2..=CENSUS_LIMIT).contains(&d) {
        return Err(Error::domain(format!(
            "census supports 2 <= d <= {CENSUS_LIMIT}, got {d}"
        )));
    }
    let mut realized = HashSet::new();
    for m0 in 0..d {
        for m1 in 0..d {
            let h = MultiHypergraph::from_edges(
                1,
                d,
                [
                    (VertexSet::empty(), i64::from(m0)),
                    (VertexSet::new([1]), i64::from(m1)),
                ],
            )?;
            realized.insert(phase_exponents(&h)?);
        }
    }
    let total = u64::from(d).pow(d);
    let mut f = vec![0u32; d as usize];
    let mut witness = None;
    for _ in 0..total {
        if witness.is_none() && !realized.contains(&f) {
            witness = Some(f.clone());
        }
        for x in f.iter_mut().rev() {
            *x += 1;
            if *x < d {
                break;
            }
            *x = 0;
        }
    }
    Ok(GrewsCensus {
        d,
        phase_functions: total,
        hypergraph_states: realized.len() as u64,
        witness,
    })
}

/// The one-qudit GREWS `Σ_i ω^{f(i)} |i⟩ / √d`.
pub fn grews_state(d: u32, f: &[u32]) -> Result<QuditState> {
    if f.len() != d as usize {
        return Err(Error::DimensionMismatch(format!(
            "phase function needs {d} values, got {}",
            f.len()
        )));
    }
    let scale = f64::from(d).sqrt().recip();
    let amps = f
        .iter()
        .map(|&x| root_of_unity(d, u64::from(x % d)) * scale)
        .collect();
    QuditState::from_amplitudes(1, d, amps)
}
