//! Stabilizer generators `g_k = X_k Π_{e∋k} (C†_{e∖{k}})^{m_e}` of hypergraph states.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hypergraph::{MultiHypergraph, VertexSet};
use crate::statevector::{build_state, digit_product, root_of_unity, QuditState};

/// Residual below which a generator is considered to fix a state.
pub const STABILIZER_TOLERANCE: f64 = 1e-9;

/// Commutation is probed on every basis ket up to this dimension.
pub const EXHAUSTIVE_PROBE_LIMIT: usize = 4096;

/// Number of random probe states used above [`EXHAUSTIVE_PROBE_LIMIT`].
pub const RANDOM_PROBES: usize = 20;

const PROBE_SEED: u64 = 0x5eed_0f9e;

/// Structural form of `g_k`: the diagonal factors `C_s^a` (applied first)
/// followed by `X_k`. Each `a` is `(d - m_e) mod d`, i.e. the power of `C_s`
/// equal to `(C_s†)^{m_e}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub k: usize,
    pub d: u32,
    pub factors: Vec<(VertexSet, u32)>,
}

impl GeneratorSpec {
    /// Applies the factors and then `X_k` to `s`.
    pub fn apply(&self, s: &QuditState) -> Result<QuditState> {
        if s.d() != self.d || self.k > s.n() {
            return Err(Error::DimensionMismatch(format!(
                "generator for vertex {} at d={} cannot act on (n={}, d={})",
                self.k,
                self.d,
                s.n(),
                s.d()
            )));
        }
        let mut out = s.clone();
        for (e, a) in &self.factors {
            out.phase_in_place(e, u64::from(*a));
        }
        out.shift_in_place(self.k, 1);
        Ok(out)
    }

    /// Action on a basis ket: rewrites `digits` in place to the image ket and
    /// returns the phase exponent, so that `g_k|i⟩ = ω^p |i'⟩`.
    pub fn act_on_basis(&self, digits: &mut [u32]) -> u64 {
        let d = u64::from(self.d);
        let p = self.factors.iter().fold(0u64, |acc, (e, a)| {
            (acc + u64::from(*a) * digit_product(digits, e, self.d)) % d
        });
        let i = &mut digits[self.k - 1];
        *i = (*i + self.d - 1) % self.d;
        p
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X_{}", self.k)?;
        for (e, a) in &self.factors {
            // (C†)^m with m = d - a.
            write!(f, " · C†{}^{}", e, (self.d - a) % self.d)?;
        }
        Ok(())
    }
}

pub fn generator(h: &MultiHypergraph, k: usize) -> Result<GeneratorSpec> {
    h.check_vertex(k)?;
    let d = h.d();
    let factors = h
        .edges()
        .filter(|(e, _)| e.contains(k))
        .map(|(e, m)| (e.without(k), (d - m) % d))
        .collect();
    Ok(GeneratorSpec { k, d, factors })
}

pub fn apply_generator(h: &MultiHypergraph, k: usize, s: &QuditState) -> Result<QuditState> {
    if s.n() != h.n() || s.d() != h.d() {
        return Err(Error::DimensionMismatch(format!(
            "hypergraph is (n={}, d={}), state is (n={}, d={})",
            h.n(),
            h.d(),
            s.n(),
            s.d()
        )));
    }
    generator(h, k)?.apply(s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilizationReport {
    /// `‖g_k|H⟩ − |H⟩‖` for k = 1..=n.
    pub residuals: Vec<f64>,
    pub passed: bool,
}

impl StabilizationReport {
    pub fn worst(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Checks `g_k|H_d⟩ = |H_d⟩` exactly (not up to phase) for every vertex.
pub fn check_stabilized(h: &MultiHypergraph) -> Result<StabilizationReport> {
    let state = build_state(h)?;
    let residuals = (1..=h.n())
        .map(|k| apply_generator(h, k, &state)?.distance(&state))
        .collect::<Result<Vec<f64>>>()?;
    let passed = residuals.iter().all(|&r| r < STABILIZER_TOLERANCE);
    Ok(StabilizationReport { residuals, passed })
}

/// Largest `‖(g_k g_k2 − g_k2 g_k)|ψ⟩‖` over the probe states.
pub fn commutator_residual(h: &MultiHypergraph, k: usize, k2: usize) -> Result<f64> {
    if k == k2 {
        return Err(Error::domain(
            "commutation check needs two distinct vertices",
        ));
    }
    let (g1, g2) = (generator(h, k)?, generator(h, k2)?);
    let dim = crate::statevector::checked_dimension(h.n(), h.d())?;
    if dim <= EXHAUSTIVE_PROBE_LIMIT {
        // Generators are monomial, so basis kets probe them completely.
        let d = u64::from(h.d());
        let mut worst: f64 = 0.0;
        let mut ket = crate::statevector::Digits::new(h.n(), h.d());
        for _ in 0..dim {
            let mut a = ket.get().to_vec();
            let pa = (g2.act_on_basis(&mut a) + g1.act_on_basis(&mut a)) % d;
            let mut b = ket.get().to_vec();
            let pb = (g1.act_on_basis(&mut b) + g2.act_on_basis(&mut b)) % d;
            let r = if a == b {
                (root_of_unity(h.d(), pa) - root_of_unity(h.d(), pb)).norm()
            } else {
                std::f64::consts::SQRT_2
            };
            worst = worst.max(r);
            ket.advance();
        }
        Ok(worst)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        let mut worst: f64 = 0.0;
        for _ in 0..RANDOM_PROBES {
            let amps = (0..dim)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let psi = QuditState::normalized(h.n(), h.d(), amps)?;
            let ab = g1.apply(&g2.apply(&psi)?)?;
            let ba = g2.apply(&g1.apply(&psi)?)?;
            worst = worst.max(ab.distance(&ba)?);
        }
        Ok(worst)
    }
}

pub fn check_commutation(h: &MultiHypergraph, k: usize, k2: usize) -> Result<bool> {
    Ok(commutator_residual(h, k, k2)? < STABILIZER_TOLERANCE)
}
