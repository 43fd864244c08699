//! Bipartite Schmidt analysis and the connectivity/entanglement checks built on it.

use faer::Mat;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hypergraph::{Bipartition, MultiHypergraph, VertexSet};
use crate::statevector::{build_state, checked_size, index_of, Digits, QuditState};

/// Second singular values above this count as entanglement.
pub const ENTANGLEMENT_THRESHOLD: f64 = 1e-6;

/// Exhaustive bipartition sweeps are limited to this many qudits.
pub const MAX_SWEEP_QUDITS: usize = 12;

/// `|ψ⟩ = Σ_μ c_μ |μ⟩_control |μ⟩_target`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtDecomposition {
    /// Non-increasing, non-negative.
    pub coefficients: Vec<f64>,
    /// Number of coefficients above [`ENTANGLEMENT_THRESHOLD`].
    pub rank: usize,
    /// Orthonormal vectors on the control factor, one per coefficient.
    pub basis_left: Vec<Vec<Complex64>>,
    /// Orthonormal vectors on the target factor, one per coefficient.
    pub basis_right: Vec<Vec<Complex64>>,
}

impl SchmidtDecomposition {
    /// Second coefficient, or zero when there is only one.
    pub fn second(&self) -> f64 {
        self.coefficients.get(1).copied().unwrap_or(0.0)
    }
}

/// Amplitude matrix with rows indexed by control digits and columns by target digits.
fn reshape(s: &QuditState, p: &Bipartition) -> Result<DMatrix<Complex64>> {
    p.check_for(s.n())?;
    let d = s.d();
    let rows = checked_size(p.control().len(), d, "control factor")?;
    let cols = checked_size(p.target().len(), d, "target factor")?;
    let mut m = DMatrix::<Complex64>::zeros(rows, cols);
    let mut digits = Digits::new(s.n(), d);
    let mut left = vec![0u32; p.control().len()];
    let mut right = vec![0u32; p.target().len()];
    for a in s.amplitudes() {
        let ds = digits.get();
        for (slot, &v) in left.iter_mut().zip(p.control()) {
            *slot = ds[v - 1];
        }
        for (slot, &v) in right.iter_mut().zip(p.target()) {
            *slot = ds[v - 1];
        }
        m[(index_of(&left, d), index_of(&right, d))] = *a;
        digits.advance();
    }
    Ok(m)
}

fn to_faer(m: &DMatrix<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values of an arbitrary complex matrix, sorted descending.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = to_faer(m)
        .singular_values()
        .expect("SVD converges")
        .into_iter()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Full Schmidt decomposition of a complex `rows × cols` amplitude matrix.
///
/// nalgebra's SVD with singular vectors mis-scales rank-deficient inputs
/// (e.g. a constant 9×9 matrix), so the decomposition goes through faer.
pub fn schmidt_matrix(m: &DMatrix<Complex64>) -> SchmidtDecomposition {
    let svd = to_faer(m).thin_svd().expect("SVD converges");
    let (u, v) = (svd.U(), svd.V());
    let s = svd.S().column_vector();
    let k = s.nrows();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].re.total_cmp(&s[a].re));
    let coefficients: Vec<f64> = order.iter().map(|&i| s[i].re.max(0.0)).collect();
    let basis_left = order
        .iter()
        .map(|&i| (0..u.nrows()).map(|r| u[(r, i)]).collect())
        .collect();
    let basis_right = order
        .iter()
        .map(|&i| (0..v.nrows()).map(|c| v[(c, i)].conj()).collect())
        .collect();
    let rank = coefficients
        .iter()
        .filter(|&&c| c > ENTANGLEMENT_THRESHOLD)
        .count();
    SchmidtDecomposition {
        coefficients,
        rank,
        basis_left,
        basis_right,
    }
}

pub fn schmidt(s: &QuditState, p: &Bipartition) -> Result<SchmidtDecomposition> {
    Ok(schmidt_matrix(&reshape(s, p)?))
}

/// Schmidt coefficients only (no basis vectors).
pub fn schmidt_coefficients(s: &QuditState, p: &Bipartition) -> Result<Vec<f64>> {
    Ok(singular_values(&reshape(s, p)?))
}

/// Rank-one test across `p`: the second Schmidt coefficient is below `tol`.
pub fn is_product_across(s: &QuditState, p: &Bipartition, tol: f64) -> Result<bool> {
    let sv = schmidt_coefficients(s, p)?;
    Ok(sv.get(1).copied().unwrap_or(0.0) < tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BipartitionVerdict {
    pub partition: Bipartition,
    /// Some stored edge has vertices on both sides.
    pub crossing: bool,
    pub second_singular_value: f64,
    pub entangled: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectivityReport {
    pub verdicts: Vec<BipartitionVerdict>,
    /// Crossing bipartitions found to be product (must be empty).
    pub violations: Vec<Bipartition>,
    /// Non-crossing bipartitions found to be entangled (must be empty).
    pub converse_violations: Vec<Bipartition>,
}

impl ConnectivityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.converse_violations.is_empty()
    }
}

fn check_sweep_size(n: usize) -> Result<()> {
    if n > MAX_SWEEP_QUDITS {
        Err(Error::Capacity {
            what: "bipartition sweep (qudits)".into(),
            requested: n as u128,
            limit: MAX_SWEEP_QUDITS as u128,
        })
    } else {
        Ok(())
    }
}

/// Checks every bipartition of `|H⟩`: crossing edges must entangle the two
/// sides, and bipartitions without crossing edges must be product.
pub fn verify_theorem2(h: &MultiHypergraph) -> Result<ConnectivityReport> {
    check_sweep_size(h.n())?;
    let state = build_state(h)?;
    let mut report = ConnectivityReport {
        verdicts: Vec::new(),
        violations: Vec::new(),
        converse_violations: Vec::new(),
    };
    for p in Bipartition::all(h.n()) {
        let crossing = !h.crossing_edges(&p)?.is_empty();
        let sv = schmidt_coefficients(&state, &p)?;
        let second = sv.get(1).copied().unwrap_or(0.0);
        let entangled = second > ENTANGLEMENT_THRESHOLD;
        if crossing && !entangled {
            report.violations.push(p.clone());
        }
        if !crossing && entangled {
            report.converse_violations.push(p.clone());
        }
        report.verdicts.push(BipartitionVerdict {
            partition: p,
            crossing,
            second_singular_value: second,
            entangled,
        });
    }
    Ok(report)
}

/// True iff no bipartition leaves the state product.
pub fn is_genuinely_entangled(s: &QuditState) -> Result<bool> {
    if s.n() < 2 {
        return Err(Error::domain(
            "genuine entanglement needs at least two qudits",
        ));
    }
    check_sweep_size(s.n())?;
    for p in Bipartition::all(s.n()) {
        if is_product_across(s, &p, ENTANGLEMENT_THRESHOLD)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Tensor product of the states of the connected blocks of `h`, laid out in
/// the original vertex order. The global phase `m_∅` goes to the block that
/// contains vertex 1.
pub fn block_product_state(h: &MultiHypergraph) -> Result<QuditState> {
    let blocks = h.connected_components();
    let mut block_states = Vec::with_capacity(blocks.len());
    for (i, block) in blocks.iter().enumerate() {
        let mut sub = h.induced(block)?;
        if i == 0 {
            sub.add_edge_in_place(
                VertexSet::empty(),
                i64::from(h.multiplicity(VertexSet::empty())?),
            )?;
        }
        block_states.push(build_state(&sub)?);
    }
    let dim = crate::statevector::checked_dimension(h.n(), h.d())?;
    let mut digits = Digits::new(h.n(), h.d());
    let mut amps = Vec::with_capacity(dim);
    let mut sub_digits: Vec<Vec<u32>> = blocks.iter().map(|b| vec![0; b.len()]).collect();
    for _ in 0..dim {
        let ds = digits.get();
        let mut a = Complex64::new(1.0, 0.0);
        for ((block, state), sub) in blocks.iter().zip(&block_states).zip(sub_digits.iter_mut()) {
            for (slot, &v) in sub.iter_mut().zip(block) {
                *slot = ds[v - 1];
            }
            a *= state.amplitude(sub);
        }
        amps.push(a);
        digits.advance();
    }
    QuditState::from_amplitudes(h.n(), h.d(), amps)
}

/// `1 − |⟨H|⊗_b H_b⟩|`; zero when the state factorizes over its blocks.
pub fn block_factorization_residual(h: &MultiHypergraph) -> Result<f64> {
    let full = build_state(h)?;
    let product = block_product_state(h)?;
    Ok(1.0 - full.inner_product(&product)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::fixtures::{doubled_path, qubit_sample, qutrit_sample};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hg(n: usize, d: u32, edges: &[(&[usize], i64)]) -> MultiHypergraph {
        MultiHypergraph::from_edges(n, d, edges.iter().map(|(e, m)| (e.to_vec(), *m))).unwrap()
    }

    /// Independent rank oracle: Gram matrix `M M†` and its eigenvalues.
    fn gram_rank(s: &QuditState, p: &Bipartition) -> usize {
        let m = reshape(s, p).unwrap();
        let gram = &m * m.adjoint();
        let eig = gram.symmetric_eigenvalues();
        eig.iter().filter(|&&l| l > 1e-10).count()
    }

    #[test]
    fn plus_state_is_product_everywhere() {
        let s = QuditState::plus_state(4, 3).unwrap();
        for p in Bipartition::all(4) {
            let sd = schmidt(&s, &p).unwrap();
            assert_eq!(sd.rank, 1);
            assert!((sd.coefficients[0] - 1.0).abs() < 1e-10);
            assert!(is_product_across(&s, &p, ENTANGLEMENT_THRESHOLD).unwrap());
        }
    }

    #[test]
    fn qubit_edge_schmidt_coefficients() {
        // SVD of [[1,1],[1,-1]]/2 has singular values 1/√2, 1/√2.
        let s = build_state(&hg(2, 2, &[(&[1, 2], 1)])).unwrap();
        let p = Bipartition::new(2, &[1]).unwrap();
        let sd = schmidt(&s, &p).unwrap();
        assert_eq!(sd.rank, 2);
        assert!((sd.coefficients[0] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((sd.coefficients[1] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(!is_product_across(&s, &p, ENTANGLEMENT_THRESHOLD).unwrap());
    }

    #[test]
    fn unequal_schmidt_pair() {
        // [[1,1],[1,0]]/√3.
        let t = 1.0 / 3f64.sqrt();
        let amps = vec![
            Complex64::new(t, 0.0),
            Complex64::new(t, 0.0),
            Complex64::new(t, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let s = QuditState::from_amplitudes(2, 2, amps).unwrap();
        let sd = schmidt(&s, &Bipartition::new(2, &[1]).unwrap()).unwrap();
        // Eigenvalues of [[2,1],[1,1]]/3 are (3 ± √5)/6.
        let big = ((3.0 + 5f64.sqrt()) / 6.0).sqrt();
        let small = ((3.0 - 5f64.sqrt()) / 6.0).sqrt();
        assert!((sd.coefficients[0] - big).abs() < 1e-12);
        assert!((sd.coefficients[1] - small).abs() < 1e-12);
    }

    #[test]
    fn schmidt_reconstructs_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let n = rng.random_range(2..=4);
            let d = rng.random_range(2..=4);
            let h = MultiHypergraph::random(n, d, &mut rng).unwrap();
            let s = build_state(&h).unwrap();
            let parts = Bipartition::all(n);
            let p = &parts[rng.random_range(0..parts.len())];
            let sd = schmidt(&s, p).unwrap();
            let m = reshape(&s, p).unwrap();
            let mut err = 0.0;
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    let rebuilt: Complex64 = (0..sd.coefficients.len())
                        .map(|mu| {
                            sd.basis_left[mu][r] * sd.coefficients[mu] * sd.basis_right[mu][c]
                        })
                        .sum();
                    err += (rebuilt - m[(r, c)]).norm_sqr();
                }
            }
            assert!(err.sqrt() < 1e-8);
            let total: f64 = sd.coefficients.iter().map(|c| c * c).sum();
            assert!((total - 1.0).abs() < 1e-9);
            assert!(sd.coefficients.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn uniform_edge_has_full_rank_for_prime_levels() {
        for d in [2u32, 3, 5] {
            let n = 4;
            let h = MultiHypergraph::from_edges(n, d, [((1..=n).collect::<Vec<_>>(), 1)]).unwrap();
            let s = build_state(&h).unwrap();
            let p = Bipartition::new(n, &[1]).unwrap();
            // Rows are the characters i ↦ ω^{i x} weighted by how often x = i2 i3 i4 occurs.
            assert_eq!(schmidt(&s, &p).unwrap().rank, d as usize);
            assert_eq!(gram_rank(&s, &p), d as usize);
        }
    }

    #[test]
    fn rank_agrees_with_gram_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..40 {
            let n = rng.random_range(2..=4);
            let d = rng.random_range(2..=5);
            let s = build_state(&MultiHypergraph::random(n, d, &mut rng).unwrap()).unwrap();
            for p in Bipartition::all(n) {
                assert_eq!(schmidt(&s, &p).unwrap().rank, gram_rank(&s, &p), "{p}");
            }
        }
    }

    #[test]
    fn local_phase_is_product() {
        let s = build_state(&hg(2, 2, &[(&[1], 1)])).unwrap();
        assert!(is_product_across(
            &s,
            &Bipartition::new(2, &[1]).unwrap(),
            ENTANGLEMENT_THRESHOLD
        )
        .unwrap());
    }

    #[test]
    fn connected_fixtures_entangle_every_cut() {
        for h in [
            qubit_sample(),
            qutrit_sample(),
            doubled_path(3),
            doubled_path(2),
        ] {
            let r = verify_theorem2(&h).unwrap();
            assert!(r.passed(), "{h}");
        }
        let r = verify_theorem2(&doubled_path(3)).unwrap();
        assert_eq!(r.verdicts.len(), 3);
        assert!(r.verdicts.iter().all(|v| v.crossing && v.entangled));
    }

    #[test]
    fn qubit_sample_crossing_cuts_are_entangled() {
        let r = verify_theorem2(&qubit_sample()).unwrap();
        assert!(r
            .verdicts
            .iter()
            .filter(|v| v.crossing)
            .all(|v| v.entangled));
    }

    #[test]
    fn isolated_vertex_separates() {
        let h = hg(3, 3, &[(&[1, 2], 1)]);
        let r = verify_theorem2(&h).unwrap();
        assert!(r.passed());
        for v in &r.verdicts {
            let name = v.partition.to_string();
            match name.as_str() {
                "1,2|3" => assert!(!v.entangled),
                _ => assert!(v.entangled, "{name}"),
            }
        }
    }

    #[test]
    fn genuine_entanglement() {
        assert!(is_genuinely_entangled(&build_state(&qutrit_sample()).unwrap()).unwrap());
        assert!(!is_genuinely_entangled(&QuditState::plus_state(3, 2).unwrap()).unwrap());
        let blocks = hg(4, 2, &[(&[1, 2], 1), (&[3, 4], 1)]);
        assert!(!is_genuinely_entangled(&build_state(&blocks).unwrap()).unwrap());
        assert!(is_genuinely_entangled(&QuditState::plus_state(1, 2).unwrap()).is_err());
    }

    #[test]
    fn sweep_guard() {
        let h = MultiHypergraph::new(13, 2).unwrap();
        assert!(matches!(verify_theorem2(&h), Err(Error::Capacity { .. })));
    }

    #[test]
    fn swapping_sides_keeps_coefficients() {
        let s = build_state(&qutrit_sample()).unwrap();
        for p in Bipartition::all(3) {
            let a = schmidt_coefficients(&s, &p).unwrap();
            let b = schmidt_coefficients(&s, &p.swapped()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn product_inputs_have_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let d = rng.random_range(2..=4);
            let mk = |n: usize, rng: &mut ChaCha8Rng| {
                let dim = (d as usize).pow(n as u32);
                let amps = (0..dim)
                    .map(|_| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    })
                    .collect();
                QuditState::normalized(n, d, amps).unwrap()
            };
            let a = mk(1, &mut rng);
            let b = mk(2, &mut rng);
            let s = a.tensor(&b).unwrap();
            let sd = schmidt(&s, &Bipartition::new(3, &[1]).unwrap()).unwrap();
            assert_eq!(sd.rank, 1);
            assert!((sd.coefficients[0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn disconnected_state_factorizes() {
        let h = hg(
            5,
            3,
            &[(&[], 2), (&[1, 4], 1), (&[2, 5], 2), (&[3], 1), (&[1], 2)],
        );
        assert!(block_factorization_residual(&h).unwrap() < 1e-12);
        // Same phase placement gives exact amplitude equality, not just up to phase.
        let a = build_state(&h).unwrap();
        let b = block_product_state(&h).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }
}
