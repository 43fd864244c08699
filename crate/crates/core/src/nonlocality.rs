//! CHSH nonlocality of the fully connected `N`-uniform states `C_V^m |+⟩_d^{⊗N}`.
//!
//! All vertices but two are post-selected onto `|+⟩_d`. The surviving pair is
//! analysed through its Schmidt decomposition, and the CHSH combination is
//! evaluated both from the closed form in the two leading Schmidt
//! coefficients and directly from expectation values of the measurement
//! settings. For prime `d` an analytic branch gives `Ω`, the Schmidt pair and
//! `C` without building any state.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::entanglement::schmidt_matrix;
use crate::error::{Error, Result};
use crate::hypergraph::{MultiHypergraph, VertexSet};
use crate::output::format_sig;
use crate::statevector::{build_state, checked_dimension, Digits, QuditState};

/// Agreement required between the analytic and dense branches.
pub const BRANCH_TOLERANCE: f64 = 1e-9;

pub fn is_prime(d: u32) -> bool {
    if d < 2 {
        return false;
    }
    let mut q = 2u32;
    while q.saturating_mul(q) <= d {
        if d.is_multiple_of(q) {
            return false;
        }
        q += 1;
    }
    true
}

fn check_params(n: usize, d: u32, m: u32) -> Result<()> {
    if n < 3 {
        return Err(Error::domain(format!("need N >= 3 vertices, got {n}")));
    }
    if d < 2 {
        return Err(Error::domain(format!("need d >= 2, got {d}")));
    }
    if m == 0 || m >= d {
        return Err(Error::domain(format!(
            "multiplicity must be in 1..{d}, got {m}"
        )));
    }
    Ok(())
}

/// `H_{N,d,m}`: the single edge `{1..N}` with multiplicity `m`.
pub fn uniform_hypergraph(n: usize, d: u32, m: u32) -> Result<MultiHypergraph> {
    check_params(n, d, m)?;
    MultiHypergraph::from_edges(n, d, [(VertexSet::new(1..=n), i64::from(m))])
}

/// Amplitudes `ω_d^{m i_1⋯i_N} / √(d^N)`.
pub fn uniform_state(n: usize, d: u32, m: u32) -> Result<QuditState> {
    build_state(&uniform_hypergraph(n, d, m)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PostSelection {
    /// Normalized state of the kept pair, first kept vertex leading.
    pub state: QuditState,
    /// Unnormalized `Ω_{i1 i2}`, scaled so that `Ω_{i1 i2} = Σ_rest ω^{f(i)}` for
    /// hypergraph states.
    pub omega: DMatrix<Complex64>,
    /// The factor `𝒩` in `|ψ⟩ = (𝒩 / d^{N-1}) Σ Ω_{i1 i2} |i1 i2⟩`.
    pub norm: f64,
    /// Probability of the post-selection outcome.
    pub probability: f64,
}

/// Projects every vertex except `keep` onto `|+⟩_d`.
pub fn postselect_plus(s: &QuditState, keep: (usize, usize)) -> Result<PostSelection> {
    let (a, b) = keep;
    let n = s.n();
    if a == b || a == 0 || b == 0 || a > n || b > n {
        return Err(Error::domain(format!(
            "keep must be two distinct vertices in 1..={n}"
        )));
    }
    let d = s.d() as usize;
    let mut omega = DMatrix::<Complex64>::zeros(d, d);
    let mut digits = Digits::new(n, s.d());
    for amp in s.amplitudes() {
        let ds = digits.get();
        omega[(ds[a - 1] as usize, ds[b - 1] as usize)] += amp;
        digits.advance();
    }
    let full = (d as f64).powi(n as i32).sqrt();
    omega *= Complex64::new(full, 0.0);

    let frob = omega.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    let probability = frob * frob / (d as f64).powi(2 * n as i32 - 2);
    if probability < 1e-24 {
        return Err(Error::ZeroProbability);
    }
    let amps: Vec<Complex64> = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| omega[(i, j)] / frob)
        .collect();
    Ok(PostSelection {
        state: QuditState::from_amplitudes(2, s.d(), amps)?,
        norm: (d as f64).powi(n as i32 - 1) / frob,
        omega,
        probability,
    })
}

fn check_prime(d: u32) -> Result<()> {
    if is_prime(d) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "the closed form needs prime d, got d = {d}; use the dense branch"
        )))
    }
}

/// Closed-form `Ω` for prime `d`: `d^{N-2}` on the first row and column,
/// `d^{N-2} − d (d−1)^{N−3}` elsewhere.
pub fn omega_prime(d: u32, n: usize) -> Result<DMatrix<f64>> {
    check_prime(d)?;
    if n < 3 {
        return Err(Error::domain(format!("need N >= 3 vertices, got {n}")));
    }
    let df = f64::from(d);
    let edge = df.powi(n as i32 - 2);
    let inner = edge - df * (df - 1.0).powi(n as i32 - 3);
    let du = d as usize;
    Ok(DMatrix::from_fn(du, du, |i, j| {
        if i == 0 || j == 0 {
            edge
        } else {
            inner
        }
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimeSchmidtPair {
    pub lambda: f64,
    pub x_plus: f64,
    pub x_minus: f64,
    /// `|x₊| / √(x₊² + x₋²)`.
    pub c0: f64,
    /// `|x₋| / √(x₊² + x₋²)`.
    pub c1: f64,
}

/// `λ = d − (d−1)^{N−2}/d^{N−3}` and `x± = (λ ± √(λ² + 4(d − λ)))/2`.
pub fn schmidt_pair_prime(d: u32, n: usize) -> Result<PrimeSchmidtPair> {
    check_prime(d)?;
    if n < 3 {
        return Err(Error::domain(format!("need N >= 3 vertices, got {n}")));
    }
    let df = f64::from(d);
    let lambda = df - (df - 1.0).powi(n as i32 - 2) / df.powi(n as i32 - 3);
    let root = (lambda * lambda + 4.0 * (df - lambda)).sqrt();
    let x_plus = (lambda + root) / 2.0;
    let x_minus = (lambda - root) / 2.0;
    let scale = x_plus.hypot(x_minus);
    Ok(PrimeSchmidtPair {
        lambda,
        x_plus,
        x_minus,
        c0: x_plus.abs() / scale,
        c1: x_minus.abs() / scale,
    })
}

/// `2 √(1 + 4 c₀² c₁² / (c₀² + c₁²)²)`.
pub fn chsh_value(c0: f64, c1: f64) -> Result<f64> {
    if c0 < 0.0 || c1 < 0.0 || !c0.is_finite() || !c1.is_finite() {
        return Err(Error::domain(
            "Schmidt coefficients must be finite and non-negative",
        ));
    }
    let s = c0 * c0 + c1 * c1;
    if s == 0.0 {
        return Err(Error::domain("Schmidt coefficients cannot both vanish"));
    }
    Ok(2.0 * (1.0 + 4.0 * c0 * c0 * c1 * c1 / (s * s)).sqrt())
}

/// Settings half-angle `t` with `tan 2t = 2 c₀ c₁ / (c₀² + c₁²)`.
pub fn optimal_angle(c0: f64, c1: f64) -> f64 {
    0.5 * (2.0 * c0 * c1).atan2(c0 * c0 + c1 * c1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationChsh {
    pub value: f64,
    /// Schmidt rank below two; `value` is then `2 |E(S₁S₂)|`.
    pub degenerate: bool,
}

fn outer(a: &[Complex64], b: &[Complex64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
}

/// `(σ_z, σ_x, P⊥)` on the span of `e0, e1`, with `P⊥` the projector onto its complement.
fn local_frame(e0: &[Complex64], e1: &[Complex64]) -> [DMatrix<Complex64>; 3] {
    let p0 = outer(e0, e0);
    let p1 = outer(e1, e1);
    let sigma_z = &p0 - &p1;
    let sigma_x = outer(e0, e1) + outer(e1, e0);
    let perp = DMatrix::<Complex64>::identity(e0.len(), e0.len()) - p0 - p1;
    [sigma_z, sigma_x, perp]
}

/// `⟨ψ| A ⊗ B |ψ⟩` with `ψ` given as its amplitude matrix.
fn expectation(psi: &DMatrix<Complex64>, a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (psi.adjoint() * a * psi * b.transpose()).trace().re
}

/// CHSH value of a two-qudit state with the settings `S₁ = σ_z`, `T₁ = σ_x`
/// on vertex 1 and `S₂/T₂ = σ_z cos 2t ± σ_x sin 2t` on vertex 2, all built on
/// the leading two Schmidt vectors and extended by the identity elsewhere.
pub fn chsh_from_correlations(s2: &QuditState, t: f64) -> Result<CorrelationChsh> {
    if s2.n() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "CHSH evaluation needs a two-qudit state, got {} qudits",
            s2.n()
        )));
    }
    let d = s2.d() as usize;
    let psi = DMatrix::from_fn(d, d, |i, j| s2.amplitudes()[i * d + j]);
    let sd = schmidt_matrix(&psi);
    let [z1, x1, perp1] = local_frame(&sd.basis_left[0], &sd.basis_left[1]);
    let [z2, x2, perp2] = local_frame(&sd.basis_right[0], &sd.basis_right[1]);
    let (c, s) = ((2.0 * t).cos(), (2.0 * t).sin());
    let scale = |m: &DMatrix<Complex64>, k: f64| m * Complex64::new(k, 0.0);

    let s1 = &z1 + &perp1;
    let t1 = &x1 + &perp1;
    let s2_op = scale(&z2, c) + scale(&x2, s) + &perp2;
    let t2_op = scale(&z2, c) - scale(&x2, s) + &perp2;

    let e_ss = expectation(&psi, &s1, &s2_op);
    if sd.rank < 2 {
        return Ok(CorrelationChsh {
            value: 2.0 * e_ss.abs(),
            degenerate: true,
        });
    }
    let value = (e_ss + expectation(&psi, &s1, &t2_op) + expectation(&psi, &t1, &s2_op)
        - expectation(&psi, &t1, &t2_op))
    .abs();
    Ok(CorrelationChsh {
        value,
        degenerate: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ChshMode {
    /// Analytic branch when `d` is prime, dense branch when within the guard.
    #[default]
    Both,
    AnalyticOnly,
    DenseOnly,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticChsh {
    pub pair: PrimeSchmidtPair,
    pub t: f64,
    pub chsh: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseChsh {
    pub postselection: PostSelection,
    pub rank: usize,
    /// Leading two Schmidt coefficients, renormalized to unit length.
    pub c0: f64,
    pub c1: f64,
    pub t: f64,
    pub chsh_closed_form: f64,
    pub chsh_correlations: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChshReport {
    pub d: u32,
    pub n: usize,
    pub m: u32,
    pub analytic: Option<AnalyticChsh>,
    pub dense: Option<DenseChsh>,
}

impl ChshReport {
    /// Correlation-evaluated `C` when available, analytic `C` otherwise.
    pub fn chsh(&self) -> f64 {
        self.dense
            .as_ref()
            .map(|x| x.chsh_correlations)
            .or(self.analytic.map(|a| a.chsh))
            .expect("a report carries at least one branch")
    }

    /// `|C_analytic − C_correlations|` when both branches ran.
    pub fn branch_residual(&self) -> Option<f64> {
        match (&self.analytic, &self.dense) {
            (Some(a), Some(x)) => Some((a.chsh - x.chsh_correlations).abs()),
            _ => None,
        }
    }
}

pub fn analytic_chsh(d: u32, n: usize) -> Result<AnalyticChsh> {
    let pair = schmidt_pair_prime(d, n)?;
    Ok(AnalyticChsh {
        t: optimal_angle(pair.c0, pair.c1),
        chsh: chsh_value(pair.c0, pair.c1)?,
        pair,
    })
}

pub fn dense_chsh(n: usize, d: u32, m: u32) -> Result<DenseChsh> {
    let state = uniform_state(n, d, m)?;
    let postselection = postselect_plus(&state, (1, 2))?;
    let du = d as usize;
    let psi = DMatrix::from_fn(du, du, |i, j| postselection.state.amplitudes()[i * du + j]);
    let sd = schmidt_matrix(&psi);
    let scale = sd.coefficients[0].hypot(sd.coefficients[1]);
    let (c0, c1) = (sd.coefficients[0] / scale, sd.coefficients[1] / scale);
    let t = optimal_angle(c0, c1);
    let corr = chsh_from_correlations(&postselection.state, t)?;
    Ok(DenseChsh {
        rank: sd.rank,
        c0,
        c1,
        t,
        chsh_closed_form: chsh_value(c0, c1)?,
        chsh_correlations: corr.value,
        degenerate: corr.degenerate,
        postselection,
    })
}

/// Runs the requested branches for `H_{N,d,m}`.
pub fn chsh_report(n: usize, d: u32, m: u32, mode: ChshMode) -> Result<ChshReport> {
    check_params(n, d, m)?;
    let analytic = match mode {
        ChshMode::DenseOnly => None,
        ChshMode::AnalyticOnly => Some(analytic_chsh(d, n)?),
        ChshMode::Both => is_prime(d).then(|| analytic_chsh(d, n)).transpose()?,
    };
    let dense = match mode {
        ChshMode::AnalyticOnly => None,
        ChshMode::DenseOnly => Some(dense_chsh(n, d, m)?),
        ChshMode::Both => match checked_dimension(n, d) {
            Ok(_) => Some(dense_chsh(n, d, m)?),
            Err(e) if analytic.is_none() => return Err(e),
            Err(_) => None,
        },
    };
    Ok(ChshReport {
        d,
        n,
        m,
        analytic,
        dense,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChshRow {
    pub d: u32,
    pub n: usize,
    pub m: u32,
    pub result: std::result::Result<ChshReport, Error>,
}

/// One row per `(d, N)`, ordered by `d` then `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChshTable {
    pub rows: Vec<ChshRow>,
}

pub fn chsh_table(d_list: &[u32], n_list: &[usize], m: u32, mode: ChshMode) -> ChshTable {
    let mut ds = d_list.to_vec();
    ds.sort_unstable();
    ds.dedup();
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let rows = ds
        .iter()
        .flat_map(|&d| ns.iter().map(move |&n| (d, n)))
        .map(|(d, n)| ChshRow {
            d,
            n,
            m,
            result: chsh_report(n, d, m, mode),
        })
        .collect();
    ChshTable { rows }
}

impl ChshTable {
    pub fn computed(&self) -> impl Iterator<Item = &ChshReport> + '_ {
        self.rows.iter().filter_map(|r| r.result.as_ref().ok())
    }

    fn value(&self, d: u32, n: usize) -> Option<f64> {
        self.computed()
            .find(|r| r.d == d && r.n == n)
            .map(ChshReport::chsh)
    }

    /// Rows whose `C` does not exceed the classical bound 2.
    pub fn classical_rows(&self) -> Vec<(u32, usize)> {
        self.computed()
            .filter(|r| r.chsh() <= 2.0)
            .map(|r| (r.d, r.n))
            .collect()
    }

    /// Largest analytic-vs-dense disagreement.
    pub fn max_branch_residual(&self) -> f64 {
        self.computed()
            .filter_map(ChshReport::branch_residual)
            .fold(0.0, f64::max)
    }

    /// Adjacent pairs `(d, N) → (d, N')` where `C` fails to strictly decrease.
    pub fn non_decreasing_in_n(&self) -> Vec<(u32, usize, usize)> {
        let mut bad = Vec::new();
        for d in self.levels() {
            let ns: Vec<usize> = self.computed().filter(|r| r.d == d).map(|r| r.n).collect();
            for w in ns.windows(2) {
                if self.value(d, w[1]) >= self.value(d, w[0]) {
                    bad.push((d, w[0], w[1]));
                }
            }
        }
        bad
    }

    /// Adjacent pairs `(d, N) → (d', N)` where `C` fails to strictly increase.
    pub fn non_increasing_in_d(&self) -> Vec<(usize, u32, u32)> {
        let mut ns: Vec<usize> = self.computed().map(|r| r.n).collect();
        ns.sort_unstable();
        ns.dedup();
        let mut bad = Vec::new();
        for n in ns {
            let ds: Vec<u32> = self.computed().filter(|r| r.n == n).map(|r| r.d).collect();
            for w in ds.windows(2) {
                if self.value(w[1], n) <= self.value(w[0], n) {
                    bad.push((n, w[0], w[1]));
                }
            }
        }
        bad
    }

    fn levels(&self) -> Vec<u32> {
        let mut ds: Vec<u32> = self.computed().map(|r| r.d).collect();
        ds.dedup();
        ds
    }

    /// CSV with header `d,N,m,lambda,x_plus,x_minus,c0,c1,t,C_analytic,C_correlations,rank`.
    /// Skipped rows keep their `d,N,m` and leave the remaining cells empty.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("d,N,m,lambda,x_plus,x_minus,c0,c1,t,C_analytic,C_correlations,rank\n");
        for row in &self.rows {
            let mut cells = vec![row.d.to_string(), row.n.to_string(), row.m.to_string()];
            match &row.result {
                Ok(r) => {
                    let opt = |x: Option<f64>| x.map(format_sig).unwrap_or_default();
                    let a = r.analytic;
                    let dense = r.dense.as_ref();
                    cells.push(opt(a.map(|a| a.pair.lambda)));
                    cells.push(opt(a.map(|a| a.pair.x_plus)));
                    cells.push(opt(a.map(|a| a.pair.x_minus)));
                    cells.push(opt(dense.map(|x| x.c0).or(a.map(|a| a.pair.c0))));
                    cells.push(opt(dense.map(|x| x.c1).or(a.map(|a| a.pair.c1))));
                    cells.push(opt(dense.map(|x| x.t).or(a.map(|a| a.t))));
                    cells.push(opt(a.map(|a| a.chsh)));
                    cells.push(opt(dense.map(|x| x.chsh_correlations)));
                    cells.push(
                        dense
                            .map(|x| x.rank.to_string())
                            .unwrap_or_else(|| "2".into()),
                    );
                }
                Err(_) => cells.extend(std::iter::repeat_n(String::new(), 9)),
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::root_of_unity;

    /// Direct summation oracle `Ω_{i1 i2} = Σ_rest ω^{m i1 i2 Π rest}`.
    fn omega_by_summation(n: usize, d: u32, m: u32) -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![Complex64::new(0.0, 0.0); d as usize]; d as usize];
        for (i1, row) in out.iter_mut().enumerate() {
            for (i2, cell) in row.iter_mut().enumerate() {
                let mut rest = Digits::new(n - 2, d);
                for _ in 0..(d as usize).pow(n as u32 - 2) {
                    let p = rest
                        .get()
                        .iter()
                        .fold((m as u64) * i1 as u64 * i2 as u64, |acc, &r| {
                            acc * r as u64 % d as u64
                        });
                    *cell += root_of_unity(d, p);
                    rest.advance();
                }
            }
        }
        out
    }

    #[test]
    fn primality() {
        let primes: Vec<u32> = (0..30).filter(|&d| is_prime(d)).collect();
        assert_eq!(primes, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn uniform_state_examples() {
        let s = uniform_state(3, 2, 1).unwrap();
        let a = 1.0 / 8f64.sqrt();
        for (i, amp) in s.amplitudes().iter().enumerate() {
            let want = if i == 7 { -a } else { a };
            assert!((amp.re - want).abs() < 1e-15 && amp.im.abs() < 1e-15);
        }
        let s = uniform_state(4, 3, 2).unwrap();
        let want = root_of_unity(3, 2) / 9.0;
        assert!((s.amplitude(&[1, 1, 1, 1]) - want).norm() < 1e-15);
        assert!(uniform_state(2, 3, 1).is_err());
        assert!(uniform_state(3, 3, 3).is_err());
        assert!(uniform_state(3, 3, 0).is_err());
    }

    #[test]
    fn postselection_of_ccz_state() {
        let ps = postselect_plus(&uniform_state(3, 2, 1).unwrap(), (1, 2)).unwrap();
        let want = [[2.0, 2.0], [2.0, 0.0]];
        for (i, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                assert!((ps.omega[(i, j)] - w).norm() < 1e-12);
            }
        }
        // ‖Ω‖ = √12, 𝒩 = d^{N-1}/‖Ω‖.
        assert!((ps.norm - 4.0 / 12f64.sqrt()).abs() < 1e-12);
        assert!((ps.probability - 12.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn postselection_matches_summation_oracle() {
        for (n, d, m) in [(3, 3, 1), (4, 3, 2), (3, 4, 2), (4, 5, 3), (3, 6, 1)] {
            let ps = postselect_plus(&uniform_state(n, d, m).unwrap(), (1, 2)).unwrap();
            let oracle = omega_by_summation(n, d, m);
            for (i, row) in oracle.iter().enumerate() {
                for (j, want) in row.iter().enumerate() {
                    assert!((ps.omega[(i, j)] - want).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn postselection_is_permutation_symmetric() {
        let s = uniform_state(3, 2, 1).unwrap();
        let a = postselect_plus(&s, (1, 2)).unwrap().state;
        let b = postselect_plus(&s, (1, 3)).unwrap().state;
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
        assert!(postselect_plus(&s, (2, 2)).is_err());
        assert!(postselect_plus(&s, (1, 4)).is_err());
    }

    #[test]
    fn omega_corner_is_d_to_n_minus_2() {
        let ps = postselect_plus(&uniform_state(4, 3, 1).unwrap(), (1, 2)).unwrap();
        assert!((ps.omega[(0, 0)] - 9.0).norm() < 1e-10);
    }

    #[test]
    fn omega_prime_closed_form() {
        let o = omega_prime(2, 3).unwrap();
        assert_eq!(o, DMatrix::from_row_slice(2, 2, &[2.0, 2.0, 2.0, 0.0]));
        let o = omega_prime(3, 4).unwrap();
        assert_eq!(o[(0, 0)], 9.0);
        assert_eq!(o[(1, 2)], 3.0);
        assert!(omega_prime(4, 4).is_err());
        assert!(omega_prime(3, 2).is_err());
        for d in [2u32, 3, 5, 7] {
            for n in 3..=6usize {
                let o = omega_prime(d, n).unwrap();
                let edge = f64::from(d).powi(n as i32 - 2);
                for i in 0..d as usize {
                    assert_eq!(o[(0, i)], edge);
                    assert_eq!(o[(i, 0)], edge);
                }
            }
        }
    }

    #[test]
    fn omega_prime_matches_dense_exactly() {
        for d in [2u32, 3, 5, 7] {
            for n in 3..=6usize {
                let o = omega_prime(d, n).unwrap();
                for m in [1, d - 1] {
                    let ps = postselect_plus(&uniform_state(n, d, m).unwrap(), (1, 2)).unwrap();
                    for i in 0..d as usize {
                        for j in 0..d as usize {
                            let z = ps.omega[(i, j)];
                            assert!(z.im.abs() < 1e-6);
                            assert_eq!(z.re.round(), o[(i, j)], "d={d} N={n} ({i},{j})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn qubit_schmidt_pair() {
        let p = schmidt_pair_prime(2, 3).unwrap();
        assert!((p.lambda - 1.0).abs() < 1e-15);
        assert!((p.x_plus - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((p.x_minus - (1.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
        // Cross-check against the SVD of the normalized Ω.
        let ps = postselect_plus(&uniform_state(3, 2, 1).unwrap(), (1, 2)).unwrap();
        let sd = schmidt_matrix(&DMatrix::from_fn(2, 2, |i, j| {
            ps.state.amplitudes()[i * 2 + j]
        }));
        assert!((sd.coefficients[0] - p.c0).abs() < 1e-12);
        assert!((sd.coefficients[1] - p.c1).abs() < 1e-12);
        assert!(schmidt_pair_prime(6, 3).is_err());
    }

    #[test]
    fn schmidt_pair_limits() {
        let balanced = schmidt_pair_prime(1_000_003, 4).unwrap();
        assert!((balanced.c0 - 0.5f64.sqrt()).abs() < 1e-3);
        assert!((balanced.c1 - 0.5f64.sqrt()).abs() < 1e-3);
        let lopsided = schmidt_pair_prime(3, 40).unwrap();
        assert!(lopsided.c1 < 1e-3);
        let mut prev = 1.0;
        for n in 3..20 {
            let c1 = schmidt_pair_prime(5, n).unwrap().c1;
            assert!(c1 < prev);
            prev = c1;
        }
    }

    #[test]
    fn closed_form_values() {
        assert!(
            (chsh_value(0.5f64.sqrt(), 0.5f64.sqrt()).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-15
        );
        assert!((chsh_value(1.0, 0.0).unwrap() - 2.0).abs() < 1e-15);
        let p = schmidt_pair_prime(2, 3).unwrap();
        assert!((chsh_value(p.c0, p.c1).unwrap() - 2.0 * 13f64.sqrt() / 3.0).abs() < 1e-12);
        assert!(chsh_value(0.0, 0.0).is_err());
        assert!(chsh_value(-0.1, 0.5).is_err());
    }

    #[test]
    fn correlations_match_closed_form() {
        for (c0, c1) in [(0.9f64, 0.3f64), (0.6, 0.5), (0.99, 0.05)] {
            let s = c0.hypot(c1);
            let (c0, c1) = (c0 / s, c1 / s);
            for d in [2u32, 3, 5] {
                let mut amps = vec![Complex64::new(0.0, 0.0); (d * d) as usize];
                amps[0] = Complex64::new(c0, 0.0);
                amps[(d + 1) as usize] = Complex64::new(c1, 0.0);
                let st = QuditState::from_amplitudes(2, d, amps).unwrap();
                let corr = chsh_from_correlations(&st, optimal_angle(c0, c1)).unwrap();
                assert!(!corr.degenerate);
                assert!((corr.value - chsh_value(c0, c1).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn optimal_angle_maximizes() {
        let (c0, c1) = (0.8f64, 0.6f64);
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[0] = Complex64::new(c0, 0.0);
        amps[3] = Complex64::new(c1, 0.0);
        let st = QuditState::from_amplitudes(2, 2, amps).unwrap();
        let best = chsh_from_correlations(&st, optimal_angle(c0, c1))
            .unwrap()
            .value;
        for k in 0..200 {
            let t = -1.5 + 3.0 * f64::from(k) / 200.0;
            assert!(chsh_from_correlations(&st, t).unwrap().value <= best + 1e-12);
        }
    }

    #[test]
    fn aligned_settings_do_not_violate() {
        let ps = postselect_plus(&uniform_state(3, 2, 1).unwrap(), (1, 2)).unwrap();
        let v = chsh_from_correlations(&ps.state, 0.0).unwrap().value;
        assert!(v <= 2.0 + 1e-12);
    }

    #[test]
    fn degenerate_product_state() {
        let st = QuditState::plus_state(2, 3).unwrap();
        let r = chsh_from_correlations(&st, 0.3).unwrap();
        assert!(r.degenerate);
        assert!(r.value <= 2.0 + 1e-12);
        assert!(chsh_from_correlations(&QuditState::plus_state(3, 2).unwrap(), 0.0).is_err());
    }

    #[test]
    fn ccz_chsh_value() {
        let r = chsh_report(3, 2, 1, ChshMode::Both).unwrap();
        let expected = 2.0 * 13f64.sqrt() / 3.0;
        assert!((r.analytic.unwrap().chsh - expected).abs() < 1e-12);
        let dense = r.dense.as_ref().unwrap();
        assert!((dense.chsh_correlations - expected).abs() < 1e-9);
        assert_eq!(dense.rank, 2);
        assert!(r.branch_residual().unwrap() < BRANCH_TOLERANCE);
    }

    #[test]
    fn report_modes() {
        let r = chsh_report(4, 6, 1, ChshMode::Both).unwrap();
        assert!(r.analytic.is_none());
        assert!(r.dense.as_ref().unwrap().rank > 2);
        assert!(r.chsh() > 2.0);
        assert!(chsh_report(4, 6, 1, ChshMode::AnalyticOnly).is_err());
        let r = chsh_report(20, 13, 1, ChshMode::Both).unwrap();
        assert!(r.dense.is_none() && r.analytic.is_some());
        assert!(matches!(
            chsh_report(20, 13, 1, ChshMode::DenseOnly),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            chsh_report(20, 12, 1, ChshMode::Both),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn qubit_trend_in_n() {
        let table = chsh_table(&[2], &[3, 4, 5, 6, 7, 8], 1, ChshMode::Both);
        assert_eq!(table.rows.len(), 6);
        assert!(table.non_decreasing_in_n().is_empty());
        assert!(table.classical_rows().is_empty());
        assert!(table.max_branch_residual() < BRANCH_TOLERANCE);
    }

    #[test]
    fn trend_in_d() {
        let table = chsh_table(&[13, 2, 3, 5, 7, 11], &[4], 1, ChshMode::AnalyticOnly);
        assert!(table.non_increasing_in_d().is_empty());
        assert!(table
            .computed()
            .all(|r| r.chsh() > 2.0 && r.chsh() < 2.0 * 2f64.sqrt()));
    }

    #[test]
    fn csv_layout() {
        let csv = chsh_table(&[2], &[3], 1, ChshMode::Both).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "d,N,m,lambda,x_plus,x_minus,c0,c1,t,C_analytic,C_correlations,rank"
        );
        let cells: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(cells.len(), 12);
        assert_eq!(&cells[..4], &["2", "3", "1", "1.0"]);
        assert_eq!(cells[9], "2.40370085031");
        assert_eq!(cells[11], "2");
        let skipped = chsh_table(&[4], &[30], 1, ChshMode::Both).to_csv();
        assert_eq!(skipped.lines().nth(1).unwrap(), "4,30,1,,,,,,,,,");
    }
}
