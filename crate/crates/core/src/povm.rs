//! Rank-one extremal POVMs with `d²` outcomes and the statistics test used to certify them.

use crate::error::{QcError, Result};
use crate::measurements::Povm;
use crate::qcore::{check_dim, hw_matrix, identity, kron, root, CMatrix, CVector, Ket, SchmidtCoeffs, C64};

const REL_RANK: f64 = 1e-8;

/// Heisenberg–Weyl covariant POVM `I_{k,l} = (1/d) U_{k,l}|ν⟩⟨ν|U_{k,l}†`, outcome `k·d + l`.
pub fn hw_covariant_povm(d: usize, nu: &Ket) -> Result<Povm> {
    check_dim(d)?;
    if nu.dim() != d {
        return Err(QcError::InvalidArgument(format!("fiducial has dimension {}, expected {d}", nu.dim())));
    }
    let proj = nu.projector();
    let mut effects = Vec::with_capacity(d * d);
    for k in 0..d as i64 {
        for l in 0..d as i64 {
            let u = hw_matrix(d, k, l);
            if (u.adjoint() * &proj).trace().norm() < 1e-10 {
                return Err(QcError::DegenerateFiducial(format!("Tr[U_{{{k},{l}}}† |ν⟩⟨ν|] vanishes")));
            }
            effects.push(&u * &proj * u.adjoint() / C64::new(d as f64, 0.0));
        }
    }
    Povm::new(effects)
}

/// Exponents `ξ_i` for `d = 3..=6`; each is a perfect difference set modulo `d²−d+1`.
pub fn xi_table(d: usize) -> Option<&'static [usize]> {
    match d {
        3 => Some(&[0, 1, 3]),
        4 => Some(&[0, 1, 3, 9]),
        5 => Some(&[0, 1, 4, 14, 16]),
        6 => Some(&[0, 1, 3, 8, 12, 18]),
        _ => None,
    }
}

/// The `d²`-outcome POVM whose outcomes are uniform on `ρ_B(α) = diag(α²)`.
///
/// Outcomes `b ≤ d−2` are `λ_b|b⟩⟨b|` with `λ_b = 1/(d²α_b²)`; the remaining
/// `d²−d+1` are `λ|δ_b⟩⟨δ_b|` with a common weight `λ`.
pub fn partial_entanglement_povm(d: usize, alpha: &SchmidtCoeffs) -> Result<Povm> {
    let xi = xi_table(d).ok_or_else(|| QcError::InvalidArgument(format!("d = {d} not supported, need 3..=6")))?;
    if alpha.d() != d {
        return Err(QcError::InvalidArgument(format!("α has length {}, expected {d}", alpha.d())));
    }
    let a = alpha.alpha();
    let inv = 1.0 / d as f64;
    if a[..d - 1].iter().any(|&x| x < inv - 1e-12) {
        return Err(QcError::InvalidArgument(format!("need α_i >= 1/{d} for i = 0..{}", d - 2)));
    }
    let n = d * d - d + 1;
    let lam: Vec<f64> = a[..d - 1].iter().map(|x| 1.0 / (d as f64 * d as f64 * x * x)).collect();
    let lb = (d as f64 - lam.iter().sum::<f64>()) / n as f64;
    let mut mu: Vec<f64> = lam.iter().map(|l| ((1.0 - l) / (n as f64 * lb)).max(0.0).sqrt()).collect();
    mu.push((1.0 / (n as f64 * lb)).sqrt());

    let mut effects = Vec::with_capacity(d * d);
    for (b, l) in lam.iter().enumerate() {
        let mut e = CMatrix::zeros(d, d);
        e[(b, b)] = C64::new(*l, 0.0);
        effects.push(e);
    }
    for b in d - 1..d * d {
        let t = b - (d - 1);
        let v = CVector::from_fn(d, |i, _| root(n, ((xi[i] * t) % n) as f64) * mu[i]);
        effects.push(&v * v.adjoint() * C64::new(lb, 0.0));
    }
    Povm::with_tol(effects, 1e-8)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalityReport {
    pub is_rank_one: bool,
    pub elements_linearly_independent: bool,
    pub n_outcomes: usize,
    pub is_extremal_rank_one: bool,
    /// Set when some effect has rank above one; the criterion used does not decide that case.
    pub undecided: bool,
}

fn numerical_rank(m: &CMatrix) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > REL_RANK * top).count()
}

pub fn extremality_check(p: &Povm) -> ExtremalityReport {
    let is_rank_one = p.effects().iter().all(|e| numerical_rank(e) == 1);
    let d = p.dim();
    let n = p.n_outcomes();
    let stacked = CMatrix::from_fn(n, d * d, |r, c| p.effects()[r][(c % d, c / d)]);
    let elements_linearly_independent = numerical_rank(&stacked) == n;
    ExtremalityReport {
        is_rank_one,
        elements_linearly_independent,
        n_outcomes: n,
        is_extremal_rank_one: is_rank_one && elements_linearly_independent,
        undecided: !is_rank_one,
    }
}

/// `P(α) = diag(√d α_i)`, so that `|ψ(α)⟩ = (P ⊗ 1)|φ⁺⟩`.
pub fn p_alpha(alpha: &SchmidtCoeffs) -> CMatrix {
    let d = alpha.d();
    let s = (d as f64).sqrt();
    CMatrix::from_diagonal(&CVector::from_iterator(d, alpha.alpha().iter().map(|a| C64::new(s * a, 0.0))))
}

/// `W_{i,j} = P(α)^{−1} (X^i Z^j)* P(α)^{−1}`, ordered `i·d + j`.
pub fn wij_basis(alpha: &SchmidtCoeffs) -> Vec<CMatrix> {
    let d = alpha.d();
    let s = (d as f64).sqrt();
    let pinv =
        CMatrix::from_diagonal(&CVector::from_iterator(d, alpha.alpha().iter().map(|a| C64::new(1.0 / (s * a), 0.0))));
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d as i64 {
        for j in 0..d as i64 {
            out.push(&pinv * hw_matrix(d, i, j).conjugate() * &pinv);
        }
    }
    out
}

/// Coefficients `c` with `op = Σ c_n basis_n`.
pub fn expand_in_basis(basis: &[CMatrix], op: &CMatrix) -> Result<Vec<C64>> {
    let d = op.nrows();
    if basis.len() != d * d || basis.iter().any(|b| b.nrows() != d) {
        return Err(QcError::InvalidArgument("basis must hold d² matrices of dimension d".into()));
    }
    let m = CMatrix::from_fn(d * d, d * d, |r, c| basis[c][(r % d, r / d)]);
    let rhs = CVector::from_fn(d * d, |r, _| op[(r % d, r / d)]);
    let sol = m.lu().solve(&rhs).ok_or_else(|| QcError::InvalidBasis("matrices are linearly dependent".into()))?;
    Ok(sol.iter().cloned().collect())
}

pub fn reconstruct(basis: &[CMatrix], coeffs: &[C64]) -> CMatrix {
    let d = basis[0].nrows();
    basis.iter().zip(coeffs).fold(CMatrix::zeros(d, d), |acc, (b, c)| acc + b * *c)
}

/// Dimensions of the extended realization `A ⊗ B' ⊗ B'' ⊗ E` with `A`, `B'` of dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtendedDims {
    pub d: usize,
    pub b_extra: usize,
    pub env: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatisticsReport {
    pub max_deviation: f64,
    /// `(i, j, b)` at which the deviation is largest.
    pub argmax: (usize, usize, usize),
}

/// Compares `⟨X^iZ^j ⊗ R_b ⊗ 1_E⟩` on the extended state with `⟨X^iZ^j ⊗ I_b⟩` on `|ψ(α)⟩`.
pub fn statistics_match_check(
    ext_state: &Ket,
    dims: ExtendedDims,
    r: &Povm,
    ideal: &Povm,
    alpha: &SchmidtCoeffs,
) -> Result<StatisticsReport> {
    let ExtendedDims { d, b_extra, env } = dims;
    check_dim(d)?;
    if alpha.d() != d || ideal.dim() != d {
        return Err(QcError::InvalidArgument("ideal POVM and α must have dimension d".into()));
    }
    if r.dim() != d * b_extra || ext_state.dim() != d * d * b_extra * env {
        return Err(QcError::InvalidArgument("extended dimensions do not factorize as declared".into()));
    }
    if r.n_outcomes() != ideal.n_outcomes() {
        return Err(QcError::InvalidArgument("POVMs differ in outcome count".into()));
    }
    let psi = crate::qcore::make_schmidt_state(alpha);
    let id_e = identity(env);
    let mut worst = (0.0f64, (0, 0, 0));
    for i in 0..d {
        for j in 0..d {
            let a = hw_matrix(d, i as i64, j as i64);
            for b in 0..r.n_outcomes() {
                let lhs = ext_state.expectation(&kron(&kron(&a, &r.effects()[b]), &id_e));
                let rhs = psi.expectation(&kron(&a, &ideal.effects()[b]));
                let dev = (lhs - rhs).norm();
                if dev > worst.0 {
                    worst = (dev, (i, j, b));
                }
            }
        }
    }
    Ok(StatisticsReport { max_deviation: worst.0, argmax: worst.1 })
}
