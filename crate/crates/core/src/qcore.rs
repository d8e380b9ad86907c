//! Dense complex linear algebra, canonical qudit operators and states.
//!
//! Conventions: `ω = exp(2πi/d)`, fractional powers `ω^t = exp(2πit/d)`,
//! basis labels are taken mod `d`, and in tensor products the first factor
//! is the most significant index.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{QcError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Norm tolerance for [`Ket`].
pub const TOL_NORM: f64 = 1e-12;
/// Tolerance for structural identities.
pub const TOL_STRUCT: f64 = 1e-10;
/// Phase tolerance when matching eigenvalues to roots of unity.
pub const TOL_PHASE: f64 = 1e-8;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// `exp(2πi t/d)` without dimension checks.
#[inline]
pub fn root(d: usize, t: f64) -> C64 {
    let q = 4.0 * t / d as f64;
    if q == q.round() {
        // exact values at quarter turns
        return match (q as i64).rem_euclid(4) {
            0 => ONE,
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    C64::from_polar(1.0, 2.0 * PI * t / d as f64)
}

/// `ω^t` for `ω = exp(2πi/d)`.
pub fn omega_power(d: usize, t: f64) -> Result<C64> {
    check_dim(d)?;
    Ok(root(d, t))
}

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(QcError::InvalidDimension(d))
    } else {
        Ok(())
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a sequence of matrices.
pub fn tensor(factors: &[CMatrix]) -> Result<CMatrix> {
    let (first, rest) =
        factors.split_first().ok_or_else(|| QcError::InvalidArgument("tensor of empty sequence".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, f| acc.kronecker(f)))
}

pub fn tensor_vec(factors: &[CVector]) -> Result<CVector> {
    let (first, rest) =
        factors.split_first().ok_or_else(|| QcError::InvalidArgument("tensor of empty sequence".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, f| acc.kronecker(f)))
}

/// Partial trace keeping the subsystems listed in `keep` (in ascending order).
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || m.nrows() != total || m.ncols() != total {
        return Err(QcError::InvalidArgument(format!(
            "matrix {}x{} does not match subsystem dims {:?}",
            m.nrows(),
            m.ncols(),
            dims
        )));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(QcError::InvalidArgument(format!("subsystem {bad} out of range")));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();
    let n_keep: usize = kept.iter().map(|&i| dims[i]).product();
    let n_tr: usize = traced.iter().map(|&i| dims[i]).product();

    // stride of each subsystem in the full index
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let offsets = |sel: &[usize], n: usize| -> Vec<usize> {
        (0..n)
            .map(|mut idx| {
                let mut off = 0;
                for &s in sel.iter().rev() {
                    off += (idx % dims[s]) * strides[s];
                    idx /= dims[s];
                }
                off
            })
            .collect()
    };
    let keep_off = offsets(&kept, n_keep);
    let tr_off = offsets(&traced, n_tr);

    let mut out = CMatrix::zeros(n_keep, n_keep);
    for (a, &ra) in keep_off.iter().enumerate() {
        for (b, &cb) in keep_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &tr_off {
                acc += m[(ra + t, cb + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// `m^k`; negative powers are adjoint powers (valid for unitaries).
pub fn mat_pow(m: &CMatrix, k: i64) -> CMatrix {
    let base = if k < 0 { m.adjoint() } else { m.clone() };
    let mut e = k.unsigned_abs();
    let mut result = identity(m.nrows());
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    result
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

pub fn unitarity_residual(m: &CMatrix) -> f64 {
    (m * m.adjoint() - identity(m.nrows())).norm()
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && unitarity_residual(m) < tol
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).norm() < tol
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = hermitian_part(m).symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn max_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.last().copied().unwrap_or(f64::NAN)
}

/// Phase of `z` in `[0, 2π)`, snapping values within `1e-9` of `2π` to 0.
pub fn principal_phase(z: C64) -> f64 {
    let p = z.arg().rem_euclid(2.0 * PI);
    if 2.0 * PI - p < 1e-9 {
        0.0
    } else {
        p
    }
}

/// Eigen-decomposition of a normal (e.g. unitary) matrix via its Schur form.
///
/// Columns of the returned matrix are orthonormal eigenvectors, ordered by
/// the principal phase of their eigenvalue.
pub fn unitary_eigen(m: &CMatrix) -> (Vec<C64>, CMatrix) {
    let n = m.nrows();
    let q = match nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 100_000) {
        Some(s) => s.unpack().0,
        None => {
            // cos(θ_j − 1) separates distinct roots of unity
            let rot = m * C64::from_polar(1.0, -1.0);
            hermitian_eigen(&hermitian_part(&rot)).1
        }
    };
    let vals: Vec<C64> = (0..n)
        .map(|j| {
            let v = q.column(j);
            (v.adjoint() * m * v)[(0, 0)]
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| principal_phase(vals[a]).total_cmp(&principal_phase(vals[b])));
    let mut vecs = CMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &q.column(i));
    }
    (order.iter().map(|&i| vals[i]).collect(), vecs)
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..n {
        let rjj = r[(j, j)];
        let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        let mut col = u.column_mut(j);
        col *= ph;
    }
    u
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// A unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amps: CVector,
}

impl Ket {
    pub fn new(amps: CVector) -> Result<Self> {
        let n = amps.norm();
        if amps.is_empty() || amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QcError::InvalidArgument("ket entries must be finite".into()));
        }
        if (n - 1.0).abs() > TOL_NORM {
            return Err(QcError::InvalidArgument(format!("ket norm {n} is not 1")));
        }
        Ok(Self { amps })
    }

    pub fn normalized(amps: CVector) -> Result<Self> {
        let n = amps.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(QcError::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Ok(Self { amps: amps / C64::new(n, 0.0) })
    }

    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(QcError::InvalidArgument(format!("basis index {i} >= {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[i] = ONE;
        Ok(Self { amps: v })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &CVector {
        &self.amps
    }

    pub fn projector(&self) -> CMatrix {
        &self.amps * self.amps.adjoint()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// `⟨ψ|op|ψ⟩`.
    pub fn expectation(&self, op: &CMatrix) -> C64 {
        self.amps.dotc(&(op * &self.amps))
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        Ket { amps: self.amps.kronecker(&other.amps) }
    }

    pub fn apply(&self, op: &CMatrix) -> Result<Ket> {
        Ket::normalized(op * &self.amps)
    }
}

/// A positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(QcError::InvalidArgument("density matrix must be square".into()));
        }
        if !is_hermitian(&m, 1e-12) {
            return Err(QcError::InvalidArgument("density matrix is not Hermitian".into()));
        }
        if (m.trace().re - 1.0).abs() > 1e-10 {
            return Err(QcError::InvalidArgument("density matrix trace is not 1".into()));
        }
        let (vals, _) = hermitian_eigen(&m);
        if vals.first().copied().unwrap_or(0.0) < -1e-10 {
            return Err(QcError::InvalidArgument("density matrix has a negative eigenvalue".into()));
        }
        Ok(Self { m: hermitian_part(&m) })
    }

    pub fn from_ket(psi: &Ket) -> Self {
        Self { m: psi.projector() }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { m: identity(d) / C64::new(d as f64, 0.0) }
    }

    /// `v·ψψ† + (1−v)·I/n`.
    pub fn isotropic(psi: &Ket, v: f64) -> Result<Self> {
        let n = psi.dim();
        Self::new(psi.projector() * C64::new(v, 0.0) + identity(n) * C64::new((1.0 - v) / n as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn expectation(&self, op: &CMatrix) -> C64 {
        (op * &self.m).trace()
    }
}

/// A state given as either a ket or a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(Ket),
    Mixed(DensityMatrix),
}

impl State {
    pub fn dim(&self) -> usize {
        match self {
            State::Pure(k) => k.dim(),
            State::Mixed(r) => r.dim(),
        }
    }

    pub fn expectation(&self, op: &CMatrix) -> C64 {
        match self {
            State::Pure(k) => k.expectation(op),
            State::Mixed(r) => r.expectation(op),
        }
    }

    pub fn density(&self) -> CMatrix {
        match self {
            State::Pure(k) => k.projector(),
            State::Mixed(r) => r.matrix().clone(),
        }
    }
}

impl From<Ket> for State {
    fn from(k: Ket) -> Self {
        State::Pure(k)
    }
}

impl From<DensityMatrix> for State {
    fn from(r: DensityMatrix) -> Self {
        State::Mixed(r)
    }
}

/// Strictly positive coefficients with unit sum of squares.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtCoeffs {
    alpha: Vec<f64>,
}

impl SchmidtCoeffs {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(QcError::InvalidArgument("need at least two coefficients".into()));
        }
        if alpha.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(QcError::InvalidArgument("coefficients must be positive".into()));
        }
        let s: f64 = alpha.iter().map(|a| a * a).sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(QcError::InvalidArgument(format!("sum of squares {s} is not 1")));
        }
        Ok(Self { alpha })
    }

    /// Rescales positive weights to unit sum of squares.
    pub fn normalized(weights: &[f64]) -> Result<Self> {
        let n: f64 = weights.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(QcError::InvalidArgument("cannot normalize zero weights".into()));
        }
        let alpha: Vec<f64> = weights.iter().map(|a| a / n).collect();
        if alpha.iter().any(|a| *a <= 0.0) {
            return Err(QcError::InvalidArgument("coefficients must be positive".into()));
        }
        let s: f64 = alpha.iter().map(|a| a * a).sum();
        let fix = s.sqrt();
        Self::new(alpha.into_iter().map(|a| a / fix).collect())
    }

    pub fn uniform(d: usize) -> Result<Self> {
        check_dim(d)?;
        Self::new(vec![1.0 / (d as f64).sqrt(); d])
    }

    pub fn d(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
}

/// A unitary with spectrum in the `d`-th roots of unity.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryObservable {
    d: usize,
    m: CMatrix,
}

impl UnitaryObservable {
    pub fn new(d: usize, m: CMatrix) -> Result<Self> {
        check_dim(d)?;
        if !m.is_square() {
            return Err(QcError::InvalidObservables("observable must be square".into()));
        }
        if !is_unitary(&m, TOL_STRUCT) {
            return Err(QcError::InvalidObservables(format!("not unitary (residual {:.3e})", unitarity_residual(&m))));
        }
        let n = m.nrows();
        if (mat_pow(&m, d as i64) - identity(n)).norm() > 1e-9 {
            return Err(QcError::InvalidObservables("A^d differs from the identity".into()));
        }
        let (vals, _) = unitary_eigen(&m);
        for v in vals {
            let t = principal_phase(v) * d as f64 / (2.0 * PI);
            if (t - t.round()).abs() * 2.0 * PI / d as f64 > TOL_PHASE {
                return Err(QcError::InvalidObservables(format!("eigenvalue {v} is not a root of unity")));
            }
        }
        Ok(Self { d, m })
    }

    pub(crate) fn trusted(d: usize, m: CMatrix) -> Self {
        Self { d, m }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// `A^k` for any integer `k`.
    pub fn pow(&self, k: i64) -> CMatrix {
        mat_pow(&self.m, k.rem_euclid(self.d as i64))
    }

    pub fn adjoint(&self) -> Self {
        Self { d: self.d, m: self.m.adjoint() }
    }

    pub fn conj(&self) -> Self {
        Self { d: self.d, m: self.m.conjugate() }
    }

    pub fn scaled(&self, phase: C64) -> Self {
        Self { d: self.d, m: &self.m * phase }
    }

    /// Conjugation `U A U†`.
    pub fn conjugated(&self, u: &CMatrix) -> Self {
        Self { d: self.d, m: u * &self.m * u.adjoint() }
    }
}

/// Clock operator `Z_d = Σ ω^i |i⟩⟨i|`.
pub fn make_zd(d: usize) -> Result<UnitaryObservable> {
    check_dim(d)?;
    let diag = CVector::from_fn(d, |i, _| root(d, i as f64));
    Ok(UnitaryObservable::trusted(d, CMatrix::from_diagonal(&diag)))
}

/// Shift operator `X_d|i⟩ = |i+1⟩`.
pub fn make_xd(d: usize) -> Result<UnitaryObservable> {
    check_dim(d)?;
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[((i + 1) % d, i)] = ONE;
    }
    Ok(UnitaryObservable::trusted(d, m))
}

/// The unitary `T_{d,m}` that, together with `Z_d`, generates the ideal
/// CGLMP-type observables after conjugation by an alignment unitary.
pub fn make_tdm(d: usize, m: usize) -> Result<UnitaryObservable> {
    check_dim(d)?;
    if m < 2 {
        return Err(QcError::InvalidArgument(format!("m = {m} must be at least 2")));
    }
    let (df, mf) = (d as f64, m as f64);
    let s = (PI / mf).sin();
    let coef = C64::new(0.0, -2.0 * s / df);
    let mut t = CMatrix::zeros(d, d);
    for i in 0..d {
        t[(i, i)] += root(d, i as f64 + 1.0 / mf);
        for j in 0..d {
            let sign = if (i == 0) ^ (j == 0) { -1.0 } else { 1.0 };
            let ph = root(d, (i + j) as f64 / 2.0 - (df - 2.0) / (2.0 * mf));
            t[(i, j)] += coef * ph * sign;
        }
    }
    Ok(UnitaryObservable::trusted(d, t))
}

pub fn make_ghz(n: usize, d: usize) -> Result<Ket> {
    check_dim(d)?;
    if n < 2 {
        return Err(QcError::InvalidArgument(format!("N = {n} must be at least 2")));
    }
    let dim = d.checked_pow(n as u32).ok_or_else(|| QcError::CapacityExceeded("d^N overflows".into()))?;
    let step: usize = (0..n).map(|j| d.pow(j as u32)).sum();
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = CVector::zeros(dim);
    for i in 0..d {
        v[i * step] = amp;
    }
    Ket::new(v)
}

pub fn make_maxent(d: usize) -> Result<Ket> {
    make_ghz(2, d)
}

/// `|ψ(α)⟩ = Σ α_i |ii⟩`.
pub fn make_schmidt_state(alpha: &SchmidtCoeffs) -> Ket {
    let d = alpha.d();
    let mut v = CVector::zeros(d * d);
    for (i, a) in alpha.alpha().iter().enumerate() {
        v[i * d + i] = C64::new(*a, 0.0);
    }
    Ket::normalized(v).expect("Schmidt coefficients are normalized")
}

/// Raw Heisenberg–Weyl operator `X^k Z^l` for arbitrary integer powers.
pub fn hw_matrix(d: usize, k: i64, l: i64) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        let row = (i as i64 + k).rem_euclid(d as i64) as usize;
        m[(row, i)] = root(d, (l * i as i64).rem_euclid(d as i64) as f64);
    }
    m
}

/// Heisenberg–Weyl operator `U_{k,l} = X_d^k Z_d^l`.
pub fn hw_operator(d: usize, k: usize, l: usize) -> Result<CMatrix> {
    check_dim(d)?;
    if k >= d || l >= d {
        return Err(QcError::InvalidArgument(format!("indices ({k},{l}) out of range for d = {d}")));
    }
    Ok(hw_matrix(d, k as i64, l as i64))
}

/// `X Z^l` as printed, without phase normalization. Its spectrum is a
/// rotated set of roots of unity when `d` is even and `l` odd.
pub fn hw_observable_raw(d: usize, l: i64) -> Result<CMatrix> {
    check_dim(d)?;
    Ok(hw_matrix(d, 1, l))
}

/// `ω^{l(d−1)/2} X Z^l`, whose `d`-th power is the identity.
pub fn hw_observable_normalized(d: usize, l: i64) -> Result<UnitaryObservable> {
    check_dim(d)?;
    let phase = root(d, (l * (d as i64 - 1)) as f64 / 2.0);
    UnitaryObservable::new(d, hw_matrix(d, 1, l) * phase)
}

#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coeffs: Vec<f64>,
    pub basis_a: Vec<CVector>,
    pub basis_b: Vec<CVector>,
}

impl SchmidtDecomposition {
    pub fn reconstruct(&self) -> CVector {
        let n = self.basis_a[0].len() * self.basis_b[0].len();
        let mut v = CVector::zeros(n);
        for ((c, a), b) in self.coeffs.iter().zip(&self.basis_a).zip(&self.basis_b) {
            v += a.kronecker(b) * C64::new(*c, 0.0);
        }
        v
    }
}

/// Schmidt decomposition via the SVD of the coefficient matrix.
pub fn schmidt_decompose(psi: &Ket, da: usize, db: usize) -> Result<SchmidtDecomposition> {
    if da == 0 || db == 0 || da * db != psi.dim() {
        return Err(QcError::InvalidArgument(format!("{}x{} does not factor dimension {}", da, db, psi.dim())));
    }
    let c = CMatrix::from_fn(da, db, |i, j| psi.amps()[i * db + j]);
    let svd = c.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let r = da.min(db);
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    Ok(SchmidtDecomposition {
        coeffs: order.iter().map(|&i| svd.singular_values[i]).collect(),
        basis_a: order.iter().map(|&i| u.column(i).into_owned()).collect(),
        basis_b: order.iter().map(|&i| vt.row(i).transpose().into_owned()).collect(),
    })
}
