//! POVMs, generalized observables and the ideal measurement families.
//!
//! A `d`-outcome POVM `{E_k}` and its generalized observables are related by
//! the discrete Fourier transform `A^(l) = Σ_k ω^{lk} E_k`,
//! `E_k = (1/d) Σ_l ω^{−lk} A^(l)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{QcError, Result};
use crate::qcore::{
    check_dim, hermitian_eigen, identity, is_hermitian, is_unitary, mat_pow, op_norm, principal_phase, root,
    unitary_eigen, CMatrix, CVector, Ket, UnitaryObservable, C64, TOL_PHASE, TOL_STRUCT,
};

pub use crate::qcore::UnitaryObservable as Observable;

/// A finite POVM on a shared Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<CMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        Self::with_tol(effects, TOL_STRUCT)
    }

    pub fn with_tol(effects: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let first = effects.first().ok_or_else(|| QcError::InvalidPovm("no effects".into()))?;
        let n = first.nrows();
        let mut sum = CMatrix::zeros(n, n);
        for (k, e) in effects.iter().enumerate() {
            if e.nrows() != n || e.ncols() != n {
                return Err(QcError::InvalidPovm(format!("effect {k} has the wrong shape")));
            }
            if !is_hermitian(e, tol) {
                return Err(QcError::InvalidPovm(format!("effect {k} is not Hermitian")));
            }
            if hermitian_eigen(e).0[0] < -tol {
                return Err(QcError::InvalidPovm(format!("effect {k} is not positive")));
            }
            sum += e;
        }
        let res = (sum - identity(n)).norm();
        if res > tol {
            return Err(QcError::InvalidPovm(format!("effects sum to identity only within {res:.3e}")));
        }
        Ok(Self { effects })
    }

    /// Projective measurement onto an orthonormal basis.
    pub fn from_basis(basis: &[Ket]) -> Result<Self> {
        Self::new(basis.iter().map(Ket::projector).collect())
    }

    /// Spectral projectors of an observable, outcome `k` for eigenvalue `ω^k`.
    pub fn from_observable(obs: &UnitaryObservable) -> Result<Self> {
        let d = obs.d();
        let n = obs.dim();
        let (vals, vecs) = unitary_eigen(obs.matrix());
        let mut effects = vec![CMatrix::zeros(n, n); d];
        for (j, v) in vals.iter().enumerate() {
            let k = (principal_phase(*v) * d as f64 / (2.0 * PI)).round() as usize % d;
            let col = vecs.column(j);
            effects[k] += col * col.adjoint();
        }
        Self::new(effects)
    }

    pub fn n_outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    /// Outcome probabilities `Tr[E_k ρ]`.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.effects.iter().map(|e| (e * rho).trace().re).collect()
    }

    pub fn conjugated(&self, u: &CMatrix) -> Self {
        Self { effects: self.effects.iter().map(|e| u * e * u.adjoint()).collect() }
    }
}

/// The Fourier-dual generalized observables `A^(l)`, `l = 0..n−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSet {
    observables: Vec<CMatrix>,
}

impl ObservableSet {
    pub fn new(observables: Vec<CMatrix>) -> Result<Self> {
        let n = observables.len();
        if n < 2 {
            return Err(QcError::InvalidObservables("need at least two outcomes".into()));
        }
        let dim = observables[0].nrows();
        if (&observables[0] - identity(dim)).norm() > TOL_STRUCT {
            return Err(QcError::InvalidObservables("A^(0) is not the identity".into()));
        }
        for l in 1..n {
            if (&observables[n - l] - observables[l].adjoint()).norm() > TOL_STRUCT {
                return Err(QcError::InvalidObservables(format!("A^({}) is not A^({l})†", n - l)));
            }
            if op_norm(&observables[l]) > 1.0 + TOL_STRUCT {
                return Err(QcError::InvalidObservables(format!("A^({l}) has operator norm above 1")));
            }
        }
        Ok(Self { observables })
    }

    pub fn n_outcomes(&self) -> usize {
        self.observables.len()
    }

    pub fn get(&self, l: i64) -> &CMatrix {
        &self.observables[l.rem_euclid(self.observables.len() as i64) as usize]
    }

    pub fn observables(&self) -> &[CMatrix] {
        &self.observables
    }

    /// Whether every `A^(l)` is unitary and equals `(A^(1))^l`.
    pub fn is_unitary_power_family(&self, tol: f64) -> bool {
        let a1 = &self.observables[1];
        self.observables.iter().enumerate().all(|(l, a)| is_unitary(a, tol) && (a - mat_pow(a1, l as i64)).norm() < tol)
    }
}

pub fn observables_from_povm(p: &Povm) -> ObservableSet {
    let n = p.n_outcomes();
    let dim = p.dim();
    let observables = (0..n)
        .map(|l| {
            p.effects()
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(dim, dim), |acc, (k, e)| acc + e * root(n, ((l * k) % n) as f64))
        })
        .collect();
    ObservableSet { observables }
}

pub fn povm_from_observables(s: &ObservableSet) -> Result<Povm> {
    let n = s.n_outcomes();
    let dim = s.observables[0].nrows();
    let effects: Vec<CMatrix> = (0..n)
        .map(|k| {
            s.observables
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(dim, dim), |acc, (l, a)| acc + a * root(n, -(((l * k) % n) as f64)))
                / C64::new(n as f64, 0.0)
        })
        .collect();
    Povm::new(effects).map_err(|e| QcError::InvalidObservables(e.to_string()))
}

/// Whether `E_k E_k' = δ_{kk'} E_k` for all outcomes.
pub fn is_projective(p: &Povm, tol: f64) -> bool {
    let e = p.effects();
    (0..e.len()).all(|a| {
        (0..e.len()).all(|b| {
            let prod = &e[a] * &e[b];
            let want = if a == b { e[a].clone() } else { CMatrix::zeros(p.dim(), p.dim()) };
            (prod - want).norm() < tol
        })
    })
}

/// Party role in the ASTA scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    First,
    Second,
    Odd,
    Even,
}

impl Role {
    /// Role of party `i` (1-based).
    pub fn for_party(i: usize) -> Role {
        match i {
            1 => Role::First,
            2 => Role::Second,
            i if i % 2 == 1 => Role::Odd,
            _ => Role::Even,
        }
    }

    /// Exponent parameter `γ_m(x)`, `ζ_m(x)` or `θ_m(x)`.
    pub fn parameter(self, x: f64, m: usize) -> f64 {
        let m = m as f64;
        match self {
            Role::First => x / m - 1.0 / (2.0 * m),
            Role::Second => x / m,
            Role::Odd | Role::Even => (x - 1.0) / m,
        }
    }
}

impl std::str::FromStr for Role {
    type Err = QcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Role::First),
            "second" => Ok(Role::Second),
            "odd" => Ok(Role::Odd),
            "even" => Ok(Role::Even),
            _ => Err(QcError::InvalidArgument(format!("unknown role {s}"))),
        }
    }
}

/// Matrix form of the ideal observable: a weighted cyclic shift.
fn ideal_matrix(role: Role, x: f64, m: usize, d: usize) -> CMatrix {
    let p = role.parameter(x, m);
    let w = root(d, p);
    let wrap = root(d, (1.0 - d as f64) * p);
    let mut o = CMatrix::zeros(d, d);
    match role {
        Role::First | Role::Odd => {
            for i in 0..d - 1 {
                o[(i, i + 1)] = w;
            }
            o[(d - 1, 0)] = wrap;
        }
        Role::Second | Role::Even => {
            for i in 0..d - 1 {
                o[(i + 1, i)] = w;
            }
            o[(0, d - 1)] = wrap;
        }
    }
    o
}

pub fn fourier_matrix(d: usize) -> CMatrix {
    let s = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |i, j| root(d, ((i * j) % d) as f64) * s)
}

/// Spectral form `U F Ω F† U†` (and its role variants) of the ideal observable.
pub fn ideal_observable_spectral(role: Role, x: usize, m: usize, d: usize) -> Result<CMatrix> {
    check_ideal_args(x, m, d)?;
    let f = fourier_matrix(d);
    let omega = CMatrix::from_diagonal(&CVector::from_fn(d, |i, _| root(d, i as f64)));
    let p = role.parameter(x as f64, m);
    let phases = |sign: f64| CMatrix::from_diagonal(&CVector::from_fn(d, |j, _| root(d, sign * j as f64 * p)));
    let fwd = &f * &omega * f.adjoint();
    let bwd = f.adjoint() * &omega * &f;
    Ok(match role {
        Role::First => {
            let u = phases(-1.0);
            &u * fwd * u.adjoint()
        }
        Role::Second => {
            let v = phases(1.0);
            &v * bwd * v.adjoint()
        }
        Role::Odd => {
            let w = phases(-1.0);
            &w * fwd * w.adjoint()
        }
        Role::Even => {
            let w = phases(-1.0);
            w.adjoint() * bwd * &w
        }
    })
}

fn check_ideal_args(x: usize, m: usize, d: usize) -> Result<()> {
    check_dim(d)?;
    if m < 2 {
        return Err(QcError::InvalidArgument(format!("m = {m} must be at least 2")));
    }
    if x < 1 || x > m {
        return Err(QcError::InvalidArgument(format!("input {x} outside 1..={m}")));
    }
    Ok(())
}

/// Ideal observable of a party with the given role for input `x ∈ 1..=m`.
pub fn ideal_observable(role: Role, x: usize, m: usize, d: usize) -> Result<UnitaryObservable> {
    check_ideal_args(x, m, d)?;
    Ok(UnitaryObservable::trusted(d, ideal_matrix(role, x as f64, m, d)))
}

/// Ideal observable for any integer input, extended by `A_{x+m} = ω A_x`.
pub fn ideal_observable_periodic(role: Role, x: i64, m: usize, d: usize) -> Result<UnitaryObservable> {
    check_ideal_args(1, m, d)?;
    Ok(UnitaryObservable::trusted(d, ideal_matrix(role, x as f64, m, d)))
}

/// Ideal observables for all `N` parties, `obs[i][x−1]` for party `i+1`.
pub fn ideal_observables(n: usize, m: usize, d: usize) -> Result<Vec<Vec<UnitaryObservable>>> {
    (1..=n).map(|i| (1..=m).map(|x| ideal_observable(Role::for_party(i), x, m, d)).collect()).collect()
}

/// Unitary `W` with `W Z_d W† = O_{role,2}` and `W T_{d,m} W† = O_{role,3}`.
pub fn alignment_unitary(role: Role, d: usize, m: usize) -> Result<CMatrix> {
    check_dim(d)?;
    if m < 2 {
        return Err(QcError::InvalidArgument(format!("m = {m} must be at least 2")));
    }
    let (df, mf) = (d as f64, m as f64);
    let s = 1.0 / df.sqrt();
    let mut w = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let sign = if j == 0 { -s } else { s };
            let (fi, fj) = (i as f64, j as f64);
            let (row, t) = match role {
                Role::First => (i, -3.0 * fi / (2.0 * mf) + fi * fj + fj / 2.0),
                Role::Second => (d - 1 - i, -2.0 * fi / mf + fi * fj + fj / 2.0),
                Role::Odd => (i, -fi / mf + fi * fj + fj / 2.0),
                Role::Even => (d - 1 - i, -fi / mf + fi * fj + fj / 2.0),
            };
            w[(row, j)] = root(d, t % df) * sign;
        }
    }
    Ok(w)
}

/// Orthonormal eigenbasis of an observable with nondegenerate spectrum.
pub fn eigenbasis(obs: &UnitaryObservable) -> Result<Vec<Ket>> {
    let (vals, vecs) = unitary_eigen(obs.matrix());
    for w in vals.windows(2) {
        if (w[0] - w[1]).norm() < TOL_PHASE {
            return Err(QcError::DegenerateSpectrum("eigenvalues cluster within 1e-8".into()));
        }
    }
    if vals.len() > 1 && (vals[0] - vals[vals.len() - 1]).norm() < TOL_PHASE {
        return Err(QcError::DegenerateSpectrum("eigenvalues cluster within 1e-8".into()));
    }
    (0..vecs.ncols()).map(|j| Ket::normalized(vecs.column(j).into_owned())).collect()
}

fn check_orthonormal(basis: &[Ket]) -> Result<()> {
    let d = basis.len();
    if d == 0 || basis.iter().any(|k| k.dim() != d) {
        return Err(QcError::InvalidBasis(format!("expected {d} vectors of dimension {d}")));
    }
    for (a, ka) in basis.iter().enumerate() {
        for (b, kb) in basis.iter().enumerate() {
            let want = if a == b { 1.0 } else { 0.0 };
            if (ka.inner(kb) - C64::new(want, 0.0)).norm() > TOL_STRUCT {
                return Err(QcError::InvalidBasis("basis is not orthonormal".into()));
            }
        }
    }
    Ok(())
}

/// Largest deviation of `|⟨e_i|f_j⟩|²` from `1/d`.
pub fn mub_deviation(basis_a: &[Ket], basis_b: &[Ket]) -> Result<f64> {
    check_orthonormal(basis_a)?;
    check_orthonormal(basis_b)?;
    if basis_a.len() != basis_b.len() {
        return Err(QcError::InvalidBasis("bases differ in size".into()));
    }
    let inv = 1.0 / basis_a.len() as f64;
    Ok(basis_a
        .iter()
        .flat_map(|a| basis_b.iter().map(move |b| (a.inner(b).norm_sqr() - inv).abs()))
        .fold(0.0, f64::max))
}

pub fn mub_check(basis_a: &[Ket], basis_b: &[Ket], tol: f64) -> Result<bool> {
    Ok(mub_deviation(basis_a, basis_b)? < tol)
}

/// `|Tr(A^n)|` for each proper divisor `n < d` of `d`.
pub fn divisor_trace_report(obs: &UnitaryObservable) -> BTreeMap<usize, f64> {
    let d = obs.d();
    (1..d).filter(|n| d.is_multiple_of(*n)).map(|n| (n, obs.pow(n as i64).trace().norm())).collect()
}
