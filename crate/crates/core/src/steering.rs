//! Steering functionals with trusted Alice, assemblages and correlation tables.
//!
//! Bob's `d`-outcome POVM `{N_{b|y}}` enters through its Fourier transform
//! `B_{k|y} = Σ_b ω^{kb} N_{b|y}`. All functionals have the form
//!
//! `W = Σ_y w_y Σ_{k=1}^{d−1} ⟨A_y^k ⊗ B_{k|y}⟩ + Σ_{k=1}^{d−1} δ_k ⟨A_0^k⟩`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{QcError, Result};
use crate::measurements::Povm;
use crate::qcore::{
    hermitian_eigen, hermitian_part, identity, kron, make_xd, make_zd, max_eigenvalue, partial_trace, root, CMatrix,
    SchmidtCoeffs, State, UnitaryObservable, C64, TOL_STRUCT,
};

/// Largest number of deterministic Bob responses enumerated by [`lhs_bound_oracle`].
pub const MAX_RESPONSES: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringFunctional {
    d: usize,
    alice: Vec<UnitaryObservable>,
    delta: Vec<C64>,
    weights: Vec<f64>,
}

impl SteeringFunctional {
    pub fn new(alice: Vec<UnitaryObservable>, delta: Vec<C64>, weights: Vec<f64>) -> Result<Self> {
        let first = alice.first().ok_or_else(|| QcError::InvalidArgument("no observables".into()))?;
        let d = first.d();
        if alice.iter().any(|a| a.d() != d || a.dim() != first.dim()) {
            return Err(QcError::InvalidArgument("observables differ in dimension".into()));
        }
        if delta.len() != d || weights.len() != alice.len() {
            return Err(QcError::InvalidArgument("coefficient lengths do not match".into()));
        }
        if weights.iter().any(|&w| w.is_nan() || w < 0.0) {
            return Err(QcError::InvalidArgument("weights must be nonnegative".into()));
        }
        for k in 1..d {
            if (delta[d - k] - delta[k].conj()).norm() > 1e-10 {
                return Err(QcError::InvalidArgument("δ_{d−k} must equal δ_k*".into()));
            }
        }
        Ok(Self { d, alice, delta, weights })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_inputs(&self) -> usize {
        self.alice.len()
    }

    pub fn alice(&self) -> &[UnitaryObservable] {
        &self.alice
    }

    pub fn delta(&self) -> &[C64] {
        &self.delta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Alice's marginal operator `Σ_{k≥1} δ_k A_0^k`.
    fn marginal(&self) -> CMatrix {
        let a0 = &self.alice[0];
        (1..self.d).fold(CMatrix::zeros(a0.dim(), a0.dim()), |acc, k| acc + a0.pow(k as i64) * self.delta[k])
    }

    /// The Alice-side operator paired with outcome `b` of input `y`:
    /// `F_{b|y} = w_y Σ_{k≥1} ω^{kb} A_y^k`.
    pub fn alice_operator(&self, y: usize, b: usize) -> CMatrix {
        let a = &self.alice[y];
        let d = self.d;
        (1..d).fold(CMatrix::zeros(a.dim(), a.dim()), |acc, k| {
            acc + a.pow(k as i64) * (root(d, ((k * b) % d) as f64) * self.weights[y])
        })
    }
}

/// `Σ_y Σ_{k≥1} ⟨A_y^k ⊗ B_{k|y}⟩` with unit weights and no marginal.
pub fn gi_steering_functional(alice: Vec<UnitaryObservable>) -> Result<SteeringFunctional> {
    let d = alice.first().map(|a| a.d()).unwrap_or(0);
    let n = alice.len();
    SteeringFunctional::new(alice, vec![C64::new(0.0, 0.0); d], vec![1.0; n])
}

/// Quantum bound `N(d−1)` of [`gi_steering_functional`].
pub fn gi_quantum_bound(n_inputs: usize, d: usize) -> f64 {
    (n_inputs * (d - 1)) as f64
}

/// `γ = d / Σ_{i≠j} α_i/α_j` and `δ_k = −(γ/d) Σ_{i≠j} (α_i/α_j) ω^{k(d−j)}`.
pub fn alpha_coefficients(alpha: &SchmidtCoeffs) -> (f64, Vec<C64>) {
    let a = alpha.alpha();
    let d = a.len();
    let pairs = || (0..d).flat_map(move |i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)));
    let s: f64 = pairs().map(|(i, j)| a[i] / a[j]).sum();
    let gamma = d as f64 / s;
    let mut delta: Vec<C64> = (0..d)
        .map(|k| {
            pairs().map(|(i, j)| root(d, ((k * (d - j)) % d) as f64) * (a[i] / a[j])).sum::<C64>() * (-gamma / d as f64)
        })
        .collect();
    delta[0] = C64::new(-1.0, 0.0);
    (gamma, delta)
}

/// The functional with `A_0 = Z_d`, `A_1 = X_d`, weights `(1, γ)` and marginal `δ_k`.
pub fn alpha_steering_functional(alpha: &SchmidtCoeffs) -> Result<SteeringFunctional> {
    let d = alpha.d();
    let (gamma, delta) = alpha_coefficients(alpha);
    SteeringFunctional::new(vec![make_zd(d)?, make_xd(d)?], delta, vec![1.0, gamma])
}

fn bob_fourier(p: &Povm, k: usize) -> CMatrix {
    let d = p.n_outcomes();
    p.effects()
        .iter()
        .enumerate()
        .fold(CMatrix::zeros(p.dim(), p.dim()), |acc, (b, e)| acc + e * root(d, ((k * b) % d) as f64))
}

fn check_bob(f: &SteeringFunctional, bob: &[Povm]) -> Result<usize> {
    if bob.len() != f.n_inputs() {
        return Err(QcError::InvalidArgument(format!("expected {} Bob POVMs, got {}", f.n_inputs(), bob.len())));
    }
    let db = bob[0].dim();
    if bob.iter().any(|p| p.n_outcomes() != f.d || p.dim() != db) {
        return Err(QcError::InvalidArgument("Bob POVMs must share dimension and have d outcomes".into()));
    }
    Ok(db)
}

/// The operator `Σ_y w_y Σ_k A_y^k ⊗ B_{k|y} + Σ_k δ_k A_0^k ⊗ 1`.
pub fn steering_operator(f: &SteeringFunctional, bob: &[Povm]) -> Result<CMatrix> {
    let db = check_bob(f, bob)?;
    let da = f.alice[0].dim();
    let mut op = kron(&f.marginal(), &identity(db));
    for (y, (a, p)) in f.alice.iter().zip(bob).enumerate() {
        for k in 1..f.d {
            op += kron(&a.pow(k as i64), &bob_fourier(p, k)) * C64::new(f.weights[y], 0.0);
        }
    }
    debug_assert_eq!(op.nrows(), da * db);
    Ok(op)
}

pub fn evaluate_steering(f: &SteeringFunctional, state: &State, bob: &[Povm]) -> Result<f64> {
    let op = steering_operator(f, bob)?;
    if state.dim() != op.nrows() {
        return Err(QcError::InvalidArgument(format!("state dimension {} does not match {}", state.dim(), op.nrows())));
    }
    Ok(state.expectation(&op).re)
}

/// Unnormalized conditional states `σ_{b|y}` on Alice's side, indexed `[y][b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage {
    sigma: Vec<Vec<CMatrix>>,
}

impl Assemblage {
    pub fn new(sigma: Vec<Vec<CMatrix>>) -> Result<Self> {
        let first =
            sigma.first().and_then(|s| s.first()).ok_or_else(|| QcError::InvalidArgument("empty assemblage".into()))?;
        let n = first.nrows();
        let mut reduced: Option<CMatrix> = None;
        for (y, row) in sigma.iter().enumerate() {
            let mut sum = CMatrix::zeros(n, n);
            for (b, s) in row.iter().enumerate() {
                if s.nrows() != n || s.ncols() != n {
                    return Err(QcError::InvalidArgument(format!("σ_{{{b}|{y}}} has the wrong shape")));
                }
                if (s - s.adjoint()).norm() > TOL_STRUCT || hermitian_eigen(&hermitian_part(s)).0[0] < -TOL_STRUCT {
                    return Err(QcError::InvalidArgument(format!("σ_{{{b}|{y}}} is not positive")));
                }
                sum += s;
            }
            if (sum.trace().re - 1.0).abs() > TOL_STRUCT {
                return Err(QcError::InvalidArgument(format!("input {y} has total trace {}", sum.trace().re)));
            }
            match &reduced {
                None => reduced = Some(sum),
                Some(r) if (r - &sum).norm() > TOL_STRUCT => {
                    return Err(QcError::InvalidArgument("assemblage is signalling".into()))
                }
                _ => {}
            }
        }
        Ok(Self { sigma })
    }

    pub fn get(&self, b: usize, y: usize) -> &CMatrix {
        &self.sigma[y][b]
    }

    pub fn n_inputs(&self) -> usize {
        self.sigma.len()
    }

    pub fn n_outcomes(&self, y: usize) -> usize {
        self.sigma[y].len()
    }

    pub fn dim(&self) -> usize {
        self.sigma[0][0].nrows()
    }

    /// Alice's reduced state `Σ_b σ_{b|y}`.
    pub fn reduced_state(&self) -> CMatrix {
        self.sigma[0].iter().fold(CMatrix::zeros(self.dim(), self.dim()), |acc, s| acc + s)
    }
}

/// `σ_{b|y} = Tr_B[(1 ⊗ N_{b|y}) ρ]`.
pub fn assemblage_from(state: &State, bob: &[Povm]) -> Result<Assemblage> {
    let db = bob.first().ok_or_else(|| QcError::InvalidArgument("no Bob POVMs".into()))?.dim();
    if bob.iter().any(|p| p.dim() != db) || !state.dim().is_multiple_of(db) {
        return Err(QcError::InvalidArgument("Bob dimension does not divide the state dimension".into()));
    }
    let da = state.dim() / db;
    let rho = state.density();
    let sigma = bob
        .iter()
        .map(|p| {
            p.effects()
                .iter()
                .map(|e| partial_trace(&(kron(&identity(da), e) * &rho), &[da, db], &[0]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Assemblage::new(sigma)
}

/// `Σ_{b,y} Tr(F_{b|y} σ_{b|y})` with `F` indexed `[y][b]`.
pub fn evaluate_on_assemblage(f: &[Vec<CMatrix>], a: &Assemblage) -> Result<f64> {
    if f.len() != a.n_inputs() || f.iter().enumerate().any(|(y, row)| row.len() != a.n_outcomes(y)) {
        return Err(QcError::InvalidArgument("functional shape does not match assemblage".into()));
    }
    let mut v = C64::new(0.0, 0.0);
    for (y, row) in f.iter().enumerate() {
        for (b, fb) in row.iter().enumerate() {
            v += (fb * a.get(b, y)).trace();
        }
    }
    Ok(v.re)
}

/// The `F_{b|y}` that reproduce `f` on any assemblage.
///
/// The marginal `Σ δ_k A_0^k` is attached to input 0, since `Σ_b σ_{b|0} = ρ_A`.
pub fn functional_operators(f: &SteeringFunctional) -> Vec<Vec<CMatrix>> {
    let marg = f.marginal();
    (0..f.n_inputs())
        .map(|y| {
            (0..f.d).map(|b| if y == 0 { f.alice_operator(y, b) + &marg } else { f.alice_operator(y, b) }).collect()
        })
        .collect()
}

fn lhs_max<F>(n_inputs: usize, n_outcomes: usize, op: F) -> Result<f64>
where
    F: Fn(&[usize]) -> CMatrix + Sync,
{
    let count_f = (n_outcomes as f64).powi(n_inputs as i32);
    if count_f > MAX_RESPONSES as f64 {
        return Err(QcError::CapacityExceeded(format!("{n_outcomes}^{n_inputs} responses exceed {MAX_RESPONSES}")));
    }
    let count = (n_outcomes as u64).pow(n_inputs as u32);
    Ok((0..count)
        .into_par_iter()
        .map(|mut s| {
            let mut resp = vec![0usize; n_inputs];
            for r in resp.iter_mut().rev() {
                *r = (s % n_outcomes as u64) as usize;
                s /= n_outcomes as u64;
            }
            max_eigenvalue(&hermitian_part(&op(&resp)))
        })
        .reduce(|| f64::NEG_INFINITY, f64::max))
}

/// Exact LHS bound: the largest eigenvalue of `Σ_y F_{b(y)|y}` over deterministic responses.
pub fn lhs_bound_oracle(f: &SteeringFunctional) -> Result<f64> {
    let ops = functional_operators(f);
    lhs_max(f.n_inputs(), f.d, |resp| {
        resp.iter()
            .enumerate()
            .fold(CMatrix::zeros(f.alice[0].dim(), f.alice[0].dim()), |acc, (y, &b)| acc + &ops[y][b])
    })
}

/// LHS bound of an assemblage functional given directly by `F_{b|y}`.
pub fn lhs_bound_assemblage(f: &[Vec<CMatrix>]) -> Result<f64> {
    let n_out = f.first().map(Vec::len).unwrap_or(0);
    if n_out == 0 || f.iter().any(|row| row.len() != n_out) {
        return Err(QcError::InvalidArgument("F must have the same number of outcomes per input".into()));
    }
    let dim = f[0][0].nrows();
    lhs_max(f.len(), n_out, |resp| {
        resp.iter().enumerate().fold(CMatrix::zeros(dim, dim), |acc, (y, &b)| acc + &f[y][b])
    })
}

fn leon_matrix(alpha: &[f64], gamma: f64, a: usize) -> Vec<Vec<f64>> {
    let d = alpha.len();
    let sa: f64 = alpha.iter().sum();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let mut v = gamma;
                    if i == j {
                        v -= gamma * sa / alpha[i];
                        if i == a {
                            v += d as f64;
                        }
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// `d·max_a q_a² + γ[(Σq)² − (Σα) Σ q_a²/α_a]` at `q_i = |η_i|`.
pub fn leon_objective(alpha: &SchmidtCoeffs, q: &[f64]) -> f64 {
    let a = alpha.alpha();
    let d = a.len();
    let (gamma, _) = alpha_coefficients(alpha);
    let norm2: f64 = q.iter().map(|x| x * x).sum();
    let q: Vec<f64> = q.iter().map(|x| x.abs() / norm2.sqrt()).collect();
    let top = q.iter().map(|x| x * x).fold(0.0, f64::max);
    let sum: f64 = q.iter().sum();
    let sa: f64 = a.iter().sum();
    let weighted: f64 = q.iter().zip(a).map(|(x, ai)| x * x / ai).sum();
    d as f64 * top + gamma * (sum * sum - sa * weighted)
}

/// Multi-start ascent on the LHS bound of [`alpha_steering_functional`].
///
/// Starts are drawn uniformly on the simplex of `|η_i|²`; each is improved by
/// shifted power steps on the quadratic form of the currently largest component.
pub fn alpha_classical_bound(alpha: &SchmidtCoeffs, restarts: usize, seed: u64) -> f64 {
    let a = alpha.alpha();
    let d = a.len();
    let (gamma, _) = alpha_coefficients(alpha);
    let mats: Vec<Vec<Vec<f64>>> = (0..d).map(|i| leon_matrix(a, gamma, i)).collect();
    let shift: f64 = mats.iter().flatten().flatten().map(|x| x.abs()).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _ in 0..restarts {
        let e: Vec<f64> = (0..d).map(|_| Exp1.sample(&mut rng)).collect();
        let s: f64 = e.iter().sum();
        starts.push(e.iter().map(|x| (x / s).sqrt()).collect());
    }
    starts
        .into_iter()
        .map(|mut q| {
            let mut best = leon_objective(alpha, &q);
            for _ in 0..2000 {
                let top = (0..d).max_by(|&i, &j| q[i].partial_cmp(&q[j]).unwrap()).unwrap();
                let m = &mats[top];
                let mut next: Vec<f64> = (0..d)
                    .map(|i| shift * q[i] + (0..d).map(|j| m[i][j] * q[j]).sum::<f64>())
                    .map(|x| x.max(0.0))
                    .collect();
                let nrm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
                if nrm == 0.0 {
                    break;
                }
                next.iter_mut().for_each(|x| *x /= nrm);
                let step: f64 = next.iter().zip(&q).map(|(x, y)| (x - y).abs()).sum();
                q = next;
                best = best.max(leon_objective(alpha, &q));
                if step < 1e-15 {
                    break;
                }
            }
            best
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Exact maximum of the same objective: `max_a λ_max(M_a)`.
pub fn alpha_classical_bound_exact(alpha: &SchmidtCoeffs) -> f64 {
    let a = alpha.alpha();
    let d = a.len();
    let (gamma, _) = alpha_coefficients(alpha);
    (0..d)
        .map(|i| {
            let m = leon_matrix(a, gamma, i);
            max_eigenvalue(&CMatrix::from_fn(d, d, |r, c| C64::new(m[r][c], 0.0)))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Joint distribution `p(a,b|x,y)` of a bipartite scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlations {
    shape: [usize; 4],
    p: Vec<f64>,
}

impl Correlations {
    /// `shape = [inputs A, inputs B, outcomes A, outcomes B]`, `p` filled by `f(a, b, x, y)`.
    pub fn from_fn<F: Fn(usize, usize, usize, usize) -> f64>(shape: [usize; 4], f: F) -> Result<Self> {
        let [mx, my, da, db] = shape;
        let mut p = Vec::with_capacity(mx * my * da * db);
        for x in 0..mx {
            for y in 0..my {
                for a in 0..da {
                    for b in 0..db {
                        p.push(f(a, b, x, y));
                    }
                }
            }
        }
        Self::new(shape, p)
    }

    pub fn new(shape: [usize; 4], p: Vec<f64>) -> Result<Self> {
        if shape.contains(&0) || p.len() != shape.iter().product::<usize>() {
            return Err(QcError::InvalidArgument("probability table has the wrong size".into()));
        }
        if p.iter().any(|&v| v < -TOL_STRUCT) {
            return Err(QcError::InvalidArgument("negative probability".into()));
        }
        let c = Self { shape, p };
        for x in 0..shape[0] {
            for y in 0..shape[1] {
                let s: f64 = (0..shape[2])
                    .flat_map(|a| (0..shape[3]).map(move |b| (a, b)))
                    .map(|(a, b)| c.get(a, b, x, y))
                    .sum();
                if (s - 1.0).abs() > TOL_STRUCT {
                    return Err(QcError::InvalidArgument(format!("p(·,·|{x},{y}) sums to {s}")));
                }
            }
        }
        let ns = c.no_signalling_residual();
        if ns > TOL_STRUCT {
            return Err(QcError::InvalidArgument(format!("signalling residual {ns:.3e}")));
        }
        Ok(c)
    }

    /// Nonlocal box with `p = 1/2` whenever `a ⊕ b = x·y`.
    pub fn pr_box() -> Self {
        Self::from_fn([2, 2, 2, 2], |a, b, x, y| if (a ^ b) == (x & y) { 0.5 } else { 0.0 }).expect("PR box is valid")
    }

    pub fn n_inputs_a(&self) -> usize {
        self.shape[0]
    }

    pub fn n_inputs_b(&self) -> usize {
        self.shape[1]
    }

    pub fn n_outcomes_a(&self) -> usize {
        self.shape[2]
    }

    pub fn n_outcomes_b(&self) -> usize {
        self.shape[3]
    }

    pub fn get(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        let [_, my, da, db] = self.shape;
        self.p[((x * my + y) * da + a) * db + b]
    }

    pub fn marginal_a(&self, a: usize, x: usize, y: usize) -> f64 {
        (0..self.shape[3]).map(|b| self.get(a, b, x, y)).sum()
    }

    pub fn marginal_b(&self, b: usize, x: usize, y: usize) -> f64 {
        (0..self.shape[2]).map(|a| self.get(a, b, x, y)).sum()
    }

    /// Largest change of a marginal under a change of the other party's input.
    pub fn no_signalling_residual(&self) -> f64 {
        let [mx, my, da, db] = self.shape;
        let mut r = 0.0f64;
        for x in 0..mx {
            for a in 0..da {
                for y in 1..my {
                    r = r.max((self.marginal_a(a, x, y) - self.marginal_a(a, x, 0)).abs());
                }
            }
        }
        for y in 0..my {
            for b in 0..db {
                for x in 1..mx {
                    r = r.max((self.marginal_b(b, x, y) - self.marginal_b(b, 0, y)).abs());
                }
            }
        }
        r
    }

    /// `⟨A_x^k ⊗ B_y^l⟩ = Σ_{a,b} ω_A^{ka} ω_B^{lb} p(a,b|x,y)`.
    pub fn correlator(&self, x: usize, y: usize, k: i64, l: i64) -> C64 {
        let (da, db) = (self.shape[2], self.shape[3]);
        let mut v = C64::new(0.0, 0.0);
        for a in 0..da {
            for b in 0..db {
                let ea = (k * a as i64).rem_euclid(da as i64) as f64;
                let eb = (l * b as i64).rem_euclid(db as i64) as f64;
                v += root(da, ea) * root(db, eb) * self.get(a, b, x, y);
            }
        }
        v
    }
}

/// All correlators `⟨A_x^k ⊗ B_y^l⟩`, indexed `[x][y][k][l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationTensor {
    pub values: Vec<Vec<Vec<Vec<C64>>>>,
}

pub fn fourier_expectations(c: &Correlations) -> ExpectationTensor {
    let [mx, my, da, db] = c.shape;
    let values = (0..mx)
        .map(|x| {
            (0..my)
                .map(|y| (0..da).map(|k| (0..db).map(|l| c.correlator(x, y, k as i64, l as i64)).collect()).collect())
                .collect()
        })
        .collect();
    ExpectationTensor { values }
}

/// Inverse transform `p(a,b|x,y) = (1/d_A d_B) Σ_{k,l} ω^{−ka−lb} ⟨A_x^k ⊗ B_y^l⟩`.
pub fn correlations_from_expectations(e: &ExpectationTensor) -> Result<Correlations> {
    let mx = e.values.len();
    let my = e.values.first().map(Vec::len).unwrap_or(0);
    let da = e.values.first().and_then(|v| v.first()).map(Vec::len).unwrap_or(0);
    let db = e.values.first().and_then(|v| v.first()).and_then(|v| v.first()).map(Vec::len).unwrap_or(0);
    Correlations::from_fn([mx, my, da, db], |a, b, x, y| {
        let mut v = C64::new(0.0, 0.0);
        for k in 0..da {
            for l in 0..db {
                v += e.values[x][y][k][l] * root(da, -(((k * a) % da) as f64)) * root(db, -(((l * b) % db) as f64));
            }
        }
        v.re / (da * db) as f64
    })
}

/// `p(a,b|x,y) = Tr[(M_{a|x} ⊗ N_{b|y}) ρ]`.
pub fn correlations_from(state: &State, alice: &[Povm], bob: &[Povm]) -> Result<Correlations> {
    let (fa, fb) = match (alice.first(), bob.first()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(QcError::InvalidArgument("no measurements".into())),
    };
    let shape = [alice.len(), bob.len(), fa.n_outcomes(), fb.n_outcomes()];
    if alice.iter().any(|p| p.n_outcomes() != shape[2] || p.dim() != fa.dim())
        || bob.iter().any(|p| p.n_outcomes() != shape[3] || p.dim() != fb.dim())
        || fa.dim() * fb.dim() != state.dim()
    {
        return Err(QcError::InvalidArgument("measurement shapes do not match the state".into()));
    }
    let rho = state.density();
    Correlations::from_fn(shape, |a, b, x, y| (kron(&alice[x].effects()[a], &bob[y].effects()[b]) * &rho).trace().re)
}

/// Largest `‖(A_y^k ⊗ B_{k|y}) ρ − ρ‖_F` over inputs and `k = 1..d−1`.
pub fn saturation_residual(f: &SteeringFunctional, state: &State, bob: &[Povm]) -> Result<f64> {
    let db = check_bob(f, bob)?;
    let rho = state.density();
    if rho.nrows() != f.alice[0].dim() * db {
        return Err(QcError::InvalidArgument("state dimension mismatch".into()));
    }
    let mut worst = 0.0f64;
    for (a, p) in f.alice.iter().zip(bob) {
        for k in 1..f.d {
            let op = kron(&a.pow(k as i64), &bob_fourier(p, k));
            worst = worst.max((op * &rho - &rho).norm());
        }
    }
    Ok(worst)
}

/// Residuals of the relations satisfied at maximal violation of [`alpha_steering_functional`]:
/// `max_k ‖(A_0^k ⊗ B_{k|0})ψ − ψ‖` and `‖Σ_k [γ A_1^k ⊗ B_{k|1} + δ_k A_0^k ⊗ 1]ψ − ψ‖`.
pub fn alpha_relation_residuals(alpha: &SchmidtCoeffs, state: &State, bob: &[Povm]) -> Result<(f64, f64)> {
    let f = alpha_steering_functional(alpha)?;
    let db = check_bob(&f, bob)?;
    let rho = state.density();
    if rho.nrows() != f.d * db {
        return Err(QcError::InvalidArgument("state dimension mismatch".into()));
    }
    let mut first = 0.0f64;
    for k in 1..f.d {
        let op = kron(&f.alice[0].pow(k as i64), &bob_fourier(&bob[0], k));
        first = first.max((op * &rho - &rho).norm());
    }
    let mut op = kron(&f.marginal(), &identity(db));
    for k in 1..f.d {
        op += kron(&f.alice[1].pow(k as i64), &bob_fourier(&bob[1], k)) * C64::new(f.weights[1], 0.0);
    }
    let second = (op * &rho - &rho).norm();
    Ok((first, second))
}
