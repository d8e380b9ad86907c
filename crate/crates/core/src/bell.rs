//! Bell functionals in the correlator picture: ASTA, SATWAP and CHSH.
//!
//! A functional is a list of correlator terms `w · ⟨⊗_i A_{i,x_i}^{k_i}⟩`,
//! with inputs `x_i ∈ 0..m` (zero based) and powers taken mod `d`. Phases
//! from the periodic extension `A_{x+m} = ω A_x` are folded into the weights
//! when the functional is built.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{QcError, Result};
use crate::qcore::{check_dim, identity, root, tensor, CMatrix, Ket, State, UnitaryObservable, C64};
use crate::steering::Correlations;

/// Largest total Hilbert-space dimension for which Bell operators are built.
pub const MAX_OPERATOR_DIM: usize = 4096;
/// Largest number of deterministic strategies enumerated.
pub const MAX_STRATEGIES: u64 = 10_000_000;

const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Factor {
    pub input: usize,
    /// Power in `0..d`; zero stands for the identity.
    pub power: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellTerm {
    pub weight: C64,
    pub factors: Vec<Factor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellFunctional {
    n: usize,
    m: usize,
    d: usize,
    terms: Vec<BellTerm>,
}

impl BellFunctional {
    /// Builds a functional, merging terms with identical factors.
    pub fn new(n: usize, m: usize, d: usize, terms: Vec<BellTerm>) -> Result<Self> {
        check_dim(d)?;
        if n < 2 || m < 2 {
            return Err(QcError::InvalidArgument(format!("need N, m >= 2, got N={n}, m={m}")));
        }
        let mut merged: BTreeMap<Vec<Factor>, C64> = BTreeMap::new();
        for t in terms {
            if t.factors.len() != n {
                return Err(QcError::InvalidArgument(format!("term has {} factors, expected {n}", t.factors.len())));
            }
            let factors: Vec<Factor> = t
                .factors
                .iter()
                .map(|f| {
                    if f.input >= m {
                        return Err(QcError::InvalidArgument(format!("input {} out of range", f.input)));
                    }
                    Ok(Factor { input: f.input, power: f.power % d })
                })
                .collect::<Result<_>>()?;
            *merged.entry(factors).or_insert(C64::new(0.0, 0.0)) += t.weight;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, w)| w.norm() > 1e-15)
            .map(|(factors, weight)| BellTerm { weight, factors })
            .collect();
        Ok(Self { n, m, d, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[BellTerm] {
        &self.terms
    }

    /// Weight of `⟨⊗_i A_{i,x_i}^{k_i}⟩`, zero if absent.
    pub fn coefficient(&self, factors: &[(usize, usize)]) -> C64 {
        let key: Vec<Factor> = factors.iter().map(|&(input, power)| Factor { input, power: power % self.d }).collect();
        self.terms.iter().find(|t| t.factors == key).map(|t| t.weight).unwrap_or(C64::new(0.0, 0.0))
    }

    /// Largest mismatch between a term weight and the conjugate weight of its adjoint term.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.d;
        self.terms
            .iter()
            .map(|t| {
                let adj: Vec<(usize, usize)> = t.factors.iter().map(|f| (f.input, (d - f.power) % d)).collect();
                (self.coefficient(&adj) - t.weight.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn scaled(&self, s: f64) -> Self {
        let terms = self.terms.iter().map(|t| BellTerm { weight: t.weight * s, factors: t.factors.clone() }).collect();
        Self { terms, ..*self }
    }
}

/// Per party, the outcome `0..d` returned for each input.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DeterministicStrategy {
    pub outcomes: Vec<Vec<usize>>,
}

impl DeterministicStrategy {
    /// Value of `f` when every `A_{i,x}` is replaced by `ω^{a_{i,x}}`.
    pub fn value(&self, f: &BellFunctional) -> f64 {
        let d = f.d;
        f.terms
            .iter()
            .map(|t| {
                let e: usize = t.factors.iter().enumerate().map(|(i, fc)| fc.power * self.outcomes[i][fc.input]).sum();
                (t.weight * root(d, (e % d) as f64)).re
            })
            .sum()
    }
}

/// `a_k = ω^{(2k−d)/4m} / (2cos(π/2m))`.
pub fn asta_a_k(k: usize, m: usize, d: usize) -> C64 {
    root(d, (2.0 * k as f64 - d as f64) / (4.0 * m as f64)) / (2.0 * (PI / (2.0 * m as f64)).cos())
}

/// SATWAP coefficient `ω^{(2k−d)/8} / √2`.
pub fn satwap_a_k(k: usize, d: usize) -> C64 {
    root(d, (2.0 * k as f64 - d as f64) / 8.0) / 2f64.sqrt()
}

/// Maps a one-based, possibly out-of-range input to `(input, phase exponent)`
/// using `A_{x+m} = ω A_x`.
fn wrap_input(x: i64, m: usize) -> (usize, i64) {
    let q = (x - 1).div_euclid(m as i64);
    let r = (x - 1).rem_euclid(m as i64) as usize;
    (r, q)
}

fn all_alphas(n: usize, m: usize) -> Vec<Vec<i64>> {
    let count = m.pow((n - 1) as u32);
    (0..count)
        .map(|mut c| {
            let mut al = vec![1i64; n];
            for j in (0..n - 1).rev() {
                al[j] = (c % m) as i64 + 1;
                c /= m;
            }
            al
        })
        .collect()
}

/// Input and signed power of party `i ≥ 2` (one based) in an ASTA term.
fn asta_tail(al: &[i64], i: usize, k: i64) -> (i64, i64) {
    let x = al[i - 2] + al[i - 1] - 1;
    let p = if i.is_multiple_of(2) { -k } else { k };
    (x, p)
}

/// The ASTA functional for `N` parties, `m` inputs and `d` outcomes.
pub fn asta_functional(n: usize, m: usize, d: usize) -> Result<BellFunctional> {
    check_dim(d)?;
    if n < 2 || m < 2 {
        return Err(QcError::InvalidArgument(format!("need N, m >= 2, got N={n}, m={m}")));
    }
    let dd = d as i64;
    let mut terms = Vec::new();
    for al in all_alphas(n, m) {
        for k in 1..dd {
            let a = asta_a_k(k as usize, m, d);
            for (x1, w) in [(al[0], a), (al[0] + 1, a.conj())] {
                let mut phase = 0i64;
                let mut factors = Vec::with_capacity(n);
                let (r, q) = wrap_input(x1, m);
                phase += q * k;
                factors.push(Factor { input: r, power: k as usize });
                for i in 2..=n {
                    let (x, p) = asta_tail(&al, i, k);
                    let (r, q) = wrap_input(x, m);
                    phase += q * p;
                    factors.push(Factor { input: r, power: p.rem_euclid(dd) as usize });
                }
                terms.push(BellTerm { weight: w * root(d, phase.rem_euclid(dd) as f64), factors });
            }
        }
    }
    BellFunctional::new(n, m, d, terms)
}

/// Maximal quantum value `m^{N−1}(d−1)` of [`asta_functional`].
pub fn asta_quantum_bound(n: usize, m: usize, d: usize) -> f64 {
    (m as f64).powi(n as i32 - 1) * (d as f64 - 1.0)
}

/// The closed-form value `m^N(d−1)` as usually quoted for this family.
/// [`asta_quantum_bound`] is the value the functional actually attains.
pub fn asta_quantum_bound_stated(n: usize, m: usize, d: usize) -> f64 {
    (m as f64).powi(n as i32) * (d as f64 - 1.0)
}

/// `½[3cot(π/4d) − cot(3π/4d)] − 2`.
pub fn satwap_classical_bound(d: usize) -> f64 {
    let d = d as f64;
    let cot = |x: f64| 1.0 / x.tan();
    0.5 * (3.0 * cot(PI / (4.0 * d)) - cot(3.0 * PI / (4.0 * d))) - 2.0
}

/// CHSH `⟨A₀B₀⟩+⟨A₀B₁⟩+⟨A₁B₀⟩−⟨A₁B₁⟩`, optionally scaled by `1/√2`.
pub fn chsh_functional(scaled: bool) -> BellFunctional {
    let s = if scaled { 1.0 / 2f64.sqrt() } else { 1.0 };
    let term = |x: usize, y: usize, sign: f64| BellTerm {
        weight: C64::new(sign * s, 0.0),
        factors: vec![Factor { input: x, power: 1 }, Factor { input: y, power: 1 }],
    };
    let terms = vec![term(0, 0, 1.0), term(0, 1, 1.0), term(1, 0, 1.0), term(1, 1, -1.0)];
    BellFunctional::new(2, 2, 2, terms).expect("static CHSH terms")
}

fn check_observables(f: &BellFunctional, obs: &[Vec<UnitaryObservable>]) -> Result<Vec<usize>> {
    if obs.len() != f.n {
        return Err(QcError::InvalidArgument(format!("expected {} parties, got {}", f.n, obs.len())));
    }
    let mut dims = Vec::with_capacity(f.n);
    for (i, party) in obs.iter().enumerate() {
        if party.len() != f.m {
            return Err(QcError::InvalidArgument(format!(
                "party {i} has {} observables, expected {}",
                party.len(),
                f.m
            )));
        }
        let dim = party[0].dim();
        if party.iter().any(|a| a.dim() != dim || a.d() != f.d) {
            return Err(QcError::InvalidArgument(format!("party {i} has inconsistent observables")));
        }
        dims.push(dim);
    }
    let total: usize = dims.iter().product();
    if total > MAX_OPERATOR_DIM {
        return Err(QcError::CapacityExceeded(format!("operator dimension {total} exceeds {MAX_OPERATOR_DIM}")));
    }
    Ok(dims)
}

/// Powers `A_{i,x}^k` for every party, input and `k ∈ 0..d`.
fn power_table(obs: &[Vec<UnitaryObservable>], d: usize) -> Vec<Vec<Vec<CMatrix>>> {
    obs.iter().map(|party| party.iter().map(|a| (0..d as i64).map(|k| a.pow(k)).collect()).collect()).collect()
}

/// The Bell operator `Σ w ⊗_i A_{i,x_i}^{k_i}`.
pub fn bell_operator(f: &BellFunctional, obs: &[Vec<UnitaryObservable>]) -> Result<CMatrix> {
    let dims = check_observables(f, obs)?;
    let total: usize = dims.iter().product();
    let pw = power_table(obs, f.d);
    let mut b = CMatrix::zeros(total, total);
    for t in &f.terms {
        let mats: Vec<CMatrix> =
            t.factors.iter().enumerate().map(|(i, fc)| pw[i][fc.input][fc.power].clone()).collect();
        b += tensor(&mats)? * t.weight;
    }
    Ok(b)
}

/// Complex expectation of the Bell operator; the imaginary part is roundoff.
pub fn evaluate_bell_complex(f: &BellFunctional, state: &State, obs: &[Vec<UnitaryObservable>]) -> Result<C64> {
    let b = bell_operator(f, obs)?;
    if state.dim() != b.nrows() {
        return Err(QcError::InvalidArgument(format!(
            "state dimension {} does not match operator dimension {}",
            state.dim(),
            b.nrows()
        )));
    }
    Ok(state.expectation(&b))
}

pub fn evaluate_bell(f: &BellFunctional, state: &State, obs: &[Vec<UnitaryObservable>]) -> Result<f64> {
    Ok(evaluate_bell_complex(f, state, obs)?.re)
}

/// Evaluates a bipartite functional on a probability table via
/// `⟨A_x^k ⊗ B_y^l⟩ = Σ ω^{ka+lb} p(a,b|x,y)`.
pub fn evaluate_on_correlations(f: &BellFunctional, c: &Correlations) -> Result<f64> {
    if f.n != 2 {
        return Err(QcError::InvalidArgument("correlation tables are bipartite".into()));
    }
    if c.n_inputs_a() != f.m || c.n_inputs_b() != f.m || c.n_outcomes_a() != f.d || c.n_outcomes_b() != f.d {
        return Err(QcError::InvalidArgument("correlation table shape does not match functional".into()));
    }
    let mut v = C64::new(0.0, 0.0);
    for t in &f.terms {
        let (a, b) = (t.factors[0], t.factors[1]);
        v += t.weight * c.correlator(a.input, b.input, a.power as i64, b.power as i64);
    }
    Ok(v.re)
}

fn decode(mut s: u64, n: usize, m: usize, d: usize) -> DeterministicStrategy {
    let len = n * m;
    let mut flat = vec![0usize; len];
    for j in (0..len).rev() {
        flat[j] = (s % d as u64) as usize;
        s /= d as u64;
    }
    DeterministicStrategy { outcomes: flat.chunks(m).map(|c| c.to_vec()).collect() }
}

/// Exact local bound by enumerating all `d^{N·m}` deterministic strategies.
///
/// Strategies are indexed so that index order is lexicographic order; among
/// maximizers (within 1e-12) the smallest one is returned.
pub fn classical_bound_bruteforce(f: &BellFunctional) -> Result<(f64, DeterministicStrategy)> {
    let exponent = (f.n * f.m) as f64;
    let count_f = (f.d as f64).powf(exponent);
    if count_f > MAX_STRATEGIES as f64 {
        return Err(QcError::CapacityExceeded(format!("{}^{} strategies exceed {MAX_STRATEGIES}", f.d, f.n * f.m)));
    }
    let count = (f.d as u64).pow((f.n * f.m) as u32);
    let roots: Vec<C64> = (0..f.d).map(|j| root(f.d, j as f64)).collect();
    let (n, m, d) = (f.n, f.m, f.d);
    // Flattened factor slots `party*m + input` for fast evaluation.
    let compiled: Vec<(C64, Vec<(usize, usize)>)> = f
        .terms
        .iter()
        .map(|t| {
            let slots = t
                .factors
                .iter()
                .enumerate()
                .filter(|(_, fc)| fc.power != 0)
                .map(|(i, fc)| (i * m + fc.input, fc.power))
                .collect();
            (t.weight, slots)
        })
        .collect();
    let value = |s: u64| -> f64 {
        let mut flat = [0usize; 64];
        let len = n * m;
        let mut r = s;
        for j in (0..len).rev() {
            flat[j] = (r % d as u64) as usize;
            r /= d as u64;
        }
        compiled
            .iter()
            .map(|(w, slots)| {
                let e: usize = slots.iter().map(|&(j, p)| p * flat[j]).sum();
                (w * roots[e % d]).re
            })
            .sum()
    };
    if n * m > 64 {
        return Err(QcError::CapacityExceeded("too many measurement slots".into()));
    }
    let best = (0..count).into_par_iter().map(value).reduce(|| f64::NEG_INFINITY, f64::max);
    let idx = (0..count).into_par_iter().find_first(|&s| value(s) >= best - TIE_TOL).expect("maximizer exists");
    Ok((best, decode(idx, n, m, d)))
}

/// Residuals of the sum-of-squares decompositions of `β − B` for the ASTA functional.
#[derive(Debug, Clone, PartialEq)]
pub struct SosReport {
    /// Frobenius norm of `β·1 − B − (½ΣP†P + (m^{N−2}/2)ΣR†R)`.
    pub main: f64,
    /// Same residual for the party-`n` variants, `n = 2..=N`.
    pub variants: Vec<(usize, f64)>,
}

impl SosReport {
    pub fn max(&self) -> f64 {
        self.variants.iter().map(|v| v.1).fold(self.main, f64::max)
    }
}

/// `(μ, ν, τ)` of the auxiliary SOS terms for `α ∈ 1..=m−2`.
pub fn sos_coefficients(alpha: usize, k: usize, m: usize, d: usize) -> (C64, C64, C64) {
    let mf = m as f64;
    let c = 2.0 * (PI / (2.0 * mf)).cos();
    let e = (d as f64 - 2.0 * k as f64) / (2.0 * mf);
    if alpha + 3 <= m {
        let a = alpha as f64;
        let s0 = (PI * a / mf).sin();
        let s1 = (PI * (a + 1.0) / mf).sin();
        let mu = root(d, (a + 1.0) * e) / c * (PI / mf).sin() / (s0 * s1).sqrt();
        let nu = -root(d, e) / c * (s1 / s0).sqrt();
        let tau = C64::new((s0 / s1).sqrt() / c, 0.0);
        (mu, nu, tau)
    } else {
        let s = (2.0 * (PI / mf).cos()).sqrt();
        let mu = -root(d, -(k as f64)) * root(d, -e) / (c * s);
        let nu = -root(d, e) / (c * s);
        (mu, nu, C64::new(s / c, 0.0))
    }
}

/// Access to `A_{i,x}^k` for one-based party `i`, any integer `x` and signed `k`.
struct Periodic<'a> {
    obs: &'a [Vec<UnitaryObservable>],
    m: usize,
    d: usize,
}

impl Periodic<'_> {
    fn pow(&self, i: usize, x: i64, k: i64) -> CMatrix {
        let (r, q) = wrap_input(x, self.m);
        self.obs[i - 1][r].pow(k) * root(self.d, (q * k).rem_euclid(self.d as i64) as f64)
    }
}

fn check_sos_args(n: usize, m: usize, d: usize, obs: &[Vec<UnitaryObservable>]) -> Result<Vec<usize>> {
    let f = BellFunctional { n, m, d, terms: Vec::new() };
    check_dim(d)?;
    if n < 2 || m < 2 {
        return Err(QcError::InvalidArgument(format!("need N, m >= 2, got N={n}, m={m}")));
    }
    check_observables(&f, obs)
}

/// One `P`-term operator `Ā_n ⊗ (others)`: `n = 1` is the main decomposition.
fn p_operator(p: &Periodic, n_parties: usize, al: &[i64], k: i64, n: usize) -> Result<CMatrix> {
    let (m, d) = (p.m, p.d);
    let a = asta_a_k(k as usize, m, d);
    let mut fs = Vec::with_capacity(n_parties);
    if n == 1 {
        fs.push(p.pow(1, al[0], k) * a + p.pow(1, al[0] + 1, k) * a.conj());
    } else {
        fs.push(p.pow(1, al[0], k));
    }
    for i in 2..=n_parties {
        let (x, pw) = asta_tail(al, i, k);
        if i == n {
            if n % 2 == 1 {
                fs.push(p.pow(i, x, k) * a + p.pow(i, x + 1, k) * a.conj());
            } else {
                fs.push(p.pow(i, x, -k) * a + p.pow(i, x - 1, -k) * a.conj());
            }
        } else {
            fs.push(p.pow(i, x, pw));
        }
    }
    tensor(&fs)
}

/// `R`-term acting on party `n` (one based), identity elsewhere.
fn r_operator(p: &Periodic, dims: &[usize], alpha: usize, k: i64, n: usize) -> Result<CMatrix> {
    let (mu, nu, tau) = sos_coefficients(alpha, k as usize, p.m, p.d);
    let a = alpha as i64;
    let r = if n % 2 == 1 {
        p.pow(n, 2, k) * mu.conj() + p.pow(n, a + 2, k) * nu.conj() + p.pow(n, a + 3, k) * tau
    } else {
        p.pow(n, 2, -k) * mu + p.pow(n, a + 2, -k) * nu + p.pow(n, a + 3, -k) * tau
    };
    let fs: Vec<CMatrix> =
        dims.iter().enumerate().map(|(i, &di)| if i + 1 == n { r.clone() } else { identity(di) }).collect();
    tensor(&fs)
}

fn sos_gap(p: &Periodic, dims: &[usize], n_parties: usize, n: usize, b: &CMatrix, beta: f64) -> Result<f64> {
    let total: usize = dims.iter().product();
    let id = identity(total);
    let mut rhs = CMatrix::zeros(total, total);
    for al in all_alphas(n_parties, p.m) {
        for k in 1..p.d as i64 {
            let pm = &id - p_operator(p, n_parties, &al, k, n)?;
            rhs += if n == 1 { pm.adjoint() * &pm } else { &pm * pm.adjoint() } * C64::new(0.5, 0.0);
        }
    }
    let w = 0.5 * (p.m as f64).powi(n_parties as i32 - 2);
    for alpha in 1..p.m.saturating_sub(1) {
        for k in 1..p.d as i64 {
            let r = r_operator(p, dims, alpha, k, if n == 1 { 1 } else { n })?;
            rhs += r.adjoint() * &r * C64::new(w, 0.0);
        }
    }
    Ok((id * C64::new(beta, 0.0) - b - rhs).norm())
}

/// Checks the SOS decompositions of `m^{N−1}(d−1)·1 − B` for the given observables.
pub fn sos_residual(n: usize, m: usize, d: usize, obs: &[Vec<UnitaryObservable>]) -> Result<SosReport> {
    let dims = check_sos_args(n, m, d, obs)?;
    let f = asta_functional(n, m, d)?;
    let b = bell_operator(&f, obs)?;
    let beta = asta_quantum_bound(n, m, d);
    let p = Periodic { obs, m, d };
    let main = sos_gap(&p, &dims, n, 1, &b, beta)?;
    let variants = (2..=n).map(|k| Ok((k, sos_gap(&p, &dims, n, k, &b, beta)?))).collect::<Result<_>>()?;
    Ok(SosReport { main, variants })
}

/// `‖(Ā ⊗ ⊗A^{±k})|ψ⟩ − |ψ⟩‖` for every `P`-term followed by `‖R|ψ⟩‖` for every `R`-term.
///
/// All vanish when `ψ` attains the quantum bound.
pub fn sos_relation_residuals(
    n: usize,
    m: usize,
    d: usize,
    obs: &[Vec<UnitaryObservable>],
    psi: &Ket,
) -> Result<Vec<f64>> {
    let dims = check_sos_args(n, m, d, obs)?;
    let total: usize = dims.iter().product();
    if psi.dim() != total {
        return Err(QcError::InvalidArgument("state dimension mismatch".into()));
    }
    let p = Periodic { obs, m, d };
    let v = psi.amps();
    let mut out = Vec::new();
    for al in all_alphas(n, m) {
        for k in 1..d as i64 {
            let op = p_operator(&p, n, &al, k, 1)?;
            out.push((op * v - v).norm());
        }
    }
    for alpha in 1..m.saturating_sub(1) {
        for k in 1..d as i64 {
            let r = r_operator(&p, &dims, alpha, k, 1)?;
            out.push((r * v).norm());
        }
    }
    Ok(out)
}

/// Largest entry of [`sos_relation_residuals`].
pub fn sos_relation_residual(n: usize, m: usize, d: usize, obs: &[Vec<UnitaryObservable>], psi: &Ket) -> Result<f64> {
    Ok(sos_relation_residuals(n, m, d, obs, psi)?.into_iter().fold(0.0, f64::max))
}
