//! Genuine incompatibility, self-testing relations, canonical alignment and robustness.

use std::str::FromStr;

use crate::bell::sos_relation_residuals;
use crate::error::{QcError, Result};
use crate::qcore::{
    check_dim, hermitian_eigen, hw_matrix, identity, kron, make_maxent, make_zd, mat_pow, root, unitary_eigen, CMatrix,
    CVector, Ket, SchmidtCoeffs, State, UnitaryObservable, C64,
};
use crate::steering::alpha_coefficients;

const RANK_CUT: f64 = 1e-8;
/// Largest deficit `ε` for which robustness bounds are asserted.
pub const ROBUSTNESS_REGIME: f64 = 0.05;

fn commutator_map(obs: &[CMatrix]) -> Result<CMatrix> {
    let first = obs.first().ok_or_else(|| QcError::InvalidArgument("empty observable set".into()))?;
    let d = first.nrows();
    if obs.iter().any(|a| a.nrows() != d || a.ncols() != d) {
        return Err(QcError::InvalidArgument("observables differ in dimension".into()));
    }
    let id = identity(d);
    let mut stacked = CMatrix::zeros(obs.len() * d * d, d * d);
    for (y, a) in obs.iter().enumerate() {
        // vec(AP − PA) = (1 ⊗ A − Aᵀ ⊗ 1) vec(P), column-major vec
        let block = kron(&id, a) - kron(&a.transpose(), &id);
        stacked.view_mut((y * d * d, 0), (d * d, d * d)).copy_from(&block);
    }
    Ok(stacked)
}

/// Basis of the joint commutant `{P : [P, A_y] = 0 ∀y}`.
pub fn commutant_basis(obs: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let stacked = commutator_map(obs)?;
    let d = obs[0].nrows();
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = RANK_CUT * top;
    let mut out = Vec::new();
    for (j, &s) in svd.singular_values.iter().enumerate() {
        if top == 0.0 || s <= cut {
            let v = v_t.row(j).adjoint();
            out.push(CMatrix::from_fn(d, d, |r, c| v[c * d + r]));
        }
    }
    // rows of v_t beyond the number of singular values belong to the null space as well
    for j in svd.singular_values.len()..v_t.nrows() {
        let v = v_t.row(j).adjoint();
        out.push(CMatrix::from_fn(d, d, |r, c| v[c * d + r]));
    }
    Ok(out)
}

/// Dimension of the joint commutant; one exactly when the set acts irreducibly.
pub fn commutant_dimension(obs: &[UnitaryObservable]) -> Result<usize> {
    let mats: Vec<CMatrix> = obs.iter().map(|a| a.matrix().clone()).collect();
    Ok(commutant_basis(&mats)?.len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GiReport {
    pub commutant_dimension: usize,
    pub is_gi: bool,
    /// Projector onto a common invariant subspace, present when not GI.
    pub block_witness: Option<CMatrix>,
}

fn witness_from(basis: &[CMatrix]) -> Option<CMatrix> {
    let d = basis.first()?.nrows();
    let id = identity(d);
    for p in basis {
        for h in [(p + p.adjoint()) * C64::new(0.5, 0.0), (p - p.adjoint()) * C64::new(0.0, -0.5)] {
            let h = &h - &id * (h.trace() / C64::new(d as f64, 0.0));
            let scale = h.norm();
            if scale < 1e-6 {
                continue;
            }
            let h = h / C64::new(scale, 0.0);
            let (vals, vecs) = hermitian_eigen(&h);
            let top = vals[d - 1];
            let mut proj = CMatrix::zeros(d, d);
            for (j, &v) in vals.iter().enumerate() {
                if top - v < 1e-6 {
                    let col = vecs.column(j);
                    proj += col * col.adjoint();
                }
            }
            return Some(proj);
        }
    }
    None
}

pub fn is_genuinely_incompatible(obs: &[UnitaryObservable]) -> Result<GiReport> {
    let mats: Vec<CMatrix> = obs.iter().map(|a| a.matrix().clone()).collect();
    genuinely_incompatible_matrices(&mats)
}

/// As [`is_genuinely_incompatible`] for arbitrary square matrices.
pub fn genuinely_incompatible_matrices(obs: &[CMatrix]) -> Result<GiReport> {
    let basis = commutant_basis(obs)?;
    let dim = basis.len();
    let block_witness = if dim > 1 { witness_from(&basis) } else { None };
    Ok(GiReport { commutant_dimension: dim, is_gi: dim == 1, block_witness })
}

/// Largest `‖[P, A_y]‖_F`.
pub fn witness_commutator_residual(p: &CMatrix, obs: &[CMatrix]) -> f64 {
    obs.iter().map(|a| (p * a - a * p).norm()).fold(0.0, f64::max)
}

/// The five-dimensional triple whose pairs are not GI but whose union is.
pub fn gi_triple_d5() -> Vec<UnitaryObservable> {
    let d = 5;
    let w = |t: f64| root(d, t);
    let h = C64::new(0.5, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut a0 = CMatrix::zeros(d, d);
    a0[(0, 0)] = (one + w(1.0)) * h;
    a0[(0, 1)] = (one - w(1.0)) * h;
    a0[(1, 0)] = (one - w(1.0)) * h;
    a0[(1, 1)] = (one + w(1.0)) * h;
    a0[(2, 2)] = w(2.0);
    a0[(3, 3)] = w(3.0);
    a0[(4, 4)] = w(4.0);

    let mut a1 = CMatrix::zeros(d, d);
    a1[(0, 0)] = one;
    a1[(1, 1)] = (w(2.0) + w(1.0)) * h;
    a1[(1, 2)] = (w(2.0) - w(1.0)) * h;
    a1[(2, 1)] = (w(2.0) - w(1.0)) * h;
    a1[(2, 2)] = (w(2.0) + w(1.0)) * h;
    a1[(3, 3)] = w(3.0);
    a1[(4, 4)] = w(4.0);

    let w3 = root(3, 1.0);
    let f1 = w(2.0) + w(3.0) + w(4.0);
    let f2 = w(2.0) + w3 * w3 * w(3.0) + w3 * w(4.0);
    let f3 = w(2.0) + w3 * w(3.0) + w3 * w3 * w(4.0);
    let third = C64::new(1.0 / 3.0, 0.0);
    let mut a2 = CMatrix::zeros(d, d);
    a2[(0, 0)] = one;
    a2[(1, 1)] = w(1.0);
    let circ = [[f1, f2, f3], [f3, f1, f2], [f2, f3, f1]];
    for (r, row) in circ.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            a2[(2 + r, 2 + c)] = v * third;
        }
    }
    [a0, a1, a2].into_iter().map(|m| UnitaryObservable::new(d, m).expect("unitary fixture")).collect()
}

/// Four-outcome pair sharing the invariant blocks `{0,1}` and `{2,3}`.
pub fn block_pair_d4() -> Vec<UnitaryObservable> {
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let a1 = CMatrix::from_diagonal(&CVector::from_vec(vec![one, i, -one, -i]));
    let s = 1.0 / 2f64.sqrt();
    let ket = |v: [f64; 4]| CVector::from_fn(4, |r, _| C64::new(v[r] * s, 0.0));
    let proj = |v: CVector| &v * v.adjoint();
    let a2 = proj(ket([1.0, -1.0, 0.0, 0.0])) + proj(ket([1.0, 1.0, 0.0, 0.0])) * i - proj(ket([0.0, 0.0, 1.0, -1.0]))
        + proj(ket([0.0, 0.0, 1.0, 1.0]));
    vec![
        UnitaryObservable::new(4, a1).expect("unitary fixture"),
        UnitaryObservable::new(4, a2).expect("unitary fixture"),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    BellAsta,
    SteeringGi,
    SteeringAlpha(SchmidtCoeffs),
}

impl FromStr for Scenario {
    type Err = QcError;

    /// `bell-asta`, `steering-gi` or `steering-alpha:<α_0>,<α_1>,...`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bell-asta" => Ok(Scenario::BellAsta),
            "steering-gi" => Ok(Scenario::SteeringGi),
            _ => {
                if let Some(rest) = s.strip_prefix("steering-alpha:") {
                    let w = rest
                        .split(',')
                        .map(|t| t.trim().parse::<f64>().map_err(|e| QcError::InvalidArgument(e.to_string())))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(Scenario::SteeringAlpha(SchmidtCoeffs::normalized(&w)?))
                } else {
                    Err(QcError::InvalidArgument(format!("unknown scenario '{s}'")))
                }
            }
        }
    }
}

/// Residuals `‖O|ψ⟩ − |ψ⟩‖` of the relations implied by maximal violation.
///
/// For `BellAsta`, `observables` holds every party's inputs. For the steering
/// scenarios it holds `[alice, bob]`, with Bob's outcomes read off as powers
/// of his observables.
pub fn selftest_residuals(
    scenario: &Scenario,
    state: &Ket,
    observables: &[Vec<UnitaryObservable>],
) -> Result<Vec<f64>> {
    match scenario {
        Scenario::BellAsta => {
            let n = observables.len();
            let m = observables.first().map(Vec::len).unwrap_or(0);
            let d = observables.first().and_then(|v| v.first()).map(|a| a.d()).unwrap_or(0);
            sos_relation_residuals(n, m, d, observables, state)
        }
        Scenario::SteeringGi | Scenario::SteeringAlpha(_) => {
            if observables.len() != 2 || observables[0].len() != observables[1].len() || observables[0].is_empty() {
                return Err(QcError::InvalidArgument("expected [alice, bob] with equal input counts".into()));
            }
            let (alice, bob) = (&observables[0], &observables[1]);
            let d = alice[0].d();
            let (da, db) = (alice[0].dim(), bob[0].dim());
            if state.dim() != da * db {
                return Err(QcError::InvalidArgument("state dimension mismatch".into()));
            }
            let v = state.amps();
            let mut out = Vec::new();
            match scenario {
                Scenario::SteeringGi => {
                    for (a, b) in alice.iter().zip(bob.iter()) {
                        for k in 1..d as i64 {
                            let op = kron(&a.pow(k), &b.pow(k));
                            out.push((op * v - v).norm());
                        }
                    }
                }
                Scenario::SteeringAlpha(alpha) => {
                    if alice.len() != 2 || alpha.d() != d {
                        return Err(QcError::InvalidArgument("alpha scenario needs two inputs of dimension d".into()));
                    }
                    let (gamma, delta) = alpha_coefficients(alpha);
                    for k in 1..d as i64 {
                        let op = kron(&alice[0].pow(k), &bob[0].pow(k));
                        out.push((op * v - v).norm());
                    }
                    let mut op = CMatrix::zeros(da * db, da * db);
                    for (k, dk) in delta.iter().enumerate().skip(1) {
                        op += kron(&alice[1].pow(k as i64), &bob[1].pow(k as i64)) * C64::new(gamma, 0.0);
                        op += kron(&alice[0].pow(k as i64), &identity(db)) * *dk;
                    }
                    out.push((op * v - v).norm());
                }
                Scenario::BellAsta => unreachable!(),
            }
            Ok(out)
        }
    }
}

/// Target of [`canonical_fidelity`].
#[derive(Debug, Clone, PartialEq)]
pub enum IdealState {
    MaxEnt,
    Schmidt(SchmidtCoeffs),
    /// The two-party GHZ state, equal to `MaxEnt`.
    Ghz,
}

impl IdealState {
    fn coefficients(&self, d: usize) -> Result<Vec<f64>> {
        match self {
            IdealState::MaxEnt | IdealState::Ghz => Ok(vec![1.0 / (d as f64).sqrt(); d]),
            IdealState::Schmidt(a) if a.d() == d => Ok(a.alpha().to_vec()),
            IdealState::Schmidt(a) => Err(QcError::InvalidArgument(format!("α has length {}, expected {d}", a.d()))),
        }
    }
}

/// Eigenvectors `v_i` of `b` for the eigenvalues closest to `ω^{−i}`, matched greedily
/// (ties to the lowest index). Degenerate spectra cannot be aligned.
pub fn align_to_conjugate_clock(b: &CMatrix, d: usize) -> Result<Vec<CVector>> {
    check_dim(d)?;
    if b.nrows() != d {
        return Err(QcError::CannotAlign(format!("observable has dimension {}, expected {d}", b.nrows())));
    }
    let (vals, vecs) = unitary_eigen(b);
    for i in 0..d {
        for j in i + 1..d {
            if (vals[i] - vals[j]).norm() < 1e-8 {
                return Err(QcError::CannotAlign("degenerate spectrum".into()));
            }
        }
    }
    let mut used = vec![false; d];
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let target = root(d, -(i as f64));
        let mut best = None;
        for j in 0..d {
            if used[j] {
                continue;
            }
            let dist = (vals[j] - target).norm();
            match best {
                Some((_, bd)) if dist >= bd => {}
                _ => best = Some((j, dist)),
            }
        }
        let (j, _) = best.expect("unused eigenvector");
        used[j] = true;
        out.push(vecs.column(j).into_owned());
    }
    Ok(out)
}

/// `V = Σ_i |i⟩⟨v_i|` from the aligned eigenvectors.
fn alignment_matrix(vs: &[CVector]) -> CMatrix {
    let d = vs.len();
    CMatrix::from_fn(d, d, |r, c| vs[r][c].conj())
}

/// Maximum of `u† M u` over unit-modulus `u`, by coordinate ascent from several seeds.
fn max_phase_form(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let value = |u: &[C64]| -> f64 {
        let v = CVector::from_column_slice(u);
        (v.adjoint() * m * &v)[(0, 0)].re
    };
    let mut seeds: Vec<Vec<C64>> = Vec::new();
    let (_, vecs) = hermitian_eigen(m);
    let lead = vecs.column(d - 1);
    seeds.push(lead.iter().map(|z| if z.norm() > 1e-14 { z / z.norm() } else { C64::new(1.0, 0.0) }).collect());
    for g in 0..24 {
        let mut u = vec![C64::new(1.0, 0.0); d];
        if d > 1 {
            u[1] = root(24, g as f64);
        }
        seeds.push(u);
    }
    let mut best = f64::NEG_INFINITY;
    for mut u in seeds {
        for _ in 0..500 {
            let mut change = 0.0f64;
            for j in 0..d {
                // optimal phase for u_j given the others
                let s: C64 = (0..d).filter(|&i| i != j).map(|i| m[(j, i)] * u[i]).sum();
                if s.norm() > 1e-300 {
                    let nu = s / s.norm();
                    change = change.max((nu - u[j]).norm());
                    u[j] = nu;
                }
            }
            if change < 1e-13 {
                break;
            }
        }
        best = best.max(value(&u));
    }
    best
}

/// Fidelity with the ideal state after aligning Bob's `B_0` eigenbasis to `Z_d*`,
/// maximized over the remaining diagonal phases on Bob's side.
pub fn canonical_fidelity(state: &State, b0: &UnitaryObservable, ideal: &IdealState) -> Result<f64> {
    let d = b0.d();
    let db = b0.dim();
    if db != d || state.dim() != d * db {
        return Err(QcError::InvalidArgument(format!("expected a {d}x{d} bipartite state")));
    }
    let c = ideal.coefficients(d)?;
    let v = alignment_matrix(&align_to_conjugate_clock(b0.matrix(), d)?);
    let u = kron(&identity(d), &v);
    match state {
        State::Pure(psi) => {
            let p = &u * psi.amps();
            let s: f64 = (0..d).map(|i| c[i] * p[i * d + i].norm()).sum();
            Ok(s * s)
        }
        State::Mixed(rho) => {
            let r = &u * rho.matrix() * u.adjoint();
            let m = CMatrix::from_fn(d, d, |i, j| r[(i * d + i, j * d + j)] * (c[i] * c[j]));
            Ok(max_phase_form(&m).clamp(0.0, 1.0))
        }
    }
}

/// Right-hand sides `(√(2(3d+1))·(2ε)^{1/4}, √d(√(2ε) + 2√(2(3d+1))(2ε)^{1/4}))`.
pub fn robustness_rhs(d: usize, eps: f64) -> (f64, f64) {
    let e = eps.max(0.0);
    let df = d as f64;
    let s = (2.0 * (3.0 * df + 1.0)).sqrt() * (2.0 * e).powf(0.25);
    (s, df.sqrt() * ((2.0 * e).sqrt() + 2.0 * s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    pub d: usize,
    pub l: i64,
    pub epsilon: f64,
    pub state_distance: f64,
    /// `‖U_B B_1^k U_B† − (X Z^{−l})^k‖_2` for `k = 0..d−1`.
    pub meas_distances_b1: Vec<f64>,
    /// `‖U_B B_2^k U_B† − Z^{−k}‖_2` for `k = 0..d−1`.
    pub meas_distances_b2: Vec<f64>,
    pub bound_state: f64,
    pub bound_meas: f64,
    pub in_regime: bool,
}

impl RobustnessReport {
    pub fn meas_distances(&self) -> impl Iterator<Item = f64> + '_ {
        self.meas_distances_b1.iter().chain(&self.meas_distances_b2).copied()
    }

    pub fn bounds_hold(&self) -> bool {
        self.state_distance <= self.bound_state + 1e-12 && self.meas_distances().all(|m| m <= self.bound_meas + 1e-12)
    }

    /// Whether the bounds hold; outside `ε ≤ 0.05` the report is not asserted.
    pub fn verify(&self) -> Result<bool> {
        if !self.in_regime {
            return Err(QcError::OutOfRegime(format!("ε = {:.3e} exceeds {ROBUSTNESS_REGIME}", self.epsilon)));
        }
        Ok(self.bounds_hold())
    }
}

/// Robustness quantities for Alice's `A_1 = X Z^l`, `A_2 = Z` and Bob's `B_1`, `B_2` on `ψ`.
pub fn robustness_report(d: usize, l: i64, psi: &Ket, b1: &CMatrix, b2: &CMatrix) -> Result<RobustnessReport> {
    check_dim(d)?;
    if psi.dim() != d * d || b1.nrows() != d || b2.nrows() != d {
        return Err(QcError::InvalidArgument(format!("expected a {d}x{d} realization")));
    }
    let a1 = hw_matrix(d, 1, l);
    let a2 = make_zd(d)?.into_matrix();
    let mut w = C64::new(0.0, 0.0);
    for k in 1..d as i64 {
        w += psi.expectation(&kron(&mat_pow(&a1, k), &mat_pow(b1, k)));
        w += psi.expectation(&kron(&mat_pow(&a2, k), &mat_pow(b2, k)));
    }
    let epsilon = (2.0 * (d as f64 - 1.0) - w.re).max(0.0);

    let vs = align_to_conjugate_clock(b2, d)?;
    // fix each phase so that the |i⟩|i⟩ amplitude of the aligned state is nonnegative
    let amps = psi.amps();
    let mut ub = CMatrix::zeros(d, d);
    for (i, v) in vs.iter().enumerate() {
        let b_i = CVector::from_fn(d, |j, _| amps[i * d + j]);
        let c = v.dotc(&b_i);
        let phase = if c.norm() > 1e-14 { c.conj() / c.norm() } else { C64::new(1.0, 0.0) };
        for j in 0..d {
            ub[(i, j)] = v[j].conj() * phase;
        }
    }
    let aligned = kron(&identity(d), &ub) * amps;
    let state_distance = (aligned - make_maxent(d)?.amps()).norm();
    let ideal_b1 = hw_matrix(d, 1, -l);
    let ideal_b2 = make_zd(d)?.into_matrix().adjoint();
    let dist = |b: &CMatrix, ideal: &CMatrix| -> Vec<f64> {
        (0..d as i64).map(|k| (&ub * mat_pow(b, k) * ub.adjoint() - mat_pow(ideal, k)).norm()).collect()
    };
    let (bound_state, bound_meas) = robustness_rhs(d, epsilon);
    Ok(RobustnessReport {
        d,
        l,
        epsilon,
        state_distance,
        meas_distances_b1: dist(b1, &ideal_b1),
        meas_distances_b2: dist(b2, &ideal_b2),
        bound_state,
        bound_meas,
        in_regime: epsilon <= ROBUSTNESS_REGIME,
    })
}

/// The state `cosθ|φ⁺⟩ + sinθ|0⟩|1⟩` with ideal Bob `B_1 = X Z^{−l}`, `B_2 = Z*`.
pub fn robustness_empirical(d: usize, l: i64, theta: f64) -> Result<RobustnessReport> {
    check_dim(d)?;
    let phi = make_maxent(d)?;
    let perp = Ket::basis(d * d, 1)?;
    let psi = Ket::normalized(phi.amps() * C64::new(theta.cos(), 0.0) + perp.amps() * C64::new(theta.sin(), 0.0))?;
    let b1 = hw_matrix(d, 1, -l);
    let b2 = make_zd(d)?.into_matrix().adjoint();
    robustness_report(d, l, &psi, &b1, &b2)
}
