use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use qcert::bell::{
    asta_functional, asta_quantum_bound, asta_quantum_bound_stated, chsh_functional, classical_bound_bruteforce,
    evaluate_bell, satwap_classical_bound, sos_relation_residual, sos_residual, BellFunctional,
};
use qcert::certify::{
    block_pair_d4, canonical_fidelity, gi_triple_d5, is_genuinely_incompatible, robustness_empirical,
    selftest_residuals, witness_commutator_residual, IdealState, Scenario, ROBUSTNESS_REGIME,
};
use qcert::error::QcError;
use qcert::measurements::{eigenbasis, ideal_observables, mub_deviation, Povm};
use qcert::povm::{extremality_check, hw_covariant_povm, partial_entanglement_povm};
use qcert::qcore::{
    identity, make_ghz, make_maxent, make_schmidt_state, make_xd, make_zd, CMatrix, CVector, DensityMatrix, Ket,
    SchmidtCoeffs, State, UnitaryObservable, C64,
};
use qcert::randomness::certified_guessing_probability;
use qcert::steering::{
    alpha_classical_bound, alpha_classical_bound_exact, alpha_relation_residuals, alpha_steering_functional,
    evaluate_steering, gi_quantum_bound, gi_steering_functional, lhs_bound_oracle, saturation_residual,
    SteeringFunctional,
};

use crate::opfile::{format_matrices, parse_complex, read_matrices, read_vector};
use crate::report::Report;
use crate::{Command, FixtureName, GiExpectation, PovmKind, RandomnessKind, SteeringMode};

type Res<T> = std::result::Result<T, String>;

fn lib<T>(r: qcert::error::Result<T>) -> Res<T> {
    r.map_err(|e| e.to_string())
}

pub fn run(cmd: &Command, seed: u64) -> Res<Report> {
    match cmd {
        Command::BellVerify { n, m, d, tol } => bell_verify(*n, *m, *d, *tol),
        Command::SteeringVerify { mode, d, alpha, obs, restarts } => {
            steering_verify(*mode, *d, alpha.as_deref(), obs, *restarts, seed)
        }
        Command::ClassicalBound { scenario } => classical_bound(scenario, seed),
        Command::GiCheck { obs_file, d, expect } => gi_check(obs_file, *d, *expect),
        Command::MubCheck { d, bases_file, tol } => mub_check(*d, bases_file.as_deref(), *tol),
        Command::PovmVerify { kind, d, alpha, nu, tol } => {
            povm_verify(*kind, *d, alpha.as_deref(), nu.as_deref(), *tol)
        }
        Command::Randomness { kind, d, alpha, tol } => randomness(*kind, *d, alpha.as_deref(), *tol),
        Command::Robustness { d, theta, l } => robustness(*d, *theta, *l),
        Command::SelftestCheck { scenario } => selftest_check(scenario),
        Command::ExportFixture { .. } => Err("export-fixture does not produce a report".into()),
    }
}

fn schmidt(alpha: Option<&[f64]>, d: usize) -> Res<SchmidtCoeffs> {
    match alpha {
        Some(w) => {
            let a = lib(SchmidtCoeffs::normalized(w))?;
            if a.d() != d {
                return Err(format!("--alpha has {} entries, expected {d}", a.d()));
            }
            Ok(a)
        }
        None => lib(SchmidtCoeffs::uniform(d)),
    }
}

fn conj_povms(obs: &[UnitaryObservable]) -> Res<Vec<Povm>> {
    obs.iter().map(|a| lib(Povm::from_observable(&a.conj()))).collect()
}

fn observables_from_file(path: &Path, d: Option<usize>) -> Res<Vec<UnitaryObservable>> {
    read_matrices(path)?
        .into_iter()
        .map(|m| {
            let d = d.unwrap_or(m.nrows());
            lib(UnitaryObservable::new(d, m))
        })
        .collect()
}

fn generic_fiducial(d: usize) -> Res<Ket> {
    lib(Ket::normalized(CVector::from_fn(d, |i, _| C64::from_polar(1.0 + 0.3 * i as f64, 0.7 * (i * i) as f64 + 0.25))))
}

fn diag_state(alpha: &SchmidtCoeffs) -> Res<DensityMatrix> {
    let d = alpha.d();
    lib(DensityMatrix::new(CMatrix::from_diagonal(&CVector::from_iterator(
        d,
        alpha.alpha().iter().map(|a| C64::new(a * a, 0.0)),
    ))))
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max)
}

fn bell_verify(n: usize, m: usize, d: usize, tol: f64) -> Res<Report> {
    let mut r = Report::new("bell-verify");
    r.input("n", n);
    r.input("m", m);
    r.input("d", d);
    r.input("tol", tol);
    let f = lib(asta_functional(n, m, d))?;
    let obs = lib(ideal_observables(n, m, d))?;
    let psi = lib(make_ghz(n, d))?;
    let q = lib(evaluate_bell(&f, &State::Pure(psi.clone()), &obs))?;
    let bound = asta_quantum_bound(n, m, d);
    r.value("quantum_value", q);
    r.value("quantum_bound", bound);
    r.value("quantum_bound_stated", asta_quantum_bound_stated(n, m, d));
    r.assert_close("quantum_value_attains_bound", q, bound, 1e-9);

    match classical_bound_bruteforce(&f) {
        Ok((c, s)) => {
            r.value("classical_bound", c);
            r.value("classical_strategy", json!(s.outcomes));
            r.assert("classical_below_quantum", c < bound - 1e-9, json!({ "classical": c, "quantum": bound }));
            if n == 2 && m == 2 {
                let closed = satwap_classical_bound(d);
                r.value("classical_bound_closed_form", closed);
                r.assert_close("classical_matches_closed_form", c, closed, 1e-9);
            }
        }
        Err(QcError::CapacityExceeded(msg)) => {
            r.value("classical_bound", Value::Null);
            r.value("classical_bound_skipped", msg);
        }
        Err(e) => return Err(e.to_string()),
    }

    let sos = lib(sos_residual(n, m, d, &obs))?;
    r.value("sos_residual", sos.main);
    r.assert_below("sos_residual", sos.main, tol);
    if !sos.variants.is_empty() {
        let mut variants = Map::new();
        for (k, v) in &sos.variants {
            variants.insert(k.to_string(), json!(v));
        }
        r.value("sos_variant_residuals", Value::Object(variants));
        r.assert_below("sos_variant_residuals", sos.variants.iter().map(|x| x.1).fold(0.0, f64::max), tol);
    }
    let rel = lib(sos_relation_residual(n, m, d, &obs, &psi))?;
    r.value("relation_residual", rel);
    r.assert_below("relation_residual", rel, tol);
    Ok(r)
}

fn steering_verify(
    mode: SteeringMode,
    d: usize,
    alpha: Option<&[f64]>,
    obs: &str,
    restarts: usize,
    seed: u64,
) -> Res<Report> {
    let mut r = Report::new("steering-verify");
    r.input("d", d);
    match mode {
        SteeringMode::Gi => {
            r.input("mode", "gi");
            r.input("obs", obs);
            let alice = if obs == "zx" {
                vec![lib(make_zd(d))?, lib(make_xd(d))?]
            } else {
                observables_from_file(Path::new(obs), Some(d))?
            };
            let dim = alice[0].dim();
            let f = lib(gi_steering_functional(alice.clone()))?;
            let bob = conj_povms(&alice)?;
            let psi = State::Pure(lib(make_maxent(dim))?);
            let q = lib(evaluate_steering(&f, &psi, &bob))?;
            let bound = gi_quantum_bound(alice.len(), d);
            let lhs = lib(lhs_bound_oracle(&f))?;
            r.value("quantum_value", q);
            r.value("quantum_bound", bound);
            r.value("lhs_bound", lhs);
            r.assert_close("quantum_value_attains_bound", q, bound, 1e-9);
            r.assert("lhs_below_quantum", lhs < q - 1e-6, json!({ "lhs": lhs, "quantum": q }));
            let sat = lib(saturation_residual(&f, &psi, &bob))?;
            r.value("saturation_residual", sat);
            r.assert_below("saturation_residual", sat, 1e-8);
        }
        SteeringMode::Alpha => {
            r.input("mode", "alpha");
            r.input("restarts", restarts);
            r.input("seed", seed);
            let a = schmidt(alpha, d)?;
            r.input("alpha", a.alpha().to_vec());
            let f = lib(alpha_steering_functional(&a))?;
            let bob = conj_povms(&[lib(make_zd(d))?, lib(make_xd(d))?.conj()])?;
            let psi = State::Pure(make_schmidt_state(&a));
            let q = lib(evaluate_steering(&f, &psi, &bob))?;
            let exact = alpha_classical_bound_exact(&a);
            let ascent = alpha_classical_bound(&a, restarts, seed);
            r.value("quantum_value", q);
            r.value("lhs_bound", exact);
            r.value("lhs_bound_ascent", ascent);
            r.assert_close("quantum_value_is_d", q, d as f64, 1e-9);
            r.assert("lhs_below_d", exact < d as f64 - 1e-6, json!({ "lhs": exact, "d": d }));
            r.assert_close("ascent_matches_exact", ascent, exact, 1e-6);
            let (r1, r2) = lib(alpha_relation_residuals(&a, &psi, &bob))?;
            r.value("relation_residuals", vec![r1, r2]);
            r.assert_below("relation_residuals", r1.max(r2), 1e-8);
        }
    }
    Ok(r)
}

fn field_usize(v: &Value, key: &str) -> Res<usize> {
    v.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| format!("scenario needs a non-negative integer '{key}'"))
}

fn field_f64s(v: &Value, key: &str) -> Res<Vec<f64>> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| format!("scenario needs an array '{key}'"))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| format!("'{key}' must hold numbers")))
        .collect()
}

fn read_json(path: &Path) -> Res<(Value, PathBuf)> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((v, base))
}

fn bell_bound_report(r: &mut Report, f: &BellFunctional) -> Res<()> {
    let (c, s) = lib(classical_bound_bruteforce(f))?;
    r.value("classical_bound", c);
    r.value("classical_strategy", json!(s.outcomes));
    r.assert_close("strategy_attains_bound", s.value(f), c, 1e-12);
    Ok(())
}

fn steering_bound_report(r: &mut Report, f: &SteeringFunctional) -> Res<()> {
    r.value("lhs_bound", lib(lhs_bound_oracle(f))?);
    Ok(())
}

fn classical_bound(path: &Path, seed: u64) -> Res<Report> {
    let (v, base) = read_json(path)?;
    let kind = v.get("kind").and_then(Value::as_str).ok_or("scenario needs a string 'kind'")?;
    let mut r = Report::new("classical-bound");
    r.input("scenario", v.clone());
    match kind {
        "asta" => {
            let (n, m, d) = (field_usize(&v, "n")?, field_usize(&v, "m")?, field_usize(&v, "d")?);
            bell_bound_report(&mut r, &lib(asta_functional(n, m, d))?)?;
            r.value("quantum_bound", asta_quantum_bound(n, m, d));
        }
        "chsh" => {
            let scaled = v.get("scaled").and_then(Value::as_bool).unwrap_or(false);
            bell_bound_report(&mut r, &chsh_functional(scaled))?;
        }
        "steering-gi" => {
            let d = field_usize(&v, "d")?;
            let alice = match v.get("obs_file").and_then(Value::as_str) {
                Some(file) => observables_from_file(&base.join(file), Some(d))?,
                None => vec![lib(make_zd(d))?, lib(make_xd(d))?],
            };
            let n = alice.len();
            steering_bound_report(&mut r, &lib(gi_steering_functional(alice))?)?;
            r.value("quantum_bound", gi_quantum_bound(n, d));
        }
        "steering-alpha" => {
            let a = lib(SchmidtCoeffs::normalized(&field_f64s(&v, "alpha")?))?;
            let restarts = v.get("restarts").and_then(Value::as_u64).unwrap_or(32) as usize;
            steering_bound_report(&mut r, &lib(alpha_steering_functional(&a))?)?;
            let exact = alpha_classical_bound_exact(&a);
            let ascent = alpha_classical_bound(&a, restarts, seed);
            r.value("lhs_bound_closed_form", exact);
            r.value("lhs_bound_ascent", ascent);
            r.value("quantum_bound", a.d() as f64);
            r.assert_close("ascent_matches_closed_form", ascent, exact, 1e-6);
        }
        other => return Err(format!("unknown scenario kind '{other}'")),
    }
    Ok(r)
}

fn gi_check(path: &Path, d: Option<usize>, expect: Option<GiExpectation>) -> Res<Report> {
    let obs = observables_from_file(path, d)?;
    let mut r = Report::new("gi-check");
    r.input("obs_file", path.display().to_string());
    r.input("n_observables", obs.len());
    r.input("d", obs[0].d());
    let rep = lib(is_genuinely_incompatible(&obs))?;
    r.value("commutant_dimension", rep.commutant_dimension);
    r.value("is_gi", rep.is_gi);
    if let Some(p) = &rep.block_witness {
        let mats: Vec<CMatrix> = obs.iter().map(|a| a.matrix().clone()).collect();
        let comm = witness_commutator_residual(p, &mats);
        let idem = (p * p - p).norm();
        r.value("witness_rank", p.trace().re.round());
        r.value("witness_commutator_residual", comm);
        r.assert_below("witness_commutes", comm, 1e-8);
        r.assert_below("witness_is_projector", idem, 1e-8);
    }
    if obs.len() >= 3 {
        let mut pairs = Map::new();
        for i in 0..obs.len() {
            for j in i + 1..obs.len() {
                let pr = lib(is_genuinely_incompatible(&[obs[i].clone(), obs[j].clone()]))?;
                pairs.insert(
                    format!("{i},{j}"),
                    json!({ "commutant_dimension": pr.commutant_dimension, "is_gi": pr.is_gi }),
                );
            }
        }
        r.value("pairs", Value::Object(pairs));
    }
    if let Some(e) = expect {
        let want = e == GiExpectation::Gi;
        r.assert("expectation", rep.is_gi == want, json!({ "expected_gi": want, "is_gi": rep.is_gi }));
    }
    Ok(r)
}

fn columns(m: &CMatrix) -> Res<Vec<Ket>> {
    (0..m.ncols()).map(|j| lib(Ket::new(m.column(j).into_owned()))).collect()
}

fn mub_check(d: usize, file: Option<&Path>, tol: f64) -> Res<Report> {
    let mut r = Report::new("mub-check");
    r.input("d", d);
    r.input("tol", tol);
    let (a, b) = match file {
        Some(path) => {
            r.input("bases_file", path.display().to_string());
            let ms = read_matrices(path)?;
            if ms.len() != 2 || ms.iter().any(|m| m.nrows() != d) {
                return Err(format!("{} must hold two {d}x{d} matrices", path.display()));
            }
            (columns(&ms[0])?, columns(&ms[1])?)
        }
        None => (lib(eigenbasis(&lib(make_zd(d))?))?, lib(eigenbasis(&lib(make_xd(d))?))?),
    };
    let dev = lib(mub_deviation(&a, &b))?;
    r.value("overlap_deviation", dev);
    r.assert_below("mutually_unbiased", dev, tol);
    Ok(r)
}

fn parse_fiducial(s: &str) -> Res<Ket> {
    let amps = s.split(';').map(|t| parse_complex(t.trim())).collect::<Res<Vec<C64>>>()?;
    lib(Ket::normalized(CVector::from_vec(amps)))
}

fn povm_verify(kind: PovmKind, d: usize, alpha: Option<&[f64]>, nu: Option<&str>, tol: f64) -> Res<Report> {
    let mut r = Report::new("povm-verify");
    r.input("d", d);
    r.input("tol", tol);
    let (p, rho) = match kind {
        PovmKind::Hw => {
            r.input("kind", "hw");
            let fid = match nu {
                Some(s) => parse_fiducial(s)?,
                None => generic_fiducial(d)?,
            };
            r.input("nu", fid.amps().iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>());
            (lib(hw_covariant_povm(d, &fid))?, DensityMatrix::maximally_mixed(d))
        }
        PovmKind::Partial => {
            r.input("kind", "partial");
            let a = schmidt(alpha, d)?;
            r.input("alpha", a.alpha().to_vec());
            (lib(partial_entanglement_povm(d, &a))?, diag_state(&a)?)
        }
    };
    let sum = p.effects().iter().fold(CMatrix::zeros(d, d), |acc, e| acc + e);
    let completeness = (sum - identity(d)).norm();
    let ext = extremality_check(&p);
    let probs = p.probabilities(rho.matrix());
    let target = 1.0 / (d * d) as f64;
    let dev = probs.iter().map(|x| (x - target).abs()).fold(0.0, f64::max);
    r.value("n_outcomes", p.n_outcomes());
    r.value("completeness_residual", completeness);
    r.value("is_rank_one", ext.is_rank_one);
    r.value("elements_linearly_independent", ext.elements_linearly_independent);
    r.value("is_extremal_rank_one", ext.is_extremal_rank_one);
    r.value("outcome_probabilities", probs);
    r.assert_below("completeness", completeness, tol);
    r.assert("extremal", ext.is_extremal_rank_one, Value::Null);
    r.assert_below("uniform_outcomes", dev, tol);
    Ok(r)
}

fn randomness(kind: RandomnessKind, d: usize, alpha: Option<&[f64]>, tol: f64) -> Res<Report> {
    let mut r = Report::new("randomness");
    r.input("d", d);
    r.input("tol", tol);
    let lg = (d as f64).log2();
    let (p, rho, expected) = match kind {
        RandomnessKind::Projective => {
            r.input("kind", "projective");
            let basis = (0..d).map(|i| lib(Ket::basis(d, i))).collect::<Res<Vec<_>>>()?;
            (lib(Povm::from_basis(&basis))?, DensityMatrix::maximally_mixed(d), lg)
        }
        RandomnessKind::Hw => {
            r.input("kind", "hw");
            (lib(hw_covariant_povm(d, &generic_fiducial(d)?))?, DensityMatrix::maximally_mixed(d), 2.0 * lg)
        }
        RandomnessKind::Partial => {
            r.input("kind", "partial");
            let a = schmidt(alpha, d)?;
            r.input("alpha", a.alpha().to_vec());
            (lib(partial_entanglement_povm(d, &a))?, diag_state(&a)?, 2.0 * lg)
        }
    };
    let rep = lib(certified_guessing_probability(&p, &rho))?;
    r.value("guessing_probability", rep.guessing_probability);
    r.value("min_entropy_bits", rep.min_entropy_bits);
    r.value("per_outcome_probs", rep.per_outcome_probs.clone());
    r.value("certification_assumed", rep.certification_assumed);
    r.assert_close("min_entropy", rep.min_entropy_bits, expected, tol);
    Ok(r)
}

fn robustness(d: usize, theta: f64, l: i64) -> Res<Report> {
    let mut r = Report::new("robustness");
    r.input("d", d);
    r.input("theta", theta);
    r.input("l", l);
    let rep = lib(robustness_empirical(d, l, theta))?;
    r.value("epsilon", rep.epsilon);
    r.value("state_distance", rep.state_distance);
    r.value("meas_distances_b1", rep.meas_distances_b1.clone());
    r.value("meas_distances_b2", rep.meas_distances_b2.clone());
    r.value("bound_state", rep.bound_state);
    r.value("bound_meas", rep.bound_meas);
    r.value("in_regime", rep.in_regime);
    let worst_meas = rep.meas_distances().fold(0.0, f64::max);
    r.assert("epsilon_nonnegative", rep.epsilon >= 0.0, json!({ "epsilon": rep.epsilon }));
    r.assert("in_regime", rep.in_regime, json!({ "epsilon": rep.epsilon, "regime": ROBUSTNESS_REGIME }));
    r.assert(
        "state_bound",
        rep.state_distance <= rep.bound_state,
        json!({ "distance": rep.state_distance, "bound": rep.bound_state }),
    );
    r.assert(
        "measurement_bound",
        worst_meas <= rep.bound_meas,
        json!({ "distance": worst_meas, "bound": rep.bound_meas }),
    );
    Ok(r)
}

fn selftest_check(path: &Path) -> Res<Report> {
    let (v, base) = read_json(path)?;
    let name = v.get("scenario").and_then(Value::as_str).ok_or("scenario file needs a string 'scenario'")?;
    let scenario: Scenario = lib(name.parse())?;
    let tol = v.get("tol").and_then(Value::as_f64).unwrap_or(1e-8);
    let fid_tol = v.get("fidelity_tol").and_then(Value::as_f64).unwrap_or(1e-9);
    let mut r = Report::new("selftest-check");
    r.input("scenario", v.clone());

    let custom_obs = match v.get("observable_files") {
        Some(Value::Array(files)) => Some(
            files
                .iter()
                .map(|f| {
                    let f = f.as_str().ok_or("'observable_files' must hold strings")?;
                    observables_from_file(&base.join(f), v.get("d").and_then(Value::as_u64).map(|x| x as usize))
                })
                .collect::<Res<Vec<_>>>()?,
        ),
        Some(_) => return Err("'observable_files' must be an array".into()),
        None => None,
    };
    let custom_state = match v.get("state_file").and_then(Value::as_str) {
        Some(f) => Some(lib(Ket::normalized(read_vector(&base.join(f))?))?),
        None => None,
    };

    let (state, obs, ideal) = match &scenario {
        Scenario::BellAsta => {
            let (n, m, d) = (field_usize(&v, "n")?, field_usize(&v, "m")?, field_usize(&v, "d")?);
            let obs = match custom_obs {
                Some(o) => o,
                None => lib(ideal_observables(n, m, d))?,
            };
            let state = match custom_state {
                Some(s) => s,
                None => lib(make_ghz(n, d))?,
            };
            (state, obs, None)
        }
        Scenario::SteeringGi => {
            let d = field_usize(&v, "d")?;
            let obs = match custom_obs {
                Some(o) => o,
                None => {
                    let (z, x) = (lib(make_zd(d))?, lib(make_xd(d))?);
                    vec![vec![z.clone(), x.clone()], vec![z.conj(), x.conj()]]
                }
            };
            let state = match custom_state {
                Some(s) => s,
                None => lib(make_maxent(d))?,
            };
            (state, obs, Some(IdealState::MaxEnt))
        }
        Scenario::SteeringAlpha(a) => {
            let d = a.d();
            let obs = match custom_obs {
                Some(o) => o,
                None => {
                    let (z, x) = (lib(make_zd(d))?, lib(make_xd(d))?);
                    vec![vec![z.clone(), x.clone()], vec![z.conj(), x]]
                }
            };
            let state = match custom_state {
                Some(s) => s,
                None => make_schmidt_state(a),
            };
            (state, obs, Some(IdealState::Schmidt(a.clone())))
        }
    };

    let res = lib(selftest_residuals(&scenario, &state, &obs))?;
    r.value("residuals", res.clone());
    r.value("max_residual", max_of(&res));
    r.assert_below("relations_hold", max_of(&res), tol);
    if let Some(ideal) = ideal {
        let f = lib(canonical_fidelity(&State::Pure(state), &obs[1][0], &ideal))?;
        r.value("canonical_fidelity", f);
        r.assert_close("canonical_fidelity", f, 1.0, fid_tol);
    }
    Ok(r)
}

pub fn export_fixture(name: FixtureName) -> String {
    let (title, obs) = match name {
        FixtureName::GiTripleD5 => ("five-dimensional GI triple, pairs not GI", gi_triple_d5()),
        FixtureName::BlockPairD4 => ("four-dimensional pair with invariant blocks {0,1} and {2,3}", block_pair_d4()),
    };
    let mats: Vec<CMatrix> = obs.into_iter().map(UnitaryObservable::into_matrix).collect();
    format!("# {title}\n{}", format_matrices(&mats))
}
