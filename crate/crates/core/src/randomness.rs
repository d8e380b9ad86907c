//! Guessing probability and min-entropy of a certified measurement.

use crate::error::{QcError, Result};
use crate::measurements::Povm;
use crate::qcore::DensityMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomnessReport {
    pub guessing_probability: f64,
    pub min_entropy_bits: f64,
    pub per_outcome_probs: Vec<f64>,
    /// The value is only meaningful if the realization has been certified beforehand.
    pub certification_assumed: bool,
}

/// `−log₂ G` for `0 < G ≤ 1`.
pub fn min_entropy(g: f64) -> Result<f64> {
    if !(g > 0.0 && g <= 1.0 + 1e-12) {
        return Err(QcError::InvalidArgument(format!("guessing probability {g} outside (0, 1]")));
    }
    Ok(-g.min(1.0).log2())
}

/// `G = max_b Tr[E_b ρ]` for a measurement whose realization is certified.
pub fn certified_guessing_probability(measurement: &Povm, rho: &DensityMatrix) -> Result<RandomnessReport> {
    if measurement.dim() != rho.dim() {
        return Err(QcError::InvalidArgument(format!(
            "POVM dimension {} does not match state dimension {}",
            measurement.dim(),
            rho.dim()
        )));
    }
    let probs: Vec<f64> = measurement.probabilities(rho.matrix()).into_iter().map(|p| p.max(0.0)).collect();
    let g = probs.iter().cloned().fold(0.0, f64::max);
    Ok(RandomnessReport {
        guessing_probability: g,
        min_entropy_bits: min_entropy(g)?,
        per_outcome_probs: probs,
        certification_assumed: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::{hw_covariant_povm, partial_entanglement_povm};
    use crate::qcore::{CMatrix, CVector, Ket, SchmidtCoeffs, C64};

    #[test]
    fn min_entropy_examples() {
        assert_eq!(min_entropy(1.0).unwrap(), 0.0);
        assert!((min_entropy(0.25).unwrap() - 2.0).abs() < 1e-15);
        assert!((min_entropy(1.0 / 9.0).unwrap() - 2.0 * 3f64.log2()).abs() < 1e-12);
        assert!(min_entropy(0.0).is_err() && min_entropy(1.5).is_err());
    }

    #[test]
    fn guessing_probability_examples() {
        let d = 4;
        let basis: Vec<Ket> = (0..d).map(|i| Ket::basis(d, i).unwrap()).collect();
        let rho = DensityMatrix::maximally_mixed(d);
        let r = certified_guessing_probability(&Povm::from_basis(&basis).unwrap(), &rho).unwrap();
        assert!((r.guessing_probability - 0.25).abs() < 1e-12);
        assert!((r.min_entropy_bits - 2.0).abs() < 1e-12);
        assert!(r.certification_assumed);

        let nu = Ket::normalized(CVector::from_fn(d, |i, _| {
            C64::from_polar(1.0 + 0.3 * i as f64, 0.4 * (i * i) as f64 + 0.1 * i as f64)
        }))
        .unwrap();
        let p = hw_covariant_povm(d, &nu).unwrap();
        let r = certified_guessing_probability(&p, &rho).unwrap();
        assert!((r.guessing_probability - 1.0 / 16.0).abs() < 1e-12);
        assert!((r.min_entropy_bits - 4.0).abs() < 1e-10);

        let alpha = SchmidtCoeffs::normalized(&[0.4, 0.45, 0.8]).unwrap();
        let rho_b = DensityMatrix::new(CMatrix::from_diagonal(&CVector::from_iterator(
            3,
            alpha.alpha().iter().map(|a| C64::new(a * a, 0.0)),
        )))
        .unwrap();
        let r = certified_guessing_probability(&partial_entanglement_povm(3, &alpha).unwrap(), &rho_b).unwrap();
        assert!((r.guessing_probability - 1.0 / 9.0).abs() < 1e-8);
        assert!((r.per_outcome_probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}
