//! Numerical toolkit for qudit Bell and steering functionals.
//!
//! Builds generalized observables, the ASTA/SATWAP/CHSH Bell functionals,
//! steering functionals, their classical and quantum bounds, sum-of-squares
//! decompositions, genuine-incompatibility tests, self-testing residuals,
//! extremal POVMs and certified randomness.

pub mod bell;
pub mod certify;
pub mod error;
pub mod measurements;
pub mod povm;
pub mod qcore;
pub mod randomness;
pub mod steering;

pub use error::{QcError, Result};
pub use qcore::{CMatrix, CVector, DensityMatrix, Ket, SchmidtCoeffs, UnitaryObservable, C64};
