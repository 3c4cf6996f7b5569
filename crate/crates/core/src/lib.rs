//! Trees, the generalized tree shift poset, q-Laplacian spectra and the
//! exact polynomial identities behind eigenvalue monotonicity.

pub mod exactpoly;
pub mod gts;
pub mod matrices;
pub mod spectra;
pub mod trees;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Tree(#[from] trees::TreeError),
    #[error(transparent)]
    Shift(#[from] gts::ShiftError),
    #[error(transparent)]
    Matrix(#[from] matrices::MatrixError),
    #[error(transparent)]
    Poly(#[from] exactpoly::PolyError),
    #[error(transparent)]
    Spectra(#[from] spectra::SpectraError),
    #[error(transparent)]
    Verify(#[from] verify::VerifyError),
}
