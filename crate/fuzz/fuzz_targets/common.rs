//! Shared fixtures for the fuzz targets.

use gamma_ultra::catalog;
use gamma_ultra::formula::Signature;

/// Signatures exercising scalars, numerals, relations and function symbols.
pub fn signatures() -> Vec<Signature> {
    vec![
        Signature::module(),
        Signature::naturals(),
        catalog::escape_structure().signature,
        catalog::surrogate_structure().signature,
    ]
}
