//! Content fingerprints for data matrices.
//!
//! The fingerprint is the SHA-256 digest of the matrix shape followed by the
//! row-major IEEE-754 little-endian bytes of every entry. Output files embed
//! it so downstream tooling can verify which data produced them.

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

/// Hex-encoded SHA-256 over shape and row-major entry bytes.
pub fn matrix_fingerprint(m: &DMatrix<f64>) -> String {
    let mut hasher = Sha256::new();
    hasher.update((m.nrows() as u64).to_le_bytes());
    hasher.update((m.ncols() as u64).to_le_bytes());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            hasher.update(m[(i, j)].to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_across_calls() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(matrix_fingerprint(&m), matrix_fingerprint(&m.clone()));
    }

    #[test]
    fn sensitive_to_entries_and_shape() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 5.0]);
        let c = DMatrix::from_row_slice(1, 4, &[1.0, 2.0, 3.0, 4.0]);
        assert_ne!(matrix_fingerprint(&a), matrix_fingerprint(&b));
        assert_ne!(matrix_fingerprint(&a), matrix_fingerprint(&c));
    }

    #[test]
    fn is_lowercase_hex() {
        let m = DMatrix::from_row_slice(1, 1, &[0.5]);
        let fp = matrix_fingerprint(&m);
        assert_eq!(fp.len(), 64);
        assert!(fp.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
    }
}
