//! Many-body state vectors over the site-major tensor-product basis.
//!
//! A chain of `N` sites with local dimension `b` (2 for qubits, 3 for
//! spin-1) is stored as a dense vector of `b^N` complex amplitudes. Site 1
//! is the most significant digit of the flat basis index, so the bit string
//! `X1 Y1 X2 Y2 ...` of the 2D plotting schemes is a left-to-right digit
//! walk.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance used when checking normalization.
pub const NORM_TOL: f64 = 1e-12;

/// Computes `b^n`, refusing sizes that cannot be allocated.
pub fn hilbert_dim(local_dim: usize, num_sites: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..num_sites {
        dim = dim
            .checked_mul(local_dim)
            .filter(|&d| d <= 1 << 34)
            .ok_or_else(|| Error::invalid(format!("{local_dim}^{num_sites} is too large")))?;
    }
    Ok(dim)
}

/// Dense wavefunction of `num_sites` sites with local dimension `local_dim`.
///
/// Immutable after construction; all operations return fresh vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_sites: usize,
    local_dim: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(num_sites: usize, local_dim: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if num_sites == 0 {
            return Err(Error::invalid("num_sites must be at least 1"));
        }
        if local_dim != 2 && local_dim != 3 {
            return Err(Error::invalid(format!("local_dim must be 2 or 3, got {local_dim}")));
        }
        let dim = hilbert_dim(local_dim, num_sites)?;
        if amplitudes.len() != dim {
            return Err(Error::dim(format!(
                "expected {dim} amplitudes for {num_sites} sites of dimension {local_dim}, got {}",
                amplitudes.len()
            )));
        }
        Ok(StateVector { num_sites, local_dim, amplitudes })
    }

    /// The tensor-basis state `|flat⟩`.
    pub fn basis_state(num_sites: usize, local_dim: usize, flat: usize) -> Result<Self> {
        let dim = hilbert_dim(local_dim, num_sites)?;
        if flat >= dim {
            return Err(Error::invalid(format!("basis index {flat} out of range for dim {dim}")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[flat] = Complex64::new(1.0, 0.0);
        StateVector::new(num_sites, local_dim, amplitudes)
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, flat: usize) -> Complex64 {
        self.amplitudes[flat]
    }

    /// ℓ² norm, `√(Σ|ψ_s|²)`.
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm().powi(2) - 1.0).abs() <= NORM_TOL
    }

    /// Returns a rescaled copy with unit norm. Errors on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        let amplitudes = self.amplitudes.iter().map(|a| a / n).collect();
        Ok(StateVector { num_sites: self.num_sites, local_dim: self.local_dim, amplitudes })
    }

    /// Applies the same single-site unitary on every site: `(U ⊗ … ⊗ U)|ψ⟩`.
    pub fn rotate_local_basis(&self, u: &LocalUnitary) -> Result<Self> {
        if u.dim() != self.local_dim {
            return Err(Error::dim(format!(
                "unitary acts on dimension {} but sites have dimension {}",
                u.dim(),
                self.local_dim
            )));
        }
        let b = self.local_dim;
        let mut amps = self.amplitudes.clone();
        // One site at a time; stride of site k (1-based) is b^(N-k).
        let mut stride = self.dim() / b;
        for _ in 0..self.num_sites {
            let block = stride * b;
            for base in (0..amps.len()).step_by(block) {
                for offset in 0..stride {
                    let mut old = [Complex64::new(0.0, 0.0); 3];
                    for d in 0..b {
                        old[d] = amps[base + offset + d * stride];
                    }
                    for r in 0..b {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for c in 0..b {
                            acc += u.entry(r, c) * old[c];
                        }
                        amps[base + offset + r * stride] = acc;
                    }
                }
            }
            stride /= b;
        }
        Ok(StateVector { num_sites: self.num_sites, local_dim: self.local_dim, amplitudes: amps })
    }

    /// Writes the state in the QSV1 text format (see [`load_state`]).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_state(self, path)
    }
}

/// Digit-string label of one tensor-basis state; site 1 is the most
/// significant digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantumIndex {
    digits: Vec<u8>,
    local_dim: usize,
}

impl QuantumIndex {
    pub fn new(digits: Vec<u8>, local_dim: usize) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::invalid("empty digit string"));
        }
        if digits.iter().any(|&d| d as usize >= local_dim) {
            return Err(Error::invalid("digit out of range for local dimension"));
        }
        Ok(QuantumIndex { digits, local_dim })
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn num_sites(&self) -> usize {
        self.digits.len()
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    /// Flat index: `Σ_k digits[k] · b^(N−k)`.
    pub fn to_flat(&self) -> usize {
        self.digits.iter().fold(0usize, |acc, &d| acc * self.local_dim + d as usize)
    }
}

/// Site-major digit expansion of a flat basis index.
pub fn flat_to_index(flat: usize, num_sites: usize, local_dim: usize) -> Result<QuantumIndex> {
    let dim = hilbert_dim(local_dim, num_sites)?;
    if flat >= dim {
        return Err(Error::invalid(format!("flat index {flat} out of range for dim {dim}")));
    }
    let mut digits = vec![0u8; num_sites];
    let mut rest = flat;
    for k in (0..num_sites).rev() {
        digits[k] = (rest % local_dim) as u8;
        rest /= local_dim;
    }
    QuantumIndex::new(digits, local_dim)
}

/// Single-site unitary, row-major `b × b`.
#[derive(Debug, Clone)]
pub struct LocalUnitary {
    dim: usize,
    matrix: Vec<Complex64>,
}

/// Entrywise tolerance for `U†U = I`.
const UNITARY_TOL: f64 = 1e-12;

impl LocalUnitary {
    pub fn new(dim: usize, matrix: Vec<Complex64>) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::dim(format!("expected {} entries, got {}", dim * dim, matrix.len())));
        }
        let u = LocalUnitary { dim, matrix };
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += u.entry(k, r).conj() * u.entry(k, c);
                }
                let expect = if r == c { 1.0 } else { 0.0 };
                if (acc - expect).norm() > UNITARY_TOL {
                    return Err(Error::invalid("matrix is not unitary"));
                }
            }
        }
        Ok(u)
    }

    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![Complex64::new(0.0, 0.0); dim * dim];
        for k in 0..dim {
            matrix[k * dim + k] = Complex64::new(1.0, 0.0);
        }
        LocalUnitary { dim, matrix }
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        LocalUnitary {
            dim: 2,
            matrix: vec![
                Complex64::new(h, 0.0),
                Complex64::new(h, 0.0),
                Complex64::new(h, 0.0),
                Complex64::new(-h, 0.0),
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim + col]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut matrix = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        for r in 0..self.dim {
            for c in 0..self.dim {
                matrix[r * self.dim + c] = self.entry(c, r).conj();
            }
        }
        LocalUnitary { dim: self.dim, matrix }
    }
}

/// Writes a QSV1 state file.
///
/// Format (text, UTF-8, LF):
/// ```text
/// QSV1
/// <b> <N>
/// <re> <im>        (one line per amplitude, flat-index order)
/// ```
/// Floats carry 17 significant digits, enough to reproduce every `f64`
/// bit-for-bit on reload.
pub fn save_state(state: &StateVector, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(state.dim() * 48 + 16);
    out.push_str("QSV1\n");
    let _ = writeln!(out, "{} {}", state.local_dim(), state.num_sites());
    for a in state.amplitudes() {
        let _ = writeln!(out, "{:.16e} {:.16e}", a.re, a.im);
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a QSV1 state file. Parse errors name the offending 1-based line.
pub fn load_state(path: impl AsRef<Path>) -> Result<StateVector> {
    let text = fs::read_to_string(path)?;
    parse_qsv1(&text)
}

fn parse_qsv1(text: &str) -> Result<StateVector> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));

    let (line_no, magic) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    if magic.trim() != "QSV1" {
        return Err(Error::parse(line_no, format!("expected header 'QSV1', got '{magic}'")));
    }

    let (line_no, dims) = lines.next().ok_or_else(|| Error::parse(2, "missing '<b> <N>' line"))?;
    let mut parts = dims.split_whitespace();
    let b: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(line_no, "cannot parse local dimension"))?;
    let n: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(line_no, "cannot parse site count"))?;
    if parts.next().is_some() {
        return Err(Error::parse(line_no, "trailing tokens after '<b> <N>'"));
    }
    if b != 2 && b != 3 {
        return Err(Error::parse(line_no, format!("local dimension must be 2 or 3, got {b}")));
    }
    if n == 0 {
        return Err(Error::parse(line_no, "site count must be at least 1"));
    }

    let dim = hilbert_dim(b, n)?;
    let mut amplitudes = Vec::with_capacity(dim);
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if amplitudes.len() == dim {
            return Err(Error::parse(line_no, format!("expected {dim} amplitude lines, found more")));
        }
        let mut parts = line.split_whitespace();
        let re: f64 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(line_no, "cannot parse real part"))?;
        let im: f64 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(line_no, "cannot parse imaginary part"))?;
        if parts.next().is_some() {
            return Err(Error::parse(line_no, "trailing tokens after amplitude"));
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::parse(line_no, "non-finite amplitude"));
        }
        amplitudes.push(Complex64::new(re, im));
    }
    if amplitudes.len() != dim {
        return Err(Error::parse(
            text.lines().count(),
            format!("expected {dim} amplitude lines, found {}", amplitudes.len()),
        ));
    }
    StateVector::new(n, b, amplitudes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn flat_to_index_examples() {
        assert_eq!(flat_to_index(0, 4, 2).unwrap().digits(), &[0, 0, 0, 0]);
        assert_eq!(flat_to_index(7, 4, 2).unwrap().digits(), &[0, 1, 1, 1]);
        assert_eq!(flat_to_index(5, 2, 3).unwrap().digits(), &[1, 2]);
        assert!(flat_to_index(16, 4, 2).is_err());
    }

    #[test]
    fn index_bijection_exhaustive() {
        for (b, max_n) in [(2usize, 10usize), (3, 6)] {
            for n in 1..=max_n {
                let dim = hilbert_dim(b, n).unwrap();
                for flat in 0..dim {
                    let idx = flat_to_index(flat, n, b).unwrap();
                    assert_eq!(idx.to_flat(), flat);
                }
            }
        }
    }

    #[test]
    fn norm_examples() {
        let zero = StateVector::new(2, 2, vec![c(0.0, 0.0); 4]).unwrap();
        assert_eq!(zero.norm(), 0.0);
        let basis = StateVector::basis_state(2, 2, 1).unwrap();
        assert_eq!(basis.norm(), 1.0);
        let pyth = StateVector::new(1, 2, vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert!((pyth.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hadamard_on_zero_state_is_uniform() {
        let psi = StateVector::basis_state(4, 2, 0).unwrap();
        let rotated = psi.rotate_local_basis(&LocalUnitary::hadamard()).unwrap();
        for a in rotated.amplitudes() {
            assert!((a - c(0.25, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn identity_rotation_is_identity() {
        let psi = StateVector::new(
            2,
            2,
            vec![c(0.5, 0.1), c(-0.3, 0.2), c(0.0, 0.7), c(0.1, -0.2)],
        )
        .unwrap();
        let rotated = psi.rotate_local_basis(&LocalUnitary::identity(2)).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(rotated.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    /// Test-only oracle: dense Kronecker power of a local unitary.
    fn kron_power(u: &LocalUnitary, n: usize) -> Vec<Vec<Complex64>> {
        let b = u.dim();
        let mut mat = vec![vec![c(1.0, 0.0)]];
        for _ in 0..n {
            let rows = mat.len();
            let mut next = vec![vec![c(0.0, 0.0); rows * b]; rows * b];
            for r in 0..rows {
                for col in 0..rows {
                    for i in 0..b {
                        for j in 0..b {
                            next[r * b + i][col * b + j] = mat[r][col] * u.entry(i, j);
                        }
                    }
                }
            }
            mat = next;
        }
        mat
    }

    #[test]
    fn ghz_under_hadamard_matches_dense_oracle() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![c(0.0, 0.0); 16];
        amps[0] = c(h, 0.0);
        amps[15] = c(h, 0.0);
        let ghz = StateVector::new(4, 2, amps).unwrap();

        let had = LocalUnitary::hadamard();
        let rotated = ghz.rotate_local_basis(&had).unwrap();

        // Oracle: brute-force 16x16 matrix application.
        let mat = kron_power(&had, 4);
        for (r, row) in mat.iter().enumerate() {
            let expect: Complex64 =
                row.iter().zip(ghz.amplitudes()).map(|(m, a)| m * a).sum();
            assert!((rotated.amplitude(r) - expect).norm() < 1e-14);
        }

        // Frozen values from the oracle: 1/(2√2) on even-parity states, 0 otherwise.
        let w = 1.0 / (2.0 * 2f64.sqrt());
        for flat in 0..16usize {
            let expect = if flat.count_ones() % 2 == 0 { w } else { 0.0 };
            assert!((rotated.amplitude(flat) - c(expect, 0.0)).norm() < 1e-14);
        }
        assert!((rotated.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_round_trip_restores_state() {
        let psi = StateVector::new(
            3,
            2,
            vec![
                c(0.1, 0.2),
                c(-0.3, 0.1),
                c(0.2, 0.0),
                c(0.0, -0.5),
                c(0.4, 0.1),
                c(0.1, 0.1),
                c(-0.2, 0.3),
                c(0.3, -0.1),
            ],
        )
        .unwrap()
        .normalized()
        .unwrap();
        let had = LocalUnitary::hadamard();
        let back = psi.rotate_local_basis(&had).unwrap().rotate_local_basis(&had.adjoint()).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(back.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn qsv1_round_trip_single_basis_state() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.qsv");
        let psi = StateVector::basis_state(2, 2, 1).unwrap();
        psi.save(&path).unwrap();
        let loaded = load_state(&path).unwrap();
        assert_eq!(loaded.amplitudes(), psi.amplitudes());
    }

    #[test]
    fn qsv1_count_mismatch_names_problem() {
        let mut text = String::from("QSV1\n2 4\n");
        for _ in 0..15 {
            text.push_str("0.0 0.0\n");
        }
        let err = parse_qsv1(&text).unwrap_err();
        assert!(err.to_string().contains("expected 16"), "got: {err}");
    }

    #[test]
    fn qsv1_spin1_two_sites() {
        let mut text = String::from("QSV1\n3 2\n");
        for k in 0..9 {
            text.push_str(&format!("{}.0 0.0\n", k));
        }
        let st = parse_qsv1(&text).unwrap();
        assert_eq!(st.local_dim(), 3);
        assert_eq!(st.num_sites(), 2);
        assert_eq!(st.dim(), 9);
        assert_eq!(st.amplitude(4), c(4.0, 0.0));
    }

    #[test]
    fn qsv1_rejects_bad_header_and_nonfinite() {
        assert!(parse_qsv1("QSV2\n2 2\n").is_err());
        let err = parse_qsv1("QSV1\n2 1\ninf 0.0\n0 0\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "got: {err}");
    }

    proptest! {
        #[test]
        fn qsv1_round_trip_is_bit_exact(amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("rt.qsv");
            let amplitudes: Vec<Complex64> = amps.iter().map(|&(re, im)| c(re, im)).collect();
            let psi = StateVector::new(3, 2, amplitudes).unwrap();
            psi.save(&path).unwrap();
            let loaded = load_state(&path).unwrap();
            for (a, b) in psi.amplitudes().iter().zip(loaded.amplitudes()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }

        #[test]
        fn index_round_trip(flat in 0usize..6561, ) {
            let idx = flat_to_index(flat, 8, 3).unwrap();
            prop_assert_eq!(idx.to_flat(), flat);
        }
    }
}
