//! Recursive ("qubistic") plots and quantitative diagnostics for many-body
//! wavefunctions of spin chains.

pub mod eigen;
pub mod error;
pub mod analysis;
pub mod models;
pub mod qmap;
pub mod render;
pub mod state;

pub use error::{Error, Result};

#[cfg(test)]
mod smoke {
    use nalgebra::{Complex, DMatrix};

    #[test]
    fn nalgebra_complex_hermitian_eigen_and_svd() {
        type C = Complex<f64>;
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C::new(1.0, 0.0), C::new(0.0, -1.0), C::new(0.0, 1.0), C::new(-1.0, 0.0)],
        );
        let eig = m.clone().symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((vals[0] + 2f64.sqrt()).abs() < 1e-12);
        assert!((vals[1] - 2f64.sqrt()).abs() < 1e-12);

        let svd = m.svd(true, true);
        let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((s[0] - 2f64.sqrt()).abs() < 1e-12);
        assert!((s[1] - 2f64.sqrt()).abs() < 1e-12);
    }
}
