use nalgebra::DMatrix;
use qubism::models::{build_hamiltonian, Boundary, HamiltonianSpec};
fn main() {
    for (name, spec) in [
        ("aklt6", HamiltonianSpec::aklt(6, Boundary::Periodic)),
        ("heis10", HamiltonianSpec::heisenberg(10, Boundary::Periodic)),
        ("itf10", HamiltonianSpec::itf(10, Boundary::Periodic, 1.0)),
    ] {
        let op = build_hamiltonian(&spec).unwrap();
        let dim = op.dim();
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for &(r, c, v) in op.entries() { m[(r, c)] = v.re; }
        let eig = m.clone().symmetric_eigen();
        // residual of the lowest pair
        let mut idx = 0;
        for i in 0..dim { if eig.eigenvalues[i] < eig.eigenvalues[idx] { idx = i; } }
        let v = eig.eigenvectors.column(idx);
        let hv = &m * v;
        let res = (&hv - v * eig.eigenvalues[idx]).norm();
        // worst residual over all pairs
        let mut worst = 0.0f64;
        for i in 0..dim {
            let v = eig.eigenvectors.column(i);
            let r = (&m * v - v * eig.eigenvalues[i]).norm();
            if r > worst { worst = r; }
        }
        println!("{name}: dim {dim} scale {:.1} lowest-res {res:.2e} worst-res {worst:.2e}", op.max_row_norm());
    }
}
