//! Recursive index-to-cell mappings and their application to states.
//!
//! Every scheme is a bijection from quantum indices (digit strings, site 1
//! first) onto the cells of a self-similar partition of a domain: nested
//! square quadrants, a subdivided segment, nested 3×3 blocks for spin-1, or
//! a binary triangle subdivision.
//!
//! Coordinate convention for grids: X-bits index rows growing downward,
//! Y-bits index columns growing rightward, with the pair table 00 → upper
//! left, 01 → upper right, 10 → lower left, 11 → lower right. The cell
//! placements of the reference figures fix this convention.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{flat_to_index, hilbert_dim, QuantumIndex, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Standard2d,
    Alternative2d,
    Linear1d,
    Triangular,
    Spin1Square,
}

impl SchemeKind {
    pub fn local_dim(self) -> usize {
        match self {
            SchemeKind::Spin1Square => 3,
            _ => 2,
        }
    }

    /// Number of congruent subdomains per refinement level.
    pub fn cells_per_level(self) -> usize {
        match self {
            SchemeKind::Standard2d | SchemeKind::Alternative2d => 4,
            SchemeKind::Linear1d | SchemeKind::Triangular => 2,
            SchemeKind::Spin1Square => 9,
        }
    }
}

/// A scheme instantiated for a chain length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlotScheme {
    pub kind: SchemeKind,
    pub num_sites: usize,
}

impl PlotScheme {
    pub fn new(kind: SchemeKind, num_sites: usize) -> Result<Self> {
        if num_sites == 0 {
            return Err(Error::invalid("schemes need at least one site"));
        }
        match kind {
            SchemeKind::Alternative2d if num_sites % 2 != 0 => {
                Err(Error::invalid("the alternative 2D scheme needs an even number of sites"))
            }
            SchemeKind::Spin1Square if num_sites % 2 != 0 => {
                Err(Error::invalid("the spin-1 3×3 scheme needs an even number of sites"))
            }
            _ => Ok(PlotScheme { kind, num_sites }),
        }
    }

    pub fn local_dim(&self) -> usize {
        self.kind.local_dim()
    }

    pub fn levels(&self) -> usize {
        match self.kind {
            SchemeKind::Standard2d | SchemeKind::Alternative2d | SchemeKind::Spin1Square => {
                self.num_sites.div_ceil(2)
            }
            SchemeKind::Linear1d | SchemeKind::Triangular => self.num_sites,
        }
    }

    /// Grid dimensions (rows, cols); `None` for the triangular scheme.
    pub fn grid_dims(&self) -> Option<(usize, usize)> {
        let n = self.num_sites;
        match self.kind {
            SchemeKind::Standard2d => {
                if n % 2 == 0 {
                    Some((1 << (n / 2), 1 << (n / 2)))
                } else {
                    Some((1 << ((n + 1) / 2), 1 << ((n - 1) / 2)))
                }
            }
            SchemeKind::Alternative2d => Some((1 << (n / 2), 1 << (n / 2))),
            SchemeKind::Linear1d => Some((1, 1 << n)),
            SchemeKind::Spin1Square => {
                let side = 3usize.pow((n / 2) as u32);
                Some((side, side))
            }
            SchemeKind::Triangular => None,
        }
    }
}

fn expect_qubits(index: &QuantumIndex) -> Result<()> {
    if index.local_dim() != 2 {
        return Err(Error::invalid("this scheme maps qubit (local dimension 2) indices"));
    }
    Ok(())
}

/// Standard 2D cell of an even-length qubit index: consecutive bit pairs
/// `X_i Y_i` refine rows by X and columns by Y.
pub fn map_standard2d(index: &QuantumIndex) -> Result<(usize, usize)> {
    expect_qubits(index)?;
    if index.num_sites() % 2 != 0 {
        return Err(Error::invalid("map_standard2d needs an even number of sites; see map_rect"));
    }
    let mut row = 0usize;
    let mut col = 0usize;
    for pair in index.digits().chunks(2) {
        row = (row << 1) | pair[0] as usize;
        col = (col << 1) | pair[1] as usize;
    }
    Ok((row, col))
}

/// Odd-length variant of the standard scheme on a `2^((N+1)/2) × 2^((N−1)/2)`
/// rectangle; the unpaired final bit splits rows once more.
pub fn map_rect(index: &QuantumIndex) -> Result<(usize, usize)> {
    expect_qubits(index)?;
    let n = index.num_sites();
    if n % 2 == 0 {
        return Err(Error::invalid("map_rect needs an odd number of sites"));
    }
    let digits = index.digits();
    let mut row = 0usize;
    let mut col = 0usize;
    for pair in digits[..n - 1].chunks(2) {
        row = (row << 1) | pair[0] as usize;
        col = (col << 1) | pair[1] as usize;
    }
    row = (row << 1) | digits[n - 1] as usize;
    Ok((row, col))
}

/// Alternative 2D scheme: pair table 00 → upper left, 01 → upper right,
/// 11 → lower left, 10 → lower right.
pub fn map_alternative2d(index: &QuantumIndex) -> Result<(usize, usize)> {
    expect_qubits(index)?;
    if index.num_sites() % 2 != 0 {
        return Err(Error::invalid("map_alternative2d needs an even number of sites"));
    }
    let mut row = 0usize;
    let mut col = 0usize;
    for pair in index.digits().chunks(2) {
        let (r, c) = match (pair[0], pair[1]) {
            (0, 0) => (0, 0),
            (0, 1) => (0, 1),
            (1, 1) => (1, 0),
            (1, 0) => (1, 1),
            _ => unreachable!("qubit digits"),
        };
        row = (row << 1) | r;
        col = (col << 1) | c;
    }
    Ok((row, col))
}

/// 1D scheme: binary lexicographic ordering, i.e. the flat index itself.
pub fn map_linear1d(index: &QuantumIndex) -> usize {
    index.to_flat()
}

/// Spin-1 3×3 scheme: in each digit pair the first digit picks the row
/// block, the second the column block, with digits (0, 1, 2) = (−, 0, +)
/// running top-to-bottom and left-to-right.
pub fn map_spin1(index: &QuantumIndex) -> Result<(usize, usize)> {
    if index.local_dim() != 3 {
        return Err(Error::invalid("map_spin1 maps spin-1 (local dimension 3) indices"));
    }
    if index.num_sites() % 2 != 0 {
        return Err(Error::invalid("map_spin1 needs an even number of sites"));
    }
    let mut row = 0usize;
    let mut col = 0usize;
    for pair in index.digits().chunks(2) {
        row = row * 3 + pair[0] as usize;
        col = col * 3 + pair[1] as usize;
    }
    Ok((row, col))
}

/// A triangle as three vertex coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub vertices: [(f64, f64); 3],
}

impl Triangle {
    pub fn area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        0.5 * ((b.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (b.1 - a.1)).abs()
    }

    pub fn centroid(&self) -> (f64, f64) {
        let [a, b, c] = self.vertices;
        ((a.0 + b.0 + c.0) / 3.0, (a.1 + b.1 + c.1) / 3.0)
    }
}

/// Root domain of the triangular scheme: vertices (−1,0), (0,1), (1,0).
pub const TRIANGLE_ROOT: Triangle = Triangle { vertices: [(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)] };

#[derive(Debug, Clone, Copy)]
struct Affine {
    m: [[f64; 2]; 2],
    t: [f64; 2],
}

impl Affine {
    fn apply(&self, p: (f64, f64)) -> (f64, f64) {
        (
            self.m[0][0] * p.0 + self.m[0][1] * p.1 + self.t[0],
            self.m[1][0] * p.0 + self.m[1][1] * p.1 + self.t[1],
        )
    }

    fn apply_triangle(&self, tri: &Triangle) -> Triangle {
        Triangle {
            vertices: [
                self.apply(tri.vertices[0]),
                self.apply(tri.vertices[1]),
                self.apply(tri.vertices[2]),
            ],
        }
    }
}

/// Bit 0: (−1,0) → (0,1), (1,0) → (−1,0), (0,1) → (0,0).
const TRI_S0: Affine = Affine { m: [[-0.5, 0.5], [-0.5, -0.5]], t: [-0.5, 0.5] };
/// Bit 1: (−1,0) → (1,0), (1,0) → (0,1), (0,1) → (0,0); the mirror of S0.
const TRI_S1: Affine = Affine { m: [[-0.5, -0.5], [0.5, -0.5]], t: [0.5, 0.5] };

const TRI_S0_INV: Affine = Affine { m: [[-1.0, -1.0], [1.0, -1.0]], t: [0.0, 1.0] };
const TRI_S1_INV: Affine = Affine { m: [[-1.0, 1.0], [-1.0, -1.0]], t: [0.0, 1.0] };

/// Cell of the triangular scheme: the composition `S_{s1} ∘ … ∘ S_{sN}`
/// applied to the root triangle.
pub fn map_triangular(index: &QuantumIndex) -> Result<Triangle> {
    expect_qubits(index)?;
    let mut tri = TRIANGLE_ROOT;
    for &d in index.digits().iter().rev() {
        let s = if d == 0 { TRI_S0 } else { TRI_S1 };
        tri = s.apply_triangle(&tri);
    }
    Ok(tri)
}

/// Signed violation of membership in the root triangle (≤ 0 inside).
fn root_defect(p: (f64, f64)) -> f64 {
    let below = -p.1; // y ≥ 0
    let left = p.1 - p.0 - 1.0; // y ≤ x + 1
    let right = p.1 + p.0 - 1.0; // y ≤ 1 − x
    below.max(left).max(right)
}

/// Locates the level-`n` triangular cell containing a point of the root
/// domain. Boundary points resolve to the better-fitting child.
pub fn triangular_locate(p: (f64, f64), levels: usize) -> Option<usize> {
    if root_defect(p) > 1e-9 {
        return None;
    }
    let mut point = p;
    let mut flat = 0usize;
    for _ in 0..levels {
        let p0 = TRI_S0_INV.apply(point);
        let p1 = TRI_S1_INV.apply(point);
        let d0 = root_defect(p0);
        let d1 = root_defect(p1);
        if d0 <= d1 {
            flat <<= 1;
            point = p0;
        } else {
            flat = (flat << 1) | 1;
            point = p1;
        }
    }
    Some(flat)
}

/// Cyclic right shift: `{X1 Y1 … Xn Yn} → {Yn X1 Y1 … Xn}`. Applying it
/// `N` times is the identity.
pub fn right_shift(index: &QuantumIndex) -> QuantumIndex {
    let digits = index.digits();
    let mut shifted = Vec::with_capacity(digits.len());
    shifted.push(digits[digits.len() - 1]);
    shifted.extend_from_slice(&digits[..digits.len() - 1]);
    QuantumIndex::new(shifted, index.local_dim()).expect("digits stay in range")
}

/// Grid cell of a flat index under a grid scheme.
pub fn grid_cell(scheme: &PlotScheme, flat: usize) -> Result<(usize, usize)> {
    let index = flat_to_index(flat, scheme.num_sites, scheme.local_dim())?;
    match scheme.kind {
        SchemeKind::Standard2d => {
            if scheme.num_sites % 2 == 0 {
                map_standard2d(&index)
            } else {
                map_rect(&index)
            }
        }
        SchemeKind::Alternative2d => map_alternative2d(&index),
        SchemeKind::Linear1d => Ok((0, map_linear1d(&index))),
        SchemeKind::Spin1Square => map_spin1(&index),
        SchemeKind::Triangular => Err(Error::invalid("triangular scheme has no grid cells")),
    }
}

/// The full index → cell table of a grid scheme.
#[derive(Debug, Clone)]
pub struct GridCellMap {
    pub rows: usize,
    pub cols: usize,
    cells: Vec<(usize, usize)>,
}

impl GridCellMap {
    pub fn build(scheme: &PlotScheme) -> Result<Self> {
        let (rows, cols) =
            scheme.grid_dims().ok_or_else(|| Error::invalid("not a grid scheme"))?;
        let dim = hilbert_dim(scheme.local_dim(), scheme.num_sites)?;
        let mut cells = Vec::with_capacity(dim);
        for flat in 0..dim {
            cells.push(grid_cell(scheme, flat)?);
        }
        Ok(GridCellMap { rows, cols, cells })
    }

    pub fn cell(&self, flat: usize) -> (usize, usize) {
        self.cells[flat]
    }

    /// True when the assignment covers every cell exactly once.
    pub fn is_partition(&self) -> bool {
        if self.cells.len() != self.rows * self.cols {
            return false;
        }
        let mut seen = vec![false; self.rows * self.cols];
        for &(r, c) in &self.cells {
            if r >= self.rows || c >= self.cols || seen[r * self.cols + c] {
                return false;
            }
            seen[r * self.cols + c] = true;
        }
        true
    }
}

/// How the cells of a [`PlotImage`] are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellLayout {
    Grid { rows: usize, cols: usize },
    /// Cells in flat-index order; geometry via [`PlotImage::triangle`].
    Triangular,
}

/// A state pulled back onto the cells of a plotting scheme.
#[derive(Debug, Clone)]
pub struct PlotImage {
    scheme: PlotScheme,
    layout: CellLayout,
    values: Vec<Complex64>,
}

impl PlotImage {
    pub fn scheme(&self) -> &PlotScheme {
        &self.scheme
    }

    pub fn layout(&self) -> CellLayout {
        self.layout
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn grid_dims(&self) -> Option<(usize, usize)> {
        match self.layout {
            CellLayout::Grid { rows, cols } => Some((rows, cols)),
            CellLayout::Triangular => None,
        }
    }

    pub fn value_at(&self, row: usize, col: usize) -> Complex64 {
        match self.layout {
            CellLayout::Grid { cols, .. } => self.values[row * cols + col],
            CellLayout::Triangular => panic!("triangular images have no grid cells"),
        }
    }

    /// Geometry of cell `i` under the triangular layout.
    pub fn triangle(&self, flat: usize) -> Result<Triangle> {
        map_triangular(&flat_to_index(flat, self.scheme.num_sites, 2)?)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Pulls a state back through a scheme: each cell receives the amplitude of
/// its unique quantum index.
pub fn apply_scheme(state: &StateVector, scheme: &PlotScheme) -> Result<PlotImage> {
    if scheme.local_dim() != state.local_dim() {
        return Err(Error::dim(format!(
            "scheme expects local dimension {}, state has {}",
            scheme.local_dim(),
            state.local_dim()
        )));
    }
    if scheme.num_sites != state.num_sites() {
        return Err(Error::dim(format!(
            "scheme built for {} sites, state has {}",
            scheme.num_sites,
            state.num_sites()
        )));
    }
    match scheme.grid_dims() {
        Some((rows, cols)) => {
            let mut values = vec![Complex64::new(0.0, 0.0); rows * cols];
            for (flat, &amp) in state.amplitudes().iter().enumerate() {
                let (r, c) = grid_cell(scheme, flat)?;
                values[r * cols + c] = amp;
            }
            Ok(PlotImage { scheme: *scheme, layout: CellLayout::Grid { rows, cols }, values })
        }
        None => Ok(PlotImage {
            scheme: *scheme,
            layout: CellLayout::Triangular,
            values: state.amplitudes().to_vec(),
        }),
    }
}
