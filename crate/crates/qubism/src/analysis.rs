//! Quantitative diagnostics of wavefunction plots: Rényi entropies and
//! fractal dimensions, the Fourier spectrum of the 1D plot, the
//! translation-invariance decimation test, Schmidt decompositions, the
//! quadrant cross-correlation matrix, and the distinct-quadrant
//! entanglement bound.
//!
//! All logarithms are base 2. Analyses act on the normalized state.

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::qmap::{apply_scheme, PlotImage, PlotScheme, SchemeKind};
use crate::state::StateVector;

/// Relative support threshold for the order-0 entropy and for deciding that
/// a cell probability is an exact zero rather than numerical dust.
pub const SUPPORT_REL_THRESHOLD: f64 = 1e-14;

/// Absolute norm below which a quadrant image counts as empty.
pub const ZERO_QUADRANT_TOL: f64 = 1e-12;

fn normalized_amplitudes(state: &StateVector) -> Result<Vec<Complex64>> {
    let n = state.norm();
    if n < 1e-12 {
        return Err(Error::invalid("cannot analyze the zero state"));
    }
    Ok(state.amplitudes().iter().map(|a| a / n).collect())
}

/// Probability distribution over plot cells.
#[derive(Debug, Clone)]
pub struct ProbDist {
    probs: Vec<f64>,
}

impl ProbDist {
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::invalid("probabilities must be finite and non-negative"));
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(Error::invalid("probabilities sum to zero"));
        }
        Ok(ProbDist { probs: raw.into_iter().map(|p| p / sum).collect() })
    }

    /// Modulus-squared distribution of a plot image.
    pub fn from_image(image: &PlotImage) -> Result<Self> {
        ProbDist::new(image.values().iter().map(|v| v.norm_sqr()).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Support size at the relative threshold.
    pub fn support(&self) -> usize {
        let max = self.probs.iter().cloned().fold(0.0f64, f64::max);
        self.probs.iter().filter(|&&p| p > SUPPORT_REL_THRESHOLD * max).count()
    }
}

/// Rényi entropy of order `q`, in bits. Order 1 is the Shannon limit,
/// order 0 counts the support.
pub fn renyi_entropy(dist: &ProbDist, q: f64) -> Result<f64> {
    if q < 0.0 || !q.is_finite() {
        return Err(Error::invalid("Rényi order must be a finite non-negative number"));
    }
    let p = dist.probs();
    if q == 0.0 {
        return Ok((dist.support() as f64).log2());
    }
    if (q - 1.0).abs() < 1e-12 {
        return Ok(-p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>());
    }
    let sum: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| x.powf(q)).sum();
    Ok(sum.log2() / (1.0 - q))
}

/// Finite-size Rényi dimension estimate: `R_q` of the plot distribution
/// divided by log2 of the image side length `b^(N/2)`, so values land in
/// [0, 2] for square plots.
pub fn renyi_dimension(state: &StateVector, scheme: &PlotScheme, q: f64) -> Result<f64> {
    match scheme.kind {
        SchemeKind::Standard2d | SchemeKind::Alternative2d | SchemeKind::Spin1Square => {}
        _ => return Err(Error::invalid("Rényi dimensions are defined for the square grid schemes")),
    }
    let image = apply_scheme(state, scheme)?;
    let entropy = renyi_entropy(&ProbDist::from_image(&image)?, q)?;
    let denom = state.num_sites() as f64 / 2.0 * (state.local_dim() as f64).log2();
    Ok(entropy / denom)
}

/// One momentum component of the 1D-plot spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierPoint {
    pub momentum: usize,
    /// log2 of the momentum, for the log-axis inspection of periodicity.
    pub log2_momentum: f64,
    pub magnitude: f64,
}

/// Discrete Fourier transform of the amplitude sequence in 1D-plot
/// (lexicographic) order; magnitudes for momenta `1..=2^(N-1)`.
pub fn fourier_1d(state: &StateVector) -> Result<Vec<FourierPoint>> {
    if state.local_dim() != 2 {
        return Err(Error::invalid("the 1D plot spectrum is defined for qubit chains"));
    }
    let mut buffer: Vec<Complex64> = normalized_amplitudes(state)?;
    FftPlanner::new().plan_fft_forward(buffer.len()).process(&mut buffer);
    Ok((1..=buffer.len() / 2)
        .map(|k| FourierPoint {
            momentum: k,
            log2_momentum: (k as f64).log2(),
            magnitude: buffer[k].norm(),
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Quadrant geometry on grid plots.

fn digits_of(mut value: usize, count: usize, base: usize) -> Vec<usize> {
    let mut digits = vec![0usize; count];
    for k in (0..count).rev() {
        digits[k] = value % base;
        value /= base;
    }
    digits
}

/// The (site-major) left-block index of the block at grid position (R, C):
/// interleaves the base-b digits of R and C.
fn interleave(r: usize, c: usize, k: usize, base: usize) -> usize {
    let rd = digits_of(r, k, base);
    let cd = digits_of(c, k, base);
    let mut x = 0usize;
    for i in 0..k {
        x = x * base * base + rd[i] * base + cd[i];
    }
    x
}

/// Standard square plot of the normalized state (3×3 blocks for spin-1).
fn square_plot(state: &StateVector) -> Result<(PlotImage, usize)> {
    let kind = match state.local_dim() {
        2 => SchemeKind::Standard2d,
        3 => SchemeKind::Spin1Square,
        _ => unreachable!(),
    };
    let scheme = PlotScheme::new(kind, state.num_sites())?;
    let normalized = StateVector::new(
        state.num_sites(),
        state.local_dim(),
        normalized_amplitudes(state)?,
    )?;
    let image = apply_scheme(&normalized, &scheme)?;
    Ok((image, state.local_dim()))
}

/// Raw level-`k` quadrant images of the plot, indexed by the left-block
/// basis state, each in row-major cell order.
fn quadrant_images(state: &StateVector, k: usize) -> Result<Vec<Vec<Complex64>>> {
    if k == 0 || 2 * k >= state.num_sites() {
        return Err(Error::invalid(format!(
            "quadrant level k={k} needs 1 ≤ 2k < N={}",
            state.num_sites()
        )));
    }
    let (image, base) = square_plot(state)?;
    let (rows, cols) = image.grid_dims().expect("square plot is a grid");
    let blocks = base.pow(k as u32);
    let (block_rows, block_cols) = (rows / blocks, cols / blocks);
    let mut images = vec![Vec::new(); blocks * blocks];
    for big_r in 0..blocks {
        for big_c in 0..blocks {
            let x = interleave(big_r, big_c, k, base);
            let mut cells = Vec::with_capacity(block_rows * block_cols);
            for r in 0..block_rows {
                for c in 0..block_cols {
                    cells.push(image.value_at(big_r * block_rows + r, big_c * block_cols + c));
                }
            }
            images[x] = cells;
        }
    }
    Ok(images)
}

/// Cross-correlation matrix of the level-`k` quadrant images.
///
/// Entry (x, x') is the overlap of raw quadrant images with the conjugation
/// on the second index, which makes the matrix coincide entrywise with the
/// reduced density matrix of the first 2k sites.
#[derive(Debug, Clone)]
pub struct CrossCorrMatrix {
    pub level: usize,
    matrix: DMatrix<Complex64>,
}

impl CrossCorrMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, x: usize, x_prime: usize) -> Complex64 {
        self.matrix[(x, x_prime)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// Eigenvalues in decreasing order; this is the entanglement spectrum
    /// of the left 2k sites.
    pub fn eigenvalues_desc(&self) -> Vec<f64> {
        let m: DMatrix<Complex<f64>> = self.matrix.clone();
        let mut vals: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        vals
    }
}

pub fn cross_correlation(state: &StateVector, k: usize) -> Result<CrossCorrMatrix> {
    let images = quadrant_images(state, k)?;
    let m = images.len();
    let mut matrix = DMatrix::<Complex64>::zeros(m, m);
    for x in 0..m {
        for xp in x..m {
            let overlap: Complex64 =
                images[x].iter().zip(&images[xp]).map(|(a, b)| a * b.conj()).sum();
            matrix[(x, xp)] = overlap;
            matrix[(xp, x)] = overlap.conj();
        }
    }
    Ok(CrossCorrMatrix { level: k, matrix })
}

// ---------------------------------------------------------------------------
// Schmidt decomposition.

/// Singular-value form of a left/right bipartition.
#[derive(Debug, Clone)]
pub struct SchmidtResult {
    /// Left block is sites 1..=cut.
    pub cut: usize,
    /// Schmidt coefficients λ_i, non-increasing; Σ λ² = 1.
    pub coefficients: Vec<f64>,
    pub left_states: Vec<StateVector>,
    pub right_states: Vec<StateVector>,
}

impl SchmidtResult {
    /// Number of coefficients above `eps`.
    pub fn rank(&self, eps: f64) -> usize {
        self.coefficients.iter().filter(|&&l| l > eps).count()
    }

    /// Von Neumann entropy in bits: −Σ λ² log2 λ².
    pub fn entropy_von_neumann(&self) -> f64 {
        -self
            .coefficients
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| {
                let p = l * l;
                p * p.log2()
            })
            .sum::<f64>()
    }
}

/// Default rank threshold.
pub const SCHMIDT_RANK_EPS: f64 = 1e-10;

pub fn schmidt(state: &StateVector, cut: usize) -> Result<SchmidtResult> {
    let n = state.num_sites();
    if cut == 0 || cut >= n {
        return Err(Error::invalid(format!("cut must satisfy 1 ≤ cut < N={n}, got {cut}")));
    }
    let b = state.local_dim();
    let amps = normalized_amplitudes(state)?;
    let left_dim = b.pow(cut as u32);
    let right_dim = amps.len() / left_dim;
    let m = DMatrix::<Complex64>::from_fn(left_dim, right_dim, |l, r| amps[l * right_dim + r]);

    let svd = m.svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());

    let mut coefficients = Vec::with_capacity(order.len());
    let mut left_states = Vec::with_capacity(order.len());
    let mut right_states = Vec::with_capacity(order.len());
    for &i in &order {
        coefficients.push(svd.singular_values[i]);
        left_states.push(StateVector::new(cut, b, u.column(i).iter().copied().collect())?);
        right_states.push(StateVector::new(n - cut, b, v_t.row(i).iter().copied().collect())?);
    }
    Ok(SchmidtResult { cut, coefficients, left_states, right_states })
}

// ---------------------------------------------------------------------------
// Distinct-quadrant entanglement estimate.

/// Outcome of the distinct-quadrant count at one level.
#[derive(Debug, Clone, Copy)]
pub struct QuadrantReport {
    /// Number of distinct non-empty quadrant classes `p` at the tolerance.
    pub classes: usize,
    /// log2(p): upper bound on the entanglement entropy when classes are
    /// exact duplicates.
    pub entropy_bound: f64,
    /// Numerical rank of the quadrant Gram matrix (eigenvalues above 1e-8);
    /// the sharp bound the class count merely estimates.
    pub span_dim: usize,
    /// Quadrants with norm below [`ZERO_QUADRANT_TOL`], excluded from `p`.
    pub zero_quadrants: usize,
    /// Largest 1 − |overlap| seen between a class member and its
    /// representative; clustering slack.
    pub max_within_class_gap: f64,
}

/// Greedy first-fit clustering of normalized level-`k` quadrant images:
/// an image joins the first class whose representative overlaps it with
/// modulus at least `1 − tol`.
pub fn distinct_quadrants(state: &StateVector, k: usize, tol: f64) -> Result<QuadrantReport> {
    if !(0.0..1.0).contains(&tol) {
        return Err(Error::invalid("tolerance must lie in [0, 1)"));
    }
    let images = quadrant_images(state, k)?;
    let mut zero_quadrants = 0usize;
    let mut reps: Vec<Vec<Complex64>> = Vec::new();
    let mut max_gap = 0.0f64;
    for img in &images {
        let norm = img.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < ZERO_QUADRANT_TOL {
            zero_quadrants += 1;
            continue;
        }
        let unit: Vec<Complex64> = img.iter().map(|a| a / norm).collect();
        let mut joined = false;
        for rep in &reps {
            let overlap: Complex64 = rep.iter().zip(&unit).map(|(a, b)| a.conj() * b).sum();
            if overlap.norm() >= 1.0 - tol {
                max_gap = max_gap.max(1.0 - overlap.norm());
                joined = true;
                break;
            }
        }
        if !joined {
            reps.push(unit);
        }
    }

    let span_dim =
        cross_correlation(state, k)?.eigenvalues_desc().iter().filter(|&&e| e > 1e-8).count();
    let classes = reps.len();
    Ok(QuadrantReport {
        classes,
        entropy_bound: (classes as f64).log2(),
        span_dim,
        zero_quadrants,
        max_within_class_gap: max_gap,
    })
}

// ---------------------------------------------------------------------------
// Translation-invariance decimation test.

/// Compares the normalized sub-image obtained by measuring sites (1, 2)
/// (quadrant selection) with the one from measuring sites (2k−1, 2k)
/// (decimation at depth k; k = N/2 selects the last two sites), for every
/// outcome pair. Returns the largest ℓ² discrepancy over outcomes with
/// nonzero probability; an outcome present on one side only counts as 1.
pub fn translation_decimation_check(state: &StateVector, k: usize) -> Result<f64> {
    if state.local_dim() != 2 {
        return Err(Error::invalid("the decimation test is defined for qubit chains"));
    }
    if state.num_sites() % 2 != 0 {
        return Err(Error::invalid("the decimation test needs an even number of sites"));
    }
    let n_pairs = state.num_sites() / 2;
    if k == 0 || k > n_pairs {
        return Err(Error::invalid(format!("pair index k={k} needs 1 ≤ k ≤ {n_pairs}")));
    }
    let (image, _) = square_plot(state)?;
    let (rows, cols) = image.grid_dims().expect("grid");
    let side = rows;
    debug_assert_eq!(rows, cols);

    // Sub-image for outcome (ox, oy) on pair j: keep cells whose j-th row
    // and column bits match the outcome, then delete that bit from both
    // coordinates.
    let extract = |j: usize, ox: usize, oy: usize| -> Vec<Complex64> {
        let bit = side.trailing_zeros() as usize - j; // bit position of pair j
        let mut sub = vec![Complex64::new(0.0, 0.0); (side / 2) * (side / 2)];
        for r in 0..side {
            if (r >> bit) & 1 != ox {
                continue;
            }
            let r_sub = ((r >> (bit + 1)) << bit) | (r & ((1 << bit) - 1));
            for c in 0..side {
                if (c >> bit) & 1 != oy {
                    continue;
                }
                let c_sub = ((c >> (bit + 1)) << bit) | (c & ((1 << bit) - 1));
                sub[r_sub * (side / 2) + c_sub] = image.value_at(r, c);
            }
        }
        sub
    };

    let mut worst = 0.0f64;
    for ox in 0..2usize {
        for oy in 0..2usize {
            let first = extract(1, ox, oy);
            let deep = extract(k, ox, oy);
            let p1 = first.iter().map(|a| a.norm_sqr()).sum::<f64>();
            let p2 = deep.iter().map(|a| a.norm_sqr()).sum::<f64>();
            match (p1 > 1e-24, p2 > 1e-24) {
                (false, false) => {}
                (true, false) | (false, true) => worst = worst.max(1.0),
                (true, true) => {
                    let a = canonical_unit(&first, p1.sqrt());
                    let b = canonical_unit(&deep, p2.sqrt());
                    let dist = a
                        .iter()
                        .zip(&b)
                        .map(|(x, y)| (x - y).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    worst = worst.max(dist);
                }
            }
        }
    }
    Ok(worst)
}

/// Normalizes and rotates the first largest-modulus entry onto the positive
/// real axis, removing the free global phase before comparison.
fn canonical_unit(values: &[Complex64], norm: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = values.iter().map(|a| a / norm).collect();
    let mut best = 0usize;
    let mut best_norm = 0.0f64;
    for (i, a) in out.iter().enumerate() {
        if a.norm() > best_norm {
            best_norm = a.norm();
            best = i;
        }
    }
    if best_norm > 0.0 {
        let phase = out[best].conj() / best_norm;
        for a in &mut out {
            *a *= phase;
        }
    }
    out
}
