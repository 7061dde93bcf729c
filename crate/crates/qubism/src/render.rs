//! Rasterization of plot images with the modulus/phase color code.
//!
//! Color intensity encodes |ψ| (white = zero) and hue encodes the phase:
//! positive reals render red, negative reals green, with the linear hue law
//! h = arg(a)·120°/π between and beyond. Output is binary PPM (P6),
//! bit-exact across platforms, or PNG.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmap::{triangular_locate, CellLayout, PlotImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorMode {
    /// Saturation from |a| relative to the image maximum.
    Full,
    /// Full saturation wherever |a| is above threshold; white elsewhere.
    PhaseOnly,
}

/// Color mapping parameters.
#[derive(Debug, Clone, Copy)]
pub struct ColorSpec {
    pub mode: ColorMode,
    /// Exponent applied to the relative modulus (contrast boost for tiny
    /// amplitudes at large N).
    pub gamma: f64,
    /// Relative cutoff below which phase-only mode paints white.
    pub zero_threshold: f64,
}

impl Default for ColorSpec {
    fn default() -> Self {
        ColorSpec { mode: ColorMode::Full, gamma: 1.0, zero_threshold: 1e-12 }
    }
}

impl ColorSpec {
    pub fn phase_only() -> Self {
        ColorSpec { mode: ColorMode::PhaseOnly, ..ColorSpec::default() }
    }

    fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(Error::invalid("gamma must be finite and positive"));
        }
        Ok(())
    }
}

/// 8-bit RGB raster, row-major from the top-left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl RasterImage {
    fn blank(width: usize, height: usize) -> Self {
        RasterImage { width, height, pixels: vec![255u8; width * height * 3] }
    }

    pub fn pixel(&self, x: usize, y: usize) -> (u8, u8, u8) {
        let o = (y * self.width + x) * 3;
        (self.pixels[o], self.pixels[o + 1], self.pixels[o + 2])
    }

    fn put(&mut self, x: usize, y: usize, rgb: (u8, u8, u8)) {
        let o = (y * self.width + x) * 3;
        self.pixels[o] = rgb.0;
        self.pixels[o + 1] = rgb.1;
        self.pixels[o + 2] = rgb.2;
    }
}

/// HSV (h in degrees, s and v in [0,1]) to 8-bit RGB, rounding half-up.
fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (u8, u8, u8) {
    let h = h.rem_euclid(360.0);
    let c = v * s;
    let x = c * (1.0 - ((h / 60.0).rem_euclid(2.0) - 1.0).abs());
    let m = v - c;
    let (r, g, b) = match (h / 60.0) as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let q = |t: f64| ((t + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    (q(r), q(g), q(b))
}

/// Color of one amplitude given the per-image maximum modulus.
///
/// Hue: h = arg(a)·120°/π, so arg 0 → red and arg π → green exactly.
pub fn amplitude_to_rgb(a: Complex64, max_mod: f64, spec: &ColorSpec) -> (u8, u8, u8) {
    let modulus = a.norm();
    if modulus == 0.0 || max_mod <= 0.0 {
        return (255, 255, 255);
    }
    let saturation = match spec.mode {
        ColorMode::Full => (modulus / max_mod).min(1.0).powf(spec.gamma),
        ColorMode::PhaseOnly => {
            if modulus > spec.zero_threshold * max_mod {
                1.0
            } else {
                return (255, 255, 255);
            }
        }
    };
    let hue = a.arg() * 120.0 / std::f64::consts::PI;
    hsv_to_rgb(hue, saturation, 1.0)
}

/// Renders a grid-layout plot image, one `px_per_cell`-sized block per cell.
pub fn render_grid(img: &PlotImage, px_per_cell: usize, spec: &ColorSpec) -> Result<RasterImage> {
    spec.validate()?;
    let Some((rows, cols)) = img.grid_dims() else {
        return Err(Error::invalid("render_grid needs a grid-layout image; see render_triangular"));
    };
    if px_per_cell == 0 {
        return Err(Error::invalid("px_per_cell must be at least 1"));
    }
    if img.values().is_empty() {
        return Err(Error::invalid("empty image"));
    }
    let max_mod = img.values().iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    render_cell_grid(img.values(), rows, cols, px_per_cell, spec, max_mod)
}

/// Shared grid rasterizer; `max_mod` is the normalization reference.
pub(crate) fn render_cell_grid(
    values: &[Complex64],
    rows: usize,
    cols: usize,
    px_per_cell: usize,
    spec: &ColorSpec,
    max_mod: f64,
) -> Result<RasterImage> {
    let mut out = RasterImage::blank(cols * px_per_cell, rows * px_per_cell);
    for r in 0..rows {
        for c in 0..cols {
            let rgb = amplitude_to_rgb(values[r * cols + c], max_mod, spec);
            for dy in 0..px_per_cell {
                for dx in 0..px_per_cell {
                    out.put(c * px_per_cell + dx, r * px_per_cell + dy, rgb);
                }
            }
        }
    }
    Ok(out)
}

/// Renders a triangular-layout image at `resolution` pixels of width
/// (height is half that). 4× supersampling with a box filter; pixels
/// outside the root triangle stay white.
pub fn render_triangular(img: &PlotImage, resolution: usize, spec: &ColorSpec) -> Result<RasterImage> {
    spec.validate()?;
    if img.layout() != CellLayout::Triangular {
        return Err(Error::invalid("render_triangular needs a triangular-layout image"));
    }
    if resolution < 2 {
        return Err(Error::invalid("resolution must be at least 2 pixels"));
    }
    let levels = img.scheme().num_sites;
    let width = resolution;
    let height = resolution.div_ceil(2);
    let max_mod = img.values().iter().map(|v| v.norm()).fold(0.0f64, f64::max);

    use rayon::prelude::*;
    let rows: Vec<Vec<u8>> = (0..height)
        .into_par_iter()
        .map(|py| {
            let mut row = vec![255u8; width * 3];
            for px in 0..width {
                let mut acc = [0u32; 3];
                for (sx, sy) in [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)] {
                    let x = -1.0 + 2.0 * (px as f64 + sx) / width as f64;
                    let y = 1.0 - (py as f64 + sy) / height as f64;
                    let rgb = match triangular_locate((x, y), levels) {
                        Some(flat) => amplitude_to_rgb(img.values()[flat], max_mod, spec),
                        None => (255, 255, 255),
                    };
                    acc[0] += rgb.0 as u32;
                    acc[1] += rgb.1 as u32;
                    acc[2] += rgb.2 as u32;
                }
                for k in 0..3 {
                    row[px * 3 + k] = ((acc[k] as f64 / 4.0).round()) as u8;
                }
            }
            row
        })
        .collect();

    let mut out = RasterImage::blank(width, height);
    for (py, row) in rows.into_iter().enumerate() {
        out.pixels[py * width * 3..(py + 1) * width * 3].copy_from_slice(&row);
    }
    Ok(out)
}

/// Writes binary PPM (P6): `P6\n<w> <h>\n255\n` then raw RGB bytes.
pub fn write_ppm(img: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::with_capacity(img.pixels.len() + 32);
    write!(buf, "P6\n{} {}\n255\n", img.width, img.height)?;
    buf.extend_from_slice(&img.pixels);
    fs::write(path, buf)?;
    Ok(())
}

/// Writes PNG (RGB8, no interlace).
pub fn write_png(img: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let buffer: image::RgbImage =
        image::ImageBuffer::from_raw(img.width as u32, img.height as u32, img.pixels.clone())
            .expect("pixel buffer matches dimensions");
    buffer
        .save_with_format(path.as_ref(), image::ImageFormat::Png)
        .map_err(|e| Error::invalid(format!("png encode failed: {e}")))?;
    Ok(())
}

/// Dispatches on the file extension: `.png` → PNG, anything else → PPM.
pub fn write_auto(img: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let is_png = path
        .as_ref()
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        write_png(img, path)
    } else {
        write_ppm(img, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_named_state, NamedState};
    use crate::qmap::{apply_scheme, PlotScheme, SchemeKind};
    use crate::state::StateVector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn color_anchors() {
        let spec = ColorSpec::default();
        assert_eq!(amplitude_to_rgb(c(0.0, 0.0), 1.0, &spec), (255, 255, 255));
        assert_eq!(amplitude_to_rgb(c(1.0, 0.0), 1.0, &spec), (255, 0, 0));
        assert_eq!(amplitude_to_rgb(c(-1.0, 0.0), 1.0, &spec), (0, 255, 0));
    }

    #[test]
    fn whiteness_monotone_in_modulus() {
        let spec = ColorSpec::default();
        for phase_step in 0..12 {
            let phi = phase_step as f64 * std::f64::consts::PI / 6.0;
            let mut prev_dist = -1.0f64;
            for k in 0..=20 {
                let a = Complex64::from_polar(k as f64 / 20.0, phi);
                let (r, g, b) = amplitude_to_rgb(a, 1.0, &spec);
                let dist = (((255 - r as i32).pow(2) + (255 - g as i32).pow(2)
                    + (255 - b as i32).pow(2)) as f64)
                    .sqrt();
                assert!(dist + 1e-9 >= prev_dist, "phase {phi}: distance to white decreased");
                prev_dist = dist;
            }
        }
    }

    #[test]
    fn ppm_bytes_exact() {
        let dir = tempfile::tempdir().unwrap();
        let one = RasterImage { width: 1, height: 1, pixels: vec![255, 255, 255] };
        let p = dir.path().join("w.ppm");
        write_ppm(&one, &p).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"P6\n1 1\n255\n\xff\xff\xff");

        let two = RasterImage { width: 2, height: 1, pixels: vec![255, 0, 0, 0, 255, 0] };
        let p = dir.path().join("rg.ppm");
        write_ppm(&two, &p).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"P6\n2 1\n255\n\xff\x00\x00\x00\xff\x00");
    }

    /// Minimal P6 reader used as a round-trip reference.
    fn read_ppm(bytes: &[u8]) -> (usize, usize, Vec<u8>) {
        let text_end = bytes
            .windows(1)
            .enumerate()
            .filter(|(_, w)| w[0] == b'\n')
            .map(|(i, _)| i)
            .nth(2)
            .unwrap();
        let header = std::str::from_utf8(&bytes[..text_end]).unwrap();
        let mut parts = header.split_ascii_whitespace();
        assert_eq!(parts.next(), Some("P6"));
        let w: usize = parts.next().unwrap().parse().unwrap();
        let h: usize = parts.next().unwrap().parse().unwrap();
        assert_eq!(parts.next(), Some("255"));
        (w, h, bytes[text_end + 1..].to_vec())
    }

    #[test]
    fn ppm_round_trip_with_reference_reader() {
        let dir = tempfile::tempdir().unwrap();
        let st = make_named_state(NamedState::Dicke { excitations: 2 }, 4).unwrap();
        let img = apply_scheme(&st, &PlotScheme::new(SchemeKind::Standard2d, 4).unwrap()).unwrap();
        let raster = render_grid(&img, 3, &ColorSpec::default()).unwrap();
        let p = dir.path().join("d.ppm");
        write_ppm(&raster, &p).unwrap();
        let (w, h, pix) = read_ppm(&std::fs::read(&p).unwrap());
        assert_eq!((w, h), (raster.width, raster.height));
        assert_eq!(pix, raster.pixels);
    }

    #[test]
    fn grid_dimensions_and_single_block() {
        let st = StateVector::basis_state(4, 2, 0).unwrap();
        let img = apply_scheme(&st, &PlotScheme::new(SchemeKind::Standard2d, 4).unwrap()).unwrap();
        let raster = render_grid(&img, 2, &ColorSpec::default()).unwrap();
        assert_eq!((raster.width, raster.height), (8, 8));
        let mut non_white = vec![];
        for y in 0..8 {
            for x in 0..8 {
                if raster.pixel(x, y) != (255, 255, 255) {
                    non_white.push((x, y));
                }
            }
        }
        assert_eq!(non_white, vec![(0, 0), (1, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn ghz_corners_share_color() {
        let st = make_named_state(NamedState::Ghz, 4).unwrap();
        let img = apply_scheme(&st, &PlotScheme::new(SchemeKind::Standard2d, 4).unwrap()).unwrap();
        let raster = render_grid(&img, 1, &ColorSpec::default()).unwrap();
        assert_eq!(raster.pixel(0, 0), (255, 0, 0));
        assert_eq!(raster.pixel(3, 3), (255, 0, 0));
    }

    #[test]
    fn rendering_is_deterministic() {
        let st = make_named_state(NamedState::RandomPermInvariant { seed: 9 }, 8).unwrap();
        let img = apply_scheme(&st, &PlotScheme::new(SchemeKind::Standard2d, 8).unwrap()).unwrap();
        let a = render_grid(&img, 2, &ColorSpec::default()).unwrap();
        let b = render_grid(&img, 2, &ColorSpec::default()).unwrap();
        assert_eq!(a, b);

        let tri = apply_scheme(&st, &PlotScheme::new(SchemeKind::Triangular, 8).unwrap()).unwrap();
        let ta = render_triangular(&tri, 64, &ColorSpec::default()).unwrap();
        let tb = render_triangular(&tri, 64, &ColorSpec::default()).unwrap();
        assert_eq!(ta, tb);
    }

    #[test]
    fn triangular_uniform_state_is_flat_inside() {
        let n = 4;
        let amps = vec![c(0.25, 0.0); 16];
        let st = StateVector::new(n, 2, amps).unwrap();
        let img = apply_scheme(&st, &PlotScheme::new(SchemeKind::Triangular, n).unwrap()).unwrap();
        let raster = render_triangular(&img, 128, &ColorSpec::default()).unwrap();
        // Interior sample points share one color.
        let center = raster.pixel(64, 40);
        assert_ne!(center, (255, 255, 255));
        for (x, y) in [(50, 50), (80, 50), (64, 30), (60, 45)] {
            assert_eq!(raster.pixel(x, y), center);
        }
        // Corners above the hypotenuse-left region stay white.
        assert_eq!(raster.pixel(0, 0), (255, 255, 255));
        assert_eq!(raster.pixel(127, 0), (255, 255, 255));
    }

    #[test]
    fn triangular_single_qubit_zero_colors_left_half() {
        let st = StateVector::basis_state(1, 2, 0).unwrap();
        let img = apply_scheme(&st, &PlotScheme::new(SchemeKind::Triangular, 1).unwrap()).unwrap();
        let raster = render_triangular(&img, 64, &ColorSpec::default()).unwrap();
        // |0⟩'s cell is the left half-triangle: colored on the left, white right.
        assert_eq!(raster.pixel(20, 25), (255, 0, 0));
        assert_eq!(raster.pixel(44, 25), (255, 255, 255));
    }

    #[test]
    fn neel_superposition_hugs_bottom_corners() {
        let n = 8;
        let mut amps = vec![c(0.0, 0.0); 256];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[0b01010101] = c(h, 0.0);
        amps[0b10101010] = c(h, 0.0);
        let st = StateVector::new(n, 2, amps).unwrap();
        let img = apply_scheme(&st, &PlotScheme::new(SchemeKind::Triangular, n).unwrap()).unwrap();
        let raster = render_triangular(&img, 256, &ColorSpec::default()).unwrap();
        let w = raster.width;
        let h_px = raster.height;
        // Colored pixels exist near both bottom corners and nowhere near the apex.
        assert_ne!(raster.pixel(2, h_px - 2), (255, 255, 255));
        assert_ne!(raster.pixel(w - 3, h_px - 2), (255, 255, 255));
        assert_eq!(raster.pixel(w / 2, 2), (255, 255, 255));
    }

    #[test]
    fn phase_only_mode_saturates() {
        let spec = ColorSpec::phase_only();
        // A tiny but nonzero amplitude renders fully saturated.
        assert_eq!(amplitude_to_rgb(c(1e-6, 0.0), 1.0, &spec), (255, 0, 0));
        assert_eq!(amplitude_to_rgb(c(0.0, 0.0), 1.0, &spec), (255, 255, 255));
    }
}
