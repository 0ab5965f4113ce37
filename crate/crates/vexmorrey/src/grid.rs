//! Uniform periodic grids, sampled complex functions, Fourier transforms in
//! the symmetric (2π)^{-n/2} normalization, spectral convolution, and the
//! scaled decay kernels eta_{nu,m}.
//!
//! The domain is the torus [-L, L)^n for n in {1, 2}, sampled at N points per
//! axis (N a power of two). Frequency-side functions live on the dual lattice
//! with spacing pi/L; `fourier` and `inverse_fourier` are scaled so that they
//! are Riemann-sum consistent with the integral transforms
//!
//!   f^(xi)  = (2π)^{-n/2} ∫ f(x)  e^{-i x·xi} dx,
//!   f(x)    = (2π)^{-n/2} ∫ f^(xi) e^{+i x·xi} dxi.
//!
//! Under this convention the convolution theorem carries the constant
//! (2π)^{n/2}: (f*g)^ = (2π)^{n/2} f^ g^; `convolve` applies it internally.

use std::cell::RefCell;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// A spatial or frequency point. For 1-d grids the second coordinate is 0.
pub type Point = [f64; 2];

/// Euclidean length of a point.
pub fn point_norm(p: Point) -> f64 {
    (p[0] * p[0] + p[1] * p[1]).sqrt()
}

/// Uniform periodic grid on the torus [-L, L)^n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dimension: usize,
    samples_per_axis: usize,
    half_extent: f64,
}

impl Grid {
    /// Build a grid; `n` must be 1 or 2, `samples_per_axis` a power of two
    /// of at least 8, `half_extent` positive.
    pub fn new(dimension: usize, samples_per_axis: usize, half_extent: f64) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::Domain(format!(
                "grid dimension must be 1 or 2, got {dimension}"
            )));
        }
        if samples_per_axis < 8 || !samples_per_axis.is_power_of_two() {
            return Err(Error::Domain(format!(
                "samples per axis must be a power of two >= 8, got {samples_per_axis}"
            )));
        }
        if !(half_extent > 0.0) || !half_extent.is_finite() {
            return Err(Error::Domain(format!(
                "half extent must be positive and finite, got {half_extent}"
            )));
        }
        Ok(Grid {
            dimension,
            samples_per_axis,
            half_extent,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn samples_per_axis(&self) -> usize {
        self.samples_per_axis
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    /// Grid spacing h = 2L/N.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.samples_per_axis as f64
    }

    /// Total number of nodes, N^n.
    pub fn node_count(&self) -> usize {
        self.samples_per_axis.pow(self.dimension as u32)
    }

    /// Riemann weight of one node, h^n.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dimension as i32)
    }

    /// Spatial coordinates of the node with flat index `k` (x varies fastest).
    pub fn coords(&self, k: usize) -> Point {
        let n = self.samples_per_axis;
        let h = self.spacing();
        let ix = k % n;
        let iy = k / n;
        let x = -self.half_extent + ix as f64 * h;
        let y = if self.dimension == 2 {
            -self.half_extent + iy as f64 * h
        } else {
            0.0
        };
        [x, y]
    }

    /// Frequency lattice spacing, pi/L.
    pub fn freq_step(&self) -> f64 {
        std::f64::consts::PI / self.half_extent
    }

    /// Largest representable frequency magnitude per axis, (N/2)·pi/L.
    pub fn max_frequency(&self) -> f64 {
        self.samples_per_axis as f64 / 2.0 * self.freq_step()
    }

    /// Unaliased frequency of the node with flat index `k` (standard DFT
    /// ordering; indices past N/2 count as negative).
    pub fn freq(&self, k: usize) -> Point {
        let n = self.samples_per_axis;
        let d = self.freq_step();
        let signed = |i: usize| -> f64 {
            if i < n / 2 {
                i as f64
            } else {
                i as f64 - n as f64
            }
        };
        let ix = k % n;
        let iy = k / n;
        let fx = signed(ix) * d;
        let fy = if self.dimension == 2 { signed(iy) * d } else { 0.0 };
        [fx, fy]
    }

    /// Distance between two points in the torus (wrap-around) metric.
    pub fn torus_distance(&self, a: Point, b: Point) -> f64 {
        let period = 2.0 * self.half_extent;
        let wrap = |d: f64| {
            let d = d.abs() % period;
            d.min(period - d)
        };
        let dx = wrap(a[0] - b[0]);
        if self.dimension == 1 {
            dx
        } else {
            let dy = wrap(a[1] - b[1]);
            (dx * dx + dy * dy).sqrt()
        }
    }

    /// Torus distance in the max metric (open cubes Q_r are its balls).
    pub fn torus_distance_max(&self, a: Point, b: Point) -> f64 {
        let period = 2.0 * self.half_extent;
        let wrap = |d: f64| {
            let d = d.abs() % period;
            d.min(period - d)
        };
        let dx = wrap(a[0] - b[0]);
        if self.dimension == 1 {
            dx
        } else {
            dx.max(wrap(a[1] - b[1]))
        }
    }

    /// Torus distance of the node `k` from the origin.
    pub fn distance_from_origin(&self, k: usize) -> f64 {
        // Representatives live in [-L, L)^n, where the Euclidean length of the
        // representative equals the torus distance from 0.
        point_norm(self.coords(k))
    }

    /// Largest dyadic level J with 2^{J+1} <= N·pi/(2L), so that the top
    /// annulus {2^{J-1} <= |xi| <= 2^{J+1}} is alias-free.
    pub fn max_dyadic_level(&self) -> u32 {
        let cap = self.max_frequency();
        let mut j: u32 = 0;
        while 2f64.powi(j as i32 + 2) <= cap {
            j += 1;
        }
        j
    }

    /// Largest eta-kernel level resolvable on this grid, log2(L/h) - 1.
    pub fn max_eta_level(&self) -> u32 {
        let ratio = self.half_extent / self.spacing();
        (ratio.log2() - 1.0).floor().max(0.0) as u32
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    })
}

/// Unnormalized DFT along every axis, in place. `forward` selects the sign.
fn dft_in_place(grid: &Grid, data: &mut [Complex64], forward: bool) {
    let n = grid.samples_per_axis;
    let fft = plan(n, forward);
    match grid.dimension {
        1 => fft.process(data),
        2 => {
            // Rows (x contiguous), then columns through a scratch buffer.
            for row in data.chunks_exact_mut(n) {
                fft.process(row);
            }
            let mut column = vec![Complex64::default(); n];
            for ix in 0..n {
                for iy in 0..n {
                    column[iy] = data[iy * n + ix];
                }
                fft.process(&mut column);
                for iy in 0..n {
                    data[iy * n + ix] = column[iy];
                }
            }
        }
        _ => unreachable!(),
    }
}

/// Parity (-1)^{sum of axis indices} of the node with flat index `k`; this is
/// the phase translating between the DFT origin convention and [-L, L)^n.
fn index_parity(grid: &Grid, k: usize) -> f64 {
    let n = grid.samples_per_axis;
    let s = (k % n) + if grid.dimension == 2 { k / n } else { 0 };
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Complex samples of a function on a grid (spatial or frequency side).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn zero(grid: Grid) -> Self {
        GridFunction {
            grid,
            samples: vec![Complex64::default(); grid.node_count()],
        }
    }

    pub fn from_samples(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.node_count() {
            return Err(Error::Input(format!(
                "expected {} samples, got {}",
                grid.node_count(),
                samples.len()
            )));
        }
        Ok(GridFunction { grid, samples })
    }

    /// Sample a closure of the node coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> Complex64) -> Self {
        let samples = (0..grid.node_count()).map(|k| f(grid.coords(k))).collect();
        GridFunction { grid, samples }
    }

    /// Sample a real-valued closure.
    pub fn from_real_fn(grid: Grid, f: impl Fn(Point) -> f64) -> Self {
        Self::from_fn(grid, |p| Complex64::new(f(p), 0.0))
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Pointwise |f| as a real-valued grid function.
    pub fn abs(&self) -> GridFunction {
        GridFunction {
            grid: self.grid,
            samples: self.samples.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect(),
        }
    }

    /// Pointwise |f|^t.
    pub fn abs_powf(&self, t: f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .map(|z| Complex64::new(z.norm().powf(t), 0.0))
                .collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        Ok(GridFunction {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    /// Forward transform: Riemann-sum approximation of
    /// (2π)^{-n/2} ∫ f(x) e^{-i x·xi} dx on the frequency lattice.
    pub fn fourier(&self) -> GridFunction {
        let grid = self.grid;
        let mut data = self.samples.clone();
        // x_j·xi_k = -pi·k + 2π jk/N per axis (samples indexed from -L), so
        // the transform is the plain DFT with a parity on the frequency bins.
        dft_in_place(&grid, &mut data, true);
        let scale = (2.0 * std::f64::consts::PI).powf(-(grid.dimension as f64) / 2.0)
            * grid.cell_volume();
        for (k, z) in data.iter_mut().enumerate() {
            *z *= scale * index_parity(&grid, k);
        }
        GridFunction { grid, samples: data }
    }

    /// Inverse transform; `inverse_fourier(fourier(f)) = f` to 1e-10 relative.
    pub fn inverse_fourier(&self) -> GridFunction {
        let grid = self.grid;
        let mut data = self.samples.clone();
        for (k, z) in data.iter_mut().enumerate() {
            *z *= index_parity(&grid, k);
        }
        dft_in_place(&grid, &mut data, false);
        let scale = (2.0 * std::f64::consts::PI).powf(-(grid.dimension as f64) / 2.0)
            * grid.freq_step().powi(grid.dimension as i32);
        for z in data.iter_mut() {
            *z *= scale;
        }
        GridFunction { grid, samples: data }
    }

    /// Periodic convolution with Riemann weight h^n, computed spectrally.
    /// Equals the direct double sum h^n Σ_y f(x-y) g(y) on the torus.
    pub fn convolve(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        let grid = self.grid;
        let mut fa = self.samples.clone();
        let mut fb = other.samples.clone();
        dft_in_place(&grid, &mut fa, true);
        dft_in_place(&grid, &mut fb, true);
        // The bin parity is the half-period index shift: both factors carry
        // the -L origin offset, one too many for the difference x - y.
        let scale = grid.cell_volume() / grid.node_count() as f64;
        for (k, (a, b)) in fa.iter_mut().zip(&fb).enumerate() {
            *a *= b * scale * index_parity(&grid, k);
        }
        dft_in_place(&grid, &mut fa, false);
        Ok(GridFunction { grid, samples: fa })
    }

    /// (m f^)∨ for a real frequency multiplier sampled over `|xi|`: one DFT,
    /// a pointwise scale by `multiplier(|xi_k|)`, one inverse DFT. Identical
    /// to `inverse_fourier` of `multiplier · fourier(self)`.
    pub fn apply_radial_multiplier(&self, multiplier: impl Fn(f64) -> f64) -> GridFunction {
        let grid = self.grid;
        let mut data = self.samples.clone();
        dft_in_place(&grid, &mut data, true);
        let inv_n = 1.0 / grid.node_count() as f64;
        for (k, z) in data.iter_mut().enumerate() {
            *z *= multiplier(point_norm(grid.freq(k))) * inv_n;
        }
        dft_in_place(&grid, &mut data, false);
        GridFunction { grid, samples: data }
    }

    /// Same as `apply_radial_multiplier` with the multiplier already sampled
    /// on the frequency lattice (one value per flat frequency index).
    pub fn apply_sampled_multiplier(&self, multiplier: &[f64]) -> Result<GridFunction> {
        if multiplier.len() != self.grid.node_count() {
            return Err(Error::Input(format!(
                "multiplier has {} samples, grid has {} nodes",
                multiplier.len(),
                self.grid.node_count()
            )));
        }
        let grid = self.grid;
        let mut data = self.samples.clone();
        dft_in_place(&grid, &mut data, true);
        let inv_n = 1.0 / grid.node_count() as f64;
        for (z, m) in data.iter_mut().zip(multiplier) {
            *z *= m * inv_n;
        }
        dft_in_place(&grid, &mut data, false);
        Ok(GridFunction { grid, samples: data })
    }

    /// True when the sample layer at the domain seam |x| = L has decayed to
    /// at most `fraction` of the peak (the tail rule for corpus functions).
    pub fn tail_decayed(&self, fraction: f64) -> bool {
        let peak = self.max_abs();
        if peak == 0.0 {
            return true;
        }
        let n = self.grid.samples_per_axis;
        let mut worst: f64 = 0.0;
        for (k, z) in self.samples.iter().enumerate() {
            let ix = k % n;
            let iy = k / n;
            let on_seam = ix == 0 || (self.grid.dimension == 2 && iy == 0);
            if on_seam {
                worst = worst.max(z.norm());
            }
        }
        worst <= fraction * peak
    }
}

/// Samples of eta_{nu,m}(x) = 2^{nu n} (1 + 2^nu |x|)^{-m} on the torus via
/// its periodization, truncated once the remaining image tail is below 1e-5
/// of the kernel mass (image count capped at 1024 per side in 1-d, 8 in
/// 2-d). Requires m > n. The on-torus Riemann sum then reproduces the
/// real-line integral, which the scaling substitution makes nu-independent.
pub fn eta_kernel(nu: u32, m: f64, grid: Grid) -> Result<GridFunction> {
    let n = grid.dimension as f64;
    if !(m > n) {
        return Err(Error::Domain(format!(
            "eta kernel needs m > n for integrability, got m = {m}, n = {n}"
        )));
    }
    let scale = 2f64.powi((nu as i32) * grid.dimension() as i32);
    let rate = 2f64.powi(nu as i32);
    let period = 2.0 * grid.half_extent();
    // Images past radius R contribute ≲ (1 + 2^nu R)^{n-m} of the mass.
    let reach = 1e5f64.powf(1.0 / (m - n)) / rate;
    let cap = if grid.dimension() == 1 { 1024 } else { 8 };
    let images = (((reach - grid.half_extent()) / period).ceil().max(0.0) as i64).min(cap);
    Ok(GridFunction::from_real_fn(grid, |p| {
        let mut sum = 0.0;
        for ix in -images..=images {
            let dx = p[0] + period * ix as f64;
            if grid.dimension() == 1 {
                sum += (1.0 + rate * dx.abs()).powf(-m);
            } else {
                for iy in -images..=images {
                    let dy = p[1] + period * iy as f64;
                    sum += (1.0 + rate * (dx * dx + dy * dy).sqrt()).powf(-m);
                }
            }
        }
        scale * sum
    }))
}

/// Riemann sum h^n Σ f of a grid function (complex).
pub fn riemann_sum(f: &GridFunction) -> Complex64 {
    let w = f.grid().cell_volume();
    f.samples().iter().sum::<Complex64>() * w
}

// ---------------------------------------------------------------------------
// File formats: CSV (coordinates + re/im columns) and raw little-endian f64
// with a one-line text header "gf64 n=<n> N=<N> L=<L>".
// ---------------------------------------------------------------------------

pub fn write_csv(f: &GridFunction, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    let grid = f.grid();
    if grid.dimension() == 1 {
        writeln!(out, "x,re,im")?;
    } else {
        writeln!(out, "x,y,re,im")?;
    }
    let mut line = String::new();
    for (k, z) in f.samples().iter().enumerate() {
        let p = grid.coords(k);
        line.clear();
        if grid.dimension() == 1 {
            let _ = write!(line, "{},{},{}", p[0], z.re, z.im);
        } else {
            let _ = write!(line, "{},{},{},{}", p[0], p[1], z.re, z.im);
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_csv(grid: Grid, path: &Path) -> Result<GridFunction> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut samples = Vec::with_capacity(grid.node_count());
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with('x')) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let want = grid.dimension() + 2;
        if fields.len() != want {
            return Err(Error::Input(format!(
                "csv line {} has {} fields, expected {}",
                lineno + 1,
                fields.len(),
                want
            )));
        }
        let re: f64 = fields[want - 2]
            .trim()
            .parse()
            .map_err(|e| Error::Input(format!("csv line {}: {e}", lineno + 1)))?;
        let im: f64 = fields[want - 1]
            .trim()
            .parse()
            .map_err(|e| Error::Input(format!("csv line {}: {e}", lineno + 1)))?;
        samples.push(Complex64::new(re, im));
    }
    GridFunction::from_samples(grid, samples)
}

pub fn write_raw(f: &GridFunction, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    let grid = f.grid();
    writeln!(
        out,
        "gf64 n={} N={} L={}",
        grid.dimension(),
        grid.samples_per_axis(),
        grid.half_extent()
    )?;
    for z in f.samples() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_raw(path: &Path) -> Result<GridFunction> {
    let mut reader = BufReader::new(std::fs::File::open(path)?);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let header = header.trim();
    let mut n = None;
    let mut npts = None;
    let mut l = None;
    for token in header.split_whitespace() {
        if let Some(v) = token.strip_prefix("n=") {
            n = v.parse::<usize>().ok();
        } else if let Some(v) = token.strip_prefix("N=") {
            npts = v.parse::<usize>().ok();
        } else if let Some(v) = token.strip_prefix("L=") {
            l = v.parse::<f64>().ok();
        }
    }
    let (n, npts, l) = match (header.starts_with("gf64"), n, npts, l) {
        (true, Some(n), Some(npts), Some(l)) => (n, npts, l),
        _ => {
            return Err(Error::Input(format!(
                "bad gf64 header: {header:?} (expected \"gf64 n=.. N=.. L=..\")"
            )))
        }
    };
    let grid = Grid::new(n, npts, l)?;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let want = grid.node_count() * 16;
    if bytes.len() != want {
        return Err(Error::Input(format!(
            "gf64 payload has {} bytes, expected {}",
            bytes.len(),
            want
        )));
    }
    let samples = bytes
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    GridFunction::from_samples(grid, samples)
}
