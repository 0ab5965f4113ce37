//! Variable-exponent Morrey quasi-norms: the supremum over balls of weighted
//! local Lebesgue norms, the mixed sequence-space norm behind the convolution
//! inequality and the Triebel-Lizorkin-Morrey scale, and the power-reindexing
//! identity ‖(|f_ν|^t)‖_{M^{u/t}_{p/t}(ℓ_{q/t})} = ‖(f_ν)‖^t.
//!
//! The supremum over all centers and radii is discretized to stride-decimated
//! node centers and dyadic radii {2^k h} capped at the half-extent L; the
//! reported value is therefore a lower bound for the continuum supremum.
//! Probes that compare two such norms share one family so the discretization
//! bias largely cancels.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponents::{recip, ExponentField};
use crate::grid::{Grid, GridFunction, Point};
use crate::lebesgue::{quasi_norm, DomainMask};

/// Discretization of the Morrey supremum: ball centers (grid nodes) and a
/// dyadic set of radii.
#[derive(Debug, Clone)]
pub struct BallFamily {
    grid: Grid,
    centers: Vec<usize>,
    radii: Vec<f64>,
}

impl BallFamily {
    /// Centers decimated with the given per-axis stride, radii 2^k h for
    /// k = 0..=max_scale, capped at the torus half-extent L.
    pub fn new(grid: Grid, stride: usize, max_scale: u32) -> Result<Self> {
        if stride == 0 {
            return Err(Error::Domain("center stride must be at least 1".into()));
        }
        let n = grid.samples_per_axis();
        let centers: Vec<usize> = (0..grid.node_count())
            .filter(|k| {
                let (ix, iy) = (k % n, k / n);
                ix % stride == 0 && iy % stride == 0
            })
            .collect();
        let h = grid.spacing();
        let mut radii: Vec<f64> = (0..=max_scale)
            .map(|k| 2f64.powi(k as i32) * h)
            .filter(|&r| r <= grid.half_extent())
            .collect();
        if radii.is_empty() {
            radii.push(h);
        }
        if centers.is_empty() {
            return Err(Error::Domain("ball family has no centers".into()));
        }
        Ok(BallFamily {
            grid,
            centers,
            radii,
        })
    }

    /// Desk-scale default: stride N/64 per axis and every dyadic radius up
    /// to the cap.
    pub fn default_for(grid: Grid) -> Self {
        let stride = (grid.samples_per_axis() / 64).max(1);
        Self::new(grid, stride, 63).expect("default family is valid")
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.centers.len() * self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// The ball realizing the Morrey supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgmaxBall {
    pub center_index: usize,
    pub center: Point,
    pub radius: f64,
}

/// A Morrey norm value together with its argmax ball. Ties are broken toward
/// the smaller radius, then the lexicographically smaller center.
#[derive(Debug, Clone, Copy)]
pub struct MorreyNorm {
    pub value: f64,
    pub argmax: ArgmaxBall,
}

fn check_morrey_exponents(p: &ExponentField, u: &ExponentField) -> Result<()> {
    if p.grid() != u.grid() {
        return Err(Error::GridMismatch("p and u must share one grid".into()));
    }
    if u.p_plus().is_infinite() {
        return Err(Error::Input(
            "Morrey norms require sup u < ∞ (the toolkit enforces the theorems' standing assumption)"
                .into(),
        ));
    }
    for (k, (&pv, &uv)) in p.samples().iter().zip(u.samples()).enumerate() {
        if pv > uv {
            return Err(Error::Input(format!(
                "p ≤ u violated at node {k} (x = {:?}): p = {pv}, u = {uv}",
                p.grid().coords(k)
            )));
        }
    }
    Ok(())
}

fn lex_smaller(a: Point, b: Point) -> bool {
    (a[0], a[1]) < (b[0], b[1])
}

/// ‖f‖_{M^{u(·)}_{p(·)}} over the family: the maximum of
/// r^{n(1/u(x₀)-1/p(x₀))} ‖f‖_{L_{p(·)}(B_r(x₀))}, with a deterministic
/// argmax regardless of evaluation order.
pub fn morrey_norm(
    f: &GridFunction,
    p: &ExponentField,
    u: &ExponentField,
    family: &BallFamily,
) -> Result<MorreyNorm> {
    check_morrey_exponents(p, u)?;
    if f.grid() != family.grid() || f.grid() != p.grid() {
        return Err(Error::GridMismatch(
            "function, exponents and family must share one grid".into(),
        ));
    }
    let grid = f.grid();
    let n = grid.dimension() as f64;

    let tasks: Vec<(usize, f64)> = family
        .centers()
        .iter()
        .flat_map(|&c| family.radii().iter().map(move |&r| (c, r)))
        .collect();

    let evaluated: Vec<(f64, usize, f64)> = tasks
        .par_iter()
        .map(|&(center_index, radius)| {
            let center = grid.coords(center_index);
            let mask = DomainMask::ball(grid, center, radius)?;
            let local = quasi_norm(f, p, &mask)?;
            let exponent = n * (recip(u.value(center_index)) - recip(p.value(center_index)));
            Ok((radius.powf(exponent) * local, center_index, radius))
        })
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, usize, f64)> = None;
    for &(value, center_index, radius) in &evaluated {
        let replace = match best {
            None => true,
            Some((bv, bc, br)) => {
                value > bv
                    || (value == bv
                        && (radius < br
                            || (radius == br
                                && lex_smaller(grid.coords(center_index), grid.coords(bc)))))
            }
        };
        if replace {
            best = Some((value, center_index, radius));
        }
    }
    let (value, center_index, radius) = best.expect("family is nonempty");
    Ok(MorreyNorm {
        value,
        argmax: ArgmaxBall {
            center_index,
            center: grid.coords(center_index),
            radius,
        },
    })
}

/// Pointwise ℓ_{q(x)} aggregation (Σ_ν |f_ν(x)|^{q(x)})^{1/q(x)}, with the
/// supremum modification wherever q(x) = ∞.
pub fn aggregate_lq(fs: &[GridFunction], q: &ExponentField) -> Result<GridFunction> {
    let first = fs
        .first()
        .ok_or_else(|| Error::Input("sequence norm of an empty sequence".into()))?;
    let grid = first.grid();
    if grid != q.grid() {
        return Err(Error::GridMismatch("sequence and q must share one grid".into()));
    }
    for f in fs {
        if f.grid() != grid {
            return Err(Error::GridMismatch("sequence members live on different grids".into()));
        }
    }
    let samples: Vec<Complex64> = (0..grid.node_count())
        .map(|k| {
            let qk = q.value(k);
            let v = if qk.is_infinite() {
                fs.iter().map(|f| f.samples()[k].norm()).fold(0.0, f64::max)
            } else {
                let sum: f64 = fs.iter().map(|f| f.samples()[k].norm().powf(qk)).sum();
                sum.powf(1.0 / qk)
            };
            Complex64::new(v, 0.0)
        })
        .collect();
    GridFunction::from_samples(grid, samples)
}

/// The M^{u(·)}_{p(·)}(ℓ_{q(·)}) norm of a finite sequence: the Morrey norm
/// of the pointwise ℓ_{q(x)} aggregation.
pub fn mixed_sequence_norm(
    fs: &[GridFunction],
    p: &ExponentField,
    u: &ExponentField,
    q: &ExponentField,
    family: &BallFamily,
) -> Result<MorreyNorm> {
    if q.p_minus() <= 0.0 {
        return Err(Error::Domain("q⁻ must be positive".into()));
    }
    let aggregated = aggregate_lq(fs, q)?;
    morrey_norm(&aggregated, p, u, family)
}

/// Both sides of the power-reindexing identity evaluated with one family:
/// lhs = ‖(|f_ν|^t)‖_{M^{u/t}_{p/t}(ℓ_{q/t})}, rhs = ‖(f_ν)‖^t. The two
/// routes agree to 1e-8 relative.
pub fn power_reindex_check(
    fs: &[GridFunction],
    p: &ExponentField,
    u: &ExponentField,
    q: &ExponentField,
    t: f64,
    family: &BallFamily,
) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("power t must be positive, got {t}")));
    }
    let powered: Vec<GridFunction> = fs.iter().map(|f| f.abs_powf(t)).collect();
    let lhs = mixed_sequence_norm(&powered, &p.div(t)?, &u.div(t)?, &q.div(t)?, family)?.value;
    let rhs = mixed_sequence_norm(fs, p, u, q, family)?.value.powf(t);
    Ok((lhs, rhs))
}
