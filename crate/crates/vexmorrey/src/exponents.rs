//! Variable exponents p(·), q(·), u(·): closed-form descriptor families with
//! grid samples, essential bounds, tail values, log-Hölder certificates, the
//! correction constant c(p,u), and pointwise dual exponents.
//!
//! Infinite exponent values are the IEEE infinity and every consumer branches
//! on `is_infinite()` explicitly; they are never approximated by large floats.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, Point};

/// Closed-form family behind an exponent field. The descriptor supplies the
/// analytic tail value where one exists; sampled data falls back to the mean
/// over the outer 10% annulus of the truncated domain.
#[derive(Debug, Clone, PartialEq)]
pub enum ExponentDescriptor {
    /// p ≡ c with c in (0, ∞].
    Constant(f64),
    /// Smooth compactly supported perturbation of a constant:
    /// p(x) = base + amplitude · exp(1 - 1/(1-t²)) with t = |x-center|/width.
    Bump {
        base: f64,
        amplitude: f64,
        center: Point,
        width: f64,
    },
    /// Log-decay to a limit: p(x) = limit + amplitude / log(e + |x|).
    LogDecay { limit: f64, amplitude: f64 },
    /// Two constant plateaus split at x₀ = 0 (a deliberately non-log-Hölder
    /// family for negative tests).
    Jump { lower: f64, upper: f64 },
    /// User-supplied samples.
    Table,
    /// Result of a pointwise operation on another field.
    Derived(&'static str),
}

/// A variable exponent sampled on a grid, with cached essential bounds and
/// tail value.
#[derive(Debug, Clone)]
pub struct ExponentField {
    grid: Grid,
    samples: Vec<f64>,
    p_minus: f64,
    p_plus: f64,
    p_infinity: f64,
    descriptor: ExponentDescriptor,
}

/// The smooth bump profile exp(1 - 1/(1-t²)) on |t| < 1, zero outside.
/// Peak value 1 at t = 0; all derivatives vanish at |t| = 1.
pub fn smooth_bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

fn annulus_tail_mean(grid: &Grid, samples: &[f64]) -> f64 {
    let cutoff = 0.9 * grid.half_extent();
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut any_infinite = false;
    for (k, &v) in samples.iter().enumerate() {
        if grid.distance_from_origin(k) >= cutoff {
            if v.is_infinite() {
                any_infinite = true;
            } else {
                sum += v;
            }
            count += 1;
        }
    }
    if any_infinite {
        f64::INFINITY
    } else if count > 0 {
        sum / count as f64
    } else {
        // Cannot happen on a valid grid; fall back to the global mean.
        samples.iter().sum::<f64>() / samples.len() as f64
    }
}

impl ExponentField {
    fn build(grid: Grid, samples: Vec<f64>, tail: f64, descriptor: ExponentDescriptor) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Input("exponent field has no samples".into()));
        }
        if samples.len() != grid.node_count() {
            return Err(Error::Input(format!(
                "exponent field has {} samples, grid has {} nodes",
                samples.len(),
                grid.node_count()
            )));
        }
        let mut p_minus = f64::INFINITY;
        let mut p_plus: f64 = 0.0;
        for (k, &v) in samples.iter().enumerate() {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::Input(format!(
                    "exponent sample {v} at node {k} is outside (0, ∞]"
                )));
            }
            p_minus = p_minus.min(v);
            p_plus = p_plus.max(v);
        }
        Ok(ExponentField {
            grid,
            samples,
            p_minus,
            p_plus,
            p_infinity: tail,
            descriptor,
        })
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        let samples = vec![value; grid.node_count()];
        Self::build(grid, samples, value, ExponentDescriptor::Constant(value))
    }

    pub fn bump(grid: Grid, base: f64, amplitude: f64, center: Point, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Domain(format!("bump width must be positive, got {width}")));
        }
        let samples = (0..grid.node_count())
            .map(|k| {
                let d = grid.torus_distance(grid.coords(k), center);
                base + amplitude * smooth_bump(d / width)
            })
            .collect();
        Self::build(
            grid,
            samples,
            base,
            ExponentDescriptor::Bump {
                base,
                amplitude,
                center,
                width,
            },
        )
    }

    pub fn log_decay(grid: Grid, limit: f64, amplitude: f64) -> Result<Self> {
        let samples = (0..grid.node_count())
            .map(|k| {
                let d = grid.distance_from_origin(k);
                limit + amplitude / (std::f64::consts::E + d).ln()
            })
            .collect();
        Self::build(
            grid,
            samples,
            limit,
            ExponentDescriptor::LogDecay { limit, amplitude },
        )
    }

    pub fn jump(grid: Grid, lower: f64, upper: f64) -> Result<Self> {
        let samples: Vec<f64> = (0..grid.node_count())
            .map(|k| if grid.coords(k)[0] < 0.0 { lower } else { upper })
            .collect();
        let tail = annulus_tail_mean(&grid, &samples);
        Self::build(grid, samples, tail, ExponentDescriptor::Jump { lower, upper })
    }

    /// Build from raw samples. Without an explicit tail value the tail is the
    /// mean over the outer 10% annulus.
    pub fn from_samples(grid: Grid, samples: Vec<f64>, tail: Option<f64>) -> Result<Self> {
        let tail = tail.unwrap_or_else(|| annulus_tail_mean(&grid, &samples));
        Self::build(grid, samples, tail, ExponentDescriptor::Table)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn descriptor(&self) -> &ExponentDescriptor {
        &self.descriptor
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn value(&self, node: usize) -> f64 {
        self.samples[node]
    }

    /// (p⁻, p⁺): on a grid the essential inf/sup are realized as min/max.
    pub fn essential_bounds(&self) -> (f64, f64) {
        (self.p_minus, self.p_plus)
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    /// Tail value p_∞ (descriptor value when available, annulus mean else).
    pub fn p_infinity(&self) -> f64 {
        self.p_infinity
    }

    pub fn is_constant(&self) -> bool {
        self.p_minus == self.p_plus
    }

    /// Pointwise p(·)/t, used by the t-power identity.
    pub fn div(&self, t: f64) -> Result<ExponentField> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("exponent scale must be positive, got {t}")));
        }
        let samples = self.samples.iter().map(|&p| p / t).collect();
        let descriptor = match self.descriptor {
            ExponentDescriptor::Constant(c) => ExponentDescriptor::Constant(c / t),
            _ => ExponentDescriptor::Derived("scaled"),
        };
        Self::build(self.grid, samples, self.p_infinity / t, descriptor)
    }

    /// Pointwise dual exponent, 1/p + 1/p' = 1. Requires p ≥ 1 everywhere;
    /// p = 1 maps to ∞ and p = ∞ maps to 1.
    pub fn dual(&self) -> Result<ExponentField> {
        for (k, &p) in self.samples.iter().enumerate() {
            if p < 1.0 {
                return Err(Error::Domain(format!(
                    "dual exponent needs p ≥ 1, but p({:?}) = {p} at node {k}",
                    self.grid.coords(k)
                )));
            }
        }
        let dual_of = |p: f64| {
            if p.is_infinite() {
                1.0
            } else if p == 1.0 {
                f64::INFINITY
            } else {
                p / (p - 1.0)
            }
        };
        let samples = self.samples.iter().map(|&p| dual_of(p)).collect();
        let descriptor = match self.descriptor {
            ExponentDescriptor::Constant(c) => ExponentDescriptor::Constant(dual_of(c)),
            _ => ExponentDescriptor::Derived("dual"),
        };
        Self::build(self.grid, samples, dual_of(self.p_infinity), descriptor)
    }

    /// Empirical log-Hölder certificate of g = 1/p: the local constant is the
    /// pair supremum of |g(x)-g(y)|·log(e + 1/|x-y|), the tail constant the
    /// supremum of |g(x)-g_∞|·log(e + |x|). Coincident pairs are excluded.
    pub fn log_holder_certificate(&self, threshold: f64) -> Result<LogHolderCertificate> {
        if threshold < 0.0 {
            return Err(Error::Domain(format!(
                "certificate threshold must be nonnegative, got {threshold}"
            )));
        }
        let g: Vec<f64> = self.samples.iter().map(|&p| recip(p)).collect();
        let g_inf = recip(self.p_infinity);

        // Decimate to at most 2048 nodes for the pair supremum; strides are
        // powers of two so that refined grids evaluate a superset of pairs.
        let n = self.grid.samples_per_axis();
        let mut stride = 1usize;
        while (n / stride).pow(self.grid.dimension() as u32) > 2048 {
            stride *= 2;
        }
        let nodes: Vec<usize> = (0..self.grid.node_count())
            .filter(|k| {
                let (ix, iy) = (k % n, k / n);
                ix % stride == 0 && iy % stride == 0
            })
            .collect();

        let grid = self.grid;
        let c_log_local = nodes
            .par_iter()
            .enumerate()
            .map(|(i, &a)| {
                let pa = grid.coords(a);
                let mut best: f64 = 0.0;
                for &b in &nodes[i + 1..] {
                    let dist = grid.torus_distance(pa, grid.coords(b));
                    let factor = (std::f64::consts::E + 1.0 / dist).ln();
                    best = best.max((g[a] - g[b]).abs() * factor);
                }
                best
            })
            .reduce(|| 0.0, f64::max);

        let c_inf = (0..self.grid.node_count())
            .map(|k| {
                let d = self.grid.distance_from_origin(k);
                (g[k] - g_inf).abs() * (std::f64::consts::E + d).ln()
            })
            .fold(0.0, f64::max);

        Ok(LogHolderCertificate {
            c_log_local,
            c_inf,
            limit_value: g_inf,
            passes_local: c_log_local <= threshold,
            passes_global: c_log_local <= threshold && c_inf <= threshold,
            threshold,
        })
    }
}

/// 1/p with the convention 1/∞ = 0.
pub fn recip(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// Empirical log-Hölder constants of g = 1/p with pass flags per clause.
#[derive(Debug, Clone)]
pub struct LogHolderCertificate {
    pub c_log_local: f64,
    pub c_inf: f64,
    /// 1/p_∞.
    pub limit_value: f64,
    pub passes_local: bool,
    pub passes_global: bool,
    pub threshold: f64,
}

impl LogHolderCertificate {
    pub fn passes(&self) -> bool {
        self.passes_global
    }
}

/// The correction constant c(p,u) = max(0, sup_x (1/p(x) - 1/u(x)) - 1/p_∞).
/// It vanishes when p = u pointwise or p is constant.
pub fn c_pu(p: &ExponentField, u: &ExponentField) -> Result<f64> {
    if p.grid() != u.grid() {
        return Err(Error::GridMismatch("c_pu needs p and u on one grid".into()));
    }
    let mut sup = f64::NEG_INFINITY;
    for (k, (&pv, &uv)) in p.samples().iter().zip(u.samples()).enumerate() {
        if pv > uv {
            return Err(Error::Input(format!(
                "p ≤ u violated at node {k} (x = {:?}): p = {pv}, u = {uv}",
                p.grid().coords(k)
            )));
        }
        sup = sup.max(recip(pv) - recip(uv));
    }
    Ok((sup - recip(p.p_infinity())).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(1, 512, 16.0).unwrap()
    }

    #[test]
    fn constant_field_bounds() {
        let p = ExponentField::constant(grid(), 2.0).unwrap();
        assert_eq!(p.essential_bounds(), (2.0, 2.0));
        assert_eq!(p.p_infinity(), 2.0);

        let inf = ExponentField::constant(grid(), f64::INFINITY).unwrap();
        assert_eq!(inf.essential_bounds(), (f64::INFINITY, f64::INFINITY));
    }

    #[test]
    fn sine_squared_field_bounds() {
        // p(x) = 2 + sin²(x) on [-π, π): bounds (2, 3) to grid tolerance.
        let g = Grid::new(1, 2048, std::f64::consts::PI).unwrap();
        let samples = (0..g.node_count())
            .map(|k| 2.0 + g.coords(k)[0].sin().powi(2))
            .collect();
        let p = ExponentField::from_samples(g, samples, None).unwrap();
        let (lo, hi) = p.essential_bounds();
        let h = g.spacing();
        assert!((lo - 2.0).abs() <= h * h);
        assert!((hi - 3.0).abs() <= h * h);
    }

    #[test]
    fn empty_sample_set_is_rejected() {
        let err = ExponentField::from_samples(grid(), Vec::new(), None);
        assert!(err.is_err());
    }

    #[test]
    fn constant_certificate_is_zero() {
        let p = ExponentField::constant(grid(), 3.0).unwrap();
        let cert = p.log_holder_certificate(0.5).unwrap();
        assert_eq!(cert.c_log_local, 0.0);
        assert_eq!(cert.c_inf, 0.0);
        assert!(cert.passes());
    }

    #[test]
    fn log_decay_certificate_is_finite() {
        // p(x) = 2 + 1/log(e + |x|): finite constants, 1/p_∞ = 1/2.
        let p = ExponentField::log_decay(grid(), 2.0, 1.0).unwrap();
        let cert = p.log_holder_certificate(2.0).unwrap();
        assert!(cert.c_log_local.is_finite() && cert.c_log_local > 0.0);
        assert!(cert.c_inf.is_finite() && cert.c_inf > 0.0);
        assert!((cert.limit_value - 0.5).abs() < 1e-15);
        assert!(cert.passes(), "log-decay family should certify: {cert:?}");
    }

    #[test]
    fn jump_certificate_grows_under_refinement() {
        let coarse = Grid::new(1, 32, 64.0).unwrap();
        let fine = Grid::new(1, 2048, 64.0).unwrap();
        let threshold = 0.5;
        let c_coarse = ExponentField::jump(coarse, 2.0, 4.0)
            .unwrap()
            .log_holder_certificate(threshold)
            .unwrap();
        let c_fine = ExponentField::jump(fine, 2.0, 4.0)
            .unwrap()
            .log_holder_certificate(threshold)
            .unwrap();
        assert!(
            c_fine.c_log_local >= 2.0 * c_coarse.c_log_local,
            "jump certificate should at least double: {} -> {}",
            c_coarse.c_log_local,
            c_fine.c_log_local
        );
        assert!(!c_fine.passes_local);
    }

    #[test]
    fn certificate_is_refinement_monotone() {
        let coarse = Grid::new(1, 256, 16.0).unwrap();
        let fine = Grid::new(1, 512, 16.0).unwrap();
        let a = ExponentField::log_decay(coarse, 2.0, 1.0)
            .unwrap()
            .log_holder_certificate(10.0)
            .unwrap();
        let b = ExponentField::log_decay(fine, 2.0, 1.0)
            .unwrap()
            .log_holder_certificate(10.0)
            .unwrap();
        assert!(b.c_log_local >= a.c_log_local - 1e-12);
    }

    #[test]
    fn c_pu_vanishes_for_equal_or_constant_p() {
        let p = ExponentField::log_decay(grid(), 2.0, 0.5).unwrap();
        assert_eq!(c_pu(&p, &p).unwrap(), 0.0);

        let p2 = ExponentField::constant(grid(), 2.0).unwrap();
        let u5 = ExponentField::constant(grid(), 5.0).unwrap();
        assert_eq!(c_pu(&p2, &u5).unwrap(), 0.0);
    }

    #[test]
    fn c_pu_matches_hand_computation() {
        // p dips to 1.25 near the origin with tail value 4, u ≡ 5:
        // sup(1/p - 1/u) - 1/p_∞ = 0.8 - 0.2 - 0.25 = 0.35.
        let g = grid();
        let p = ExponentField::bump(g, 4.0, -2.75, [0.0, 0.0], 2.0).unwrap();
        assert!((p.p_minus() - 1.25).abs() < 1e-12, "bump peak sits on a node");
        let u = ExponentField::constant(g, 5.0).unwrap();
        let c = c_pu(&p, &u).unwrap();
        assert!((c - 0.35).abs() < 1e-9, "c_pu = {c}");
    }

    #[test]
    fn c_pu_rejects_misordered_exponents() {
        let p = ExponentField::constant(grid(), 3.0).unwrap();
        let u = ExponentField::constant(grid(), 2.0).unwrap();
        let err = c_pu(&p, &u).unwrap_err();
        assert!(err.to_string().contains("p ≤ u violated"));
    }

    #[test]
    fn dual_exponent_cases() {
        let g = grid();
        let two = ExponentField::constant(g, 2.0).unwrap();
        assert!(two.dual().unwrap().samples().iter().all(|&v| v == 2.0));

        let one = ExponentField::constant(g, 1.0).unwrap();
        assert!(one.dual().unwrap().samples().iter().all(|v| v.is_infinite()));

        let three = ExponentField::constant(g, 3.0).unwrap();
        assert!((three.dual().unwrap().value(0) - 1.5).abs() < 1e-15);

        let below = ExponentField::constant(g, 0.5).unwrap();
        assert!(below.dual().is_err());
    }

    #[test]
    fn dual_is_an_involution() {
        let g = Grid::new(1, 128, 8.0).unwrap();
        let p = ExponentField::bump(g, 2.0, 1.5, [1.0, 0.0], 3.0).unwrap();
        let back = p.dual().unwrap().dual().unwrap();
        for (a, b) in p.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
