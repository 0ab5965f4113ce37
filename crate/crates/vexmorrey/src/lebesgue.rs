//! The semimodular rho_{p(·)}, the variable-exponent Lebesgue quasi-norm
//! (including exponents below 1 via the t-power identity and the p = ∞
//! branch), norms restricted to balls, and the closed-form prediction for
//! characteristic functions of balls.
//!
//! The Luxemburg norm is the infimum over lambda > 0 with rho(f/lambda) ≤ 1.
//! The modular is monotone in lambda, so the norm is found by bisecting the
//! predicate rho(f/lambda) ≤ 1 (not the value, which is discontinuous when
//! p = ∞ somewhere). For exponents constant on the mask the infimum has the
//! closed form (h^n Σ |f|^p)^{1/p} and is returned directly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exponents::{recip, ExponentField};
use crate::grid::{Grid, GridFunction, Point};

/// Metric generating a mask ball: Euclidean balls B_r or max-metric cubes Q_r.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallMetric {
    Euclidean,
    Max,
}

/// The ball generating a mask, when there is one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskBall {
    pub center: Point,
    pub radius: f64,
    pub metric: BallMetric,
}

/// Node membership for norm restriction: a ball B_r(x₀) in the torus metric,
/// a cube Q_r(x₀), or the whole torus.
#[derive(Debug, Clone)]
pub struct DomainMask {
    grid: Grid,
    inside: Vec<bool>,
    ball: Option<MaskBall>,
}

impl DomainMask {
    pub fn whole(grid: Grid) -> Self {
        DomainMask {
            grid,
            inside: vec![true; grid.node_count()],
            ball: None,
        }
    }

    /// Nodes with torus distance |x - x₀| < r. Errors when no node falls
    /// inside (norms need at least one node).
    pub fn ball(grid: Grid, center: Point, radius: f64) -> Result<Self> {
        Self::metric_ball(grid, center, radius, BallMetric::Euclidean)
    }

    /// Open cube Q_r(x₀): the max-metric ball of radius r.
    pub fn cube(grid: Grid, center: Point, radius: f64) -> Result<Self> {
        Self::metric_ball(grid, center, radius, BallMetric::Max)
    }

    fn metric_ball(grid: Grid, center: Point, radius: f64, metric: BallMetric) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("ball radius must be positive, got {radius}")));
        }
        let inside: Vec<bool> = (0..grid.node_count())
            .map(|k| {
                let d = match metric {
                    BallMetric::Euclidean => grid.torus_distance(grid.coords(k), center),
                    BallMetric::Max => grid.torus_distance_max(grid.coords(k), center),
                };
                d < radius
            })
            .collect();
        if !inside.iter().any(|&b| b) {
            return Err(Error::Input(format!(
                "ball of radius {radius} at {center:?} contains no grid node"
            )));
        }
        Ok(DomainMask {
            grid,
            inside,
            ball: Some(MaskBall {
                center,
                radius,
                metric,
            }),
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// The ball that generated this mask, when there is one.
    pub fn generating_ball(&self) -> Option<MaskBall> {
        self.ball
    }

    pub fn contains(&self, node: usize) -> bool {
        self.inside[node]
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    pub fn node_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.inside
            .iter()
            .enumerate()
            .filter_map(|(k, &b)| b.then_some(k))
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    /// Riemann measure of the mask, h^n times the node count.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.grid.cell_volume()
    }

    /// Characteristic function of the mask.
    pub fn indicator(&self) -> GridFunction {
        let samples = self
            .inside
            .iter()
            .map(|&b| Complex64::new(if b { 1.0 } else { 0.0 }, 0.0))
            .collect();
        GridFunction::from_samples(self.grid, samples).expect("mask matches its own grid")
    }
}

fn check_alignment(f: &GridFunction, p: &ExponentField, mask: &DomainMask) -> Result<()> {
    if f.grid() != p.grid() || f.grid() != mask.grid() {
        return Err(Error::GridMismatch(
            "function, exponent and mask must share one grid".into(),
        ));
    }
    Ok(())
}

/// The three-case integrand phi_{p}(t): t^p for finite p; for p = ∞ it is 0
/// on [0, 1] and ∞ on (1, ∞].
fn phi(p: f64, t: f64) -> f64 {
    if p.is_infinite() {
        if t <= 1.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        t.powf(p)
    }
}

/// Semimodular rho_{p(·)}(f) = h^n Σ_mask phi_{p(x)}(|f(x)|). Requires p ≥ 1
/// on the mask; the quasi-norm path owns the case p⁻ < 1.
pub fn semimodular(f: &GridFunction, p: &ExponentField, mask: &DomainMask) -> Result<f64> {
    check_alignment(f, p, mask)?;
    let mut sum = 0.0;
    for k in mask.node_indices() {
        let pk = p.value(k);
        if pk < 1.0 {
            return Err(Error::Contract(format!(
                "semimodular needs p ≥ 1 on the mask, found p = {pk}; use the quasi-norm path"
            )));
        }
        let t = f.samples()[k].norm();
        if !t.is_finite() {
            return Err(Error::Input(format!("non-finite sample at node {k}")));
        }
        sum += phi(pk, t);
        if sum.is_infinite() {
            return Ok(f64::INFINITY);
        }
    }
    Ok(sum * f.grid().cell_volume())
}

/// Precomputed data for evaluating the modular of f/lambda fast, many times.
struct ModularEval {
    weight: f64,
    /// (ln|f(x)|, p(x)) for finite-exponent nodes with |f(x)| > 0.
    finite: Vec<(f64, f64)>,
    /// max |f| over p = ∞ nodes (0 when none exist).
    sup_branch: f64,
    max_abs: f64,
    p_min_mask: f64,
    p_constant: Option<f64>,
    count: usize,
}

impl ModularEval {
    fn collect(f: &GridFunction, p: &ExponentField, mask: &DomainMask) -> Result<Self> {
        let mut finite = Vec::new();
        let mut sup_branch: f64 = 0.0;
        let mut max_abs: f64 = 0.0;
        let mut p_min_mask = f64::INFINITY;
        let mut p_lo = f64::INFINITY;
        let mut p_hi: f64 = 0.0;
        let mut count = 0usize;
        for k in mask.node_indices() {
            count += 1;
            let pk = p.value(k);
            p_min_mask = p_min_mask.min(pk);
            p_lo = p_lo.min(pk);
            p_hi = p_hi.max(pk);
            let t = f.samples()[k].norm();
            if !t.is_finite() {
                return Err(Error::Input(format!("non-finite sample at node {k}")));
            }
            max_abs = max_abs.max(t);
            if pk.is_infinite() {
                sup_branch = sup_branch.max(t);
            } else if t > 0.0 {
                finite.push((t.ln(), pk));
            }
        }
        Ok(ModularEval {
            weight: f.grid().cell_volume(),
            finite,
            sup_branch,
            max_abs,
            p_min_mask,
            p_constant: (p_lo == p_hi).then_some(p_lo),
            count,
        })
    }

    /// rho(f/lambda) ≤ 1, the monotone predicate driving the bisection.
    fn within_unit_ball(&self, lambda: f64) -> bool {
        if self.sup_branch > lambda {
            return false;
        }
        let ln_lambda = lambda.ln();
        let mut sum = 0.0;
        let budget = 1.0 / self.weight;
        for &(ln_t, pk) in &self.finite {
            sum += (pk * (ln_t - ln_lambda)).exp();
            if sum > budget {
                return false;
            }
        }
        sum * self.weight <= 1.0
    }
}

/// Luxemburg norm on the mask: inf { lambda > 0 : rho_{p(·)}(f/lambda) ≤ 1 },
/// for p ≥ 1 on the mask. Bisection at 1e-10 relative tolerance; zero iff
/// f vanishes on the mask.
pub fn lebesgue_norm(f: &GridFunction, p: &ExponentField, mask: &DomainMask) -> Result<f64> {
    check_alignment(f, p, mask)?;
    let eval = ModularEval::collect(f, p, mask)?;
    if eval.p_min_mask < 1.0 {
        return Err(Error::Contract(format!(
            "lebesgue_norm needs p ≥ 1 on the mask, found p = {}; use quasi_norm",
            eval.p_min_mask
        )));
    }
    Ok(luxemburg(&eval, f.grid()))
}

fn luxemburg(eval: &ModularEval, grid: Grid) -> f64 {
    if eval.max_abs == 0.0 {
        return 0.0;
    }
    // Exponent constant on the mask: the infimum in closed form.
    if let Some(p0) = eval.p_constant {
        if p0.is_infinite() {
            return eval.sup_branch;
        }
        let sum: f64 = eval.finite.iter().map(|&(ln_t, pk)| (pk * ln_t).exp()).sum();
        return (sum * eval.weight).powf(1.0 / p0);
    }
    if eval.finite.is_empty() {
        // Only p = ∞ nodes carry mass: essential sup.
        return eval.sup_branch;
    }

    let n_over_p = grid.dimension() as f64 * recip(eval.p_min_mask);
    let measure = eval.count as f64 * eval.weight;
    let mut lo = grid.spacing().powf(n_over_p) * eval.max_abs * 1e-6;
    let mut hi = measure.powf(recip(eval.p_min_mask)) * eval.max_abs * 1e6;

    // The brackets straddle the norm for any finite sampled f; widen
    // defensively if rounding ever breaks that.
    let mut guard = 0;
    while !eval.within_unit_ball(hi) && guard < 4 {
        hi *= 1e3;
        guard += 1;
    }
    while eval.within_unit_ball(lo) && guard < 8 {
        lo *= 1e-3;
        guard += 1;
    }

    let mut iterations = 0;
    while hi / lo > 1.0 + 1e-10 && iterations < 200 {
        let mid = (lo * hi).sqrt();
        if eval.within_unit_ball(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    // hi satisfies rho(f/hi) ≤ 1, so the unit-ball property holds exactly.
    hi
}

/// The L_{p(·)} quasi-norm for any p ∈ P(Rⁿ): delegates to `lebesgue_norm`
/// when p⁻ ≥ 1, else applies the t-power identity with t = p⁻/2.
pub fn quasi_norm(f: &GridFunction, p: &ExponentField, mask: &DomainMask) -> Result<f64> {
    if p.p_minus() >= 1.0 {
        return lebesgue_norm(f, p, mask);
    }
    let t = p.p_minus() / 2.0;
    quasi_norm_with_power(f, p, mask, t)
}

/// The t-power route ‖f‖ = ‖ |f|^t ‖_{p/t}^{1/t}, exposed so the identity can
/// be checked for several t.
pub fn quasi_norm_with_power(
    f: &GridFunction,
    p: &ExponentField,
    mask: &DomainMask,
    t: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("power t must be positive, got {t}")));
    }
    if p.p_minus() / t < 1.0 {
        return Err(Error::Contract(format!(
            "t = {t} leaves (p/t)⁻ = {} below 1",
            p.p_minus() / t
        )));
    }
    let powered = f.abs_powf(t);
    let scaled = p.div(t)?;
    Ok(lebesgue_norm(&powered, &scaled, mask)?.powf(1.0 / t))
}

/// Closed-form prediction for ‖chi_{B_r(x₀)}‖_{L_{p(·)}}: r^{n/p(x₀)} when
/// r ≤ 1 and r^{n/p_∞} when r ≥ 1 (both branches give 1 at r = 1). Valid up
/// to constants for certified log-Hölder exponents.
pub fn char_ball_prediction(p: &ExponentField, x0: Point, r: f64) -> f64 {
    let grid = p.grid();
    let n = grid.dimension() as f64;
    if r <= 1.0 {
        let at_center = p.value(nearest_node(grid, x0));
        r.powf(n * recip(at_center))
    } else {
        r.powf(n * recip(p.p_infinity()))
    }
}

/// Flat index of the grid node closest to a point (torus wrap applied).
pub fn nearest_node(grid: Grid, point: Point) -> usize {
    let n = grid.samples_per_axis();
    let h = grid.spacing();
    let l = grid.half_extent();
    let snap = |c: f64| -> usize {
        let i = ((c + l) / h).round() as i64;
        i.rem_euclid(n as i64) as usize
    };
    if grid.dimension() == 1 {
        snap(point[0])
    } else {
        snap(point[1]) * n + snap(point[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn grid() -> Grid {
        Grid::new(1, 256, 8.0).unwrap()
    }

    fn random_function(grid: Grid, seed: u64) -> GridFunction {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        GridFunction::from_samples(
            grid,
            (0..grid.node_count())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn semimodular_of_unit_function_is_the_measure() {
        let g = grid();
        let p = ExponentField::constant(g, 2.0).unwrap();
        // Ball of measure exactly 1: radius 0.5 centered between two nodes,
        // so it holds 2r/h = 16 nodes.
        let mask = DomainMask::ball(g, [g.spacing() / 2.0, 0.0], 0.5).unwrap();
        assert!((mask.measure() - 1.0).abs() < 1e-12);
        let one = GridFunction::from_real_fn(g, |_| 1.0);
        let rho = semimodular(&one, &p, &mask).unwrap();
        assert!((rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn semimodular_infinity_branch() {
        let g = grid();
        let p = ExponentField::constant(g, f64::INFINITY).unwrap();
        let mask = DomainMask::whole(g);
        let small = GridFunction::from_real_fn(g, |p| 0.3 * (p[0]).cos());
        assert_eq!(semimodular(&small, &p, &mask).unwrap(), 0.0);

        let mut big = small.clone();
        big.samples_mut()[7] = Complex64::new(1.5, 0.0);
        assert!(semimodular(&big, &p, &mask).unwrap().is_infinite());
    }

    #[test]
    fn semimodular_rejects_subunit_exponents() {
        let g = grid();
        let p = ExponentField::constant(g, 0.5).unwrap();
        let f = random_function(g, 1);
        assert!(matches!(
            semimodular(&f, &p, &DomainMask::whole(g)),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn constant_exponent_norm_matches_quadrature() {
        let g = grid();
        let f = random_function(g, 2);
        let mask = DomainMask::whole(g);
        for p0 in [1.0, 1.5, 2.0, 4.0] {
            let p = ExponentField::constant(g, p0).unwrap();
            let norm = lebesgue_norm(&f, &p, &mask).unwrap();
            let direct = (f
                .samples()
                .iter()
                .map(|z| z.norm().powf(p0))
                .sum::<f64>()
                * g.cell_volume())
            .powf(1.0 / p0);
            assert!(
                (norm - direct).abs() <= 1e-9 * direct,
                "p = {p0}: {norm} vs {direct}"
            );
        }
        let pinf = ExponentField::constant(g, f64::INFINITY).unwrap();
        let norm = lebesgue_norm(&f, &pinf, &mask).unwrap();
        assert_eq!(norm, f.max_abs());
    }

    #[test]
    fn bisection_path_agrees_with_closed_form_for_constant_exponent() {
        // A two-plateau exponent exercises the bisection; compare it against
        // the modular equation root found independently.
        let g = grid();
        let p = ExponentField::jump(g, 2.0, 3.0).unwrap();
        let f = random_function(g, 3);
        let mask = DomainMask::whole(g);
        let norm = lebesgue_norm(&f, &p, &mask).unwrap();
        let rho = semimodular(&f.scale(Complex64::new(1.0 / norm, 0.0)), &p, &mask).unwrap();
        assert!(rho <= 1.0 + 1e-9, "unit-ball property: rho = {rho}");
        assert!(
            semimodular(&f.scale(Complex64::new(1.0 / (norm * (1.0 - 1e-6)), 0.0)), &p, &mask)
                .unwrap()
                > 1.0,
            "norm is not minimal"
        );
    }

    #[test]
    fn norm_of_ball_indicator_has_closed_form() {
        let g = grid();
        let mask = DomainMask::ball(g, [0.0, 0.0], 2.0).unwrap();
        let chi = mask.indicator();
        let area = mask.measure();
        for p0 in [1.0, 2.0, 5.0] {
            let p = ExponentField::constant(g, p0).unwrap();
            let norm = lebesgue_norm(&chi, &p, &DomainMask::whole(g)).unwrap();
            assert!((norm - area.powf(1.0 / p0)).abs() < 1e-10);
        }
    }

    #[test]
    fn quasi_norm_below_one_matches_quadrature() {
        let g = grid();
        let p = ExponentField::constant(g, 0.5).unwrap();
        let f = random_function(g, 4);
        let norm = quasi_norm(&f, &p, &DomainMask::whole(g)).unwrap();
        let direct = (f
            .samples()
            .iter()
            .map(|z| z.norm().sqrt())
            .sum::<f64>()
            * g.cell_volume())
        .powi(2);
        assert!((norm - direct).abs() <= 1e-8 * direct, "{norm} vs {direct}");
    }

    #[test]
    fn t_choice_does_not_matter() {
        let g = grid();
        let p = ExponentField::bump(g, 0.6, 0.8, [1.0, 0.0], 2.0).unwrap();
        assert!(p.p_minus() < 1.0);
        let f = random_function(g, 5);
        let mask = DomainMask::whole(g);
        let a = quasi_norm_with_power(&f, &p, &mask, p.p_minus() / 2.0).unwrap();
        let b = quasi_norm_with_power(&f, &p, &mask, p.p_minus() / 3.0).unwrap();
        assert!((a - b).abs() <= 1e-8 * a, "{a} vs {b}");
    }

    #[test]
    fn quasi_norm_delegates_when_p_is_at_least_one() {
        let g = grid();
        let p = ExponentField::bump(g, 1.5, 1.0, [0.0, 0.0], 2.0).unwrap();
        let f = random_function(g, 6);
        let mask = DomainMask::whole(g);
        assert_eq!(
            quasi_norm(&f, &p, &mask).unwrap(),
            lebesgue_norm(&f, &p, &mask).unwrap()
        );
    }

    #[test]
    fn char_ball_prediction_branches() {
        let g = grid();
        let p = ExponentField::constant(g, 2.0).unwrap();
        assert!((char_ball_prediction(&p, [0.0, 0.0], 0.25) - 0.5).abs() < 1e-15);
        assert!((char_ball_prediction(&p, [0.0, 0.0], 1.0) - 1.0).abs() < 1e-15);
        assert!((char_ball_prediction(&p, [0.0, 0.0], 4.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn modular_is_monotone_in_lambda() {
        let g = grid();
        let p = ExponentField::jump(g, 1.5, 3.0).unwrap();
        let f = random_function(g, 7);
        let mask = DomainMask::whole(g);
        let mut last = f64::INFINITY;
        for lambda in [0.1, 0.5, 1.0, 2.0, 10.0] {
            let rho = semimodular(&f.scale(Complex64::new(1.0 / lambda, 0.0)), &p, &mask).unwrap();
            assert!(rho <= last);
            last = rho;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn quasi_norm_is_homogeneous(scale in 0.01f64..100.0, seed in 0u64..1000) {
            let g = Grid::new(1, 64, 4.0).unwrap();
            let p = ExponentField::bump(g, 1.2, 1.3, [0.5, 0.0], 1.5).unwrap();
            let f = random_function(g, seed);
            let mask = DomainMask::whole(g);
            let base = quasi_norm(&f, &p, &mask).unwrap();
            let scaled = quasi_norm(&f.scale(Complex64::new(scale, 0.0)), &p, &mask).unwrap();
            prop_assert!((scaled - scale * base).abs() <= 1e-8 * scaled.max(1e-300));
        }

        #[test]
        fn quasi_norm_has_lattice_property(seed in 0u64..1000) {
            let g = Grid::new(1, 64, 4.0).unwrap();
            let p = ExponentField::bump(g, 0.8, 0.9, [0.0, 0.0], 2.0).unwrap();
            let f = random_function(g, seed).abs();
            let bigger = GridFunction::from_samples(
                g,
                f.samples().iter().map(|z| z * 1.5 + Complex64::new(0.1, 0.0)).collect(),
            ).unwrap();
            let mask = DomainMask::whole(g);
            let a = quasi_norm(&f, &p, &mask).unwrap();
            let b = quasi_norm(&bigger, &p, &mask).unwrap();
            prop_assert!(a <= b + 1e-10);
        }
    }
}
