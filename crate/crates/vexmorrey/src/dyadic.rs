//! Dyadic frequency analysis: admissible pairs and local-means systems, the
//! Theta/lambda partition-of-unity construction, moment conditions, admissible
//! weight sequences with empirical certificates, and Peetre maximal functions.
//!
//! All frequency-side cutoffs here are radial. A system stores its levels as
//! sampled multipliers on the frequency lattice; level 0 is the low-pass
//! profile and level j ≥ 1 is the level-1 profile evaluated at 2^{-j+1} xi,
//! so an admissible pair (with levels phi_j(xi) = phi(2^{-j} xi)) and a
//! local-means system share one storage convention.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{point_norm, Grid, GridFunction, Point};

/// Smooth transition: 0 for t ≤ 0, 1 for t ≥ 1, strictly increasing between.
/// `sharpness` reshapes the bridge without touching the endpoints.
pub fn smooth_step(t: f64, sharpness: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let b = |s: f64| (-1.0 / s).exp();
        (b(t) / (b(t) + b(1.0 - t))).powf(sharpness)
    }
}

/// A radial frequency profile evaluated at r = |xi|.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    /// 0 for r ≤ rise.0, 1 on [rise.1, fall.0], 0 for r ≥ fall.1, with
    /// smooth strictly monotone bridges.
    SmoothAnnulus {
        rise: (f64, f64),
        fall: (f64, f64),
        sharpness: f64,
    },
    /// 1 on [0, plateau], 0 beyond `zero`, smooth decreasing bridge.
    SmoothBall {
        plateau: f64,
        zero: f64,
        sharpness: f64,
    },
    /// (1 - e^{-r²})^order: vanishes to order 2·order at 0, positive else.
    GaussianDiff { order: u32 },
    /// e^{-r²/2}.
    Gaussian,
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::SmoothAnnulus { rise, fall, sharpness } => {
                smooth_step((r - rise.0) / (rise.1 - rise.0), sharpness)
                    * smooth_step((fall.1 - r) / (fall.1 - fall.0), sharpness)
            }
            RadialProfile::SmoothBall { plateau, zero, sharpness } => {
                smooth_step((zero - r) / (zero - plateau), sharpness)
            }
            RadialProfile::GaussianDiff { order } => {
                (1.0 - (-r * r).exp()).powi(order as i32)
            }
            RadialProfile::Gaussian => (-r * r / 2.0).exp(),
        }
    }
}

/// A dyadic system of radial frequency multipliers sampled on the lattice.
#[derive(Debug, Clone)]
pub struct DyadicSystem {
    name: String,
    grid: Grid,
    j_max: u32,
    profile0: RadialProfile,
    profile1: RadialProfile,
    levels: Vec<Vec<f64>>,
    /// Radii (epsilon, k) on which the system is certified nonvanishing for
    /// the partition-of-unity construction.
    epsilon: f64,
    k_ratio: f64,
}

impl DyadicSystem {
    fn sample_levels(
        grid: Grid,
        j_max: u32,
        profile0: &RadialProfile,
        profile1: &RadialProfile,
    ) -> Vec<Vec<f64>> {
        (0..=j_max)
            .map(|j| {
                let scale = if j == 0 { 0.0 } else { 2f64.powi(1 - j as i32) };
                (0..grid.node_count())
                    .map(|idx| {
                        let r = point_norm(grid.freq(idx));
                        if j == 0 {
                            profile0.eval(r)
                        } else {
                            profile1.eval(scale * r)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn new(
        name: impl Into<String>,
        grid: Grid,
        j_max: u32,
        profile0: RadialProfile,
        profile1: RadialProfile,
        epsilon: f64,
        k_ratio: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0) || !(k_ratio > 1.0 && k_ratio <= 2.0) {
            return Err(Error::Domain(format!(
                "need epsilon > 0 and k in (1, 2], got epsilon = {epsilon}, k = {k_ratio}"
            )));
        }
        if 2f64.powi(j_max as i32 + 1) > grid.max_frequency() {
            return Err(Error::Resolution(format!(
                "level {j_max} aliases: 2^{} > max frequency {}",
                j_max + 1,
                grid.max_frequency()
            )));
        }
        let levels = Self::sample_levels(grid, j_max, &profile0, &profile1);
        Ok(DyadicSystem {
            name: name.into(),
            grid,
            j_max,
            profile0,
            profile1,
            levels,
            epsilon,
            k_ratio,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn k_ratio(&self) -> f64 {
        self.k_ratio
    }

    pub fn profile0(&self) -> &RadialProfile {
        &self.profile0
    }

    pub fn profile1(&self) -> &RadialProfile {
        &self.profile1
    }

    /// Sampled multiplier of level j on the frequency lattice.
    pub fn level(&self, j: u32) -> &[f64] {
        &self.levels[j as usize]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// Space-side kernel Psi_j, the inverse transform of the level multiplier.
    pub fn space_kernel(&self, j: u32) -> GridFunction {
        let samples = self.levels[j as usize]
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        GridFunction::from_samples(self.grid, samples)
            .expect("level sampled on its own grid")
            .inverse_fourier()
    }

    /// (psi_j f^)∨: frequency-side multiplication by level j.
    pub fn filter(&self, f: &GridFunction, j: u32) -> Result<GridFunction> {
        if f.grid() != self.grid {
            return Err(Error::GridMismatch("function and system grids differ".into()));
        }
        f.apply_sampled_multiplier(self.level(j))
    }

    /// Psi_j * f where Psi_j is the space-side kernel: under the symmetric
    /// Fourier convention this is (2π)^{n/2} (psi_j f^)∨ for radial psi_j.
    pub fn convolve_kernel(&self, f: &GridFunction, j: u32) -> Result<GridFunction> {
        let factor = (2.0 * std::f64::consts::PI).powf(self.grid.dimension() as f64 / 2.0);
        Ok(self.filter(f, j)?.scale(Complex64::new(factor, 0.0)))
    }

    /// Minimum of |profile0| over the lattice ball {|xi| ≤ k·eps} and of
    /// |psi_1| over the lattice annulus {eps ≤ |xi| ≤ 2k·eps}: the
    /// nonvanishing hypotheses of the maximal-function characterization.
    pub fn nonvanishing_minima(&self) -> (f64, f64) {
        let ke = self.k_ratio * self.epsilon;
        let mut ball_min = f64::INFINITY;
        let mut annulus_min = f64::INFINITY;
        for idx in 0..self.grid.node_count() {
            let r = point_norm(self.grid.freq(idx));
            if r <= ke {
                ball_min = ball_min.min(self.profile0.eval(r).abs());
            }
            if r >= self.epsilon && r <= 2.0 * ke {
                annulus_min = annulus_min.min(self.profile1.eval(r).abs());
            }
        }
        (ball_min, annulus_min)
    }
}

/// An admissible pair: annulus/ball cutoffs with certified supports and a
/// witnessed uniform lower bound c on {3/5 ≤ |xi| ≤ 5/3} resp. {|xi| ≤ 5/3}.
#[derive(Debug, Clone)]
pub struct AdmissiblePair {
    system: DyadicSystem,
    lower_bound: f64,
}

impl AdmissiblePair {
    pub fn system(&self) -> &DyadicSystem {
        &self.system
    }

    pub fn into_system(self) -> DyadicSystem {
        self.system
    }

    /// The witnessed constant c > 0 of the lower-bound condition.
    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// The pair-convention profile phi(|xi|) (level 1 carries phi(xi/2)).
    pub fn phi(&self, r: f64) -> f64 {
        self.system.profile1.eval(2.0 * r)
    }

    /// The low-pass profile Phi(|xi|).
    pub fn phi0(&self, r: f64) -> f64 {
        self.system.profile0.eval(r)
    }
}

/// Build an admissible pair from mollified bump profiles. `sharpness`
/// reshapes the smooth bridges, giving genuinely different systems for
/// different values while keeping every support and lower-bound constraint.
///
/// supp phi ⊂ {1/2 ≤ |xi| ≤ 2} with phi = 1 on {3/5 ≤ |xi| ≤ 5/3};
/// supp Phi ⊂ {|xi| ≤ 2} with Phi = 1 on {|xi| ≤ 5/3}. The derived
/// local-means data uses eps = 6/5 and k = 25/18.
pub fn build_admissible_pair(grid: Grid, j_max: u32, sharpness: f64) -> Result<AdmissiblePair> {
    if !(sharpness > 0.0) {
        return Err(Error::Domain(format!(
            "profile sharpness must be positive, got {sharpness}"
        )));
    }
    // The annulus {1/2 ≤ |xi| ≤ 2} must see at least 8 lattice samples per
    // axis across its diameter.
    if 4.0 / grid.freq_step() < 8.0 {
        return Err(Error::Resolution(format!(
            "frequency step {} too coarse to resolve the unit annulus",
            grid.freq_step()
        )));
    }
    let profile0 = RadialProfile::SmoothBall {
        plateau: 5.0 / 3.0,
        zero: 2.0,
        sharpness,
    };
    // Level-1 convention carries phi(xi/2): supports scale by 2.
    let profile1 = RadialProfile::SmoothAnnulus {
        rise: (1.0, 6.0 / 5.0),
        fall: (10.0 / 3.0, 4.0),
        sharpness,
    };
    let system = DyadicSystem::new(
        format!("bump-pair(sharpness={sharpness})"),
        grid,
        j_max,
        profile0,
        profile1,
        6.0 / 5.0,
        25.0 / 18.0,
    )?;

    // Witness the lower bound on the lattice.
    let pair = AdmissiblePair {
        lower_bound: 0.0,
        system,
    };
    let mut c = f64::INFINITY;
    for idx in 0..grid.node_count() {
        let r = point_norm(grid.freq(idx));
        if (0.6..=5.0 / 3.0).contains(&r) {
            c = c.min(pair.phi(r).abs());
        }
        if r <= 5.0 / 3.0 {
            c = c.min(pair.phi0(r).abs());
        }
    }
    if !(c > 0.0) {
        return Err(Error::Construction(format!(
            "admissible pair lower bound degenerated to {c}"
        )));
    }
    Ok(AdmissiblePair {
        lower_bound: c,
        system: pair.system,
    })
}

/// A local-means system from Gaussian bumps: psi_0 = e^{-|xi|²/2} and
/// psi_1 = (1 - e^{-|xi|²})^order, which has vanishing derivatives at zero
/// up to order 2·order and is positive on every annulus. Not compactly
/// supported in frequency.
pub fn gaussian_difference_system(grid: Grid, j_max: u32, order: u32) -> Result<DyadicSystem> {
    DyadicSystem::new(
        format!("gaussian-difference(order={order})"),
        grid,
        j_max,
        RadialProfile::Gaussian,
        RadialProfile::GaussianDiff { order },
        6.0 / 5.0,
        25.0 / 18.0,
    )
}

// ---------------------------------------------------------------------------
// Theta / lambda partition of unity
// ---------------------------------------------------------------------------

/// The radial Theta_0 profile and its telescoped dyadic family, plus the
/// lambda system completing Σ lambda_j · base_j = 1 once built.
#[derive(Debug, Clone)]
pub struct PartitionSpec {
    grid: Grid,
    j_max: u32,
    pub delta1: f64,
    pub delta2: f64,
    /// k = (1+delta2)/(1+delta1) ∈ (1, 2].
    pub k_ratio: f64,
    pub epsilon: Option<f64>,
    theta: Vec<Vec<f64>>,
    lambda: Option<Vec<Vec<f64>>>,
}

fn theta0(r: f64, delta1: f64, delta2: f64) -> f64 {
    // 1 on |xi| ≤ 1+delta1, 0 on |xi| ≥ 1+delta2, radially strictly
    // decreasing on the bridge.
    smooth_step((1.0 + delta2 - r) / (delta2 - delta1), 1.0)
}

fn theta_j(r: f64, j: u32, delta1: f64, delta2: f64) -> f64 {
    if j == 0 {
        theta0(r, delta1, delta2)
    } else {
        theta0(2f64.powi(-(j as i32)) * r, delta1, delta2)
            - theta0(2f64.powi(1 - j as i32) * r, delta1, delta2)
    }
}

/// Build the telescoping Theta family: Theta_j(xi) = Theta_0(2^{-j}xi) -
/// Theta_0(2^{-j+1}xi), so that Σ_{j≤J} Theta_j(xi) = Theta_0(2^{-J}xi).
pub fn build_theta_partition(
    delta1: f64,
    delta2: f64,
    grid: Grid,
    j_max: u32,
) -> Result<PartitionSpec> {
    if !(0.0 <= delta1 && delta1 < delta2 && delta2 <= 1.0) {
        return Err(Error::Domain(format!(
            "need 0 ≤ delta1 < delta2 ≤ 1, got delta1 = {delta1}, delta2 = {delta2}"
        )));
    }
    let theta = (0..=j_max)
        .map(|j| {
            (0..grid.node_count())
                .map(|idx| theta_j(point_norm(grid.freq(idx)), j, delta1, delta2))
                .collect()
        })
        .collect();
    Ok(PartitionSpec {
        grid,
        j_max,
        delta1,
        delta2,
        k_ratio: (1.0 + delta2) / (1.0 + delta1),
        epsilon: None,
        theta,
        lambda: None,
    })
}

impl PartitionSpec {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn theta(&self, j: u32) -> &[f64] {
        &self.theta[j as usize]
    }

    pub fn lambda(&self, j: u32) -> Option<&[f64]> {
        self.lambda.as_ref().map(|l| l[j as usize].as_slice())
    }

    /// max over the lattice with |xi| ≤ 2^J(1+delta1) of |Σ Theta_j - 1|.
    pub fn telescoping_residual(&self) -> f64 {
        let cap = 2f64.powi(self.j_max as i32) * (1.0 + self.delta1);
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid.node_count() {
            if point_norm(self.grid.freq(idx)) <= cap {
                let sum: f64 = self.theta.iter().map(|level| level[idx]).sum();
                worst = worst.max((sum - 1.0).abs());
            }
        }
        worst
    }

    /// max over the lattice with |xi| ≤ 2^J·eps of |Σ lambda_j base_j - 1|.
    pub fn reproduction_residual(&self, base: &DyadicSystem) -> Result<f64> {
        let lambda = self
            .lambda
            .as_ref()
            .ok_or_else(|| Error::Construction("lambda system not built yet".into()))?;
        let eps = self
            .epsilon
            .ok_or_else(|| Error::Construction("lambda system not built yet".into()))?;
        let cap = 2f64.powi(self.j_max as i32) * eps;
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid.node_count() {
            if point_norm(self.grid.freq(idx)) <= cap {
                let sum: f64 = (0..=self.j_max as usize)
                    .map(|j| lambda[j][idx] * base.level(j as u32)[idx])
                    .sum();
                worst = worst.max((sum - 1.0).abs());
            }
        }
        Ok(worst)
    }
}

/// Complete a Theta partition with the lambda system for the given base
/// profiles: lambda_0 = Theta_0((1+delta1)·/eps)/base_0 inside |xi| < k·eps,
/// lambda_j = Theta_j((1+delta1)·/eps)/base_j inside eps < |2^{-j+1}xi| <
/// 2k·eps, zero outside. Errors when the base vanishes inside a region,
/// naming the offending frequency.
pub fn build_lambda_system(
    base: &DyadicSystem,
    partition: &PartitionSpec,
    epsilon: f64,
    k_ratio: f64,
) -> Result<PartitionSpec> {
    if base.grid() != partition.grid {
        return Err(Error::GridMismatch("base and partition grids differ".into()));
    }
    if base.j_max() < partition.j_max {
        return Err(Error::Construction(format!(
            "base has {} levels, partition needs {}",
            base.j_max() + 1,
            partition.j_max + 1
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    if (k_ratio - partition.k_ratio).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "k = {k_ratio} inconsistent with the partition's (1+delta2)/(1+delta1) = {}",
            partition.k_ratio
        )));
    }
    let grid = partition.grid;
    let (d1, d2) = (partition.delta1, partition.delta2);
    let mut lambda = Vec::with_capacity(partition.j_max as usize + 1);
    for j in 0..=partition.j_max {
        let mut level = vec![0.0; grid.node_count()];
        for (idx, slot) in level.iter_mut().enumerate() {
            let r = point_norm(grid.freq(idx));
            let in_region = if j == 0 {
                r < k_ratio * epsilon
            } else {
                let scaled = 2f64.powi(1 - j as i32) * r;
                scaled > epsilon && scaled < 2.0 * k_ratio * epsilon
            };
            if !in_region {
                continue;
            }
            let numerator = theta_j((1.0 + d1) * r / epsilon, j, d1, d2);
            let denominator = base.level(j)[idx];
            if denominator.abs() < 1e-12 {
                return Err(Error::Construction(format!(
                    "base level {j} vanishes at frequency |xi| = {r} inside its division region"
                )));
            }
            *slot = numerator / denominator;
        }
        lambda.push(level);
    }
    Ok(PartitionSpec {
        grid: partition.grid,
        j_max: partition.j_max,
        delta1: partition.delta1,
        delta2: partition.delta2,
        k_ratio: partition.k_ratio,
        epsilon: Some(epsilon),
        theta: partition.theta.clone(),
        lambda: Some(lambda),
    })
}

// ---------------------------------------------------------------------------
// Moment condition
// ---------------------------------------------------------------------------

/// Residuals of the moment condition D^beta psi_1(0) = 0 for |beta| < R.
#[derive(Debug, Clone)]
pub struct MomentCheck {
    pub passes: bool,
    /// (multi-index, estimated derivative) per |beta| < R.
    pub residuals: Vec<(Vec<u32>, f64)>,
    pub tolerance: f64,
}

/// Fourth-order central stencils for d^m/dr^m at 0, m = 0..=3, as
/// (offset, coefficient) pairs; coefficients are divided by h^m later.
fn stencil(m: u32) -> Vec<(i64, f64)> {
    match m {
        0 => vec![(0, 1.0)],
        1 => vec![(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
        2 => vec![
            (-2, -1.0 / 12.0),
            (-1, 16.0 / 12.0),
            (0, -30.0 / 12.0),
            (1, 16.0 / 12.0),
            (2, -1.0 / 12.0),
        ],
        3 => vec![
            (-3, -1.0 / 8.0),
            (-2, 8.0 / 8.0),
            (-1, -13.0 / 8.0),
            (1, 13.0 / 8.0),
            (2, -8.0 / 8.0),
            (3, 1.0 / 8.0),
        ],
        _ => unreachable!("stencil capability checked by caller"),
    }
}

fn freq_flat_index(grid: Grid, fx: i64, fy: i64) -> usize {
    let n = grid.samples_per_axis() as i64;
    let ix = fx.rem_euclid(n) as usize;
    if grid.dimension() == 1 {
        ix
    } else {
        fy.rem_euclid(n) as usize * grid.samples_per_axis() + ix
    }
}

/// Estimate every derivative D^beta psi_1(0) with |beta| < R by central
/// differences on the frequency lattice; passes when each residual is at
/// most 1e-6 · max|psi_1|. R ≤ 4 (the stencil capability on this lattice).
pub fn moment_check(psi1: &[f64], grid: Grid, order: u32) -> Result<MomentCheck> {
    if psi1.len() != grid.node_count() {
        return Err(Error::Input(format!(
            "profile has {} samples, lattice has {} nodes",
            psi1.len(),
            grid.node_count()
        )));
    }
    if order > 4 {
        return Err(Error::Resolution(format!(
            "moment order {order} exceeds the stencil capability (R ≤ 4)"
        )));
    }
    let peak = psi1.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let tolerance = 1e-6 * peak;
    let h = grid.freq_step();
    let mut residuals = Vec::new();
    let mut passes = true;

    let mut record = |beta: Vec<u32>, value: f64| {
        if value.abs() > tolerance {
            passes = false;
        }
        residuals.push((beta, value));
    };

    if grid.dimension() == 1 {
        for m in 0..order {
            let mut acc = 0.0;
            for (off, coeff) in stencil(m) {
                acc += coeff * psi1[freq_flat_index(grid, off, 0)];
            }
            record(vec![m], acc / h.powi(m as i32));
        }
    } else {
        for b1 in 0..order {
            for b2 in 0..order.saturating_sub(b1) {
                let mut acc = 0.0;
                for (ox, cx) in stencil(b1) {
                    for (oy, cy) in stencil(b2) {
                        acc += cx * cy * psi1[freq_flat_index(grid, ox, oy)];
                    }
                }
                record(vec![b1, b2], acc / h.powi((b1 + b2) as i32));
            }
        }
    }
    Ok(MomentCheck {
        passes,
        residuals,
        tolerance,
    })
}

// ---------------------------------------------------------------------------
// Admissible weight sequences
// ---------------------------------------------------------------------------

/// Closed-form weight families with declared admissibility constants.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFamily {
    /// w_j ≡ 2^{js}: alpha = 0, alpha1 = alpha2 = s, C = 1.
    Power { s: f64 },
    /// w_j(x) = 2^{js}(1 + 2^j|x - x₀|)^{s'} with s' ≥ 0:
    /// alpha = s', alpha1 = s, alpha2 = s + s', C = 1.
    TwoMicrolocal { s: f64, s_prime: f64, center: Point },
}

/// An admissible weight sequence (w_j) with samples per level and the
/// family's declared constants (alpha, alpha1, alpha2, C).
#[derive(Debug, Clone)]
pub struct WeightSequence {
    grid: Grid,
    j_max: u32,
    family: WeightFamily,
    levels: Vec<Vec<f64>>,
    pub alpha: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub constant: f64,
}

impl WeightSequence {
    pub fn power(grid: Grid, j_max: u32, s: f64) -> Self {
        let levels = (0..=j_max)
            .map(|j| vec![2f64.powf(j as f64 * s); grid.node_count()])
            .collect();
        WeightSequence {
            grid,
            j_max,
            family: WeightFamily::Power { s },
            levels,
            alpha: 0.0,
            alpha1: s,
            alpha2: s,
            constant: 1.0,
        }
    }

    pub fn two_microlocal(
        grid: Grid,
        j_max: u32,
        s: f64,
        s_prime: f64,
        center: Point,
    ) -> Result<Self> {
        if s_prime < 0.0 {
            return Err(Error::Domain(format!(
                "two-microlocal weights need s' ≥ 0 here, got {s_prime}"
            )));
        }
        let levels = (0..=j_max)
            .map(|j| {
                let rate = 2f64.powi(j as i32);
                (0..grid.node_count())
                    .map(|k| {
                        let d = grid.torus_distance(grid.coords(k), center);
                        2f64.powf(j as f64 * s) * (1.0 + rate * d).powf(s_prime)
                    })
                    .collect()
            })
            .collect();
        Ok(WeightSequence {
            grid,
            j_max,
            family: WeightFamily::TwoMicrolocal { s, s_prime, center },
            levels,
            alpha: s_prime,
            alpha1: s,
            alpha2: s + s_prime,
            constant: 1.0,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn level(&self, j: u32) -> &[f64] {
        &self.levels[j as usize]
    }
}

/// Empirical smallest admissibility constants over sampled pairs and levels.
#[derive(Debug, Clone, Copy)]
pub struct WeightCertificate {
    /// Smallest C for clause (i) at the family's declared alpha.
    pub c: f64,
    /// Smallest alpha making clause (i) hold with C = 1.
    pub alpha: f64,
    /// min_j,x log2(w_{j+1}/w_j).
    pub alpha1: f64,
    /// max_j,x log2(w_{j+1}/w_j).
    pub alpha2: f64,
}

/// Certify a weight sequence: clause (i) pair suprema (at up to 512 sampled
/// nodes, strides nested across power-of-two grids) and clause (ii) level
/// ratios over every node.
pub fn weight_certificate(w: &WeightSequence) -> Result<WeightCertificate> {
    for (j, level) in w.levels.iter().enumerate() {
        if let Some((k, &bad)) = level.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::Domain(format!(
                "weight w_{j} is not positive at node {k}: {bad}"
            )));
        }
    }
    let grid = w.grid;
    let n = grid.samples_per_axis();
    let mut stride = 1usize;
    while (n / stride).pow(grid.dimension() as u32) > 512 {
        stride *= 2;
    }
    let nodes: Vec<usize> = (0..grid.node_count())
        .filter(|k| {
            let (ix, iy) = (k % n, k / n);
            ix % stride == 0 && iy % stride == 0
        })
        .collect();

    let per_level: Vec<(f64, f64)> = (0..=w.j_max)
        .into_par_iter()
        .map(|j| {
            let level = w.level(j);
            let rate = 2f64.powi(j as i32);
            let mut c_at_alpha: f64 = 1.0;
            let mut alpha_needed: f64 = 0.0;
            for (i, &a) in nodes.iter().enumerate() {
                let pa = grid.coords(a);
                for &b in &nodes[i + 1..] {
                    let dist = grid.torus_distance(pa, grid.coords(b));
                    let growth = (1.0 + rate * dist).ln();
                    let log_ratio = (level[a] / level[b]).ln().abs();
                    alpha_needed = alpha_needed.max(log_ratio / growth);
                    let bound = (growth * w.alpha).exp();
                    c_at_alpha = c_at_alpha.max((level[a] / level[b]).max(level[b] / level[a]) / bound);
                }
            }
            (c_at_alpha, alpha_needed)
        })
        .collect();
    let c = per_level.iter().fold(1.0f64, |acc, &(cv, _)| acc.max(cv));
    let alpha = per_level.iter().fold(0.0f64, |acc, &(_, av)| acc.max(av));

    let mut alpha1 = f64::INFINITY;
    let mut alpha2 = f64::NEG_INFINITY;
    for j in 0..w.j_max {
        let (lo, hi) = w
            .level(j)
            .iter()
            .zip(w.level(j + 1))
            .map(|(&a, &b)| (b / a).log2())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r), hi.max(r))
            });
        alpha1 = alpha1.min(lo);
        alpha2 = alpha2.max(hi);
    }
    Ok(WeightCertificate { c, alpha, alpha1, alpha2 })
}

// ---------------------------------------------------------------------------
// Peetre maximal function
// ---------------------------------------------------------------------------

/// The Peetre maximal functions (Psi_j^* f)_a for j = 0..=j_max:
/// sup over grid nodes y of |(Psi_j * f)(y)| / (1 + |2^j(y-x)|^a) in the
/// torus metric. Exhaustive over y; O(N^{2n}) accepted at desk scale.
pub fn peetre_maximal(
    f: &GridFunction,
    system: &DyadicSystem,
    a: f64,
    j_max: u32,
) -> Result<Vec<GridFunction>> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("Peetre exponent a must be positive, got {a}")));
    }
    if j_max > system.j_max() {
        return Err(Error::Input(format!(
            "system has levels up to {}, requested {}",
            system.j_max(),
            j_max
        )));
    }
    let grid = f.grid();
    // Torus distance of the offset with flat index d from the origin node.
    let origin = grid.coords(0);
    let dist_table: Vec<f64> = (0..grid.node_count())
        .map(|d| grid.torus_distance(grid.coords(d), origin))
        .collect();

    let mut out = Vec::with_capacity(j_max as usize + 1);
    for j in 0..=j_max {
        let conv = system.convolve_kernel(f, j)?;
        let magnitudes: Vec<f64> = conv.samples().iter().map(|z| z.norm()).collect();
        let rate = 2f64.powi(j as i32);
        let damping: Vec<f64> = dist_table
            .iter()
            .map(|&d| 1.0 / (1.0 + (rate * d).powf(a)))
            .collect();
        let n = grid.samples_per_axis();
        let samples: Vec<Complex64> = (0..grid.node_count())
            .into_par_iter()
            .map(|x| {
                let (xx, xy) = (x % n, x / n);
                let mut best = 0.0f64;
                if grid.dimension() == 1 {
                    for d in 0..n {
                        let y = if xx + d < n { xx + d } else { xx + d - n };
                        let v = magnitudes[y] * damping[d];
                        if v > best {
                            best = v;
                        }
                    }
                } else {
                    for dy in 0..n {
                        let yy = if xy + dy < n { xy + dy } else { xy + dy - n };
                        let row = yy * n;
                        let drow = dy * n;
                        for dx in 0..n {
                            let yx = if xx + dx < n { xx + dx } else { xx + dx - n };
                            let v = magnitudes[row + yx] * damping[drow + dx];
                            if v > best {
                                best = v;
                            }
                        }
                    }
                }
                Complex64::new(best, 0.0)
            })
            .collect();
        out.push(GridFunction::from_samples(grid, samples)?);
    }
    Ok(out)
}
