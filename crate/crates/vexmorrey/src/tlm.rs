//! The 2-microlocal Triebel-Lizorkin-Morrey quasi-norm and its two
//! Peetre-side variants, plus the discrete Hardy-type majorant with its
//! explicit constant c(delta, q).
//!
//! All three norms of the characterization share one ball family and one
//! grid so that discretization bias cancels in their ratios.

use num_complex::Complex64;

use crate::dyadic::{moment_check, peetre_maximal, DyadicSystem, WeightSequence};
use crate::error::{Error, Result};
use crate::exponents::{c_pu, recip, ExponentField};
use crate::grid::GridFunction;
use crate::morrey::{mixed_sequence_norm, BallFamily, MorreyNorm};

/// Everything a 2-microlocal Triebel-Lizorkin-Morrey norm needs: exponents
/// p ≤ u (sup u < ∞) and q, an admissible weight sequence, a dyadic system,
/// a shared ball family, and the Peetre exponent a.
#[derive(Debug, Clone)]
pub struct SpaceParams {
    pub p: ExponentField,
    pub q: ExponentField,
    pub u: ExponentField,
    pub weights: WeightSequence,
    pub system: DyadicSystem,
    pub family: BallFamily,
    /// Peetre exponent; the characterization assumes
    /// a > n(1/min(p⁻,q⁻) + c(p,u)) + alpha.
    pub a: f64,
    warnings: Vec<String>,
}

impl SpaceParams {
    pub fn new(
        p: ExponentField,
        q: ExponentField,
        u: ExponentField,
        weights: WeightSequence,
        system: DyadicSystem,
        family: BallFamily,
        a: f64,
    ) -> Result<Self> {
        let grid = system.grid();
        if p.grid() != grid || q.grid() != grid || u.grid() != grid || weights.grid() != grid {
            return Err(Error::GridMismatch(
                "space parameters must share the system's grid".into(),
            ));
        }
        if !(a > 0.0) {
            return Err(Error::Domain(format!("Peetre exponent must be positive, got {a}")));
        }
        if weights.j_max() < system.j_max() {
            return Err(Error::Input(format!(
                "weight sequence has {} levels, system has {}",
                weights.j_max() + 1,
                system.j_max() + 1
            )));
        }
        let mut warnings = Vec::new();
        let bound = peetre_exponent_bound(&p, &q, &u, weights.alpha)?;
        if a <= bound {
            // The theorems assume a strictly above the bound; run anyway and
            // carry the flag into reports.
            warnings.push(format!(
                "Peetre exponent a = {a} does not exceed the characterization bound {bound}"
            ));
        }
        Ok(SpaceParams {
            p,
            q,
            u,
            weights,
            system,
            family,
            a,
            warnings,
        })
    }

    pub fn j_max(&self) -> u32 {
        self.system.j_max()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Replace the dyadic system (second-system comparisons); revalidates.
    pub fn with_system(&self, system: DyadicSystem) -> Result<Self> {
        SpaceParams::new(
            self.p.clone(),
            self.q.clone(),
            self.u.clone(),
            self.weights.clone(),
            system,
            self.family.clone(),
            self.a,
        )
    }

    /// The moment order required of local-means systems, the smallest
    /// integer R with R > alpha2.
    pub fn required_moment_order(&self) -> u32 {
        let a2 = self.weights.alpha2;
        if a2 < 0.0 {
            0
        } else {
            (a2.floor() as u32) + 1
        }
    }

    /// Check the local-means hypotheses of the characterization: the moment
    /// condition at R > alpha2 and the nonvanishing conditions on the
    /// (epsilon, k) ball and annulus.
    pub fn check_local_means_hypotheses(&self) -> Result<()> {
        let r = self.required_moment_order();
        let check = moment_check(self.system.level(1), self.system.grid(), r)?;
        if !check.passes {
            return Err(Error::Config(format!(
                "system {} fails the moment condition at R = {r}",
                self.system.name()
            )));
        }
        let (ball_min, annulus_min) = self.system.nonvanishing_minima();
        if !(ball_min > 0.0 && annulus_min > 0.0) {
            return Err(Error::Config(format!(
                "system {} vanishes on its (epsilon, k) regions: ball min {ball_min}, annulus min {annulus_min}",
                self.system.name()
            )));
        }
        Ok(())
    }
}

/// The lower bound n(1/min(p⁻,q⁻) + c(p,u)) + alpha on the Peetre exponent.
pub fn peetre_exponent_bound(
    p: &ExponentField,
    q: &ExponentField,
    u: &ExponentField,
    alpha: f64,
) -> Result<f64> {
    let n = p.grid().dimension() as f64;
    let min_exp = p.p_minus().min(q.p_minus());
    Ok(n * (recip(min_exp) + c_pu(p, u)?) + alpha)
}

/// The weighted dyadic pieces w_j · (phi_j f^)∨ for j = 0..=J_max.
pub fn decompose(f: &GridFunction, params: &SpaceParams) -> Result<Vec<GridFunction>> {
    (0..=params.j_max())
        .map(|j| {
            let piece = params.system.filter(f, j)?;
            let weighted = piece
                .samples()
                .iter()
                .zip(params.weights.level(j))
                .map(|(z, &w)| z * w)
                .collect();
            GridFunction::from_samples(f.grid(), weighted)
        })
        .collect()
}

/// ‖f‖ = ‖(w_j (phi_j f^)∨)_j‖_{M^u_p(ℓ_q)} over the shared family.
pub fn tlm_norm(f: &GridFunction, params: &SpaceParams) -> Result<MorreyNorm> {
    let pieces = decompose(f, params)?;
    mixed_sequence_norm(&pieces, &params.p, &params.u, &params.q, &params.family)
}

/// ‖((Psi_j * f) w_j)_j‖: the convolution side of the characterization.
pub fn peetre_convolution_norm(f: &GridFunction, params: &SpaceParams) -> Result<MorreyNorm> {
    let mut pieces = Vec::with_capacity(params.j_max() as usize + 1);
    for j in 0..=params.j_max() {
        let conv = params.system.convolve_kernel(f, j)?;
        let weighted = conv
            .samples()
            .iter()
            .zip(params.weights.level(j))
            .map(|(z, &w)| z * w)
            .collect::<Vec<Complex64>>();
        pieces.push(GridFunction::from_samples(f.grid(), weighted)?);
    }
    mixed_sequence_norm(&pieces, &params.p, &params.u, &params.q, &params.family)
}

/// ‖((Psi_j^* f)_a w_j)_j‖: the maximal-function side. Dominates the
/// convolution norm pointwise, hence also in norm.
pub fn peetre_maximal_norm(f: &GridFunction, params: &SpaceParams) -> Result<MorreyNorm> {
    let maximal = peetre_maximal(f, &params.system, params.a, params.j_max())?;
    let mut pieces = Vec::with_capacity(maximal.len());
    for (j, level) in maximal.into_iter().enumerate() {
        let weighted = level
            .samples()
            .iter()
            .zip(params.weights.level(j as u32))
            .map(|(z, &w)| z * w)
            .collect::<Vec<Complex64>>();
        pieces.push(GridFunction::from_samples(f.grid(), weighted)?);
    }
    mixed_sequence_norm(&pieces, &params.p, &params.u, &params.q, &params.family)
}

/// The Hardy-type majorant G_k(x) = Σ_j 2^{-|k-j|delta} g_j(x) of a finite
/// sequence of nonnegative functions.
pub fn hardy_majorant(gs: &[GridFunction], delta: f64) -> Result<Vec<GridFunction>> {
    if gs.is_empty() {
        return Err(Error::Input("hardy majorant of an empty sequence".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let grid = gs[0].grid();
    for (j, g) in gs.iter().enumerate() {
        if g.grid() != grid {
            return Err(Error::GridMismatch("sequence members on different grids".into()));
        }
        if let Some((k, z)) = g
            .samples()
            .iter()
            .enumerate()
            .find(|(_, z)| z.re < 0.0 || z.im != 0.0)
        {
            return Err(Error::Domain(format!(
                "hardy majorant needs nonnegative samples, g_{j} has {z} at node {k}"
            )));
        }
    }
    let count = gs.len();
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut acc = vec![Complex64::default(); grid.node_count()];
        for (j, g) in gs.iter().enumerate() {
            let factor = 2f64.powf(-((k as f64 - j as f64).abs()) * delta);
            for (slot, z) in acc.iter_mut().zip(g.samples()) {
                *slot += z * factor;
            }
        }
        out.push(GridFunction::from_samples(grid, acc)?);
    }
    Ok(out)
}

/// The explicit constant c(delta, q) = max(Σ_{j∈Z} 2^{-|j|delta},
/// [Σ_{j∈Z} 2^{-|j|delta·q⁻}]^{1/q⁻}), evaluated by truncating at |j| ≤ 64
/// and adding the geometric remainder.
pub fn hardy_constant(delta: f64, q_minus: f64) -> f64 {
    assert!(delta > 0.0 && q_minus > 0.0);
    let two_sided = |rate: f64| -> f64 {
        // Σ_{|j| ≤ 64} 2^{-|j|rate} plus the exact tail 2·2^{-65 rate}/(1-2^{-rate}).
        let r = 2f64.powf(-rate);
        let mut sum = 1.0;
        for j in 1..=64 {
            sum += 2.0 * r.powi(j);
        }
        sum + 2.0 * r.powi(65) / (1.0 - r)
    };
    let first = two_sided(delta);
    let second = two_sided(delta * q_minus).powf(recip(q_minus));
    first.max(second)
}
