//! Flux-measure sampling of the dividing surface and the two deterministic
//! phase-space measures it feeds: the directional flux φ(E) and the reactant
//! density of states ρ₊(E).
//!
//! On the surface Ā₁ = 0 the flux two-form reduces to dp̄₂ ∧ dĀ₂, so the
//! forward flux is the plain area of the disk {H̄₂(Ā₂, p̄₂) ≤ E} and sampling
//! that disk uniformly in (Ā₂, p̄₂) is sampling DS₊(E) with respect to the flux
//! measure. The reactant density of states reduces by the exact two-momentum
//! identity ∫ δ(E − |p|²/2 − V) d²p = 2π (for E > V) to 2π times the
//! configuration-space area of {Ā₁ > 0, V̄ ≤ E}.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::elliptic::{complete_elliptic_e, complete_elliptic_k};
use crate::error::{Error, Result};
use crate::hamiltonian::{ModelParams, ScaledState};
use crate::invariant_plane::{
    level_set_topology, max_turning_point, plane2_energy, plane2_min_energy, LevelSetTopology,
};
use crate::quad::integrate_sqrt_endpoints;
use crate::real::Real;

/// Master seed for a reproducible sample stream.
///
/// Work item `i` draws from an independent substream derived from
/// (master_seed, i), so ensembles are bit-reproducible regardless of how the
/// items are scheduled across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub(crate) fn substream(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }
}

/// A flux-weighted point on DS₊(E): Ā₁ = 0 and p̄₁ = +√(2(E − H̄₂)) > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsSample<R> {
    pub a2: R,
    pub p2: R,
    pub p1: R,
}

impl<R: Real> DsSample<R> {
    /// The full phase-space point (0, p̄₁, Ā₂, p̄₂).
    pub fn state(&self) -> ScaledState<R> {
        ScaledState::new(R::zero(), self.p1, self.a2, self.p2)
    }
}

/// A Monte Carlo (or deterministic) estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<R> {
    pub value: R,
    /// One standard error; zero for deterministic methods.
    pub std_err: R,
    /// Number of random samples consumed; zero for deterministic methods.
    pub n_samples: u64,
}

impl<R: Real> McEstimate<R> {
    pub fn exact(value: R) -> Self {
        Self {
            value,
            std_err: R::zero(),
            n_samples: 0,
        }
    }
}

/// Bounding box of the DS disk {H̄₂ ≤ E} in the (Ā₂, p̄₂) plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsBounds<R> {
    pub a2_max: R,
    pub p2_max: R,
}

impl<R: Real> DsBounds<R> {
    pub fn box_area(&self) -> R {
        R::of(4.0) * self.a2_max * self.p2_max
    }
}

/// Validates that the DS at `energy` has interior (excludes the critical level
/// set) and returns its bounding box.
pub fn ds_bounds<R: Real>(params: &ModelParams<R>, energy: R) -> Result<DsBounds<R>> {
    if level_set_topology(params, energy)? == LevelSetTopology::Critical {
        return Err(Error::EmptyRegion {
            energy: energy.as_f64(),
            context: "dividing surface at the critical level set",
        });
    }
    let a2_max = max_turning_point(params, energy)?.sqrt();
    let p2_max = (R::of(2.0) * (energy - plane2_min_energy(params))).sqrt();
    Ok(DsBounds { a2_max, p2_max })
}

/// Method selector for [`flux`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxMethod {
    /// Adaptive quadrature of the p̄₂ extent over Ā₂.
    Quadrature,
    /// Closed form in complete elliptic integrals.
    Elliptic,
    /// Rejection counting in the bounding box.
    MonteCarlo { samples: u64, seed: RngSeed },
}

/// Directional flux φ(E): the (Ā₂, p̄₂)-area of {H̄₂ ≤ E}, totalled over both
/// lobes when the region is disconnected.
pub fn flux<R: Real>(params: &ModelParams<R>, energy: R, method: FluxMethod) -> Result<McEstimate<R>> {
    let bounds = ds_bounds(params, energy)?;
    match method {
        FluxMethod::Quadrature => Ok(McEstimate::exact(flux_quadrature(params, energy)?)),
        FluxMethod::Elliptic => Ok(McEstimate::exact(flux_elliptic(params, energy)?)),
        FluxMethod::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidParameter("samples must be > 0".into()));
            }
            let hits: u64 = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = seed.substream(i);
                    let (a2, p2) = draw_in_box(&mut rng, &bounds);
                    u64::from(plane2_energy(params, a2, p2) < energy)
                })
                .sum();
            let n = R::of(samples as f64);
            let p_hat = R::of(hits as f64) / n;
            let box_area = bounds.box_area();
            Ok(McEstimate {
                value: box_area * p_hat,
                std_err: box_area * (p_hat * (R::one() - p_hat) / n).sqrt(),
                n_samples: samples,
            })
        }
    }
}

fn draw_in_box<R: Real>(rng: &mut ChaCha8Rng, bounds: &DsBounds<R>) -> (R, R) {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let a2 = bounds.a2_max * R::of(2.0 * u - 1.0);
    let p2 = bounds.p2_max * R::of(2.0 * v - 1.0);
    (a2, p2)
}

/// Roots r± of the turning-point quadratic u² + (β/2)u − E/8 = 0, u = Ā₂².
fn lobe_roots<R: Real>(params: &ModelParams<R>, energy: R) -> (R, R) {
    let disc = (params.beta * params.beta + R::of(2.0) * energy).sqrt();
    (
        R::of(0.25) * (-params.beta + disc),
        R::of(0.25) * (-params.beta - disc),
    )
}

fn flux_quadrature<R: Real>(params: &ModelParams<R>, energy: R) -> Result<R> {
    let (r_hi, r_lo) = lobe_roots(params, energy);
    let extent = |a2: R| {
        let gap = energy - plane2_energy(params, a2, R::zero());
        R::of(2.0) * (R::of(2.0) * gap.max(R::zero())).sqrt()
    };
    let tol = R::of(1e-11);
    match level_set_topology(params, energy)? {
        LevelSetTopology::SingleLoop => {
            let a_max = r_hi.sqrt();
            Ok(integrate_sqrt_endpoints(&extent, -a_max, a_max, tol))
        }
        LevelSetTopology::DoubleLobe => {
            let per_lobe = integrate_sqrt_endpoints(&extent, r_lo.sqrt(), r_hi.sqrt(), tol);
            Ok(R::of(2.0) * per_lobe)
        }
        LevelSetTopology::Critical => unreachable!("excluded by ds_bounds"),
    }
}

/// Closed-form disk area.
///
/// With r± the roots above, the single-loop area is
///     16 r₊ √(r₊ − r₋) · [(1−m)K(m) + (2m−1)E(m)] / (3m),  m = r₊/(r₊ − r₋),
/// and the two-lobe area (per lobe) is
///     8 (r₊ − r₋)² / √r₊ · [2(m−1)K(m) + (2−m)E(m)] / (3m²),  m = (r₊ − r₋)/r₊,
/// both obtained by reducing ∫√((r₊ − u)(u − r₋)) under u = Ā₂² to Legendre form.
fn flux_elliptic<R: Real>(params: &ModelParams<R>, energy: R) -> Result<R> {
    let (r_hi, r_lo) = lobe_roots(params, energy);
    let three = R::of(3.0);
    match level_set_topology(params, energy)? {
        LevelSetTopology::SingleLoop => {
            let m = r_hi / (r_hi - r_lo);
            let k = complete_elliptic_k(m);
            let e = complete_elliptic_e(m);
            let bracket = (R::one() - m) * k + (R::of(2.0) * m - R::one()) * e;
            Ok(R::of(16.0) * r_hi * (r_hi - r_lo).sqrt() * bracket / (three * m))
        }
        LevelSetTopology::DoubleLobe => {
            let m = (r_hi - r_lo) / r_hi;
            let k = complete_elliptic_k(m);
            let e = complete_elliptic_e(m);
            let bracket = R::of(2.0) * (m - R::one()) * k + (R::of(2.0) - m) * e;
            let span = r_hi - r_lo;
            let per_lobe = R::of(8.0) * span * span / r_hi.sqrt() * bracket / (three * m * m);
            Ok(R::of(2.0) * per_lobe)
        }
        LevelSetTopology::Critical => unreachable!("excluded by ds_bounds"),
    }
}

/// Draws `n` points on DS₊(E), uniform with respect to the flux measure
/// dĀ₂ dp̄₂, by rejection from the bounding box. Sample `i` consumes substream
/// `i` of `seed`, so the result is independent of scheduling. Both lobes of a
/// disconnected region are covered by construction.
pub fn sample_ds_plus<R: Real>(
    params: &ModelParams<R>,
    energy: R,
    n: u64,
    seed: RngSeed,
) -> Result<Vec<DsSample<R>>> {
    let bounds = ds_bounds(params, energy)?;
    let acceptance = flux_elliptic(params, energy)? / bounds.box_area();
    if acceptance < R::of(1e-3) {
        return Err(Error::PathologicalRegion {
            acceptance: acceptance.as_f64(),
        });
    }
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.substream(i);
            loop {
                let (a2, p2) = draw_in_box(&mut rng, &bounds);
                let h2 = plane2_energy(params, a2, p2);
                if h2 < energy {
                    let p1 = (R::of(2.0) * (energy - h2)).sqrt();
                    return DsSample { a2, p2, p1 };
                }
            }
        })
        .collect())
}

/// Sample counts in the Ā₂ > 0 and Ā₂ < 0 lobes (meaningful for a
/// disconnected dividing surface).
pub fn lobe_counts<R: Real>(samples: &[DsSample<R>]) -> (usize, usize) {
    let plus = samples.iter().filter(|s| s.a2 > R::zero()).count();
    (plus, samples.len() - plus)
}

/// Method selector for [`reactant_dos`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DosMethod {
    /// 2π × adaptive-quadrature area of {Ā₁ > 0, V̄ ≤ E} (variance-free).
    Quadrature,
    /// Independent cross-check: centred finite difference of 4-D phase-volume
    /// Monte Carlo estimates at E ± δ with common random numbers.
    MonteCarlo { samples: u64, seed: RngSeed },
}

/// Reactant density of states ρ₊(E) for the well region Ā₁ > 0.
pub fn reactant_dos<R: Real>(
    params: &ModelParams<R>,
    energy: R,
    method: DosMethod,
) -> Result<McEstimate<R>> {
    params.require_bistable()?;
    let well_bottom = -R::of(0.5) * params.alpha * params.alpha;
    if energy <= well_bottom {
        return Err(Error::EmptyRegion {
            energy: energy.as_f64(),
            context: "reactant shell at or below the well bottom",
        });
    }
    match method {
        DosMethod::Quadrature => {
            let area = reactant_area_quadrature(params, energy);
            Ok(McEstimate::exact(R::of(2.0) * R::PI() * area))
        }
        DosMethod::MonteCarlo { samples, seed } => dos_volume_difference(params, energy, samples, seed),
    }
}

/// Length of the Ā₂ slice of {V̄ ≤ E} at fixed Ā₁: with u = Ā₂², V̄ ≤ E is the
/// quadratic 8u² + 4(β + Ā₁²)u + (αĀ₁² + Ā₁⁴/2 − E) ≤ 0 intersected with u ≥ 0.
fn a2_slice_len<R: Real>(params: &ModelParams<R>, energy: R, a1: R) -> R {
    let a1_sq = a1 * a1;
    let qb = R::of(4.0) * (params.beta + a1_sq);
    let qc = params.alpha * a1_sq + R::of(0.5) * a1_sq * a1_sq - energy;
    let disc = qb * qb - R::of(32.0) * qc;
    if disc <= R::zero() {
        return R::zero();
    }
    let sq = disc.sqrt();
    let u_hi = (-qb + sq) / R::of(16.0);
    if u_hi <= R::zero() {
        return R::zero();
    }
    let u_lo = ((-qb - sq) / R::of(16.0)).max(R::zero());
    R::of(2.0) * (u_hi.sqrt() - u_lo.sqrt())
}

fn reactant_area_quadrature<R: Real>(params: &ModelParams<R>, energy: R) -> R {
    let disc = (params.alpha * params.alpha + R::of(2.0) * energy).sqrt();
    let a1_hi_sq = -params.alpha + disc;
    // Slice-length kinks: the on-axis roots of αx² + x⁴/2 = E and, for β < 0,
    // the width of the transverse saddle lobes.
    let mut cuts = vec![R::zero(), a1_hi_sq.sqrt()];
    if energy < R::zero() {
        cuts.push((-params.alpha - disc).sqrt());
    }
    if params.beta < R::zero() && -params.beta < a1_hi_sq {
        cuts.push((-params.beta).sqrt());
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cuts"));
    cuts.dedup();
    let tol = R::of(1e-11);
    let mut area = R::zero();
    for pair in cuts.windows(2) {
        area += integrate_sqrt_endpoints(&|a1| a2_slice_len(params, energy, a1), pair[0], pair[1], tol);
    }
    area
}

fn dos_volume_difference<R: Real>(
    params: &ModelParams<R>,
    energy: R,
    samples: u64,
    seed: RngSeed,
) -> Result<McEstimate<R>> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be > 0".into()));
    }
    let above_bottom = energy + R::of(0.5) * params.alpha * params.alpha;
    let delta = R::of(0.01) * above_bottom;
    let e_hi = energy + delta;
    // Analytic box: V̄ ≥ (αĀ₁² + Ā₁⁴/2) + (4βĀ₂² + 8Ā₂⁴) bounds each
    // coordinate extent given the other term's minimum.
    let slack = if params.beta < R::zero() {
        R::of(0.5) * params.beta * params.beta
    } else {
        R::zero()
    };
    let a1_hi = (-params.alpha
        + (params.alpha * params.alpha + R::of(2.0) * (e_hi + slack)).sqrt())
    .sqrt();
    let shell_top = e_hi + R::of(0.5) * params.alpha * params.alpha;
    let a2_hi = (R::of(0.25)
        * (-params.beta + (params.beta * params.beta + R::of(2.0) * shell_top).sqrt()))
    .sqrt();
    let p_max = (R::of(2.0) * shell_top).sqrt();
    let volume = a1_hi * (R::of(2.0) * a2_hi) * (R::of(2.0) * p_max) * (R::of(2.0) * p_max);
    let (hits_hi, hits_lo) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.substream(i);
            let a1 = a1_hi * R::of(rng.random::<f64>());
            let a2 = a2_hi * R::of(2.0 * rng.random::<f64>() - 1.0);
            let p1 = p_max * R::of(2.0 * rng.random::<f64>() - 1.0);
            let p2 = p_max * R::of(2.0 * rng.random::<f64>() - 1.0);
            let h = params.total_energy(&ScaledState::new(a1, p1, a2, p2));
            (u64::from(h < energy + delta), u64::from(h < energy - delta))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = R::of(samples as f64);
    let shell_frac = R::of((hits_hi - hits_lo) as f64) / n;
    let two_delta = R::of(2.0) * delta;
    Ok(McEstimate {
        value: volume * shell_frac / two_delta,
        std_err: volume * (shell_frac * (R::one() - shell_frac) / n).sqrt() / two_delta,
        n_samples: samples,
    })
}
