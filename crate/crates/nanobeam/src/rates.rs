//! Gap-time ensembles and the derived rate-theory observables.
//!
//! A trajectory entering the product well through DS₊(E) leaves it through
//! DS₋(E) after its gap time s. Averaging over the flux measure gives the mean
//! gap time s̄, and the classical spectral theorem identifies the phase-space
//! volume swept by crossing trajectories as ρ₊ᶜ(E) = φ(E)·s̄. Comparing ρ₊ᶜ
//! with the full reactant density of states ρ₊ separates statistical from
//! nonergodic dynamics: k = 1/s̄ = φ/ρ₊ᶜ is the rate of the crossing
//! subensemble, while k_RRKM = φ/ρ₊ assumes all of the well reacts.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{ModelParams, ScaledState};
use crate::integrator::{first_crossing, propagate_observe, FirstCrossing, IntegratorConfig};
use crate::invariant_plane::plane2_energy;
use crate::real::Real;
use crate::sampling::{
    flux, reactant_dos, sample_ds_plus, DosMethod, DsSample, FluxMethod, McEstimate, RngSeed,
};

/// One DS₊ launch and what became of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRecord<R> {
    pub sample: DsSample<R>,
    pub outcome: GapOutcome<R>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapOutcome<R> {
    /// Reached DS₋ after `gap_time`; `exit_state` sits on the surface with p̄₁ < 0.
    Crossed { gap_time: R, exit_state: ScaledState<R> },
    /// Still in the well at `t_max`.
    Censored { t_max: R },
}

impl<R: Real> GapRecord<R> {
    pub fn gap_time(&self) -> Option<R> {
        match self.outcome {
            GapOutcome::Crossed { gap_time, .. } => Some(gap_time),
            GapOutcome::Censored { .. } => None,
        }
    }
}

/// Samples DS₊(E) and propagates every sample to its first DS₋ arrival.
pub fn gap_ensemble<R: Real>(
    params: &ModelParams<R>,
    energy: R,
    n: u64,
    seed: RngSeed,
    cfg: &IntegratorConfig<R>,
) -> Result<Vec<GapRecord<R>>> {
    cfg.validate()?;
    let samples = sample_ds_plus(params, energy, n, seed)?;
    samples
        .into_par_iter()
        .map(|sample| {
            let outcome = match first_crossing(params, &sample.state(), cfg)? {
                FirstCrossing::Crossed(ev) => GapOutcome::Crossed {
                    gap_time: ev.time,
                    exit_state: ev.state,
                },
                FirstCrossing::Censored { t_max, .. } => GapOutcome::Censored { t_max },
            };
            Ok(GapRecord { sample, outcome })
        })
        .collect()
}

/// Ensemble summary: mean gap time and every derived rate quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapStatistics<R> {
    /// s̄ over uncensored records (censored trajectories are excluded, matching
    /// the crossing-trajectory measure, and counted in `censored_fraction`).
    pub mean_gap: McEstimate<R>,
    /// φ(E) as supplied.
    pub flux: McEstimate<R>,
    /// ρ₊ᶜ = φ·s̄.
    pub crossing_dos: McEstimate<R>,
    /// ρ₊(E) as supplied.
    pub reactant_dos: McEstimate<R>,
    /// k = 1/s̄.
    pub inverse_gap_rate: McEstimate<R>,
    /// k_RRKM = φ/ρ₊.
    pub rrkm_rate: McEstimate<R>,
    pub censored_fraction: R,
    pub n_crossed: u64,
}

/// Combines a gap ensemble with the flux and density of states at the same energy.
pub fn gap_statistics<R: Real>(
    records: &[GapRecord<R>],
    flux: &McEstimate<R>,
    reactant_dos: &McEstimate<R>,
) -> Result<GapStatistics<R>> {
    let gaps: Vec<R> = records.iter().filter_map(|r| r.gap_time()).collect();
    if gaps.is_empty() {
        return Err(Error::NoStatistics(
            "gap ensemble has no uncensored records".into(),
        ));
    }
    let n = R::of(gaps.len() as f64);
    let mean = gaps.iter().fold(R::zero(), |acc, &g| acc + g) / n;
    let var = gaps
        .iter()
        .fold(R::zero(), |acc, &g| acc + (g - mean) * (g - mean))
        / (n - R::one()).max(R::one());
    let mean_se = (var / n).sqrt();
    let mean_gap = McEstimate {
        value: mean,
        std_err: mean_se,
        n_samples: gaps.len() as u64,
    };
    let crossing_dos = product_estimate(flux, &mean_gap);
    let inv = R::one() / mean;
    let inverse_gap_rate = McEstimate {
        value: inv,
        std_err: mean_se * inv * inv,
        n_samples: mean_gap.n_samples,
    };
    let rrkm_rate = ratio_estimate(flux, reactant_dos);
    Ok(GapStatistics {
        mean_gap,
        flux: *flux,
        crossing_dos,
        reactant_dos: *reactant_dos,
        inverse_gap_rate,
        rrkm_rate,
        censored_fraction: R::of((records.len() - gaps.len()) as f64)
            / R::of(records.len() as f64),
        n_crossed: gaps.len() as u64,
    })
}

fn product_estimate<R: Real>(a: &McEstimate<R>, b: &McEstimate<R>) -> McEstimate<R> {
    let value = a.value * b.value;
    let se = ((a.std_err * b.value) * (a.std_err * b.value)
        + (b.std_err * a.value) * (b.std_err * a.value))
        .sqrt();
    McEstimate {
        value,
        std_err: se,
        n_samples: a.n_samples.max(b.n_samples),
    }
}

fn ratio_estimate<R: Real>(num: &McEstimate<R>, den: &McEstimate<R>) -> McEstimate<R> {
    let value = num.value / den.value;
    let rel = |e: &McEstimate<R>| {
        if e.value == R::zero() {
            R::zero()
        } else {
            e.std_err / e.value
        }
    };
    let (rn, rd) = (rel(num), rel(den));
    McEstimate {
        value,
        std_err: value.abs() * (rn * rn + rd * rd).sqrt(),
        n_samples: num.n_samples.max(den.n_samples),
    }
}

/// Gap-time histogram density and the empirical survival function.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionPair<R> {
    /// len = bins + 1; edges start at zero.
    pub bin_edges: Vec<R>,
    /// Normalized density over the uncensored mass, len = bins.
    pub density: Vec<R>,
    /// F at each bin edge: fraction of gap times strictly greater, F(0) = 1.
    pub survival: Vec<R>,
    /// Set when fewer than 100 uncensored records back the histogram.
    pub insufficient_data: bool,
}

/// Histograms the uncensored gap times with the given bin width and returns
/// the paired survival function (exactly 1 − ECDF at the bin edges).
pub fn survival_and_histogram<R: Real>(
    records: &[GapRecord<R>],
    bin_width: R,
) -> Result<DistributionPair<R>> {
    if !(bin_width > R::zero()) {
        return Err(Error::InvalidParameter("bin width must be > 0".into()));
    }
    let mut gaps: Vec<R> = records.iter().filter_map(|r| r.gap_time()).collect();
    if gaps.is_empty() {
        return Err(Error::NoStatistics("no uncensored gap times to bin".into()));
    }
    gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite gap times"));
    let max = *gaps.last().expect("nonempty");
    let bins = (max / bin_width).as_f64().ceil().max(1.0) as usize;
    let n = gaps.len();
    let mut counts = vec![0u64; bins];
    for &g in &gaps {
        let idx = ((g / bin_width).as_f64().floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let norm = R::of(n as f64) * bin_width;
    let density: Vec<R> = counts.iter().map(|&c| R::of(c as f64) / norm).collect();
    let bin_edges: Vec<R> = (0..=bins).map(|i| R::of(i as f64) * bin_width).collect();
    let survival = bin_edges
        .iter()
        .map(|&t| {
            // Number of gap times strictly greater than t.
            let above = n - gaps.partition_point(|&g| g <= t);
            R::of(above as f64) / R::of(n as f64)
        })
        .collect();
    Ok(DistributionPair {
        bin_edges,
        density,
        survival,
        insufficient_data: n < 100,
    })
}

/// Exponential fit to the survival decay across the leading pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseFit<R> {
    pub t_lo: R,
    pub t_hi: R,
    /// Decay rate κ of F(t) ~ e^{−κt} over the window.
    pub kappa: R,
    pub r_squared: R,
}

/// Fraction of the peak density a bin must reach to belong to the pulse.
const PULSE_THRESHOLD: f64 = 0.05;

/// First contiguous run of bins above 5% of the peak density: `[start, end)`.
fn leading_pulse_run<R: Real>(density: &[R]) -> Option<(usize, usize)> {
    let peak = density.iter().copied().fold(R::zero(), |a, b| a.max(b));
    if !(peak > R::zero()) {
        return None;
    }
    let threshold = peak * R::of(PULSE_THRESHOLD);
    let start = density.iter().position(|&d| d > threshold)?;
    let mut end = start;
    while end < density.len() && density[end] > threshold {
        end += 1;
    }
    Some((start, end))
}

/// Fits log F(t) by least squares over the first pulse: the first contiguous
/// run of histogram bins whose density exceeds 5% of the global maximum.
pub fn fit_pulse_decay<R: Real>(pair: &DistributionPair<R>) -> Result<PulseFit<R>> {
    let (start, end) = leading_pulse_run(&pair.density)
        .ok_or_else(|| Error::FitFailure("histogram is empty".into()))?;
    // Edge indices [start, end] bound the run of bins [start, end).
    let pts: Vec<(R, R)> = (start..=end)
        .filter(|&i| pair.survival[i] > R::zero())
        .map(|i| (pair.bin_edges[i], pair.survival[i].ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::FitFailure(format!(
            "pulse window [{}, {}] leaves {} usable survival points",
            pair.bin_edges[start].as_f64(),
            pair.bin_edges[end].as_f64(),
            pts.len()
        )));
    }
    let (slope, r_squared) = linear_fit(&pts);
    if !(slope < R::zero()) {
        return Err(Error::FitFailure(format!(
            "survival does not decay over the pulse (slope {})",
            slope.as_f64()
        )));
    }
    Ok(PulseFit {
        t_lo: pair.bin_edges[start],
        t_hi: pair.bin_edges[end],
        kappa: -slope,
        r_squared,
    })
}

/// Histograms the gap times at `initial_width` and, when the leading pulse is
/// too sharp for that binning (fewer than 8 bins above threshold), halves the
/// width until the pulse is resolved, then fits its decay.
///
/// Near the saddle-pair energy the first pulse can be an order of magnitude
/// narrower than the mean-gap scale that sets the default width.
pub fn resolve_and_fit_pulse<R: Real>(
    records: &[GapRecord<R>],
    initial_width: R,
) -> Result<(DistributionPair<R>, PulseFit<R>)> {
    let mut width = initial_width;
    let mut pair = survival_and_histogram(records, width)?;
    for _ in 0..12 {
        match leading_pulse_run(&pair.density) {
            Some((start, end)) if end - start >= 8 => break,
            _ => {
                width = width * R::of(0.5);
                pair = survival_and_histogram(records, width)?;
            }
        }
    }
    let fit = fit_pulse_decay(&pair)?;
    Ok((pair, fit))
}

/// Number of pulses in the gap-time histogram: contiguous runs of bins above
/// 5% of the peak density, counting only runs that carry at least `mass_floor`
/// of the probability mass. Noise islands near the threshold straddle it bin
/// by bin but carry negligible mass; genuine secondary pulses do not.
pub fn pulse_count<R: Real>(pair: &DistributionPair<R>, mass_floor: R) -> usize {
    let peak = pair
        .density
        .iter()
        .copied()
        .fold(R::zero(), |a, b| a.max(b));
    if !(peak > R::zero()) {
        return 0;
    }
    let threshold = peak * R::of(PULSE_THRESHOLD);
    let width = pair.bin_edges[1] - pair.bin_edges[0];
    let mut pulses = 0;
    let mut run_mass = R::zero();
    let mut inside = false;
    for &d in pair.density.iter().chain(std::iter::once(&R::zero())) {
        if d > threshold {
            inside = true;
            run_mass += d * width;
        } else if inside {
            if run_mass >= mass_floor {
                pulses += 1;
            }
            inside = false;
            run_mass = R::zero();
        }
    }
    pulses
}

/// Least-squares slope and r² of y against x.
fn linear_fit<R: Real>(pts: &[(R, R)]) -> (R, R) {
    let n = R::of(pts.len() as f64);
    let (mut sx, mut sy) = (R::zero(), R::zero());
    for &(x, y) in pts {
        sx += x;
        sy += y;
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy, mut syy) = (R::zero(), R::zero(), R::zero());
    for &(x, y) in pts {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let r2 = if syy > R::zero() {
        (sxy * sxy) / (sxx * syy)
    } else {
        R::one()
    };
    (slope, r2)
}

/// Reactive-flux correlation data on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxCorrelation<R> {
    pub t_grid: Vec<R>,
    /// Product-well occupancy fraction W(t) of the DS₊ ensemble.
    pub w: Vec<R>,
    /// K(t) = 2·k_RRKM·(2W(t) − 1).
    pub k: Vec<R>,
    pub rrkm_rate: R,
}

/// Samples DS₊(E) with the flux measure, tracks the product-well occupancy
/// W(t) on the grid, and forms K(t) = 2·k_RRKM·(2W − 1).
///
/// At t = 0 every sample is by construction crossing into the product well,
/// so W(0) = 1; at later grid times a point found exactly on Ā₁ = 0 counts
/// one half.
pub fn flux_correlation<R: Real>(
    params: &ModelParams<R>,
    energy: R,
    n: u64,
    t_grid: &[R],
    seed: RngSeed,
    cfg: &IntegratorConfig<R>,
) -> Result<FluxCorrelation<R>> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("t_grid must be nonempty".into()));
    }
    let phi = flux(params, energy, FluxMethod::Quadrature)?.value;
    let rho = reactant_dos(params, energy, DosMethod::Quadrature)?.value;
    let rrkm_rate = phi / rho;
    let samples = sample_ds_plus(params, energy, n, seed)?;
    // Occupancy is counted in half units, so the parallel reduction is exact.
    let half_counts: Vec<u64> = samples
        .par_iter()
        .map(|sample| {
            let states = propagate_observe(params, &sample.state(), t_grid, cfg)?;
            Ok(states
                .iter()
                .zip(t_grid)
                .map(|(s, &t)| {
                    if t == R::zero() || s.a1 > R::zero() {
                        2u64
                    } else if s.a1 == R::zero() {
                        1
                    } else {
                        0
                    }
                })
                .collect::<Vec<u64>>())
        })
        .try_reduce(
            || vec![0u64; t_grid.len()],
            |mut acc, row| {
                for (a, b) in acc.iter_mut().zip(row) {
                    *a += b;
                }
                Ok(acc)
            },
        )?;
    let denom = R::of(2.0 * n as f64);
    let w: Vec<R> = half_counts.iter().map(|&c| R::of(c as f64) / denom).collect();
    let k = w
        .iter()
        .map(|&wi| R::of(2.0) * rrkm_rate * (R::of(2.0) * wi - R::one()))
        .collect();
    Ok(FluxCorrelation {
        t_grid: t_grid.to_vec(),
        w,
        k,
        rrkm_rate,
    })
}

/// One cell of the gap-time map on DS₊.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapCell<R> {
    /// Outside the disk {H̄₂ < E}.
    Outside,
    Crossed(R),
    Censored,
}

/// Gap times on a regular (Ā₂, p̄₂) grid over the dividing surface.
#[derive(Debug, Clone, PartialEq)]
pub struct GapMap<R> {
    pub a2_nodes: Vec<R>,
    pub p2_nodes: Vec<R>,
    /// Row-major over p̄₂ rows: `cells[ip2 * a2_nodes.len() + ia2]`.
    pub cells: Vec<MapCell<R>>,
}

impl<R: Real> GapMap<R> {
    pub fn cell(&self, ia2: usize, ip2: usize) -> MapCell<R> {
        self.cells[ip2 * self.a2_nodes.len() + ia2]
    }

    /// The p̄₂ = 0 slice (present when the resolution is odd).
    pub fn p2_zero_slice(&self) -> Option<Vec<(R, MapCell<R>)>> {
        let row = self.p2_nodes.iter().position(|&p| p == R::zero())?;
        Some(
            self.a2_nodes
                .iter()
                .enumerate()
                .map(|(i, &a2)| (a2, self.cell(i, row)))
                .collect(),
        )
    }
}

/// Evaluates the gap time on a `resolution × resolution` grid spanning the
/// bounding box of the disk; cells outside {H̄₂ < E} are flagged. Node
/// coordinates are built symmetrically so that the grid maps onto itself under
/// (Ā₂, p̄₂) → (−Ā₂, −p̄₂) exactly.
pub fn ds_gap_map<R: Real>(
    params: &ModelParams<R>,
    energy: R,
    resolution: usize,
    cfg: &IntegratorConfig<R>,
) -> Result<GapMap<R>> {
    if resolution < 3 {
        return Err(Error::InvalidParameter("resolution must be >= 3".into()));
    }
    cfg.validate()?;
    let bounds = crate::sampling::ds_bounds(params, energy)?;
    let nodes = |extent: R| -> Vec<R> {
        let mid = R::of((resolution - 1) as f64 * 0.5);
        let scale = extent / mid;
        (0..resolution)
            .map(|i| (R::of(i as f64) - mid) * scale)
            .collect()
    };
    let a2_nodes = nodes(bounds.a2_max);
    let p2_nodes = nodes(bounds.p2_max);
    let cells: Vec<MapCell<R>> = (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let (ip2, ia2) = (idx / resolution, idx % resolution);
            let (a2, p2) = (a2_nodes[ia2], p2_nodes[ip2]);
            let h2 = plane2_energy(params, a2, p2);
            if h2 >= energy {
                return Ok(MapCell::Outside);
            }
            let p1 = (R::of(2.0) * (energy - h2)).sqrt();
            let start = ScaledState::new(R::zero(), p1, a2, p2);
            Ok(match first_crossing(params, &start, cfg)? {
                FirstCrossing::Crossed(ev) => MapCell::Crossed(ev.time),
                FirstCrossing::Censored { .. } => MapCell::Censored,
            })
        })
        .collect::<Result<_>>()?;
    Ok(GapMap {
        a2_nodes,
        p2_nodes,
        cells,
    })
}
