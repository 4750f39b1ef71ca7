//! The invariant planes Π₁ (Ā₂ = p̄₂ = 0) and Π₂ (Ā₁ = p̄₁ = 0), the
//! normal-hyperbolicity energy bound, and the turning-point analysis on Π₂.
//!
//! The flow restricted to either plane is an integrable 1-DoF system:
//!
//!     H̄₁ = p̄₁²/2 + α Ā₁² + Ā₁⁴/2        on Π₁,
//!     H̄₂ = p̄₂²/2 + 4β Ā₂² + 8 Ā₂⁴       on Π₂.
//!
//! Linearizing transverse to Π₂ gives an exponential dichotomy whenever
//! 4·sup Ā₂²(t) < −α along the Π₂ trajectory, which holds for every level set
//! H̄₂ = E with E below E_max = (α²/2)(1 − 2β/α). The bounded piece of Π₂ under
//! that energy is a normally hyperbolic invariant manifold, and per energy
//! shell its boundary level set is the edge of the dividing surface.

use crate::error::{Error, Result};
use crate::hamiltonian::ModelParams;
use crate::real::Real;

/// Which invariant plane a reduced 1-DoF energy refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    /// The reaction plane (Ā₁, p̄₁).
    One,
    /// The transverse plane (Ā₂, p̄₂).
    Two,
}

/// Reduced 1-DoF energy on a plane: H̄₁ or H̄₂.
pub fn plane_energy<R: Real>(params: &ModelParams<R>, plane: Plane, a: R, p: R) -> R {
    match plane {
        Plane::One => {
            R::of(0.5) * p * p + params.alpha * a * a + R::of(0.5) * a * a * a * a
        }
        Plane::Two => plane2_energy(params, a, p),
    }
}

/// H̄₂(Ā₂, p̄₂) = p̄₂²/2 + 4β Ā₂² + 8 Ā₂⁴.
#[inline]
pub fn plane2_energy<R: Real>(params: &ModelParams<R>, a2: R, p2: R) -> R {
    R::of(0.5) * p2 * p2 + R::of(4.0) * params.beta * a2 * a2 + R::of(8.0) * a2 * a2 * a2 * a2
}

/// Minimum of H̄₂ over Π₂: −β²/2 for β < 0 (at Ā₂² = −β/4), else 0.
pub fn plane2_min_energy<R: Real>(params: &ModelParams<R>) -> R {
    if params.beta < R::zero() {
        -R::of(0.5) * params.beta * params.beta
    } else {
        R::zero()
    }
}

/// Checks that the Π₂ level set at `energy` is nonempty:
/// E ≥ 0 for β ≥ 0, E > −β²/2 for β < 0.
pub fn validate_plane2_level_set<R: Real>(params: &ModelParams<R>, energy: R) -> Result<()> {
    let ok = if params.beta < R::zero() {
        energy > plane2_min_energy(params)
    } else {
        energy >= R::zero()
    };
    if ok {
        Ok(())
    } else {
        Err(Error::EmptyRegion {
            energy: energy.as_f64(),
            context: "transverse-plane level set",
        })
    }
}

/// The sufficient energy bound for normal hyperbolicity of the Π₂ region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NhimBound<R> {
    /// E_max = (α²/2)(1 − 2β/α), positive for α < 0.
    pub e_max: R,
}

impl<R: Real> NhimBound<R> {
    /// Whether the bound certifies normal hyperbolicity at `energy`.
    pub fn holds_at(&self, energy: R) -> bool {
        energy < self.e_max
    }
}

/// E_max = (α²/2)(1 − 2β/α); requires the bistable regime α < 0.
pub fn nhim_energy_bound<R: Real>(params: &ModelParams<R>) -> Result<NhimBound<R>> {
    params.require_bistable()?;
    let e_max = R::of(0.5)
        * params.alpha
        * params.alpha
        * (R::one() - R::of(2.0) * params.beta / params.alpha);
    Ok(NhimBound { e_max })
}

/// Largest Ā₂² on the level set H̄₂ = E: the bigger root of
/// Ā₂⁴ + (β/2)Ā₂² − E/8 = 0, i.e. −β/4 + √(β² + 2E)/4. Strictly increasing in E.
pub fn max_turning_point<R: Real>(params: &ModelParams<R>, energy: R) -> Result<R> {
    validate_plane2_level_set(params, energy)?;
    let disc = params.beta * params.beta + R::of(2.0) * energy;
    Ok(R::of(0.25) * (-params.beta + disc.sqrt()))
}

/// The dichotomy ratio 4·Ā₂²_max/(−α); a value < 1 certifies the
/// normal-hyperbolicity condition at this energy.
pub fn dichotomy_margin<R: Real>(params: &ModelParams<R>, energy: R) -> Result<R> {
    params.require_bistable()?;
    let tp = max_turning_point(params, energy)?;
    Ok(R::of(4.0) * tp / -params.alpha)
}

/// Shape of the Π₂ level set H̄₂ = E.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSetTopology {
    /// One closed curve (E > 0, or any admissible E when β ≥ 0).
    SingleLoop,
    /// Two disjoint lobes around (±√(−β)/2, 0) for β < 0, −β²/2 < E < 0.
    DoubleLobe,
    /// The separatrix energy E = 0 for β < 0 (saddle plus homoclinic loops),
    /// or the degenerate single point E = 0 for β ≥ 0. Excluded from sampling.
    Critical,
}

/// Classifies the Π₂ level-set topology at `energy`.
pub fn level_set_topology<R: Real>(params: &ModelParams<R>, energy: R) -> Result<LevelSetTopology> {
    validate_plane2_level_set(params, energy)?;
    if energy == R::zero() {
        Ok(LevelSetTopology::Critical)
    } else if energy > R::zero() {
        Ok(LevelSetTopology::SingleLoop)
    } else {
        Ok(LevelSetTopology::DoubleLobe)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::{CaseLabel, PhysicalBeam, StrainCase};
    use crate::hamiltonian::ScaledState;
    use crate::integrator::{step, IntegratorConfig};

    fn case_params(label: CaseLabel) -> ModelParams<f64> {
        PhysicalBeam::silicon_nanobeam()
            .derive_constants(StrainCase::preset(label).epsilon)
            .unwrap()
            .model_params()
    }

    #[test]
    fn plane_energy_special_points() {
        let p = ModelParams::new(-0.4_f64, -0.3);
        assert_eq!(plane_energy(&p, Plane::Two, 0.0, 0.0), 0.0);
        let a2 = 0.3_f64.sqrt() / 2.0;
        assert!((plane_energy(&p, Plane::Two, a2, 0.0) - (-0.045)).abs() < 1e-15);
        let a1 = 0.4_f64.sqrt();
        assert!((plane_energy(&p, Plane::One, a1, 0.0) - (-0.08)).abs() < 1e-15);
    }

    #[test]
    fn bound_values_per_case() {
        let expect = [
            (CaseLabel::I, 2.710e-7),
            (CaseLabel::II, 2.770e-7),
            (CaseLabel::III, 4.848e-7),
        ];
        for (label, want) in expect {
            let b = nhim_energy_bound(&case_params(label)).unwrap();
            assert!(
                (b.e_max - want).abs() / want < 1e-3,
                "case {label}: {}",
                b.e_max
            );
            assert!(b.e_max > 0.0);
        }
        let simple = nhim_energy_bound(&ModelParams::new(-1.0, 0.0)).unwrap();
        assert_eq!(simple.e_max, 0.5);
        assert!(nhim_energy_bound(&ModelParams::new(0.1, 0.0)).is_err());
    }

    #[test]
    fn turning_point_closed_forms() {
        let p = ModelParams::new(-0.5_f64, -0.2);
        // E = 0 with β < 0: the homoclinic extremum −β/2.
        assert!((max_turning_point(&p, 0.0).unwrap() - 0.1).abs() < 1e-15);
        // β = 0: √(2E)/4.
        let p0 = ModelParams::new(-0.5_f64, 0.0);
        let e = 3e-3;
        assert!(
            (max_turning_point(&p0, e).unwrap() - (2.0 * e).sqrt() / 4.0).abs() < 1e-15
        );
        // At E_max the turning point reaches −α/4, so the margin is exactly 1.
        for label in CaseLabel::ALL {
            let params = case_params(label);
            let e_max = nhim_energy_bound(&params).unwrap().e_max;
            let tp = max_turning_point(&params, e_max).unwrap();
            assert!((tp - (-params.alpha / 4.0)).abs() < 1e-15 * params.alpha.abs());
            assert!((dichotomy_margin(&params, e_max).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn turning_point_increases_with_energy() {
        let p = case_params(CaseLabel::II);
        let lo = plane2_min_energy(&p);
        let mut prev = None;
        for i in 1..=60 {
            let e = lo + (3e-7 - lo) * i as f64 / 60.0;
            let tp = max_turning_point(&p, e).unwrap();
            if let Some(prev) = prev {
                assert!(tp > prev);
            }
            prev = Some(tp);
        }
    }

    #[test]
    fn margin_below_one_iff_below_bound() {
        for label in CaseLabel::ALL {
            let p = case_params(label);
            let e_max = nhim_energy_bound(&p).unwrap().e_max;
            for i in -20i32..=20 {
                // Skip the exact boundary, where roundoff decides the strict sign.
                if i == 0 {
                    continue;
                }
                let e = e_max * (1.0 + 0.04 * i as f64);
                let margin = dichotomy_margin(&p, e).unwrap();
                assert_eq!(margin < 1.0, e < e_max, "case {label} at {e:e}");
            }
        }
    }

    #[test]
    fn topology_classification() {
        let p2 = case_params(CaseLabel::II); // β < 0
        assert_eq!(
            level_set_topology(&p2, 1e-8).unwrap(),
            LevelSetTopology::SingleLoop
        );
        assert_eq!(
            level_set_topology(&p2, -1e-7).unwrap(),
            LevelSetTopology::DoubleLobe
        );
        assert_eq!(
            level_set_topology(&p2, 0.0).unwrap(),
            LevelSetTopology::Critical
        );
        assert!(level_set_topology(&p2, -3e-7).is_err()); // below −β²/2
        let p1 = case_params(CaseLabel::I); // β > 0
        assert_eq!(
            level_set_topology(&p1, 1e-9).unwrap(),
            LevelSetTopology::SingleLoop
        );
        assert!(level_set_topology(&p1, -1e-9).is_err());
    }

    /// Counting sign changes of E − V₂ along the Ā₂ axis is an independent
    /// check of the topology: 2 for a single loop, 4 for two lobes.
    #[test]
    fn topology_agrees_with_axis_sign_changes() {
        for (label, e) in [
            (CaseLabel::I, 1e-7),
            (CaseLabel::II, 1e-8),
            (CaseLabel::II, -1e-7),
            (CaseLabel::III, -2.5e-9),
            (CaseLabel::III, 1e-9),
        ] {
            let p = case_params(label);
            let tp = max_turning_point(&p, e).unwrap().sqrt();
            let n = 40_001;
            let mut changes = 0;
            let mut prev_sign = 0i8;
            for i in 0..n {
                let a2 = -1.5 * tp + 3.0 * tp * i as f64 / (n - 1) as f64;
                let v = e - (4.0 * p.beta * a2 * a2 + 8.0 * a2.powi(4));
                let sign = if v > 0.0 { 1 } else { -1 };
                if prev_sign != 0 && sign != prev_sign {
                    changes += 1;
                }
                prev_sign = sign;
            }
            let want = match level_set_topology(&p, e).unwrap() {
                LevelSetTopology::SingleLoop => 2,
                LevelSetTopology::DoubleLobe => 4,
                LevelSetTopology::Critical => unreachable!(),
            };
            assert_eq!(changes, want, "case {label} E = {e:e}");
        }
    }

    /// The observed supremum of Ā₂² along an integrated Π₂ trajectory must
    /// match the closed-form turning point.
    #[test]
    fn integrated_trajectory_reaches_turning_point() {
        for (label, e) in [(CaseLabel::I, 1e-7), (CaseLabel::II, -2e-7), (CaseLabel::III, 1e-9)] {
            let p = case_params(label);
            let tp = max_turning_point(&p, e).unwrap();
            // Launch on the level set: at the inner turning point for lobes,
            // at Ā₂ = 0 with full momentum for a single loop.
            let s0 = if e < 0.0 {
                let inner = 0.25 * (-p.beta - (p.beta * p.beta + 2.0 * e).sqrt());
                ScaledState::new(0.0, 0.0, inner.sqrt(), 0.0)
            } else {
                ScaledState::new(0.0, 0.0, 0.0, (2.0 * e).sqrt())
            };
            let cfg = IntegratorConfig::<f64>::default();
            let mut s = s0;
            let mut sup = s.a2 * s.a2;
            let steps = 400_000; // several transverse periods
            let mut hist = [s.a2 * s.a2; 3];
            for _ in 0..steps {
                s = step(&p, &s, cfg.dt);
                let sq = s.a2 * s.a2;
                hist = [hist[1], hist[2], sq];
                // Parabolic refinement through each local maximum of Ā₂²(t).
                if hist[1] >= hist[0] && hist[1] >= hist[2] {
                    let denom = hist[0] - 2.0 * hist[1] + hist[2];
                    let peak = if denom < 0.0 {
                        hist[1] - 0.125 * (hist[2] - hist[0]).powi(2) / denom
                    } else {
                        hist[1]
                    };
                    sup = sup.max(peak);
                }
                sup = sup.max(sq);
            }
            assert!(
                (sup - tp).abs() / tp < 1e-6,
                "case {label} E={e:e}: sup {sup} vs {tp}"
            );
        }
    }
}
