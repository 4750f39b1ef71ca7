//! The scaled two-mode Hamiltonian
//!
//!     H̄ = p̄₁²/2 + p̄₂²/2 + V̄(Ā₁, Ā₂),
//!     V̄ = α Ā₁² + 4β Ā₂² + ½ (Ā₁² + 4Ā₂²)²,
//!
//! its equations of motion, and the equilibrium catalogue. Phase space is all
//! of ℝ⁴; mode 1 is the reaction coordinate (bistable for α < 0) and mode 2
//! the transverse degree of freedom.

use crate::error::{Error, Result};
use crate::real::Real;

/// Dimensionless model parameters (α, β).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<R> {
    pub alpha: R,
    pub beta: R,
}

/// A dimensionless phase-space point (Ā₁, p̄₁, Ā₂, p̄₂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledState<R> {
    pub a1: R,
    pub p1: R,
    pub a2: R,
    pub p2: R,
}

impl<R: Real> ScaledState<R> {
    pub fn new(a1: R, p1: R, a2: R, p2: R) -> Self {
        Self { a1, p1, a2, p2 }
    }

    pub fn origin() -> Self {
        Self::new(R::zero(), R::zero(), R::zero(), R::zero())
    }

    /// Largest absolute componentwise difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> R {
        (self.a1 - other.a1)
            .abs()
            .max((self.p1 - other.p1).abs())
            .max((self.a2 - other.a2).abs())
            .max((self.p2 - other.p2).abs())
    }
}

impl<R: Real> ModelParams<R> {
    pub fn new(alpha: R, beta: R) -> Self {
        Self { alpha, beta }
    }

    /// Requires the bistable regime α < 0 used by every rate-theory analysis.
    pub fn require_bistable(&self) -> Result<()> {
        if self.alpha < R::zero() {
            Ok(())
        } else {
            Err(Error::UnsupportedRegime(format!(
                "alpha = {} must be negative (unstable first mode)",
                self.alpha
            )))
        }
    }

    /// V̄(Ā₁, Ā₂) = α Ā₁² + 4β Ā₂² + ½ (Ā₁² + 4Ā₂²)².
    pub fn potential(&self, a1: R, a2: R) -> R {
        let q = a1 * a1 + R::of(4.0) * a2 * a2;
        self.alpha * a1 * a1 + R::of(4.0) * self.beta * a2 * a2 + R::of(0.5) * q * q
    }

    /// Kinetic plus potential energy of a phase point.
    pub fn total_energy(&self, s: &ScaledState<R>) -> R {
        R::of(0.5) * (s.p1 * s.p1 + s.p2 * s.p2) + self.potential(s.a1, s.a2)
    }

    /// Forces (−∂V̄/∂Ā₁, −∂V̄/∂Ā₂).
    #[inline]
    pub fn forces(&self, a1: R, a2: R) -> (R, R) {
        let q = a1 * a1 + R::of(4.0) * a2 * a2;
        (
            -R::of(2.0) * a1 * (self.alpha + q),
            -R::of(8.0) * a2 * (self.beta + q),
        )
    }

    /// Right-hand side of Hamilton's equations: (Ā̇₁, ṗ̄₁, Ā̇₂, ṗ̄₂).
    pub fn eom_rhs(&self, s: &ScaledState<R>) -> [R; 4] {
        let (f1, f2) = self.forces(s.a1, s.a2);
        [s.p1, f1, s.p2, f2]
    }

    /// Complete equilibrium catalogue with linearization eigenvalues and energies.
    ///
    /// For α < 0, β > 0 there are three equilibria: the origin (index-1 saddle)
    /// and the two minima (±√(−α), 0, 0, 0). For α < 0, β < 0 the origin
    /// becomes an index-2 saddle and a pair of index-1 saddles appears at
    /// (0, 0, ±√(−β)/2, 0). β = 0 is reported as degenerate.
    pub fn equilibria(&self) -> Result<Vec<Equilibrium<R>>> {
        self.require_bistable()?;
        let zero = R::zero();
        let mut out = Vec::with_capacity(5);
        out.push(self.equilibrium_at(ScaledState::origin()));
        let a1_min = (-self.alpha).sqrt();
        out.push(self.equilibrium_at(ScaledState::new(a1_min, zero, zero, zero)));
        out.push(self.equilibrium_at(ScaledState::new(-a1_min, zero, zero, zero)));
        if self.beta < zero {
            let a2_saddle = (-self.beta).sqrt() * R::of(0.5);
            out.push(self.equilibrium_at(ScaledState::new(zero, zero, a2_saddle, zero)));
            out.push(self.equilibrium_at(ScaledState::new(zero, zero, -a2_saddle, zero)));
        }
        Ok(out)
    }

    /// Classifies the equilibrium at `location` from the Hessian of V̄.
    ///
    /// The cross second derivative ∂²V̄/∂Ā₁∂Ā₂ = 8Ā₁Ā₂ vanishes at every
    /// catalogued equilibrium, so the linearization splits into two 1-DoF
    /// blocks with eigenvalue pairs ±√(−V̄₁₁) and ±√(−V̄₂₂).
    fn equilibrium_at(&self, location: ScaledState<R>) -> Equilibrium<R> {
        let (a1, a2) = (location.a1, location.a2);
        let v11 = R::of(2.0) * self.alpha + R::of(6.0) * a1 * a1 + R::of(8.0) * a2 * a2;
        let v22 = R::of(8.0) * self.beta + R::of(8.0) * a1 * a1 + R::of(96.0) * a2 * a2;
        let pairs = [
            EigenPair::from_lambda_squared(-v11),
            EigenPair::from_lambda_squared(-v22),
        ];
        let real_pairs = pairs
            .iter()
            .filter(|p| p.kind == EigenPairKind::RealPair)
            .count();
        let degenerate = pairs.iter().any(|p| p.kind == EigenPairKind::ZeroPair);
        let kind = if degenerate {
            EquilibriumKind::Degenerate
        } else {
            match real_pairs {
                0 => EquilibriumKind::Minimum,
                1 => EquilibriumKind::Index1Saddle,
                _ => EquilibriumKind::Index2Saddle,
            }
        };
        Equilibrium {
            location,
            kind,
            eigenvalues: pairs,
            energy: self.potential(a1, a2),
        }
    }
}

/// A ± eigenvalue pair of the linearized flow, stored as magnitude plus type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair<R> {
    /// |λ|; the pair is ±|λ| (real) or ±i|λ| (imaginary).
    pub magnitude: R,
    pub kind: EigenPairKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenPairKind {
    /// ±λ real: a hyperbolic direction.
    RealPair,
    /// ±iω: an elliptic direction.
    ImaginaryPair,
    /// Both eigenvalues zero (degenerate linearization).
    ZeroPair,
}

impl<R: Real> EigenPair<R> {
    /// Builds the pair from λ² (real): λ² > 0 gives ±√λ², λ² < 0 gives ±i√(−λ²).
    pub fn from_lambda_squared(lambda_squared: R) -> Self {
        if lambda_squared > R::zero() {
            Self {
                magnitude: lambda_squared.sqrt(),
                kind: EigenPairKind::RealPair,
            }
        } else if lambda_squared < R::zero() {
            Self {
                magnitude: (-lambda_squared).sqrt(),
                kind: EigenPairKind::ImaginaryPair,
            }
        } else {
            Self {
                magnitude: R::zero(),
                kind: EigenPairKind::ZeroPair,
            }
        }
    }
}

/// Saddle index = number of hyperbolic eigenvalue pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Minimum,
    Index1Saddle,
    Index2Saddle,
    /// A zero eigenvalue pair (β = 0); not covered by the rate analysis.
    Degenerate,
}

impl std::fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EquilibriumKind::Minimum => write!(f, "minimum"),
            EquilibriumKind::Index1Saddle => write!(f, "index-1 saddle"),
            EquilibriumKind::Index2Saddle => write!(f, "index-2 saddle"),
            EquilibriumKind::Degenerate => write!(f, "degenerate"),
        }
    }
}

/// An equilibrium point with its classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium<R> {
    pub location: ScaledState<R>,
    pub kind: EquilibriumKind,
    /// The two ± eigenvalue pairs of the linearization.
    pub eigenvalues: [EigenPair<R>; 2],
    /// Total energy of the equilibrium.
    pub energy: R,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::{CaseLabel, PhysicalBeam, StrainCase};

    pub(crate) fn case_params(label: CaseLabel) -> ModelParams<f64> {
        PhysicalBeam::silicon_nanobeam()
            .derive_constants(StrainCase::preset(label).epsilon)
            .unwrap()
            .model_params()
    }

    #[test]
    fn potential_at_stationary_points() {
        let p = ModelParams::new(-0.4, 0.3);
        assert_eq!(p.potential(0.0, 0.0), 0.0);
        let a1 = 0.4_f64.sqrt();
        assert!((p.potential(a1, 0.0) - (-0.08)).abs() < 1e-15); // −α²/2
        let p2 = ModelParams::new(-0.4, -0.3);
        let a2 = 0.3_f64.sqrt() / 2.0;
        assert!((p2.potential(0.0, a2) - (-0.045)).abs() < 1e-15); // −β²/2
    }

    #[test]
    fn total_energy_trivia() {
        let p = ModelParams::new(-0.4, 0.3);
        let a1 = 0.4_f64.sqrt();
        let at_min = ScaledState::new(a1, 0.0, 0.0, 0.0);
        assert!((p.total_energy(&at_min) + 0.08).abs() < 1e-15);
        let e = 1e-3_f64;
        let kinetic_only = ScaledState::new(0.0, (2.0 * e).sqrt(), 0.0, 0.0);
        assert!((p.total_energy(&kinetic_only) - e).abs() < 1e-18);
    }

    #[test]
    fn eom_vanishes_at_equilibria() {
        for label in CaseLabel::ALL {
            let p = case_params(label);
            for eq in p.equilibria().unwrap() {
                let rhs = p.eom_rhs(&eq.location);
                for v in rhs {
                    assert!(v.abs() < 1e-18, "case {label}: rhs {rhs:?}");
                }
            }
        }
    }

    #[test]
    fn eom_momentum_components_are_momenta() {
        let p = case_params(CaseLabel::II);
        let s = ScaledState::new(0.01, -0.002, 0.003, 0.0004);
        let rhs = p.eom_rhs(&s);
        assert_eq!(rhs[0], s.p1);
        assert_eq!(rhs[2], s.p2);
    }

    #[test]
    fn forces_match_finite_differences() {
        let p = case_params(CaseLabel::III);
        let h = 1e-6;
        for &(a1, a2) in &[(0.01, 0.004), (-0.02, 0.001), (0.03, -0.006), (1e-4, 2e-5)] {
            let (f1, f2) = p.forces(a1, a2);
            let fd1 = -(p.potential(a1 + h, a2) - p.potential(a1 - h, a2)) / (2.0 * h);
            let fd2 = -(p.potential(a1, a2 + h) - p.potential(a1, a2 - h)) / (2.0 * h);
            let scale = f1.abs().max(f2.abs()).max(1e-12);
            assert!((f1 - fd1).abs() / scale < 1e-6, "f1 {f1} fd {fd1}");
            assert!((f2 - fd2).abs() / scale < 1e-6, "f2 {f2} fd {fd2}");
        }
    }

    #[test]
    fn equilibrium_catalogue_case_one() {
        let p = case_params(CaseLabel::I);
        let eqs = p.equilibria().unwrap();
        assert_eq!(eqs.len(), 3);
        assert_eq!(eqs[0].kind, EquilibriumKind::Index1Saddle);
        assert_eq!(eqs[0].energy, 0.0);
        for eq in &eqs[1..] {
            assert_eq!(eq.kind, EquilibriumKind::Minimum);
            let want = -p.alpha * p.alpha / 2.0;
            assert!((eq.energy - want).abs() < 1e-15 * want.abs());
            assert_eq!(eq.location.p1, 0.0);
            assert_eq!(eq.location.p2, 0.0);
        }
    }

    #[test]
    fn equilibrium_catalogue_case_two() {
        let p = case_params(CaseLabel::II);
        let eqs = p.equilibria().unwrap();
        assert_eq!(eqs.len(), 5);
        assert_eq!(eqs[0].kind, EquilibriumKind::Index2Saddle);
        assert_eq!(eqs[3].kind, EquilibriumKind::Index1Saddle);
        assert_eq!(eqs[4].kind, EquilibriumKind::Index1Saddle);
        // Saddle-pair energy −β²/2.
        let want = -2.1388e-7;
        assert!(
            (eqs[3].energy - want).abs() / want.abs() < 1e-3,
            "saddle energy {}",
            eqs[3].energy
        );
    }

    #[test]
    fn eigenvalues_match_catalogue_formulas() {
        // Independent route: closed-form eigenvalue magnitudes for each family.
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let alpha = -1e-4 - 2e-3 * next();
            let beta = -2e-3 + 4e-3 * next();
            if beta == 0.0 {
                continue;
            }
            let p = ModelParams::new(alpha, beta);
            let eqs = p.equilibria().unwrap();
            let check = |pair: &EigenPair<f64>, want_sq: f64| {
                let want_kind = if want_sq > 0.0 {
                    EigenPairKind::RealPair
                } else {
                    EigenPairKind::ImaginaryPair
                };
                assert_eq!(pair.kind, want_kind);
                let want = want_sq.abs().sqrt();
                assert!((pair.magnitude - want).abs() <= 1e-10 * want);
            };
            // Origin: ±√(−2α), ±2√(−2β).
            check(&eqs[0].eigenvalues[0], -2.0 * alpha);
            check(&eqs[0].eigenvalues[1], -8.0 * beta);
            // Minima: ±2√α, ±2√(2(α−β)).
            check(&eqs[1].eigenvalues[0], 4.0 * alpha);
            check(&eqs[1].eigenvalues[1], 8.0 * (alpha - beta));
            if beta < 0.0 {
                // Transverse saddles: ±√(2(β−α)), ±4√β.
                check(&eqs[3].eigenvalues[0], 2.0 * (beta - alpha));
                check(&eqs[3].eigenvalues[1], 16.0 * beta);
            }
        }
    }

    #[test]
    fn degenerate_beta_flagged() {
        let p = ModelParams::new(-1e-3, 0.0);
        let eqs = p.equilibria().unwrap();
        assert_eq!(eqs[0].kind, EquilibriumKind::Degenerate);
    }

    #[test]
    fn stable_regime_rejected() {
        assert!(ModelParams::new(1e-4, 1e-4).equilibria().is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn potential_reflection_symmetric(
                a1 in -0.1f64..0.1,
                a2 in -0.1f64..0.1,
            ) {
                let p = case_params(CaseLabel::II);
                // Exact in floating point: only even powers of each coordinate.
                prop_assert_eq!(p.potential(a1, a2), p.potential(-a1, a2));
                prop_assert_eq!(p.potential(a1, a2), p.potential(a1, -a2));
            }

            #[test]
            fn eom_is_symplectic_gradient(
                a1 in -0.05f64..0.05,
                p1 in -0.01f64..0.01,
                a2 in -0.02f64..0.02,
                p2 in -0.01f64..0.01,
            ) {
                let p = case_params(CaseLabel::I);
                let s = ScaledState::new(a1, p1, a2, p2);
                let rhs = p.eom_rhs(&s);
                let h = 1e-6;
                let de_da1 = (p.total_energy(&ScaledState::new(a1 + h, p1, a2, p2))
                    - p.total_energy(&ScaledState::new(a1 - h, p1, a2, p2))) / (2.0 * h);
                let de_da2 = (p.total_energy(&ScaledState::new(a1, p1, a2 + h, p2))
                    - p.total_energy(&ScaledState::new(a1, p1, a2 - h, p2))) / (2.0 * h);
                let scale = rhs[1].abs().max(rhs[3].abs()).max(1e-10);
                prop_assert!((rhs[1] + de_da1).abs() / scale < 1e-5);
                prop_assert!((rhs[3] + de_da2).abs() / scale < 1e-5);
            }
        }
    }
}
