//! Physical beam parameters and their reduction to the dimensionless model.
//!
//! A hinged Euler–Bernoulli beam of rectangular cross section under
//! compressive strain ε < 0 reduces, after a two-mode truncation and
//! nondimensionalization, to a two-degree-of-freedom Hamiltonian controlled by
//! two numbers α = ε − ε̄ and β = ε − 4ε̄, where ε̄ = −κ²π²/L² and κ is the
//! radius of gyration of the cross section. This module performs that
//! reduction, the linear modal analysis, and the conversion back to physical
//! energy and time scales.

use crate::error::{Error, Result};
use crate::hamiltonian::ModelParams;
use crate::real::Real;

/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380649e-23;
/// Reduced Planck constant, J·s.
pub const REDUCED_PLANCK: f64 = 1.054571817e-34;

/// Beam geometry and material, in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalBeam<R> {
    /// Elastic modulus Q, J/m³.
    pub elastic_modulus: R,
    /// Uncompressed length L₀, m.
    pub rest_length: R,
    /// Width w, m. Must exceed the depth so transverse displacement is
    /// confined to the depth direction.
    pub width: R,
    /// Depth d, m.
    pub depth: R,
    /// Mass density ρ, kg/m³.
    pub mass_density: R,
}

impl<R: Real> PhysicalBeam<R> {
    /// Validates positivity of all parameters and w > d.
    pub fn new(
        elastic_modulus: R,
        rest_length: R,
        width: R,
        depth: R,
        mass_density: R,
    ) -> Result<Self> {
        let beam = Self {
            elastic_modulus,
            rest_length,
            width,
            depth,
            mass_density,
        };
        beam.validate()?;
        Ok(beam)
    }

    /// The silicon nanobeam used throughout: Q = 1.3e11 J/m³, L₀ = 50 nm,
    /// w = 2 nm, d = 1 nm, ρ = 2330 kg/m³.
    pub fn silicon_nanobeam() -> Self {
        Self {
            elastic_modulus: R::of(1.3e11),
            rest_length: R::of(5e-8),
            width: R::of(2e-9),
            depth: R::of(1e-9),
            mass_density: R::of(2330.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let all_positive = self.elastic_modulus > R::zero()
            && self.rest_length > R::zero()
            && self.width > R::zero()
            && self.depth > R::zero()
            && self.mass_density > R::zero();
        if !all_positive {
            return Err(Error::InvalidParameter(
                "beam parameters must be strictly positive".into(),
            ));
        }
        if self.width <= self.depth {
            return Err(Error::InvalidParameter(format!(
                "width {} must exceed depth {}",
                self.width, self.depth
            )));
        }
        Ok(())
    }

    /// Linear modulus F = Q·w·d, N.
    pub fn linear_modulus(&self) -> R {
        self.elastic_modulus * self.width * self.depth
    }

    /// Squared radius of gyration κ² = d²/12 of the rectangular section, m².
    pub fn gyration_squared(&self) -> R {
        self.depth * self.depth / R::of(12.0)
    }

    /// Mass per unit length μ = ρ·w·d, kg/m.
    pub fn mass_per_length(&self) -> R {
        self.mass_density * self.width * self.depth
    }

    /// Derives the dimensionless model parameters and physical scales at strain ε.
    pub fn derive_constants(&self, epsilon: R) -> Result<DerivedConstants<R>> {
        self.validate()?;
        if R::one() + epsilon <= R::zero() {
            return Err(Error::InvalidParameter(format!(
                "strain {epsilon} must satisfy 1 + strain > 0"
            )));
        }
        let compressed_length = self.rest_length * (R::one() + epsilon);
        let pi = R::PI();
        let eps_bar = -self.gyration_squared() * pi * pi / (compressed_length * compressed_length);
        let linear_modulus = self.linear_modulus();
        let mass_per_length = self.mass_per_length();
        Ok(DerivedConstants {
            linear_modulus,
            gyration: self.gyration_squared().sqrt(),
            mass_per_length,
            compressed_length,
            epsilon,
            eps_bar,
            alpha: epsilon - eps_bar,
            beta: epsilon - R::of(4.0) * eps_bar,
            energy_unit: linear_modulus * self.rest_length,
            // Fixed by matching the physical kinetic energy μc²Ȧ²/2 (with the
            // amplitude scale c = L√(2L₀)/π) to F·L₀·Ā′²/2 in scaled time.
            time_unit: compressed_length / pi
                * (R::of(2.0) * mass_per_length / linear_modulus).sqrt(),
        })
    }

    /// Critical strain ε_c solving ε_c = −κ²π²/(L₀(1+ε_c))², by fixed-point
    /// iteration from ε⁰ = −κ²π²/L₀² (contraction factor ≈ 2|ε_c| ≪ 1).
    pub fn critical_strain(&self) -> Result<R> {
        self.validate()?;
        let pi = R::PI();
        let k2pi2 = self.gyration_squared() * pi * pi;
        let map = |e: R| {
            let len = self.rest_length * (R::one() + e);
            -k2pi2 / (len * len)
        };
        let mut eps = map(R::zero());
        for _ in 0..100 {
            let next = map(eps);
            if (next - eps).abs() <= R::of(1e-12) * eps.abs() {
                return Ok(next);
            }
            eps = next;
        }
        Err(Error::NonConvergence {
            what: "critical strain fixed point",
            iterations: 100,
        })
    }

    /// Angular frequency (rad/s) and linear stability of transverse mode `n` at strain ε.
    ///
    /// ω_n = ω₀·n·√(n² − ε/ε̄) with ω₀ = π²(κ/L²)√(F/μ); the mode is stable iff
    /// n² − ε/ε̄ > 0. Unstable modes report the magnitude of the imaginary
    /// frequency with `stable = false`.
    pub fn mode_frequency(&self, epsilon: R, n: u32) -> Result<ModeFrequency<R>> {
        if n == 0 {
            return Err(Error::InvalidParameter("mode index must be >= 1".into()));
        }
        let c = self.derive_constants(epsilon)?;
        let pi = R::PI();
        let l2 = c.compressed_length * c.compressed_length;
        let omega0 = pi * pi * c.gyration / l2 * (c.linear_modulus / c.mass_per_length).sqrt();
        let n_r = R::from_u32(n).expect("mode index fits scalar");
        let margin = n_r * n_r - epsilon / c.eps_bar;
        Ok(ModeFrequency {
            omega: omega0 * n_r * margin.abs().sqrt(),
            stable: margin > R::zero(),
        })
    }

    /// Barrier height and well vibrational quantum in kelvin, plus the energy
    /// and time units, at strain ε. Requires a barrier (α < 0).
    pub fn energy_scales(&self, epsilon: R) -> Result<EnergyScales<R>> {
        let c = self.derive_constants(epsilon)?;
        if c.alpha >= R::zero() {
            return Err(Error::NoBarrier {
                alpha: c.alpha.as_f64(),
            });
        }
        let kb = R::of(BOLTZMANN);
        // 2√(−α) is the scaled oscillation frequency about either minimum.
        let omega_well = R::of(2.0) * (-c.alpha).sqrt() / c.time_unit;
        Ok(EnergyScales {
            barrier_kelvin: c.energy_unit * c.alpha * c.alpha / (R::of(2.0) * kb),
            quantum_kelvin: R::of(REDUCED_PLANCK) * omega_well / kb,
            energy_unit: c.energy_unit,
            time_unit: c.time_unit,
        })
    }
}

/// Scales derived from a beam at a given strain.
///
/// Scaled energies multiply `energy_unit` (J) to become physical; scaled times
/// multiply `time_unit` (s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants<R> {
    /// Linear modulus F = Q·w·d, N.
    pub linear_modulus: R,
    /// Radius of gyration κ with κ² = d²/12, m.
    pub gyration: R,
    /// Mass per unit length μ, kg/m.
    pub mass_per_length: R,
    /// Compressed length L = L₀(1+ε), m.
    pub compressed_length: R,
    /// The strain the constants were derived at.
    pub epsilon: R,
    /// ε̄ = −κ²π²/L² (dimensionless, < 0).
    pub eps_bar: R,
    /// α = ε − ε̄; the first mode is unstable iff α < 0.
    pub alpha: R,
    /// β = ε − 4ε̄; the second mode is unstable iff β < 0.
    pub beta: R,
    /// F·L₀, J.
    pub energy_unit: R,
    /// t₀ = (L/π)√(2μ/F), s.
    pub time_unit: R,
}

impl<R: Real> DerivedConstants<R> {
    /// The dimensionless Hamiltonian parameters (α, β).
    pub fn model_params(&self) -> ModelParams<R> {
        ModelParams::new(self.alpha, self.beta)
    }
}

/// Result of the linear modal analysis for one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFrequency<R> {
    /// |ω_n| in rad/s; the frequency itself when stable, the growth rate scale
    /// of the instability otherwise.
    pub omega: R,
    pub stable: bool,
}

/// Energy/time scales in laboratory units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyScales<R> {
    /// Barrier height ΔE/k_B between a buckled minimum and the flat state, K.
    pub barrier_kelvin: R,
    /// ħω/k_B for oscillations along the reaction coordinate at a minimum, K.
    pub quantum_kelvin: R,
    /// F·L₀, J.
    pub energy_unit: R,
    /// t₀, s.
    pub time_unit: R,
}

/// The three studied compression cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseLabel {
    I,
    II,
    III,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 3] = [CaseLabel::I, CaseLabel::II, CaseLabel::III];
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CaseLabel::I => write!(f, "I"),
            CaseLabel::II => write!(f, "II"),
            CaseLabel::III => write!(f, "III"),
        }
    }
}

impl std::str::FromStr for CaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(CaseLabel::I),
            "II" | "2" => Ok(CaseLabel::II),
            "III" | "3" => Ok(CaseLabel::III),
            other => Err(Error::InvalidParameter(format!(
                "unknown case {other:?}, expected I, II, or III"
            ))),
        }
    }
}

/// A labelled compressive strain value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainCase<R> {
    pub label: CaseLabel,
    pub epsilon: R,
}

impl<R: Real> StrainCase<R> {
    /// The studied strain presets. Case I keeps the second mode stable
    /// (β > 0); cases II and III destabilize it (β < 0), case III sitting just
    /// above the symmetric saddle pair at β = −1e-4.
    pub fn preset(label: CaseLabel) -> Self {
        let epsilon = match label {
            CaseLabel::I => R::of(-0.00065840),
            CaseLabel::II => R::of(-0.00197520),
            CaseLabel::III => R::of(-0.001419692),
        };
        Self { label, epsilon }
    }

    pub fn all() -> [Self; 3] {
        CaseLabel::ALL.map(Self::preset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beam() -> PhysicalBeam<f64> {
        PhysicalBeam::silicon_nanobeam()
    }

    // (eps_bar, alpha, beta, barrier K, quantum K) per case.
    const CASE_TABLE: [(CaseLabel, f64, f64, f64, f64, f64); 3] = [
        (CaseLabel::I, -0.00032942, -0.00032898, 0.00065928, 50.98, 0.092),
        (CaseLabel::II, -0.00033029, -0.00164491, -0.00065404, 1274.4, 0.206),
        (CaseLabel::III, -0.00032992, -0.00108977, -0.00010000, 559.4, 0.168),
    ];

    #[test]
    fn derived_parameters_match_printed_digits() {
        for (label, eps_bar, alpha, beta, _, _) in CASE_TABLE {
            let strain = StrainCase::<f64>::preset(label);
            let c = beam().derive_constants(strain.epsilon).unwrap();
            // All printed to 8 decimal places; allow ±1 in the last digit.
            assert!((c.eps_bar - eps_bar).abs() <= 1.05e-8, "case {label} eps_bar {}", c.eps_bar);
            assert!((c.alpha - alpha).abs() <= 1.05e-8, "case {label} alpha {}", c.alpha);
            assert!((c.beta - beta).abs() <= 1.05e-8, "case {label} beta {}", c.beta);
        }
    }

    #[test]
    fn alpha_beta_identities_exact() {
        for case in StrainCase::<f64>::all() {
            let c = beam().derive_constants(case.epsilon).unwrap();
            assert_eq!(c.alpha, c.epsilon - c.eps_bar);
            assert_eq!(c.beta, c.epsilon - 4.0 * c.eps_bar);
            assert!(c.eps_bar < 0.0);
            assert!(c.alpha < 0.0);
            assert!(c.energy_unit > 0.0 && c.time_unit > 0.0);
        }
    }

    #[test]
    fn linear_modulus_value() {
        // Q·w·d for the silicon beam.
        assert!((beam().linear_modulus() - 2.6e-7).abs() < 1e-20);
    }

    #[test]
    fn critical_strain_fixed_point() {
        let b = beam();
        let ec: f64 = b.critical_strain().unwrap();
        // Residual of the defining implicit equation.
        let len = b.rest_length * (1.0 + ec);
        let residual = (ec + b.gyration_squared() * std::f64::consts::PI.powi(2) / (len * len))
            .abs()
            / ec.abs();
        assert!(residual < 1e-12, "residual {residual}");
        assert!((ec - (-0.000329)).abs() / 0.000329 < 3e-3, "eps_c {ec}");
        // The zeroth iterate is already within 0.1% of the fixed point.
        let zeroth = -b.gyration_squared() * std::f64::consts::PI.powi(2)
            / (b.rest_length * b.rest_length);
        assert!((zeroth - (-3.28987e-4)).abs() < 1e-9);
        assert!((zeroth - ec).abs() / ec.abs() < 1e-3);
        // Case I compresses to about twice the critical strain.
        let case1 = StrainCase::<f64>::preset(CaseLabel::I);
        assert!((case1.epsilon / (2.0 * ec) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn mode_stability_per_case() {
        let b = beam();
        let e1 = StrainCase::<f64>::preset(CaseLabel::I).epsilon;
        assert!(!b.mode_frequency(e1, 1).unwrap().stable);
        assert!(b.mode_frequency(e1, 2).unwrap().stable);
        for case in StrainCase::<f64>::all() {
            assert!(!b.mode_frequency(case.epsilon, 1).unwrap().stable);
            assert!(b.mode_frequency(case.epsilon, 3).unwrap().stable);
            // Second-mode stability flag agrees with the sign of beta.
            let c = b.derive_constants(case.epsilon).unwrap();
            assert_eq!(
                b.mode_frequency(case.epsilon, 2).unwrap().stable,
                c.beta > 0.0
            );
        }
        assert!(b.mode_frequency(e1, 0).is_err());
    }

    #[test]
    fn stability_flag_matches_sign_test_over_strain_sweep() {
        let b = beam();
        for k in 1..40 {
            let eps = -1e-5 * k as f64 * 2.1;
            let c = b.derive_constants(eps).unwrap();
            for n in 1..=10u32 {
                let expect = (n * n) as f64 - eps / c.eps_bar > 0.0;
                assert_eq!(b.mode_frequency(eps, n).unwrap().stable, expect);
            }
        }
    }

    #[test]
    fn energy_scales_match_printed_table() {
        for (label, _, _, _, barrier, quantum) in CASE_TABLE {
            let strain = StrainCase::<f64>::preset(label);
            let s = beam().energy_scales(strain.epsilon).unwrap();
            assert!(
                (s.barrier_kelvin - barrier).abs() / barrier < 5e-3,
                "case {label} barrier {}",
                s.barrier_kelvin
            );
            assert!(
                (s.quantum_kelvin - quantum).abs() / quantum < 2e-2,
                "case {label} quantum {}",
                s.quantum_kelvin
            );
        }
    }

    #[test]
    fn time_unit_case_one() {
        let c = beam()
            .derive_constants(StrainCase::<f64>::preset(CaseLabel::I).epsilon)
            .unwrap();
        assert!((c.time_unit - 3.01e-12).abs() / 3.01e-12 < 2e-3, "{}", c.time_unit);
    }

    #[test]
    fn invalid_beams_rejected() {
        assert!(PhysicalBeam::new(1.3e11, 5e-8, 1e-9, 2e-9, 2330.0).is_err()); // w < d
        assert!(PhysicalBeam::new(-1.0, 5e-8, 2e-9, 1e-9, 2330.0).is_err());
        assert!(beam().derive_constants(-1.0).is_err()); // 1 + eps = 0
    }

    #[test]
    fn no_barrier_above_critical_strain() {
        // Tension (positive strain) keeps the first mode stable: alpha > 0.
        assert!(matches!(
            beam().energy_scales(1e-5),
            Err(Error::NoBarrier { .. })
        ));
    }
}
