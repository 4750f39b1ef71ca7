//! Subcommand implementations.
//!
//! Every command writes CSV and/or JSON into the output directory and prints a
//! short summary. Commands that loop over shell energies record per-energy
//! failures (an empty dividing surface, say) in the output and keep going;
//! they fail as a whole only if no energy succeeded.

use serde_json::{json, Value};

use nanobeam::beam::StrainCase;
use nanobeam::hamiltonian::EigenPairKind;
use nanobeam::integrator::{step, IntegratorConfig};
use nanobeam::invariant_plane::{
    dichotomy_margin, level_set_topology, max_turning_point, nhim_energy_bound, LevelSetTopology,
};
use nanobeam::rates::{
    ds_gap_map, flux_correlation, gap_ensemble, gap_statistics, pulse_count, resolve_and_fit_pulse,
    survival_and_histogram, GapOutcome, MapCell,
};
use nanobeam::sampling::{
    flux, lobe_counts, reactant_dos, sample_ds_plus, DosMethod, FluxMethod, RngSeed,
};
use nanobeam::{Error, State};

use crate::config::Resolved;
use crate::output::{file_stem, sci8, Writer};
use crate::CliError;

/// Everything a command needs.
pub struct Context {
    pub resolved: Resolved,
    pub writer: Writer,
    /// `--samples` override for the command's primary ensemble size.
    pub samples: Option<u64>,
}

impl Context {
    fn cfg(&self) -> IntegratorConfig<f64> {
        self.resolved.config.integrator.build()
    }

    /// Deterministic per-purpose, per-energy seed derivation from the master seed.
    fn seed(&self, purpose: u64, index: usize) -> RngSeed {
        RngSeed(
            self.resolved
                .config
                .seed
                .wrapping_add(purpose.wrapping_mul(1_000_003))
                .wrapping_add((index as u64).wrapping_mul(7919)),
        )
    }
}

const PURPOSE_GAPS: u64 = 1;
const PURPOSE_FLUX: u64 = 2;
const PURPOSE_DOS: u64 = 3;
const PURPOSE_FLUXCORR: u64 = 4;
const PURPOSE_TRAJ: u64 = 5;

fn status_of(err: &Error) -> String {
    match err {
        Error::EmptyRegion { .. } => "empty-ds".to_string(),
        other => format!("error: {other}").replace(',', ";"),
    }
}

/// Tracks per-energy outcomes for the whole-command exit policy.
#[derive(Default)]
struct RowLedger {
    ok: usize,
    failed: usize,
}

impl RowLedger {
    fn finish(self, what: &str) -> Result<(), CliError> {
        if self.ok == 0 && self.failed > 0 {
            Err(CliError::Numeric(format!(
                "{what}: all {} energies failed",
                self.failed
            )))
        } else {
            Ok(())
        }
    }
}

/// The three presets side by side, plus the critical strain.
pub fn cmd_cases(ctx: &Context) -> Result<(), CliError> {
    let beam = &ctx.resolved.beam;
    let columns = [
        "case",
        "epsilon",
        "eps_bar",
        "alpha",
        "beta",
        "barrier_kelvin",
        "quantum_kelvin",
    ];
    let mut rows = Vec::new();
    let mut data = Vec::new();
    for case in StrainCase::<f64>::all() {
        let c = beam
            .derive_constants(case.epsilon)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        let s = beam
            .energy_scales(case.epsilon)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        rows.push(vec![
            case.label.to_string(),
            sci8(case.epsilon),
            sci8(c.eps_bar),
            sci8(c.alpha),
            sci8(c.beta),
            sci8(s.barrier_kelvin),
            sci8(s.quantum_kelvin),
        ]);
        data.push(json!({
            "case": case.label.to_string(),
            "epsilon": case.epsilon,
            "eps_bar": c.eps_bar,
            "alpha": c.alpha,
            "beta": c.beta,
            "barrier_kelvin": s.barrier_kelvin,
            "quantum_kelvin": s.quantum_kelvin,
            "energy_unit_joule": c.energy_unit,
            "time_unit_second": c.time_unit,
        }));
        println!(
            "case {}: eps={} alpha={} beta={} barrier={:.2} K quantum={:.3} K",
            case.label,
            sci8(case.epsilon),
            sci8(c.alpha),
            sci8(c.beta),
            s.barrier_kelvin,
            s.quantum_kelvin
        );
    }
    let critical = beam
        .critical_strain()
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    println!("critical strain: {}", sci8(critical));
    rows.push(vec![
        "critical".into(),
        sci8(critical),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ]);
    ctx.writer.csv("cases", &columns, &rows)?;
    ctx.writer
        .json("cases", json!({"cases": data, "critical_strain": critical}))?;
    Ok(())
}

/// Full derived-constant dump for the resolved case.
pub fn cmd_derive(ctx: &Context) -> Result<(), CliError> {
    let r = &ctx.resolved;
    let c = &r.constants;
    let s = r
        .beam
        .energy_scales(r.epsilon)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let fields: Vec<(&str, f64)> = vec![
        ("epsilon", r.epsilon),
        ("linear_modulus_newton", c.linear_modulus),
        ("gyration_metre", c.gyration),
        ("mass_per_length_kg_per_m", c.mass_per_length),
        ("compressed_length_metre", c.compressed_length),
        ("eps_bar", c.eps_bar),
        ("alpha", c.alpha),
        ("beta", c.beta),
        ("energy_unit_joule", c.energy_unit),
        ("time_unit_second", c.time_unit),
        ("barrier_kelvin", s.barrier_kelvin),
        ("quantum_kelvin", s.quantum_kelvin),
    ];
    let rows: Vec<Vec<String>> = fields
        .iter()
        .map(|(k, v)| vec![k.to_string(), sci8(*v)])
        .collect();
    let stem = file_stem("derived", &r.case_name, None);
    ctx.writer.csv(&stem, &["field", "value"], &rows)?;
    let map: serde_json::Map<String, Value> = fields
        .iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    ctx.writer.json(&stem, Value::Object(map))?;
    println!(
        "case {}: alpha={} beta={} (energy unit {} J, time unit {} s)",
        r.case_name,
        sci8(c.alpha),
        sci8(c.beta),
        sci8(c.energy_unit),
        sci8(c.time_unit)
    );
    Ok(())
}

/// Equilibrium catalogue of the scaled Hamiltonian.
pub fn cmd_equilibria(ctx: &Context) -> Result<(), CliError> {
    let r = &ctx.resolved;
    let eqs = r
        .params
        .equilibria()
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let kind_tag = |k: EigenPairKind| match k {
        EigenPairKind::RealPair => "real",
        EigenPairKind::ImaginaryPair => "imaginary",
        EigenPairKind::ZeroPair => "zero",
    };
    let columns = [
        "a1", "p1", "a2", "p2", "kind", "eig1_magnitude", "eig1_type", "eig2_magnitude",
        "eig2_type", "energy",
    ];
    let mut rows = Vec::new();
    let mut data = Vec::new();
    for eq in &eqs {
        rows.push(vec![
            sci8(eq.location.a1),
            sci8(eq.location.p1),
            sci8(eq.location.a2),
            sci8(eq.location.p2),
            eq.kind.to_string(),
            sci8(eq.eigenvalues[0].magnitude),
            kind_tag(eq.eigenvalues[0].kind).into(),
            sci8(eq.eigenvalues[1].magnitude),
            kind_tag(eq.eigenvalues[1].kind).into(),
            sci8(eq.energy),
        ]);
        data.push(json!({
            "location": [eq.location.a1, eq.location.p1, eq.location.a2, eq.location.p2],
            "kind": eq.kind.to_string(),
            "eigenvalue_pairs": [
                {"magnitude": eq.eigenvalues[0].magnitude, "type": kind_tag(eq.eigenvalues[0].kind)},
                {"magnitude": eq.eigenvalues[1].magnitude, "type": kind_tag(eq.eigenvalues[1].kind)},
            ],
            "energy": eq.energy,
        }));
        println!(
            "({}, 0, {}, 0): {} at energy {}",
            sci8(eq.location.a1),
            sci8(eq.location.a2),
            eq.kind,
            sci8(eq.energy)
        );
    }
    let stem = file_stem("equilibria", &r.case_name, None);
    ctx.writer.csv(&stem, &columns, &rows)?;
    ctx.writer.json(&stem, json!({"equilibria": data}))?;
    Ok(())
}

/// Normal-hyperbolicity bound and per-energy margins.
pub fn cmd_nhim(ctx: &Context) -> Result<(), CliError> {
    let r = &ctx.resolved;
    let bound = nhim_energy_bound(&r.params).map_err(|e| CliError::Numeric(e.to_string()))?;
    let columns = ["energy", "turning_point_a2sq", "margin", "certified", "topology", "status"];
    let mut rows = Vec::new();
    let mut data = Vec::new();
    let mut ledger = RowLedger::default();
    for &e in &r.energies {
        match (
            max_turning_point(&r.params, e),
            dichotomy_margin(&r.params, e),
            level_set_topology(&r.params, e),
        ) {
            (Ok(tp), Ok(margin), Ok(topo)) => {
                ledger.ok += 1;
                let topo = match topo {
                    LevelSetTopology::SingleLoop => "single-loop",
                    LevelSetTopology::DoubleLobe => "double-lobe",
                    LevelSetTopology::Critical => "critical",
                };
                rows.push(vec![
                    sci8(e),
                    sci8(tp),
                    sci8(margin),
                    (margin < 1.0).to_string(),
                    topo.into(),
                    "ok".into(),
                ]);
                data.push(json!({
                    "energy": e, "turning_point_a2sq": tp, "margin": margin,
                    "certified": margin < 1.0, "topology": topo,
                }));
            }
            (tp, margin, topo) => {
                ledger.failed += 1;
                let err = [
                    tp.err().map(|e| status_of(&e)),
                    margin.err().map(|e| status_of(&e)),
                    topo.err().map(|e| status_of(&e)),
                ]
                .into_iter()
                .flatten()
                .next()
                .unwrap_or_else(|| "error".into());
                rows.push(vec![sci8(e), "nan".into(), "nan".into(), "false".into(), String::new(), err.clone()]);
                data.push(json!({"energy": e, "status": err}));
            }
        }
    }
    println!("E_max = {}", sci8(bound.e_max));
    let stem = file_stem("nhim", &r.case_name, None);
    ctx.writer.csv(&stem, &columns, &rows)?;
    ctx.writer
        .json(&stem, json!({"e_max": bound.e_max, "energies": data}))?;
    ledger.finish("nhim")
}

/// Directional flux by all three routes.
pub fn cmd_flux(ctx: &Context) -> Result<(), CliError> {
    let r = &ctx.resolved;
    let n_mc = ctx.samples.unwrap_or(r.config.samples.flux_mc);
    let columns = [
        "energy", "phi_quadrature", "phi_elliptic", "phi_mc", "phi_mc_std_err", "mc_samples",
        "status",
    ];
    let mut rows = Vec::new();
    let mut data = Vec::new();
    let mut ledger = RowLedger::default();
    for (i, &e) in r.energies.iter().enumerate() {
        let result = flux(&r.params, e, FluxMethod::Quadrature).and_then(|quad| {
            let ell = flux(&r.params, e, FluxMethod::Elliptic)?;
            let mc = flux(
                &r.params,
                e,
                FluxMethod::MonteCarlo {
                    samples: n_mc,
                    seed: ctx.seed(PURPOSE_FLUX, i),
                },
            )?;
            Ok((quad, ell, mc))
        });
        match result {
            Ok((quad, ell, mc)) => {
                ledger.ok += 1;
                println!(
                    "E={}: phi={} (elliptic {}, MC {} ± {})",
                    sci8(e),
                    sci8(quad.value),
                    sci8(ell.value),
                    sci8(mc.value),
                    sci8(mc.std_err)
                );
                rows.push(vec![
                    sci8(e),
                    sci8(quad.value),
                    sci8(ell.value),
                    sci8(mc.value),
                    sci8(mc.std_err),
                    mc.n_samples.to_string(),
                    "ok".into(),
                ]);
                data.push(json!({
                    "energy": e,
                    "phi_quadrature": quad.value,
                    "phi_elliptic": ell.value,
                    "phi_mc": mc.value,
                    "phi_mc_std_err": mc.std_err,
                    "mc_samples": mc.n_samples,
                }));
            }
            Err(err) => {
                ledger.failed += 1;
                let tag = status_of(&err);
                println!("E={}: {tag}", sci8(e));
                rows.push(vec![
                    sci8(e),
                    "nan".into(),
                    "nan".into(),
                    "nan".into(),
                    "nan".into(),
                    "0".into(),
                    tag.clone(),
                ]);
                data.push(json!({"energy": e, "status": tag}));
            }
        }
    }
    let stem = file_stem("flux", &r.case_name, None);
    ctx.writer.csv(&stem, &columns, &rows)?;
    ctx.writer.json(&stem, json!({"energies": data}))?;
    ledger.finish("flux")
}

/// Reactant density of states: quadrature plus the 4-D volume cross-check.
pub fn cmd_dos(ctx: &Context) -> Result<(), CliError> {
    let r = &ctx.resolved;
    let n_mc = ctx.samples.unwrap_or(r.config.samples.dos_mc);
    let columns = ["energy", "rho_quadrature", "rho_mc", "rho_mc_std_err", "mc_samples", "status"];
    let mut rows = Vec::new();
    let mut data = Vec::new();
    let mut ledger = RowLedger::default();
    for (i, &e) in r.energies.iter().enumerate() {
        let result = reactant_dos(&r.params, e, DosMethod::Quadrature).and_then(|quad| {
            let mc = reactant_dos(
                &r.params,
                e,
                DosMethod::MonteCarlo {
                    samples: n_mc,
                    seed: ctx.seed(PURPOSE_DOS, i),
                },
            )?;
            Ok((quad, mc))
        });
        match result {
            Ok((quad, mc)) => {
                ledger.ok += 1;
                println!(
                    "E={}: rho={} (MC {} ± {})",
                    sci8(e),
                    sci8(quad.value),
                    sci8(mc.value),
                    sci8(mc.std_err)
                );
                rows.push(vec![
                    sci8(e),
                    sci8(quad.value),
                    sci8(mc.value),
                    sci8(mc.std_err),
                    mc.n_samples.to_string(),
                    "ok".into(),
                ]);
                data.push(json!({
                    "energy": e,
                    "rho_quadrature": quad.value,
                    "rho_mc": mc.value,
                    "rho_mc_std_err": mc.std_err,
                    "mc_samples": mc.n_samples,
                }));
            }
            Err(err) => {
                ledger.failed += 1;
                let tag = status_of(&err);
                println!("E={}: {tag}", sci8(e));
                rows.push(vec![sci8(e), "nan".into(), "nan".into(), "nan".into(), "0".into(), tag.clone()]);
                data.push(json!({"energy": e, "status": tag}));
            }
        }
    }
    let stem = file_stem("dos", &r.case_name, None);
    ctx.writer.csv(&stem, &columns, &rows)?;
    ctx.writer.json(&stem, json!({"energies": data}))?;
    ledger.finish("dos")
}

/// Everything the per-energy rate table needs, kept for `report`.
pub struct RateRow {
    pub fields: Vec<String>,
    pub json: Value,
    pub ok: bool,
}

pub const RATE_COLUMNS: [&str; 17] = [
    "energy", "n_samples", "sbar", "sbar_std_err", "phi", "rho_c", "rho_c_std_err", "rho", "k",
    "k_std_err", "k_rrkm", "k_rrkm_std_err", "kappa", "kappa_r_squared", "censored_fraction",
    "pulses", "status",
];

/// Gap ensembles and the derived rate table.
pub fn cmd_gaps(ctx: &Context) -> Result<(), CliError> {
    let rows = run_gap_rows(ctx)?;
    write_rate_table(ctx, "gaps", &rows)?;
    let ledger = RowLedger {
        ok: rows.iter().filter(|r| r.ok).count(),
        failed: rows.iter().filter(|r| !r.ok).count(),
    };
    ledger.finish("gaps")
}

fn write_rate_table(ctx: &Context, prefix: &str, rows: &[RateRow]) -> Result<(), CliError> {
    let stem = file_stem(prefix, &ctx.resolved.case_name, None);
    let csv_rows: Vec<Vec<String>> = rows.iter().map(|r| r.fields.clone()).collect();
    ctx.writer.csv(&stem, &RATE_COLUMNS, &csv_rows)?;
    let data: Vec<Value> = rows.iter().map(|r| r.json.clone()).collect();
    ctx.writer.json(&stem, json!({"energies": data}))?;
    Ok(())
}

fn run_gap_rows(ctx: &Context) -> Result<Vec<RateRow>, CliError> {
    let r = &ctx.resolved;
    let n = ctx.samples.unwrap_or(r.config.samples.gap);
    let cfg = ctx.cfg();
    let mut out = Vec::new();
    for (i, &e) in r.energies.iter().enumerate() {
        match gap_row(ctx, e, n, ctx.seed(PURPOSE_GAPS, i), &cfg) {
            Ok(row) => {
                println!(
                    "E={}: sbar={} k_rrkm={} censored={}",
                    sci8(e),
                    row.fields[2].clone(),
                    row.fields[10].clone(),
                    row.fields[14].clone()
                );
                out.push(row);
            }
            Err(err) => {
                let tag = status_of(&err);
                println!("E={}: {tag}", sci8(e));
                let mut fields: Vec<String> = vec![sci8(e), "0".into()];
                fields.extend(std::iter::repeat_n("nan".to_string(), 14));
                fields.push(tag.clone());
                out.push(RateRow {
                    fields,
                    json: json!({"energy": e, "status": tag}),
                    ok: false,
                });
            }
        }
    }
    Ok(out)
}

fn gap_row(
    ctx: &Context,
    e: f64,
    n: u64,
    seed: RngSeed,
    cfg: &IntegratorConfig<f64>,
) -> Result<RateRow, Error> {
    let r = &ctx.resolved;
    let records = gap_ensemble(&r.params, e, n, seed, cfg)?;
    let phi = flux(&r.params, e, FluxMethod::Quadrature)?;
    let rho = reactant_dos(&r.params, e, DosMethod::Quadrature)?;
    let stats = gap_statistics(&records, &phi, &rho)?;

    // Histogram width from a pilot subset; the fit refines its own binning
    // when the leading pulse is sharper than the default resolution.
    let hist_cfg = &r.config.histogram;
    let pilot: Vec<f64> = records
        .iter()
        .filter_map(|rec| rec.gap_time())
        .take(hist_cfg.pilot as usize)
        .collect();
    let pilot_mean = pilot.iter().sum::<f64>() / pilot.len() as f64;
    let width = pilot_mean / hist_cfg.bins_per_mean;
    let pair = survival_and_histogram(&records, width)?;
    let fit = resolve_and_fit_pulse(&records, width).map(|(_, fit)| fit);
    let pulses = pulse_count(&pair, 0.02);
    let (plus, minus) = lobe_counts(&records.iter().map(|rec| rec.sample).collect::<Vec<_>>());

    // Per-record dump.
    let tag = file_stem("gaps", &r.case_name, Some(e));
    let rec_columns = [
        "index", "a2", "p2", "p1", "gap_time", "censored", "exit_a1", "exit_p1", "exit_a2",
        "exit_p2",
    ];
    let rec_rows: Vec<Vec<String>> = records
        .iter()
        .enumerate()
        .map(|(k, rec)| {
            let (gap, censored, exit) = match rec.outcome {
                GapOutcome::Crossed { gap_time, exit_state } => {
                    (sci8(gap_time), "false", Some(exit_state))
                }
                GapOutcome::Censored { .. } => ("nan".to_string(), "true", None),
            };
            let exit = exit.map_or_else(
                || vec!["nan".into(), "nan".into(), "nan".into(), "nan".into()],
                |s: State| vec![sci8(s.a1), sci8(s.p1), sci8(s.a2), sci8(s.p2)],
            );
            let mut row = vec![
                k.to_string(),
                sci8(rec.sample.a2),
                sci8(rec.sample.p2),
                sci8(rec.sample.p1),
                gap,
                censored.to_string(),
            ];
            row.extend(exit);
            row
        })
        .collect();
    ctx.writer.csv(&tag, &rec_columns, &rec_rows).map_err(io_to_core)?;

    // Histogram and survival tables.
    let hist_rows: Vec<Vec<String>> = (0..pair.density.len())
        .map(|b| {
            vec![
                sci8(pair.bin_edges[b]),
                sci8(pair.bin_edges[b + 1]),
                sci8(pair.density[b]),
            ]
        })
        .collect();
    ctx.writer
        .csv(
            &file_stem("gap_hist", &r.case_name, Some(e)),
            &["bin_lo", "bin_hi", "density"],
            &hist_rows,
        )
        .map_err(io_to_core)?;
    let surv_rows: Vec<Vec<String>> = pair
        .bin_edges
        .iter()
        .zip(&pair.survival)
        .map(|(t, f)| vec![sci8(*t), sci8(*f)])
        .collect();
    ctx.writer
        .csv(
            &file_stem("gap_survival", &r.case_name, Some(e)),
            &["t", "survival"],
            &surv_rows,
        )
        .map_err(io_to_core)?;

    let (kappa, r2, fit_window) = match &fit {
        Ok(f) => (f.kappa, f.r_squared, json!([f.t_lo, f.t_hi])),
        Err(_) => (f64::NAN, f64::NAN, Value::Null),
    };
    let fields = vec![
        sci8(e),
        records.len().to_string(),
        sci8(stats.mean_gap.value),
        sci8(stats.mean_gap.std_err),
        sci8(stats.flux.value),
        sci8(stats.crossing_dos.value),
        sci8(stats.crossing_dos.std_err),
        sci8(stats.reactant_dos.value),
        sci8(stats.inverse_gap_rate.value),
        sci8(stats.inverse_gap_rate.std_err),
        sci8(stats.rrkm_rate.value),
        sci8(stats.rrkm_rate.std_err),
        sci8(kappa),
        sci8(r2),
        sci8(stats.censored_fraction),
        pulses.to_string(),
        "ok".into(),
    ];
    let json = json!({
        "energy": e,
        "n_samples": records.len(),
        "sbar": stats.mean_gap.value,
        "sbar_std_err": stats.mean_gap.std_err,
        "phi": stats.flux.value,
        "rho_c": stats.crossing_dos.value,
        "rho_c_std_err": stats.crossing_dos.std_err,
        "rho": stats.reactant_dos.value,
        "k": stats.inverse_gap_rate.value,
        "k_std_err": stats.inverse_gap_rate.std_err,
        "k_rrkm": stats.rrkm_rate.value,
        "k_rrkm_std_err": stats.rrkm_rate.std_err,
        "kappa": if kappa.is_nan() { Value::Null } else { json!(kappa) },
        "kappa_r_squared": if r2.is_nan() { Value::Null } else { json!(r2) },
        "fit_window": fit_window,
        "pulses": pulses,
        "censored_fraction": stats.censored_fraction,
        "lobe_counts": [plus, minus],
        "histogram_bin_width": width,
    });
    Ok(RateRow { fields, json, ok: true })
}

fn io_to_core(err: CliError) -> Error {
    Error::InvalidParameter(format!("output failed: {err}"))
}

/// Reactive-flux correlation K(t) per energy.
pub fn cmd_fluxcorr(ctx: &Context) -> Result<(), CliError> {
    let r = &ctx.resolved;
    let n = ctx.samples.unwrap_or(r.config.samples.fluxcorr);
    let grid: Vec<f64> = (0..r.config.fluxcorr.points)
        .map(|i| r.config.fluxcorr.t_end * i as f64 / (r.config.fluxcorr.points - 1) as f64)
        .collect();
    let cfg = IntegratorConfig {
        t_max: r.config.fluxcorr.t_end.max(ctx.cfg().t_max.min(1e6)),
        ..ctx.cfg()
    };
    let mut ledger = RowLedger::default();
    let mut summary = Vec::new();
    for (i, &e) in r.energies.iter().enumerate() {
        match flux_correlation(&r.params, e, n, &grid, ctx.seed(PURPOSE_FLUXCORR, i), &cfg) {
            Ok(fc) => {
                ledger.ok += 1;
                let rows: Vec<Vec<String>> = fc
                    .t_grid
                    .iter()
                    .zip(fc.w.iter().zip(&fc.k))
                    .map(|(t, (w, k))| vec![sci8(*t), sci8(*w), sci8(*k)])
                    .collect();
                ctx.writer
                    .csv(&file_stem("fluxcorr", &r.case_name, Some(e)), &["t", "w", "k"], &rows)?;
                let sign_changes = fc
                    .k
                    .windows(2)
                    .filter(|w| w[0].signum() != w[1].signum() && w[1] != 0.0)
                    .count();
                println!(
                    "E={}: K(0)={} (2*k_rrkm), {} sign changes over [0, {}]",
                    sci8(e),
                    sci8(fc.k[0]),
                    sign_changes,
                    sci8(*fc.t_grid.last().unwrap())
                );
                summary.push(json!({
                    "energy": e,
                    "rrkm_rate": fc.rrkm_rate,
                    "sign_changes": sign_changes,
                    "samples": n,
                }));
            }
            Err(err) => {
                ledger.failed += 1;
                let tag = status_of(&err);
                println!("E={}: {tag}", sci8(e));
                summary.push(json!({"energy": e, "status": tag}));
            }
        }
    }
    ctx.writer.json(
        &file_stem("fluxcorr", &r.case_name, None),
        json!({"energies": summary}),
    )?;
    ledger.finish("fluxcorr")
}

/// Gap-time map over the dividing surface, with the p̄₂ = 0 slice.
pub fn cmd_dsmap(ctx: &Context) -> Result<(), CliError> {
    let r = &ctx.resolved;
    let cfg = IntegratorConfig {
        t_max: r.config.map.t_max,
        ..ctx.cfg()
    };
    let mut ledger = RowLedger::default();
    let mut summary = Vec::new();
    for &e in &r.energies {
        match ds_gap_map(&r.params, e, r.config.map.resolution, &cfg) {
            Ok(map) => {
                ledger.ok += 1;
                let mut rows = Vec::new();
                for (ip2, &p2) in map.p2_nodes.iter().enumerate() {
                    for (ia2, &a2) in map.a2_nodes.iter().enumerate() {
                        let (gap, status) = match map.cell(ia2, ip2) {
                            MapCell::Crossed(s) => (sci8(s), "crossed"),
                            MapCell::Censored => ("nan".into(), "censored"),
                            MapCell::Outside => ("nan".into(), "outside"),
                        };
                        rows.push(vec![sci8(a2), sci8(p2), gap, status.into()]);
                    }
                }
                ctx.writer.csv(
                    &file_stem("dsmap", &r.case_name, Some(e)),
                    &["a2", "p2", "gap_time", "status"],
                    &rows,
                )?;
                if let Some(slice) = map.p2_zero_slice() {
                    let slice_rows: Vec<Vec<String>> = slice
                        .iter()
                        .map(|(a2, cell)| {
                            let (gap, status) = match cell {
                                MapCell::Crossed(s) => (sci8(*s), "crossed"),
                                MapCell::Censored => ("nan".into(), "censored"),
                                MapCell::Outside => ("nan".into(), "outside"),
                            };
                            vec![sci8(*a2), gap, status.into()]
                        })
                        .collect();
                    ctx.writer.csv(
                        &file_stem("dsmap_slice", &r.case_name, Some(e)),
                        &["a2", "gap_time", "status"],
                        &slice_rows,
                    )?;
                }
                let censored = map
                    .cells
                    .iter()
                    .filter(|c| matches!(c, MapCell::Censored))
                    .count();
                let inside = map
                    .cells
                    .iter()
                    .filter(|c| !matches!(c, MapCell::Outside))
                    .count();
                println!(
                    "E={}: {} cells in the disk, {censored} censored at t_max={}",
                    sci8(e),
                    inside,
                    sci8(cfg.t_max)
                );
                summary.push(json!({
                    "energy": e, "resolution": r.config.map.resolution,
                    "cells_inside": inside, "cells_censored": censored,
                }));
            }
            Err(err) => {
                ledger.failed += 1;
                let tag = status_of(&err);
                println!("E={}: {tag}", sci8(e));
                summary.push(json!({"energy": e, "status": tag}));
            }
        }
    }
    ctx.writer.json(
        &file_stem("dsmap", &r.case_name, None),
        json!({"energies": summary}),
    )?;
    ledger.finish("dsmap")
}

/// Plot-ready trajectory dumps: a bundle of first-crossing trajectories and
/// one long trajectory followed through many surface crossings.
pub fn cmd_trajectories(ctx: &Context) -> Result<(), CliError> {
    let r = &ctx.resolved;
    let cfg = ctx.cfg();
    let t_cfg = &r.config.trajectories;
    let mut ledger = RowLedger::default();
    for (i, &e) in r.energies.iter().enumerate() {
        let samples = match sample_ds_plus(
            &r.params,
            e,
            t_cfg.first_crossing_count.max(1),
            ctx.seed(PURPOSE_TRAJ, i),
        ) {
            Ok(s) => s,
            Err(err) => {
                ledger.failed += 1;
                println!("E={}: {}", sci8(e), status_of(&err));
                continue;
            }
        };
        let stride_steps = (t_cfg.stride / cfg.dt).round().max(1.0) as u64;
        // Bundle of trajectories until their first recrossing.
        let mut rows = Vec::new();
        for (k, sample) in samples.iter().enumerate() {
            let mut s = sample.state();
            let mut t = 0.0;
            let mut step_count = 0u64;
            rows.push(traj_row(Some(k), t, &s, 0));
            loop {
                s = step(&r.params, &s, cfg.dt);
                t += cfg.dt;
                step_count += 1;
                if step_count % stride_steps == 0 {
                    rows.push(traj_row(Some(k), t, &s, 0));
                }
                if s.a1 < 0.0 || t >= cfg.t_max {
                    rows.push(traj_row(Some(k), t, &s, 0));
                    break;
                }
            }
        }
        ctx.writer.csv(
            &file_stem("traj_first", &r.case_name, Some(e)),
            &["trajectory", "t", "a1", "p1", "a2", "p2"],
            &rows,
        )?;

        // One trajectory through `crossings` surface crossings.
        let mut s = samples[0].state();
        let mut t = 0.0;
        let mut crossings = 0u64;
        let mut prev_sign = 1.0f64;
        let mut rows = vec![traj_long_row(t, &s, crossings)];
        let mut step_count = 0u64;
        while crossings < t_cfg.crossings {
            s = step(&r.params, &s, cfg.dt);
            t += cfg.dt;
            step_count += 1;
            if s.a1 != 0.0 && s.a1.signum() != prev_sign {
                crossings += 1;
                prev_sign = s.a1.signum();
            }
            if step_count % stride_steps == 0 {
                rows.push(traj_long_row(t, &s, crossings));
            }
            if t >= cfg.t_max {
                break;
            }
        }
        ctx.writer.csv(
            &file_stem("traj_long", &r.case_name, Some(e)),
            &["t", "a1", "p1", "a2", "p2", "crossings"],
            &rows,
        )?;
        println!(
            "E={}: dumped {} first-crossing trajectories and one {}-crossing trajectory",
            sci8(e),
            samples.len(),
            crossings
        );
        ledger.ok += 1;
    }
    ledger.finish("trajectories")
}

fn traj_row(traj: Option<usize>, t: f64, s: &State, _crossings: u64) -> Vec<String> {
    let mut row = Vec::with_capacity(6);
    if let Some(k) = traj {
        row.push(k.to_string());
    }
    row.extend([sci8(t), sci8(s.a1), sci8(s.p1), sci8(s.a2), sci8(s.p2)]);
    row
}

fn traj_long_row(t: f64, s: &State, crossings: u64) -> Vec<String> {
    vec![
        sci8(t),
        sci8(s.a1),
        sci8(s.p1),
        sci8(s.a2),
        sci8(s.p2),
        crossings.to_string(),
    ]
}

/// Full per-case analysis: constants, equilibria, bound, fluxes, densities,
/// gap ensembles, correlation functions, maps, and trajectory dumps.
pub fn cmd_report(ctx: &Context) -> Result<(), CliError> {
    cmd_derive(ctx)?;
    cmd_equilibria(ctx)?;
    cmd_nhim(ctx)?;
    cmd_flux(ctx)?;
    cmd_dos(ctx)?;
    let rate_rows = run_gap_rows(ctx)?;
    write_rate_table(ctx, "report", &rate_rows)?;
    cmd_fluxcorr(ctx)?;
    cmd_dsmap(ctx)?;
    cmd_trajectories(ctx)?;
    let ledger = RowLedger {
        ok: rate_rows.iter().filter(|r| r.ok).count(),
        failed: rate_rows.iter().filter(|r| !r.ok).count(),
    };
    println!(
        "report complete: {} energies ok, {} flagged",
        ledger.ok, ledger.failed
    );
    ledger.finish("report")
}
