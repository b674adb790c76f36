//! Scenario runners: each builds one output table and a report of oracle
//! comparisons.

use std::f64::consts::PI;

use qensemble::ensemble::{
    allowed_k_range, ensemble_value, KineticConvention, ParticleModel, Quantity as Q, Regime, RetardingAnalyzer,
    ThresholdForm,
};
use qensemble::numerics::Grid1D;
use qensemble::optics::{efficiency_account, formalism_agreement, mz_probabilities, EraserConfig, EraserStage, MzConfig};
use qensemble::squarewell::{bound_state_members, well_ensemble_density, WellConfig};
use qensemble::wavepacket::{closed_form_density, propagate, ClosedForm, DispersionLaw, InitialPacket};
use qensemble::Complex;

use crate::config::{Command, Params};
use crate::error::CliError;
use crate::output::{Cell, Check, RunReport, Table};

/// Deliberate corruption used to prove the oracles catch a broken model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Doubles the dispersion coefficient used for propagation.
    Dispersion,
}

pub fn run(cmd: Command, params: &Params, seed: u64, fault: Option<Fault>) -> Result<(Table, RunReport), CliError> {
    let mut report = RunReport {
        scenario: cmd.to_string(),
        seed,
        units: params.units().to_string(),
        inputs: params.echo().into_iter().map(|(k, v, u)| (k.to_string(), v, u.to_string())).collect(),
        ..Default::default()
    };
    let table = match cmd {
        Command::Ensemble => ensemble(params, &mut report)?,
        Command::Spread => spread(params, fault, &mut report)?,
        Command::Collapse => collapse(params, &mut report)?,
        Command::Well => well(params, &mut report)?,
        Command::Eraser => eraser(params, &mut report)?,
        Command::Bomb => bomb(params, seed, &mut report)?,
        Command::Selftest => unreachable!("selftest has its own runner"),
    };
    Ok((table, report))
}

fn particle(p: &Params, energy: f64) -> Result<ParticleModel<f64>, CliError> {
    let convention = match if p.has("convention") { p.choice("convention") } else { "as_printed" } {
        "single_mass" => KineticConvention::SingleMass,
        "double_mass" => KineticConvention::DoubleMass,
        _ => KineticConvention::AsPrinted,
    };
    Ok(ParticleModel::new(p.float("mass"), p.float("hbar"), energy, p.units())?.with_convention(convention))
}

fn radial_grid(p: &Params) -> Result<Grid1D<f64>, CliError> {
    Ok(Grid1D::new(0.0, p.float("r_max"), p.count("n_r"))?)
}

/// Coefficient `c` in `k² = c·m·E/ħ²` for the ensemble ranges.
fn range_coefficient(p: &Params) -> f64 {
    if p.choice("convention") == "double_mass" {
        2.0
    } else {
        1.0
    }
}

/// `|ψ(0)|²` of a flat 3-D ensemble on `[k_lo, k_hi]`:
/// `((2π)^{-3/2} √m · 4π(k_hi³ − k_lo³)/3)²`.
fn center_density(mass: f64, k_lo: f64, k_hi: f64) -> f64 {
    let v = (2.0 * PI).powf(-1.5) * mass.sqrt() * 4.0 * PI * (k_hi.powi(3) - k_lo.powi(3)) / 3.0;
    v * v
}

fn ensemble(p: &Params, report: &mut RunReport) -> Result<Table, CliError> {
    let u = p.units();
    let energy = p.float("energy");
    let model = particle(p, energy)?;
    let grid = radial_grid(p)?;
    let n_k = p.count("n_k");
    let chi0 = model.mass().sqrt();
    let mut table = Table::new(&[
        ("V", u.tag(Q::Energy)),
        ("k_lo", u.tag(Q::Wavenumber)),
        ("k_hi", u.tag(Q::Wavenumber)),
        ("regime", "-"),
        ("r", u.tag(Q::Length)),
        ("rho", u.tag(Q::Density3)),
    ]);
    for &v in p.list("potentials") {
        let range = allowed_k_range(&model, v);
        let regime = match range.regime {
            Regime::Oscillatory => "oscillatory",
            Regime::Decaying => "decaying",
        };
        let mut rho0 = f64::NAN;
        for r in grid.nodes() {
            let rho = ensemble_value(chi0, &range, r, n_k)?.norm_sqr();
            if r == 0.0 {
                rho0 = rho;
            }
            table.push(vec![v.into(), range.k_lo.into(), range.k_hi.into(), regime.into(), r.into(), rho.into()]);
        }
        report.summarize(format!("k_hi(V={v})"), range.k_hi, u.tag(Q::Wavenumber));
        let expected = (range_coefficient(p) * model.mass() * (energy - v).abs()).sqrt() / model.hbar();
        report.checks.push(Check::rel(format!("k_hi(V={v})"), range.k_hi, expected, 1e-12, u.tag(Q::Wavenumber)));
        report.checks.push(Check::rel(
            format!("rho(r=0, V={v})"),
            rho0,
            center_density(model.mass(), range.k_lo, range.k_hi),
            1e-8,
            u.tag(Q::Density3),
        ));
    }
    Ok(table)
}

fn spread(p: &Params, fault: Option<Fault>, report: &mut RunReport) -> Result<Table, CliError> {
    let u = p.units();
    let (b, k0) = (p.float("b"), p.float("k0"));
    let law = DispersionLaw::from_constants(p.float("hbar"), p.float("mass"));
    let used = match fault {
        Some(Fault::Dispersion) => DispersionLaw::with_coefficient(2.0 * law.coefficient()),
        None => law,
    };
    let grid = Grid1D::new(p.float("x_min"), p.float("x_max"), p.count("n_x"))?;
    let form = if p.choice("closed_form") == "as_printed" { ClosedForm::AsPrinted } else { ClosedForm::Textbook };
    let mut packets = Vec::new();
    if p.choice("packet") != "single_mode" {
        packets.push(("gaussian", InitialPacket::gaussian(b, k0)?));
    }
    if p.choice("packet") != "gaussian" {
        packets.push(("single_mode", InitialPacket::single_mode(k0)?));
    }
    let d1 = u.tag(Q::Density1);
    let mut table = Table::new(&[
        ("packet", "-"),
        ("t", u.tag(Q::Time)),
        ("x", u.tag(Q::Length)),
        ("rho", d1),
        ("rho_closed", d1),
    ]);
    for (name, packet) in &packets {
        let mut worst = 0.0f64;
        let mut worst_printed = 0.0f64;
        let mut bound = 0.0f64;
        for &t in p.list("times") {
            let out = propagate(packet, &used, t, grid)?;
            bound = bound.max(out.truncation_bound);
            let single = matches!(packet, InitialPacket::SingleMode { .. });
            for (x, v) in grid.nodes().into_iter().zip(out.field.values()) {
                let rho = v.norm_sqr();
                let (closed, textbook) = if single {
                    (1.0, 1.0)
                } else {
                    (
                        closed_form_density(b, k0, &law, x, t, form),
                        closed_form_density(b, k0, &law, x, t, ClosedForm::Textbook),
                    )
                };
                if single {
                    worst = worst.max((rho - 1.0).abs());
                } else {
                    // relative error where the density is resolvable at all
                    if textbook >= 1e-10 {
                        worst = worst.max((rho - textbook).abs() / textbook);
                    }
                    worst_printed =
                        worst_printed.max((closed_form_density(b, k0, &law, x, t, ClosedForm::AsPrinted) - rho).abs());
                }
                table.push(vec![(*name).into(), t.into(), x.into(), rho.into(), closed.into()]);
            }
        }
        if *name == "gaussian" {
            report.checks.push(Check::max_dev("gaussian density vs textbook", worst, 1e-4, "rel", d1));
            report.summarize("as-printed closed form max |deviation|", worst_printed, d1);
            report.notes.push(format!("gaussian spectrum truncated at k0 ± 8/b; amplitude error bound {bound:.3e}"));
        } else {
            report.checks.push(Check::max_dev("single-mode density vs 1", worst, 4.0 * f64::EPSILON, "abs", d1));
        }
    }
    if fault.is_some() {
        report.notes.push("fault injected: dispersion coefficient doubled".into());
    }
    Ok(table)
}

fn collapse(p: &Params, report: &mut RunReport) -> Result<Table, CliError> {
    let u = p.units();
    let model = particle(p, p.float("energy"))?;
    let form = if p.choice("threshold_form") == "difference" { ThresholdForm::Difference } else { ThresholdForm::EnergyAbove };
    let out = RetardingAnalyzer::new(p.float("e_rfa"))?.with_form(form).apply(&model);
    let n_k = p.count("n_k");
    let grid = radial_grid(p)?;
    let chi0 = model.mass().sqrt();
    let wn = u.tag(Q::Wavenumber);
    let d3 = u.tag(Q::Density3);
    let mut table = Table::new(&[
        ("stage", "-"),
        ("k_lo", wn),
        ("k_hi", wn),
        ("range_density", d3),
        ("r", u.tag(Q::Length)),
        ("rho", d3),
    ]);
    for (stage, range) in [("before", out.before), ("after", out.after)] {
        let density = qensemble::ensemble::range_density(&model, &range, n_k)?;
        for r in grid.nodes() {
            let rho = ensemble_value(chi0, &range, r, n_k)?.norm_sqr();
            table.push(vec![stage.into(), range.k_lo.into(), range.k_hi.into(), density.into(), r.into(), rho.into()]);
        }
        // (2π)^{-3} m · 4π(k_hi³ − k_lo³)/3
        let expected = model.mass() * (range.k_hi.powi(3) - range.k_lo.powi(3)) / (6.0 * PI * PI);
        report.checks.push(Check::rel(format!("{stage} range density"), density, expected, 1e-10, d3));
        report.summarize(format!("{stage} k_lo"), range.k_lo, wn);
        report.summarize(format!("{stage} k_hi"), range.k_hi, wn);
    }
    let frac = out.surviving_fraction(n_k)?;
    let k0 = out.before.k_hi;
    let expected = if k0 > 0.0 { (k0.powi(3) - out.after.k_lo.powi(3)) / k0.powi(3) } else { 0.0 };
    report.summarize("surviving fraction", frac, u.tag(Q::Dimensionless));
    report.checks.push(Check::abs("surviving fraction", frac, expected, 1e-10, u.tag(Q::Dimensionless)));
    let nested = out.before.contains_range(&out.after);
    report.checks.push(Check::abs("after range inside before", f64::from(u8::from(nested)), 1.0, 0.0, "1"));
    if out.fully_blocked {
        report.notes.push("threshold exceeds the ensemble limit; nothing passes".into());
    }
    Ok(table)
}

/// Composite Simpson on an odd number of samples.
fn simpson(v: &[f64], h: f64) -> f64 {
    let n = v.len() - 1;
    let inner: f64 = v[1..n].iter().enumerate().map(|(i, x)| if i % 2 == 0 { 4.0 * x } else { 2.0 * x }).sum();
    (v[0] + v[n] + inner) * h / 3.0
}

fn well(p: &Params, report: &mut RunReport) -> Result<Table, CliError> {
    let u = p.units();
    if p.count("n_x").is_multiple_of(2) {
        return Err(CliError::Invalid("`n_x`: must be odd for the symmetric grid".into()));
    }
    let model = particle(p, p.float("energy"))?;
    let cfg = WellConfig::new(p.float("v0"), p.float("x0"), model)?;
    let grid = Grid1D::symmetric(p.float("x_max"), p.count("n_x"))?;
    let d = well_ensemble_density(&cfg, grid, p.count("n_k"))?;
    let d1 = u.tag(Q::Density1);
    let mut table = Table::new(&[("x", u.tag(Q::Length)), ("rho", d1)]);
    for (x, &rho) in grid.nodes().into_iter().zip(d.density.values()) {
        table.push(vec![x.into(), rho.into()]);
    }
    let rho = d.density.values();
    let n = rho.len();
    let asym = (0..n).map(|i| (rho[i] - rho[n - 1 - i]).abs()).fold(0.0, f64::max);
    report.checks.push(Check::max_dev("density parity", asym, 1e-10, "abs", d1));
    report.checks.push(Check::abs("density normalization", simpson(rho, grid.spacing()), 1.0, 1e-8, "1"));
    report.summarize("k_inner_max", cfg.k_inner_max(), u.tag(Q::Wavenumber));
    report.summarize("k_outer_max", cfg.k_outer_max(), u.tag(Q::Wavenumber));
    report.summarize("excluded resonant measure", d.excluded_measure, u.tag(Q::Wavenumber));
    report.summarize("excluded resonant nodes", d.excluded_nodes as f64, "count");
    for (i, k1) in bound_state_members(&cfg, 2000).into_iter().enumerate() {
        report.summarize(format!("bound member {i} k1"), k1, u.tag(Q::Wavenumber));
    }
    if d.excluded_nodes > 0 {
        report.notes.push(format!(
            "{} quadrature nodes within |cos(k1 x0)| < 1e-6 of a resonance were skipped",
            d.excluded_nodes
        ));
    }
    Ok(table)
}

fn eraser(p: &Params, report: &mut RunReport) -> Result<Table, CliError> {
    let u = p.units();
    let template = EraserConfig {
        stage: EraserStage::Baseline,
        phi: 0.0,
        e1: Complex::new(p.float("e1"), 0.0),
        b1: Complex::new(p.float("b1"), 0.0),
        c: p.float("c"),
    };
    let n_phi = p.count("n_phi");
    let rep = formalism_agreement(&template, n_phi, 1e-12)?;
    let mut table = Table::new(&[
        ("phi", u.tag(Q::Angle)),
        ("stage", "-"),
        ("intensity_fields", u.tag(Q::FieldIntensity)),
        ("intensity_statevector", u.tag(Q::Dimensionless)),
    ]);
    for sweep in &rep.sweeps {
        for ((&phi, &f), &s) in sweep.phis.iter().zip(&sweep.fields).zip(&sweep.statevector) {
            table.push(vec![phi.into(), sweep.stage.to_string().as_str().into(), f.into(), s.into()]);
        }
    }
    report.checks.push(Check::max_dev("formalism proportionality", rep.max_deviation, 1e-12, "rel", "1"));
    // fringe 1 + cos φ sampled on the same phases
    let fringe: Vec<f64> = rep.sweeps[0].phis.iter().map(|phi| 1.0 + phi.cos()).collect();
    let (hi, lo) = fringe.iter().fold((f64::MIN, f64::MAX), |(h, l), &v| (h.max(v), l.min(v)));
    let fringe_vis = (hi - lo) / (hi + lo);
    for (stage, expected) in
        [(EraserStage::Baseline, fringe_vis), (EraserStage::RotatorInPath1, 0.0), (EraserStage::RotatorPlusDiagonal, fringe_vis)]
    {
        let v = rep.sweep(stage).visibility_fields();
        report.checks.push(Check::abs(format!("visibility {stage}"), v, expected, 1e-12, "1"));
    }
    report.checks.push(Check::abs("diagonal/baseline peak", rep.diagonal_to_baseline_peak(), 0.5, 1e-12, "1"));
    report.summarize("fields/statevector constant", rep.constant, u.tag(Q::FieldIntensity));
    for m in rep.mismatches.iter().take(10) {
        report.notes.push(format!(
            "mismatch {} phi={:.6}: fields {:e} vs scaled statevector {:e}",
            m.stage, m.phi, m.fields, m.scaled_statevector
        ));
    }
    Ok(table)
}

/// `S·P·S·(1, 0)ᵀ` with `S = [[t, i√R], [i√R, t]]` and the absorber zeroing
/// the reflected arm: `[absorbed, port C, port D]`.
fn splitter_matrix_model(r: f64, bomb: bool) -> [f64; 3] {
    let t = Complex::new((1.0 - r).sqrt(), 0.0);
    let ir = Complex::new(0.0, r.sqrt());
    let lower = t;
    let mut upper = ir;
    let absorbed = if bomb { upper.norm_sqr() } else { 0.0 };
    if bomb {
        upper = Complex::new(0.0, 0.0);
    }
    [absorbed, (t * lower + ir * upper).norm_sqr(), (ir * lower + t * upper).norm_sqr()]
}

fn bomb(p: &Params, seed: u64, report: &mut RunReport) -> Result<Table, CliError> {
    let r = p.float("reflectivity");
    let eta = p.float("efficiency");
    let trials = p.count("trials") as u64;
    let mut configs = Vec::new();
    if p.choice("bomb") != "present" {
        configs.push(false);
    }
    if p.choice("bomb") != "absent" {
        configs.push(true);
    }
    let mut table = Table::new(&[
        ("configuration", "-"),
        ("outcome", "-"),
        ("probability", "1"),
        ("expected_fraction", "1"),
        ("count", "count"),
        ("empirical_fraction", "1"),
        ("z_score", "1"),
    ]);
    for present in configs {
        let label = if present { "bomb_present" } else { "bomb_absent" };
        let cfg = MzConfig::new(present, r, eta)?;
        let out = mz_probabilities(&cfg)?;
        let ledger = efficiency_account(&cfg, trials, seed)?;
        let [a, c, d] = splitter_matrix_model(r, present);
        report.checks.push(Check::abs(format!("{label} absorbed"), out.absorbed, a, 1e-15, "1"));
        report.checks.push(Check::abs(format!("{label} port C"), out.port_c, c, 1e-15, "1"));
        report.checks.push(Check::abs(format!("{label} port D"), out.port_d, d, 1e-15, "1"));
        report.checks.push(Check::abs(format!("{label} total"), out.total(), 1.0, 1e-15, "1"));
        if !present && r == 0.5 {
            report.checks.push(Check::abs("bomb_absent dark port", out.dark(), 0.0, 1e-12, "1"));
        }
        let n = trials as f64;
        let rows = [
            ("absorbed", out.absorbed, ledger.expected.absorbed, ledger.absorbed),
            ("detected_dark", out.dark(), out.dark() * eta, ledger.detected_dark),
            ("detected_bright", out.bright(), out.bright() * eta, ledger.detected_bright),
            ("missed", 1.0 - out.absorbed, ledger.expected.missed, ledger.missed),
        ];
        let mut worst_z = 0.0f64;
        for (outcome, prob, expected, count) in rows {
            let sd = (n * expected * (1.0 - expected)).sqrt();
            let z = if sd > 0.0 { (count as f64 - n * expected) / sd } else { (count as f64 - n * expected).abs() };
            worst_z = worst_z.max(z.abs());
            table.push(vec![
                label.into(),
                outcome.into(),
                prob.into(),
                expected.into(),
                Cell::Int(count),
                (count as f64 / n).into(),
                z.into(),
            ]);
        }
        report.checks.push(Check::max_dev(format!("{label} ledger |z|"), worst_z, 5.0, "sigma", "1"));
        if worst_z > 3.0 {
            report.notes.push(format!("{label}: largest ledger deviation {worst_z:.2} sigma exceeds 3 sigma"));
        }
        report.summarize(format!("{label} expected missed share"), ledger.expected_missed_share(), "1");
        report.summarize(format!("{label} empirical missed share"), ledger.missed_share(), "1");
    }
    Ok(table)
}
