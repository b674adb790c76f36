//! Module invariants and acceptance criteria, one PASS/FAIL line each.
//!
//! Output never contains timings so repeated runs are byte-identical.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use qensemble::ensemble::{
    allowed_k_range, apply_retarding_filter, parseval_norm, uncertainty_product, ParticleModel, RetardingAnalyzer,
    ThresholdForm, UnitSystem,
};
use qensemble::numerics::{integrate_fn, integrate_real, ComplexField, Grid1D, KInterval, ScalarField, Spectrum};
use qensemble::optics::{
    efficiency_account, em_intensity, formalism_agreement, mirror, mz_probabilities, polarize, rotate_polarization,
    split, EraserConfig, EraserStage, MzConfig, PolarizedBeam,
};
use qensemble::squarewell::{member_wavefunction, pair_member, well_ensemble_density, WellConfig};
use qensemble::wavepacket::{
    closed_form_density, equilibrium_check, intrinsic_force, propagate, ClosedForm, DispersionLaw, InitialPacket,
};
use qensemble::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::scenarios::Fault;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: String,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub outcomes: Vec<Outcome>,
}

impl SelftestReport {
    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }

    pub fn render(&self, seed: u64) -> String {
        let mut s = format!("selftest (seed {seed})\n");
        for o in &self.outcomes {
            let _ = writeln!(s, "{} {:<14} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
        }
        let failed = self.outcomes.iter().filter(|o| !o.pass).count();
        let _ = writeln!(s, "{} checks, {} failed", self.outcomes.len(), failed);
        s
    }
}

type Check = fn(&Ctx) -> Result<(bool, String), CliError>;

struct Ctx {
    seed: u64,
    fault: Option<Fault>,
}

impl Ctx {
    fn law(&self) -> DispersionLaw<f64> {
        let law = DispersionLaw::from_constants(1.0, 1.0);
        match self.fault {
            Some(Fault::Dispersion) => DispersionLaw::with_coefficient(2.0 * law.coefficient()),
            None => law,
        }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

fn e(v: f64) -> String {
    format!("{v:.3e}")
}

fn within(elapsed: Duration, budget: Duration) -> (bool, &'static str) {
    if elapsed < budget {
        (true, "within budget")
    } else {
        (false, "over budget")
    }
}

const CHECKS: &[(&str, &str, Check)] = &[
    ("invariant", "simpson exact on cubics", inv_simpson),
    ("invariant", "gaussian line integral", inv_gaussian_integral),
    ("invariant", "f32 quadrature", inv_f32),
    ("invariant", "range shrinks with potential", inv_range_order),
    ("invariant", "single-mode phase evolution", inv_single_mode_phase),
    ("invariant", "beam orthogonality and energy", inv_beams),
    ("invariant", "mz probabilities sum to 1", inv_mz_sum),
    ("criterion 1", "parseval identity", c01),
    ("criterion 2", "range monotonicity", c02),
    ("criterion 3", "single mode does not spread", c03),
    ("criterion 4", "gaussian spreading", c04),
    ("criterion 5", "force consistency", c05),
    ("criterion 6", "equilibrium condition", c06),
    ("criterion 7", "collapse fraction", c07),
    ("criterion 8", "square-well structure", c08),
    ("criterion 9", "eraser visibilities", c09),
    ("criterion 10", "interaction-free statistics", c10),
    ("criterion 11", "uncertainty floor", c11),
];

pub fn run(seed: u64, fault: Option<Fault>) -> SelftestReport {
    let ctx = Ctx { seed, fault };
    let outcomes = CHECKS
        .iter()
        .map(|&(id, name, f)| {
            let (pass, detail) = f(&ctx).unwrap_or_else(|err| (false, format!("error: {err}")));
            Outcome { id: id.to_string(), name, pass, detail }
        })
        .collect();
    SelftestReport { outcomes }
}

fn inv_simpson(_: &Ctx) -> Result<(bool, String), CliError> {
    let mut worst = 0.0f64;
    for n in [3, 4, 5, 8, 11] {
        let v: f64 = integrate_fn(|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, n)?;
        worst = worst.max((v - 0.0).abs());
    }
    Ok((worst <= 1e-14, format!("max err {}", e(worst))))
}

fn inv_gaussian_integral(_: &Ctx) -> Result<(bool, String), CliError> {
    let g = Grid1D::new(-10.0, 10.0, 2001)?;
    let f = ScalarField::from_fn(g, |x: f64| (-x * x).exp())?;
    let err = (integrate_real(&f)? - PI.sqrt()).abs();
    Ok((err <= 1e-12, format!("err {}", e(err))))
}

fn inv_f32(_: &Ctx) -> Result<(bool, String), CliError> {
    let v: f32 = integrate_fn(|x: f32| x * x, 0.0f32, 1.0, 101)?;
    let err = (v - 1.0 / 3.0).abs();
    Ok((err <= 1e-6, format!("err {}", e(f64::from(err)))))
}

fn inv_range_order(ctx: &Ctx) -> Result<(bool, String), CliError> {
    let p = ParticleModel::<f64>::natural(1.0)?;
    let mut rng = ctx.rng(1);
    let mut vs: Vec<f64> = (0..50).map(|_| rng.gen_range(-5.0..0.99)).collect();
    vs.sort_by(f64::total_cmp);
    let ks: Vec<f64> = vs.iter().map(|&v| allowed_k_range(&p, v).k_hi).collect();
    let ok = ks.windows(2).all(|w| w[0] >= w[1]);
    Ok((ok, format!("{} potentials ordered", vs.len())))
}

fn inv_single_mode_phase(ctx: &Ctx) -> Result<(bool, String), CliError> {
    let k0 = 3.0;
    let g = Grid1D::new(-5.0, 5.0, 201)?;
    let mut worst = 0.0f64;
    for t in [0.5, 2.0] {
        let out = propagate(&InitialPacket::single_mode(k0)?, &ctx.law(), t, g)?;
        for (x, v) in g.nodes().into_iter().zip(out.field.values()) {
            // e^{i(k₀x − k₀²t/2)} with ħ = m = 1
            let want = Complex::from_polar(1.0, k0 * x - k0 * k0 * t / 2.0);
            worst = worst.max((v - want).norm());
        }
    }
    Ok((worst <= 1e-12, format!("max |ψ − plane wave| {}", e(worst))))
}

fn inv_beams(_: &Ctx) -> Result<(bool, String), CliError> {
    let one = Complex::new(1.0, 0.0);
    let b = PolarizedBeam::horizontal(one, Complex::new(0.5, 0.5), 1.0)?.with_phase(0.3);
    let e_in = em_intensity(&[b]);
    let (t, r) = split(&b, 0.3)?;
    let rot = rotate_polarization(&b);
    let mir = mirror(&b);
    let s = 0.5f64.sqrt();
    let pol = polarize(&b, [s, s, 0.0])?;
    let energy = (em_intensity(&[t]) + em_intensity(&[r]) - e_in)
        .abs()
        .max((em_intensity(&[rot]) - e_in).abs())
        .max((em_intensity(&[mir]) - e_in).abs());
    let ortho = [t, r, rot, mir, pol].iter().map(|x| x.orthogonality_defect()).fold(0.0, f64::max);
    let lossy = em_intensity(&[pol]) < e_in;
    Ok((
        energy <= 1e-12 && ortho <= 1e-12 && lossy,
        format!("energy err {}, orthogonality defect {}, polarizer lossy {lossy}", e(energy), e(ortho)),
    ))
}

fn inv_mz_sum(_: &Ctx) -> Result<(bool, String), CliError> {
    let mut worst = 0.0f64;
    for i in 0..=10 {
        for bomb in [false, true] {
            let o = mz_probabilities(&MzConfig::new(bomb, i as f64 / 10.0, 0.02)?)?;
            worst = worst.max((o.total() - 1.0).abs());
        }
    }
    Ok((worst <= 1e-15, format!("max |Σp − 1| {}", e(worst))))
}

fn c01(_: &Ctx) -> Result<(bool, String), CliError> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for m in [1.0, 2.0] {
        let p = ParticleModel::<f64>::new(m, 1.0, 1.0, UnitSystem::Natural)?;
        for k in [0.1f64, 1.0, 10.0] {
            let oracle = 4.0 * PI * m * k.powi(3) / 3.0;
            worst = worst.max((parseval_norm(&p, k)? - oracle).abs() / oracle);
        }
    }
    let (fast, budget) = within(start.elapsed(), Duration::from_secs(1));
    Ok((worst <= 1e-8 && fast, format!("max rel err {}, {budget}", e(worst))))
}

fn c02(_: &Ctx) -> Result<(bool, String), CliError> {
    let p = ParticleModel::<f64>::natural(1.0)?;
    let k: Vec<f64> = [-3.0, 0.0, 0.5].iter().map(|&v| allowed_k_range(&p, v).k_hi).collect();
    let err = (k[0] - 2.0).abs().max((k[1] - 1.0).abs()).max((k[2] - 0.5f64.sqrt()).abs());
    Ok((k[0] > k[1] && k[1] > k[2] && err <= 1e-12, format!("k_hi {:?}, max err {}", k, e(err))))
}

fn c03(ctx: &Ctx) -> Result<(bool, String), CliError> {
    let g = Grid1D::new(-20.0, 20.0, 4001)?;
    let mut worst = 0.0f64;
    for t in [0.0, 1.0, 5.0] {
        let out = propagate(&InitialPacket::single_mode(5.0)?, &ctx.law(), t, g)?;
        worst = out.field.values().iter().fold(worst, |w, v| w.max((v.norm_sqr() - 1.0).abs()));
    }
    Ok((worst <= 4.0 * f64::EPSILON, format!("max |ρ − 1| {}", e(worst))))
}

/// `|(1+iτ)^{-1/2} exp[−(x − k₀t)²/(2b²(1+iτ))]|²` with `ħ = m = 1`.
fn gaussian_truth(b: f64, k0: f64, x: f64, t: f64) -> f64 {
    let s = Complex::new(1.0, t / (b * b));
    let arg = -Complex::new((x - k0 * t).powi(2), 0.0) / (s * 2.0 * b * b);
    (arg.exp() / s.sqrt()).norm_sqr()
}

fn c04(ctx: &Ctx) -> Result<(bool, String), CliError> {
    let start = Instant::now();
    let (b, k0) = (1.0f64, 5.0f64);
    let packet = InitialPacket::gaussian(b, k0)?;
    let reference = DispersionLaw::from_constants(1.0, 1.0);
    let mut worst = 0.0f64;
    let mut printed = 0.0f64;
    for t in [0.5, 1.0, 2.0] {
        let width = b * (1.0 + (t / (b * b)).powi(2)).sqrt();
        let g = Grid1D::new(k0 * t - 4.0 * width, k0 * t + 4.0 * width, 801)?;
        let out = propagate(&packet, &ctx.law(), t, g)?;
        for (x, v) in g.nodes().into_iter().zip(out.field.values()) {
            let truth = gaussian_truth(b, k0, x, t);
            let textbook = closed_form_density(b, k0, &reference, x, t, ClosedForm::Textbook);
            worst = worst.max((v.norm_sqr() - truth).abs() / truth).max((textbook - truth).abs() / truth);
            printed =
                printed.max((closed_form_density(b, k0, &reference, x, t, ClosedForm::AsPrinted) - v.norm_sqr()).abs());
        }
    }
    let (fast, budget) = within(start.elapsed(), Duration::from_secs(10));
    Ok((
        worst <= 1e-4 && fast,
        format!("max rel err {}, as-printed form deviates by {} (reported), {budget}", e(worst), e(printed)),
    ))
}

fn c05(_: &Ctx) -> Result<(bool, String), CliError> {
    let g = Grid1D::new(-5.0, 5.0, 2001)?;
    let amp = ScalarField::from_fn(g, |x: f64| (-x * x / 2.0).exp())?;
    let f = intrinsic_force(&amp, &ParticleModel::<f64>::natural(1.0)?, 1.0)?;
    let worst = g
        .nodes()
        .into_iter()
        .enumerate()
        .filter(|(i, _)| !f.boundary_nodes.contains(i))
        .map(|(i, x)| (f.values.values()[i] - 2.0 * x * (-x * x).exp()).abs())
        .fold(0.0, f64::max);
    Ok((worst <= 1e-8, format!("interior max err {}", e(worst))))
}

fn c06(_: &Ctx) -> Result<(bool, String), CliError> {
    let g = Grid1D::new(-5.0, 5.0, 2001)?;
    let flat = equilibrium_check(&ComplexField::from_fn(g, |_| Complex::new(0.6, 0.8))?)?.residual;
    let gauss = ScalarField::from_fn(g, |x: f64| (-x * x / 2.0).exp())?.to_complex();
    let res = equilibrium_check(&gauss)?.residual;
    let analytic = SQRT_2 * (-0.5f64).exp();
    let pass = flat == 0.0 && res > 0.1 && (res - analytic).abs() <= 1e-5;
    Ok((pass, format!("flat residual {}, gaussian {res:.6} vs √2·e^(-1/2) = {analytic:.6}", e(flat))))
}

fn c07(ctx: &Ctx) -> Result<(bool, String), CliError> {
    let p = ParticleModel::<f64>::natural(1.0)?;
    let out = apply_retarding_filter(&p, 0.25)?;
    let halved = (out.after.k_lo - out.before.k_hi / 2.0).abs() <= 1e-15;
    let frac = out.surviving_fraction(401)?;
    let mut rng = ctx.rng(7);
    let mut nested = true;
    for _ in 0..100 {
        let e_rfa: f64 = rng.gen_range(0.0..1.5);
        for form in [ThresholdForm::EnergyAbove, ThresholdForm::Difference] {
            let o = RetardingAnalyzer::new(e_rfa)?.with_form(form).apply(&p);
            nested &= o.before.contains_range(&o.after);
        }
    }
    let pass = halved && (frac - 0.875).abs() <= 1e-10 && nested;
    Ok((pass, format!("fraction {frac:.12}, nesting over 100 thresholds {nested}")))
}

fn c08(ctx: &Ctx) -> Result<(bool, String), CliError> {
    let cfg = WellConfig::new(20.0, 1.0, ParticleModel::<f64>::natural(1.0)?)?;
    let mut rng = ctx.rng(8);
    let mut pair_err = 0.0f64;
    let mut continuous = true;
    for _ in 0..1000 {
        let m = pair_member(&cfg, rng.gen_range(0.0..=cfg.k_inner_max()))?;
        pair_err = pair_err.max((m.k1 * m.k1 + m.k2 * m.k2 - cfg.pair_sum()).abs());
        let edge = m.chi0 * (-m.k2 * cfg.x0()).exp();
        continuous &= member_wavefunction(&m, &cfg, cfg.x0()) == edge && member_wavefunction(&m, &cfg, -cfg.x0()) == edge;
    }
    let g = Grid1D::symmetric(6.0, 6001)?;
    let d = well_ensemble_density(&cfg, g, 2001)?;
    let rho = d.density.values();
    let n = rho.len();
    let asym = (0..n).map(|i| (rho[i] - rho[n - 1 - i]).abs()).fold(0.0, f64::max);
    let h = g.spacing();
    let norm = (rho[0] + rho[n - 1] + rho[1..n - 1].iter().enumerate().map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v }).sum::<f64>()) * h / 3.0;
    let pass = pair_err <= 1e-12 && continuous && asym <= 1e-10 && (norm - 1.0).abs() <= 1e-8;
    Ok((pass, format!("pair err {}, continuity {continuous}, parity {}, norm err {}", e(pair_err), e(asym), e((norm - 1.0).abs()))))
}

fn c09(_: &Ctx) -> Result<(bool, String), CliError> {
    let rep = formalism_agreement(&EraserConfig::unit(EraserStage::Baseline, 0.0), 64, 1e-12)?;
    let v: Vec<f64> = EraserStage::ALL.iter().map(|&s| rep.sweep(s).visibility_fields()).collect();
    let vis_err = (v[0] - 1.0).abs().max(v[1].abs()).max((v[2] - 1.0).abs());
    let ratio = rep.diagonal_to_baseline_peak();
    let pass = rep.agree() && vis_err <= 1e-12 && (ratio - 0.5).abs() <= 1e-12;
    Ok((
        pass,
        format!(
            "visibilities {:.12}/{:.12}/{:.12}, peak ratio {ratio:.12}, proportionality dev {}",
            v[0],
            v[1],
            v[2],
            e(rep.max_deviation)
        ),
    ))
}

fn c10(ctx: &Ctx) -> Result<(bool, String), CliError> {
    let start = Instant::now();
    let absent = mz_probabilities(&MzConfig::new(false, 0.5, 0.02)?)?;
    let present = mz_probabilities(&MzConfig::new(true, 0.5, 0.02)?)?;
    let exact = absent.dark() <= 1e-12 && present.absorbed == 0.5 && present.dark() == 0.25 && present.bright() == 0.25;
    let n = 100_000u64;
    let ledger = efficiency_account(&MzConfig::new(true, 0.5, 0.02)?, n, ctx.seed)?;
    let z = |count: u64, trials: u64, p: f64| {
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        (count as f64 - trials as f64 * p).abs() / sd
    };
    let x = ledger.expected;
    let worst = z(ledger.absorbed, n, x.absorbed)
        .max(z(ledger.detected(), n, x.detected))
        .max(z(ledger.missed, n, x.missed))
        .max(z(ledger.missed, ledger.detector_bound(), 0.98));
    let share = (ledger.expected_missed_share() - 0.98).abs() <= 1e-12;
    let (fast, budget) = within(start.elapsed(), Duration::from_secs(5));
    Ok((
        exact && share && worst <= 3.0 && fast,
        format!(
            "bomb present {{{}, {}, {}}}, missed share {:.5}, max |z| {worst:.3}, {budget}",
            present.absorbed,
            present.bright(),
            present.dark(),
            ledger.missed_share()
        ),
    ))
}

fn c11(ctx: &Ctx) -> Result<(bool, String), CliError> {
    let gauss = Spectrum::continuous(|k: f64| Complex::new((-(k - 2.0) * (k - 2.0) / 2.0).exp(), 0.0));
    let g = uncertainty_product(&gauss, &KInterval::new(-6.0, 10.0, 801)?)?;
    let mut rng = ctx.rng(11);
    let domain = KInterval::new(-10.0, 10.0, 1601)?;
    let mut lowest = f64::INFINITY;
    for _ in 0..20 {
        let lobes: Vec<[f64; 5]> = (0..rng.gen_range(1..=3))
            .map(|_| {
                [
                    rng.gen_range(0.2..1.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(0.5..1.5),
                    rng.gen_range(0.0..2.0 * PI),
                    rng.gen_range(-0.5..0.5),
                ]
            })
            .collect();
        let spec = Spectrum::continuous(move |k: f64| {
            lobes.iter().fold(Complex::new(0.0, 0.0), |acc, &[a, c, w, phase, chirp]| {
                let d = (k - c) / w;
                acc + Complex::from_polar(a * (-d * d / 2.0).exp(), phase + chirp * (k - c).powi(2))
            })
        });
        lowest = lowest.min(uncertainty_product(&spec, &domain)?);
    }
    Ok(((g - 0.5).abs() <= 1e-3 && lowest >= 0.5 - 1e-6, format!("gaussian {g:.6}, lowest random {lowest:.6}")))
}
