//! Polarization interference and interaction-free detection.
//!
//! The quantum eraser is computed twice: once from path/polarization state
//! vectors, once from the intrinsic electric and magnetic field vectors of the
//! beams with intensity `φ_em = ½(|E|²/c² + |B|²)`. The Mach–Zehnder model
//! propagates a single-photon amplitude through two beam splitters, with an
//! optional perfect absorber in the reflected arm.

use std::fmt;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Real 3-vector.
pub type Vec3<T> = [T; 3];
/// Complex 3-vector.
pub type CVec3<T> = [Complex<T>; 3];

fn dot<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm_sqr<T: Real>(v: &CVec3<T>) -> T {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// Orthogonality tolerance for beam direction vectors.
fn direction_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::lit(64.0) * T::epsilon())
}

/// A polarized beam: complex field amplitudes along unit directions with
/// `E ⟂ k`, `B ⟂ k`, `E ⟂ B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizedBeam<T> {
    pub e_amp: Complex<T>,
    pub b_amp: Complex<T>,
    e_dir: Vec3<T>,
    b_dir: Vec3<T>,
    k_dir: Vec3<T>,
    pub phase: T,
    c: T,
}

impl<T: Real> PolarizedBeam<T> {
    pub fn new(
        e_amp: Complex<T>,
        b_amp: Complex<T>,
        e_dir: Vec3<T>,
        b_dir: Vec3<T>,
        k_dir: Vec3<T>,
        phase: T,
        c: T,
    ) -> Result<Self> {
        if !(c.is_finite() && c > T::zero()) {
            return Err(invalid("c", format!("must be positive, got {c}")));
        }
        let beam = Self { e_amp, b_amp, e_dir, b_dir, k_dir, phase, c };
        let tol = direction_tolerance::<T>();
        for (name, v) in [("e_dir", &e_dir), ("b_dir", &b_dir), ("k_dir", &k_dir)] {
            if (dot(v, v) - T::one()).abs() > tol {
                return Err(invalid(name, "must be a unit vector"));
            }
        }
        if beam.orthogonality_defect() > tol {
            return Err(invalid("directions", "E, B and k must be mutually orthogonal"));
        }
        Ok(beam)
    }

    /// Beam along `z`, polarized along `x` (E) and `y` (B).
    pub fn horizontal(e_amp: Complex<T>, b_amp: Complex<T>, c: T) -> Result<Self> {
        let (o, l) = (T::zero(), T::one());
        Self::new(e_amp, b_amp, [l, o, o], [o, l, o], [o, o, l], T::zero(), c)
    }

    pub fn e_dir(&self) -> Vec3<T> {
        self.e_dir
    }

    pub fn b_dir(&self) -> Vec3<T> {
        self.b_dir
    }

    pub fn k_dir(&self) -> Vec3<T> {
        self.k_dir
    }

    pub fn c(&self) -> T {
        self.c
    }

    /// Largest of `|e·k|`, `|b·k|`, `|e·b|`.
    pub fn orthogonality_defect(&self) -> T {
        dot(&self.e_dir, &self.k_dir)
            .abs()
            .max(dot(&self.b_dir, &self.k_dir).abs())
            .max(dot(&self.e_dir, &self.b_dir).abs())
    }

    fn carrier(&self) -> Complex<T> {
        Complex::from_polar(T::one(), self.phase)
    }

    pub fn e_field(&self) -> CVec3<T> {
        let a = self.e_amp * self.carrier();
        self.e_dir.map(|d| a * d)
    }

    pub fn b_field(&self) -> CVec3<T> {
        let a = self.b_amp * self.carrier();
        self.b_dir.map(|d| a * d)
    }

    pub fn with_phase(mut self, delta: T) -> Self {
        self.phase = self.phase + delta;
        self
    }

    pub fn scaled(mut self, factor: Complex<T>) -> Self {
        self.e_amp = self.e_amp * factor;
        self.b_amp = self.b_amp * factor;
        self
    }
}

/// `φ_em = ½(|E|²/c² + |B|²)` of the coherent sum of `beams`.
///
/// All beams are taken to share the first beam's `c`. An empty set has zero
/// intensity.
pub fn em_intensity<T: Real>(beams: &[PolarizedBeam<T>]) -> T {
    let Some(first) = beams.first() else {
        return T::zero();
    };
    let zero = Complex::new(T::zero(), T::zero());
    let mut e = [zero; 3];
    let mut b = [zero; 3];
    for beam in beams {
        let (be, bb) = (beam.e_field(), beam.b_field());
        for i in 0..3 {
            e[i] = e[i] + be[i];
            b[i] = b[i] + bb[i];
        }
    }
    let c = first.c;
    (norm_sqr(&e) / (c * c) + norm_sqr(&b)) / T::lit(2.0)
}

/// Quarter-turn polarization rotator about the propagation axis:
/// `e_x → e_y`, `e_y → −e_x` for a beam along `z`.
pub fn rotate_polarization<T: Real>(beam: &PolarizedBeam<T>) -> PolarizedBeam<T> {
    let mut out = *beam;
    out.e_dir = cross(&beam.k_dir, &beam.e_dir);
    out.b_dir = cross(&beam.k_dir, &beam.b_dir);
    out
}

/// Linear polarizer transmitting E along `axis` (and B along `k × axis`).
pub fn polarize<T: Real>(beam: &PolarizedBeam<T>, axis: Vec3<T>) -> Result<PolarizedBeam<T>> {
    let tol = direction_tolerance::<T>();
    if (dot(&axis, &axis) - T::one()).abs() > tol || dot(&axis, &beam.k_dir).abs() > tol {
        return Err(invalid("axis", "must be a unit vector transverse to the beam"));
    }
    let b_axis = cross(&beam.k_dir, &axis);
    let mut out = *beam;
    out.e_amp = beam.e_amp * dot(&beam.e_dir, &axis);
    out.b_amp = beam.b_amp * dot(&beam.b_dir, &b_axis);
    out.e_dir = axis;
    out.b_dir = b_axis;
    Ok(out)
}

/// Lossless beam splitter: transmitted `√(1−R)`, reflected `i√R`.
pub fn split<T: Real>(beam: &PolarizedBeam<T>, reflectivity: T) -> Result<(PolarizedBeam<T>, PolarizedBeam<T>)> {
    check_probability("reflectivity", reflectivity)?;
    let t = (T::one() - reflectivity).sqrt();
    let r = reflectivity.sqrt();
    Ok((beam.scaled(Complex::new(t, T::zero())), beam.scaled(Complex::new(T::zero(), r))))
}

/// Ideal mirror: a phase of π, no loss.
pub fn mirror<T: Real>(beam: &PolarizedBeam<T>) -> PolarizedBeam<T> {
    beam.with_phase(T::PI())
}

fn check_probability<T: Real>(name: &'static str, p: T) -> Result<()> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(invalid(name, format!("must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// The three eraser configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EraserStage {
    Baseline,
    RotatorInPath1,
    RotatorPlusDiagonal,
}

impl EraserStage {
    pub const ALL: [EraserStage; 3] =
        [EraserStage::Baseline, EraserStage::RotatorInPath1, EraserStage::RotatorPlusDiagonal];
}

impl fmt::Display for EraserStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EraserStage::Baseline => "baseline",
            EraserStage::RotatorInPath1 => "rotator",
            EraserStage::RotatorPlusDiagonal => "rotator+diagonal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EraserConfig<T> {
    pub stage: EraserStage,
    /// Relative phase of path 2.
    pub phi: T,
    /// Field amplitudes of the incident beam.
    pub e1: Complex<T>,
    pub b1: Complex<T>,
    pub c: T,
}

impl<T: Real> EraserConfig<T> {
    /// Unit fields, `c = 1`.
    pub fn unit(stage: EraserStage, phi: T) -> Self {
        let one = Complex::new(T::one(), T::zero());
        Self { stage, phi, e1: one, b1: one, c: T::one() }
    }

    fn path_beams(&self) -> Result<[PolarizedBeam<T>; 2]> {
        let s = T::lit(0.5).sqrt();
        let half = Complex::new(s, T::zero());
        let incident = PolarizedBeam::horizontal(self.e1, self.b1, self.c)?;
        let mut p1 = incident.scaled(half);
        let mut p2 = incident.scaled(half).with_phase(self.phi);
        if self.stage != EraserStage::Baseline {
            p1 = rotate_polarization(&p1);
        }
        if self.stage == EraserStage::RotatorPlusDiagonal {
            let axis = [s, s, T::zero()];
            p1 = polarize(&p1, axis)?;
            p2 = polarize(&p2, axis)?;
        }
        Ok([p1, p2])
    }
}

/// Recombined intensity from the intrinsic field vectors.
pub fn eraser_intensity_fields<T: Real>(cfg: &EraserConfig<T>) -> Result<T> {
    Ok(em_intensity(&cfg.path_beams()?))
}

/// Recombined `|ψ₁₂|²` from path/polarization amplitudes `[H, V]` with
/// `ψ₁ = 1`, `ψ₂ = e^{iφ}`.
pub fn eraser_intensity_statevector<T: Real>(cfg: &EraserConfig<T>) -> T {
    let zero = Complex::new(T::zero(), T::zero());
    let s = T::lit(0.5).sqrt();
    let psi1 = Complex::new(s, T::zero());
    let psi2 = Complex::from_polar(s, cfg.phi);
    let path1 = match cfg.stage {
        EraserStage::Baseline => [psi1, zero],
        _ => [zero, psi1],
    };
    let path2 = [psi2, zero];
    let screen = [path1[0] + path2[0], path1[1] + path2[1]];
    match cfg.stage {
        EraserStage::RotatorPlusDiagonal => ((screen[0] + screen[1]) * s).norm_sqr(),
        _ => screen[0].norm_sqr() + screen[1].norm_sqr(),
    }
}

/// Intensity curves of one stage swept over phase.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSweep<T> {
    pub stage: EraserStage,
    pub phis: Vec<T>,
    pub fields: Vec<T>,
    pub statevector: Vec<T>,
}

impl<T: Real> StageSweep<T> {
    pub fn visibility_fields(&self) -> T {
        visibility(&self.fields)
    }

    pub fn visibility_statevector(&self) -> T {
        visibility(&self.statevector)
    }
}

/// `(max − min)/(max + min)`; zero for an all-zero curve.
pub fn visibility<T: Real>(curve: &[T]) -> T {
    let max = curve.iter().copied().fold(T::neg_infinity(), T::max);
    let min = curve.iter().copied().fold(T::infinity(), T::min);
    if max + min <= T::zero() {
        T::zero()
    } else {
        (max - min) / (max + min)
    }
}

/// A point where the two formalisms disagree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mismatch<T> {
    pub stage: EraserStage,
    pub phi: T,
    pub fields: T,
    pub scaled_statevector: T,
}

/// Comparison of the field and state-vector eraser computations.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport<T> {
    pub sweeps: Vec<StageSweep<T>>,
    /// Fitted `fields / statevector`, shared by all stages.
    pub constant: T,
    pub max_deviation: T,
    pub tolerance: T,
    pub mismatches: Vec<Mismatch<T>>,
}

impl<T: Real> AgreementReport<T> {
    pub fn agree(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn sweep(&self, stage: EraserStage) -> &StageSweep<T> {
        self.sweeps.iter().find(|s| s.stage == stage).expect("every stage is swept")
    }

    /// Peak of the diagonal stage over the peak of the baseline (fields).
    pub fn diagonal_to_baseline_peak(&self) -> T {
        let peak = |s: &StageSweep<T>| s.fields.iter().copied().fold(T::neg_infinity(), T::max);
        peak(self.sweep(EraserStage::RotatorPlusDiagonal)) / peak(self.sweep(EraserStage::Baseline))
    }
}

/// Sweeps `φ = 2πj/n` for every stage and checks that the field intensity is
/// a single constant times the state-vector intensity, pointwise to
/// `tolerance` relative to the curve scale.
pub fn formalism_agreement<T: Real>(
    template: &EraserConfig<T>,
    n_phi: usize,
    tolerance: T,
) -> Result<AgreementReport<T>> {
    if n_phi < 2 {
        return Err(invalid("n_phi", "need at least 2 phase steps"));
    }
    let two_pi = T::lit(2.0) * T::PI();
    let phis: Vec<T> = (0..n_phi).map(|j| two_pi * T::count(j) / T::count(n_phi)).collect();
    let mut sweeps = Vec::with_capacity(3);
    for stage in EraserStage::ALL {
        let mut fields = Vec::with_capacity(n_phi);
        let mut sv = Vec::with_capacity(n_phi);
        for &phi in &phis {
            let cfg = EraserConfig { stage, phi, ..*template };
            fields.push(eraser_intensity_fields(&cfg)?);
            sv.push(eraser_intensity_statevector(&cfg));
        }
        sweeps.push(StageSweep { stage, phis: phis.clone(), fields, statevector: sv });
    }
    // fit at the largest state-vector value
    let (mut best_f, mut best_s) = (T::zero(), T::zero());
    for s in &sweeps {
        for (&f, &v) in s.fields.iter().zip(&s.statevector) {
            if v > best_s {
                best_s = v;
                best_f = f;
            }
        }
    }
    let constant = if best_s > T::zero() { best_f / best_s } else { T::zero() };
    let scale = best_f.abs().max(T::min_positive_value());
    let mut max_deviation = T::zero();
    let mut mismatches = Vec::new();
    for s in &sweeps {
        for ((&phi, &f), &v) in s.phis.iter().zip(&s.fields).zip(&s.statevector) {
            let dev = (f - constant * v).abs() / scale;
            max_deviation = max_deviation.max(dev);
            if dev > tolerance {
                mismatches.push(Mismatch { stage: s.stage, phi, fields: f, scaled_statevector: constant * v });
            }
        }
    }
    Ok(AgreementReport { sweeps, constant, max_deviation, tolerance, mismatches })
}

/// Mach–Zehnder interferometer with an optional absorber ("bomb") in the
/// reflected arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MzConfig<T> {
    pub bomb_present: bool,
    pub splitter_reflectivity: T,
    pub detector_efficiency: T,
}

impl<T: Real> MzConfig<T> {
    pub fn new(bomb_present: bool, splitter_reflectivity: T, detector_efficiency: T) -> Result<Self> {
        check_probability("splitter_reflectivity", splitter_reflectivity)?;
        check_probability("detector_efficiency", detector_efficiency)?;
        Ok(Self { bomb_present, splitter_reflectivity, detector_efficiency })
    }

    /// Balanced splitters, 2 % detector efficiency.
    pub fn balanced(bomb_present: bool) -> Self {
        Self { bomb_present, splitter_reflectivity: T::lit(0.5), detector_efficiency: T::lit(0.02) }
    }
}

/// Output ports of the second splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    /// Fed by transmitted-transmitted and reflected-reflected amplitudes.
    C,
    /// Fed by the two mixed amplitudes.
    D,
}

/// Outcome distribution of one photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MzOutcome<T> {
    pub absorbed: T,
    pub port_c: T,
    pub port_d: T,
    /// Port that receives the least probability when no bomb is present.
    pub dark_port: Port,
}

impl<T: Real> MzOutcome<T> {
    pub fn dark(&self) -> T {
        match self.dark_port {
            Port::C => self.port_c,
            Port::D => self.port_d,
        }
    }

    pub fn bright(&self) -> T {
        match self.dark_port {
            Port::C => self.port_d,
            Port::D => self.port_c,
        }
    }

    pub fn total(&self) -> T {
        self.absorbed + self.port_c + self.port_d
    }
}

/// `iⁿ` without rounding.
fn i_pow<T: Real>(n: usize) -> Complex<T> {
    let (o, l) = (T::zero(), T::one());
    match n % 4 {
        0 => Complex::new(l, o),
        1 => Complex::new(o, l),
        2 => Complex::new(-l, o),
        _ => Complex::new(o, -l),
    }
}

/// Output amplitudes `(c, d)` and absorbed probability.
///
/// Each route through the two splitters carries `iⁿ√(∏ pⱼ)` for `n`
/// reflections with branch probabilities `pⱼ ∈ {R, 1−R}`; the mirrors add a
/// phase common to both arms and are left out. Routes that make the same
/// choice at both splitters exit through `C`.
fn mz_amplitudes<T: Real>(r: T, bomb: bool) -> (Complex<T>, Complex<T>, T) {
    let branch = |reflect: bool| if reflect { r } else { T::one() - r };
    let zero = Complex::new(T::zero(), T::zero());
    let (mut c, mut d, mut absorbed) = (zero, zero, T::zero());
    for first in [false, true] {
        if bomb && first {
            absorbed = absorbed + branch(first);
            continue;
        }
        for second in [false, true] {
            let n = usize::from(first) + usize::from(second);
            let amp = i_pow::<T>(n) * (branch(first) * branch(second)).sqrt();
            if first == second {
                c = c + amp;
            } else {
                d = d + amp;
            }
        }
    }
    (c, d, absorbed)
}

pub fn mz_probabilities<T: Real>(cfg: &MzConfig<T>) -> Result<MzOutcome<T>> {
    check_probability("splitter_reflectivity", cfg.splitter_reflectivity)?;
    let r = cfg.splitter_reflectivity;
    let (c0, d0, _) = mz_amplitudes(r, false);
    let dark_port = if d0.norm_sqr() < c0.norm_sqr() { Port::D } else { Port::C };
    let (c, d, absorbed) = mz_amplitudes(r, cfg.bomb_present);
    Ok(MzOutcome { absorbed, port_c: c.norm_sqr(), port_d: d.norm_sqr(), dark_port })
}

/// Expected fractions of all trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedFractions {
    pub absorbed: f64,
    pub detected: f64,
    /// Reached a detector but did not register.
    pub missed: f64,
}

/// Monte-Carlo photon ledger of an interaction-free run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyLedger {
    pub n_trials: u64,
    pub seed: u64,
    pub absorbed: u64,
    pub detected_dark: u64,
    pub detected_bright: u64,
    pub missed: u64,
    pub expected: ExpectedFractions,
}

impl EfficiencyLedger {
    pub fn detected(&self) -> u64 {
        self.detected_dark + self.detected_bright
    }

    /// Photons that reached a detector.
    pub fn detector_bound(&self) -> u64 {
        self.detected() + self.missed
    }

    /// Empirical share of detector-bound photons that went unrecorded.
    pub fn missed_share(&self) -> f64 {
        let bound = self.detector_bound();
        if bound == 0 {
            0.0
        } else {
            self.missed as f64 / bound as f64
        }
    }

    /// Expected share of detector-bound photons that go unrecorded: `1 − η`.
    pub fn expected_missed_share(&self) -> f64 {
        let bound = self.expected.detected + self.expected.missed;
        if bound == 0.0 {
            0.0
        } else {
            self.expected.missed / bound
        }
    }
}

/// Trials per independently seeded stream.
const BATCH: u64 = 8192;

/// Seeded Monte-Carlo ledger. Each batch of trials draws from its own ChaCha
/// stream, so the totals do not depend on how batches are scheduled.
pub fn efficiency_account<T: Real>(cfg: &MzConfig<T>, n_trials: u64, seed: u64) -> Result<EfficiencyLedger> {
    if n_trials == 0 {
        return Err(invalid("n_trials", "need at least one trial"));
    }
    check_probability("detector_efficiency", cfg.detector_efficiency)?;
    let out = mz_probabilities(cfg)?;
    let to = |v: T| v.to_f64().unwrap_or(f64::NAN);
    let p_abs = to(out.absorbed);
    let p_dark = to(out.dark());
    let eta = to(cfg.detector_efficiency);
    let n_batches = n_trials.div_ceil(BATCH);
    let counts = (0..n_batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch);
            let len = BATCH.min(n_trials - batch * BATCH);
            let mut c = [0u64; 4];
            for _ in 0..len {
                let u: f64 = rng.gen();
                if u < p_abs {
                    c[0] += 1;
                    continue;
                }
                let dark = u < p_abs + p_dark;
                let v: f64 = rng.gen();
                if v < eta {
                    c[if dark { 1 } else { 2 }] += 1;
                } else {
                    c[3] += 1;
                }
            }
            c
        })
        .reduce(|| [0u64; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
    Ok(EfficiencyLedger {
        n_trials,
        seed,
        absorbed: counts[0],
        detected_dark: counts[1],
        detected_bright: counts[2],
        missed: counts[3],
        expected: ExpectedFractions {
            absorbed: p_abs,
            detected: (1.0 - p_abs) * eta,
            missed: (1.0 - p_abs) * (1.0 - eta),
        },
    })
}
