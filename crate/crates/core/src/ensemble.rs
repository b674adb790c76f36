//! Quantum ensembles: the set of plane-wave members whose wavevectors are
//! allowed by the energy available at a point, integrated with a flat
//! amplitude `χ₀ = √m`.
//!
//! Covers free particles, particles in external potentials (oscillatory and
//! decaying regimes), the member normalization and its Parseval-type total
//! norm, and the k-space reduction performed by a retarding field analyzer.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::numerics::{
    integrate_samples, integrate_shell, quadrature_weights, superpose, ComplexField, Dimension, Grid1D,
    KBall, KInterval, ScalarField, Spectrum,
};
use crate::scalar::Real;

/// Radial k-nodes used when a caller does not choose a resolution.
pub const DEFAULT_K_NODES: usize = 401;

/// Unit system the model parameters are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitSystem {
    /// ħ = m = 1 (and c = 1 for optics).
    #[default]
    Natural,
    Si,
}

/// Physical quantity kinds that carry a unit tag in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Energy,
    Length,
    Wavenumber,
    Time,
    Mass,
    Action,
    Velocity,
    AngularFrequency,
    /// |ψ|² in three dimensions.
    Density3,
    /// |ψ|² in one dimension.
    Density1,
    Amplitude,
    Force,
    /// `½(|E|²/c² + |B|²)` of an optical field.
    FieldIntensity,
    Angle,
    Dimensionless,
    Count,
}

impl UnitSystem {
    pub fn tag(self, q: Quantity) -> &'static str {
        use Quantity::*;
        match self {
            UnitSystem::Natural => match q {
                Energy => "nat.energy",
                Length => "nat.length",
                Wavenumber => "nat.wavenumber",
                Time => "nat.time",
                Mass => "nat.mass",
                Action => "nat.action",
                Velocity => "nat.velocity",
                AngularFrequency => "nat.frequency",
                Density3 => "nat.length^-3",
                Density1 => "nat.length^-1",
                Amplitude => "nat.amplitude",
                Force => "nat.force",
                FieldIntensity => "nat.field^2",
                Angle => "rad",
                Dimensionless => "1",
                Count => "count",
            },
            UnitSystem::Si => match q {
                Energy => "J",
                Length => "m",
                Wavenumber => "m^-1",
                Time => "s",
                Mass => "kg",
                Action => "J s",
                Velocity => "m s^-1",
                AngularFrequency => "rad s^-1",
                Density3 => "m^-3",
                Density1 => "m^-1",
                Amplitude => "a.u.",
                Force => "N",
                FieldIntensity => "T^2",
                Angle => "rad",
                Dimensionless => "1",
                Count => "count",
            },
        }
    }
}

impl fmt::Display for UnitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnitSystem::Natural => "natural",
            UnitSystem::Si => "si",
        })
    }
}

/// Which mass coefficient relates `k²` to an energy.
///
/// The free/potential ensembles use `k² = (m/ħ²)E`, the retarding analyzer
/// `k² = (2m/ħ²)E`. `AsPrinted` keeps each relation's own coefficient; the
/// other two variants force one coefficient everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KineticConvention {
    #[default]
    AsPrinted,
    SingleMass,
    DoubleMass,
}

impl KineticConvention {
    fn coefficient<T: Real>(self, printed: T) -> T {
        match self {
            KineticConvention::AsPrinted => printed,
            KineticConvention::SingleMass => T::one(),
            KineticConvention::DoubleMass => T::lit(2.0),
        }
    }
}

/// A particle of mass `m` and total energy `E_T = ħω = m u²`, split equally
/// into kinetic (`E_K`) and intrinsic field (`E_F`) parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleModel<T> {
    mass: T,
    hbar: T,
    total_energy: T,
    units: UnitSystem,
    convention: KineticConvention,
}

impl<T: Real> ParticleModel<T> {
    pub fn new(mass: T, hbar: T, total_energy: T, units: UnitSystem) -> Result<Self> {
        if !(mass.is_finite() && mass > T::zero()) {
            return Err(invalid("mass", format!("must be positive, got {mass}")));
        }
        if !(hbar.is_finite() && hbar > T::zero()) {
            return Err(invalid("hbar", format!("must be positive, got {hbar}")));
        }
        if !(total_energy.is_finite() && total_energy >= T::zero()) {
            return Err(invalid("total_energy", format!("must be finite and non-negative, got {total_energy}")));
        }
        Ok(Self { mass, hbar, total_energy, units, convention: KineticConvention::AsPrinted })
    }

    /// ħ = m = 1.
    pub fn natural(total_energy: T) -> Result<Self> {
        Self::new(T::one(), T::one(), total_energy, UnitSystem::Natural)
    }

    pub fn with_convention(mut self, convention: KineticConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_energy(self, total_energy: T) -> Result<Self> {
        Ok(Self::new(self.mass, self.hbar, total_energy, self.units)?.with_convention(self.convention))
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn total_energy(&self) -> T {
        self.total_energy
    }

    pub fn units(&self) -> UnitSystem {
        self.units
    }

    pub fn convention(&self) -> KineticConvention {
        self.convention
    }

    /// `ω = E_T/ħ`.
    pub fn omega(&self) -> T {
        self.total_energy / self.hbar
    }

    /// `u = √(E_T/m)`.
    pub fn velocity(&self) -> T {
        (self.total_energy / self.mass).sqrt()
    }

    /// `E_K = m u²/2`, the part conventional quantum theory accounts for.
    pub fn kinetic_energy(&self) -> T {
        self.mass * self.velocity().powi(2) / T::lit(2.0)
    }

    /// `E_F = m u²/2`, the intrinsic field energy.
    pub fn field_energy(&self) -> T {
        self.total_energy - self.kinetic_energy()
    }

    /// `√(c·m·E)/ħ` with the convention-adjusted coefficient `c`.
    fn wavenumber_for(&self, printed_coefficient: T, energy: T) -> T {
        let c = self.convention.coefficient(printed_coefficient);
        (c * self.mass * energy).sqrt() / self.hbar
    }

    /// Ensemble limit `k₀ = √(m E_T)/ħ` of the free ensemble.
    pub fn free_k_max(&self) -> T {
        self.wavenumber_for(T::one(), self.total_energy)
    }
}

/// Oscillatory members are plane waves; decaying members are evanescent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Oscillatory,
    Decaying,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Oscillatory => "oscillatory",
            Regime::Decaying => "decaying",
        })
    }
}

/// Interval of allowed wavevector magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KRange<T> {
    pub k_lo: T,
    pub k_hi: T,
    pub regime: Regime,
}

impl<T: Real> KRange<T> {
    pub fn new(k_lo: T, k_hi: T, regime: Regime) -> Result<Self> {
        if !(k_lo.is_finite() && k_hi.is_finite()) || k_lo < T::zero() || k_lo > k_hi {
            return Err(invalid("k range", format!("need 0 <= k_lo <= k_hi, got [{k_lo}, {k_hi}]")));
        }
        Ok(Self { k_lo, k_hi, regime })
    }

    pub fn is_empty(&self) -> bool {
        self.k_hi <= self.k_lo
    }

    pub fn width(&self) -> T {
        self.k_hi - self.k_lo
    }

    pub fn contains(&self, k: T) -> bool {
        k >= self.k_lo && k <= self.k_hi
    }

    /// `other` lies within `self`.
    pub fn contains_range(&self, other: &KRange<T>) -> bool {
        other.k_lo >= self.k_lo && other.k_hi <= self.k_hi
    }

    pub fn interval(&self, n: usize) -> KInterval<T> {
        KInterval { k_lo: self.k_lo, k_hi: self.k_hi, n }
    }
}

/// External potential `V(r)`.
#[derive(Clone)]
pub struct PotentialSpec<T> {
    shape: PotentialShape<T>,
    description: String,
}

#[derive(Clone)]
enum PotentialShape<T> {
    Constant(T),
    /// `values[i]` applies below `edges[i]`; the last value above the last edge.
    Piecewise { edges: Vec<T>, values: Vec<T> },
    Function(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: Real> PotentialSpec<T> {
    pub fn constant(v: T) -> Result<Self> {
        if !v.is_finite() {
            return Err(invalid("V", "must be finite"));
        }
        Ok(Self { shape: PotentialShape::Constant(v), description: format!("constant V = {v}") })
    }

    pub fn zero() -> Self {
        Self { shape: PotentialShape::Constant(T::zero()), description: "V = 0".into() }
    }

    /// Piecewise-constant potential with ascending `edges` and
    /// `edges.len() + 1` values.
    pub fn piecewise(edges: Vec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != edges.len() + 1 {
            return Err(invalid("values", format!("need {} values for {} edges", edges.len() + 1, edges.len())));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("edges", "must be strictly ascending"));
        }
        if edges.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(invalid("V", "must be finite"));
        }
        let description = format!("piecewise V, {} segments", values.len());
        Ok(Self { shape: PotentialShape::Piecewise { edges, values }, description })
    }

    /// `V = 0` for `|x| ≤ x0`, `V0` outside.
    pub fn square_well(v0: T, x0: T) -> Result<Self> {
        let mut spec = Self::piecewise(vec![-x0, x0], vec![v0, T::zero(), v0])?;
        spec.description = format!("square well V0 = {v0}, x0 = {x0}");
        Ok(spec)
    }

    pub fn from_fn(description: impl Into<String>, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self { shape: PotentialShape::Function(Arc::new(f)), description: description.into() }
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn at(&self, r: T) -> T {
        match &self.shape {
            PotentialShape::Constant(v) => *v,
            PotentialShape::Piecewise { edges, values } => {
                let i = edges.iter().position(|&e| r < e).unwrap_or(edges.len());
                values[i]
            }
            PotentialShape::Function(f) => f(r),
        }
    }
}

impl<T: Real> fmt::Debug for PotentialSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec").field("description", &self.description).finish()
    }
}

/// Allowed k-range at a point where the external potential equals `v`.
///
/// `E_T > V`: oscillatory `[0, √(m(E_T − V))/ħ]` (a negative `V` widens the
/// range). `E_T < V`: decaying `[0, √(m(V − E_T))/ħ]`. `E_T = V`: the empty
/// oscillatory range.
pub fn allowed_k_range<T: Real>(p: &ParticleModel<T>, v: T) -> KRange<T> {
    let diff = p.total_energy - v;
    let (k, regime) = if diff > T::zero() {
        (p.wavenumber_for(T::one(), diff), Regime::Oscillatory)
    } else if diff < T::zero() {
        (p.wavenumber_for(T::one(), -diff), Regime::Decaying)
    } else {
        (T::zero(), Regime::Oscillatory)
    };
    KRange { k_lo: T::zero(), k_hi: k, regime }
}

/// Flat member amplitude of a quantum ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleAmplitude<T> {
    pub chi0: T,
    pub norm_mass: T,
    pub range: KRange<T>,
}

impl<T: Real> EnsembleAmplitude<T> {
    /// `√m` inside the range, zero outside.
    pub fn value(&self, k: T) -> T {
        if self.range.contains(k) {
            self.chi0
        } else {
            T::zero()
        }
    }

    pub fn spectrum(&self) -> Spectrum<T> {
        Spectrum::flat(self.chi0)
    }
}

/// Member amplitude `χ₀ = √m`, independent of k, on the free range.
pub fn member_amplitude<T: Real>(p: &ParticleModel<T>) -> EnsembleAmplitude<T> {
    EnsembleAmplitude { chi0: p.mass.sqrt(), norm_mass: p.mass, range: allowed_k_range(p, T::zero()) }
}

/// Free-particle ensemble wavefunction `ψ(r)` on a radial grid.
pub fn free_wavefunction<T: Real>(p: &ParticleModel<T>, grid: Grid1D<T>) -> Result<ComplexField<T>> {
    free_wavefunction_with(p, grid, DEFAULT_K_NODES)
}

pub fn free_wavefunction_with<T: Real>(
    p: &ParticleModel<T>,
    grid: Grid1D<T>,
    n_k: usize,
) -> Result<ComplexField<T>> {
    let amp = member_amplitude(p);
    let domain = KBall::new(p.free_k_max(), n_k)?.interval();
    let spectrum = amp.spectrum();
    ComplexField::try_from_fn(grid, |r| superpose(&spectrum, &domain, r, Dimension::Three))
}

/// Ensemble value at a single radius for a given k-range.
///
/// Oscillatory ranges use the isotropic plane-wave (sinc) kernel; decaying
/// ranges use the kernel `e^{-k|r|}` with magnitudes, which keeps the
/// evanescent members decaying in every direction.
pub fn ensemble_value<T: Real>(chi0: T, range: &KRange<T>, r: T, n_k: usize) -> Result<Complex<T>> {
    let domain = range.interval(n_k);
    match range.regime {
        Regime::Oscillatory => superpose(&Spectrum::flat(chi0), &domain, r, Dimension::Three),
        Regime::Decaying => {
            let rr = r.abs();
            let v = integrate_shell(|k: T| Complex::new(chi0 * (-k * rr).exp(), T::zero()), &domain)?;
            Ok(v * Dimension::Three.prefactor::<T>())
        }
    }
}

/// Ensemble wavefunction in an external potential; the k-range is chosen
/// node by node from the local value of `V`.
pub fn potential_wavefunction<T: Real>(
    p: &ParticleModel<T>,
    v: &PotentialSpec<T>,
    grid: Grid1D<T>,
) -> Result<ComplexField<T>> {
    potential_wavefunction_with(p, v, grid, DEFAULT_K_NODES)
}

pub fn potential_wavefunction_with<T: Real>(
    p: &ParticleModel<T>,
    v: &PotentialSpec<T>,
    grid: Grid1D<T>,
    n_k: usize,
) -> Result<ComplexField<T>> {
    let chi0 = p.mass.sqrt();
    ComplexField::try_from_fn(grid, |r| {
        let vr = v.at(r);
        if !vr.is_finite() {
            return Err(invalid("V", format!("non-finite at r = {r}")));
        }
        ensemble_value(chi0, &allowed_k_range(p, vr), r, n_k)
    })
}

/// Total norm `∫d³r |ψ|² = m ∫d³k` of a flat ensemble filling the ball of
/// radius `k`, evaluated by ball quadrature of `|χ₀|² = m`.
pub fn parseval_norm<T: Real>(p: &ParticleModel<T>, k: T) -> Result<T> {
    let chi0_sq = member_amplitude(p).chi0.powi(2);
    let v = crate::numerics::integrate_ball(|_| Complex::new(chi0_sq, T::zero()), &KBall::new(k, 5)?)?;
    Ok(v.re)
}

/// `ρ = |ψ|²` at every node.
pub fn ensemble_density<T: Real>(psi: &ComplexField<T>) -> ScalarField<T> {
    ScalarField::new(*psi.grid(), psi.values().iter().map(|v| v.norm_sqr()).collect())
        .expect("modulus of finite samples is finite")
}

/// How the analyzer threshold maps to the lower k cut-off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdForm {
    /// Members with kinetic energy above the threshold pass:
    /// `k₁² = (2m/ħ²) E_rfa`.
    #[default]
    EnergyAbove,
    /// `k₁² = (2m/ħ²)(E_k − E_rfa)`, the difference form.
    Difference,
}

/// Ranges before and after a retarding field analyzer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetardingOutcome<T> {
    pub before: KRange<T>,
    pub after: KRange<T>,
    /// The threshold exceeds the ensemble limit; nothing passes.
    pub fully_blocked: bool,
}

impl<T: Real> RetardingOutcome<T> {
    /// Fraction of a flat 3-D ensemble that survives: shell over ball.
    pub fn surviving_fraction(&self, n_k: usize) -> Result<T> {
        let unit = |_: T| Complex::new(T::one(), T::zero());
        let ball = integrate_shell(unit, &self.before.interval(n_k))?.re;
        if ball <= T::zero() {
            return Err(invalid("before", "empty ensemble has no surviving fraction"));
        }
        let shell = integrate_shell(unit, &self.after.interval(n_k))?.re;
        Ok(shell / ball)
    }
}

/// Retarding field analyzer with threshold energy `E_rfa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetardingAnalyzer<T> {
    threshold: T,
    form: ThresholdForm,
}

impl<T: Real> RetardingAnalyzer<T> {
    pub fn new(threshold: T) -> Result<Self> {
        if !(threshold.is_finite() && threshold >= T::zero()) {
            return Err(invalid("E_rfa", format!("must be finite and non-negative, got {threshold}")));
        }
        Ok(Self { threshold, form: ThresholdForm::default() })
    }

    pub fn with_form(mut self, form: ThresholdForm) -> Self {
        self.form = form;
        self
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    /// The ensemble limit `E_k` is the particle's total energy; the range
    /// before is `[0, k₀]` with `k₀² = (2m/ħ²)E_k`, after is `[k₁, k₀]`.
    pub fn apply(&self, p: &ParticleModel<T>) -> RetardingOutcome<T> {
        let two = T::lit(2.0);
        let e_k = p.total_energy;
        let k0 = p.wavenumber_for(two, e_k);
        let before = KRange { k_lo: T::zero(), k_hi: k0, regime: Regime::Oscillatory };
        if self.threshold > e_k {
            let after = KRange { k_lo: k0, k_hi: k0, regime: Regime::Oscillatory };
            return RetardingOutcome { before, after, fully_blocked: true };
        }
        let k1 = match self.form {
            ThresholdForm::EnergyAbove => p.wavenumber_for(two, self.threshold),
            ThresholdForm::Difference => p.wavenumber_for(two, e_k - self.threshold),
        }
        .min(k0);
        let after = KRange { k_lo: k1, k_hi: k0, regime: Regime::Oscillatory };
        RetardingOutcome { before, after, fully_blocked: after.is_empty() && k0 > T::zero() }
    }
}

pub fn apply_retarding_filter<T: Real>(p: &ParticleModel<T>, e_rfa: T) -> Result<RetardingOutcome<T>> {
    Ok(RetardingAnalyzer::new(e_rfa)?.apply(p))
}

/// Local ensemble density `(2π)^{-3} ∫ d³k |χ₀|²` over a range; constant in
/// space for a flat amplitude.
pub fn range_density<T: Real>(p: &ParticleModel<T>, range: &KRange<T>, n_k: usize) -> Result<T> {
    let m = p.mass;
    let v = integrate_shell(|_| Complex::new(m, T::zero()), &range.interval(n_k))?.re;
    let two_pi = T::lit(2.0) * T::PI();
    Ok(v / (two_pi * two_pi * two_pi))
}

/// Position-momentum uncertainty `ΔX·ΔP` in units of ħ for the 1-D state
/// synthesized from `spectrum` over `domain`.
///
/// `Δk` comes from the momentum density `|φ(k)|²`; `ΔX` from `|ψ(x)|²` of the
/// synthesized state sampled on a window of half-width `20/Δk` around its
/// centroid. A spectrum with hard edges has heavy position tails, so its
/// product is a window-limited (finite, large) value.
pub fn uncertainty_product<T: Real>(spectrum: &Spectrum<T>, domain: &KInterval<T>) -> Result<T> {
    let f = match spectrum {
        Spectrum::Continuous(f) => f.clone(),
        Spectrum::SingleMode { .. } => return Err(Error::NonNormalizable),
    };
    if domain.width() <= T::zero() {
        return Err(Error::NonNormalizable);
    }
    let kgrid = Grid1D::odd(domain.k_lo, domain.k_hi, domain.n.max(401))?;
    let hk = kgrid.spacing();
    let ks = kgrid.nodes();
    let phi: Vec<Complex<T>> = ks.iter().map(|&k| f(k)).collect();
    if phi.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonNormalizable);
    }
    let dens: Vec<T> = phi.iter().map(|v| v.norm_sqr()).collect();
    let norm = integrate_samples(&dens, hk);
    if !(norm.is_finite() && norm > T::zero()) {
        return Err(Error::NonNormalizable);
    }
    let mean_k = integrate_samples(&ks.iter().zip(&dens).map(|(&k, &d)| k * d).collect::<Vec<_>>(), hk) / norm;
    let var_k = integrate_samples(
        &ks.iter().zip(&dens).map(|(&k, &d)| (k - mean_k).powi(2) * d).collect::<Vec<_>>(),
        hk,
    ) / norm;
    if !(var_k > T::zero()) {
        return Err(Error::NonNormalizable);
    }
    let dk = var_k.sqrt();

    // centroid ⟨x⟩ = ∫ φ* i φ' dk / ∫|φ|², derivative by central differences
    let n = phi.len();
    let two = T::lit(2.0);
    let x_weight: Vec<T> = (0..n)
        .map(|j| {
            let d = if j == 0 {
                (phi[1] - phi[0]) / hk
            } else if j == n - 1 {
                (phi[n - 1] - phi[n - 2]) / hk
            } else {
                (phi[j + 1] - phi[j - 1]) / (two * hk)
            };
            (phi[j].conj() * Complex::i() * d).re
        })
        .collect();
    let center = integrate_samples(&x_weight, hk) / norm;

    let half = T::lit(20.0) / dk;
    // k-resolution: at most ~0.15 rad of phase per k-step across the window
    let span = center.abs() + half;
    let wanted = (domain.width() * span / T::lit(0.15)).ceil().to_usize().unwrap_or(usize::MAX);
    let nk = wanted.clamp(kgrid.len(), 20_001) | 1;
    let kgrid = Grid1D::odd(domain.k_lo, domain.k_hi, nk)?;
    let ks = kgrid.nodes();
    let weights = quadrature_weights(ks.len(), kgrid.spacing());
    let weighted: Vec<Complex<T>> = ks.iter().zip(&weights).map(|(&k, &w)| f(k) * w).collect();

    let xgrid = Grid1D::odd(center - half, center + half, 2001)?;
    let xs = xgrid.nodes();
    let rho: Vec<T> = xs
        .par_iter()
        .map(|&x| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (&k, &c) in ks.iter().zip(&weighted) {
                acc = acc + c * Complex::from_polar(T::one(), k * x);
            }
            acc.norm_sqr()
        })
        .collect();
    let hx = xgrid.spacing();
    let norm_x = integrate_samples(&rho, hx);
    if !(norm_x.is_finite() && norm_x > T::zero()) {
        return Err(Error::NonNormalizable);
    }
    let mean_x = integrate_samples(&xs.iter().zip(&rho).map(|(&x, &d)| x * d).collect::<Vec<_>>(), hx) / norm_x;
    let var_x = integrate_samples(
        &xs.iter().zip(&rho).map(|(&x, &d)| (x - mean_x).powi(2) * d).collect::<Vec<_>>(),
        hx,
    ) / norm_x;
    Ok(var_x.sqrt() * dk)
}
