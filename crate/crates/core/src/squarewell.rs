//! One-dimensional square-well ensemble.
//!
//! Each member pairs an inner wavenumber `k₁` with a decay constant `k₂`
//! through `k₁² + k₂² = (m/ħ²)V₀`. Members are matched in value (not in
//! slope) at `±x₀`; [`bound_state_members`] lists the ones that also satisfy
//! the even bound-state slope condition.

use rayon::prelude::*;

use crate::ensemble::ParticleModel;
use crate::error::{invalid, Error, Result};
use crate::numerics::{integrate_fn, integrate_real, Grid1D, ScalarField};
use crate::scalar::{Kahan, Real};

/// Members with `|cos(k₁x₀)|` below this are treated as resonant and excluded.
pub const RESONANCE_CUTOFF: f64 = 1e-6;

/// Square well `V = 0` for `|x| ≤ x₀`, `V₀` outside, holding a bound ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellConfig<T> {
    v0: T,
    x0: T,
    particle: ParticleModel<T>,
}

impl<T: Real> WellConfig<T> {
    pub fn new(v0: T, x0: T, particle: ParticleModel<T>) -> Result<Self> {
        if !(v0.is_finite() && v0 > T::zero()) {
            return Err(invalid("V0", format!("must be positive, got {v0}")));
        }
        if !(x0.is_finite() && x0 > T::zero()) {
            return Err(invalid("x0", format!("must be positive, got {x0}")));
        }
        if !(particle.total_energy() < v0) {
            return Err(invalid(
                "E_T",
                format!("bound ensemble needs E_T < V0, got E_T = {} and V0 = {v0}", particle.total_energy()),
            ));
        }
        Ok(Self { v0, x0, particle })
    }

    pub fn v0(&self) -> T {
        self.v0
    }

    pub fn x0(&self) -> T {
        self.x0
    }

    pub fn particle(&self) -> &ParticleModel<T> {
        &self.particle
    }

    fn coupling(&self) -> T {
        self.particle.mass() / self.particle.hbar().powi(2)
    }

    /// `k₀ = √(m E_T)/ħ`, the largest inner wavenumber.
    pub fn k_inner_max(&self) -> T {
        (self.coupling() * self.particle.total_energy()).sqrt()
    }

    /// `k₀' = √(m (V₀ − E_T))/ħ`, the largest outer decay constant.
    pub fn k_outer_max(&self) -> T {
        (self.coupling() * (self.v0 - self.particle.total_energy())).sqrt()
    }

    /// `(m/ħ²)V₀`, the conserved `k₁² + k₂²`.
    pub fn pair_sum(&self) -> T {
        self.coupling() * self.v0
    }

    fn is_resonant(&self, k1: T) -> bool {
        (k1 * self.x0).cos().abs() < T::lit(RESONANCE_CUTOFF)
    }
}

/// A single member of the well ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellMember<T> {
    pub k1: T,
    pub k2: T,
    pub chi0: T,
}

/// Builds the member with inner wavenumber `k1`.
pub fn pair_member<T: Real>(cfg: &WellConfig<T>, k1: T) -> Result<WellMember<T>> {
    let k_max = cfg.k_inner_max();
    let slack = T::lit(4.0) * T::epsilon() * k_max.max(T::one());
    if !(k1.is_finite() && k1 >= T::zero() && k1 <= k_max + slack) {
        return Err(invalid("k1", format!("must lie in [0, {k_max}], got {k1}")));
    }
    let k1 = k1.min(k_max);
    if cfg.is_resonant(k1) {
        return Err(Error::ResonantMember { k1: k1.to_f64().unwrap_or(f64::NAN) });
    }
    let k2 = (cfg.pair_sum() - k1 * k1).max(T::zero()).sqrt();
    let chi0 = member_amplitude_well(cfg, k1, k2);
    Ok(WellMember { k1, k2, chi0 })
}

/// `χ₀ = √(m k₂ / (1 + k₂x₀)) e^{k₂x₀} |cos k₁x₀|`.
///
/// The magnitude of the cosine is taken so that `χ₀ ≥ 0`; the member's sign
/// does not enter any density.
pub fn member_amplitude_well<T: Real>(cfg: &WellConfig<T>, k1: T, k2: T) -> T {
    let x0 = cfg.x0;
    let m = cfg.particle.mass();
    (m * k2 / (T::one() + k2 * x0)).sqrt() * (k2 * x0).exp() * (k1 * x0).cos().abs()
}

/// Member value: `χ₀e^{k₂x}` left of the well, `χ₀e^{-k₂x₀}cos(k₁x)/cos(k₁x₀)`
/// inside, `χ₀e^{-k₂x}` right of it.
pub fn member_wavefunction<T: Real>(member: &WellMember<T>, cfg: &WellConfig<T>, x: T) -> T {
    let x0 = cfg.x0;
    let WellMember { k1, k2, chi0 } = *member;
    if x.abs() <= x0 {
        chi0 * (-k2 * x0).exp() * ((k1 * x).cos() / (k1 * x0).cos())
    } else {
        chi0 * (-k2 * x.abs()).exp()
    }
}

/// Result of integrating `|χ(x)|²` over the line for one member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationAudit<T> {
    pub integral: T,
    pub target_mass: T,
    /// `integral − target_mass`.
    pub discrepancy: T,
}

/// Integrates `|χ|²` numerically and compares it with the particle mass.
pub fn normalization_audit<T: Real>(member: &WellMember<T>, cfg: &WellConfig<T>) -> Result<NormalizationAudit<T>> {
    let x0 = cfg.x0;
    let f = |x: T| member_wavefunction(member, cfg, x).powi(2);
    let inner: T = integrate_fn(f, -x0, x0, 4001)?;
    let outer: T = if member.k2 > T::zero() {
        // the tail beyond 40 decay lengths is below e^{-80}
        let end = x0 + T::lit(40.0) / member.k2;
        integrate_fn(f, x0, end, 20001)?
    } else if member.chi0 == T::zero() {
        T::zero()
    } else {
        T::infinity()
    };
    let integral = inner + T::lit(2.0) * outer;
    let target_mass = cfg.particle.mass();
    Ok(NormalizationAudit { integral, target_mass, discrepancy: integral - target_mass })
}

/// Renormalized well ensemble density together with quadrature diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct WellDensity<T> {
    pub density: ScalarField<T>,
    /// `∫ρ dx` over the grid before renormalization.
    pub raw_integral: T,
    /// Total k-measure left out around resonant members.
    pub excluded_measure: T,
    /// Quadrature nodes skipped as resonant.
    pub excluded_nodes: usize,
}

/// Ensemble density of the well on `grid`.
///
/// Inside the well the members `k₁ ∈ [0, k₀]` contribute
/// `χ₀²(k₁) e^{-2k₁x₀} cos²(k₁x)/cos²(k₁x₀)`; outside, the members
/// `k₂ ∈ [0, k₀']` contribute `χ₀²(k₂) e^{-2k₂|x|}`, with `χ₀` taken at the
/// paired `k₁ = √(mV₀/ħ² − k₂²)`. Resonant members are skipped and the result
/// is scaled to unit integral over the grid.
pub fn well_ensemble_density<T: Real>(cfg: &WellConfig<T>, grid: Grid1D<T>, n_k: usize) -> Result<WellDensity<T>> {
    let x0 = cfg.x0;
    let two = T::lit(2.0);
    let inner_nodes = member_nodes(T::zero(), cfg.k_inner_max(), n_k)?;
    let outer_nodes = member_nodes(T::zero(), cfg.k_outer_max(), n_k)?;

    let mut excluded_nodes = 0;
    let inner: Vec<(T, T)> = inner_nodes
        .iter()
        .filter_map(|&(k1, w)| {
            if cfg.is_resonant(k1) {
                excluded_nodes += 1;
                return None;
            }
            let k2 = (cfg.pair_sum() - k1 * k1).max(T::zero()).sqrt();
            let chi0 = member_amplitude_well(cfg, k1, k2);
            let c = (k1 * x0).cos();
            Some((k1, w * chi0 * chi0 * (-two * k1 * x0).exp() / (c * c)))
        })
        .collect();
    let outer: Vec<(T, T)> = outer_nodes
        .iter()
        .filter_map(|&(k2, w)| {
            let k1 = (cfg.pair_sum() - k2 * k2).max(T::zero()).sqrt();
            if cfg.is_resonant(k1) {
                excluded_nodes += 1;
                return None;
            }
            let chi0 = member_amplitude_well(cfg, k1, k2);
            Some((k2, w * chi0 * chi0))
        })
        .collect();

    let raw: Vec<T> = grid
        .nodes()
        .par_iter()
        .map(|&x| {
            let ax = x.abs();
            let mut acc = Kahan::new(T::zero());
            if ax <= x0 {
                for &(k1, weight) in &inner {
                    acc.add(weight * (k1 * ax).cos().powi(2));
                }
            } else {
                for &(k2, weight) in &outer {
                    acc.add(weight * (-two * k2 * ax).exp());
                }
            }
            acc.total()
        })
        .collect();
    let raw = ScalarField::new(grid, raw)?;
    let raw_integral = integrate_real(&raw)?;
    if !(raw_integral > T::zero()) {
        return Err(invalid("grid", "ensemble density integrates to zero on this grid"));
    }
    let density = raw.map(|v| v / raw_integral)?;
    Ok(WellDensity {
        density,
        raw_integral,
        excluded_measure: resonant_measure(cfg, T::zero(), cfg.k_inner_max())
            + resonant_measure_outer(cfg),
        excluded_nodes,
    })
}

/// Quadrature nodes and weights on `[lo, hi]`; empty for a zero-width range.
fn member_nodes<T: Real>(lo: T, hi: T, n: usize) -> Result<Vec<(T, T)>> {
    if hi <= lo {
        return Ok(Vec::new());
    }
    let g = Grid1D::odd(lo, hi, n)?;
    let w = crate::numerics::quadrature_weights(g.len(), g.spacing());
    Ok(g.nodes().into_iter().zip(w).collect())
}

/// k₁-measure of `{k₁ ∈ [lo, hi] : |cos(k₁x₀)| < cutoff}`.
fn resonant_measure<T: Real>(cfg: &WellConfig<T>, lo: T, hi: T) -> T {
    let x0 = cfg.x0;
    let half = T::lit(RESONANCE_CUTOFF).asin() / x0;
    let mut total = T::zero();
    let mut j = 0usize;
    loop {
        let pole = (T::FRAC_PI_2() + T::PI() * T::count(j)) / x0;
        if pole - half > hi {
            break;
        }
        let a = (pole - half).max(lo);
        let b = (pole + half).min(hi);
        if b > a {
            total = total + (b - a);
        }
        j += 1;
    }
    total
}

/// Outer members are resonant when their paired `k₁` is; measured in `k₂`.
fn resonant_measure_outer<T: Real>(cfg: &WellConfig<T>) -> T {
    // k₁ ranges over [k₀, √(pair_sum)] as k₂ runs over [0, k₀'];
    // dk₂ = (k₁/k₂) dk₁ on that branch
    let lo = cfg.k_inner_max();
    let hi = cfg.pair_sum().sqrt();
    let x0 = cfg.x0;
    let half = T::lit(RESONANCE_CUTOFF).asin() / x0;
    let mut total = T::zero();
    let mut j = 0usize;
    loop {
        let pole = (T::FRAC_PI_2() + T::PI() * T::count(j)) / x0;
        if pole - half > hi {
            break;
        }
        let a = (pole - half).max(lo);
        let b = (pole + half).min(hi);
        if b > a {
            let k2 = |k1: T| (cfg.pair_sum() - k1 * k1).max(T::zero()).sqrt();
            total = total + (k2(a) - k2(b)).abs();
        }
        j += 1;
    }
    total
}

/// Members whose slopes also match at `x₀`: `k₂ = k₁ tan(k₁x₀)` (even
/// bound states), found as sign changes of `k₁ sin(k₁x₀) − k₂ cos(k₁x₀)` on
/// `[0, k₀]` refined by bisection.
pub fn bound_state_members<T: Real>(cfg: &WellConfig<T>, samples: usize) -> Vec<T> {
    let x0 = cfg.x0;
    let g = |k1: T| {
        let k2 = (cfg.pair_sum() - k1 * k1).max(T::zero()).sqrt();
        k1 * (k1 * x0).sin() - k2 * (k1 * x0).cos()
    };
    let k_max = cfg.k_inner_max();
    if k_max <= T::zero() {
        return Vec::new();
    }
    let n = samples.max(2);
    let step = k_max / T::count(n);
    let mut roots = Vec::new();
    let mut a = T::zero();
    let mut ga = g(a);
    for i in 1..=n {
        let b = if i == n { k_max } else { step * T::count(i) };
        let gb = g(b);
        if ga == T::zero() {
            roots.push(a);
        } else if ga * gb < T::zero() {
            let (mut lo, mut hi, mut glo) = (a, b, ga);
            for _ in 0..200 {
                let mid = (lo + hi) / T::lit(2.0);
                let gm = g(mid);
                if glo * gm <= T::zero() {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
                if hi - lo <= T::epsilon() * hi.max(T::one()) {
                    break;
                }
            }
            roots.push((lo + hi) / T::lit(2.0));
        }
        a = b;
        ga = gb;
    }
    roots
}
