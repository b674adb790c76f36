//! Wave-packet spreading and the intrinsic potentials of an inhomogeneous
//! amplitude.
//!
//! The canonical Gaussian initial state is `ψ₁(x,0) = e^{-x²/2b² + ik₀x}`, the
//! single-mode state `ψ₂(x,0) = e^{ik₀x}`. Both evolve under the free
//! dispersion `ω(k) = ħk²/2m`.

use num_complex::Complex;

use crate::ensemble::ParticleModel;
use crate::error::{invalid, Result};
use crate::numerics::{integrate_real, quadrature_weights, ComplexField, Dimension, Grid1D, ScalarField, Spectrum};
use crate::scalar::Real;

/// Half-width of the retained Gaussian spectrum, in units of `1/b`.
pub const SPECTRUM_HALF_WIDTH: f64 = 8.0;

/// Amplitudes below this are masked out of the quantum potential.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

/// Residual threshold for [`equilibrium_check`].
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialPacket<T> {
    Gaussian { b: T, k0: T },
    SingleMode { k0: T },
}

impl<T: Real> InitialPacket<T> {
    pub fn gaussian(b: T, k0: T) -> Result<Self> {
        if !(b.is_finite() && b > T::zero()) {
            return Err(invalid("b", format!("width must be positive, got {b}")));
        }
        if !k0.is_finite() {
            return Err(invalid("k0", "must be finite"));
        }
        Ok(InitialPacket::Gaussian { b, k0 })
    }

    pub fn single_mode(k0: T) -> Result<Self> {
        if !k0.is_finite() {
            return Err(invalid("k0", "must be finite"));
        }
        Ok(InitialPacket::SingleMode { k0 })
    }

    pub fn carrier(&self) -> T {
        match *self {
            InitialPacket::Gaussian { k0, .. } | InitialPacket::SingleMode { k0 } => k0,
        }
    }

    /// Initial state at `t = 0`.
    pub fn initial_value(&self, x: T) -> Complex<T> {
        match *self {
            InitialPacket::Gaussian { b, k0 } => Complex::from_polar((-(x * x) / (T::lit(2.0) * b * b)).exp(), k0 * x),
            InitialPacket::SingleMode { k0 } => Complex::from_polar(T::one(), k0 * x),
        }
    }
}

/// `ω(k) = c·k²`; the free-particle law has `c = ħ/2m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionLaw<T> {
    coefficient: T,
}

impl<T: Real> DispersionLaw<T> {
    pub fn free(p: &ParticleModel<T>) -> Self {
        Self::from_constants(p.hbar(), p.mass())
    }

    pub fn from_constants(hbar: T, mass: T) -> Self {
        Self { coefficient: hbar / (T::lit(2.0) * mass) }
    }

    /// Arbitrary quadratic coefficient.
    pub fn with_coefficient(coefficient: T) -> Self {
        Self { coefficient }
    }

    pub fn coefficient(&self) -> T {
        self.coefficient
    }

    pub fn omega(&self, k: T) -> T {
        self.coefficient * k * k
    }

    /// `dω/dk = ħk/m`.
    pub fn group_velocity(&self, k: T) -> T {
        T::lit(2.0) * self.coefficient * k
    }

    /// `ħ/m`.
    fn hbar_over_mass(&self) -> T {
        T::lit(2.0) * self.coefficient
    }
}

/// Unit-peak spectrum `e^{-(k−k₀)²b²/2}` for the Gaussian; a single-mode
/// marker at `k₀` otherwise.
pub fn packet_spectrum<T: Real>(packet: &InitialPacket<T>) -> Spectrum<T> {
    match *packet {
        InitialPacket::Gaussian { b, k0 } => Spectrum::continuous(move |k: T| {
            let d = (k - k0) * b;
            Complex::new((-(d * d) / T::lit(2.0)).exp(), T::zero())
        }),
        InitialPacket::SingleMode { k0 } => Spectrum::SingleMode { k0, weight: Complex::new(T::one(), T::zero()) },
    }
}

/// Propagated field with the truncation diagnostics of the k-quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagated<T> {
    pub field: ComplexField<T>,
    /// Upper bound on `|ψ|` error from discarding the spectrum tails.
    pub truncation_bound: T,
    /// Number of k-nodes used (zero for the analytic single mode).
    pub k_nodes: usize,
}

/// Evolves `packet` to time `t` on `grid`.
///
/// The Gaussian is integrated over `k₀ ± 8/b` with the symmetric transform
/// `b·e^{-(k−k₀)²b²/2}` of the canonical initial state; the k-step is chosen
/// so the phase `kx − ωt` stays resolved across the grid. The single mode is
/// returned in closed form.
pub fn propagate<T: Real>(
    packet: &InitialPacket<T>,
    law: &DispersionLaw<T>,
    t: T,
    grid: Grid1D<T>,
) -> Result<Propagated<T>> {
    if !(t.is_finite() && t >= T::zero()) {
        return Err(invalid("t", format!("must be finite and non-negative, got {t}")));
    }
    match *packet {
        InitialPacket::SingleMode { k0 } => {
            let w = law.omega(k0);
            let field = ComplexField::from_fn(grid, |x| Complex::from_polar(T::one(), k0 * x - w * t))?;
            Ok(Propagated { field, truncation_bound: T::zero(), k_nodes: 0 })
        }
        InitialPacket::Gaussian { b, k0 } => {
            let half = T::lit(SPECTRUM_HALF_WIDTH) / b;
            let (k_lo, k_hi) = (k0 - half, k0 + half);
            let v_max = law.group_velocity(k_lo).abs().max(law.group_velocity(k_hi).abs());
            let a_max = grid.x_min().abs().max(grid.x_max().abs()) + v_max * t;
            let tau = law.hbar_over_mass() * t / (b * b);
            let b_eff = b * (T::one() + tau * tau).sqrt();
            let h = T::PI() / (T::lit(2.0) * (a_max + T::lit(10.0) * b_eff));
            let n = ((k_hi - k_lo) / h).ceil().to_usize().unwrap_or(usize::MAX).max(801);
            let kgrid = Grid1D::odd(k_lo, k_hi, n)?;
            let ks = kgrid.nodes();
            let pre = Dimension::One.prefactor::<T>();
            let weights = quadrature_weights(ks.len(), kgrid.spacing());
            let terms: Vec<(T, T, T)> = ks
                .iter()
                .zip(&weights)
                .map(|(&k, &w)| {
                    let d = (k - k0) * b;
                    (k, law.omega(k) * t, pre * w * b * (-(d * d) / T::lit(2.0)).exp())
                })
                .collect();
            let field = ComplexField::from_fn(grid, |x| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for &(k, wt, amp) in &terms {
                    acc = acc + Complex::from_polar(amp, k * x - wt);
                }
                acc
            })?;
            // (2π)^{-1/2} · 2∫₈^∞ e^{-s²/2} ds ≤ (2π)^{-1/2} · e^{-32}/4
            let s = T::lit(SPECTRUM_HALF_WIDTH);
            let truncation_bound = pre * (-(s * s) / T::lit(2.0)).exp() * T::lit(2.0) / s;
            Ok(Propagated { field, truncation_bound, k_nodes: kgrid.len() })
        }
    }
}

/// Which closed-form Gaussian density to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// `(1+τ²)^{-1} exp[-b^{-2}(1+τ²)^{-2}(x − ħk₀t/m)²]`.
    AsPrinted,
    /// Standard dispersion: `(1+τ²)^{-1/2} exp[-(x − ħk₀t/m)²/(b²(1+τ²))]`.
    Textbook,
}

/// Closed-form `|ψ₁(x,t)|²` with `τ = ħt/(mb²)`; unit peak at `t = 0`.
pub fn closed_form_density<T: Real>(b: T, k0: T, law: &DispersionLaw<T>, x: T, t: T, form: ClosedForm) -> T {
    let ratio = law.hbar_over_mass();
    let tau2 = (ratio * t / (b * b)).powi(2);
    let s = T::one() + tau2;
    let dx = x - ratio * k0 * t;
    match form {
        ClosedForm::AsPrinted => s.recip() * (-(dx * dx) / (b * b * s * s)).exp(),
        ClosedForm::Textbook => s.sqrt().recip() * (-(dx * dx) / (b * b * s)).exp(),
    }
}

/// `(ħk/m)²`, the velocity-squared prefactor of the intrinsic potential.
fn intrinsic_prefactor<T: Real>(p: &ParticleModel<T>, k: T) -> T {
    (p.hbar() * k / p.mass()).powi(2)
}

/// `φ = (ħ²k²/m²)|ψ₀|²` pointwise.
pub fn intrinsic_potential<T: Real>(amplitude: &ScalarField<T>, p: &ParticleModel<T>, k: T) -> Result<ScalarField<T>> {
    let c = intrinsic_prefactor(p, k);
    amplitude.map(|a| c * a * a)
}

/// Derivative samples plus the nodes where a reduced stencil was needed.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative<T> {
    pub values: ScalarField<T>,
    /// Nodes evaluated with a lower-order or one-sided stencil.
    pub boundary_nodes: Vec<usize>,
}

/// First derivative: fourth-order central stencil on the interior, second-order
/// central one node in from each end, second-order one-sided at the ends.
pub fn gradient<T: Real>(f: &ScalarField<T>) -> Result<Derivative<T>> {
    let v = f.values();
    let n = v.len();
    let h = f.grid().spacing();
    let two = T::lit(2.0);
    let mut out = vec![T::zero(); n];
    let mut boundary = Vec::new();
    for i in 0..n {
        out[i] = if i >= 2 && i + 2 < n {
            (T::lit(8.0) * (v[i + 1] - v[i - 1]) - (v[i + 2] - v[i - 2])) / (T::lit(12.0) * h)
        } else {
            boundary.push(i);
            if i >= 1 && i + 1 < n {
                (v[i + 1] - v[i - 1]) / (two * h)
            } else if n >= 3 && i == 0 {
                (T::lit(3.0) * (v[1] - v[0]) - (v[2] - v[1])) / (two * h)
            } else if n >= 3 {
                (T::lit(3.0) * (v[n - 1] - v[n - 2]) - (v[n - 2] - v[n - 3])) / (two * h)
            } else {
                (v[1] - v[0]) / h
            }
        };
    }
    Ok(Derivative { values: ScalarField::new(*f.grid(), out)?, boundary_nodes: boundary })
}

/// Intrinsic force `F = −∇φ = −(ħ²k²/m²)(ψ₀*∇ψ₀ + ψ₀∇ψ₀*)` for a real amplitude.
pub fn intrinsic_force<T: Real>(amplitude: &ScalarField<T>, p: &ParticleModel<T>, k: T) -> Result<Derivative<T>> {
    let c = intrinsic_prefactor(p, k);
    let d = gradient(amplitude)?;
    let two = T::lit(2.0);
    let values = amplitude
        .values()
        .iter()
        .zip(d.values.values())
        .map(|(&a, &da)| -c * two * a * da)
        .collect();
    Ok(Derivative { values: ScalarField::new(*amplitude.grid(), values)?, boundary_nodes: d.boundary_nodes })
}

/// Outcome of the plane-wave equilibrium test `ψ₀*∇ψ₀ + ψ₀∇ψ₀* = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumReport<T> {
    /// Max-norm of `2 Re(ψ₀*∇ψ₀)` over the grid.
    pub residual: T,
    pub stable: bool,
}

pub fn equilibrium_check<T: Real>(amplitude: &ComplexField<T>) -> Result<EquilibriumReport<T>> {
    let re = ScalarField::new(*amplitude.grid(), amplitude.values().iter().map(|v| v.re).collect())?;
    let im = ScalarField::new(*amplitude.grid(), amplitude.values().iter().map(|v| v.im).collect())?;
    let dre = gradient(&re)?.values;
    let dim = gradient(&im)?.values;
    let two = T::lit(2.0);
    let residual = amplitude
        .values()
        .iter()
        .zip(dre.values().iter().zip(dim.values()))
        .map(|(a, (&dr, &di))| (two * (a.re * dr + a.im * di)).abs())
        .fold(T::zero(), T::max);
    Ok(EquilibriumReport { residual, stable: residual <= T::lit(EQUILIBRIUM_TOLERANCE) })
}

/// Quantum potential `Q = ∇²R/R` with masked and boundary nodes reported.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumPotential<T> {
    /// Zero at masked nodes.
    pub values: ScalarField<T>,
    /// Nodes with `R ≤ 1e-12`.
    pub masked: Vec<usize>,
    /// Nodes evaluated with a one-sided stencil.
    pub boundary_nodes: Vec<usize>,
}

pub fn quantum_potential<T: Real>(r: &ScalarField<T>) -> Result<QuantumPotential<T>> {
    let v = r.values();
    let n = v.len();
    if n < 4 {
        return Err(invalid("R", "need at least 4 nodes for a second derivative"));
    }
    let h2 = r.grid().spacing().powi(2);
    let two = T::lit(2.0);
    let mut out = vec![T::zero(); n];
    let mut masked = Vec::new();
    let mut boundary = Vec::new();
    for i in 0..n {
        if v[i] <= T::lit(AMPLITUDE_FLOOR) {
            masked.push(i);
            continue;
        }
        let lap = if i >= 1 && i + 1 < n {
            (v[i - 1] - two * v[i] + v[i + 1]) / h2
        } else if i == 0 {
            boundary.push(i);
            (two * v[0] - T::lit(5.0) * v[1] + T::lit(4.0) * v[2] - v[3]) / h2
        } else {
            boundary.push(i);
            (two * v[n - 1] - T::lit(5.0) * v[n - 2] + T::lit(4.0) * v[n - 3] - v[n - 4]) / h2
        };
        out[i] = lap / v[i];
    }
    Ok(QuantumPotential { values: ScalarField::new(*r.grid(), out)?, masked, boundary_nodes: boundary })
}

/// Norm, centroid and standard deviation of a sampled density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub norm: T,
    pub mean: T,
    pub std_dev: T,
}

pub fn moments<T: Real>(density: &ScalarField<T>) -> Result<Moments<T>> {
    let g = *density.grid();
    let xs = g.nodes();
    let norm = integrate_real(density)?;
    if !(norm > T::zero()) {
        return Err(invalid("density", "zero norm"));
    }
    let first = ScalarField::new(g, xs.iter().zip(density.values()).map(|(&x, &d)| x * d).collect())?;
    let mean = integrate_real(&first)? / norm;
    let second =
        ScalarField::new(g, xs.iter().zip(density.values()).map(|(&x, &d)| (x - mean).powi(2) * d).collect())?;
    let var = integrate_real(&second)? / norm;
    Ok(Moments { norm, mean, std_dev: var.max(T::zero()).sqrt() })
}

/// Location of the largest sample.
pub fn peak_position<T: Real>(f: &ScalarField<T>) -> T {
    let (i, _) = f
        .values()
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
    f.grid().node(i)
}
