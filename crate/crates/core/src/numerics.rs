//! Grids, quadrature and plane-wave superposition.
//!
//! Every integral in the library goes through the composite Simpson rule
//! implemented here. Fourier transforms use the symmetric convention
//! `(2π)^(-d/2)` in both directions, so a forward transform followed by
//! [`superpose`] is the identity.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::scalar::{Kahan, Real};

/// Uniform grid of `n` nodes spanning `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D<T> {
    x_min: T,
    x_max: T,
    n: usize,
}

impl<T: Real> Grid1D<T> {
    pub fn new(x_min: T, x_max: T, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if x_min >= x_max {
            return Err(Error::InvalidGrid(format!("x_min ({x_min}) must be below x_max ({x_max})")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes, got {n}")));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Like [`Grid1D::new`] but rounds `n` up to the next odd count so the
    /// plain Simpson rule applies without a closing panel.
    pub fn odd(x_min: T, x_max: T, n: usize) -> Result<Self> {
        Self::new(x_min, x_max, if n.is_multiple_of(2) { n + 1 } else { n })
    }

    /// Symmetric grid `[-half_width, half_width]`.
    pub fn symmetric(half_width: T, n: usize) -> Result<Self> {
        Self::odd(-half_width, half_width, n)
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> T {
        (self.x_max - self.x_min) / T::count(self.n - 1)
    }

    pub fn node(&self, i: usize) -> T {
        if i + 1 == self.n {
            self.x_max
        } else {
            self.x_min + self.spacing() * T::count(i)
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|i| self.node(i)).collect()
    }
}

/// Complex samples over a [`Grid1D`], one per node, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField<T> {
    grid: Grid1D<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> ComplexField<T> {
    pub fn new(grid: Grid1D<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), actual: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node. Nodes are evaluated in parallel.
    pub fn from_fn<F>(grid: Grid1D<T>, f: F) -> Result<Self>
    where
        F: Fn(T) -> Complex<T> + Sync,
    {
        let values = (0..grid.len()).into_par_iter().map(|i| f(grid.node(i))).collect();
        Self::new(grid, values)
    }

    /// Fallible variant of [`ComplexField::from_fn`].
    pub fn try_from_fn<F>(grid: Grid1D<T>, f: F) -> Result<Self>
    where
        F: Fn(T) -> Result<Complex<T>> + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.node(i)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    /// Multiplies every sample by `e^{i·phase}`.
    pub fn with_global_phase(&self, phase: T) -> Self {
        let factor = Complex::from_polar(T::one(), phase);
        Self { grid: self.grid, values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// Pointwise real parts.
    pub fn re(&self) -> ScalarField<T> {
        ScalarField { grid: self.grid, values: self.values.iter().map(|v| v.re).collect() }
    }
}

/// Real samples over a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    grid: Grid1D<T>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: Grid1D<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), actual: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F>(grid: Grid1D<T>, f: F) -> Result<Self>
    where
        F: Fn(T) -> T + Sync,
    {
        let values = (0..grid.len()).into_par_iter().map(|i| f(grid.node(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Largest absolute sample.
    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Widens to a complex field with zero imaginary part.
    pub fn to_complex(&self) -> ComplexField<T> {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|&v| Complex::new(v, T::zero())).collect(),
        }
    }
}

/// Composite quadrature weights (already multiplied by the spacing).
///
/// Odd `n` gets plain Simpson; even `n ≥ 4` closes with a 3/8 panel over the
/// last three intervals; `n = 2` falls back to the trapezoid.
pub fn quadrature_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    assert!(n >= 2, "quadrature needs at least two nodes");
    let mut w = vec![T::zero(); n];
    if n == 2 {
        w[0] = h / T::lit(2.0);
        w[1] = h / T::lit(2.0);
        return w;
    }
    let third = h / T::lit(3.0);
    let simpson_end = if n % 2 == 1 { n - 1 } else { n - 4 };
    let mut i = 0;
    while i + 2 <= simpson_end {
        w[i] = w[i] + third;
        w[i + 1] = w[i + 1] + T::lit(4.0) * third;
        w[i + 2] = w[i + 2] + third;
        i += 2;
    }
    if n.is_multiple_of(2) {
        let eighth = T::lit(3.0) * h / T::lit(8.0);
        let s = simpson_end;
        w[s] = w[s] + eighth;
        w[s + 1] = w[s + 1] + T::lit(3.0) * eighth;
        w[s + 2] = w[s + 2] + T::lit(3.0) * eighth;
        w[s + 3] = w[s + 3] + eighth;
    }
    w
}

/// Weighted, compensated sum of uniformly spaced samples.
pub fn integrate_samples<T, V>(values: &[V], h: T) -> V
where
    T: Real,
    V: Copy + Zero + Add<Output = V> + Sub<Output = V> + Mul<T, Output = V>,
{
    let w = quadrature_weights(values.len(), h);
    let mut acc = Kahan::new(V::zero());
    for (&v, &wi) in values.iter().zip(&w) {
        acc.add(v * wi);
    }
    acc.total()
}

/// Composite-Simpson integral of a sampled complex field over its grid.
pub fn integrate_1d<T: Real>(samples: &ComplexField<T>) -> Result<Complex<T>> {
    if let Some(index) = samples.values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite { index });
    }
    Ok(integrate_samples(&samples.values, samples.grid.spacing()))
}

/// Real-valued counterpart of [`integrate_1d`].
pub fn integrate_real<T: Real>(samples: &ScalarField<T>) -> Result<T> {
    if let Some(index) = samples.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(integrate_samples(&samples.values, samples.grid.spacing()))
}

/// Integrates `f` over `[a, b]` with `n` nodes (rounded up to odd).
///
/// A degenerate interval (`a == b`) integrates to zero.
pub fn integrate_fn<T, V, F>(f: F, a: T, b: T, n: usize) -> Result<V>
where
    T: Real,
    V: Copy + Zero + Add<Output = V> + Sub<Output = V> + Mul<T, Output = V>,
    F: Fn(T) -> V,
{
    if a == b {
        return Ok(V::zero());
    }
    let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };
    let grid = Grid1D::odd(lo, hi, n)?;
    let values: Vec<V> = (0..grid.len()).map(|i| f(grid.node(i))).collect();
    Ok(integrate_samples(&values, grid.spacing()) * sign)
}

/// Isotropic integration domain `0 ≤ |k| ≤ k_max` sampled with `n_k` radial nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KBall<T> {
    pub k_max: T,
    pub n_k: usize,
}

impl<T: Real> KBall<T> {
    pub fn new(k_max: T, n_k: usize) -> Result<Self> {
        if !(k_max.is_finite() && k_max >= T::zero()) {
            return Err(invalid("k_max", format!("must be finite and non-negative, got {k_max}")));
        }
        if n_k < 2 {
            return Err(invalid("n_k", format!("need at least 2 radial nodes, got {n_k}")));
        }
        Ok(Self { k_max, n_k })
    }

    pub fn interval(&self) -> KInterval<T> {
        KInterval { k_lo: T::zero(), k_hi: self.k_max, n: self.n_k }
    }
}

/// `4π ∫₀^{k_max} f(k) k² dk` for an isotropic integrand.
pub fn integrate_ball<T, F>(f: F, ball: &KBall<T>) -> Result<Complex<T>>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    integrate_shell(f, &ball.interval())
}

/// `4π ∫_{k_lo}^{k_hi} f(k) k² dk`; an empty shell integrates to zero.
pub fn integrate_shell<T, F>(f: F, shell: &KInterval<T>) -> Result<Complex<T>>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    shell.validate()?;
    let four_pi = T::lit(4.0) * T::PI();
    let radial: Complex<T> = integrate_fn(|k: T| f(k) * (k * k), shell.k_lo, shell.k_hi, shell.n)?;
    let value = radial * four_pi;
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::NonFinite { index: 0 });
    }
    Ok(value)
}

/// Spatial dimension of a superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    One,
    /// Isotropic three-dimensional case; the angular integral is done analytically.
    Three,
}

impl Dimension {
    pub fn as_u8(self) -> u8 {
        match self {
            Dimension::One => 1,
            Dimension::Three => 3,
        }
    }

    /// `(2π)^(-d/2)`.
    pub fn prefactor<T: Real>(self) -> T {
        let two_pi = T::lit(2.0) * T::PI();
        match self {
            Dimension::One => two_pi.sqrt().recip(),
            Dimension::Three => (two_pi * two_pi * two_pi).sqrt().recip(),
        }
    }
}

impl TryFrom<u8> for Dimension {
    type Error = Error;

    fn try_from(d: u8) -> Result<Self> {
        match d {
            1 => Ok(Dimension::One),
            3 => Ok(Dimension::Three),
            other => Err(Error::UnsupportedDimension(other)),
        }
    }
}

/// Wavenumber interval `[k_lo, k_hi]` sampled with `n` nodes.
///
/// In one dimension it is a segment of the k-axis; in the isotropic 3-D case
/// it is a radial shell (`k_lo = 0` for a full ball).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KInterval<T> {
    pub k_lo: T,
    pub k_hi: T,
    pub n: usize,
}

impl<T: Real> KInterval<T> {
    pub fn new(k_lo: T, k_hi: T, n: usize) -> Result<Self> {
        let s = Self { k_lo, k_hi, n };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if !(self.k_lo.is_finite() && self.k_hi.is_finite()) || self.k_lo > self.k_hi {
            return Err(invalid("k interval", format!("need finite k_lo <= k_hi, got [{}, {}]", self.k_lo, self.k_hi)));
        }
        if self.n < 2 {
            return Err(invalid("n", format!("need at least 2 nodes, got {}", self.n)));
        }
        Ok(())
    }

    pub fn width(&self) -> T {
        self.k_hi - self.k_lo
    }

    pub fn contains(&self, k: T) -> bool {
        k >= self.k_lo && k <= self.k_hi
    }
}

/// Plane-wave amplitude as a function of wavenumber.
#[derive(Clone)]
pub enum Spectrum<T> {
    /// A continuous amplitude evaluated by quadrature.
    Continuous(Arc<dyn Fn(T) -> Complex<T> + Send + Sync>),
    /// `weight · δ(k − k0)`, handled in closed form rather than sampled.
    SingleMode { k0: T, weight: Complex<T> },
}

impl<T: Real> Spectrum<T> {
    pub fn continuous(f: impl Fn(T) -> Complex<T> + Send + Sync + 'static) -> Self {
        Spectrum::Continuous(Arc::new(f))
    }

    /// Flat real amplitude.
    pub fn flat(value: T) -> Self {
        Self::continuous(move |_| Complex::new(value, T::zero()))
    }

    /// Evaluates a continuous spectrum; `None` for a single mode.
    pub fn value(&self, k: T) -> Option<Complex<T>> {
        match self {
            Spectrum::Continuous(f) => Some(f(k)),
            Spectrum::SingleMode { .. } => None,
        }
    }

    pub fn is_single_mode(&self) -> bool {
        matches!(self, Spectrum::SingleMode { .. })
    }
}

impl<T: Real> fmt::Debug for Spectrum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spectrum::Continuous(_) => f.write_str("Spectrum::Continuous(..)"),
            Spectrum::SingleMode { k0, weight } => {
                f.debug_struct("Spectrum::SingleMode").field("k0", k0).field("weight", weight).finish()
            }
        }
    }
}

/// `sin(z)/z`, continuous at zero.
pub fn sinc<T: Real>(z: T) -> T {
    if z.abs() < T::lit(1e-4) {
        let z2 = z * z;
        T::one() - z2 / T::lit(6.0) + z2 * z2 / T::lit(120.0)
    } else {
        z.sin() / z
    }
}

/// Fourier superposition of plane waves at position `x`.
///
/// One dimension: `(2π)^{-1/2} ∫ dk a(k) e^{ikx}` over `domain`.
/// Three dimensions (isotropic amplitude, `x = |r|`):
/// `(2π)^{-3/2} 4π ∫ dk k² a(k) sinc(k r)`.
pub fn superpose<T: Real>(
    amplitude: &Spectrum<T>,
    domain: &KInterval<T>,
    x: T,
    dimension: Dimension,
) -> Result<Complex<T>> {
    domain.validate()?;
    let pre = dimension.prefactor::<T>();
    match (amplitude, dimension) {
        (Spectrum::SingleMode { k0, weight }, Dimension::One) => {
            Ok(*weight * Complex::from_polar(pre, *k0 * x))
        }
        (Spectrum::SingleMode { k0, weight }, Dimension::Three) => {
            // δ(|k| − k0) on the sphere of radius k0
            let four_pi = T::lit(4.0) * T::PI();
            Ok(*weight * (pre * four_pi * *k0 * *k0 * sinc(*k0 * x.abs())))
        }
        (Spectrum::Continuous(f), Dimension::One) => {
            let v: Complex<T> =
                integrate_fn(|k: T| f(k) * Complex::from_polar(T::one(), k * x), domain.k_lo, domain.k_hi, domain.n)?;
            Ok(v * pre)
        }
        (Spectrum::Continuous(f), Dimension::Three) => {
            let r = x.abs();
            let v = integrate_shell(|k: T| f(k) * sinc(k * r), domain)?;
            Ok(v * pre)
        }
    }
}

/// Forward transform `(2π)^{-1/2} ∫ dx ψ(x) e^{-ikx}` of a sampled field.
pub fn forward_transform_1d<T: Real>(field: &ComplexField<T>, k: T) -> Result<Complex<T>> {
    let grid = field.grid;
    let integrand: Vec<Complex<T>> = field
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * Complex::from_polar(T::one(), -k * grid.node(i)))
        .collect();
    let v: Complex<T> = integrate_samples(&integrand, grid.spacing());
    Ok(v * Dimension::One.prefactor::<T>())
}

/// Superposes `amplitude` at every node of `grid`.
pub fn superpose_on_grid<T: Real>(
    amplitude: &Spectrum<T>,
    domain: &KInterval<T>,
    grid: Grid1D<T>,
    dimension: Dimension,
) -> Result<ComplexField<T>> {
    ComplexField::try_from_fn(grid, |x| superpose(amplitude, domain, x, dimension))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn field(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64 + Sync) -> ComplexField<f64> {
        let g = Grid1D::new(a, b, n).unwrap();
        ComplexField::from_fn(g, |x| Complex::new(f(x), 0.0)).unwrap()
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(Grid1D::new(1.0, 0.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
        assert!(Grid1D::new(0.0, f64::NAN, 10).is_err());
        assert_eq!(Grid1D::odd(0.0, 1.0, 10).unwrap().len(), 11);
        let g = Grid1D::new(-1.0, 3.0, 5).unwrap();
        assert_eq!(g.nodes(), vec![-1.0, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn constant_integrand() {
        let v = integrate_1d(&field(0.0, 1.0, 101, |_| 1.0)).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sine_over_half_period() {
        let v = integrate_1d(&field(0.0, PI, 1001, f64::sin)).unwrap();
        assert_abs_diff_eq!(v.re, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let v = integrate_1d(&field(-5.0, 5.0, 501, |x| x * (-x * x).exp())).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn even_node_counts_use_closing_panel() {
        for n in [2usize, 4, 6, 100] {
            let v = integrate_1d(&field(0.0, 2.0, n, |x| x)).unwrap();
            assert_abs_diff_eq!(v.re, 2.0, epsilon = 1e-12);
        }
        // cubic exact for Simpson + 3/8
        let v = integrate_1d(&field(0.0, 1.0, 10, |x| x * x * x)).unwrap();
        assert_abs_diff_eq!(v.re, 0.25, epsilon = 1e-14);
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = Grid1D::new(0.0, 1.0, 3).unwrap();
        let bad = ComplexField::new(g, vec![Complex::new(0.0, 0.0), Complex::new(f64::NAN, 0.0), Complex::new(0.0, 0.0)]);
        assert_eq!(bad.unwrap_err(), Error::NonFinite { index: 1 });
        let short = ComplexField::new(g, vec![Complex::new(0.0, 0.0)]);
        assert!(matches!(short, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn ball_integrals() {
        let one = |_: f64| Complex::new(1.0, 0.0);
        let k0 = 1.7;
        let v = integrate_ball(one, &KBall::new(k0, 51).unwrap()).unwrap();
        assert_abs_diff_eq!(v.re, 4.0 * PI / 3.0 * k0.powi(3), epsilon = 1e-9);
        let v = integrate_ball(one, &KBall::new(0.0, 51).unwrap()).unwrap();
        assert_eq!(v.re, 0.0);
        let v = integrate_ball(|k: f64| Complex::new(k, 0.0), &KBall::new(1.0, 51).unwrap()).unwrap();
        assert_abs_diff_eq!(v.re, PI, epsilon = 1e-9);
        assert!(KBall::new(-1.0, 10).is_err());
    }

    #[test]
    fn superpose_null_and_origin() {
        let dom = KInterval::new(0.0, 1.0, 201).unwrap();
        let zero = Spectrum::flat(0.0);
        for x in [-2.0, 0.0, 3.5] {
            assert_eq!(superpose(&zero, &dom, x, Dimension::One).unwrap(), Complex::new(0.0, 0.0));
            assert_eq!(superpose(&zero, &dom, x, Dimension::Three).unwrap(), Complex::new(0.0, 0.0));
        }
        let v = superpose(&Spectrum::flat(1.0), &dom, 0.0, Dimension::Three).unwrap();
        let expected = (2.0 * PI).powf(-1.5) * 4.0 * PI / 3.0;
        assert_abs_diff_eq!(v.re, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn single_mode_has_constant_modulus() {
        let dom = KInterval::new(0.0, 10.0, 3).unwrap();
        let s = Spectrum::SingleMode { k0: 2.5, weight: Complex::new(1.0, 0.0) };
        let reference = superpose(&s, &dom, 0.0, Dimension::One).unwrap().norm();
        for i in 0..50 {
            let x = -7.0 + 0.37 * i as f64;
            let v = superpose(&s, &dom, x, Dimension::One).unwrap();
            assert_abs_diff_eq!(v.norm(), reference, epsilon = 1e-15);
        }
    }

    #[test]
    fn dimension_parsing() {
        assert_eq!(Dimension::try_from(1).unwrap(), Dimension::One);
        assert_eq!(Dimension::try_from(3).unwrap(), Dimension::Three);
        assert_eq!(Dimension::try_from(2).unwrap_err(), Error::UnsupportedDimension(2));
    }

    #[test]
    fn gaussian_round_trip() {
        // ψ(x) = exp(-x²/2 + 2ix); forward transform then superpose back
        let g = Grid1D::odd(-12.0, 12.0, 1201).unwrap();
        let psi = ComplexField::from_fn(g, |x: f64| Complex::from_polar((-x * x / 2.0).exp(), 2.0 * x)).unwrap();
        let samples: Vec<(f64, Complex<f64>)> = Grid1D::odd(-6.0, 10.0, 801)
            .unwrap()
            .nodes()
            .into_iter()
            .map(|k| (k, forward_transform_1d(&psi, k).unwrap()))
            .collect();
        let kgrid = Grid1D::odd(-6.0, 10.0, 801).unwrap();
        let h = kgrid.spacing();
        for x in [-2.0, -0.5, 0.0, 0.3, 1.7] {
            let integrand: Vec<Complex<f64>> =
                samples.iter().map(|&(k, c)| c * Complex::from_polar(1.0, k * x)).collect();
            let back = integrate_samples(&integrand, h) / (2.0 * PI).sqrt();
            let truth = Complex::from_polar((-x * x / 2.0f64).exp(), 2.0 * x);
            assert!((back - truth).norm() < 1e-6, "x={x}: {back} vs {truth}");
        }
    }

    #[test]
    fn single_precision_smoke() {
        let g = Grid1D::<f32>::new(0.0, 1.0, 101).unwrap();
        let f = ScalarField::from_fn(g, |x| x * x).unwrap();
        assert!((integrate_real(&f).unwrap() - 1.0 / 3.0).abs() < 1e-5);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn quadrature_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, n in 2usize..300) {
                let g = Grid1D::new(-1.0, 2.0, n).unwrap();
                let f = |x: f64| (x * 1.3).sin();
                let h = |x: f64| x * x - 0.5;
                let combo = ComplexField::from_fn(g, |x| Complex::new(a * f(x) + b * h(x), 0.0)).unwrap();
                let fi = integrate_1d(&ComplexField::from_fn(g, |x| Complex::new(f(x), 0.0)).unwrap()).unwrap();
                let hi = integrate_1d(&ComplexField::from_fn(g, |x| Complex::new(h(x), 0.0)).unwrap()).unwrap();
                let lhs = integrate_1d(&combo).unwrap();
                prop_assert!((lhs - (fi * a + hi * b)).norm() < 1e-12);
            }

            #[test]
            fn refinement_converges(n in 21usize..200) {
                let exact = 1.0 - (-2.0f64).exp();
                let at = |n: usize| integrate_fn(|x: f64| (-x).exp(), 0.0, 2.0, n).unwrap();
                let coarse: f64 = at(n);
                let fine: f64 = at(2 * n);
                prop_assert!((fine - exact).abs() <= (coarse - exact).abs() + 1e-15);
                prop_assert!((fine - coarse).abs() < 1e-6);
            }
        }
    }
}
