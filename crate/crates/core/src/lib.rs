//! Numerical laboratory for quantum-ensemble models.
//!
//! Every model is generic over the scalar type through [`Real`], implemented
//! for `f32` and `f64`. Concrete aliases for both are exported at the root.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
pub mod numerics;
pub mod optics;
pub mod scalar;
pub mod squarewell;
pub mod wavepacket;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use scalar::Real;

pub type Grid64 = numerics::Grid1D<f64>;
pub type ComplexField64 = numerics::ComplexField<f64>;
pub type ScalarField64 = numerics::ScalarField<f64>;
pub type Spectrum64 = numerics::Spectrum<f64>;
pub type ParticleModel64 = ensemble::ParticleModel<f64>;
pub type KRange64 = ensemble::KRange<f64>;
pub type WellConfig64 = squarewell::WellConfig<f64>;
pub type InitialPacket64 = wavepacket::InitialPacket<f64>;
pub type DispersionLaw64 = wavepacket::DispersionLaw<f64>;
pub type PolarizedBeam64 = optics::PolarizedBeam<f64>;
pub type EraserConfig64 = optics::EraserConfig<f64>;
pub type MzConfig64 = optics::MzConfig<f64>;

pub type Grid32 = numerics::Grid1D<f32>;
pub type ComplexField32 = numerics::ComplexField<f32>;
pub type ScalarField32 = numerics::ScalarField<f32>;
pub type Spectrum32 = numerics::Spectrum<f32>;
pub type ParticleModel32 = ensemble::ParticleModel<f32>;
pub type KRange32 = ensemble::KRange<f32>;
pub type WellConfig32 = squarewell::WellConfig<f32>;
pub type InitialPacket32 = wavepacket::InitialPacket<f32>;
pub type DispersionLaw32 = wavepacket::DispersionLaw<f32>;
pub type PolarizedBeam32 = optics::PolarizedBeam<f32>;
pub type EraserConfig32 = optics::EraserConfig<f32>;
pub type MzConfig32 = optics::MzConfig<f32>;
