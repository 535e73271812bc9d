//! Channel tracking for multi-antenna wireless energy transfer.
//!
//! An energy transmitter with `M` antennas sends energy signals to a
//! single-antenna receiver and learns the complex channel vector from the
//! only feedback a harvesting circuit can produce: a scalar, noisy report of
//! harvested energy per slot. This crate provides
//!
//! * a seeded simulator for Gauss-Markov (and optional nonlinear)
//!   time-varying channels with ±1 probe signals and energy feedback,
//! * the proposed tracker: a T×K grid of stacked LSTM cells for a coarse
//!   estimate, fine-tuned by a deep feedforward network, trained offline by
//!   backpropagation through time,
//! * the conventional baseline: a Kalman filter over the real-parameterized
//!   channel Gram matrix with rank-one channel extraction,
//! * an experiment harness producing MSE/harvested-energy sweeps,
//!   trajectory traces, and train/test SNR studies as CSV and SVG.
//!
//! Everything is deterministic given a seed; see [`numerics::Rng`].

pub mod channel;
pub mod error;
pub mod harness;
pub mod kalman;


pub mod nn;
pub mod tracker;
pub mod numerics;


pub use error::{Error, Result};
