//! Bivariate (p,q)-Schurer-Stancu operators on `[0,1]²`.
//!
//! The crate evaluates the operators, checks their moments against closed
//! forms, estimates approximation-error bounds and tabulates convergence
//! along parameter sequences.

pub mod analysis;
pub mod catalog;
pub mod cli;
pub mod convergence;
pub mod error;
pub mod moments;
pub mod operator;
pub mod output;
pub mod pq_core;
pub mod summation;

pub use catalog::{Rect, TestFunction};
pub use error::{Error, Result};
pub use operator::{apply_bivariate, AxisConfig, BivariateOperator, NodeExponent, TensorGrid};
pub use pq_core::PqPair;
