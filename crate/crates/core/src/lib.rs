//! Spectral analysis of weighted shift operators.
//!
//! The pipeline reads a finite description of a weight sequence
//! ([`weightspec`]), estimates the asymptotic radii of the shift
//! ([`radii`]), turns them into exact circularly symmetric spectral regions
//! ([`regions`], [`spectra`], [`bpe`]), classifies the shift with
//! moment-matrix certificates ([`momentclass`]) and checks every prediction
//! against finite rectangular truncations ([`oracle`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bpe;
pub mod cli;
pub mod docs;
pub mod momentclass;
pub mod oracle;
pub mod radii;
pub mod regions;
#[allow(dead_code)]
mod registry_check;
pub mod spectra;
pub mod weightspec;
