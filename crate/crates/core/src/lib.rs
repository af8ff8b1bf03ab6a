//! Finite quotients of hyperbolic triangle groups over `Z[xi_n]` and spectral
//! analysis of tight-binding models on them.

pub mod error;
pub mod geometry;
pub mod junction;
pub mod operators;
pub mod quotient;
pub mod ring;
pub mod spectral;
pub mod triangle_group;

pub use error::{Error, Result};

/// Sets the worker count for dense eigensolvers and KPM; `0` keeps the default.
pub fn configure_threads(threads: usize) {
    if threads == 0 {
        return;
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        log::warn!("thread pool already initialized: {e}");
    }
    faer::set_global_parallelism(if threads == 1 { faer::Par::Seq } else { faer::Par::rayon(threads) });
}
