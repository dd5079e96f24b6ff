pub mod error;
pub mod numerics;

pub use error::{Error, Result};
pub mod potentials;
pub mod wkb;
pub mod scattering;
pub mod spectrum;
pub mod exact_states;
pub mod acceptance;

use rayon::prelude::*;

/// Evaluates `f` over `items` in parallel, preserving order.
pub fn par_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Send + Sync,
{
    items.par_iter().map(f).collect()
}
