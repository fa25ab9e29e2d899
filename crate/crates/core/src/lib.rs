pub mod asymptotics;
pub mod eigensolver;
pub mod error;
pub mod geometry;
pub mod limit_problem;
pub mod mesh;
pub mod quadrature;
pub mod report;
pub mod run;
pub mod shape_optimizer;
pub mod sparse;
pub mod special_functions;

pub use error::{Error, Result};

/// Order-preserving map, parallel when the `parallel` feature is on.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
