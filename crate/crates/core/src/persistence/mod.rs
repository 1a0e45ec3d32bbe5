//! Filtered simplicial complexes and their persistence diagrams over Z/2.

#[cfg(feature = "alpha")]
pub mod alpha;
mod complex;
mod diagram;
pub mod oracle;
mod reduce;

#[cfg(feature = "alpha")]
pub use alpha::build_alpha_filtration;
pub use complex::{build_rips_filtration, FilteredComplex, MaxRadius, Simplex, MAX_HOMOLOGY_DIM};
pub use diagram::{Death, PersistenceDiagram, PersistencePair};
pub use oracle::brute_force_diagram;
pub use reduce::{reduce, reduce_with_stats, ReductionStats};

use crate::error::{Error, Result};
use crate::pointcloud::PointCloud;
use crate::scalar::Scalar;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiltrationKind {
    Rips,
    Alpha,
}

impl FiltrationKind {
    pub fn name(self) -> &'static str {
        match self {
            FiltrationKind::Rips => "rips",
            FiltrationKind::Alpha => "alpha",
        }
    }
}

impl FromStr for FiltrationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rips" => Ok(FiltrationKind::Rips),
            "alpha" => Ok(FiltrationKind::Alpha),
            other => Err(Error::Config(format!("unknown filtration {other:?} (expected rips or alpha)"))),
        }
    }
}

/// Builds the requested filtration and reduces it.
pub fn diagram_of<T: Scalar>(
    cloud: &PointCloud<T>,
    kind: FiltrationKind,
    max_dim: usize,
    max_radius: MaxRadius<T>,
) -> Result<PersistenceDiagram<T>> {
    let complex = match kind {
        FiltrationKind::Rips => build_rips_filtration(cloud, max_dim, max_radius)?,
        #[cfg(feature = "alpha")]
        FiltrationKind::Alpha => build_alpha_filtration(cloud, max_dim)?,
        #[cfg(not(feature = "alpha"))]
        FiltrationKind::Alpha => {
            return Err(Error::Unsupported(
                "alpha filtration not compiled in (enable the `alpha` feature)".into(),
            ))
        }
    };
    reduce(&complex)
}
