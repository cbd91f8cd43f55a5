//! Oriented simplicial complexes with piecewise-flat metrics, mesh generators and
//! integer homology.

mod complex;
mod generators;
mod homology;
mod io;
mod metric;

pub use complex::{Chain, SimplicialComplex};
pub use generators::{
    build_annulus, build_box, build_box_at, build_flat_torus, build_solid_torus, ANNULUS_RADII,
    SOLID_TORUS_RADII,
};
pub use homology::{betti_numbers, boundary_betti_numbers, column_rank, is_relatively_null};
pub use io::MeshJson;
pub use metric::{GridLayout, MetricData};
pub(crate) use metric::{factorial, simplex_volume};

/// A complex together with its metric.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub complex: SimplicialComplex,
    pub metric: MetricData,
}

impl From<(SimplicialComplex, MetricData)> for Mesh {
    fn from((complex, metric): (SimplicialComplex, MetricData)) -> Self {
        Self { complex, metric }
    }
}
