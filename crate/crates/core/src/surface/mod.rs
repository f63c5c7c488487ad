//! Star-shaped hypersurfaces as radial graphs over `S^{n-1}`.

pub mod basis;
pub mod geometry;
pub mod oracle;
pub mod quadrature;
pub mod shape;

pub use geometry::{build_geometry, geometry_from_jets, SurfaceGeometry, SurfaceSample};
pub use oracle::oracle_shape_operator;
pub use quadrature::{GridNode, GridSpec, QuadratureGrid};
pub use shape::{CoefficientEntry, RadialJet, RadialShape, ShapeFile};
