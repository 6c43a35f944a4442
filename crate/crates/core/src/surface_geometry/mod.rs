//! Geometry of the unwrinkled mid-surface: chart catalog, wrinkle shape
//! functions, bases, fundamental forms, Christoffel symbols and the shell
//! elasticity tensor.

mod chart;
mod elasticity;
mod geometry;
mod shape;

pub use chart::{SurfaceChart, MAX_CHART_ORDER};
pub use elasticity::{check_lame, ElasticityTensor};
pub(crate) use geometry::inverse_2x2;
pub use geometry::{base_jets, eval_geometry, BaseJets, GeometryAtPoint, A_MIN, V3};
pub use shape::{ShapeFunction, ShapeValues, TrigTerm};
