//! Signed series `Σ ±c_n` in the plane: bounded sign selection, ratio
//! classes, leveled function systems built from them, exhaustive oracles and
//! finite-scale density tools.

pub mod complex;
pub mod density;
pub mod error;
pub mod moran;
pub mod oracle;
pub mod ratio;
pub mod selection;
pub mod series;

pub use complex::{max_norm, Complex2, Matrix2, Rect};
pub use density::{DensityReport, IndexSet};
pub use error::*;
pub use moran::{Address, MoranSystem};
pub use oracle::{CoverageReport, RangeSet};
pub use ratio::{RatioReport, RatioValue};
pub use selection::SelectionResult;
pub use series::*;
