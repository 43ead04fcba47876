//! Fundamental tones of divergence-form elliptic operators L_Phi = div(Phi grad)
//! on triangulated hypersurfaces of the three space forms, with the full set
//! of geometric lower bounds (Barta vector-field bound, extrinsic ball bounds,
//! extrinsic-radius constants, operator comparison, Cheeger constant) and the
//! verification harness that checks every bound against computed eigenvalues.

pub mod bounds;
pub mod curvature;
pub mod eigen;
pub mod error;
pub mod estimate;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod radius;
pub mod sparse;
pub mod spaceform;
pub mod surfaces;

pub use error::{Error, Result};
pub use spaceform::{AmbientPoint, Coords, SpaceForm};
