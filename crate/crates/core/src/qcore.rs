//! Dense complex linear algebra, seeded Haar sampling and Born-rule measurement.

mod sampling;
mod seed;
mod state;
mod unitary;

pub use sampling::{born_probabilities, born_sample, haar_state, haar_unitary};
pub(crate) use sampling::gaussian_vector;
pub use seed::{SeedStream, StreamRng};
pub use state::{inner, PureState, NORM_TOL};
pub use unitary::{apply, unitarity_deviation, UnitaryMatrix};
