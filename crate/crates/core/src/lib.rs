//! Detection and creation of quantum correlations by local channels.
//!
//! The crate covers dense complex linear algebra, bipartite states with a
//! classical-on-B test, CPTP channels in Kraus and Choi form, seeded random
//! sampling, and numerical certification of commutativity preservation.

pub mod certify;
pub mod channels;
pub mod error;
pub mod linalg;
pub mod optimize;
pub mod sampling;
pub mod states;

pub use error::{Error, Result};
