//! Concrete representations of Lévy measures and their samplers.

pub mod bessel;
pub mod compound_poisson;
pub mod excursion;
pub mod gamma;
pub mod levy;
pub mod local_time;
pub mod markov;
pub mod permanental;

pub use bessel::{besq_kernel, feller_kernel, BesqPoint, BesqRep, ExcursionSettings, FellerRep};
pub use compound_poisson::compound_poisson_sample;
pub use excursion::{sample_excursion, ExcursionPoint, GridRule, LengthSampler};
pub use gamma::GammaRep;
pub use levy::{levy_kernel, JumpLaw, LevyModel, LevyPoint, LevyProcessRep};
pub use local_time::LocalTimeEstimator;
pub use markov::{green_matrix, LocalTimeClock, MarkovChainModel};
pub use permanental::PermanentalModel;
