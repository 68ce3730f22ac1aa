//! Concrete problem instances for the solvers.

pub mod example_a;
pub mod nemytskii;
pub mod synthetic;
pub mod tame;

pub use example_a::{example_a_closed_inverse, example_a_f, ExampleA};
pub use nemytskii::NemytskiiProblem;
pub use synthetic::SyntheticLossProblem;
pub use tame::{
    derivative_consistency, modulus_ladder, random_scale_vector, verify_left_inverse,
    verify_tame_direct, verify_tame_inverse, TameMap, TameParams,
};
