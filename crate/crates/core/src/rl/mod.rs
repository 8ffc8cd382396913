//! Learning machinery: parameter boxes, step sizes, deterministic SPSA
//! perturbations, Boltzmann and epsilon-greedy policies, the four
//! function-approximation learners and the tabular relative Q-value
//! iteration used to check them on small models.

mod agents;
mod hadamard;
mod policy;
mod projection;
mod rqvi;
mod schedule;
mod updates;

pub use agents::{QsaLearner, TqsaLearner, TqsaSchedules};
pub use hadamard::{hadamard_perturbation, PerturbationSequence};
pub use policy::{
    boltzmann_probabilities, boltzmann_sample, epsilon_greedy_action, uniform_admissible,
};
pub use projection::{project_box, BoundedVector, BoxBounds, PolicyParams, QParams};
pub use rqvi::{rqvi_full_state, RqviOutcome, TabularMdp};
pub use schedule::{step_size, StepSchedule};
pub use updates::{
    average_cost_update, on_policy_td_update, qsa_a_update, qsa_d_update, spsa_policy_update,
    tqsa_a_update, tqsa_d_update, Objective, SpsaScale, TqsaSteps, Transition,
};
