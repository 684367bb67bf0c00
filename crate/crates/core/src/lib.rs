//! Gradient-free training of small MLP controllers by task separation with
//! hill climbing, for a kinematic bicycle and a cart-pole.

pub mod checkpoint;
pub mod dynamics;
pub mod error;
pub mod policy;
pub mod reward;
pub mod tasks;
pub mod trainer;

pub use checkpoint::{task_digest, Checkpoint};
pub use dynamics::{
    ActuatorLimits, Control, PendulumParams, PendulumState, Rect, VehicleParams, VehicleState,
};
pub use error::{Error, Result};
pub use policy::{Mlp, MlpSpec, ParamVector, Policy};
pub use reward::{Score, Tolerances, VvcConfig, VvcMode};
pub use tasks::{EnvKind, FeatureRecipe, GoalTuple, LookupWeights, Normalization, Task};
pub use trainer::{
    tshc_run, BestSolution, CandidateScore, Environment, IterationRecord, RewardMode,
    RolloutOptions, RolloutResult, SigmaMode, TrainObserver, TrainOutcome, Trainer, Trajectory,
    TshcConfig,
};
