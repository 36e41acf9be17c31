pub mod logic;
pub mod triage;
pub mod staging;
pub mod solver;
pub mod orchestrator;
pub mod strategy;
pub mod scenario_gen;
pub mod baselines;
