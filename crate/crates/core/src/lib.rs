pub mod asymptotics;
pub mod capacity_opt;
pub mod cli;
pub mod constraint;
pub mod erasure;
pub mod error;
pub mod feedback;
pub mod info;
pub mod markov;
pub mod mi_rate;
pub mod optimize;
