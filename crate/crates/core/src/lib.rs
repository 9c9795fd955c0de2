//! Complete mappings of finite groups: exhaustive counts, the partition
//! system expansion, and exact physical-side checks that tie them together.

pub mod counting;
pub mod enumerate;
pub mod error;
pub mod expansion;
pub mod gamma;
pub mod group;
pub mod partition;
pub mod physical;
pub mod poly;
pub mod rational;
pub mod report;
pub mod series;
pub mod system;
pub mod verify;

pub use counting::{
    collision_stats, count_complete_mappings, count_triple_solutions, CollisionStats,
    TargetFunction,
};
pub use error::{Error, Result};
pub use group::{FiniteGroup, GroupInvariants, GroupSpec};
