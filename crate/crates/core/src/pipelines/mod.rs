//! The packing, covering and counting pipelines.

pub mod assign;
pub mod count;
pub mod cover;
pub mod pack;
pub mod params;
pub mod report;
pub mod systems;

pub use assign::{assign_edges, sample_partitions, AssignMode, BalanceReport, EdgeAssignment};
pub use count::{count_certify, CountCertificate, LayerCount, PartitionCount};
pub use cover::{cover, cover_report, CoverReport};
pub use pack::{pack, PackReport};
pub use params::{parameter_policy, ExperimentParams, PolicyOptions, Task};
pub use report::{audit_cover, audit_disjoint, CoverAudit, DisjointAudit};
pub use systems::{build_cover_systems, build_path_systems, CoverSystems, PackSystems};
