//! Shannon and partition entropy, entropy rates and the variational audit.

pub mod info;
pub mod measure;
pub mod partition;
pub mod rates;
pub mod variational;

pub use info::{conditional_partition_entropy, entropy_bound_check, partition_entropy, shannon_entropy};
pub use measure::{EmpiricalFiberMeasure, FiberMeasure, MASS_TOLERANCE};
pub use partition::{join_labels, joined_partition, PartitionKind, PartitionSpec};
pub use rates::{
    atom_injectivity_check, check_eps_list, empirical_mu, empirical_nu, estimate_fiber_entropy,
    estimate_h_top, extrapolate_inverse_n, fiber_partition_entropy_rate, joined_entropy,
    sample_sep_rate, sep_entropy_rate, EntropyEstimate, EntropyRow, EntropyTable, Extrapolation,
    TopEntropyConfig, WeightedFiberMeasure, CSV_HEADER,
};
pub use variational::{variational_audit, PartitionOutcome, VarprinReport};
