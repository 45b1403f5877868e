//! Computational pieces of the lower-bound machinery.

pub mod fano;
pub mod identification;
pub mod kl;
pub mod lsa_moments;
pub mod packing;
pub mod risk_floor;

pub use fano::{fano_lower_bound, FanoInputs};
pub use identification::{boost_mean, identify_aligned_node};
pub use kl::kl_transformed_ssd;
pub use lsa_moments::{lsa_mean, lsa_mean_db, lsa_second_moment};
pub use packing::{gv_packing, PackingSet};
pub use risk_floor::{risk_floor, semi_metric_check, SemiMetricReport};
