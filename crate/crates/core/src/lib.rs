//! Unsupervised ground metric learning through optimal transport.
//!
//! A ground cost between bins induces transport distances between
//! histograms; this crate searches for costs that are fixed points (up to
//! scale) of the map sending a cost to the matrix of pairwise transport
//! distances of a dataset. Power iterations extract such eigenvectors and,
//! for rectangular data, singular-vector pairs.
//!
//! Three interchangeable backends evaluate the pairwise map:
//! exact transport (a transportation simplex returning vertex plans),
//! debiased entropic divergences (Sinkhorn scaling, optionally in the log
//! domain), and the large-regularization quadratic limit, which connects
//! the whole construction to principal component analysis.
//!
//! The `data` module generates the synthetic families used throughout the
//! test-suite (translated bumps on tori, mean/scale grids, block matrices)
//! and ingests CSV and idx files for real pipelines.

pub mod coupling;
pub mod cost;
pub mod data;
pub mod distance_map;
pub mod embedding;
pub mod entropic;
pub mod error;
pub mod exact;
pub mod simplex;
pub mod spectral;

pub use coupling::Coupling;
pub use cost::{hilbert_metric, CostMatrix};
pub use data::{
    block_dataset, canonical_normalization, mean_scale_family, read_csv, read_idx,
    scrna_preprocess, torus_dataset_1d, torus_dataset_2d, write_csv, write_matrix_csv, CsvOptions, DataMatrix,
    TorusTemplate,
};
pub use distance_map::{l1_matrix, phi, Backend, CouplingTable, PhiConfig, PhiOutput};
pub use embedding::{
    classical_mds, cone_membership, delta_operator, pca_eigencosts, phi_infty, ConeMembership,
    MdsEmbedding, PcaEigenpair,
};
pub use entropic::{bistochastic_scaling, sinkhorn_cost, sinkhorn_divergence, SinkhornConfig};
pub use error::{Error, Result};
pub use exact::{brute_force_oracle, solve_exact, OtSolution};
pub use simplex::{l1_distance, Dataset, Histogram};
pub use spectral::{
    eigenvalue_consistency, power_eigen, power_singular, uniqueness_certificate,
    CertificateReport, CertificateStatus, ConsistencyReport, ConvergenceStatus, InitialCost,
    IterationConfig, SpectralResult, TraceRecord,
};
