//! Certified finite-depth bounds on the generalized and joint spectral
//! radii of finite sets of non-negative matrices, together with the
//! Hadamard weighted-geometric-mean operations and block-cyclic
//! constructions those bounds interact with, and a randomized verifier
//! for the inequalities connecting them.

pub mod constructions;
pub mod error;
pub mod estimators;
pub mod io;
pub mod matrix;
pub mod perron;
pub mod sets;
pub mod verifier;
pub mod weights;

pub use constructions::{
    block_cyclic, block_cyclic_kth_power_blocks, cyclic_word_products, kernel_discretize,
    truncated_shift_family, KernelSpec,
};
pub use error::{Error, Result};
pub use estimators::{
    estimate, gsr_lower, jsr_upper, rescale, sweep_word_count, SpectralEstimate,
    DEFAULT_WORD_BUDGET,
};
pub use io::{
    load_matrix_set, save_matrix_set, MatrixSetFile, NamedMatrix, WitnessFile, WitnessSet,
    FORMAT_VERSION,
};
pub use matrix::{weighted_hadamard_mean, NonNegMatrix, Norm, DEFAULT_RTOL};
pub use perron::Enclosure;
pub use sets::{
    set_hadamard_mean, set_power, set_product, split_combination, word_matrix, OperatorSet,
    ProductWord, SetPower,
};
pub use verifier::{
    check_block_cyclic_blocks, check_block_cyclic_identity, check_geometric_mean_inequalities,
    check_mean_decomposition, check_mixed_product_inequalities, check_set_mean_inequalities,
    instance_from_witness, random_instance, replay_witness, run_checks, run_suite, witness_json,
    CheckFamily, CheckReport, InstanceConfig, RandomInstance, SuiteReport, SuiteSummary,
    DECOMP_SAMPLES,
};
pub use weights::{WeightMode, WeightVector, WEIGHT_SUM_TOL};
