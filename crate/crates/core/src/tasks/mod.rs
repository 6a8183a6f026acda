//! Benchmark datasets: NARMA2 time series, Iris and two-qubit
//! separability.

pub mod entanglement;
pub mod iris;
pub mod narma;

pub use entanglement::{
    alpha_proxy, entanglement_detunings, entanglement_observables, gen_entanglement_dataset, is_entangled,
    prepare_entanglement_initial_state, pt_min_eigenvalue, read_entanglement_csv, write_entanglement_csv,
    DetuningConvention, EntanglementSample, ENTANGLEMENT_TAU_OMEGA,
};
pub use iris::{iris_bundled, load_iris, parse_iris, stratified_split, IrisData, IRIS_TEST_FRACTION};
pub use narma::{gen_narma2, narma2_step, narma2_targets, narma_reservoir_input, Narma2Series};
