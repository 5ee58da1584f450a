//! Spectral analysis of variational quantum circuits.
//!
//! A circuit of Clifford gates and Pauli rotations is rewritten into a normal
//! form, expanded into a trigonometric tree, and turned into its exact
//! Fourier spectrum with coefficient polynomials in the trainable angles.
//! Datasets are mapped onto the same frequency lattice by a damped inverse
//! non-uniform Fourier transform, and candidate circuits are ranked by how
//! well their spectra fit the data.

pub mod circuit;
pub mod data_spectrum;
pub mod error;
pub mod linalg;
pub mod pauli;
pub mod ranker;
pub mod scalar;
pub mod sim;
pub mod spectrum;
pub mod tree;

pub use circuit::{to_normal_forms, Axis, Circuit, Gate, Model, NormalForm, Observable, ParamKind, ParamRef};
pub use data_spectrum::{build_grid, damping_factors, inverse_nfft, r_nfft, FeatureMap, FrequencyGrid, RawData};
pub use error::{Error, Result};
pub use pauli::{clifford_conjugate, CliffordGate, Direction, Phase, SignedPauli};
pub use ranker::{rank_architectures, RankOptions, RankReport};
pub use scalar::{GaussianRational, Rational, Real};
pub use sim::{Simulator, TrainConfig};
pub use spectrum::{analyze, CoefficientPolynomial, Frequency, SpectrumReport};
pub use tree::{LeafTerm, TreeOptions};

pub type Dataset64 = data_spectrum::Dataset<f64>;
pub type Dataset32 = data_spectrum::Dataset<f32>;
pub type DataSpectrum64 = data_spectrum::DataSpectrum<f64>;
pub type DataSpectrum32 = data_spectrum::DataSpectrum<f32>;
pub type StateVector64 = sim::StateVector<f64>;
pub type StateVector32 = sim::StateVector<f32>;
pub type Complex64 = num_complex::Complex<f64>;
