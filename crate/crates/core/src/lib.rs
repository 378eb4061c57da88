//! Balanced adaptive fast multipole method in two dimensions.
//!
//! Sources and evaluation points live in the complex plane. A pyramid of
//! median splits groups them into boxes of nearly equal population; the
//! θ-criterion sorts box pairs into near-field pairs (direct summation) and
//! far-field pairs (multipole-to-local translation). The near field runs on a
//! pluggable backend, optionally concurrently with the far-field downward
//! pass.
//!
//! ```
//! use afmm::{C64, EvalSet64, FmmConfig, FmmEngine64, SourceSet64};
//!
//! let pos: Vec<C64> = (0..500).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.91).cos())).collect();
//! let sources = SourceSet64::with_real_strengths(pos, &vec![1.0; 500]).unwrap();
//! let evals = EvalSet64::at_sources(&sources);
//! let mut engine = FmmEngine64::new(FmmConfig::default()).unwrap();
//! let report = engine.evaluate(&sources, &evals).unwrap();
//! assert_eq!(report.potentials.len(), 500);
//! ```

pub mod backend;
pub mod connectivity;
pub mod cost;
pub mod engine;
pub mod error;
pub mod expansions;
pub mod kernel;
pub mod points;
pub mod pyramid;
pub mod rng;
pub mod scalar;

pub use backend::{BackendKind, Capability, NearFieldBackend, NearFieldJob, PoolBackend, SerialBackend, ThrottledBackend};
pub use connectivity::{classify_level, theta_criterion, BoxLinks, Connectivity, LevelConnectivity, Separation};
pub use cost::{estimate_cost, CostEstimate};
pub use engine::{
    downward_pass, nearfield_eval, upward_pass, EvalReport, FmmConfig, FmmEngine, PhaseTimings, WorkCounters,
};
pub use error::{FmmError, Result};
pub use expansions::{choose_p, table_p, table_p_extended, Expansion, ExpansionKind, Operators, PRule};
pub use kernel::{gaussian_smoother, p2p_direct, Kernel, Smoother};
pub use points::{EvalPoint, EvalSet, SourcePoint, SourceSet};
pub use pyramid::{finest_box_count, MBox, Pyramid};
pub use scalar::{Scalar, C};

pub type C64 = C<f64>;
pub type C32 = C<f32>;
pub type SourceSet64 = SourceSet<f64>;
pub type EvalSet64 = EvalSet<f64>;
pub type Pyramid64 = Pyramid<f64>;
pub type FmmEngine64 = FmmEngine<f64>;
pub type FmmEngine32 = FmmEngine<f32>;
pub type EvalReport64 = EvalReport<f64>;
