//! Frequency-domain model of displacement-noise-free cavity interferometers
//! and their quantum Fisher information.
//!
//! ```
//! use dfi::run::{run_sweep, Evaluator, ExecutionMode};
//! use dfi::scenario::Scenario;
//!
//! let sc = Scenario::from_toml_str("[sweep]\nf_min = 1.0\nf_max = 100.0\npoints = 3\n")?;
//! let ev = Evaluator::from_scenario(&sc)?;
//! let rows = run_sweep(&ev, &sc.sweep.frequencies(), ExecutionMode::default());
//! assert!(rows.iter().all(|r| r.is_ok()));
//! println!("sigma at 100 Hz: {:e}", rows[2].sigma.unwrap());
//! # Ok::<(), dfi::DfiError>(())
//! ```

pub mod error;
pub mod fisher;
pub mod geometry;
pub mod linalg;
pub mod noise;
pub mod optics;
pub mod output;
pub mod run;
pub mod scenario;
pub mod squeeze;

pub use error::{DfiError, Result};
