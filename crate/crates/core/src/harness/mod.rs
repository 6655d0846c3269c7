//! Workload generation, replay, verification and benchmarks behind the CLI.

pub mod bench;
pub mod gen;
pub mod run;
pub mod trace;
pub mod verify;

pub use bench::{bench, BenchConfig, BenchRecord};
pub use gen::{generate, GenConfig, Model};
pub use run::{run, strip_timing, BatchRecord, Failure, RunConfig, RunReport, Structure, Summary};
pub use trace::{StructureFile, Trace};
pub use verify::{verify, Certificate, StretchReport, VerifyParams};
