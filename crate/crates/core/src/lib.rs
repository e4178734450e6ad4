//! Bit-exact simulator of a compute-enabled MRAM crossbar running subsequence
//! dynamic time warping, with a latency / energy / endurance cost model.
//!
//! Layers, bottom-up:
//!
//! - [`sdtw`]: host reference implementation, generic over [`Sample`] types.
//! - [`crossbar`]: 256x256 subarrays, reconfigurable sense amplifiers and the
//!   bit-serial column-parallel operation set.
//! - [`mapper`]: replication / batching of the reference over compute columns.
//! - [`wavefront`]: the diagonal-wavefront execution of sDTW on the crossbar.
//! - [`cost`]: ledgers, technology parameters, time / energy / endurance.
//! - [`dse`]: workloads, sweeps and the CSV report.

pub mod cost;
pub mod crossbar;
pub mod dse;
pub mod error;
pub mod io;
pub mod mapper;
pub mod metric;
pub mod scalar;
pub mod sdtw;
pub mod series;
pub mod wavefront;

pub use cost::{CostLedger, DeviceConfig, TechParams};
pub use error::TsaError;
pub use metric::{dist, DistanceMetric};
pub use scalar::{Accumulator, DType, Sample};
pub use sdtw::{RowZeroInit, SdtwResult};
pub use series::{Mode, QuerySet, TimeSeries};

pub type SeriesI8 = TimeSeries<i8>;
pub type SeriesI16 = TimeSeries<i16>;
pub type SeriesI32 = TimeSeries<i32>;
pub type SeriesI64 = TimeSeries<i64>;
pub type SeriesF32 = TimeSeries<f32>;
pub type SeriesF64 = TimeSeries<f64>;

pub type ResultI16 = SdtwResult<i32>;
pub type ResultI32 = SdtwResult<i64>;
pub type ResultF64 = SdtwResult<f64>;
