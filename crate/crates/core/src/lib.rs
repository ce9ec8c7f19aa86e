// positivity checks are written so that NaN fails them; index loops follow
// the tensor notation
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod boundary_maps;
pub mod error;
pub mod metrics_geometry;
pub mod quadrature;
pub mod recovery;
pub mod random;
pub mod symbol_calculus;
pub mod tensor_core;

pub use error::{Error, Result};
pub use metrics_geometry::{GaugeMap, HatPair, ParameterTriple};
pub use recovery::{NormalVerdict, SymbolSampler};
pub use symbol_calculus::{MetricJet, SymbolSet};
pub use tensor_core::{Covector3, Metric2, Metric3, TwoForm3, C64};
