//! Error-floor analysis for LDPC codes: trapping-set search with
//! deterministic impulses, error-boundary probing, and mixture
//! importance-sampling estimation of frame and bit error rates.

pub mod boundary;
pub mod catalog;
pub mod code;
pub mod construct;
pub mod decoder;
pub mod error;
pub mod search;
pub mod sim;
pub mod stats;

pub use boundary::{
    probe_boundary, q_contribution, rank_catalog, select_shift_points, BoundaryProbe, BoundaryResult,
    Ranking, Selection,
};
pub use catalog::{ClassCount, TsCatalog, TsRecord};
pub use code::{parse_alist, BitPattern, Girth, NeighborTree, TannerCode, TsClass};
pub use decoder::{
    channel_llr, decode, extract_trapping_set, Algorithm, ChannelModel, DecodeOutcome, Decoder,
    DecoderConfig,
};
pub use error::{Error, Result};
pub use sim::{
    is_estimate, mc_estimate, sample_biased, sample_nominal, weight, ISDensity, ISEstimate, MCEstimate,
    NoiseSource, SimRecord,
};
pub use search::{run_search, search_cost, ImpulsePattern, SearchParams, SearchReport};
