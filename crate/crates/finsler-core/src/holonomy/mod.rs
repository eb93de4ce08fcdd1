//! Holonomy machinery: polar profiles, nonlinear parallel transport, loop
//! holonomy maps, and the rank-4 certification of infinite-dimensional
//! holonomy on surfaces.

pub mod certify;
pub mod profile;
pub mod rank;
pub mod transport;

pub use certify::{
    certify, certify_spec, CertVerdict, CertificationReport, CertifyParams, ConditionTag,
    HypothesisCheck,
};
pub use profile::{Convexity, PolarProfile, ProfilePartials};
pub use rank::{
    gram_rank, independence_quadruple, independence_quadruple_randers, GramCertificate,
    IndicatrixFunctionSample, QuadrupleKind, RankVerdict,
};
pub use transport::{
    circle_directions, loop_holonomy, nonlinearity_defect, parallel_transport, Curve,
    IndicatrixMap, TransportResult,
};
