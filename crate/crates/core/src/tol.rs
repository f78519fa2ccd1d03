//! Pinned numerical tolerances.  Every threshold asserted by the
//! verification suites is defined here, once, with its basis.

/// Algebraic identities evaluated in one pass of f64 arithmetic
/// (symmetry residuals of constructed tensors, round trips).
pub const EXACT_ALGEBRA: f64 = 1e-12;

/// Idempotence of the Bianchi projection.
pub const BIANCHI_IDEMPOTENCE: f64 = 1e-13;

/// Relative cutoff on singular values when counting matrix rank.
pub const RANK_CUTOFF: f64 = 1e-10;

/// Agreement between closed-form soliton geometry and the
/// finite-difference engine (Richardson-extrapolated central
/// differences leave ~1e-9 relative error; 1e-5 is the contract).
pub const CLOSED_FORM_VS_FD: f64 = 1e-5;

/// Ricci-flow equation residual |∂_t g + 2 Ric|, finite differenced in t.
pub const FLOW_EQUATION: f64 = 1e-8;

/// Curvature evolution equation residual, relative to the largest term.
pub const CURVATURE_EVOLUTION: f64 = 1e-6;

/// Evolution identity for the limit curvature, relative to its h-norm.
pub const LIMIT_EVOLUTION: f64 = 1e-4;

/// Agreement between the two routes to the soliton defect.
pub const DEFECT_ROUTES: f64 = 1e-6;

/// Allowed deviation of fitted decay slopes from −1.
pub const SLOPE_WINDOW: f64 = 0.05;

/// Quadratic-map decomposition residual after pinning the one
/// normalization constant.
pub const Q_DECOMPOSITION: f64 = 1e-10;

/// Relative margin tolerance for cone membership verdicts.
pub const MEMBERSHIP_REL: f64 = 1e-8;

/// Sign tolerance (scaled by |R|²) in the boundary ODE-invariance checks.
pub const BOUNDARY_SIGN: f64 = 1e-8;

/// Null-witness quality required of boundary samples, relative to |R|.
pub const NULL_WITNESS: f64 = 1e-10;

/// Bianchi drift allowed per unit time along integrated ODE trajectories.
pub const ODE_BIANCHI_DRIFT: f64 = 1e-10;

/// Norm threshold past which an ODE trajectory counts as divergent.
pub const ODE_BLOWUP: f64 = 1e12;
