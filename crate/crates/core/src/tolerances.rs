//! Tolerances and default numerical parameters.
//!
//! Every threshold used by the verification pipeline lives here so that the
//! report can echo exactly what was applied.

/// Default truncation radius. Q is below 1e-12 beyond it.
pub const DEFAULT_RMAX: f64 = 30.0;

/// Smallest truncation radius accepted for a ground-state solve.
pub const MIN_RMAX: f64 = 20.0;

/// Default relative tolerance of the adaptive integrator.
pub const DEFAULT_TOL: f64 = 1e-11;

/// Accepted range of integrator tolerances.
pub const TOL_RANGE: (f64, f64) = (1e-13, 1e-6);

/// Spacing of the stored ground-state profile.
pub const PROFILE_STEP: f64 = 0.0025;

/// Radius at which every series start is taken.
pub const ORIGIN_START: f64 = 1e-4;

/// Largest first node for which the origin series is trusted.
pub const ORIGIN_SERIES_MAX: f64 = 0.1;

/// Magnitude treated as overflow of a shot.
pub const BLOW_UP: f64 = 1e300;

/// Maximum number of bisection steps for the shooting parameter.
pub const MAX_BISECTION: usize = 200;

/// Bracket for the center value Q(0).
pub const CENTER_BRACKET: (f64, f64) = (1.0, 10.0);

/// Required sup-norm collocation residual of the stored profile.
pub const PROFILE_RESIDUAL: f64 = 1e-8;

/// Allowed deviation of the fitted decay rate from 1.
pub const DECAY_RATE_TOL: f64 = 1e-3;

/// Offset used to probe the half-open spectral interval from inside.
pub const GAP_DELTA: f64 = 1e-6;

/// Step sizes used for Richardson extrapolation of matrix eigenvalues.
pub const RICHARDSON_STEPS: [f64; 3] = [4e-3, 2e-3, 1e-3];

/// Dual-engine eigenvalue agreement.
pub const DUAL_ENGINE: f64 = 1e-6;

/// Bisection tolerance of the shooting eigensolver.
pub const SHOOTING_TOL: f64 = 1e-10;

/// Tail-slope magnitude above which the threshold is declared regular.
pub const SLOPE_THRESHOLD: f64 = 1e-3;

/// Fit residual allowed per unit slope and unit radius.
pub const FIT_RESIDUAL_FACTOR: f64 = 1e-6;

/// Pointwise slack of the shifted Sturm comparison.
pub const COMPARISON_SLACK: f64 = 1e-8;

/// Root location tolerance for zeros of threshold solutions.
pub const ZERO_TOL: f64 = 1e-10;

/// Relative tolerance of the Rayleigh identity.
pub const RAYLEIGH_REL: f64 = 1e-7;

/// Absolute tolerance of the Rayleigh identity at the degenerate end.
pub const RAYLEIGH_ABS: f64 = 1e-8;

/// Relative residual of the non-radial integral identity.
pub const NONRADIAL_REL: f64 = 1e-6;

/// Relative residual of Nehari constraints for true members.
pub const NEHARI_REL: f64 = 1e-6;

/// Minimum envelope ratio for the embedded-eigenvalue scan.
pub const ENVELOPE_RATIO: f64 = 0.1;

/// Embedded-eigenvalue scan points.
pub const EMBEDDED_LAMBDAS: [f64; 5] = [1.1, 1.5, 2.0, 3.0, 5.0];

/// Tail share above which a quadrature is declared non-decaying.
pub const TAIL_SHARE: f64 = 0.01;

/// Spacing of sampled linear solutions (eigenfunctions, threshold
/// solutions).
pub const SAMPLE_STEP: f64 = 0.01;
