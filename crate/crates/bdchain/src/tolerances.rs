//! Pinned tolerance gates used by the verification command and the
//! acceptance test suite. Each constant states the numerical basis for its
//! value; no check may invent an ad-hoc threshold.

/// Max Riccati recurrence residual for the general solution. The sequence
/// is built by an O(N) recurrence over O(1) rates, so residuals sit near
/// machine precision; 1e-10 leaves four orders of headroom for skewed
/// schedules evaluated in log space.
pub const RICCATI_RESIDUAL_MAX: f64 = 1e-10;

/// Max residual for the particular solution, which involves no weight
/// products at all and stays within a couple of ulps.
pub const PARTICULAR_RESIDUAL_MAX: f64 = 1e-12;

/// Elementwise gap between a closed form and the general product formula on
/// the same schedule. Both are O(N) float products of the same factors in
/// different algebraic arrangements.
pub const CLOSED_FORM_ABS: f64 = 1e-12;

/// Total variation between the family member at D = -1e12 and the classical
/// stationary solution. The deviation per factor is O(f_n / |D|), summed
/// against exponentially decaying probabilities.
pub const LIMIT_RECOVERY_TV: f64 = 1e-6;

/// Total variation between a product-form distribution and the null-space
/// oracle of the matching generator: two independent O(N) routes to the
/// same vector.
pub const ORACLE_TV: f64 = 1e-10;

/// Relative detailed-balance defect `|p_{n+1} d_{n+1} - p_n b'_n| / (p_n b'_n)`
/// for the effective schedule; the two sides differ only by rounding of the
/// same factor product.
pub const DETAILED_BALANCE_REL: f64 = 1e-12;

/// Elementwise round-trip error of the substitution and its inverse on a
/// strictly positive distribution.
pub const ROUND_TRIP_ABS: f64 = 1e-12;

/// Total variation between a long stochastic run and the analytic
/// prediction. Statistical, not arithmetic: sized for >= 1e6 jump events
/// on desk-scale chains.
pub const EMPIRICAL_TV: f64 = 0.02;

/// Total variation at which time evolution is considered relaxed onto the
/// stationary vector.
pub const RELAXATION_TV: f64 = 1e-6;

/// Allowed drift of total mass under time evolution; the generator columns
/// sum to zero, so only integrator rounding accumulates.
pub const MASS_CONSERVATION_ABS: f64 = 1e-10;

/// Allowed deviation of a normalized vector's total from one.
pub const NORMALIZATION_ABS: f64 = 1e-12;

/// Max `|L p|` component for a stationary vector paired with its own
/// generator via the effective-schedule construction.
pub const STATIONARITY_RESIDUAL_MAX: f64 = 1e-12;

/// Max `|L p|` component for the classical solution, which satisfies
/// detailed balance bond by bond in exact arithmetic.
pub const CLASSICAL_STATIONARITY_RESIDUAL_MAX: f64 = 1e-14;

/// Allowed deviation of a probability column re-parsed from CSV text; the
/// 17-significant-digit decimal format round-trips doubles exactly, so this
/// only absorbs the re-summation order.
pub const CSV_REPARSE_ABS: f64 = 1e-9;
