//! Exact moments of the total mass `Z_n = B_n(1)` and of its normalisations.

mod brute;
mod extfloat;
mod gaussian;
mod recursion;
mod table;

pub use brute::{brute_force_exact, brute_force_moments, oracle_mode, OracleMode, MAX_ORACLE_NODES};
pub use extfloat::ExtFloat;
pub use gaussian::{gaussian_even_moments, gaussian_even_moments_exact};
pub use recursion::{
    epsilon_moment, limit_z_moments, max_order, normalized_moment_recursion, residual_sigma,
    second_moment_closed_form, second_moment_fixed_point, sigma, tilde_moment_solver,
    z_moment_recursion,
};
pub use table::{EntryFlag, MomentEntry, MomentTable, TableKind};
