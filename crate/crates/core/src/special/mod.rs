//! Gamma and Mittag-Leffler functions.

pub mod gamma;
pub mod mittag_leffler;
pub mod table;

pub use gamma::{gamma_fn, ln_gamma, rgamma};
pub use mittag_leffler::{mittag_leffler, mittag_leffler_series, MLParams, DEFAULT_TERM_CAP};
pub use table::MlTable;
