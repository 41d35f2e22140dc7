//! Gamma-family and Mittag-Leffler-family special functions.

mod gamma;
mod miller_ross;
mod mittag_leffler;

pub use gamma::{gamma, gamma_sign, ln_gamma, recip_gamma, GAMMA_MAX_ARG};
pub use miller_ross::{
    miller_ross, mittag_leffler_one, mittag_leffler_one_algebraic, MillerRossArg, ALGEBRAIC_MIN_POS_Z, ALGEBRAIC_MIN_Z,
};
pub use mittag_leffler::{mittag_leffler, mittag_leffler2, mittag_leffler_kernel_dt, MLArg, ML_MIN_ARG};
