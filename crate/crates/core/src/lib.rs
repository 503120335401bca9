pub mod baselines;
pub mod conic;
pub mod hermitian;
pub mod model;
pub mod pipeline;
pub mod rankone;
pub mod sca;
pub mod surrogate;

mod encoding;
pub use encoding::CovarianceLayout;
