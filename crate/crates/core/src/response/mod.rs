//! Dressed mode dynamics: the transformed susceptibility `gamma~(k,s)`, the
//! response functions `alpha(k,t)`, `beta(k,t)` by a time-domain Volterra
//! route and by Laplace inversion, and the on-shell limit of `gamma~`.

mod dispersion;
mod mode;
mod on_shell;

pub use dispersion::{gamma_tilde, BoundMode, Dispersion, DispersionSample};
pub use mode::{
    max_step, mode_kernel, mode_kernel_series, mode_response_laplace, mode_response_volterra,
    ModeResponse, VolterraConfig, DIVERGENCE_LIMIT,
};
pub use on_shell::{on_shell_limit, OnShellLimit};

pub(crate) use mode::driven_mode;
