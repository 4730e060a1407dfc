//! Multiplicities, reflections, sampled fields, the Dunkl kernel and the
//! Dunkl operators acting on sampled fields.

mod field;
mod grid;
mod kernel;
mod operators;
mod reflection;
mod setup;

pub use field::{Domain, FieldContainer, SampledField, FIELD_VERSION};
pub use grid::{Axis, TensorGrid};
pub use kernel::{
    dunkl_kernel, dunkl_kernel_1d, dunkl_kernel_1d_imag, dunkl_kernel_1d_integral, dunkl_kernel_1d_scaled,
    dunkl_kernel_integral,
};
pub use operators::{apply_dunkl_laplacian, apply_dunkl_operator};
pub use reflection::{orbit, reflect_field, SignVector};
pub use setup::MultiplicitySetup;

pub(crate) use kernel::{kernel_imag_unit, kernel_real_scaled};
