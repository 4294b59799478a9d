//! Built-in problems: the two circuit models, their drive signals and
//! nonlinear elements, named parameter sets, and a manufactured problem.

mod circuits;
mod presets;
mod signals;

pub use circuits::{
    circuit1, circuit1_projectors, circuit2, circuit2_projectors, manufacture, manufactured_circuit2, Circuit1Params,
    Circuit2Params, Manufactured,
};
pub use presets::{preset_by_name, Preset, NAMES as PRESET_NAMES};
pub use signals::{power_nonlinearity, sawtooth, sine_nonlinearity, triangular, Nonlinearity, Signal, SineKind};
