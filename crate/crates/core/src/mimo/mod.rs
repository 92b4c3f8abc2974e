//! System model: constellations, channels, transmissions.

mod channel;
mod constellation;
pub mod dump;
mod transmit;

pub use channel::{
    complex_gaussian_matrix, estimate_channel, gen_channel, gen_los_with_angles, power_control, steering_vector,
    ChannelCondition, ChannelModel, ChannelRealization, LosParams, POWER_CONTROL_DB,
};
pub use constellation::Constellation;
pub use transmit::{noise_variance, transmit, transmit_bits, transmit_symbols, TransmissionBatch};
