//! Neural-network layers with hand-written gradients.

pub mod adam;
pub mod conv;
pub mod dropout;
pub mod gcn;
pub mod gradcheck;
pub mod head;
pub mod init;
pub mod pool;

pub use adam::{Adam, AdamConfig, Param};
pub use conv::{init_params, ufg_conv_backward, ufg_conv_forward, Activation, ConvCache, ConvGrads, ConvParams};
pub use dropout::dropout;
pub use gcn::{gcn_backward, gcn_forward, gcn_propagation, GcnParams};
pub use gradcheck::{finite_difference_check, FdConfig, FdReport};
pub use head::{argmax_rows, softmax, softmax_cross_entropy, Mlp};
pub use pool::{mean_pool, ufg_pool, ufg_pool_backward, PoolMode};
