pub mod brockett;
pub mod dti;
pub mod insar;
pub mod rayleigh;
pub mod verify;

pub use brockett::{cmd_brockett, BrockettArgs, BrockettReport};
pub use dti::{cmd_dti, DtiArgs, DtiReport, ScheduleRun};
pub use insar::{cmd_insar, InsarArgs, InsarReport};
pub use rayleigh::{cmd_rayleigh, RayleighArgs, RayleighReport};
pub use verify::{cmd_verify, VerifyArgs, VerifyReport};
