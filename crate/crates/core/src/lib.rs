//! Information measures for the discrete-time Poisson channel at low signal
//! energy: mutual information with certified error budgets, the low-energy
//! expansion coefficients, bounds on the noiseless capacity and the minimum
//! energy per bit.
//!
//! ```
//! use pcl::asymptotics::{coeffs, expansion_eval};
//! use pcl::constellations::{uniform_pem, PemSpec};
//! use pcl::mi::mutual_information;
//! use pcl::types::{ChannelPoint, NoiseModel};
//!
//! let c = uniform_pem(PemSpec::new(2)?);
//! let noise = NoiseModel::poisson(1.0)?;
//! let mi = mutual_information(&ChannelPoint::new(c.clone(), noise, 1e-3)?, 1e-12)?;
//! let approx = expansion_eval(&coeffs(&c, &noise)?, 1e-3);
//! assert!((mi.nats - approx).abs() < 1e-3 * approx);
//! # Ok::<(), pcl::Error>(())
//! ```

pub mod asymptotics;
pub mod capacity;
pub mod channel;
pub mod cli;
pub mod constellations;
pub mod error;
pub mod mi;
pub mod special;
pub mod types;
pub mod unitcost;

pub use cli::SweepRecord;
pub use error::{Error, Result};
