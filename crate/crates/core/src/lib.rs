//! Nonreference quality scoring and classical denoising for DVS event streams.
//!
//! * [`event`]: event model, validation and slicing.
//! * [`io`]: text/binary formats, synthetic scenes, noise and hot pixels.
//! * [`metrics`]: image of warped events, TSS, spatial support, NTSS, `L_N`,
//!   ESR and MESR.
//! * [`filters`]: seven streaming denoisers behind one contract.
//! * [`bench`]: benchmark plans, runner and CSV/JSON reports.
//! * [`cli`]: the `evdn` command-line interface.

pub mod bench;
pub mod cli;
pub mod error;
pub mod event;
pub mod filters;
pub mod io;
pub mod metrics;

pub use error::{Error, Result};
pub use event::{Event, EventPacket, Polarity, SensorGeometry};
