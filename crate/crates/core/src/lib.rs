//! Active self-tracking with a one-button wearable.
//!
//! The pipeline runs from a simulated button ([`device`]) over an unreliable
//! store-and-forward link ([`sync`]) into an append-only event store
//! ([`store`]). Presses are decoded into observations ([`decoder`]) and
//! summarized by hour, weekday and day ([`analytics`]). [`scenario`]
//! generates the synthetic case dataset used by tests and demos.

pub mod analytics;
pub mod decoder;
pub mod device;
pub mod model;
pub mod scenario;
pub mod store;
pub mod sync;
pub mod time;

pub use decoder::{decode, decode_per_device, DecodeError, Decoded};
pub use model::{Annotation, AnnotationKind, DeviceId, Observation, Quality, RawPress};
pub use time::{local_parts, CivilDate, DatasetConfig, LocalParts, Weekday};
