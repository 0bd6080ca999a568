//! Store-and-forward sync between the button and the host.

pub mod host;
pub mod link;
pub mod session;
pub mod wire;

pub use host::{
    map_to_wall, ClockAnchor, DeviceCursor, IngestOutcome, OverflowGap, SyncError, SyncHost,
};
pub use link::LinkSchedule;
pub use session::{
    run_session, DeviceAction, LinkStats, LogEntry, LogEvent, ScriptedAction, SessionConfig,
    Transcript,
};
pub use wire::{BatchEvent, Hello, SyncAck, SyncBatch, SyncUpload, WireError};
