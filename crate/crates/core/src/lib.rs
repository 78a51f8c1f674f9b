pub mod codes;
pub mod field;
pub mod lrc_protocol;
pub mod presets;
pub mod privacy;
pub mod protocol;
pub mod quantum;
