//! Support code for the `mflp` binary: the JSON result record and the SVG
//! scatter renderer.

pub mod record;
pub mod svg;
