//! Exact analysis of elicitability and aggregation for output vectors under
//! conic capability constraints and linear feature maps.

pub mod aggregate;
pub mod catalog;
pub mod cones;
pub mod document;
pub mod elicit;
pub mod linsys;
pub mod model;
pub mod oracle;
pub mod power;
pub mod rational;
