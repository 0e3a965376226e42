//! Integration of heterogeneous web data into a relational staging store.
//!
//! The pipeline has two halves. The first extracts metadata from text,
//! markup, images, delimited data exports and media files into a
//! [`model::ComplexObject`] and writes it as an XML document that is valid
//! against the bundled DTD ([`MLFD_DTD`]). The second compiles any DTD into
//! a relational schema, shreds valid documents into rows, loads them into
//! an operational data store, and exports them back.

pub mod dtd;
pub mod extract;
pub mod mapper;
pub mod model;
pub mod ods;
pub mod serialize;
pub mod sidecar;
pub mod xml;

/// The logical model of a complex object, shipped as `mlfd.dtd`.
pub const MLFD_DTD: &str = include_str!("../resources/mlfd.dtd");

/// System identifier written in the `DOCTYPE` of generated documents.
pub const MLFD_SYSTEM_ID: &str = "mlfd.dtd";
