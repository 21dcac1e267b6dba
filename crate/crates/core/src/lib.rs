//! Computations on Calabi-Yau moduli: period maps, special geometry,
//! Hodge frames, flat connections, Witten's projective connection and
//! the holomorphic anomaly as a master equation.

pub mod scalar;
pub mod series;
pub mod dd;
pub mod linalg;
pub mod exterior;
pub mod kuranishi;
pub mod poly;
pub mod picard_fuchs;
pub mod special_geometry;
pub mod torus;
pub mod connections;
pub mod hodge_frame;
pub mod quantization;
pub mod anomaly;
pub mod model;
pub mod report;
pub mod cli;
