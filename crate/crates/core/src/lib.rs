pub mod counting;
pub mod edges;
pub mod error;
pub mod experiment;
pub mod field;
pub mod geometry;
pub mod orthogonal;
pub mod search;
pub mod sharpness;
