pub mod builtin;
pub mod dsl;
pub mod expr;
pub mod graph;
pub mod lie;
pub mod model;
pub mod synthetic;
