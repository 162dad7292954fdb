pub mod bvn;
pub mod exec;
