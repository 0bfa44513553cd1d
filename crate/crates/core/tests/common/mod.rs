#![allow(dead_code)]

pub mod dip_oracle;
pub mod linkage_oracle;
