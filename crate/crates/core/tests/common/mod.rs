#![allow(dead_code)]

pub mod symbol_oracle;
