#![allow(dead_code)]

pub mod gram;
pub mod random;
pub mod wick;
