pub mod capsweep;
pub mod lab;
pub mod simulate;
pub mod sweep;
