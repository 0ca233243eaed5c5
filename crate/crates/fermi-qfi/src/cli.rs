//! CLI front end (stub).
pub fn run() -> i32 { 0 }
