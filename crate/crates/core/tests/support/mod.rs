//! Fixtures and reference implementations shared by the focused tests and
//! the acceptance run.

#![allow(dead_code, clippy::needless_range_loop)]

pub mod calibration;
pub mod golden;
pub mod optimality;
pub mod oracle;
