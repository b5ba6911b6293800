//! Discrete-event simulator of service-period (SP) and contention-based
//! (CBAP) channel access in a WiGig-style mmWave WLAN.

pub mod config;
pub mod kernel;
pub mod kpi;
pub mod mac;
pub mod plot;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod schedule;
pub mod sim;
pub mod time;
pub mod traffic;
