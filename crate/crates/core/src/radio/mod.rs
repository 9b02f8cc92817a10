//! Radio interface model.
//!
//! The interface is a four-state machine. Any packet puts it in continuous
//! reception (CR); after `t1`, `t2` and `t3` seconds without activity it
//! steps down to short DRX, long DRX and finally idle:
//!
//! ```text
//!            packet                 packet
//!   +------------------------+  +-----------+
//!   v                        |  v           |
//!   CR --t1--> SHORT DRX --t2--> LONG DRX --t3--> IDLE
//!   ^                                              |
//!   +------------------- packet -------------------+
//! ```
//!
//! CR draws constant power. The three low-power states alternate between a
//! short wake-up window and sleep, so their energy is
//! `p_sleep * t_sleep + p_on * t_on` over the time spent in the state.

mod energy;
mod fsm;
mod profile;

pub use energy::{energy_between, energy_of_interval, AccountingMode};
pub use fsm::{build_state_timeline, fsm_advance, RadioFsm, StateInterval, StateTimeline};
pub use profile::{DutyCycle, FsmTimers, PowerProfile, RadioState};
