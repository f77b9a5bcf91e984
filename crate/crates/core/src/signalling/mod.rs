//! The signalling test: Alice encodes a bit in her choice of basis, Bob
//! clones his half of each pair and tries to read the bit off his clones.

mod channel;
mod protocol;
mod verify;

pub use channel::{channel_accuracy, guess_rule, ChannelReport, Guess, GuessRecord};
pub use protocol::{
    analytic_no_signal_certificate, run_protocol, simulate_pair, simulate_pairs, transmit_message, A2Choice, Cloner,
    Estimate, PairOutcome, ProtocolConfig, SettingStats, SignalStats, TallyTable, DEFAULT_MU,
};
pub use verify::{
    column_distribution, exact_copy_leakage, group_sizes, group_verify, group_verify_joint, joint_column_distribution,
    junk_state, materialize_output, Column,
};
