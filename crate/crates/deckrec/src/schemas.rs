//! JSON Schemas (draft 2020-12) of every document the tool reads or writes.
//! The files live in the crate's `schemas/` directory.

use crate::commands::Command;

/// Population file.
pub const POPULATION: &str = include_str!("../schemas/population.schema.json");
/// Deck file and `estimate-deck` output.
pub const DECK: &str = include_str!("../schemas/deck.schema.json");
/// Polynomial file.
pub const POLYNOMIAL: &str = include_str!("../schemas/polynomial.schema.json");
/// `certificate` output.
pub const CERTIFICATE: &str = include_str!("../schemas/certificate.schema.json");
/// Hard-pair document.
pub const HARD_PAIR: &str = include_str!("../schemas/hard_pair.schema.json");
/// `lowerbound` output.
pub const LOWERBOUND: &str = include_str!("../schemas/lowerbound.schema.json");
/// `recover` output.
pub const RECOVERY: &str = include_str!("../schemas/recovery.schema.json");
/// `simulate` output.
pub const SIMULATE: &str = include_str!("../schemas/simulate.schema.json");
/// `verify` output.
pub const VERIFY: &str = include_str!("../schemas/verify.schema.json");
/// Error document.
pub const ERROR: &str = include_str!("../schemas/error.schema.json");

/// Schema of the result document of `cmd`.
pub fn for_command(cmd: Command) -> &'static str {
    match cmd {
        Command::Simulate => SIMULATE,
        Command::EstimateDeck => DECK,
        Command::Recover => RECOVERY,
        Command::Lowerbound => LOWERBOUND,
        Command::Certificate => CERTIFICATE,
        Command::Verify => VERIFY,
    }
}
