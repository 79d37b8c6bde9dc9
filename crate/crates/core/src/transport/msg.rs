//! Registered wire message types.

pub const HELLO: u8 = 0x01;
pub const ERROR: u8 = 0x02;

pub const W_NAOR_R: u8 = 0x10;
pub const W_COMS: u8 = 0x11;
pub const W_CHALLENGE: u8 = 0x12;
pub const W_OPENING: u8 = 0x13;
pub const W_DECOMMIT: u8 = 0x14;
pub const W_VERDICT: u8 = 0x15;

pub const SC_NAOR_BATCH: u8 = 0x20;
pub const SC_WCOMS_BATCH: u8 = 0x21;
pub const SC_CHALLENGE_BATCH: u8 = 0x22;
pub const SC_OPENING_BATCH: u8 = 0x23;
pub const SC_COIN_NAOR: u8 = 0x24;
pub const SC_COIN_COMMIT: u8 = 0x25;
pub const SC_COIN_CHALLENGE: u8 = 0x26;
pub const SC_COIN_OPENING: u8 = 0x27;
pub const SC_COIN_R2: u8 = 0x28;
pub const SC_COIN_OPEN: u8 = 0x29;
pub const SC_SUBSET_OPEN: u8 = 0x2a;
pub const SC_VERDICT: u8 = 0x2b;
pub const SC_DECOMMIT: u8 = 0x2c;

/// One round of the n parallel commitments of the commit stage. The payload
/// starts with the wrapped `SC_*` type.
pub const ECNP_COMMIT_ROUND: u8 = 0x30;
pub const ECNP_COMMIT_VERDICT: u8 = 0x31;
pub const ECNP_VIEW_NAOR: u8 = 0x32;
pub const ECNP_VIEW_COMS: u8 = 0x33;
/// One round of the verifier's commitment to its coin, wrapping an `SC_*` type.
pub const ECNP_COIN_ROUND: u8 = 0x34;
pub const ECNP_R2: u8 = 0x35;
pub const ECNP_COIN_OPEN: u8 = 0x36;
pub const ECNP_OPEN: u8 = 0x37;
pub const ECNP_VERDICT: u8 = 0x38;
pub const ECNP_DECOMMIT: u8 = 0x39;

pub const COIN_R2: u8 = 0x40;
pub const COIN_R1: u8 = 0x41;

pub const SOCOM_COMMIT: u8 = 0x50;
pub const SOCOM_RECEIPT: u8 = 0x51;
pub const SOCOM_REVEAL: u8 = 0x52;
pub const SOCOM_OPEN: u8 = 0x53;

/// Set on every fragment of a logical message except the last.
pub const CONTINUATION: u8 = 0x80;

const TABLE: &[(u8, &str)] = &[
    (HELLO, "HELLO"),
    (ERROR, "ERROR"),
    (W_NAOR_R, "W_NAOR_R"),
    (W_COMS, "W_COMS"),
    (W_CHALLENGE, "W_CHALLENGE"),
    (W_OPENING, "W_OPENING"),
    (W_DECOMMIT, "W_DECOMMIT"),
    (W_VERDICT, "W_VERDICT"),
    (SC_NAOR_BATCH, "SC_NAOR_BATCH"),
    (SC_WCOMS_BATCH, "SC_WCOMS_BATCH"),
    (SC_CHALLENGE_BATCH, "SC_CHALLENGE_BATCH"),
    (SC_OPENING_BATCH, "SC_OPENING_BATCH"),
    (SC_COIN_NAOR, "SC_COIN_NAOR"),
    (SC_COIN_COMMIT, "SC_COIN_COMMIT"),
    (SC_COIN_CHALLENGE, "SC_COIN_CHALLENGE"),
    (SC_COIN_OPENING, "SC_COIN_OPENING"),
    (SC_COIN_R2, "SC_COIN_R2"),
    (SC_COIN_OPEN, "SC_COIN_OPEN"),
    (SC_SUBSET_OPEN, "SC_SUBSET_OPEN"),
    (SC_VERDICT, "SC_VERDICT"),
    (SC_DECOMMIT, "SC_DECOMMIT"),
    (ECNP_COMMIT_ROUND, "ECNP_COMMIT_ROUND"),
    (ECNP_COMMIT_VERDICT, "ECNP_COMMIT_VERDICT"),
    (ECNP_VIEW_NAOR, "ECNP_VIEW_NAOR"),
    (ECNP_VIEW_COMS, "ECNP_VIEW_COMS"),
    (ECNP_COIN_ROUND, "ECNP_COIN_ROUND"),
    (ECNP_R2, "ECNP_R2"),
    (ECNP_COIN_OPEN, "ECNP_COIN_OPEN"),
    (ECNP_OPEN, "ECNP_OPEN"),
    (ECNP_VERDICT, "ECNP_VERDICT"),
    (ECNP_DECOMMIT, "ECNP_DECOMMIT"),
    (COIN_R2, "COIN_R2"),
    (COIN_R1, "COIN_R1"),
    (SOCOM_COMMIT, "SOCOM_COMMIT"),
    (SOCOM_RECEIPT, "SOCOM_RECEIPT"),
    (SOCOM_REVEAL, "SOCOM_REVEAL"),
    (SOCOM_OPEN, "SOCOM_OPEN"),
];

pub fn name(code: u8) -> Option<&'static str> {
    TABLE.iter().find(|(c, _)| *c == code).map(|(_, n)| *n)
}

pub fn is_registered(code: u8) -> bool {
    name(code & !CONTINUATION).is_some()
}

pub fn all() -> impl Iterator<Item = (u8, &'static str)> {
    TABLE.iter().copied()
}
