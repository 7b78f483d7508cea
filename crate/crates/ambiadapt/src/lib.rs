//! Adaptive higher-order Ambisonics streaming for networked music
//! performance, end to end and fully deterministic: spherical-harmonics
//! encoding ([`ambi`]), a bit-exact RTP-like wire format ([`wire`]), a
//! seeded bandwidth/loss link simulator ([`netsim`]), bandwidth-driven
//! order adaptation with cross-faded transitions ([`pipeline`]), and a
//! config-driven experiment runner with a CLI ([`scenario`]).
//!
//! The `examples/` directory walks through each capability:
//!
//! - `encode_decode` — SH encoding of moving sources and loudspeaker decode
//! - `capsule_quadrature` — builtin capsule grids and quadrature validity
//! - `wire_roundtrip` — packet serialization, parsing, and hex dumps
//! - `link_saturation` — the seeded link model under overload
//! - `order_adaptation` — the full sender/receiver loop reacting to a
//!   bandwidth drop
//! - `six_stimuli` — the six experiment conditions (reference, omni,
//!   first-order, instantaneous, cross-faded, corrupted) from one scene
//!
//! Run one with `cargo run --example <name>`. The `ambiadapt` binary wraps
//! the same machinery behind `run`, `stimuli`, `validate`, and `wire-dump`
//! subcommands.

pub mod ambi;
pub mod netsim;
pub mod pipeline;
pub mod rng;
pub mod scenario;
pub mod wire;

pub use ambi::{AmbisonicFrame, Direction};
