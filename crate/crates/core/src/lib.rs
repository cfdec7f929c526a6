//! Deterministic engine for structured deliberation among a small council of
//! delegates.
//!
//! A session moves through five phases and an eight-stage convergent flow:
//! delegates propose hypotheses, the engine clusters them into options,
//! delegates challenge and support those options with typed moves, the
//! engine compresses the field to finalists, scores them, tests for
//! convergence and, failing that, forces a decision through a deterministic
//! fallback cascade. Every session ends in a [`DecisionPacket`].
//!
//! ```
//! use dci_core::delegate::{ArchetypeKind, DelegateBox, Policy, SimulatedDelegate};
//! use dci_core::session::{CouncilMember, Criterion, SessionEnvelope};
//!
//! let council: Vec<CouncilMember> = ArchetypeKind::ALL
//!     .iter()
//!     .enumerate()
//!     .map(|(i, a)| CouncilMember { id: format!("d{i}").into(), archetype: *a })
//!     .collect();
//! let envelope = SessionEnvelope::with_defaults(
//!     "demo",
//!     "how should we ship the importer?",
//!     council,
//!     vec![Criterion { id: "value".into(), weight: 1.0 }],
//! );
//! let mut delegates: Vec<DelegateBox> = (0..4)
//!     .map(|i| Box::new(SimulatedDelegate::new(Policy::Cooperative, i)) as DelegateBox)
//!     .collect();
//! let packet = dci_core::run_session(envelope, &mut delegates).unwrap();
//! assert!(dci_core::packet::validate_completeness(&packet).is_ok());
//! ```

pub mod convergence;
pub mod delegate;
pub mod events;
pub mod grammar;
pub mod harness;
pub mod ids;
pub mod packet;
pub mod session;
pub mod workspace;

pub use convergence::{SessionOutcome, run_session, run_session_logged};
pub use delegate::{Delegate, DelegateBox};
pub use events::EventLog;
pub use grammar::{Move, parse_move, validate_move};
pub use ids::{DelegateId, MoveId, OptionId, SessionId};
pub use packet::DecisionPacket;
pub use session::SessionEnvelope;
pub use workspace::Workspace;
