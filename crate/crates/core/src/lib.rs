//! Executable modal analysis of arithmetic potentialism.
//!
//! * [`formula`]: propositional modal syntax.
//! * [`kripke`], [`pretree`]: finite Kripke semantics and pre-tree frames.
//! * [`decide`]: membership in S4, S4.2, S4.3 and S5 with countermodels.
//! * [`system`], [`control`]: potentialist systems and control statements
//!   (switches, dials, buttons, railway switches, railyard labelings).
//! * [`simulate`]: replaying propositional countermodels inside a system.
//! * [`sequence`]: the universal-sequence system of finite sequences under
//!   end-extension, with exact possibility oracles.
//! * [`universal`]: the staged universal algorithm over fragment oracles.
//! * [`maximality`]: consistency-based modal oracles over toy theories and
//!   the maximality principle.

pub mod control;
pub mod decide;
pub mod error;
pub mod formula;
pub mod kripke;
pub mod maximality;
pub mod pretree;
pub mod sequence;
pub mod simulate;
pub mod system;
pub mod universal;

pub use decide::{decide, DecisionResult, TheoryId, Verdict};
pub use error::{Error, Result};
pub use formula::{parse, Formula, ModalFormula};
pub use kripke::{FrameClasses, KripkeModel};
pub use pretree::{enumerate_pretrees, PreTree, PreTreeModel};
pub use system::System;
