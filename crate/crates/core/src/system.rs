//! Potentialist systems: worlds, accessibility and exact modal truth.

use std::fmt;

use crate::error::{Error, Result};
use crate::formula::{Formula, ModalFormula};
use crate::kripke::KripkeModel;

/// A potentialist system as seen by the control verifiers and simulation
/// engines.
///
/// `worlds` lists the worlds on which defining conditions are checked: all
/// worlds of a finite system, or a window of an infinite one. `holds` must be
/// exact for modal formulas even on a window, i.e. `<>` ranges over every
/// accessible world of the whole system.
pub trait System {
    type World: Clone + fmt::Debug + PartialEq;
    type Atom: Clone + fmt::Debug + fmt::Display + Ord;

    fn worlds(&self) -> Vec<Self::World>;

    fn accessible(&self, from: &Self::World, to: &Self::World) -> bool;

    fn holds(&self, w: &Self::World, f: &Formula<Self::Atom>) -> Result<bool>;

    /// Truth of `f` at each of `worlds`.
    fn holds_all(&self, worlds: &[Self::World], f: &Formula<Self::Atom>) -> Result<Vec<bool>> {
        worlds.iter().map(|w| self.holds(w, f)).collect()
    }

    fn possible(&self, w: &Self::World, f: &Formula<Self::Atom>) -> Result<bool> {
        self.holds(w, &Formula::diamond(f.clone()))
    }

    fn necessary(&self, w: &Self::World, f: &Formula<Self::Atom>) -> Result<bool> {
        self.holds(w, &Formula::boxed(f.clone()))
    }

    /// An accessible world where `f` holds, if there is one.
    fn find_accessible(&self, w: &Self::World, f: &Formula<Self::Atom>) -> Result<Option<Self::World>>;
}

impl KripkeModel {
    fn check_vars(&self, f: &ModalFormula) -> Result<()> {
        match f.atoms().into_iter().find(|v| !self.valuation().contains_key(*v)) {
            Some(v) => Err(Error::UnmappedVariable(v.clone())),
            None => Ok(()),
        }
    }
}

/// Statements over a finite model are formulas in its variables; variables
/// missing from the valuation are unevaluable.
impl System for KripkeModel {
    type World = usize;
    type Atom = String;

    fn worlds(&self) -> Vec<usize> {
        KripkeModel::worlds(self).collect()
    }

    fn accessible(&self, from: &usize, to: &usize) -> bool {
        KripkeModel::accessible(self, *from, *to)
    }

    fn holds(&self, w: &usize, f: &ModalFormula) -> Result<bool> {
        self.check_vars(f)?;
        self.eval(*w, f)
    }

    fn find_accessible(&self, w: &usize, f: &ModalFormula) -> Result<Option<usize>> {
        self.check_vars(f)?;
        let truth = self.truth_set(f);
        if *w >= self.world_count() {
            return Err(Error::UnknownWorld(*w));
        }
        Ok(self.successors(*w).iter().copied().find(|&u| truth[u]))
    }
}
