//! Name-keyed tables of interchangeable strategies.
//!
//! Every family of variants in the crate (Casimir functions, samplers, force
//! solvers, integrators, perturbations) exposes a `registry()` returning a
//! [`Registry`] of constructors. Configs and the CLI select variants by name.

use crate::error::{Error, Result};

pub struct Entry<C> {
    pub name: &'static str,
    pub summary: &'static str,
    pub build: C,
}

pub struct Registry<C> {
    kind: &'static str,
    entries: Vec<Entry<C>>,
}

impl<C> Registry<C> {
    pub fn new(kind: &'static str) -> Self {
        Registry { kind, entries: Vec::new() }
    }

    /// Adds a variant. Panics on duplicate names, which is a programming error.
    pub fn with(mut self, name: &'static str, summary: &'static str, build: C) -> Self {
        assert!(
            self.entries.iter().all(|e| e.name != name),
            "duplicate {} `{name}`",
            self.kind
        );
        self.entries.push(Entry { name, summary, build });
        self
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }

    pub fn get(&self, name: &str) -> Result<&C> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .map(|e| &e.build)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &Entry<C>> {
        self.entries.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_and_unknown() {
        let reg = Registry::new("widget").with("a", "first", 1).with("b", "second", 2);
        assert_eq!(*reg.get("b").unwrap(), 2);
        assert_eq!(reg.names(), vec!["a", "b"]);
        match reg.get("c") {
            Err(Error::UnknownStrategy { kind, known, .. }) => {
                assert_eq!(kind, "widget");
                assert_eq!(known, "a, b");
            }
            _ => panic!("expected unknown strategy"),
        }
    }

    #[test]
    #[should_panic]
    fn duplicate_names_rejected() {
        let _ = Registry::new("widget").with("a", "", 1).with("a", "", 2);
    }
}
