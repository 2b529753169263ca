//! Name-keyed registries of interchangeable strategies.
//!
//! Coefficient generators, repair schemes, helper-selection policies and
//! byte packers are each a trait object family. Every family exposes a
//! `default_registry()` listing its built-in implementations; callers can
//! register more before handing the registry to a cluster or CLI.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Something that can be looked up by a stable name.
pub trait Named {
    fn name(&self) -> &'static str;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {family} {name:?} (available: {available})")]
pub struct UnknownName {
    pub family: &'static str,
    pub name: String,
    pub available: String,
}

pub struct Registry<T: ?Sized> {
    family: &'static str,
    entries: BTreeMap<&'static str, Arc<T>>,
    order: Vec<&'static str>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new(family: &'static str) -> Self {
        Self {
            family,
            entries: BTreeMap::new(),
            order: Vec::new(),
        }
    }

    /// Adds an entry; an entry with the same name is replaced in place.
    pub fn register(&mut self, entry: Arc<T>) {
        let name = entry.name();
        if self.entries.insert(name, entry).is_none() {
            self.order.push(name);
        }
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>, UnknownName> {
        self.entries.get(name).cloned().ok_or_else(|| UnknownName {
            family: self.family,
            name: name.to_string(),
            available: self.order.join(", "),
        })
    }

    /// Names in registration order.
    pub fn names(&self) -> &[&'static str] {
        &self.order
    }

    /// Entries in registration order.
    pub fn iter(&self) -> impl Iterator<Item = &Arc<T>> {
        self.order.iter().map(|n| &self.entries[n])
    }
}

impl<T: ?Sized> fmt::Debug for Registry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("family", &self.family)
            .field("names", &self.order)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter: Named {
        fn greet(&self) -> String;
    }

    struct Hello(&'static str);
    impl Named for Hello {
        fn name(&self) -> &'static str {
            self.0
        }
    }
    impl Greeter for Hello {
        fn greet(&self) -> String {
            format!("hello from {}", self.0)
        }
    }

    #[test]
    fn lookup_and_order() {
        let mut reg: Registry<dyn Greeter> = Registry::new("greeter");
        reg.register(Arc::new(Hello("b")));
        reg.register(Arc::new(Hello("a")));
        reg.register(Arc::new(Hello("b")));
        assert_eq!(reg.names(), &["b", "a"]);
        assert_eq!(reg.get("a").unwrap().greet(), "hello from a");
        let err = reg.get("zzz").err().unwrap();
        assert_eq!(err.available, "b, a");
        assert!(err.to_string().contains("unknown greeter"));
    }
}
