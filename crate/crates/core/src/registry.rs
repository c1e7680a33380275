//! Named registries of interchangeable algorithm variants.
//!
//! Each numerical step that admits several implementations (Perron data,
//! asymptotic variance) is expressed as a trait; implementations register a
//! constructor under a stable name and are selected at run time from
//! configuration.

use std::sync::Arc;

use crate::error::{Error, Result};

type Factory<T> = Box<dyn Fn() -> Arc<T> + Send + Sync>;

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<(&'static str, Factory<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: Vec::new(),
        }
    }

    /// Register a constructor; a later registration under the same name wins.
    pub fn register<F>(&mut self, name: &'static str, factory: F)
    where
        F: Fn() -> Arc<T> + Send + Sync + 'static,
    {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, Box::new(factory)));
    }

    pub fn create(&self, name: &str) -> Result<Arc<T>> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, f)| f())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|(n, _)| *n == name)
    }
}

impl<T: ?Sized> std::fmt::Debug for Registry<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registry")
            .field("kind", &self.kind)
            .field("entries", &self.names())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter: Send + Sync {
        fn greet(&self) -> String;
    }

    struct Plain;
    impl Greeter for Plain {
        fn greet(&self) -> String {
            "hi".into()
        }
    }

    struct Loud;
    impl Greeter for Loud {
        fn greet(&self) -> String {
            "HI".into()
        }
    }

    #[test]
    fn lookup_by_name() {
        let mut r: Registry<dyn Greeter> = Registry::new("greeter");
        r.register("plain", || Arc::new(Plain));
        r.register("loud", || Arc::new(Loud));
        assert_eq!(r.create("loud").unwrap().greet(), "HI");
        assert_eq!(r.names(), ["plain", "loud"]);
        let err = r.create("quiet").err().unwrap().to_string();
        assert!(err.contains("unknown greeter strategy 'quiet'"));
        assert!(err.contains("plain, loud"));
    }

    #[test]
    fn reregistration_replaces() {
        let mut r: Registry<dyn Greeter> = Registry::new("greeter");
        r.register("x", || Arc::new(Plain));
        r.register("x", || Arc::new(Loud));
        assert_eq!(r.names().len(), 1);
        assert_eq!(r.create("x").unwrap().greet(), "HI");
    }
}
