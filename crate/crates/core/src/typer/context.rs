use std::collections::BTreeSet;

use crate::effects::ExceptionEnv;
use crate::syntax::{AliasMap, Extension, Type};

/// Typing context: scoped variable and type-variable bindings plus the
/// program-wide settings that typing rules consult.
#[derive(Clone, Debug, Default)]
pub struct Context {
    vars: Vec<(String, Type)>,
    type_vars: Vec<String>,
    /// Alias name to fully expanded type.
    pub aliases: AliasMap,
    pub exceptions: ExceptionEnv,
    pub extensions: BTreeSet<Extension>,
    /// Ignore extension gates (`--no-gate`).
    pub permissive: bool,
}

/// Saved scope depth, restored by [`Context::restore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mark {
    vars: usize,
    type_vars: usize,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn with_extensions(extensions: impl IntoIterator<Item = Extension>) -> Context {
        Context { extensions: extensions.into_iter().collect(), ..Context::default() }
    }

    pub fn enabled(&self, ext: Extension) -> bool {
        self.extensions.contains(&ext)
    }

    pub fn subtyping_enabled(&self) -> bool {
        self.enabled(Extension::StructuralSubtyping)
    }

    pub fn exception_type(&self) -> Option<Type> {
        self.exceptions.carrier()
    }

    pub fn bind(&mut self, name: impl Into<String>, ty: Type) {
        self.vars.push((name.into(), ty));
    }

    pub fn bind_type_var(&mut self, name: impl Into<String>) {
        self.type_vars.push(name.into());
    }

    pub fn lookup(&self, name: &str) -> Option<&Type> {
        self.vars.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn has_type_var(&self, name: &str) -> bool {
        self.type_vars.iter().any(|n| n == name)
    }

    pub fn mark(&self) -> Mark {
        Mark { vars: self.vars.len(), type_vars: self.type_vars.len() }
    }

    pub fn restore(&mut self, mark: Mark) {
        self.vars.truncate(mark.vars);
        self.type_vars.truncate(mark.type_vars);
    }

    /// Variables in scope, outermost first.
    pub fn vars(&self) -> &[(String, Type)] {
        &self.vars
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_scopes_shadow_and_restore() {
        let mut ctx = Context::new();
        ctx.bind("x", Type::Nat);
        let mark = ctx.mark();
        ctx.bind("x", Type::Bool);
        ctx.bind_type_var("T");
        assert_eq!(ctx.lookup("x"), Some(&Type::Bool));
        assert!(ctx.has_type_var("T"));
        ctx.restore(mark);
        assert_eq!(ctx.lookup("x"), Some(&Type::Nat));
        assert!(!ctx.has_type_var("T"));
        assert_eq!(ctx.mark(), mark);
    }
}
