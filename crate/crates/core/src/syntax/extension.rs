use std::fmt;

macro_rules! extensions {
    ($($variant:ident => $name:literal,)*) => {
        /// A language extension known to this implementation.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Extension {
            $($variant,)*
        }

        impl Extension {
            pub const ALL: &'static [Extension] = &[$(Extension::$variant,)*];

            /// Pragma spelling, including the leading `#`.
            pub fn name(self) -> &'static str {
                match self {
                    $(Extension::$variant => $name,)*
                }
            }
        }
    };
}

extensions! {
    UnitType => "#unit-type",
    Pairs => "#pairs",
    Tuples => "#tuples",
    Records => "#records",
    SumTypes => "#sum-types",
    Variants => "#variants",
    Lists => "#lists",
    LetBindings => "#let-bindings",
    LetrecBindings => "#letrec-bindings",
    NestedFunctionDeclarations => "#nested-function-declarations",
    MultiparameterFunctions => "#multiparameter-functions",
    Currying => "#currying",
    TypeAscriptions => "#type-ascriptions",
    Sequencing => "#sequencing",
    StructuralPatterns => "#structural-patterns",
    GeneralRecursion => "#general-recursion",
    TypeAliases => "#type-aliases",
    NaturalLiterals => "#natural-literals",
    References => "#references",
    Panic => "#panic",
    Exceptions => "#exceptions",
    ExceptionTypeDeclaration => "#exception-type-declaration",
    OpenVariantExceptions => "#open-variant-exceptions",
    StructuralSubtyping => "#structural-subtyping",
    TopType => "#top-type",
    BottomType => "#bottom-type",
    TypeCast => "#type-cast",
    UniversalTypes => "#universal-types",
    RecursiveTypes => "#recursive-types",
    TypeReconstruction => "#type-reconstruction",
}

impl fmt::Display for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An extension name as written in an `extend with` pragma. It may or may
/// not name a registered extension; see [`registry_lookup`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtensionName(pub String);

impl ExtensionName {
    pub fn new(name: impl Into<String>) -> Self {
        ExtensionName(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn resolve(&self) -> Lookup {
        registry_lookup(&self.0)
    }
}

impl fmt::Display for ExtensionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<Extension> for ExtensionName {
    fn from(ext: Extension) -> Self {
        ExtensionName(ext.name().to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lookup {
    Known(Extension),
    Unknown,
}

impl Lookup {
    pub fn known(self) -> Option<Extension> {
        match self {
            Lookup::Known(ext) => Some(ext),
            Lookup::Unknown => None,
        }
    }
}

pub fn registry_lookup(name: &str) -> Lookup {
    Extension::ALL
        .iter()
        .copied()
        .find(|ext| ext.name() == name)
        .map_or(Lookup::Unknown, Lookup::Known)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_and_unknown_names() {
        assert_eq!(
            registry_lookup("#structural-subtyping"),
            Lookup::Known(Extension::StructuralSubtyping)
        );
        assert_eq!(registry_lookup("#pairs"), Lookup::Known(Extension::Pairs));
        assert_eq!(registry_lookup("#flying-cars"), Lookup::Unknown);
        assert_eq!(registry_lookup("structural-subtyping"), Lookup::Unknown);
    }

    #[test]
    fn registry_round_trips_every_name() {
        assert_eq!(Extension::ALL.len(), 30);
        for &ext in Extension::ALL {
            assert!(ext.name().starts_with('#'));
            assert_eq!(registry_lookup(ext.name()), Lookup::Known(ext));
        }
    }
}
