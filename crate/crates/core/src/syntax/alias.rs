use std::collections::BTreeMap;

use super::Type;
use crate::diagnostic::{Diagnostic, ErrorTag};
use crate::span::Span;

pub type AliasMap = BTreeMap<String, Type>;

/// Expands every [`Type::Alias`] in `t`, recursively through alias bodies.
///
/// The returned diagnostic carries a dummy span; callers attach the location
/// of the annotation being resolved.
pub fn resolve_alias(t: &Type, aliases: &AliasMap) -> Result<Type, Diagnostic> {
    let mut expanding = Vec::new();
    expand(t, aliases, &mut expanding)
}

fn expand(t: &Type, aliases: &AliasMap, expanding: &mut Vec<String>) -> Result<Type, Diagnostic> {
    let go = |t: &Type, expanding: &mut Vec<String>| expand(t, aliases, expanding);
    Ok(match t {
        Type::Alias(name) => {
            if expanding.iter().any(|n| n == name) {
                let mut cycle = expanding.clone();
                cycle.push(name.clone());
                return Err(Diagnostic::new(
                    ErrorTag::ERROR_CYCLIC_TYPE_ALIAS,
                    Span::DUMMY,
                    format!("type alias `{name}` is defined in terms of itself"),
                )
                .with_note(format!("cycle: {}", cycle.join(" -> "))));
            }
            let body = aliases.get(name).ok_or_else(|| {
                Diagnostic::new(
                    ErrorTag::ERROR_UNDEFINED_TYPE_ALIAS,
                    Span::DUMMY,
                    format!("undefined type alias `{name}`"),
                )
            })?;
            expanding.push(name.clone());
            let out = go(body, expanding);
            expanding.pop();
            out?
        }
        Type::Bool
        | Type::Nat
        | Type::Unit
        | Type::Top
        | Type::Bot
        | Type::Var(_)
        | Type::Meta(_) => t.clone(),
        Type::Fn(params, ret) => Type::Fn(
            params.iter().map(|p| go(p, expanding)).collect::<Result<_, _>>()?,
            Box::new(go(ret, expanding)?),
        ),
        Type::Tuple(ts) => Type::Tuple(ts.iter().map(|t| go(t, expanding)).collect::<Result<_, _>>()?),
        Type::Record(fs) => Type::Record(
            fs.iter()
                .map(|(l, t)| Ok((l.clone(), go(t, expanding)?)))
                .collect::<Result<_, Diagnostic>>()?,
        ),
        Type::Variant(fs) => Type::Variant(
            fs.iter()
                .map(|(l, t)| Ok((l.clone(), go(t, expanding)?)))
                .collect::<Result<_, Diagnostic>>()?,
        ),
        Type::Sum(l, r) => Type::sum(go(l, expanding)?, go(r, expanding)?),
        Type::List(t) => Type::list(go(t, expanding)?),
        Type::Ref(t) => Type::reference(go(t, expanding)?),
        Type::Forall(bs, body) => Type::Forall(bs.clone(), Box::new(go(body, expanding)?)),
        Type::Mu(b, body) => Type::Mu(b.clone(), Box::new(go(body, expanding)?)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aliases(entries: &[(&str, Type)]) -> AliasMap {
        entries.iter().map(|(n, t)| (n.to_string(), t.clone())).collect()
    }

    #[test]
    fn expands_direct_and_nested() {
        let map = aliases(&[("MyNat", Type::Nat), ("A", Type::Nat)]);
        assert_eq!(resolve_alias(&Type::Alias("MyNat".into()), &map).unwrap(), Type::Nat);
        let t = Type::func(vec![Type::Alias("A".into())], Type::Bool);
        assert_eq!(resolve_alias(&t, &map).unwrap(), Type::func(vec![Type::Nat], Type::Bool));
    }

    #[test]
    fn expands_through_alias_chains() {
        let map = aliases(&[("A", Type::list(Type::Alias("B".into()))), ("B", Type::Bool)]);
        assert_eq!(resolve_alias(&Type::Alias("A".into()), &map).unwrap(), Type::list(Type::Bool));
    }

    #[test]
    fn cycles_and_unknowns_are_errors() {
        let map = aliases(&[("A", Type::Alias("A".into()))]);
        let err = resolve_alias(&Type::Alias("A".into()), &map).unwrap_err();
        assert_eq!(err.tag, ErrorTag::ERROR_CYCLIC_TYPE_ALIAS);

        let map = aliases(&[("A", Type::list(Type::Alias("B".into()))), ("B", Type::Alias("A".into()))]);
        let err = resolve_alias(&Type::Alias("B".into()), &map).unwrap_err();
        assert_eq!(err.tag, ErrorTag::ERROR_CYCLIC_TYPE_ALIAS);

        let err = resolve_alias(&Type::Alias("Nope".into()), &AliasMap::new()).unwrap_err();
        assert_eq!(err.tag, ErrorTag::ERROR_UNDEFINED_TYPE_ALIAS);
    }

    #[test]
    fn same_alias_twice_is_not_a_cycle() {
        let map = aliases(&[("A", Type::Nat)]);
        let t = Type::Tuple(vec![Type::Alias("A".into()), Type::Alias("A".into())]);
        assert_eq!(resolve_alias(&t, &map).unwrap(), Type::Tuple(vec![Type::Nat, Type::Nat]));
    }
}
