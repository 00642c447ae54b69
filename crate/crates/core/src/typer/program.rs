//! Whole-program checking: extension pragmas, declarations, `main`.

use std::collections::BTreeSet;

use crate::diagnostic::{Diagnostic, ErrorTag};
use crate::effects::ExceptionEnv;
use crate::matching::{is_exhaustive, nonexhaustive};
use crate::reconstruct::{apply_substitution, max_meta_in_program, program_has_holes, unify, Substitution};
use crate::syntax::{resolve_alias, AliasMap, Decl, Expr, Extension, FnDecl, Lookup, Program, Type};

use super::{Context, TResult, Typer};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Options {
    /// Ignore extension gates.
    pub permissive: bool,
    /// Record typing judgments.
    pub trace: bool,
}

/// Result of a successful check.
#[derive(Clone, Debug, Default)]
pub struct Checked {
    /// Judgments in the order they were concluded (when tracing).
    pub trace: Vec<String>,
    /// Solution for `auto` holes, when reconstruction ran.
    pub solution: Option<Substitution>,
}

pub fn typecheck_program(program: &Program, opts: &Options) -> Result<Checked, Diagnostic> {
    let mut ctx = Context::new();
    ctx.permissive = opts.permissive;
    ctx.extensions = enabled_extensions(program, opts.permissive)?;

    let reconstruct = ctx.enabled(Extension::TypeReconstruction) || (opts.permissive && program_has_holes(program));
    let mut typer = if reconstruct {
        Typer::reconstructing(&mut ctx, max_meta_in_program(program) + 1)
    } else {
        Typer::new(&mut ctx)
    };
    if opts.trace {
        typer = typer.with_trace();
    }

    check_main(program)?;
    typer.declare_aliases(program)?;
    typer.declare_exceptions(program)?;
    let functions: Vec<&FnDecl> = program.functions().collect();
    typer.declare_functions(&functions)?;
    for f in &functions {
        typer.check_fn_body(f)?;
    }

    let trace = typer.take_trace();
    let solution = match typer.take_recon() {
        Some(recon) => {
            let s = unify(&recon.constraints)?;
            for pending in &recon.pending {
                let ty = apply_substitution(&pending.ty, &s);
                if ty.contains_meta() {
                    continue;
                }
                if !is_exhaustive(&ty, &pending.patterns.iter().collect::<Vec<_>>()) {
                    return Err(nonexhaustive(&ty, pending.span));
                }
            }
            Some(s)
        }
        None => None,
    };
    Ok(Checked { trace, solution })
}

/// Checks an argument for `main` against its parameter type, with gates off.
/// Programs with `auto` holes must be annotated with their solution first.
pub fn check_main_input(program: &Program, input: &Expr) -> Result<(), Diagnostic> {
    check_main(program)?;
    let mut ctx = Context::new();
    ctx.permissive = true;
    ctx.extensions = enabled_extensions(program, true)?;
    let mut typer = Typer::new(&mut ctx);
    typer.declare_aliases(program)?;
    typer.declare_exceptions(program)?;
    let functions: Vec<&FnDecl> = program.functions().collect();
    typer.declare_functions(&functions)?;
    let main = program.main().expect("checked above");
    let param = typer.elaborate(&main.params[0].ty, main.params[0].span)?;
    typer.check(input, &param)
}

fn enabled_extensions(program: &Program, permissive: bool) -> TResult<BTreeSet<Extension>> {
    let mut set = BTreeSet::new();
    for name in &program.extensions {
        match name.resolve() {
            Lookup::Known(ext) => {
                set.insert(ext);
            }
            Lookup::Unknown if permissive => {}
            Lookup::Unknown => {
                return Err(Diagnostic::new(
                    ErrorTag::ERROR_UNKNOWN_EXTENSION,
                    program.span,
                    format!("unknown extension `{}`", name.as_str()),
                ))
            }
        }
    }
    let conflicts = [
        (Extension::ExceptionTypeDeclaration, Extension::OpenVariantExceptions),
        (Extension::TypeReconstruction, Extension::StructuralSubtyping),
    ];
    for (a, b) in conflicts {
        if set.contains(&a) && set.contains(&b) {
            return Err(Diagnostic::new(
                ErrorTag::ERROR_CONFLICTING_EXTENSIONS,
                program.span,
                format!("extensions {a} and {b} cannot be enabled together"),
            ));
        }
    }
    Ok(set)
}

fn check_main(program: &Program) -> TResult<()> {
    let Some(main) = program.main() else {
        return Err(Diagnostic::new(ErrorTag::ERROR_MISSING_MAIN, program.span, "no `main` function is declared"));
    };
    if main.is_generic() || main.params.len() != 1 {
        return Err(Diagnostic::new(
            ErrorTag::ERROR_INCORRECT_ARITY_OF_MAIN,
            main.span,
            format!("`main` must be a non-generic function of one parameter, found {} parameter(s)", main.params.len()),
        ));
    }
    Ok(())
}

/// Marks free names in an alias body that refer to other aliases.
fn mark_aliases(t: &Type, names: &BTreeSet<String>, bound: &mut Vec<String>) -> Type {
    match t {
        Type::Var(n) if !bound.contains(n) && names.contains(n) => Type::Alias(n.clone()),
        Type::Forall(bs, body) => {
            let k = bound.len();
            bound.extend(bs.iter().cloned());
            let body = mark_aliases(body, names, bound);
            bound.truncate(k);
            Type::Forall(bs.clone(), Box::new(body))
        }
        Type::Mu(b, body) => {
            bound.push(b.clone());
            let body = mark_aliases(body, names, bound);
            bound.pop();
            Type::Mu(b.clone(), Box::new(body))
        }
        Type::Fn(ps, r) => Type::Fn(
            ps.iter().map(|p| mark_aliases(p, names, bound)).collect(),
            Box::new(mark_aliases(r, names, bound)),
        ),
        Type::Tuple(ts) => Type::Tuple(ts.iter().map(|t| mark_aliases(t, names, bound)).collect()),
        Type::Record(fs) => Type::Record(fs.iter().map(|(l, t)| (l.clone(), mark_aliases(t, names, bound))).collect()),
        Type::Variant(fs) => Type::Variant(fs.iter().map(|(l, t)| (l.clone(), mark_aliases(t, names, bound))).collect()),
        Type::Sum(l, r) => Type::sum(mark_aliases(l, names, bound), mark_aliases(r, names, bound)),
        Type::List(t) => Type::list(mark_aliases(t, names, bound)),
        Type::Ref(t) => Type::reference(mark_aliases(t, names, bound)),
        _ => t.clone(),
    }
}

impl Typer<'_> {
    fn declare_aliases(&mut self, program: &Program) -> TResult<()> {
        let mut raw = AliasMap::new();
        let mut spans = Vec::new();
        for d in &program.decls {
            if let Decl::TypeAlias { name, ty, span } = d {
                self.require(&[Extension::TypeAliases], *span, "a type alias")?;
                if raw.contains_key(name) {
                    return Err(Diagnostic::new(
                        ErrorTag::ERROR_DUPLICATE_TYPE_ALIAS,
                        *span,
                        format!("type alias `{name}` is declared twice"),
                    ));
                }
                raw.insert(name.clone(), ty.clone());
                spans.push((name.clone(), *span));
            }
        }
        let names: BTreeSet<String> = raw.keys().cloned().collect();
        let marked: AliasMap =
            raw.iter().map(|(n, t)| (n.clone(), mark_aliases(t, &names, &mut Vec::new()))).collect();
        let mut expanded = AliasMap::new();
        for (name, span) in spans {
            let t = resolve_alias(&Type::Alias(name.clone()), &marked).map_err(|mut d| {
                d.span = span;
                d
            })?;
            expanded.insert(name, self.elaborate(&t, span)?);
        }
        self.ctx.aliases = expanded;
        Ok(())
    }

    fn declare_exceptions(&mut self, program: &Program) -> TResult<()> {
        let mut fixed: Option<Type> = None;
        let mut open: Vec<(String, Type)> = Vec::new();
        for d in &program.decls {
            match d {
                Decl::ExceptionType { ty, span } => {
                    self.require(&[Extension::ExceptionTypeDeclaration], *span, "an exception type declaration")?;
                    if fixed.is_some() {
                        return Err(Diagnostic::new(
                            ErrorTag::ERROR_DUPLICATE_EXCEPTION_TYPE,
                            *span,
                            "the exception type is declared more than once",
                        ));
                    }
                    fixed = Some(self.elaborate(ty, *span)?);
                }
                Decl::ExceptionVariant { label, ty, span } => {
                    self.require(&[Extension::OpenVariantExceptions], *span, "an exception variant declaration")?;
                    if open.iter().any(|(l, _)| l == label) {
                        return Err(Diagnostic::new(
                            ErrorTag::ERROR_DUPLICATE_EXCEPTION_VARIANT,
                            *span,
                            format!("exception variant `{label}` is declared more than once"),
                        ));
                    }
                    open.push((label.clone(), self.elaborate(ty, *span)?));
                }
                _ => {}
            }
        }
        self.ctx.exceptions = match (fixed, open.is_empty()) {
            (Some(_), false) => {
                return Err(Diagnostic::new(
                    ErrorTag::ERROR_CONFLICTING_EXTENSIONS,
                    program.span,
                    "both an exception type and exception variants are declared",
                ))
            }
            (Some(t), true) => ExceptionEnv::Fixed(t),
            (None, false) => ExceptionEnv::Open(open),
            (None, true) => ExceptionEnv::None,
        };
        Ok(())
    }

    /// Binds the signatures of a group of mutually visible functions.
    fn declare_functions(&mut self, functions: &[&FnDecl]) -> TResult<()> {
        for (i, f) in functions.iter().enumerate() {
            if functions[..i].iter().any(|g| g.name == f.name) {
                return Err(Diagnostic::new(
                    ErrorTag::ERROR_DUPLICATE_FUNCTION,
                    f.span,
                    format!("function `{}` is declared more than once", f.name),
                ));
            }
        }
        for f in functions {
            let sig = self.fn_signature(f)?;
            self.ctx.bind(f.name.clone(), sig);
        }
        Ok(())
    }

    fn fn_signature(&mut self, f: &FnDecl) -> TResult<Type> {
        if f.is_generic() {
            self.require(&[Extension::UniversalTypes], f.span, "a generic function")?;
        }
        if f.params.len() != 1 {
            self.require(&[Extension::MultiparameterFunctions], f.span, "a function with other than one parameter")?;
        }
        let span = f.span;
        self.scoped_type_vars(&f.generics, |t| {
            let params = f.params.iter().map(|p| t.elaborate(&p.ty, p.span)).collect::<TResult<Vec<_>>>()?;
            let ret = t.elaborate(&f.ret, span)?;
            let fn_ty = Type::Fn(params, Box::new(ret));
            Ok(if f.is_generic() { Type::Forall(f.generics.clone(), Box::new(fn_ty)) } else { fn_ty })
        })
    }

    fn check_fn_body(&mut self, f: &FnDecl) -> TResult<()> {
        self.check_param_names(&f.params)?;
        self.scoped_type_vars(&f.generics, |t| {
            let params = f.params.iter().map(|p| t.elaborate(&p.ty, p.span)).collect::<TResult<Vec<_>>>()?;
            let ret = t.elaborate(&f.ret, f.span)?;
            for (p, ty) in f.params.iter().zip(params) {
                t.ctx.bind(p.name.clone(), ty);
            }
            let nested: Vec<&FnDecl> = f
                .nested
                .iter()
                .map(|d| match d {
                    Decl::Fn(g) => Ok(g),
                    other => Err(Diagnostic::new(
                        ErrorTag::ERROR_UNEXPECTED_TYPE_FOR_EXPRESSION,
                        other.span(),
                        "only function declarations may be nested",
                    )),
                })
                .collect::<TResult<_>>()?;
            if let Some(first) = nested.first() {
                t.require(&[Extension::NestedFunctionDeclarations], first.span, "a nested function declaration")?;
            }
            t.declare_functions(&nested)?;
            for g in &nested {
                t.check_fn_body(g)?;
            }
            t.check(&f.body, &ret)
        })
    }
}
