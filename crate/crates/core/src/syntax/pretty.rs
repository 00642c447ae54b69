//! Rendering of syntax trees back to Stella source.
//!
//! Output reparses to the same tree (modulo spans). Parentheses are
//! inserted only where the parser's precedence levels require them.

use std::fmt::Write;

use super::{Decl, Expr, ExprKind, FnDecl, Param, Pattern, PatternKind, Program, Type};

pub fn pretty_print(program: &Program) -> String {
    let mut out = format!("language {};\n", program.language);
    if !program.extensions.is_empty() {
        let names: Vec<&str> = program.extensions.iter().map(|e| e.as_str()).collect();
        let _ = writeln!(out, "extend with {};", names.join(", "));
    }
    for decl in &program.decls {
        out.push('\n');
        write_decl(&mut out, decl, 0);
    }
    out
}

pub fn print_decl(decl: &Decl) -> String {
    let mut out = String::new();
    write_decl(&mut out, decl, 0);
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_decl(out: &mut String, decl: &Decl, level: usize) {
    indent(out, level);
    match decl {
        Decl::Fn(f) => write_fn(out, f, level),
        Decl::TypeAlias { name, ty, .. } => {
            let _ = writeln!(out, "type {name} = {}", print_type(ty));
        }
        Decl::ExceptionType { ty, .. } => {
            let _ = writeln!(out, "exception type = {}", print_type(ty));
        }
        Decl::ExceptionVariant { label, ty, .. } => {
            let _ = writeln!(out, "exception variant {label} : {}", print_type(ty));
        }
    }
}

fn write_fn(out: &mut String, f: &FnDecl, level: usize) {
    if f.is_generic() {
        let _ = write!(out, "generic fn {}[{}]", f.name, f.generics.join(", "));
    } else {
        let _ = write!(out, "fn {}", f.name);
    }
    let _ = writeln!(out, "({}) -> {} {{", params(&f.params), print_type(&f.ret));
    for nested in &f.nested {
        write_decl(out, nested, level + 1);
    }
    indent(out, level + 1);
    let _ = writeln!(out, "return {}", print_expr(&f.body));
    indent(out, level);
    out.push_str("}\n");
}

fn params(ps: &[Param]) -> String {
    ps.iter()
        .map(|p| format!("{} : {}", p.name, print_type(&p.ty)))
        .collect::<Vec<_>>()
        .join(", ")
}

// ----- types ---------------------------------------------------------------

pub fn print_type(t: &Type) -> String {
    let mut out = String::new();
    write_type(&mut out, t);
    out
}

fn is_type_atom(t: &Type) -> bool {
    !matches!(t, Type::Sum(..) | Type::Fn(..) | Type::Forall(..) | Type::Mu(..))
}

fn write_type_atom(out: &mut String, t: &Type) {
    if is_type_atom(t) {
        write_type(out, t);
    } else {
        out.push('(');
        write_type(out, t);
        out.push(')');
    }
}

fn write_fields(out: &mut String, fields: &[(String, Type)]) {
    for (i, (label, t)) in fields.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{label} : ");
        write_type(out, t);
    }
}

fn write_type(out: &mut String, t: &Type) {
    match t {
        Type::Bool => out.push_str("Bool"),
        Type::Nat => out.push_str("Nat"),
        Type::Unit => out.push_str("Unit"),
        Type::Top => out.push_str("Top"),
        Type::Bot => out.push_str("Bot"),
        Type::Meta(_) => out.push_str("auto"),
        Type::Var(name) | Type::Alias(name) => out.push_str(name),
        Type::Fn(ps, r) => {
            out.push_str("fn(");
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_type(out, p);
            }
            out.push_str(") -> ");
            write_type(out, r);
        }
        Type::Tuple(ts) => {
            out.push('{');
            for (i, t) in ts.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_type(out, t);
            }
            out.push('}');
        }
        Type::Record(fs) => {
            out.push('{');
            write_fields(out, fs);
            out.push('}');
        }
        Type::Variant(fs) => {
            out.push_str("<| ");
            write_fields(out, fs);
            out.push_str(" |>");
        }
        Type::Sum(l, r) => {
            if matches!(**l, Type::Sum(..)) {
                write_type(out, l);
            } else {
                write_type_atom(out, l);
            }
            out.push_str(" + ");
            write_type_atom(out, r);
        }
        Type::List(t) => {
            out.push('[');
            write_type(out, t);
            out.push(']');
        }
        Type::Ref(t) => {
            out.push('&');
            write_type_atom(out, t);
        }
        Type::Forall(bs, body) => {
            let _ = write!(out, "forall {}. ", bs.join(", "));
            write_type(out, body);
        }
        Type::Mu(b, body) => {
            let _ = write!(out, "µ {b}. ");
            write_type(out, body);
        }
    }
}

// ----- expressions ---------------------------------------------------------

const SEQ: u8 = 0;
const ASSIGN: u8 = 1;
const CAST: u8 = 2;
const UNARY: u8 = 3;
const POSTFIX: u8 = 4;
const ATOM: u8 = 5;

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Sequence(..) | ExprKind::Let(..) | ExprKind::LetRec(..) => SEQ,
        ExprKind::Assign(..) | ExprKind::If(..) => ASSIGN,
        ExprKind::Ascription(..) | ExprKind::CastAs(..) => CAST,
        ExprKind::Deref(_) | ExprKind::Fold(..) | ExprKind::Unfold(..) => UNARY,
        ExprKind::Application(..)
        | ExprKind::TypeApplication(..)
        | ExprKind::TupleProj(..)
        | ExprKind::RecordProj(..) => POSTFIX,
        _ => ATOM,
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, SEQ);
    out
}

fn write_list(out: &mut String, es: &[Expr]) {
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, e, SEQ);
    }
}

fn write_call(out: &mut String, name: &str, args: &[&Expr]) {
    out.push_str(name);
    out.push('(');
    for (i, e) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, e, SEQ);
    }
    out.push(')');
}

fn write_lambda(out: &mut String, ps: &[Param], ret: &Option<Type>, body: &Expr) {
    let _ = write!(out, "fn({})", params(ps));
    if let Some(r) = ret {
        let _ = write!(out, " -> {}", print_type(r));
    }
    out.push_str(" { return ");
    write_expr(out, body, SEQ);
    out.push_str(" }");
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    if level(e) < min {
        out.push('(');
        write_expr(out, e, SEQ);
        out.push(')');
        return;
    }
    match &e.kind {
        ExprKind::Var(name) => out.push_str(name),
        ExprKind::True => out.push_str("true"),
        ExprKind::False => out.push_str("false"),
        ExprKind::Unit => out.push_str("unit"),
        ExprKind::Zero => out.push('0'),
        ExprKind::NatLiteral(n) => {
            let _ = write!(out, "{n}");
        }
        ExprKind::Panic => out.push_str("panic!"),
        ExprKind::Succ(a) => write_call(out, "succ", &[a]),
        ExprKind::NatIsZero(a) => write_call(out, "Nat::iszero", &[a]),
        ExprKind::NatPred(a) => write_call(out, "Nat::pred", &[a]),
        ExprKind::NatRec(n, z, s) => write_call(out, "Nat::rec", &[n, z, s]),
        ExprKind::ListHead(a) => write_call(out, "List::head", &[a]),
        ExprKind::ListTail(a) => write_call(out, "List::tail", &[a]),
        ExprKind::ListIsEmpty(a) => write_call(out, "List::isempty", &[a]),
        ExprKind::Inl(a) => write_call(out, "inl", &[a]),
        ExprKind::Inr(a) => write_call(out, "inr", &[a]),
        ExprKind::NewRef(a) => write_call(out, "new", &[a]),
        ExprKind::Fix(a) => write_call(out, "fix", &[a]),
        ExprKind::Throw(a) => write_call(out, "throw", &[a]),
        ExprKind::ConsList(h, t) => write_call(out, "cons", &[h, t]),
        ExprKind::If(c, t, f) => {
            out.push_str("if ");
            write_expr(out, c, SEQ);
            out.push_str(" then ");
            write_expr(out, t, SEQ);
            out.push_str(" else ");
            write_expr(out, f, ASSIGN);
        }
        ExprKind::Abstraction { params, ret, body } => write_lambda(out, params, ret, body),
        ExprKind::GenericAbstraction { binders, params, ret, body } => {
            let _ = write!(out, "generic [{}] ", binders.join(", "));
            write_lambda(out, params, ret, body);
        }
        ExprKind::Application(f, args) => {
            write_expr(out, f, POSTFIX);
            out.push('(');
            write_list(out, args);
            out.push(')');
        }
        ExprKind::TypeApplication(f, ts) => {
            write_expr(out, f, POSTFIX);
            out.push('[');
            let ts: Vec<String> = ts.iter().map(print_type).collect();
            out.push_str(&ts.join(", "));
            out.push(']');
        }
        ExprKind::Tuple(es) => {
            out.push('{');
            write_list(out, es);
            out.push('}');
        }
        ExprKind::TupleProj(e, i) => {
            write_expr(out, e, POSTFIX);
            let _ = write!(out, ".{i}");
        }
        ExprKind::Record(fs) => {
            out.push('{');
            for (i, (label, e)) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{label} = ");
                write_expr(out, e, SEQ);
            }
            out.push('}');
        }
        ExprKind::RecordProj(e, label) => {
            write_expr(out, e, POSTFIX);
            let _ = write!(out, ".{label}");
        }
        ExprKind::VariantInj(label, e) => {
            let _ = write!(out, "<| {label} = ");
            write_expr(out, e, SEQ);
            out.push_str(" |>");
        }
        ExprKind::ListLiteral(es) => {
            out.push('[');
            write_list(out, es);
            out.push(']');
        }
        ExprKind::Match(scrutinee, cases) => {
            out.push_str("match ");
            write_expr(out, scrutinee, ASSIGN);
            out.push_str(" {");
            for (i, case) in cases.iter().enumerate() {
                out.push_str(if i == 0 { " " } else { " | " });
                out.push_str(&print_pattern(&case.pattern));
                out.push_str(" => ");
                write_expr(out, &case.body, SEQ);
            }
            out.push_str(" }");
        }
        ExprKind::Let(bindings, body) => {
            out.push_str("let ");
            for (i, (p, v)) in bindings.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&print_pattern(p));
                out.push_str(" = ");
                write_expr(out, v, ASSIGN);
            }
            out.push_str(" in ");
            write_expr(out, body, SEQ);
        }
        ExprKind::LetRec(bindings, body) => {
            out.push_str("letrec ");
            for (i, b) in bindings.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{} : {} = ", b.name, print_type(&b.ty));
                write_expr(out, &b.value, ASSIGN);
            }
            out.push_str(" in ");
            write_expr(out, body, SEQ);
        }
        ExprKind::Ascription(e, t) => {
            write_expr(out, e, CAST);
            let _ = write!(out, " as {}", print_type(t));
        }
        ExprKind::CastAs(e, t) => {
            write_expr(out, e, CAST);
            let _ = write!(out, " cast as {}", print_type(t));
        }
        ExprKind::Sequence(a, b) => {
            write_expr(out, a, ASSIGN);
            out.push_str("; ");
            write_expr(out, b, SEQ);
        }
        ExprKind::Deref(e) => {
            out.push('*');
            write_expr(out, e, UNARY);
        }
        ExprKind::Assign(l, r) => {
            write_expr(out, l, CAST);
            out.push_str(" := ");
            write_expr(out, r, ASSIGN);
        }
        ExprKind::TryWith(body, fallback) => {
            out.push_str("try { ");
            write_expr(out, body, SEQ);
            out.push_str(" } with { ");
            write_expr(out, fallback, SEQ);
            out.push_str(" }");
        }
        ExprKind::TryCatch(body, pat, handler) => {
            out.push_str("try { ");
            write_expr(out, body, SEQ);
            let _ = write!(out, " }} catch {{ {} => ", print_pattern(pat));
            write_expr(out, handler, SEQ);
            out.push_str(" }");
        }
        ExprKind::Fold(t, e) => {
            let _ = write!(out, "fold[{}] ", print_type(t));
            write_expr(out, e, UNARY);
        }
        ExprKind::Unfold(t, e) => {
            let _ = write!(out, "unfold[{}] ", print_type(t));
            write_expr(out, e, UNARY);
        }
    }
}

// ----- patterns ------------------------------------------------------------

pub fn print_pattern(p: &Pattern) -> String {
    let mut out = String::new();
    write_pattern(&mut out, p);
    out
}

fn write_patterns(out: &mut String, ps: &[Pattern]) {
    for (i, p) in ps.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_pattern(out, p);
    }
}

fn write_pattern(out: &mut String, p: &Pattern) {
    match &p.kind {
        PatternKind::Var(name) => out.push_str(name),
        PatternKind::Wildcard => out.push('_'),
        PatternKind::True => out.push_str("true"),
        PatternKind::False => out.push_str("false"),
        PatternKind::Zero => out.push('0'),
        PatternKind::Unit => out.push_str("unit"),
        PatternKind::Int(n) => {
            let _ = write!(out, "{n}");
        }
        PatternKind::Succ(inner) | PatternKind::Inl(inner) | PatternKind::Inr(inner) => {
            out.push_str(match &p.kind {
                PatternKind::Succ(_) => "succ(",
                PatternKind::Inl(_) => "inl(",
                _ => "inr(",
            });
            write_pattern(out, inner);
            out.push(')');
        }
        PatternKind::Variant(label, inner) => {
            let _ = write!(out, "<| {label} = ");
            write_pattern(out, inner);
            out.push_str(" |>");
        }
        PatternKind::Tuple(ps) => {
            out.push('{');
            write_patterns(out, ps);
            out.push('}');
        }
        PatternKind::Record(fs) => {
            out.push('{');
            for (i, (label, p)) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{label} = ");
                write_pattern(out, p);
            }
            out.push('}');
        }
        PatternKind::List(ps) => {
            out.push('[');
            write_patterns(out, ps);
            out.push(']');
        }
        PatternKind::Cons(h, t) => {
            out.push_str("cons(");
            write_pattern(out, h);
            out.push_str(", ");
            write_pattern(out, t);
            out.push(')');
        }
        PatternKind::Ascription(inner, t) => {
            write_pattern(out, inner);
            let _ = write!(out, " as {}", print_type(t));
        }
    }
}
