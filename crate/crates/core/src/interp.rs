//! Call-by-value big-step evaluator.
//!
//! Values borrow closure bodies from the program, so a [`Value`] lives no
//! longer than the AST it was computed from. Deep recursion in the
//! evaluated program turns into deep recursion here; callers running
//! untrusted programs should use [`with_large_stack`].

use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::syntax::{print_type, Decl, Expr, ExprKind, FnDecl, LetrecBinding, Param, Pattern, PatternKind, Program, Type};

/// Runtime failures that are not exceptions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuntimeErrorKind {
    CastFailure,
    HeadOfEmptyList,
    TailOfEmptyList,
    /// A value matched none of the patterns (possible only with nested
    /// patterns, which are not checked for coverage).
    MatchFailure,
    /// A `letrec` right-hand side read its own binding before it was ready.
    UninitializedBinding,
}

impl fmt::Display for RuntimeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuntimeErrorKind::CastFailure => "cast failure",
            RuntimeErrorKind::HeadOfEmptyList => "head of empty list",
            RuntimeErrorKind::TailOfEmptyList => "tail of empty list",
            RuntimeErrorKind::MatchFailure => "no pattern matched",
            RuntimeErrorKind::UninitializedBinding => "recursive binding used before initialization",
        })
    }
}

/// How an evaluation ended.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome<'a> {
    Normal(Value<'a>),
    Thrown(Value<'a>),
    Panicked,
    RuntimeError(RuntimeErrorKind),
}

impl fmt::Display for Outcome<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Normal(v) => write!(f, "{v}"),
            Outcome::Thrown(v) => write!(f, "uncaught exception: {v}"),
            Outcome::Panicked => f.write_str("panic!"),
            Outcome::RuntimeError(kind) => write!(f, "runtime error: {kind}"),
        }
    }
}

/// The step limit or the nesting-depth limit was reached.
#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("evaluation ran out of fuel")]
pub struct FuelExhausted;

/// Function body shared by lambdas and declared functions.
#[derive(Debug)]
pub struct Closure<'a> {
    params: &'a [Param],
    nested: &'a [Decl],
    body: &'a Expr,
    env: Env<'a>,
}

/// Persistent list of values.
#[derive(Clone, Debug, Default)]
pub struct List<'a>(Option<Rc<(Value<'a>, List<'a>)>>);

impl<'a> List<'a> {
    pub fn nil() -> Self {
        List(None)
    }

    pub fn cons(head: Value<'a>, tail: List<'a>) -> Self {
        List(Some(Rc::new((head, tail))))
    }

    pub fn uncons(&self) -> Option<(&Value<'a>, &List<'a>)> {
        self.0.as_deref().map(|(h, t)| (h, t))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Value<'a>> {
        let mut cur = self;
        std::iter::from_fn(move || {
            let (h, t) = cur.uncons()?;
            cur = t;
            Some(h)
        })
    }

    pub fn from_values(values: Vec<Value<'a>>) -> Self {
        values.into_iter().rev().fold(List::nil(), |tail, v| List::cons(v, tail))
    }
}

impl PartialEq for List<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.iter().eq(other.iter())
    }
}

#[derive(Clone, Debug)]
pub enum Value<'a> {
    Nat(BigUint),
    Bool(bool),
    Unit,
    Closure(Rc<Closure<'a>>),
    /// A generic function; type application yields the closure unchanged.
    TypeClosure(Rc<Closure<'a>>),
    /// A function applied to fewer arguments than it takes.
    Partial(Rc<Value<'a>>, Vec<Value<'a>>),
    /// `fix(f)`, unfolded on demand.
    FixPoint(Rc<Value<'a>>),
    Tuple(Vec<Value<'a>>),
    Record(Vec<(String, Value<'a>)>),
    Inl(Box<Value<'a>>),
    Inr(Box<Value<'a>>),
    Variant(String, Box<Value<'a>>),
    List(List<'a>),
    Location(usize),
    Folded(Type, Box<Value<'a>>),
}

impl Value<'_> {
    pub fn nat(n: u64) -> Self {
        Value::Nat(BigUint::from(n))
    }

    pub fn is_function(&self) -> bool {
        matches!(self, Value::Closure(_) | Value::TypeClosure(_) | Value::Partial(..) | Value::FixPoint(_))
    }
}

/// Structural equality on first-order values; functions are never equal.
impl PartialEq for Value<'_> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Nat(a), Value::Nat(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Unit, Value::Unit) => true,
            (Value::Tuple(a), Value::Tuple(b)) => a == b,
            (Value::Record(a), Value::Record(b)) => a == b,
            (Value::Inl(a), Value::Inl(b)) | (Value::Inr(a), Value::Inr(b)) => a == b,
            (Value::Variant(l, a), Value::Variant(m, b)) => l == m && a == b,
            (Value::List(a), Value::List(b)) => a == b,
            (Value::Location(a), Value::Location(b)) => a == b,
            (Value::Folded(_, a), Value::Folded(_, b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Value<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn seq<T>(f: &mut fmt::Formatter<'_>, items: impl Iterator<Item = T>, show: impl Fn(&mut fmt::Formatter<'_>, T) -> fmt::Result) -> fmt::Result {
            for (i, item) in items.enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                show(f, item)?;
            }
            Ok(())
        }
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Unit => f.write_str("unit"),
            Value::Closure(_) | Value::TypeClosure(_) | Value::Partial(..) | Value::FixPoint(_) => f.write_str("<fun>"),
            Value::Tuple(vs) => {
                f.write_str("{")?;
                seq(f, vs.iter(), |f, v| write!(f, "{v}"))?;
                f.write_str("}")
            }
            Value::Record(fs) => {
                f.write_str("{")?;
                seq(f, fs.iter(), |f, (l, v)| write!(f, "{l} = {v}"))?;
                f.write_str("}")
            }
            Value::Inl(v) => write!(f, "inl({v})"),
            Value::Inr(v) => write!(f, "inr({v})"),
            Value::Variant(l, v) => write!(f, "<| {l} = {v} |>"),
            Value::List(items) => {
                f.write_str("[")?;
                seq(f, items.iter(), |f, v| write!(f, "{v}"))?;
                f.write_str("]")
            }
            Value::Location(i) => write!(f, "<location {i}>"),
            Value::Folded(t, v) => write!(f, "fold[{}] {v}", print_type(t)),
        }
    }
}

type Slot<'a> = Rc<RefCell<Option<Value<'a>>>>;

#[derive(Clone, Debug)]
enum Binding<'a> {
    Value(Value<'a>),
    /// Filled once the recursive group it belongs to is built.
    Slot(Slot<'a>),
}

#[derive(Debug)]
struct EnvNode<'a> {
    name: &'a str,
    binding: Binding<'a>,
    next: Env<'a>,
}

#[derive(Clone, Debug, Default)]
struct Env<'a>(Option<Rc<EnvNode<'a>>>);

impl<'a> Env<'a> {
    fn bind(&self, name: &'a str, binding: Binding<'a>) -> Env<'a> {
        Env(Some(Rc::new(EnvNode { name, binding, next: self.clone() })))
    }

    fn lookup(&self, name: &str) -> Option<&Binding<'a>> {
        let mut cur = self.0.as_deref();
        while let Some(node) = cur {
            if node.name == name {
                return Some(&node.binding);
            }
            cur = node.next.0.as_deref();
        }
        None
    }
}

/// Abrupt completion of an evaluation step.
enum Control<'a> {
    Throw(Value<'a>),
    Panic,
    Error(RuntimeErrorKind),
    OutOfFuel,
}

type Eval<'a> = Result<Value<'a>, Control<'a>>;

/// Nesting limit under a step limit; fits the stack of [`with_large_stack`].
const MAX_DEPTH: usize = 100_000;

/// Evaluator state: the reference store and remaining fuel.
pub struct Interpreter<'a> {
    store: Vec<Value<'a>>,
    fuel: Option<u64>,
    depth: usize,
    globals: Env<'a>,
    main: Option<&'a FnDecl>,
}

impl<'a> Interpreter<'a> {
    /// Builds the global environment of `program`'s top-level functions.
    pub fn new(program: &'a Program) -> Interpreter<'a> {
        let functions: Vec<&'a FnDecl> = program.functions().collect();
        let globals = bind_functions(&Env::default(), &functions);
        Interpreter { store: Vec::new(), fuel: None, depth: 0, globals, main: program.main() }
    }

    /// Limits evaluation to `fuel` steps and bounds the nesting depth of
    /// evaluation, so that runaway recursion ends before the native stack.
    pub fn with_fuel(mut self, fuel: u64) -> Self {
        self.fuel = Some(fuel);
        self
    }

    /// Evaluates a closed expression (it may mention top-level functions).
    pub fn eval_expr(&mut self, e: &'a Expr) -> Result<Outcome<'a>, FuelExhausted> {
        let env = self.globals.clone();
        let result = self.eval(&env, e);
        finish(result)
    }

    /// Applies `main` to `input`.
    pub fn call_main(&mut self, input: Value<'a>) -> Result<Outcome<'a>, FuelExhausted> {
        let main = self.main.expect("program has a main function");
        let Some(Binding::Slot(slot)) = self.globals.lookup(&main.name).cloned() else {
            unreachable!("top-level functions are bound to slots")
        };
        let f = slot.borrow().clone().expect("globals are initialized");
        let result = self.apply(f, vec![input]);
        finish(result)
    }

    /// Current contents of the reference store.
    pub fn store(&self) -> &[Value<'a>] {
        &self.store
    }

    fn tick(&mut self) -> Result<(), Control<'a>> {
        match &mut self.fuel {
            Some(0) => Err(Control::OutOfFuel),
            Some(n) => {
                *n -= 1;
                Ok(())
            }
            None => Ok(()),
        }
    }

    /// Unfolds fixed points until the value has a head constructor.
    fn force(&mut self, v: Value<'a>) -> Eval<'a> {
        let mut v = v;
        while let Value::FixPoint(f) = &v {
            self.tick()?;
            let f = (**f).clone();
            v = self.apply(f, vec![v.clone()])?;
        }
        Ok(v)
    }

    fn eval_forced(&mut self, env: &Env<'a>, e: &'a Expr) -> Eval<'a> {
        let v = self.eval(env, e)?;
        self.force(v)
    }

    fn apply(&mut self, f: Value<'a>, args: Vec<Value<'a>>) -> Eval<'a> {
        self.tick()?;
        match f {
            Value::Closure(c) | Value::TypeClosure(c) => {
                if args.len() < c.params.len() {
                    return Ok(Value::Partial(Rc::new(Value::Closure(c)), args));
                }
                let mut env = c.env.clone();
                let mut rest = args;
                let extra = rest.split_off(c.params.len());
                for (p, v) in c.params.iter().zip(rest) {
                    env = env.bind(&p.name, Binding::Value(v));
                }
                let nested: Vec<&'a FnDecl> = c
                    .nested
                    .iter()
                    .filter_map(|d| match d {
                        Decl::Fn(g) => Some(g),
                        _ => None,
                    })
                    .collect();
                if !nested.is_empty() {
                    env = bind_functions(&env, &nested);
                }
                let result = self.eval(&env, c.body)?;
                if extra.is_empty() {
                    Ok(result)
                } else {
                    self.apply(result, extra)
                }
            }
            Value::Partial(g, mut given) => {
                given.extend(args);
                self.apply((*g).clone(), given)
            }
            fix @ Value::FixPoint(_) => {
                let g = self.force(fix)?;
                self.apply(g, args)
            }
            other => unreachable!("application of non-function value {other}"),
        }
    }

    fn eval(&mut self, env: &Env<'a>, e: &'a Expr) -> Eval<'a> {
        self.tick()?;
        if self.fuel.is_some() && self.depth >= MAX_DEPTH {
            return Err(Control::OutOfFuel);
        }
        self.depth += 1;
        let out = self.eval_step(env, e);
        self.depth -= 1;
        out
    }

    fn eval_step(&mut self, env: &Env<'a>, e: &'a Expr) -> Eval<'a> {
        match &e.kind {
            ExprKind::Var(name) => match env.lookup(name) {
                Some(Binding::Value(v)) => Ok(v.clone()),
                Some(Binding::Slot(slot)) => {
                    slot.borrow().clone().ok_or(Control::Error(RuntimeErrorKind::UninitializedBinding))
                }
                None => unreachable!("unbound variable `{name}` in a typechecked program"),
            },
            ExprKind::True => Ok(Value::Bool(true)),
            ExprKind::False => Ok(Value::Bool(false)),
            ExprKind::Unit => Ok(Value::Unit),
            ExprKind::Zero => Ok(Value::Nat(BigUint::zero())),
            ExprKind::NatLiteral(n) => Ok(Value::Nat(n.clone())),
            ExprKind::Succ(n) => {
                let n = self.eval_nat(env, n)?;
                Ok(Value::Nat(n + 1u32))
            }
            ExprKind::NatPred(n) => {
                let n = self.eval_nat(env, n)?;
                Ok(Value::Nat(if n.is_zero() { n } else { n - 1u32 }))
            }
            ExprKind::NatIsZero(n) => Ok(Value::Bool(self.eval_nat(env, n)?.is_zero())),
            ExprKind::NatRec(n, z, s) => {
                let n = self.eval_nat(env, n)?;
                let mut acc = self.eval(env, z)?;
                let step = self.eval(env, s)?;
                let mut i = BigUint::zero();
                while i < n {
                    let partial = self.apply(step.clone(), vec![Value::Nat(i.clone())])?;
                    acc = self.apply(partial, vec![acc])?;
                    i += BigUint::one();
                }
                Ok(acc)
            }
            ExprKind::If(c, t, f) => {
                if self.eval_bool(env, c)? {
                    self.eval(env, t)
                } else {
                    self.eval(env, f)
                }
            }
            ExprKind::Abstraction { params, body, .. } => {
                Ok(Value::Closure(Rc::new(Closure { params, nested: &[], body, env: env.clone() })))
            }
            ExprKind::GenericAbstraction { params, body, .. } => {
                Ok(Value::TypeClosure(Rc::new(Closure { params, nested: &[], body, env: env.clone() })))
            }
            ExprKind::Application(f, args) => {
                let f = self.eval_forced(env, f)?;
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.eval(env, a)?);
                }
                self.apply(f, values)
            }
            ExprKind::TypeApplication(f, _) => match self.eval_forced(env, f)? {
                Value::TypeClosure(c) => Ok(Value::Closure(c)),
                other => Ok(other),
            },
            ExprKind::Tuple(es) => Ok(Value::Tuple(self.eval_all(env, es)?)),
            ExprKind::TupleProj(t, i) => match self.eval_forced(env, t)? {
                Value::Tuple(mut vs) => Ok(vs.swap_remove(i - 1)),
                other => unreachable!("projection from non-tuple {other}"),
            },
            ExprKind::Record(fields) => {
                let mut out = Vec::with_capacity(fields.len());
                for (l, fe) in fields {
                    out.push((l.clone(), self.eval(env, fe)?));
                }
                Ok(Value::Record(out))
            }
            ExprKind::RecordProj(r, label) => match self.eval_forced(env, r)? {
                Value::Record(fs) => Ok(fs.into_iter().find(|(l, _)| l == label).map(|(_, v)| v).expect("field exists")),
                other => unreachable!("projection from non-record {other}"),
            },
            ExprKind::Inl(v) => Ok(Value::Inl(Box::new(self.eval(env, v)?))),
            ExprKind::Inr(v) => Ok(Value::Inr(Box::new(self.eval(env, v)?))),
            ExprKind::VariantInj(l, v) => Ok(Value::Variant(l.clone(), Box::new(self.eval(env, v)?))),
            ExprKind::ListLiteral(es) => Ok(Value::List(List::from_values(self.eval_all(env, es)?))),
            ExprKind::ConsList(h, t) => {
                let h = self.eval(env, h)?;
                let t = self.eval_list(env, t)?;
                Ok(Value::List(List::cons(h, t)))
            }
            ExprKind::ListHead(l) => match self.eval_list(env, l)?.uncons() {
                Some((h, _)) => Ok(h.clone()),
                None => Err(Control::Error(RuntimeErrorKind::HeadOfEmptyList)),
            },
            ExprKind::ListTail(l) => match self.eval_list(env, l)?.uncons() {
                Some((_, t)) => Ok(Value::List(t.clone())),
                None => Err(Control::Error(RuntimeErrorKind::TailOfEmptyList)),
            },
            ExprKind::ListIsEmpty(l) => Ok(Value::Bool(self.eval_list(env, l)?.uncons().is_none())),
            ExprKind::Match(scrutinee, cases) => {
                let v = self.eval(env, scrutinee)?;
                for case in cases {
                    if let Some(env) = self.match_pattern(env, &case.pattern, &v)? {
                        return self.eval(&env, &case.body);
                    }
                }
                Err(Control::Error(RuntimeErrorKind::MatchFailure))
            }
            ExprKind::Let(bindings, body) => {
                let mut scope = env.clone();
                for (p, value) in bindings {
                    let v = self.eval(&scope, value)?;
                    scope = self.match_pattern(&scope, p, &v)?.ok_or(Control::Error(RuntimeErrorKind::MatchFailure))?;
                }
                self.eval(&scope, body)
            }
            ExprKind::LetRec(bindings, body) => {
                let scope = self.eval_letrec(env, bindings)?;
                self.eval(&scope, body)
            }
            ExprKind::Ascription(inner, _) => self.eval(env, inner),
            ExprKind::Sequence(first, second) => {
                self.eval(env, first)?;
                self.eval(env, second)
            }
            ExprKind::NewRef(init) => {
                let v = self.eval(env, init)?;
                self.store.push(v);
                Ok(Value::Location(self.store.len() - 1))
            }
            ExprKind::Deref(r) => {
                let loc = self.eval_location(env, r)?;
                Ok(self.store[loc].clone())
            }
            ExprKind::Assign(l, r) => {
                let loc = self.eval_location(env, l)?;
                let v = self.eval(env, r)?;
                self.store[loc] = v;
                Ok(Value::Unit)
            }
            ExprKind::Panic => Err(Control::Panic),
            ExprKind::Throw(v) => Err(Control::Throw(self.eval(env, v)?)),
            ExprKind::TryWith(body, fallback) => match self.eval(env, body) {
                Err(Control::Throw(_)) => self.eval(env, fallback),
                other => other,
            },
            ExprKind::TryCatch(body, pattern, handler) => match self.eval(env, body) {
                Err(Control::Throw(exn)) => match self.match_pattern(env, pattern, &exn)? {
                    Some(scope) => self.eval(&scope, handler),
                    None => Err(Control::Throw(exn)),
                },
                other => other,
            },
            ExprKind::CastAs(inner, target) => {
                let v = self.eval_forced(env, inner)?;
                if self.conforms(&v, target) {
                    Ok(v)
                } else {
                    Err(Control::Error(RuntimeErrorKind::CastFailure))
                }
            }
            ExprKind::Fix(f) => {
                let f = self.eval_forced(env, f)?;
                self.force(Value::FixPoint(Rc::new(f)))
            }
            ExprKind::Fold(t, inner) => Ok(Value::Folded(t.clone(), Box::new(self.eval(env, inner)?))),
            ExprKind::Unfold(_, inner) => match self.eval_forced(env, inner)? {
                Value::Folded(_, v) => Ok(*v),
                other => unreachable!("unfold of non-folded value {other}"),
            },
        }
    }

    fn eval_all(&mut self, env: &Env<'a>, es: &'a [Expr]) -> Result<Vec<Value<'a>>, Control<'a>> {
        es.iter().map(|e| self.eval(env, e)).collect()
    }

    fn eval_nat(&mut self, env: &Env<'a>, e: &'a Expr) -> Result<BigUint, Control<'a>> {
        match self.eval_forced(env, e)? {
            Value::Nat(n) => Ok(n),
            other => unreachable!("expected a natural number, found {other}"),
        }
    }

    fn eval_bool(&mut self, env: &Env<'a>, e: &'a Expr) -> Result<bool, Control<'a>> {
        match self.eval_forced(env, e)? {
            Value::Bool(b) => Ok(b),
            other => unreachable!("expected a boolean, found {other}"),
        }
    }

    fn eval_list(&mut self, env: &Env<'a>, e: &'a Expr) -> Result<List<'a>, Control<'a>> {
        match self.eval_forced(env, e)? {
            Value::List(l) => Ok(l),
            other => unreachable!("expected a list, found {other}"),
        }
    }

    fn eval_location(&mut self, env: &Env<'a>, e: &'a Expr) -> Result<usize, Control<'a>> {
        match self.eval_forced(env, e)? {
            Value::Location(l) => Ok(l),
            other => unreachable!("expected a reference, found {other}"),
        }
    }

    fn eval_letrec(&mut self, env: &Env<'a>, bindings: &'a [LetrecBinding]) -> Result<Env<'a>, Control<'a>> {
        let mut scope = env.clone();
        let mut slots = Vec::with_capacity(bindings.len());
        for b in bindings {
            let slot: Slot<'a> = Rc::new(RefCell::new(None));
            scope = scope.bind(&b.name, Binding::Slot(slot.clone()));
            slots.push(slot);
        }
        for (b, slot) in bindings.iter().zip(slots) {
            let v = self.eval(&scope, &b.value)?;
            *slot.borrow_mut() = Some(v);
        }
        Ok(scope)
    }

    /// Extends `env` with the pattern's bindings if `v` matches.
    fn match_pattern(&mut self, env: &Env<'a>, p: &'a Pattern, v: &Value<'a>) -> Result<Option<Env<'a>>, Control<'a>> {
        let v = self.force(v.clone())?;
        let matched = match (&p.kind, &v) {
            (PatternKind::Var(name), _) => return Ok(Some(env.bind(name, Binding::Value(v.clone())))),
            (PatternKind::Wildcard, _) => return Ok(Some(env.clone())),
            (PatternKind::Ascription(inner, _), _) => return self.match_pattern(env, inner, &v),
            (PatternKind::True, Value::Bool(b)) => *b,
            (PatternKind::False, Value::Bool(b)) => !*b,
            (PatternKind::Unit, Value::Unit) => true,
            (PatternKind::Zero, Value::Nat(n)) => n.is_zero(),
            (PatternKind::Int(k), Value::Nat(n)) => n == k,
            (PatternKind::Succ(inner), Value::Nat(n)) => {
                if n.is_zero() {
                    false
                } else {
                    return self.match_pattern(env, inner, &Value::Nat(n - 1u32));
                }
            }
            (PatternKind::Inl(inner), Value::Inl(x)) | (PatternKind::Inr(inner), Value::Inr(x)) => {
                return self.match_pattern(env, inner, x)
            }
            (PatternKind::Variant(l, inner), Value::Variant(m, x)) => {
                if l != m {
                    false
                } else {
                    return self.match_pattern(env, inner, x);
                }
            }
            (PatternKind::Tuple(ps), Value::Tuple(vs)) if ps.len() == vs.len() => {
                let mut scope = env.clone();
                for (p, v) in ps.iter().zip(vs) {
                    match self.match_pattern(&scope, p, v)? {
                        Some(s) => scope = s,
                        None => return Ok(None),
                    }
                }
                return Ok(Some(scope));
            }
            (PatternKind::Record(ps), Value::Record(fs)) => {
                let mut scope = env.clone();
                for (l, p) in ps {
                    let Some((_, v)) = fs.iter().find(|(m, _)| m == l) else {
                        return Ok(None);
                    };
                    match self.match_pattern(&scope, p, v)? {
                        Some(s) => scope = s,
                        None => return Ok(None),
                    }
                }
                return Ok(Some(scope));
            }
            (PatternKind::List(ps), Value::List(items)) => {
                let vs: Vec<&Value<'a>> = items.iter().collect();
                if vs.len() != ps.len() {
                    return Ok(None);
                }
                let mut scope = env.clone();
                for (p, v) in ps.iter().zip(vs) {
                    match self.match_pattern(&scope, p, v)? {
                        Some(s) => scope = s,
                        None => return Ok(None),
                    }
                }
                return Ok(Some(scope));
            }
            (PatternKind::Cons(hp, tp), Value::List(items)) => {
                let Some((h, t)) = items.uncons() else {
                    return Ok(None);
                };
                let (h, t) = (h.clone(), Value::List(t.clone()));
                let Some(scope) = self.match_pattern(env, hp, &h)? else {
                    return Ok(None);
                };
                return self.match_pattern(&scope, tp, &t);
            }
            _ => false,
        };
        Ok(matched.then(|| env.clone()))
    }

    /// Whether a runtime value has the shape of `t`. Function values are
    /// only checked to be functions.
    fn conforms(&self, v: &Value<'a>, t: &Type) -> bool {
        match (t, v) {
            (Type::Top | Type::Var(_) | Type::Meta(_) | Type::Alias(_), _) => true,
            (Type::Bot, _) => false,
            (Type::Nat, Value::Nat(_)) | (Type::Bool, Value::Bool(_)) | (Type::Unit, Value::Unit) => true,
            (Type::Fn(..), v) => v.is_function(),
            (Type::Forall(..), v) => v.is_function(),
            (Type::Tuple(ts), Value::Tuple(vs)) => ts.len() == vs.len() && ts.iter().zip(vs).all(|(t, v)| self.conforms(v, t)),
            (Type::Record(ts), Value::Record(fs)) => ts
                .iter()
                .all(|(l, t)| fs.iter().find(|(m, _)| m == l).is_some_and(|(_, v)| self.conforms(v, t))),
            (Type::Variant(ts), Value::Variant(l, v)) => {
                ts.iter().find(|(m, _)| m == l).is_some_and(|(_, t)| self.conforms(v, t))
            }
            (Type::Sum(a, _), Value::Inl(v)) => self.conforms(v, a),
            (Type::Sum(_, b), Value::Inr(v)) => self.conforms(v, b),
            (Type::List(t), Value::List(items)) => items.iter().all(|v| self.conforms(v, t)),
            (Type::Ref(t), Value::Location(i)) => self.store.get(*i).is_some_and(|v| self.conforms(v, t)),
            (Type::Mu(..), Value::Folded(..)) => true,
            _ => false,
        }
    }
}

/// Binds a group of mutually recursive functions.
fn bind_functions<'a>(env: &Env<'a>, functions: &[&'a FnDecl]) -> Env<'a> {
    let mut scope = env.clone();
    let mut slots = Vec::with_capacity(functions.len());
    for f in functions {
        let slot: Slot<'a> = Rc::new(RefCell::new(None));
        scope = scope.bind(&f.name, Binding::Slot(slot.clone()));
        slots.push(slot);
    }
    for (f, slot) in functions.iter().zip(slots) {
        let closure = Rc::new(Closure { params: &f.params, nested: &f.nested, body: &f.body, env: scope.clone() });
        let v = if f.is_generic() { Value::TypeClosure(closure) } else { Value::Closure(closure) };
        *slot.borrow_mut() = Some(v);
    }
    scope
}

fn finish<'a>(result: Eval<'a>) -> Result<Outcome<'a>, FuelExhausted> {
    match result {
        Ok(v) => Ok(Outcome::Normal(v)),
        Err(Control::Throw(v)) => Ok(Outcome::Thrown(v)),
        Err(Control::Panic) => Ok(Outcome::Panicked),
        Err(Control::Error(kind)) => Ok(Outcome::RuntimeError(kind)),
        Err(Control::OutOfFuel) => Err(FuelExhausted),
    }
}

/// Evaluates `main(input)` under a fresh store with no step limit.
pub fn eval_program<'a>(program: &'a Program, input: Value<'a>) -> Outcome<'a> {
    Interpreter::new(program).call_main(input).expect("unlimited fuel")
}

/// Like [`eval_program`], stopping after `fuel` evaluation steps.
pub fn eval_program_with_fuel<'a>(program: &'a Program, input: Value<'a>, fuel: u64) -> Result<Outcome<'a>, FuelExhausted> {
    Interpreter::new(program).with_fuel(fuel).call_main(input)
}

/// Runs `f` on a thread with a large stack, for deeply recursive programs.
pub fn with_large_stack<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(1 << 30)
            .spawn_scoped(s, f)
            .expect("spawn evaluation thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, parse_program};

    fn run(src: &str, input: u64) -> String {
        let p = parse_program(src).unwrap();
        eval_program(&p, Value::nat(input)).to_string()
    }

    #[test]
    fn deref_of_new() {
        let p = parse_program("language core; fn main(n : Nat) -> Nat { return n }").unwrap();
        let e = parse_expr("*new(succ(0))").unwrap();
        let out = Interpreter::new(&p).eval_expr(&e).unwrap();
        assert_eq!(out, Outcome::Normal(Value::nat(1)));
    }

    #[test]
    fn panic_is_not_caught() {
        let p = parse_program("language core; fn main(n : Nat) -> Nat { return n }").unwrap();
        let e = parse_expr("try { panic! } with { 0 }").unwrap();
        assert_eq!(Interpreter::new(&p).eval_expr(&e).unwrap(), Outcome::Panicked);
    }

    #[test]
    fn nat_rec_adds() {
        let src = "language core;
            fn main(n : Nat) -> Nat {
              return Nat::rec(n, 3, fn(i : Nat) { return fn(acc : Nat) { return succ(acc) } })
            }";
        assert_eq!(run(src, 4), "7");
    }

    #[test]
    fn fix_computes_recursion() {
        let src = "language core;
            fn main(n : Nat) -> Nat {
              return fix(fn(f : fn(Nat) -> Nat) {
                return fn(k : Nat) { return if Nat::iszero(k) then 0 else succ(succ(f(Nat::pred(k)))) }
              })(n)
            }";
        assert_eq!(run(src, 5), "10");
    }

    #[test]
    fn fuel_runs_out_on_divergence() {
        let src = "language core;
            fn main(n : Nat) -> Nat { return fix(fn(x : Nat) { return succ(x) }) }";
        let p = parse_program(src).unwrap();
        let out = with_large_stack(|| eval_program_with_fuel(&p, Value::nat(0), 10_000_000).map(|o| o.to_string()));
        assert_eq!(out, Err(FuelExhausted));
    }
}
