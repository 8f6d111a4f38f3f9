//! Loading `.alpd` domain files and `.alp` program files into validated
//! structures, and printing domains back out.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::domain::{
    ActionSpec, BodyLiteral, DomainFile, EffectCase, Functor, Program, ProgramClause, PropAtom, PropClause, Query,
    SensorAxiom, SensorCase, ShowProperty, Signature, Sort, Span, StateProperty,
};
use crate::pi::{prime_closure, Closure, PiList};
use crate::reader::{read_clauses, read_term, ReadTerm, SyntaxError};
use crate::term::{normalize_clause, Clause, Literal, Named, Normalized, Sym, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{span}: {message}")]
    Invalid { span: Span, message: String },
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::Syntax(e) => e.span,
            ParseError::Invalid { span, .. } => *span,
        }
    }
}

fn invalid<T>(span: Span, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::Invalid { span, message: message.into() })
}

struct Ctx<'a> {
    sig: &'a Signature,
    span: Span,
    names: &'a [Sym],
}

impl Ctx<'_> {
    fn show(&self, t: &Term) -> String {
        Named { item: t, names: self.names }.to_string()
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        invalid(self.span, message)
    }
}

fn literal_of(ctx: &Ctx, t: &Term) -> Result<PropAtom, ParseError> {
    let (negative, atom) = match t {
        Term::App(f, args) if &**f == "-" && args.len() == 1 => (true, &args[0]),
        _ => (false, t),
    };
    let Some((name, arity)) = atom.functor() else {
        return ctx.fail(format!("expected a fluent literal or aux atom, found {}", ctx.show(t)));
    };
    match ctx.sig.sort_of(name, arity) {
        Sort::Fluent => Ok(PropAtom::Fluent(Literal { atom: atom.clone(), negative })),
        Sort::Aux if negative => ctx.fail(format!("aux atom {} may only occur positively", ctx.show(atom))),
        Sort::Aux => Ok(PropAtom::Aux(atom.clone())),
        Sort::Builtin => {
            ctx.fail(format!("builtin {name}/{arity} is not allowed in a state property; wrap it in an aux predicate"))
        }
        Sort::SenseFluent => {
            ctx.fail(format!("sense fluent {name}/{arity} may only be queried on its own, as ?({name}(X))"))
        }
        Sort::Action => ctx.fail(format!("action {name}/{arity} used as a state property")),
        Sort::Plain => ctx.fail(format!("undeclared fluent {name}/{arity}")),
    }
}

/// A PI-list shaped property: a list of literals and literal lists, or a
/// single literal.
fn property_of(ctx: &Ctx, t: &Term) -> Result<StateProperty, ParseError> {
    let elems = match t.as_list() {
        Some(items) => items,
        None => vec![t],
    };
    let mut clauses = Vec::new();
    for e in elems {
        match e.as_list() {
            Some(items) if items.is_empty() => return ctx.fail("empty clause in PI-list"),
            Some(items) => {
                let atoms = items.into_iter().map(|i| literal_of(ctx, i)).collect::<Result<Vec<_>, _>>()?;
                clauses.push(PropClause(atoms));
            }
            None => clauses.push(PropClause(vec![literal_of(ctx, e)?])),
        }
    }
    Ok(StateProperty(clauses))
}

fn ground_fluent_clauses(ctx: &Ctx, phi: &StateProperty, what: &str) -> Result<Vec<Clause>, ParseError> {
    let mut out = Vec::new();
    for c in phi.clauses() {
        let mut lits = Vec::new();
        for a in &c.0 {
            match a {
                PropAtom::Aux(t) => return ctx.fail(format!("aux predicate {} used in {what}", ctx.show(t))),
                PropAtom::Fluent(l) if !l.is_ground() => {
                    return ctx.fail(format!("non-ground {what}: {}", Named { item: l, names: ctx.names }))
                }
                PropAtom::Fluent(l) => lits.push(l.clone()),
            }
        }
        if let Normalized::Clause(c) = normalize_clause(lits) {
            out.push(c);
        }
    }
    Ok(out)
}

fn functor_list(t: &Term, span: Span) -> Result<Vec<Functor>, ParseError> {
    let Some(items) = t.as_list() else {
        return invalid(span, "declaration expects a list of name/arity items");
    };
    items
        .into_iter()
        .map(|i| match i {
            Term::App(slash, args) if &**slash == "/" && args.len() == 2 => match (&args[0], &args[1]) {
                (Term::App(n, a), Term::Int(k)) if a.is_empty() && *k >= 0 => Ok((n.clone(), *k as usize)),
                _ => invalid(span, format!("malformed declaration item {i}")),
            },
            Term::App(n, a) if a.is_empty() => Ok((n.clone(), 0)),
            _ => invalid(span, format!("malformed declaration item {i}")),
        })
        .collect()
}

fn flatten_conj(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::App(f, args) if &**f == "," && args.len() == 2 => {
            flatten_conj(&args[0], out);
            flatten_conj(&args[1], out);
        }
        _ => out.push(t.clone()),
    }
}

fn body_literal(ctx: &Ctx, g: &Term, allow_special: bool) -> Result<BodyLiteral, ParseError> {
    let Some((name, arity)) = g.functor() else {
        return ctx.fail(format!("goal must be callable, found {}", ctx.show(g)));
    };
    match (name, arity) {
        ("!", 0) => Ok(BodyLiteral::Cut),
        (";", 2) | ("->", 2) | ("\\+", 1) => ctx.fail(format!("{name}/{arity} is not supported in agent programs")),
        ("do", 1) | ("?", 1) if !allow_special => ctx.fail(format!("{name}/1 may not occur in aux definitions")),
        ("do", 1) => {
            let a = &g.args()[0];
            if let Some((an, aa)) = a.functor() {
                if ctx.sig.sort_of(an, aa) != Sort::Action {
                    return ctx.fail(format!("do/1 expects a declared action, found {}", ctx.show(a)));
                }
            }
            Ok(BodyLiteral::Do(a.clone()))
        }
        ("?", 1) => {
            let phi = &g.args()[0];
            check_query_property(ctx, phi)?;
            Ok(BodyLiteral::Query(phi.clone()))
        }
        _ => match ctx.sig.sort_of(name, arity) {
            Sort::Fluent | Sort::SenseFluent => {
                ctx.fail(format!("fluent {name}/{arity} used as a program atom; query it with ?(..)"))
            }
            Sort::Action => ctx.fail(format!("action {name}/{arity} used as a program atom; execute it with do(..)")),
            _ => Ok(BodyLiteral::Call(g.clone())),
        },
    }
}

/// Validates the argument of `?(..)`.
fn check_query_property(ctx_sig: &Ctx, phi: &Term) -> Result<(), ParseError> {
    if phi.is_var() {
        return Ok(());
    }
    if let Some((n, a)) = phi.functor() {
        if ctx_sig.sig.sort_of(n, a) == Sort::SenseFluent {
            if a != 1 || !phi.args()[0].is_var() {
                return ctx_sig.fail(format!("sense fluent must be queried as ?({n}(X)) with X a variable"));
            }
            return Ok(());
        }
    }
    property_of(ctx_sig, phi).map(|_| ())
}

/// Classified `?(..)` argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QueryKind {
    Sense { sensor: Sym, target: Term },
    Property(StateProperty),
}

/// Classify an instantiated `?(..)` argument at run time.
pub fn classify_query(sig: &Signature, phi: &Term) -> Result<QueryKind, ParseError> {
    let ctx = Ctx { sig, span: Span::default(), names: &[] };
    if phi.is_var() {
        return ctx.fail("?(..) called with an unbound property");
    }
    if let Some((n, 1)) = phi.functor() {
        if sig.sort_of(n, 1) == Sort::SenseFluent {
            return Ok(QueryKind::Sense { sensor: Arc::from(n), target: phi.args()[0].clone() });
        }
    }
    Ok(QueryKind::Property(property_of(&ctx, phi)?))
}

fn program_clause(ctx: &Ctx, rt: &ReadTerm, allow_special: bool) -> Result<ProgramClause, ParseError> {
    let (head, body) = match &rt.term {
        Term::App(f, args) if &**f == ":-" && args.len() == 2 => (&args[0], Some(&args[1])),
        t => (t, None),
    };
    let Some((hn, ha)) = head.functor() else {
        return ctx.fail(format!("clause head must be callable, found {}", ctx.show(head)));
    };
    if matches!((hn, ha), ("do", 1) | ("?", 1) | ("!", 0) | (",", 2)) {
        return ctx.fail(format!("{hn}/{ha} may not occur in a clause head"));
    }
    if crate::domain::is_builtin(hn, ha) {
        return ctx.fail(format!("cannot redefine built-in {hn}/{ha}"));
    }
    match ctx.sig.sort_of(hn, ha) {
        Sort::Fluent | Sort::SenseFluent | Sort::Action => {
            return ctx.fail(format!("{hn}/{ha} is declared in the domain and cannot head a clause"))
        }
        _ => {}
    }
    let mut goals = Vec::new();
    if let Some(b) = body {
        flatten_conj(b, &mut goals);
    }
    let body = goals.iter().map(|g| body_literal(ctx, g, allow_special)).collect::<Result<Vec<_>, _>>()?;
    Ok(ProgramClause { head: head.clone(), body, var_names: rt.var_names.clone(), span: rt.span })
}

fn parse_action(ctx: &Ctx, args: &[Term], names: &[Sym]) -> Result<ActionSpec, ParseError> {
    let head = &args[0];
    match head.functor() {
        Some((n, a)) if ctx.sig.sort_of(n, a) == Sort::Action => {}
        Some((n, a)) => return ctx.fail(format!("undeclared action {n}/{a}")),
        None => return ctx.fail("action head must be an action term"),
    }
    let precondition = property_of(ctx, &args[1])?;
    let Some(case_terms) = args[2].as_list() else {
        return ctx.fail("effect cases must be a list of Cond-Effects pairs");
    };
    let mut cases = Vec::new();
    for ct in case_terms {
        let (cond, effs) = match ct {
            Term::App(f, a) if &**f == "-" && a.len() == 2 => (&a[0], &a[1]),
            _ => return ctx.fail(format!("effect case must be Cond-Effects, found {}", ctx.show(ct))),
        };
        let condition = property_of(ctx, cond)?;
        let Some(eff_items) = effs.as_list() else {
            return ctx.fail("effects must be a list of fluent literals");
        };
        let mut effects = Vec::new();
        for e in eff_items {
            match literal_of(ctx, e)? {
                PropAtom::Fluent(l) => effects.push(l),
                PropAtom::Aux(t) => return ctx.fail(format!("aux atom {} used as an effect", ctx.show(&t))),
            }
        }
        cases.push(EffectCase { condition, effects });
    }
    let mut covered = head.vars();
    precondition.vars().into_iter().for_each(|v| {
        if !covered.contains(&v) {
            covered.push(v)
        }
    });
    for case in &cases {
        let mut case_vars = case.condition.vars();
        case.effects.iter().for_each(|l| l.atom.collect_vars(&mut case_vars));
        if let Some(v) = case_vars.iter().find(|v| !covered.contains(v)) {
            return ctx.fail(format!(
                "effect variable {} of {} does not occur in the head or precondition",
                names[v.0 as usize],
                ctx.show(head)
            ));
        }
    }
    Ok(ActionSpec { head: head.clone(), precondition, cases, var_names: names.to_vec() })
}

fn parse_sensor_axiom(ctx: &Ctx, args: &[Term], names: &[Sym]) -> Result<SensorAxiom, ParseError> {
    let s = &args[0];
    let (sense, value_var) = match s {
        Term::App(n, a) if a.len() == 1 && ctx.sig.sort_of(n, 1) == Sort::SenseFluent => match &a[0] {
            Term::Var(v) => (n.clone(), *v),
            _ => return ctx.fail("sensor axiom head must be s(X) with X a variable"),
        },
        _ => return ctx.fail(format!("{} is not a declared unary sense fluent", ctx.show(s))),
    };
    let Some(items) = args[1].as_list() else {
        return ctx.fail("sensor values must be a list of Val-Index-Meaning triples");
    };
    let mut cases = Vec::new();
    for it in items {
        let bad = || ctx.fail::<SensorCase>(format!("malformed sensor triple {}", ctx.show(it)));
        let (vi, meaning) = match it {
            Term::App(f, a) if &**f == "-" && a.len() == 2 => (&a[0], &a[1]),
            _ => return bad().map(|_| unreachable!()),
        };
        let (val, index) = match vi {
            Term::App(f, a) if &**f == "-" && a.len() == 2 => (&a[0], &a[1]),
            _ => return bad().map(|_| unreachable!()),
        };
        let val = match val.as_list() {
            Some(v) if v.len() == 1 => v[0],
            _ => val,
        };
        let result = match val {
            Term::App(f, a) if &**f == "-" && a.len() == 2 && a[0] == Term::Var(value_var) => a[1].clone(),
            _ => {
                return ctx
                    .fail(format!("sensor value must be X-Result with X the axiom variable, found {}", ctx.show(val)))
            }
        };
        if !result.is_ground() {
            return ctx.fail(format!("sensing result {} must be ground", ctx.show(&result)));
        }
        let index = property_of(ctx, index)?;
        if index.clauses().iter().any(|c| c.0.len() != 1) {
            return ctx.fail("sensor index must consist of unit clauses");
        }
        let meaning = property_of(ctx, meaning)?;
        if meaning.clauses().iter().any(|c| c.aux().next().is_some()) {
            return ctx.fail("sensor meaning may mention fluent literals only");
        }
        let mut allowed = vec![value_var];
        index.vars().into_iter().for_each(|v| allowed.push(v));
        if let Some(v) = meaning.vars().into_iter().find(|v| !allowed.contains(v)) {
            return ctx.fail(format!("meaning variable {} does not occur in the value or index", names[v.0 as usize]));
        }
        cases.push(SensorCase { result, index, meaning });
    }
    Ok(SensorAxiom { sense, value_var, cases, var_names: names.to_vec() })
}

/// Parse and validate an action domain file.
pub fn parse_domain(text: &str) -> Result<DomainFile, ParseError> {
    let items = read_clauses(text)?;
    let mut sig = Signature::default();
    let mut rest = Vec::new();
    for rt in &items {
        let t = &rt.term;
        match t.functor() {
            Some(("fluents", 1)) => sig.fluents.extend(functor_list(&t.args()[0], rt.span)?),
            Some(("actions", 1)) => sig.actions.extend(functor_list(&t.args()[0], rt.span)?),
            Some(("sensors", 1)) => {
                for (n, a) in functor_list(&t.args()[0], rt.span)? {
                    if a != 1 {
                        return invalid(rt.span, format!("sense fluent {n}/{a} must be unary"));
                    }
                    sig.sensors.insert((n, a));
                }
            }
            Some(("aux", 1)) => sig.aux.extend(functor_list(&t.args()[0], rt.span)?),
            Some(("objects", 2)) => {
                let sort = match &t.args()[0] {
                    Term::App(n, a) if a.is_empty() => n.clone(),
                    _ => return invalid(rt.span, "objects/2 expects a sort name"),
                };
                let Some(objs) = t.args()[1].as_list() else {
                    return invalid(rt.span, "objects/2 expects a list");
                };
                if let Some(o) = objs.iter().find(|o| !o.is_ground()) {
                    return invalid(rt.span, format!("object {o} must be ground"));
                }
                sig.objects.entry(sort).or_default().extend(objs.into_iter().cloned());
            }
            _ => rest.push(rt),
        }
    }
    for (a, an, b, bn) in [
        (&sig.sensors, "sense fluent", &sig.fluents, "fluent"),
        (&sig.sensors, "sense fluent", &sig.aux, "aux predicate"),
        (&sig.fluents, "fluent", &sig.aux, "aux predicate"),
        (&sig.actions, "action", &sig.fluents, "fluent"),
    ] {
        if let Some((n, k)) = a.intersection(b).next() {
            return invalid(Span { line: 1, col: 1 }, format!("{n}/{k} declared both as {an} and {bn}"));
        }
    }

    let mut domain = DomainFile { signature: sig.clone(), ..DomainFile::default() };
    let mut initial: Option<PiList> = None;
    for rt in rest {
        let ctx = Ctx { sig: &sig, span: rt.span, names: &rt.var_names };
        let t = &rt.term;
        match t.functor() {
            Some(("initial_state", 1)) => {
                if initial.is_some() {
                    return ctx.fail("duplicate initial_state");
                }
                let phi = property_of(&ctx, &t.args()[0])?;
                let clauses = ground_fluent_clauses(&ctx, &phi, "initial state")?;
                let mut given = clauses.clone();
                given.sort();
                given.dedup();
                match prime_closure(clauses) {
                    Closure::Prime(p) => {
                        if p.clauses() != given.as_slice() {
                            domain.warnings.push(format!("{}: initial state normalized to prime form", rt.span));
                        }
                        initial = Some(p);
                    }
                    Closure::Inconsistent => return ctx.fail("initial state is inconsistent"),
                }
            }
            Some(("action", 3)) => domain.actions.push(parse_action(&ctx, t.args(), &rt.var_names)?),
            Some(("sensor_axiom", 2)) => {
                let ax = parse_sensor_axiom(&ctx, t.args(), &rt.var_names)?;
                if domain.sensor_axiom(&ax.sense).is_some() {
                    return ctx.fail(format!("duplicate sensor axiom for {}", ax.sense));
                }
                domain.sensor_axioms.push(ax);
            }
            _ => {
                let head = match t {
                    Term::App(f, a) if &**f == ":-" && a.len() == 2 => &a[0],
                    Term::App(f, a) if &**f == ":-" && a.len() == 1 => {
                        return ctx.fail("directives are not allowed in domain files")
                    }
                    other => other,
                };
                match head.functor() {
                    Some((n, a)) if sig.sort_of(n, a) == Sort::Aux => {
                        domain.aux_program.push(program_clause(&ctx, rt, false)?);
                    }
                    Some((n, a)) => {
                        return ctx.fail(format!("unknown domain item {n}/{a} (aux predicates must be declared)"))
                    }
                    None => return ctx.fail("expected a domain item"),
                }
            }
        }
    }
    for (n, a) in &sig.sensors {
        if domain.sensor_axiom(n).is_none() {
            domain.warnings.push(format!("sense fluent {n}/{a} has no sensor axiom"));
        }
    }
    domain.initial_state = initial.unwrap_or_default();
    Ok(domain)
}

/// Parse an agent program against the signature of its domain.
pub fn parse_program(text: &str, sig: &Signature) -> Result<Program, ParseError> {
    let mut program = Program::default();
    for rt in read_clauses(text)? {
        let ctx = Ctx { sig, span: rt.span, names: &rt.var_names };
        match &rt.term {
            Term::App(f, a) if &**f == ":-" && a.len() == 1 => {
                if program.query.is_some() {
                    return ctx.fail("more than one query directive");
                }
                program.query = Some(query_from(&ctx, &a[0], &rt.var_names)?);
            }
            _ => {
                let c = program_clause(&ctx, &rt, true)?;
                let (n, a) = c.functor();
                if sig.sort_of(&n, a) == Sort::Aux {
                    return ctx.fail(format!("{n}/{a} is an aux predicate of the domain and cannot be redefined"));
                }
                program.clauses.push(c);
            }
        }
    }
    Ok(program)
}

fn query_from(ctx: &Ctx, t: &Term, names: &[Sym]) -> Result<Query, ParseError> {
    let mut goals = Vec::new();
    flatten_conj(t, &mut goals);
    let goals = goals.iter().map(|g| body_literal(ctx, g, true)).collect::<Result<Vec<_>, _>>()?;
    Ok(Query { goals, var_names: names.to_vec() })
}

/// Parse a query given as text, e.g. `explore([2,3,4,5],[])`.
pub fn parse_query(text: &str, sig: &Signature) -> Result<Query, ParseError> {
    let rt = read_term(text.trim().trim_start_matches("?-").trim_start_matches(":-"))?;
    let ctx = Ctx { sig, span: rt.span, names: &rt.var_names };
    query_from(&ctx, &rt.term, &rt.var_names)
}

fn show_functors(set: &BTreeSet<Functor>) -> String {
    let items: Vec<String> = set.iter().map(|(n, a)| format!("{}/{a}", Term::atom(n))).collect();
    format!("[{}]", items.join(", "))
}

fn show_body(out: &mut String, goals: &[BodyLiteral], names: &[Sym]) {
    for (i, g) in goals.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}", Named { item: &g.to_term(), names });
    }
}

/// Render a domain in the surface syntax accepted by [`parse_domain`].
pub fn print_domain(d: &DomainFile) -> String {
    let mut out = String::new();
    let sig = &d.signature;
    let _ = writeln!(out, "fluents({}).", show_functors(&sig.fluents));
    let _ = writeln!(out, "actions({}).", show_functors(&sig.actions));
    if !sig.sensors.is_empty() {
        let _ = writeln!(out, "sensors({}).", show_functors(&sig.sensors));
    }
    if !sig.aux.is_empty() {
        let _ = writeln!(out, "aux({}).", show_functors(&sig.aux));
    }
    for (sort, objs) in &sig.objects {
        let _ = writeln!(out, "objects({}, {}).", Term::atom(sort), Term::list(objs.clone()));
    }
    let _ = writeln!(out, "\ninitial_state({}).\n", d.initial_state);
    for a in &d.actions {
        let names = &a.var_names;
        let _ = write!(out, "action({}, {}, [", Named { item: &a.head, names }, ShowProperty(&a.precondition, names));
        for (i, c) in a.cases.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let effs: Vec<String> = c.effects.iter().map(|l| Named { item: l, names }.to_string()).collect();
            let _ = write!(out, "{}-[{}]", ShowProperty(&c.condition, names), effs.join(", "));
        }
        out.push_str("]).\n");
    }
    for ax in &d.sensor_axioms {
        let names = &ax.var_names;
        let x = Named { item: &Term::Var(ax.value_var), names }.to_string();
        let _ = write!(out, "sensor_axiom({}({x}), [", Term::atom(&ax.sense));
        for (i, c) in ax.cases.iter().enumerate() {
            if i > 0 {
                out.push_str(",\n    ");
            }
            let _ = write!(
                out,
                "{x}-{}-{}-{}",
                Named { item: &c.result, names },
                ShowProperty(&c.index, names),
                ShowProperty(&c.meaning, names)
            );
        }
        out.push_str("]).\n");
    }
    if !d.aux_program.is_empty() {
        out.push('\n');
    }
    for c in &d.aux_program {
        let _ = write!(out, "{}", Named { item: &c.head, names: &c.var_names });
        if !c.body.is_empty() {
            out.push_str(" :- ");
            show_body(&mut out, &c.body, &c.var_names);
        }
        out.push_str(".\n");
    }
    out
}
