use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{tokenize, Tok, Token};
use crate::ast::{
    ClassDecl, ClassRef, EnumDecl, Expr, FieldDecl, FieldType, GenericParam, MethodDecl, Name, Program, Ref, Type,
    Value,
};
use crate::diagnostic::{sort_diagnostics, Code, Diagnostic, Span};
use crate::usage::{Usage, UsageBody, UsageError};

type PResult<T> = Result<T, Diagnostic>;

/// Parameter name given to methods declared as `t m()`.
pub const IMPLICIT_PARAM: &str = "x";

/// Parses a whole program. Syntax errors stop at the first one; name and
/// shape errors are collected and returned together, sorted.
pub fn parse_program(file: &str, text: &str) -> Result<Program, Vec<Diagnostic>> {
    let toks = tokenize(file, text).map_err(|d| vec![d])?;
    let mut p = Parser::new(toks);
    let program = p.program().map_err(|d| vec![d])?;
    let mut diags = p.diags;
    validate_main(file, &program, &mut diags);
    if diags.is_empty() {
        Ok(program)
    } else {
        sort_diagnostics(&mut diags);
        Err(diags)
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    enum_names: BTreeSet<Name>,
    labels: BTreeSet<Name>,
    classes: BTreeMap<Name, bool>,
    generic: Option<GenericParam>,
    param: Name,
    bound_loops: Vec<Name>,
    method_loops: BTreeSet<Name>,
}

/// A member type before we know whether it belongs to a field or a method.
enum RawType {
    Void,
    Bool,
    Named { name: Name, arg: Option<Type>, usage: Option<Usage>, var_usage: Option<Name> },
}

impl Parser {
    fn new(toks: Vec<Token>) -> Self {
        let mut p = Parser {
            toks,
            pos: 0,
            diags: Vec::new(),
            enum_names: BTreeSet::new(),
            labels: BTreeSet::new(),
            classes: BTreeMap::new(),
            generic: None,
            param: String::new(),
            bound_loops: Vec::new(),
            method_loops: BTreeSet::new(),
        };
        p.prescan();
        p
    }

    /// Collects enum names, labels and class names so that identifiers can
    /// be resolved in a single pass.
    fn prescan(&mut self) {
        let t = &self.toks;
        let mut i = 0;
        while i < t.len() {
            match (&t[i].tok, t.get(i + 1).map(|t| &t.tok)) {
                (Tok::Enum, Some(Tok::Ident(n))) => {
                    self.enum_names.insert(n.clone());
                    let mut j = i + 2;
                    if matches!(t.get(j).map(|t| &t.tok), Some(Tok::LBrace)) {
                        j += 1;
                        while let Some(Tok::Ident(l)) = t.get(j).map(|t| &t.tok) {
                            self.labels.insert(l.clone());
                            j += 1;
                        }
                    }
                    i = j;
                }
                (Tok::Class, Some(Tok::Ident(n))) => {
                    self.classes.insert(n.clone(), false);
                    i += 2;
                }
                (Tok::Class, Some(Tok::Lt)) => {
                    // class < A [ b ] > C
                    if let Some(Tok::Ident(n)) = t.get(i + 7).map(|t| &t.tok) {
                        self.classes.insert(n.clone(), true);
                    }
                    i += 2;
                }
                _ => i += 1,
            }
        }
    }

    // ---- token helpers ----

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span.clone()
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span.clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        Diagnostic::error(Code::SyntaxError, self.span(), format!("expected {expected}, found {}", self.peek()))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.peek() == &tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(Name, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.bump().span;
                Ok((s, sp))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn diag(&mut self, code: Code, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(code, span, msg));
    }

    fn is_label(&self, n: &str) -> bool {
        self.labels.contains(n)
    }

    // ---- declarations ----

    fn program(&mut self) -> PResult<Program> {
        let mut enums: Vec<EnumDecl> = Vec::new();
        let mut classes: Vec<ClassDecl> = Vec::new();
        let mut seen_labels: BTreeSet<Name> = BTreeSet::new();
        let mut seen_types: BTreeSet<Name> = BTreeSet::new();
        loop {
            match self.peek() {
                Tok::Enum => {
                    let e = self.enum_decl()?;
                    if !seen_types.insert(e.name.clone()) {
                        self.diag(Code::DuplicateName, e.span.clone(), format!("`{}` is declared twice", e.name));
                    }
                    for l in &e.labels {
                        if !seen_labels.insert(l.clone()) {
                            self.diag(
                                Code::DuplicateName,
                                e.span.clone(),
                                format!("label `{l}` is declared more than once"),
                            );
                        }
                    }
                    enums.push(e);
                }
                Tok::Class => {
                    let c = self.class_decl()?;
                    if !seen_types.insert(c.name.clone()) {
                        self.diag(Code::DuplicateName, c.span.clone(), format!("`{}` is declared twice", c.name));
                    }
                    classes.push(c);
                }
                Tok::Eof => break,
                _ => return Err(self.unexpected("`enum` or `class`")),
            }
        }
        Ok(Program { enums, classes })
    }

    fn enum_decl(&mut self) -> PResult<EnumDecl> {
        let start = self.expect(Tok::Enum)?;
        let (name, _) = self.ident("enum name")?;
        self.expect(Tok::LBrace)?;
        let mut labels = Vec::new();
        while let Tok::Ident(l) = self.peek().clone() {
            self.bump();
            labels.push(l);
        }
        let end = self.expect(Tok::RBrace)?;
        let span = start.to(&end);
        if labels.is_empty() {
            self.diag(Code::EmptyEnum, span.clone(), format!("enum `{name}` has no labels"));
        }
        Ok(EnumDecl { name, labels, span })
    }

    fn class_decl(&mut self) -> PResult<ClassDecl> {
        let start = self.expect(Tok::Class)?;
        self.generic = None;
        if self.eat(&Tok::Lt) {
            let (class_var, sp) = self.ident("class variable")?;
            self.expect(Tok::LBrack)?;
            let (usage_var, _) = self.ident("usage variable")?;
            self.expect(Tok::RBrack)?;
            self.expect(Tok::Gt)?;
            if self.classes.contains_key(&class_var) || self.enum_names.contains(&class_var) {
                self.diag(
                    Code::DuplicateName,
                    sp,
                    format!("class variable `{class_var}` clashes with a declared type"),
                );
            }
            self.generic = Some(GenericParam { class_var, usage_var });
        }
        let (name, _) = self.ident("class name")?;
        self.expect(Tok::LBrace)?;
        let usage = self.usage()?;
        let mut fields: Vec<FieldDecl> = Vec::new();
        let mut methods: Vec<MethodDecl> = Vec::new();
        while self.peek() != &Tok::RBrace {
            let member_start = self.span();
            let raw = self.raw_type()?;
            let (mname, _) = self.ident("member name")?;
            if self.peek() == &Tok::LParen {
                let m = self.method(raw, mname, member_start)?;
                if methods.iter().any(|o| o.name == m.name) {
                    self.diag(Code::DuplicateName, m.span.clone(), format!("method `{}` is declared twice", m.name));
                }
                methods.push(m);
            } else {
                let sp = member_start.to(&self.prev_span());
                let ty = self.field_type(raw, &sp)?;
                if fields.iter().any(|f| f.name == mname) {
                    self.diag(Code::DuplicateName, sp.clone(), format!("field `{mname}` is declared twice"));
                }
                if self.is_label(&mname) {
                    self.diag(Code::DuplicateName, sp.clone(), format!("field `{mname}` clashes with an enum label"));
                }
                fields.push(FieldDecl { name: mname, ty });
            }
        }
        let end = self.expect(Tok::RBrace)?;
        let generic = self.generic.take();
        Ok(ClassDecl { name, generic, usage, fields, methods, span: start.to(&end) })
    }

    fn method(&mut self, raw: RawType, name: Name, start: Span) -> PResult<MethodDecl> {
        let return_type = self.method_type(raw, &start)?;
        self.expect(Tok::LParen)?;
        let (param_name, param_type) = if self.eat(&Tok::RParen) {
            (IMPLICIT_PARAM.to_string(), Type::Void)
        } else {
            let ty_start = self.span();
            let raw = self.raw_type()?;
            let ty = self.method_type(raw, &ty_start)?;
            let (x, sp) = self.ident("parameter name")?;
            if self.is_label(&x) {
                self.diag(Code::DuplicateName, sp, format!("parameter `{x}` clashes with an enum label"));
            }
            self.expect(Tok::RParen)?;
            (x, ty)
        };
        let header = start.to(&self.prev_span());
        self.param = param_name.clone();
        self.bound_loops.clear();
        self.method_loops.clear();
        self.expect(Tok::LBrace)?;
        let body = self.block_rest()?;
        Ok(MethodDecl { name, param_name, param_type, return_type, body, span: header })
    }

    /// Body after an opening `{`, through the closing `}`. Empty is `unit`.
    fn block_rest(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::RBrace) {
            return Ok(Expr::unit());
        }
        let e = self.seq()?;
        self.expect(Tok::RBrace)?;
        Ok(e)
    }

    // ---- types ----

    fn raw_type(&mut self) -> PResult<RawType> {
        match self.peek().clone() {
            Tok::Void => {
                self.bump();
                Ok(RawType::Void)
            }
            Tok::Bool => {
                self.bump();
                Ok(RawType::Bool)
            }
            Tok::Ident(name) => {
                let sp = self.bump().span;
                let is_var = self.generic.as_ref().is_some_and(|g| g.class_var == name);
                if is_var {
                    let var_usage = if self.eat(&Tok::LBrack) {
                        let (b, _) = self.ident("usage variable")?;
                        self.expect(Tok::RBrack)?;
                        Some(b)
                    } else {
                        None
                    };
                    return Ok(RawType::Named { name, arg: None, usage: None, var_usage });
                }
                if !self.enum_names.contains(&name) && !self.classes.contains_key(&name) {
                    self.diag(Code::UndeclaredName, sp.clone(), format!("type `{name}` is not declared"));
                }
                let arg = if self.eat(&Tok::Lt) {
                    let arg_start = self.span();
                    let raw = self.raw_type()?;
                    let t = self.method_type(raw, &arg_start)?;
                    if !matches!(t, Type::Object(..) | Type::Var(_)) {
                        return Err(Diagnostic::error(
                            Code::SyntaxError,
                            arg_start,
                            "a type argument must be a typestate or a generic variable",
                        ));
                    }
                    self.expect(Tok::Gt)?;
                    Some(t)
                } else {
                    None
                };
                if let Some(&generic) = self.classes.get(&name) {
                    if generic != arg.is_some() {
                        let msg = if generic {
                            format!("generic class `{name}` needs a type argument")
                        } else {
                            format!("class `{name}` takes no type argument")
                        };
                        self.diag(Code::ArityMismatch, sp.clone(), msg);
                    }
                }
                let usage = if self.eat(&Tok::LBrack) {
                    let u = self.usage()?;
                    self.expect(Tok::RBrack)?;
                    Some(u)
                } else {
                    None
                };
                Ok(RawType::Named { name, arg, usage, var_usage: None })
            }
            _ => Err(self.unexpected("a type")),
        }
    }

    fn method_type(&mut self, raw: RawType, sp: &Span) -> PResult<Type> {
        Ok(match raw {
            RawType::Void => Type::Void,
            RawType::Bool => Type::Bool,
            RawType::Named { name, arg, usage, var_usage } => {
                if let Some(g) = self.generic.clone().filter(|g| g.class_var == name) {
                    match var_usage {
                        Some(b) if b == g.usage_var => Type::Var(g),
                        Some(b) => {
                            self.diag(
                                Code::UndeclaredName,
                                sp.clone(),
                                format!("usage variable `{b}` is not the class parameter"),
                            );
                            Type::Var(g)
                        }
                        None => {
                            return Err(Diagnostic::error(
                                Code::SyntaxError,
                                sp.clone(),
                                format!(
                                    "generic variable `{name}` needs its usage variable, as in `{name}[{}]`",
                                    g.usage_var
                                ),
                            ))
                        }
                    }
                } else if self.enum_names.contains(&name) {
                    if usage.is_some() || arg.is_some() {
                        return Err(Diagnostic::error(
                            Code::SyntaxError,
                            sp.clone(),
                            format!("enum type `{name}` takes no usage"),
                        ));
                    }
                    Type::Enum(name)
                } else {
                    let Some(u) = usage else {
                        return Err(Diagnostic::error(
                            Code::SyntaxError,
                            sp.clone(),
                            format!("class type `{name}` needs a usage, as in `{name}[end]`"),
                        ));
                    };
                    Type::Object(ClassRef { name, arg: arg.map(Box::new) }, u)
                }
            }
        })
    }

    fn field_type(&mut self, raw: RawType, sp: &Span) -> PResult<FieldType> {
        Ok(match raw {
            RawType::Void => FieldType::Void,
            RawType::Bool => FieldType::Bool,
            RawType::Named { name, arg, usage, var_usage } => {
                if usage.is_some() || var_usage.is_some() {
                    return Err(Diagnostic::error(
                        Code::SyntaxError,
                        sp.clone(),
                        "field types are written without a usage",
                    ));
                }
                if self.generic.as_ref().is_some_and(|g| g.class_var == name) {
                    FieldType::Var(name)
                } else if self.enum_names.contains(&name) {
                    self.diag(Code::EnumTypedField, sp.clone(), format!("fields cannot have enum type `{name}`"));
                    FieldType::Enum(name)
                } else {
                    FieldType::Class(ClassRef { name, arg: arg.map(Box::new) })
                }
            }
        })
    }

    // ---- usages ----

    fn usage(&mut self) -> PResult<Usage> {
        let start = self.span();
        let body = self.usage_body()?;
        let mut eqs: BTreeMap<Name, UsageBody> = BTreeMap::new();
        if self.eat(&Tok::LBrack) {
            while let Tok::Ident(x) = self.peek().clone() {
                let sp = self.bump().span;
                self.expect(Tok::Eq)?;
                let rhs = self.usage_body()?;
                if eqs.insert(x.clone(), rhs).is_some() {
                    self.diag(Code::DuplicateName, sp, format!("usage variable `{x}` is defined twice"));
                }
            }
            self.expect(Tok::RBrack)?;
        }
        let span = start.to(&self.prev_span());
        match Usage::checked(body, eqs) {
            Ok(u) => Ok(u),
            Err(e) => {
                let code = match e {
                    UsageError::UnboundVariable(_) => Code::UnboundUsageVariable,
                    UsageError::UnfoldCycle(_) => Code::UnfoldCycle,
                };
                self.diag(code, span, e.to_string());
                Ok(Usage::end())
            }
        }
    }

    /// `{m; w ...}`, `end`, or a variable.
    fn usage_body(&mut self) -> PResult<UsageBody> {
        match self.peek().clone() {
            Tok::End => {
                self.bump();
                Ok(UsageBody::End)
            }
            Tok::Ident(x) => {
                self.bump();
                Ok(UsageBody::Var(x))
            }
            Tok::LBrace => {
                self.bump();
                let mut entries = BTreeMap::new();
                while let Tok::Ident(m) = self.peek().clone() {
                    let sp = self.bump().span;
                    self.expect(Tok::Semi)?;
                    let w = self.usage_cont()?;
                    if entries.insert(m.clone(), w).is_some() {
                        self.diag(Code::DuplicateName, sp, format!("method `{m}` appears twice in one branch"));
                    }
                }
                self.expect(Tok::RBrace)?;
                if entries.is_empty() {
                    Ok(UsageBody::End)
                } else {
                    Ok(UsageBody::Branch(entries))
                }
            }
            _ => Err(self.unexpected("a usage")),
        }
    }

    /// Continuation of a branch entry: a usage or a choice `<l: u ...>`.
    fn usage_cont(&mut self) -> PResult<UsageBody> {
        if !self.eat(&Tok::Lt) {
            return self.usage_body();
        }
        let mut entries = BTreeMap::new();
        while let Tok::Ident(l) = self.peek().clone() {
            let sp = self.bump().span;
            self.expect(Tok::Colon)?;
            let u = self.usage_body()?;
            if !self.is_label(&l) {
                self.diag(Code::UndeclaredName, sp.clone(), format!("`{l}` is not an enum label"));
            }
            if entries.insert(l.clone(), u).is_some() {
                self.diag(Code::DuplicateName, sp, format!("label `{l}` appears twice in one choice"));
            }
        }
        if entries.is_empty() {
            return Err(self.unexpected("a label"));
        }
        self.expect(Tok::Gt)?;
        Ok(UsageBody::Choice(entries))
    }

    // ---- expressions ----

    /// True at a position where a sequence may end after a trailing `;`.
    fn at_seq_end(&self) -> bool {
        match self.peek() {
            Tok::RBrace | Tok::RParen | Tok::Eof => true,
            Tok::Ident(n) => self.is_label(n) && self.peek_at(1) == &Tok::Colon,
            _ => false,
        }
    }

    fn seq(&mut self) -> PResult<Expr> {
        let first = self.stmt()?;
        if self.eat(&Tok::Semi) && !self.at_seq_end() {
            let rest = self.seq()?;
            return Ok(Expr::seq(first, rest));
        }
        Ok(first)
    }

    fn stmt(&mut self) -> PResult<Expr> {
        if let Tok::Ident(n) = self.peek().clone() {
            match self.peek_at(1) {
                Tok::Colon => {
                    let sp = self.bump().span;
                    self.bump();
                    if self.is_label(&n) {
                        return Err(Diagnostic::error(
                            Code::SyntaxError,
                            sp,
                            format!("enum label `{n}` cannot name a loop"),
                        ));
                    }
                    if !self.method_loops.insert(n.clone()) {
                        self.diag(Code::DuplicateName, sp, format!("loop label `{n}` is used twice in one method"));
                    }
                    self.bound_loops.push(n.clone());
                    let body = self.seq();
                    self.bound_loops.pop();
                    return Ok(Expr::Label(n, Box::new(body?)));
                }
                Tok::Eq => {
                    self.bump();
                    self.bump();
                    let rhs = self.stmt()?;
                    return Ok(Expr::assign(n, rhs));
                }
                _ => {}
            }
        }
        self.primary()
    }

    fn resolve(&self, n: &str) -> Ref {
        if n == self.param {
            Ref::Param(n.to_string())
        } else {
            Ref::Field(n.to_string())
        }
    }

    fn call_args(&mut self) -> PResult<Expr> {
        self.expect(Tok::LParen)?;
        if self.eat(&Tok::RParen) {
            return Ok(Expr::unit());
        }
        let e = self.seq()?;
        self.expect(Tok::RParen)?;
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let sp = self.span();
        match self.peek().clone() {
            Tok::Unit => {
                self.bump();
                Ok(Expr::unit())
            }
            Tok::True => {
                self.bump();
                Ok(Expr::Value(Value::True))
            }
            Tok::False => {
                self.bump();
                Ok(Expr::Value(Value::False))
            }
            Tok::Null => {
                self.bump();
                Ok(Expr::Value(Value::Null))
            }
            Tok::New => {
                self.bump();
                let (c, csp) = self.ident("class name")?;
                let generic = self.classes.get(&c).copied();
                if generic.is_none() {
                    self.diag(Code::UndeclaredName, csp.clone(), format!("class `{c}` is not declared"));
                }
                let e = if self.eat(&Tok::Lt) {
                    let arg_start = self.span();
                    let raw = self.raw_type()?;
                    let t = self.method_type(raw, &arg_start)?;
                    if !matches!(t, Type::Object(..) | Type::Var(_)) {
                        return Err(Diagnostic::error(
                            Code::SyntaxError,
                            arg_start,
                            "a type argument must be a typestate or a generic variable",
                        ));
                    }
                    self.expect(Tok::Gt)?;
                    if generic == Some(false) {
                        self.diag(Code::ArityMismatch, csp, format!("class `{c}` takes no type argument"));
                    }
                    Expr::NewGen(c, Box::new(t))
                } else {
                    if generic == Some(true) {
                        self.diag(Code::ArityMismatch, csp, format!("generic class `{c}` needs a type argument"));
                    }
                    Expr::New(c)
                };
                if self.peek() == &Tok::LParen && self.peek_at(1) == &Tok::RParen {
                    self.bump();
                    self.bump();
                }
                Ok(e)
            }
            Tok::Continue => {
                self.bump();
                let (k, ksp) = self.ident("loop label")?;
                if !self.bound_loops.contains(&k) {
                    self.diag(
                        Code::UnboundLoopLabel,
                        sp.to(&ksp),
                        format!("`continue {k}` is outside any loop labelled `{k}`"),
                    );
                }
                Ok(Expr::Continue(k))
            }
            Tok::If => {
                self.bump();
                self.expect(Tok::LParen)?;
                let c = self.seq()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::LBrace)?;
                let a = self.block_rest()?;
                self.expect(Tok::Else)?;
                self.expect(Tok::LBrace)?;
                let b = self.block_rest()?;
                Ok(Expr::If(Box::new(c), Box::new(a), Box::new(b)))
            }
            Tok::Switch => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (r, _) = self.ident("switch receiver")?;
                self.expect(Tok::Dot)?;
                let (m, _) = self.ident("method name")?;
                let arg = self.call_args()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::LBrace)?;
                let receiver = self.resolve(&r);
                let mut branches = BTreeMap::new();
                while let Tok::Ident(l) = self.peek().clone() {
                    let lsp = self.bump().span;
                    self.expect(Tok::Colon)?;
                    if !self.is_label(&l) {
                        self.diag(Code::UndeclaredName, lsp.clone(), format!("`{l}` is not an enum label"));
                    }
                    let body = self.seq()?;
                    if branches.insert(l.clone(), body).is_some() {
                        self.diag(Code::DuplicateName, lsp, format!("switch branch `{l}` appears twice"));
                    }
                }
                if branches.is_empty() {
                    return Err(self.unexpected("a switch branch"));
                }
                self.expect(Tok::RBrace)?;
                Ok(Expr::Switch {
                    receiver: receiver.clone(),
                    method: m.clone(),
                    scrutinee: Box::new(Expr::Call(receiver, m, Box::new(arg))),
                    branches,
                })
            }
            Tok::Ident(n) => {
                self.bump();
                if self.eat(&Tok::Dot) {
                    let (m, _) = self.ident("method name")?;
                    let arg = self.call_args()?;
                    return Ok(Expr::Call(self.resolve(&n), m, Box::new(arg)));
                }
                if n != self.param && self.is_label(&n) {
                    return Ok(Expr::Value(Value::Label(n)));
                }
                Ok(Expr::Ref(self.resolve(&n)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.seq()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}

fn validate_main(file: &str, program: &Program, diags: &mut Vec<Diagnostic>) {
    let Some(main) = program.class("Main") else {
        diags.push(Diagnostic::error(
            Code::MissingMainClass,
            Span::new(file, (1, 1), (1, 1)),
            "the program has no class `Main`",
        ));
        return;
    };
    let expected = Usage::simple(UsageBody::branch([("main", UsageBody::End)]));
    let mut problems = Vec::new();
    if main.generic.is_some() {
        problems.push("`Main` cannot be generic");
    }
    if main.usage != expected {
        problems.push("`Main` must have usage `{main; end}`");
    }
    match main.method("main") {
        Some(m) if m.param_type == Type::Void && m.return_type == Type::Void => {}
        _ => problems.push("`Main` must declare `void main(void x)`"),
    }
    for p in problems {
        diags.push(Diagnostic::error(Code::InvalidMainClass, main.span.clone(), p));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAIN: &str = "class Main { {main; end} void main(void x) { unit } }";

    fn parse(src: &str) -> Result<Program, Vec<Diagnostic>> {
        parse_program("t.mungo", src)
    }

    fn codes(src: &str) -> Vec<Code> {
        parse(src).unwrap_err().into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn file_class_usage() {
        let src = format!(
            "enum FileStatus {{ EOF NOTEOF }}
             class File {{
               {{open; X}}[X = {{isEOF; <EOF: {{close; end}} NOTEOF: {{read; X}}>}}]
               void open(void x) {{ unit }}
               FileStatus isEOF(void x) {{ EOF }}
               void read(void x) {{ unit }}
               void close(void x) {{ unit }}
             }}
             {MAIN}"
        );
        let p = parse(&src).unwrap();
        let file = p.class("File").unwrap();
        assert_eq!(file.usage.to_string(), "{open; X}[X = {isEOF; <EOF: {close; end} NOTEOF: {read; X}>}]");
        assert_eq!(file.method("isEOF").unwrap().body, Expr::Value(Value::Label("EOF".into())));
    }

    #[test]
    fn loop_with_switch_reader() {
        let src = format!(
            "enum FileStatus {{ EOF NOTEOF }}
             class File {{
               {{open; X}}[X = {{isEOF; <EOF: {{close; end}} NOTEOF: {{read; X}}>}}]
               void open(void x) {{ }}
               FileStatus isEOF(void x) {{ EOF }}
               void read(void x) {{ }}
               void close(void x) {{ }}
             }}
             class FileReader {{
               {{init ; {{readFile; end}}}}[]
               File file
               void init() {{ file = new File }}
               void readFile() {{
                 file.open(unit);
                 loop:
                   switch(file.isEOF()) {{
                     EOF: file.close()
                     NOTEOF: file.read();
                         continue loop
                   }}
               }}
             }}
             {MAIN}"
        );
        let p = parse(&src).unwrap();
        let reader = p.class("FileReader").unwrap();
        let body = &reader.method("readFile").unwrap().body;
        let Expr::Seq(_, rest) = body else { panic!("{body:?}") };
        let Expr::Label(k, sw) = rest.as_ref() else { panic!() };
        assert_eq!(k, "loop");
        let Expr::Switch { receiver, branches, .. } = sw.as_ref() else { panic!() };
        assert_eq!(receiver, &Ref::Field("file".into()));
        assert!(matches!(branches["NOTEOF"], Expr::Seq(..)));
        assert_eq!(reader.method("init").unwrap().param_type, Type::Void);
    }

    #[test]
    fn empty_input_lacks_main() {
        assert_eq!(codes(""), vec![Code::MissingMainClass]);
    }

    #[test]
    fn empty_enum_is_rejected() {
        assert!(codes(&format!("enum E {{ }} {MAIN}")).contains(&Code::EmptyEnum));
    }

    #[test]
    fn enum_typed_fields_are_rejected() {
        let src = format!("enum E {{ A }} class C {{ end E f }} {MAIN}");
        assert_eq!(codes(&src), vec![Code::EnumTypedField]);
    }

    #[test]
    fn duplicate_and_undeclared_names() {
        let dup = format!("class C {{ end bool f bool f }} {MAIN}");
        assert_eq!(codes(&dup), vec![Code::DuplicateName]);
        let undeclared = format!("class C {{ end Missing f }} {MAIN}");
        assert_eq!(codes(&undeclared), vec![Code::UndeclaredName]);
        let labels = format!("enum A {{ L }} enum B {{ L }} {MAIN}");
        assert_eq!(codes(&labels), vec![Code::DuplicateName]);
    }

    #[test]
    fn usage_errors() {
        let unbound = format!("class C {{ {{m; Y}} void m(void x) {{ unit }} }} {MAIN}");
        assert_eq!(codes(&unbound), vec![Code::UnboundUsageVariable]);
        let cycle = format!("class C {{ X[X = X] }} {MAIN}");
        assert_eq!(codes(&cycle), vec![Code::UnfoldCycle]);
    }

    #[test]
    fn generics_and_arity() {
        let src = format!(
            "class Boolean {{ {{get; end}} bool get(void x) {{ true }} }}
             class<A[b]> Id {{ {{id; end}} A[b] id(A[b] x) {{ x }} }}
             class User {{ {{go; end}} Id<Boolean[{{get; end}}]> f
               void go(void y) {{ f = new Id<Boolean[{{get; end}}]>() }} }}
             {MAIN}"
        );
        let p = parse(&src).unwrap();
        let id = p.class("Id").unwrap();
        let g = id.generic.clone().unwrap();
        assert_eq!(id.method("id").unwrap().param_type, Type::Var(g));
        let bad = format!("class<A[b]> Id {{ end }} class U {{ end Id f }} {MAIN}");
        assert_eq!(codes(&bad), vec![Code::ArityMismatch]);
    }

    #[test]
    fn main_shape() {
        assert_eq!(
            codes("class Main { {main; {main; end}} void main(void x) { unit } }"),
            vec![Code::InvalidMainClass]
        );
        assert_eq!(codes("class Main { {main; end} bool main(void x) { true } }"), vec![Code::InvalidMainClass]);
    }

    #[test]
    fn continue_must_be_bound() {
        let src = "class Main { {main; end} void main(void x) { continue k } }";
        assert_eq!(codes(src), vec![Code::UnboundLoopLabel]);
    }

    #[test]
    fn syntax_errors_carry_spans() {
        let errs = parse("class Main { {main; end} void main(void x) { unit; ; } }").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].code, Code::SyntaxError);
        assert_eq!((errs[0].span.start_line, errs[0].span.start_col), (1, 52));
    }
}
