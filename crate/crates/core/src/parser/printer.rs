//! Concrete syntax printing. `print_program` output parses back to an equal
//! AST; `Display` on expressions gives a one-line form that also covers the
//! run-time constructs.

use std::fmt::{self, Display, Write};

use crate::ast::{ClassDecl, ClassRef, Expr, FieldType, MethodDecl, Program, Ref, Type, Value};

const INDENT: &str = "    ";

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for e in &p.enums {
        let _ = writeln!(out, "enum {} {{ {} }}\n", e.name, e.labels.join(" "));
    }
    for (i, c) in p.classes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_class(&mut out, c);
    }
    out
}

fn print_class(out: &mut String, c: &ClassDecl) {
    match &c.generic {
        Some(g) => {
            let _ = writeln!(out, "class<{}[{}]> {} {{", g.class_var, g.usage_var, c.name);
        }
        None => {
            let _ = writeln!(out, "class {} {{", c.name);
        }
    }
    let _ = writeln!(out, "{INDENT}{}", c.usage);
    if !c.fields.is_empty() {
        out.push('\n');
        for f in &c.fields {
            let _ = writeln!(out, "{INDENT}{} {}", f.ty, f.name);
        }
    }
    for m in &c.methods {
        out.push('\n');
        print_method(out, m);
    }
    out.push_str("}\n");
}

fn print_method(out: &mut String, m: &MethodDecl) {
    let _ = writeln!(out, "{INDENT}{} {}({} {}) {{", m.return_type, m.name, m.param_type, m.param_name);
    let mut p = ExprPrinter { out: String::new(), depth: 2, multiline: true };
    p.indent();
    p.expr(&m.body);
    out.push_str(&p.out);
    let _ = writeln!(out, "\n{INDENT}}}");
}

/// Renders an expression on one line.
pub fn expr_to_line(e: &Expr) -> String {
    let mut p = ExprPrinter { out: String::new(), depth: 0, multiline: false };
    p.expr(e);
    p.out
}

struct ExprPrinter {
    out: String,
    depth: usize,
    multiline: bool,
}

/// Whether `e` swallows a following `; e'` when printed without parentheses.
fn open_ended(e: &Expr) -> bool {
    match e {
        Expr::Seq(..) | Expr::Label(..) => true,
        Expr::Assign(_, rhs) => open_ended(rhs),
        _ => false,
    }
}

impl ExprPrinter {
    fn indent(&mut self) {
        for _ in 0..self.depth {
            self.out.push_str(INDENT);
        }
    }

    fn newline(&mut self) {
        if self.multiline {
            self.out.push('\n');
            self.indent();
        } else {
            self.out.push(' ');
        }
    }

    fn block(&mut self, e: &Expr) {
        self.out.push('{');
        self.depth += 1;
        self.newline();
        self.expr(e);
        self.depth -= 1;
        self.newline();
        self.out.push('}');
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Value(v) => {
                let _ = write!(self.out, "{v}");
            }
            Expr::Ref(r) => self.out.push_str(r.name()),
            Expr::New(c) => {
                let _ = write!(self.out, "new {c}");
            }
            Expr::NewGen(c, g) => {
                let _ = write!(self.out, "new {c}<{g}>");
            }
            Expr::Assign(f, rhs) => {
                let _ = write!(self.out, "{f} = ");
                if matches!(**rhs, Expr::Seq(..)) {
                    self.out.push('(');
                    self.expr(rhs);
                    self.out.push(')');
                } else {
                    self.expr(rhs);
                }
            }
            Expr::Call(r, m, arg) => {
                let _ = write!(self.out, "{}.{m}(", r.name());
                self.expr(arg);
                self.out.push(')');
            }
            Expr::Seq(a, b) => {
                if open_ended(a) {
                    self.out.push('(');
                    self.expr(a);
                    self.out.push(')');
                } else {
                    self.expr(a);
                }
                self.out.push(';');
                self.newline();
                self.expr(b);
            }
            Expr::If(c, a, b) => {
                self.out.push_str("if (");
                self.expr(c);
                self.out.push_str(") ");
                self.block(a);
                self.out.push_str(" else ");
                self.block(b);
            }
            Expr::Switch { receiver, method, scrutinee, branches } => {
                match scrutinee.as_ref() {
                    Expr::Call(r, m, arg) if r == receiver && m == method => {
                        let _ = write!(self.out, "switch ({}.{method}(", receiver.name());
                        self.expr(arg);
                        self.out.push_str(")) {");
                    }
                    other => {
                        let _ = write!(self.out, "switch_{{{}.{method}}}(", receiver.name());
                        self.expr(other);
                        self.out.push_str(") {");
                    }
                }
                self.depth += 1;
                for (l, body) in branches {
                    self.newline();
                    let _ = write!(self.out, "{l}: ");
                    self.depth += 1;
                    self.expr(body);
                    self.depth -= 1;
                }
                self.depth -= 1;
                self.newline();
                self.out.push('}');
            }
            Expr::Label(k, body) => {
                let _ = write!(self.out, "{k}: ");
                self.expr(body);
            }
            Expr::Continue(k) => {
                let _ = write!(self.out, "continue {k}");
            }
            Expr::Return(body) => {
                self.out.push_str("return{");
                self.expr(body);
                self.out.push('}');
            }
        }
    }
}

impl Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => f.write_str("unit"),
            Value::True => f.write_str("true"),
            Value::False => f.write_str("false"),
            Value::Label(l) => f.write_str(l),
            Value::Null => f.write_str("null"),
            Value::Object(o) => write!(f, "{o}"),
        }
    }
}

impl Display for Ref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Display for ClassRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.arg {
            Some(a) => write!(f, "{}<{a}>", self.name),
            None => f.write_str(&self.name),
        }
    }
}

impl Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Void => f.write_str("void"),
            Type::Bool => f.write_str("bool"),
            Type::Enum(n) => f.write_str(n),
            Type::Object(c, u) => write!(f, "{c}[{u}]"),
            Type::Var(g) => write!(f, "{}[{}]", g.class_var, g.usage_var),
            Type::Bottom => f.write_str("⊥"),
        }
    }
}

impl Display for FieldType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldType::Void => f.write_str("void"),
            FieldType::Bool => f.write_str("bool"),
            FieldType::Enum(n) | FieldType::Var(n) => f.write_str(n),
            FieldType::Class(c) => write!(f, "{c}"),
        }
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&expr_to_line(self))
    }
}

impl Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_program(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::ObjectId;
    use crate::parser::parse_program;

    const FILE: &str = "enum FileStatus { EOF NOTEOF }
        class File {
          {open; X}[X = {isEOF; <EOF: {close; end} NOTEOF: {read; X}>}]
          void open(void x) { unit }
          FileStatus isEOF(void x) { EOF }
          void read(void x) { unit }
          void close(void x) { unit }
        }
        class Main { {main; end} void main(void x) { unit } }";

    #[test]
    fn enum_labels_in_declaration_order() {
        let p = parse_program("t", "enum E { Z A M } class Main { {main; end} void main(void x) { unit } }").unwrap();
        assert!(print_program(&p).contains("enum E { Z A M }"));
    }

    #[test]
    fn end_tokens_are_preserved() {
        let p = parse_program("t", FILE).unwrap();
        let text = print_program(&p);
        let words = |s: &str| s.split(|c: char| !c.is_alphanumeric()).filter(|w| *w == "end").count();
        let class_text = &text[text.find("class File").unwrap()..text.find("class Main").unwrap()];
        assert_eq!(words(class_text), words(&p.class("File").unwrap().usage.to_string()));
        assert_eq!(parse_program("t", &text).unwrap(), p);
    }

    #[test]
    fn sequences_keep_their_grouping() {
        let src = "class Main { {main; end} bool f void main(void x) {
            (k: f = true); (f = (true; false)); unit } }";
        let p = parse_program("t", src).unwrap();
        let text = print_program(&p);
        assert_eq!(parse_program("t", &text).unwrap(), p);
    }

    #[test]
    fn runtime_forms_print_on_one_line() {
        let e = Expr::Return(Box::new(Expr::seq(Expr::obj(ObjectId(3)), Expr::unit())));
        assert_eq!(e.to_string(), "return{o3; unit}");
        let sw = Expr::Switch {
            receiver: Ref::Field("f".into()),
            method: "m".into(),
            scrutinee: Box::new(Expr::Value(Value::Label("A".into()))),
            branches: [("A".to_string(), Expr::unit())].into_iter().collect(),
        };
        assert_eq!(sw.to_string(), "switch_{f.m}(A) { A: unit }");
    }
}
