//! Builds a configuration by hand that calls through a null field and
//! shows the error predicate and the interpreter agreeing on it.

use std::collections::BTreeMap;

use mungo::ast::{ClassRef, Expr, ObjectId, Ref, Value};
use mungo::interp::{step, Configuration, Frame, Heap, HeapObject};
use mungo::monitor::check_error;
use mungo::parser::parse_program;
use mungo::usage::Usage;

fn main() {
    let program = parse_program(
        "lamp.mungo",
        "class Lamp { {on; end} void on(void x) { unit } }
         class Main { {main; end} Lamp lamp void main(void x) { unit } }",
    )
    .expect("parses");

    let mut heap = Heap::default();
    heap.insert(
        ObjectId(0),
        HeapObject {
            class: ClassRef::plain("Main"),
            usage: Usage::end(),
            fields: BTreeMap::from([("lamp".to_string(), Value::Null)]),
        },
    );
    let mut cfg = Configuration {
        heap,
        stack: vec![Frame { obj: ObjectId(0), param: ("x".into(), Value::Unit) }],
        expr: Expr::seq(Expr::call(Ref::Field("lamp".into()), "on", Expr::unit()), Expr::unit()),
    };

    let err = check_error(&cfg).expect("calling through null is an error");
    println!("{}", err.report(0));
    println!("contexts: {:?}", err.path);
    println!("interpreter: {:?}", step(&program, &mut cfg));
}
