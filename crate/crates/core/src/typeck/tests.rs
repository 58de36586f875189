use super::*;
use crate::diagnostic::Code;
use crate::parser::parse_program;

const FILEREADER: &str = include_str!("../../corpus/filereader.mungo");

fn codes(src: &str) -> Vec<Code> {
    let p = parse_program("t.mungo", src).unwrap_or_else(|d| panic!("parse failed: {d:?}"));
    type_program(&p).diagnostics.into_iter().map(|d| d.code).collect()
}

fn with_main(classes: &str, main_fields: &str, main_body: &str) -> String {
    format!("{classes}\nclass Main {{ {{main; end}} {main_fields} void main(void x) {{ {main_body} }} }}")
}

#[test]
fn file_reader_is_accepted() {
    assert_eq!(codes(FILEREADER), vec![]);
}

#[test]
fn file_derivation_trace() {
    let p = parse_program("t", FILEREADER).unwrap();
    let d = type_class(&p, "File").unwrap();
    assert_eq!(d.summary(), "TCBr, TCRec, TCBr, TCCh, {TCBr, TCEn}, {TCBr, TCVar}");
}

#[test]
fn dropping_the_initialisation_leaves_the_field_null() {
    let src = FILEREADER.replace("file = new File", "unit");
    assert_eq!(codes(&src), vec![Code::FieldNotAvailable]);
}

#[test]
fn nulling_the_field_after_init_loses_the_file() {
    let src = FILEREADER.replace("file = new File\n", "file = new File;\n        file = null\n");
    assert_eq!(codes(&src), vec![Code::FieldMisused]);
}

#[test]
fn reassigning_before_close_loses_the_file() {
    let src = FILEREADER.replace("EOF: file.close()", "EOF: file = new File; file.close()");
    assert_eq!(codes(&src), vec![Code::FieldMisused]);
}

const BOOLEAN: &str = "class Boolean {
    {setVal; {getVal; end}}
    bool val
    void setVal(bool x) { val = x }
    bool getVal(void x) { val }
}";

#[test]
fn generic_identity_is_accepted() {
    let id = "class<A[b]> Id { {id; end} A[b] id(A[b] x) { x } }";
    let src = with_main(
        &format!("{BOOLEAN}\n{id}"),
        "Boolean b Id<Boolean[{getVal; end}]> f Boolean l",
        "b = new Boolean; b.setVal(true); f = new Id<Boolean[{getVal; end}]>;
         l = f.id(b); l.getVal(unit); unit",
    );
    assert_eq!(codes(&src), vec![]);
}

#[test]
fn generic_parameters_cannot_be_called() {
    let id = "class<A[b]> Id { {id; end} A[b] id(A[b] x) { x.getVal(unit); x } }";
    let src = with_main(&format!("{BOOLEAN}\n{id}"), "", "unit");
    assert_eq!(codes(&src), vec![Code::MethodNotAvailable]);
}

#[test]
fn discarded_linear_values() {
    let src = with_main(BOOLEAN, "", "new Boolean; unit");
    assert_eq!(codes(&src), vec![Code::LinearValueDiscarded]);
}

#[test]
fn linear_parameters_must_be_used_up() {
    let keeper = "class Keeper { {keep; end} void keep(Boolean[{getVal; end}] x) { unit } }";
    let src = with_main(&format!("{BOOLEAN}\n{keeper}"), "", "unit");
    assert_eq!(codes(&src), vec![Code::ParameterMisused]);
}

#[test]
fn fields_must_finish_their_protocol() {
    let holder = "class Holder { {fill; end} Boolean b void fill(void x) { b = new Boolean } }";
    let src = with_main(&format!("{BOOLEAN}\n{holder}"), "", "unit");
    assert_eq!(codes(&src), vec![Code::NonTerminatedAfterUsage]);
}

#[test]
fn calls_outside_the_protocol() {
    let src = with_main(BOOLEAN, "Boolean b", "b = new Boolean; b.getVal(unit); unit");
    assert_eq!(codes(&src), vec![Code::MethodNotAvailable]);
    let src = with_main(BOOLEAN, "Boolean b", "b = new Boolean; b.flip(unit); unit");
    assert_eq!(codes(&src), vec![Code::MethodNotUnderstood]);
    let src = with_main(BOOLEAN, "", "missing = true");
    assert_eq!(codes(&src), vec![Code::FieldNotUnderstood]);
    let src = with_main(BOOLEAN, "Boolean b", "b = new Boolean; b.setVal(unit); b.getVal(unit); unit");
    assert_eq!(codes(&src), vec![Code::TypeMismatch]);
}

#[test]
fn branches_must_agree() {
    let src = with_main(BOOLEAN, "Boolean b bool c", "if (c) { b = new Boolean } else { unit }; unit");
    assert_eq!(codes(&src), vec![Code::BranchMismatch]);
}

#[test]
fn loops_must_restore_their_environment() {
    let src = with_main(BOOLEAN, "Boolean b", "k: b = new Boolean; continue k");
    assert_eq!(codes(&src), vec![Code::LoopEnvMismatch]);
    let src = with_main(BOOLEAN, "", "k: continue k");
    assert_eq!(codes(&src), vec![]);
}

#[test]
fn switches_must_cover_the_choice() {
    let src = "enum Answer { YES NO MAYBE }
        class Door { {ask; <YES: end NO: end>} Answer ask(void x) { YES } }
        class Main { {main; end} Door d void main(void x) {
            d = new Door;
            switch (d.ask()) { YES: unit NO: unit }
        } }";
    assert_eq!(codes(src), vec![Code::SwitchLabelMismatch]);
}

#[test]
fn usage_recursion_must_restore_fields() {
    let src = with_main(BOOLEAN, "", "unit").replace(
        "class Main",
        "class Counter { X[X = {step; X stop; end}] Boolean b
            void step(void x) { b = new Boolean } void stop(void x) { unit } }
         class Main",
    );
    assert_eq!(codes(&src), vec![Code::UsageRecursionMismatch]);
}
