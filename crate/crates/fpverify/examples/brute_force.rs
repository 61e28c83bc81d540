//! Verify transforms with the exhaustive oracle alone: no solver, just
//! every fp8 environment through the reference interpreter.

use std::collections::BTreeMap;

use fpverify::dsl::parse_corpus;
use fpverify::oracle::{brute_force_verify, BruteVerdict, DEFAULT_BUDGET};
use fpverify::precond::enumerate_cc;
use fpverify::typer::{enumerate_assignments, gen_constraints, WidthConfig};

const TEXT: &str = "\
Name: fadd-commutes
%r = fadd %x, %y
=>
%r = fadd %y, %x

Name: fmul-zero-not-zero
%r = fmul %x, 0.0
=>
%r = 0.0
";

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable file"),
        None => TEXT.to_string(),
    };
    for t in &parse_corpus(&text).expect("parses") {
        let constraints = gen_constraints(t).expect("typeable");
        let ccas = enumerate_cc(t).expect("condition codes resolve");
        for ta in &enumerate_assignments(&constraints, &WidthConfig::tiny()) {
            for cca in &ccas {
                let cc_note = if cca.is_empty() {
                    String::new()
                } else {
                    format!(
                        " [{}]",
                        cca.iter().map(|(k, v)| format!("{k}={}", v.name())).collect::<Vec<_>>().join(" ")
                    )
                };
                match brute_force_verify(t, ta, cca, DEFAULT_BUDGET) {
                    Ok(BruteVerdict::Valid) => {
                        println!("{} [{}]{}: valid", t.name, ta.describe(), cc_note)
                    }
                    Ok(BruteVerdict::Invalid { witness }) => {
                        println!("{} [{}]{}: INVALID", t.name, ta.describe(), cc_note);
                        for (name, v) in witness.iter().collect::<BTreeMap<_, _>>() {
                            println!("  {name} = {}", v.describe());
                        }
                    }
                    Err(e) => println!("{} [{}]{}: {e}", t.name, ta.describe(), cc_note),
                }
            }
        }
    }
}
