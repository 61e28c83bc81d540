//! Show the SMT-LIB query generated for one typed instance of a
//! transform: parse, type, encode, print.

use fpverify::dsl::parse_corpus;
use fpverify::fpsem::build_query;
use fpverify::precond::enumerate_cc;
use fpverify::smt::emit;
use fpverify::typer::{enumerate_assignments, gen_constraints, WidthConfig};

const TEXT: &str = "\
Name: fadd-zero-not-identity
%r = fadd %x, 0.0
=>
%r = %x
";

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable file"),
        None => TEXT.to_string(),
    };
    let transforms = parse_corpus(&text).expect("parses");
    for t in &transforms {
        let constraints = gen_constraints(t).expect("typeable");
        let assignments = enumerate_assignments(&constraints, &WidthConfig::default());
        let ccas = enumerate_cc(t).expect("condition codes resolve");
        for ta in &assignments {
            for cca in &ccas {
                let query = build_query(t, ta, cca).expect("encodes");
                println!("; instance [{}]{}", ta.describe(), if query.quantified { " (quantified)" } else { "" });
                println!("{}", emit(&query));
            }
        }
    }
}
