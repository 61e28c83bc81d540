//! Parse transforms from a file (or a built-in sample) and print them
//! back in canonical form.
//!
//! Usage: cargo run --example parse_print [file.opt]

use fpverify::dsl::{parse_corpus, pretty_print};

const SAMPLE: &str = "\
Name: fadd-commutes
%r = fadd %x, %y
=>
%r = fadd %y, %x

Name: PR26746
%a = fsub -0.0, %x
%r = fsub 0.0, %a
=>
%r = %x
";

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable file"),
        None => SAMPLE.to_string(),
    };
    match parse_corpus(&text) {
        Ok(transforms) => {
            for t in &transforms {
                println!("{}", pretty_print(t));
            }
        }
        Err(e) => {
            eprintln!("parse error: {e}");
            std::process::exit(3);
        }
    }
}
