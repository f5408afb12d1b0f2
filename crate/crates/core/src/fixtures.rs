//! Built-in example systems.

use crate::substitution::{CollaredSubstitution, Substitution};

pub const FIBONACCI_SPEC: &str = "\
# Fibonacci: 0 -> 01, 1 -> 0
letters: 0 1
rule 0: 0 1
rule 1: 0
collar-names: a d b c
";

pub const THUE_MORSE_SPEC: &str = "\
# Thue-Morse: 0 -> 01, 1 -> 10
letters: 0 1
rule 0: 0 1
rule 1: 1 0
collar-names: b f c a e d
";

pub const NAMES: [&str; 2] = ["fibonacci", "thue-morse"];

pub fn spec_text(name: &str) -> Option<&'static str> {
    match name {
        "fibonacci" | "fib" => Some(FIBONACCI_SPEC),
        "thue-morse" | "thue_morse" | "tm" => Some(THUE_MORSE_SPEC),
        _ => None,
    }
}

pub fn by_name(name: &str) -> Option<CollaredSubstitution> {
    let text = spec_text(name)?;
    Some(
        Substitution::parse_spec(text)
            .and_then(|s| s.collared())
            .expect("built-in fixture is valid"),
    )
}

pub fn fibonacci() -> CollaredSubstitution {
    by_name("fibonacci").unwrap()
}

pub fn thue_morse() -> CollaredSubstitution {
    by_name("thue-morse").unwrap()
}
