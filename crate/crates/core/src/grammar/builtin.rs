//! Ready-made grammars used throughout the tests, the book and the CLI
//! (`--grammar builtin:<name>`).

use super::{parse_grammar, Grammar};

/// Irreversible spin flip `a -> b`.
pub fn spin_flip(rate: f64) -> Grammar {
    build(&format!(
        "alphabet a b
degreecap 64
rule flip rate {rate:?}
  lhs
    v x a
  rhs
    v y b
  glue x -> y
"
    ))
}

/// Independent spin flips `a -> b` and `b -> a` at the same rate.
pub fn two_way_flip(rate: f64) -> Grammar {
    build(&format!(
        "alphabet a b
degreecap 64
rule up rate {rate:?}
  lhs
    v x a
  rhs
    v y b
  glue x -> y
rule down rate {rate:?}
  lhs
    v x b
  rhs
    v y a
  glue x -> y
"
    ))
}

/// Edge dynamics: close a two-path into a triangle (`join`) and open a
/// triangle by deleting one edge (`cut`). Connectivity is respected because
/// the deleted edge always has a detour of length two.
pub fn chord(join: f64, cut: f64) -> Grammar {
    build(&format!(
        "alphabet a
degreecap 8
{}",
        chord_rules("a", join, cut)
    ))
}

/// Spin flips together with chord moves restricted to spin `a` paths.
pub fn flip_chord(flip: f64, join: f64, cut: f64) -> Grammar {
    build(&format!(
        "alphabet a b
degreecap 8
rule up rate {flip:?}
  lhs
    v x a
  rhs
    v y b
  glue x -> y
rule down rate {flip:?}
  lhs
    v x b
  rhs
    v y a
  glue x -> y
{}",
        chord_rules("a", join, cut)
    ))
}

fn chord_rules(spin: &str, join: f64, cut: f64) -> String {
    format!(
        "rule join rate {join:?}
  lhs
    v p {spin}
    v q {spin}
    v r {spin}
    e p q
    e q r
  rhs
    v p2 {spin}
    v q2 {spin}
    v r2 {spin}
    e p2 q2
    e q2 r2
    e p2 r2
  glue p -> p2
  glue q -> q2
  glue r -> r2
rule cut rate {cut:?}
  lhs
    v p {spin}
    v q {spin}
    v r {spin}
    e p q
    e q r
    e p r
  rhs
    v p2 {spin}
    v q2 {spin}
    v r2 {spin}
    e p2 q2
    e q2 r2
  glue p -> p2
  glue q -> q2
  glue r -> r2
"
    )
}

/// Pure growth: every vertex sprouts a new leaf at the given rate.
pub fn append_leaf(rate: f64, degree_cap: usize) -> Grammar {
    build(&format!(
        "alphabet a
degreecap {degree_cap}
rule leaf rate {rate:?}
  lhs
    v x a
  rhs
    v y a
    v w a
    e y w
  glue x -> y
"
    ))
}

/// Six rules covering the common substitution shapes: link
/// deletion, leaf append, pair joining, spin flip, vertex deletion with empty
/// anchor and right side, and an edge subdivision glued at two vertices.
pub fn suite() -> Grammar {
    build(
        "alphabet a b
degreecap 8
rule delete_link rate 1.0
  lhs
    v x a
    v y b
    e x y
  rhs
    v x2 a
    v y2 b
  glue x -> x2
  glue y -> y2
rule append_leaf rate 1.0
  lhs
    v x a
  rhs
    v x2 a
    v w b
    e x2 w
  glue x -> x2
rule join_pair rate 1.0
  lhs
    v x a
    v m b
    v y a
    e x m
    e m y
  rhs
    v x2 a
    v m2 b
    v y2 a
    e x2 m2
    e m2 y2
    e x2 y2
  glue x -> x2
  glue m -> m2
  glue y -> y2
rule spin_flip rate 1.0
  lhs
    v x a
  rhs
    v x2 b
  glue x -> x2
rule delete_vertex rate 1.0
  lhs
    v x b
  rhs
rule subdivide rate 1.0
  lhs
    v x a
    v y a
    e x y
  rhs
    v x2 b
    v w a
    v y2 a
    e x2 w
    e w y2
  glue x -> x2
  glue y -> y2
",
    )
}

/// Looks a builtin up by name, with default rates.
pub fn by_name(name: &str) -> Option<Grammar> {
    Some(match name {
        "spin_flip" => spin_flip(1.0),
        "two_way_flip" => two_way_flip(1.0),
        "chord" => chord(0.05, 0.05),
        "flip_chord" => flip_chord(0.5, 0.05, 0.05),
        "append_leaf" => append_leaf(1.0, 64),
        "suite" => suite(),
        "frozen" => build("alphabet a b\ndegreecap 64\n"),
        _ => return None,
    })
}

pub const NAMES: &[&str] = &[
    "spin_flip",
    "two_way_flip",
    "chord",
    "flip_chord",
    "append_leaf",
    "suite",
    "frozen",
];

fn build(text: &str) -> Grammar {
    parse_grammar(text).expect("builtin grammar parses")
}
