use rustc_hash::FxHashMap;

use super::{Grammar, GrammarError, SubstitutionRule};
use crate::graph::{tokenize, Alphabet, SpinGraph, VertexId};

/// Parses a rule file:
///
/// ```text
/// alphabet a b
/// degreecap 4
///
/// rule flip rate 1.5
///   lhs
///     v x a
///   rhs
///     v y b
///   anchor x
///   glue x -> y
/// end
/// ```
///
/// `anchor` lines are optional; when present they must list exactly the
/// glued left-hand vertices. A block ends at `end`, the next `rule`, or EOF.
pub fn parse_grammar(text: &str) -> Result<Grammar, GrammarError> {
    let mut alphabet: Option<Alphabet> = None;
    let mut degree_cap: Option<usize> = None;
    let mut rules = Vec::new();
    let mut current: Option<RuleBuilder> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        let Some(&(col, head)) = tokens.first() else {
            continue;
        };
        let syntax = |column: usize, message: String| GrammarError::Syntax {
            line,
            column,
            message,
        };
        match head {
            "alphabet" => {
                if current.is_some() || !rules.is_empty() {
                    return Err(syntax(col, "alphabet must precede all rules".into()));
                }
                if alphabet.is_some() {
                    return Err(syntax(col, "alphabet declared twice".into()));
                }
                if tokens.len() < 2 {
                    return Err(syntax(col, "alphabet needs at least one spin".into()));
                }
                let names = tokens[1..].iter().map(|(_, t)| *t);
                alphabet = Some(Alphabet::new(names).map_err(|e| syntax(col, e.to_string()))?);
            }
            "degreecap" => {
                if tokens.len() != 2 {
                    return Err(syntax(col, "expected `degreecap <n>`".into()));
                }
                let cap = tokens[1]
                    .1
                    .parse::<usize>()
                    .map_err(|_| syntax(tokens[1].0, "degree cap must be a nonnegative integer".into()))?;
                degree_cap = Some(cap);
            }
            "rule" => {
                if let Some(done) = current.take() {
                    rules.push(done.finish()?);
                }
                if tokens.len() != 4 || tokens[2].1 != "rate" {
                    return Err(syntax(col, "expected `rule <name> rate <λ>`".into()));
                }
                let name = tokens[1].1.to_string();
                if rules.iter().any(|r: &SubstitutionRule| r.name == name) {
                    return Err(syntax(tokens[1].0, format!("duplicate rule name `{name}`")));
                }
                let rate = tokens[3]
                    .1
                    .parse::<f64>()
                    .map_err(|_| syntax(tokens[3].0, "rate must be a number".into()))?;
                if !(rate > 0.0) || !rate.is_finite() {
                    return Err(GrammarError::NonpositiveRate { rule: name, line });
                }
                current = Some(RuleBuilder::new(name, rate, line));
            }
            "end" => match current.take() {
                Some(done) => rules.push(done.finish()?),
                None => return Err(syntax(col, "`end` outside a rule".into())),
            },
            "lhs" | "rhs" | "v" | "e" | "anchor" | "glue" => {
                let Some(rule) = current.as_mut() else {
                    return Err(syntax(col, format!("`{head}` outside a rule")));
                };
                match head {
                    "lhs" => rule.section = Some(Side::Lhs),
                    "rhs" => rule.section = Some(Side::Rhs),
                    "v" => {
                        if tokens.len() != 3 {
                            return Err(syntax(col, "expected `v <id> <spin>`".into()));
                        }
                        let Some(side) = rule.section else {
                            return Err(syntax(col, "vertex outside `lhs`/`rhs` section".into()));
                        };
                        let (scol, sname) = tokens[2];
                        let spin = alphabet
                            .as_ref()
                            .and_then(|a| a.get(sname))
                            .ok_or_else(|| GrammarError::UndeclaredSpin {
                                line,
                                column: scol,
                                spin: sname.to_string(),
                            })?;
                        let part = rule.side(side);
                        if part.ids.contains_key(tokens[1].1) {
                            return Err(syntax(tokens[1].0, "duplicate vertex id".into()));
                        }
                        let v = part.graph.add_vertex(spin);
                        part.ids.insert(tokens[1].1.to_string(), v);
                    }
                    "e" => {
                        if tokens.len() != 3 {
                            return Err(syntax(col, "expected `e <id1> <id2>`".into()));
                        }
                        let Some(side) = rule.section else {
                            return Err(syntax(col, "edge outside `lhs`/`rhs` section".into()));
                        };
                        let part = rule.side(side);
                        let u = part.lookup(tokens[1], line)?;
                        let v = part.lookup(tokens[2], line)?;
                        if u == v {
                            return Err(syntax(tokens[1].0, "self-loops are not allowed".into()));
                        }
                        if !part.graph.add_edge(u, v)? {
                            return Err(syntax(tokens[1].0, "duplicate edge".into()));
                        }
                    }
                    "anchor" => {
                        for &(c, id) in &tokens[1..] {
                            let v = rule.lhs.lookup((c, id), line)?;
                            rule.anchor.get_or_insert_with(Vec::new).push((v, line, c));
                        }
                    }
                    "glue" => {
                        if tokens.len() != 4 || tokens[2].1 != "->" {
                            return Err(syntax(col, "expected `glue <lhs-id> -> <rhs-id>`".into()));
                        }
                        let l = rule.lhs.lookup(tokens[1], line)?;
                        let r = rule.rhs.lookup(tokens[3], line)?;
                        if rule.glue.iter().any(|&(gl, _, _)| gl == l) {
                            return Err(syntax(tokens[1].0, "lhs vertex glued twice".into()));
                        }
                        if rule.glue.iter().any(|&(_, gr, _)| gr == r) {
                            return Err(GrammarError::NonInjectiveGlue {
                                rule: rule.name.clone(),
                                line,
                            });
                        }
                        rule.glue.push((l, r, line));
                    }
                    _ => unreachable!(),
                }
            }
            other => return Err(syntax(col, format!("unknown directive `{other}`"))),
        }
    }
    if let Some(done) = current.take() {
        rules.push(done.finish()?);
    }
    let alphabet = alphabet.ok_or_else(|| GrammarError::Syntax {
        line: 1,
        column: 1,
        message: "missing `alphabet` declaration".into(),
    })?;
    let degree_cap = degree_cap.ok_or_else(|| GrammarError::Syntax {
        line: 1,
        column: 1,
        message: "missing `degreecap` declaration".into(),
    })?;
    Grammar::new(alphabet, degree_cap, rules)
}

#[derive(Clone, Copy)]
enum Side {
    Lhs,
    Rhs,
}

struct Part {
    graph: SpinGraph,
    ids: FxHashMap<String, VertexId>,
}

impl Part {
    fn new() -> Self {
        Part {
            graph: SpinGraph::new(usize::MAX),
            ids: FxHashMap::default(),
        }
    }

    fn lookup(&self, (column, id): (usize, &str), line: usize) -> Result<VertexId, GrammarError> {
        self.ids.get(id).copied().ok_or_else(|| GrammarError::Syntax {
            line,
            column,
            message: format!("undeclared vertex `{id}`"),
        })
    }
}

struct RuleBuilder {
    name: String,
    rate: f64,
    line: usize,
    section: Option<Side>,
    lhs: Part,
    rhs: Part,
    anchor: Option<Vec<(VertexId, usize, usize)>>,
    glue: Vec<(VertexId, VertexId, usize)>,
}

impl RuleBuilder {
    fn new(name: String, rate: f64, line: usize) -> Self {
        RuleBuilder {
            name,
            rate,
            line,
            section: None,
            lhs: Part::new(),
            rhs: Part::new(),
            anchor: None,
            glue: Vec::new(),
        }
    }

    fn side(&mut self, side: Side) -> &mut Part {
        match side {
            Side::Lhs => &mut self.lhs,
            Side::Rhs => &mut self.rhs,
        }
    }

    fn finish(self) -> Result<SubstitutionRule, GrammarError> {
        if let Some(anchor) = &self.anchor {
            for &(v, line, column) in anchor {
                if !self.glue.iter().any(|&(l, _, _)| l == v) {
                    return Err(GrammarError::Syntax {
                        line,
                        column,
                        message: format!("anchor vertex has no `glue` target in rule `{}`", self.name),
                    });
                }
            }
            for &(l, _, line) in &self.glue {
                if !anchor.iter().any(|&(v, _, _)| v == l) {
                    return Err(GrammarError::Syntax {
                        line,
                        column: 1,
                        message: format!("glued vertex is missing from the anchor of rule `{}`", self.name),
                    });
                }
            }
        }
        let glue = self.glue.iter().map(|&(l, r, _)| (l, r)).collect();
        SubstitutionRule::new(self.name.clone(), self.lhs.graph, self.rhs.graph, glue, self.rate).map_err(
            |e| match e {
                GrammarError::NonpositiveRate { rule, .. } => GrammarError::NonpositiveRate {
                    rule,
                    line: self.line,
                },
                GrammarError::NonInjectiveGlue { rule, .. } => GrammarError::NonInjectiveGlue {
                    rule,
                    line: self.line,
                },
                other => other,
            },
        )
    }
}
