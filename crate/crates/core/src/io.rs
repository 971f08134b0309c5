//! Model input and output: UAI `MARKOV` files and a line-oriented native
//! cost format.
//!
//! Native format, `#` starts a comment:
//!
//! ```text
//! 3            # number of variables
//! 2 2 2        # domain sizes
//! unary 0      # one line of |X_0| costs; omitted unaries are zero
//! 0.5 0
//! pair 0 1     # |X_0| rows of |X_1| costs
//! 1 0
//! 0 1
//! triplet 0 1 2  # |X_0|*|X_1| rows of |X_2| costs
//! ...
//! ```
//!
//! Blocks are applied in file order, and [`serialize_native`] writes them
//! in factor-id order, so a round trip rebuilds identical factor ids.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::ParseError;
use crate::model::{PairTerm, Relaxation};

/// Cost assigned to table entries at or below `1e-300`.
pub const ZERO_PROB_COST: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Uai,
    Native,
}

impl std::str::FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uai" => Ok(InputFormat::Uai),
            "native" => Ok(InputFormat::Native),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

pub fn read_model(path: &Path, format: InputFormat) -> Result<Relaxation, ParseError> {
    let text = std::fs::read_to_string(path)?;
    match format {
        InputFormat::Uai => parse_uai(&text),
        InputFormat::Native => parse_native(&text),
    }
}

/// Whitespace tokens with their 1-based line numbers.
struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(i, line)| line.split_whitespace().map(move |t| (i + 1, t)))
            .collect();
        Tokens { items, pos: 0 }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        let t = self
            .items
            .get(self.pos)
            .copied()
            .ok_or_else(|| ParseError::UnexpectedEof(what.to_string()))?;
        self.pos += 1;
        Ok(t)
    }

    fn usize(&mut self, what: &str) -> Result<usize, ParseError> {
        let (line, t) = self.next(what)?;
        t.parse().map_err(|_| ParseError::Syntax {
            line,
            message: format!("expected {what}, found `{t}`"),
        })
    }

    fn f64(&mut self, what: &str) -> Result<(usize, f64), ParseError> {
        let (line, t) = self.next(what)?;
        t.parse().map(|x| (line, x)).map_err(|_| ParseError::Syntax {
            line,
            message: format!("expected {what}, found `{t}`"),
        })
    }
}

fn neg_log(p: f64, line: usize) -> Result<f64, ParseError> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(ParseError::Syntax {
            line,
            message: format!("table value {p} is not a finite non-negative number"),
        });
    }
    Ok(if p <= 1e-300 { ZERO_PROB_COST } else { -p.ln() })
}

/// Parses a UAI `MARKOV` network with unary and pairwise factors; costs are
/// `-ln` of the table values and factors on the same scope are summed.
pub fn parse_uai(text: &str) -> Result<Relaxation, ParseError> {
    let mut tok = Tokens::new(text);
    if tok.items.is_empty() {
        return Err(ParseError::Empty);
    }
    let (_, kind) = tok.next("network type")?;
    if !kind.eq_ignore_ascii_case("MARKOV") {
        return Err(ParseError::UnsupportedNetwork(kind.to_string()));
    }
    let n = tok.usize("variable count")?;
    let sizes: Vec<usize> = (0..n)
        .map(|_| tok.usize("domain size"))
        .collect::<Result<_, _>>()?;
    let m = tok.usize("factor count")?;
    let mut scopes = Vec::with_capacity(m);
    for index in 0..m {
        let arity = tok.usize("factor arity")?;
        let mut scope = Vec::with_capacity(arity);
        for _ in 0..arity {
            let (line, _) = tok.items.get(tok.pos).copied().unwrap_or((0, ""));
            let v = tok.usize("variable index")?;
            if v >= n {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("variable {v} out of range (n = {n})"),
                });
            }
            scope.push(v);
        }
        if arity == 0 || arity > 2 {
            return Err(ParseError::UnsupportedArity { index, scope, arity });
        }
        scopes.push(scope);
    }

    let mut unary: Vec<Vec<f64>> = sizes.iter().map(|&d| vec![0.0; d]).collect();
    let mut pairs: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for scope in &scopes {
        let expected: usize = scope.iter().map(|&v| sizes[v]).product();
        let (line, count) = {
            let (line, _) = tok.items.get(tok.pos).copied().unwrap_or((0, ""));
            (line, tok.usize("table size")?)
        };
        if count != expected {
            return Err(ParseError::Syntax {
                line,
                message: format!("table for scope {scope:?} has {count} entries, expected {expected}"),
            });
        }
        let mut costs = Vec::with_capacity(count);
        for _ in 0..count {
            let (line, p) = tok.f64("table value")?;
            costs.push(neg_log(p, line)?);
        }
        match scope[..] {
            [v] => {
                for (a, c) in unary[v].iter_mut().zip(&costs) {
                    *a += c;
                }
            }
            [u, v] if u == v => {
                return Err(ParseError::Model(crate::error::ModelError::SelfLoop { var: u }));
            }
            [u, v] => {
                let (lo, hi) = (u.min(v), u.max(v));
                let entry = pairs
                    .entry((lo, hi))
                    .or_insert_with(|| vec![0.0; sizes[lo] * sizes[hi]]);
                for a in 0..sizes[u] {
                    for b in 0..sizes[v] {
                        let idx = if u < v { a * sizes[v] + b } else { b * sizes[u] + a };
                        entry[idx] += costs[a * sizes[v] + b];
                    }
                }
            }
            _ => unreachable!("arity checked above"),
        }
    }
    let pairs = pairs
        .into_iter()
        .map(|((u, v), c)| PairTerm::new(u, v, c))
        .collect();
    Ok(Relaxation::build(sizes, unary, pairs)?)
}

/// Non-empty lines with comments stripped, keeping 1-based line numbers.
fn content_lines(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let body = line.split('#').next().unwrap_or("");
            let toks: Vec<&str> = body.split_whitespace().collect();
            (!toks.is_empty()).then_some((i + 1, toks))
        })
        .collect()
}

fn parse_usize(line: usize, t: &str, what: &str) -> Result<usize, ParseError> {
    t.parse().map_err(|_| ParseError::Syntax {
        line,
        message: format!("expected {what}, found `{t}`"),
    })
}

fn parse_row(line: usize, toks: &[&str], len: usize) -> Result<Vec<f64>, ParseError> {
    if toks.len() != len {
        return Err(ParseError::Syntax {
            line,
            message: format!("expected {len} costs, found {}", toks.len()),
        });
    }
    toks.iter()
        .map(|t| {
            t.parse::<f64>().map_err(|_| ParseError::Syntax {
                line,
                message: format!("expected a cost, found `{t}`"),
            })
        })
        .collect()
}

pub fn parse_native(text: &str) -> Result<Relaxation, ParseError> {
    let lines = content_lines(text);
    let mut it = lines.iter();
    let (line, head) = it.next().ok_or(ParseError::Empty)?;
    if head.len() != 1 {
        return Err(ParseError::Syntax {
            line: *line,
            message: "first line must hold the number of variables".into(),
        });
    }
    let n = parse_usize(*line, head[0], "variable count")?;
    let (line, sizes_toks) = it
        .next()
        .ok_or_else(|| ParseError::UnexpectedEof("domain sizes".into()))?;
    if sizes_toks.len() != n {
        return Err(ParseError::Syntax {
            line: *line,
            message: format!("expected {n} domain sizes, found {}", sizes_toks.len()),
        });
    }
    let sizes: Vec<usize> = sizes_toks
        .iter()
        .map(|t| parse_usize(*line, t, "domain size"))
        .collect::<Result<_, _>>()?;

    enum Block {
        Pair(usize, usize, Vec<f64>),
        Triplet([usize; 3], Vec<f64>),
    }
    let mut unary: Vec<Vec<f64>> = sizes.iter().map(|&d| vec![0.0; d]).collect();
    let mut blocks = Vec::new();
    fn rows<'b>(
        it: &mut std::slice::Iter<'b, (usize, Vec<&str>)>,
        count: usize,
        width: usize,
        what: &str,
    ) -> Result<Vec<f64>, ParseError> {
        let mut out = Vec::with_capacity(count * width);
        for _ in 0..count {
            let (line, toks) = it
                .next()
                .ok_or_else(|| ParseError::UnexpectedEof(format!("rows of {what}")))?;
            out.extend(parse_row(*line, toks, width)?);
        }
        Ok(out)
    }
    while let Some((line, toks)) = it.next().map(|(l, t)| (*l, t.as_slice())) {
        let vars: Vec<usize> = toks[1..]
            .iter()
            .map(|t| parse_usize(line, t, "variable index"))
            .collect::<Result<_, _>>()?;
        if let Some(&v) = vars.iter().find(|&&v| v >= n) {
            return Err(ParseError::Syntax {
                line,
                message: format!("variable {v} out of range (n = {n})"),
            });
        }
        let arity = match toks[0] {
            "unary" => 1,
            "pair" => 2,
            "triplet" => 3,
            other => {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("unknown block `{other}`"),
                })
            }
        };
        if vars.len() != arity {
            return Err(ParseError::Syntax {
                line,
                message: format!("`{}` takes {arity} variables", toks[0]),
            });
        }
        match arity {
            1 => unary[vars[0]] = rows(&mut it, 1, sizes[vars[0]], "unary")?,
            2 => {
                let c = rows(&mut it, sizes[vars[0]], sizes[vars[1]], "pair")?;
                blocks.push((line, Block::Pair(vars[0], vars[1], c)));
            }
            _ => {
                let c = rows(&mut it, sizes[vars[0]] * sizes[vars[1]], sizes[vars[2]], "triplet")?;
                blocks.push((line, Block::Triplet([vars[0], vars[1], vars[2]], c)));
            }
        }
    }

    let mut model = Relaxation::build(sizes.clone(), unary, Vec::new())?;
    for (line, block) in blocks {
        let at_line = |e: crate::error::ModelError| ParseError::Syntax {
            line,
            message: e.to_string(),
        };
        match block {
            Block::Pair(u, v, c) => {
                model.insert_pair(u, v, c).map_err(at_line)?;
            }
            Block::Triplet(vars, c) => {
                let id = model.add_triplet(vars).map_err(at_line)?;
                // reorder from the given variable order to ascending scope
                let scope = model.factor(id).scope.clone();
                let table = model.costs_mut(id);
                let d = [sizes[vars[0]], sizes[vars[1]], sizes[vars[2]]];
                for x in 0..d[0] {
                    for y in 0..d[1] {
                        for z in 0..d[2] {
                            let labels = [(vars[0], x), (vars[1], y), (vars[2], z)];
                            let idx = scope.iter().fold(0, |acc, &s| {
                                let l = labels.iter().find(|p| p.0 == s).unwrap().1;
                                acc * sizes[s] + l
                            });
                            table[idx] = c[(x * d[1] + y) * d[2] + z];
                        }
                    }
                }
            }
        }
    }
    Ok(model)
}

/// Writes every factor in id order. Floats use the shortest representation
/// that parses back to the same value.
pub fn serialize_native(model: &Relaxation) -> String {
    let mut out = String::new();
    let sizes = model.domain_sizes();
    writeln!(out, "{}", model.num_vars()).unwrap();
    writeln!(out, "{}", join(sizes.iter())).unwrap();
    for f in model.factors() {
        let kind = match f.arity() {
            1 => "unary",
            2 => "pair",
            _ => "triplet",
        };
        writeln!(out, "{kind} {}", join(f.scope.iter())).unwrap();
        let width = sizes[*f.scope.last().unwrap()];
        for row in f.costs.chunks(width) {
            writeln!(out, "{}", join(row.iter())).unwrap();
        }
    }
    out
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_min, fc3, random_model};

    #[test]
    fn uai_minimal() {
        let m = parse_uai("MARKOV\n1\n2\n1\n1 0\n2\n0.5 0.5\n").unwrap();
        assert_eq!(m.num_vars(), 1);
        let c = &m.factor(m.singleton(0)).costs;
        assert!((c[0] - 2f64.ln()).abs() < 1e-15 && c[0] == c[1]);
        let one = parse_uai("MARKOV 1 2 1 1 0 2 1.0 1e-320").unwrap();
        assert_eq!(one.factor(one.singleton(0)).costs, vec![0.0, ZERO_PROB_COST]);
    }

    #[test]
    fn uai_pairs_and_duplicates() {
        let text = "MARKOV\n2\n2 3\n3\n2 1 0\n2 0 1\n1 1\n6\n1 1 1 1 1 1\n6\n0.5 1 1 1 1 1\n3\n1 1 0.25\n";
        let m = parse_uai(text).unwrap();
        // first pair table is over (1, 0): all ones; second over (0, 1)
        assert!((m.pair_cost(0, 1, 0, 0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(m.pair_cost(0, 1, 1, 2).unwrap(), 0.0);
        assert!((m.factor(m.singleton(1)).costs[2] - 4f64.ln()).abs() < 1e-15);
        assert_eq!(m.pairs().len(), 1);
    }

    #[test]
    fn uai_errors() {
        let e = parse_uai("MARKOV 3 2 2 2 1 3 0 1 2 8 1 1 1 1 1 1 1 1").unwrap_err();
        match e {
            ParseError::UnsupportedArity { scope, arity, .. } => {
                assert_eq!((scope, arity), (vec![0, 1, 2], 3));
            }
            other => panic!("{other}"),
        }
        assert!(matches!(parse_uai("BAYES 1 2 0"), Err(ParseError::UnsupportedNetwork(_))));
        assert!(matches!(parse_uai(""), Err(ParseError::Empty)));
        assert!(matches!(parse_uai("MARKOV 1 2 1 1 0 3 1 1 1"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_uai("MARKOV 1 2 1 1 0 2 1"), Err(ParseError::UnexpectedEof(_))));
    }

    #[test]
    fn native_round_trip() {
        for seed in 0..20 {
            let mut m = random_model(seed);
            if m.num_vars() >= 4 {
                m.add_triplet([0, 2, 3]).unwrap();
                let id = m.find_factor(&[0, 2, 3]).unwrap();
                for (i, c) in m.costs_mut(id).iter_mut().enumerate() {
                    *c = 0.1 * i as f64 - 0.3;
                }
            }
            let text = serialize_native(&m);
            assert_eq!(parse_native(&text).unwrap(), m, "seed {seed}");
        }
    }

    #[test]
    fn native_fc3() {
        let text = "# frustrated triangle\n3\n2 2 2\npair 0 1\n1 0\n0 1\npair 0 2\n1 0\n0 1\npair 1 2\n1 0\n0 1\n";
        let m = parse_native(text).unwrap();
        assert_eq!(m, fc3());
        assert_eq!(m.lower_bound(), 0.0);
        assert_eq!(brute_min(&m).unwrap().min_energy, 1.0);
    }

    #[test]
    fn native_triplet_order() {
        let text = "3\n2 2 2\ntriplet 2 0 1\n0 1\n2 3\n4 5\n6 7\n";
        let m = parse_native(text).unwrap();
        let id = m.find_factor(&[0, 1, 2]).unwrap();
        // given order (x2, x0, x1): entry (x2=1, x0=0, x1=1) is 5
        assert_eq!(m.factor(id).costs[m.entry_index(id, &[(0, 0), (1, 1), (2, 1)])], 5.0);
    }

    #[test]
    fn native_errors() {
        assert!(matches!(parse_native(""), Err(ParseError::Empty)));
        assert!(matches!(parse_native("# only a comment\n"), Err(ParseError::Empty)));
        match parse_native("2\n2 2\npair 0 1\n1 0\n0 x\n").unwrap_err() {
            ParseError::Syntax { line, .. } => assert_eq!(line, 5),
            other => panic!("{other}"),
        }
        match parse_native("2\n2 2\nquad 0 1\n").unwrap_err() {
            ParseError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
        assert!(matches!(
            parse_native("2\n2 2\npair 0 1\n1 0\n"),
            Err(ParseError::UnexpectedEof(_))
        ));
        match parse_native("2\n2 2\npair 0 1\n1 0\n0 1\npair 1 0\n1 0\n0 1\n").unwrap_err() {
            ParseError::Syntax { line, .. } => assert_eq!(line, 6),
            other => panic!("{other}"),
        }
    }
}
