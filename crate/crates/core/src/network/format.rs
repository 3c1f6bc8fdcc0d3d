//! Line-oriented network file format.
//!
//! ```text
//! # optional comments
//! facts 11
//! rules 2
//! rule 0 3 7 1 6.0000000000000000e-1 4.0000000000000000e-1
//! rule 1 2 5 9 2.5000000000000000e-1 7.5000000000000000e-1
//! ```
//!
//! Weights are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::io::{BufRead, Write};

use super::{FactId, Rule, RuleFactNetwork, RuleId};
use crate::error::{Error, Result};

pub fn write_network<W: Write>(net: &RuleFactNetwork, mut sink: W) -> Result<()> {
    writeln!(sink, "facts {}", net.num_facts())?;
    writeln!(sink, "rules {}", net.num_rules())?;
    for r in net.rules() {
        writeln!(
            sink,
            "rule {} {} {} {} {:.16e} {:.16e}",
            r.id, r.input_a, r.input_b, r.output, r.weight_a, r.weight_b
        )?;
    }
    sink.flush()?;
    Ok(())
}

pub fn save_network(net: &RuleFactNetwork, path: impl AsRef<std::path::Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_network(net, std::io::BufWriter::new(file))
}

pub fn load_network(path: impl AsRef<std::path::Path>) -> Result<RuleFactNetwork> {
    let file = std::fs::File::open(path)?;
    parse_network(std::io::BufReader::new(file))
}

fn parse_field<T: std::str::FromStr>(token: Option<&str>, what: &str, line: usize) -> Result<T> {
    let token = token.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} '{token}'"),
    })
}

fn expect_keyword(token: Option<&str>, keyword: &str, line: usize) -> Result<()> {
    match token {
        Some(t) if t == keyword => Ok(()),
        Some(t) => Err(Error::Parse {
            line,
            message: format!("expected '{keyword}', found '{t}'"),
        }),
        None => Err(Error::Parse {
            line,
            message: format!("expected '{keyword}'"),
        }),
    }
}

/// Parses a network and validates every invariant.
pub fn parse_network<R: BufRead>(source: R) -> Result<RuleFactNetwork> {
    let mut num_facts: Option<usize> = None;
    let mut num_rules: Option<usize> = None;
    let mut rules = Vec::new();
    let mut last_line = 0;

    for (index, line) in source.lines().enumerate() {
        let line_no = index + 1;
        last_line = line_no;
        let line = line?;
        let content = line.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let mut tokens = content.split_whitespace();
        if num_facts.is_none() {
            expect_keyword(tokens.next(), "facts", line_no)?;
            num_facts = Some(parse_field(tokens.next(), "fact count", line_no)?);
        } else if num_rules.is_none() {
            expect_keyword(tokens.next(), "rules", line_no)?;
            num_rules = Some(parse_field(tokens.next(), "rule count", line_no)?);
        } else {
            expect_keyword(tokens.next(), "rule", line_no)?;
            let id: usize = parse_field(tokens.next(), "rule id", line_no)?;
            let input_a: usize = parse_field(tokens.next(), "input_a", line_no)?;
            let input_b: usize = parse_field(tokens.next(), "input_b", line_no)?;
            let output: usize = parse_field(tokens.next(), "output", line_no)?;
            let weight_a: f64 = parse_field(tokens.next(), "weight_a", line_no)?;
            let weight_b: f64 = parse_field(tokens.next(), "weight_b", line_no)?;
            rules.push(Rule {
                id: RuleId(id),
                input_a: FactId(input_a),
                input_b: FactId(input_b),
                output: FactId(output),
                weight_a,
                weight_b,
            });
        }
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unexpected trailing token '{extra}'"),
            });
        }
    }

    let eof = last_line + 1;
    let num_facts = num_facts.ok_or(Error::Parse {
        line: eof,
        message: "missing 'facts' header".into(),
    })?;
    let num_rules = num_rules.ok_or(Error::Parse {
        line: eof,
        message: "missing 'rules' header".into(),
    })?;
    if rules.len() != num_rules {
        return Err(Error::Validation(format!(
            "header declares {num_rules} rules but {} were listed",
            rules.len()
        )));
    }
    RuleFactNetwork::new(num_facts, rules)
}
