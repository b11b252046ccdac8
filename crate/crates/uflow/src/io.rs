//! Line-oriented text formats for instances and solutions.
//!
//! Instance format (UTF-8, one record per line):
//!
//! ```text
//! nodes N arcs M commodities K
//! tail head capacity          (M lines)
//! origin destination demand   (K lines)
//! witness                     (optional block)
//! a0 a1 a2 ...                (K lines of arc indices, one path per commodity)
//! ```
//!
//! Solution format:
//!
//! ```text
//! a0 a1 a2 ...                          (K lines, one path per commodity)
//! metrics overflow_sum V congestion V   (footer, informational)
//! ```
//!
//! Numbers are written with the shortest round-trip `f64` representation,
//! so writing the same instance twice produces identical bytes.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::instance::{Commodity, Graph, Instance, Metrics, PathAssignment};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines().enumerate(),
        }
    }

    /// Next non-empty line as (1-based line number, content).
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.iter.by_ref() {
            let trimmed = line.trim();
            if !trimmed.is_empty() {
                return Some((i + 1, trimmed));
            }
        }
        None
    }
}

fn field<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from {token:?}")))
}

/// Parses an instance from its text form.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = Lines::new(text);
    let (lno, header) = lines
        .next_content()
        .ok_or_else(|| parse_err(0, "empty input"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 6 || tokens[0] != "nodes" || tokens[2] != "arcs" || tokens[4] != "commodities" {
        return Err(parse_err(lno, "expected header `nodes N arcs M commodities K`"));
    }
    let node_count: usize = field(tokens[1], lno, "node count")?;
    let arc_count: usize = field(tokens[3], lno, "arc count")?;
    let commodity_count: usize = field(tokens[5], lno, "commodity count")?;

    let mut arcs = Vec::with_capacity(arc_count);
    let mut capacities = Vec::with_capacity(arc_count);
    for _ in 0..arc_count {
        let (lno, line) = lines
            .next_content()
            .ok_or_else(|| parse_err(0, "unexpected end of input in arc block"))?;
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(parse_err(lno, "expected `tail head capacity`"));
        }
        arcs.push((field(t[0], lno, "tail")?, field(t[1], lno, "head")?));
        capacities.push(field(t[2], lno, "capacity")?);
    }

    let mut commodities = Vec::with_capacity(commodity_count);
    for _ in 0..commodity_count {
        let (lno, line) = lines
            .next_content()
            .ok_or_else(|| parse_err(0, "unexpected end of input in commodity block"))?;
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(parse_err(lno, "expected `origin destination demand`"));
        }
        commodities.push(Commodity {
            origin: field(t[0], lno, "origin")?,
            destination: field(t[1], lno, "destination")?,
            demand: field(t[2], lno, "demand")?,
        });
    }

    let witness = match lines.next_content() {
        None => None,
        Some((lno, tag)) => {
            if tag != "witness" {
                return Err(parse_err(lno, format!("expected `witness` or end of file, found {tag:?}")));
            }
            let mut paths = Vec::with_capacity(commodity_count);
            for _ in 0..commodity_count {
                let (lno, line) = lines
                    .next_content()
                    .ok_or_else(|| parse_err(0, "unexpected end of input in witness block"))?;
                let path = line
                    .split_whitespace()
                    .map(|t| field(t, lno, "arc index"))
                    .collect::<Result<Vec<usize>>>()?;
                paths.push(path);
            }
            Some(paths)
        }
    };

    let graph = Graph::new(node_count, arcs, capacities)?;
    Ok(Instance {
        graph,
        commodities,
        witness,
    })
}

/// Renders an instance in the text format.
pub fn format_instance(instance: &Instance) -> String {
    let mut out = String::new();
    let graph = &instance.graph;
    out.push_str(&format!(
        "nodes {} arcs {} commodities {}\n",
        graph.node_count(),
        graph.arc_count(),
        instance.commodities.len()
    ));
    for (arc, &cap) in graph.arcs().iter().zip(graph.capacities()) {
        out.push_str(&format!("{} {} {}\n", arc.tail, arc.head, cap));
    }
    for c in &instance.commodities {
        out.push_str(&format!("{} {} {}\n", c.origin, c.destination, c.demand));
    }
    if let Some(witness) = &instance.witness {
        out.push_str("witness\n");
        for path in witness {
            out.push_str(&join_ids(path));
            out.push('\n');
        }
    }
    out
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    parse_instance(&fs::read_to_string(path)?)
}

pub fn write_instance(path: impl AsRef<Path>, instance: &Instance) -> Result<()> {
    let mut file = BufWriter::new(fs::File::create(path)?);
    file.write_all(format_instance(instance).as_bytes())?;
    Ok(())
}

fn join_ids(ids: &[usize]) -> String {
    ids.iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders a solution: one path line per commodity plus a metrics footer.
pub fn format_solution(assignment: &PathAssignment, metrics: &Metrics) -> String {
    let mut out = String::new();
    for path in &assignment.paths {
        out.push_str(&join_ids(path));
        out.push('\n');
    }
    out.push_str(&format!(
        "metrics overflow_sum {} congestion {}\n",
        metrics.overflow_sum, metrics.congestion
    ));
    out
}

/// Parses a solution file for an instance with `commodity_count` commodities.
/// The metrics footer is tolerated but not trusted; callers re-evaluate.
pub fn parse_solution(text: &str, commodity_count: usize) -> Result<PathAssignment> {
    let mut lines = Lines::new(text);
    let mut paths = Vec::with_capacity(commodity_count);
    for _ in 0..commodity_count {
        let (lno, line) = lines
            .next_content()
            .ok_or_else(|| parse_err(0, "unexpected end of input in solution paths"))?;
        let path = line
            .split_whitespace()
            .map(|t| field(t, lno, "arc index"))
            .collect::<Result<Vec<usize>>>()?;
        paths.push(path);
    }
    if let Some((lno, footer)) = lines.next_content() {
        if !footer.starts_with("metrics") {
            return Err(parse_err(lno, "expected `metrics ...` footer"));
        }
    }
    Ok(PathAssignment { paths })
}

pub fn write_solution(path: impl AsRef<Path>, assignment: &PathAssignment, metrics: &Metrics) -> Result<()> {
    let mut file = BufWriter::new(fs::File::create(path)?);
    file.write_all(format_solution(assignment, metrics).as_bytes())?;
    Ok(())
}

pub fn read_solution(path: impl AsRef<Path>, commodity_count: usize) -> Result<PathAssignment> {
    parse_solution(&fs::read_to_string(path)?, commodity_count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_with_witness() {
        let graph = Graph::new(3, vec![(0, 1), (1, 2)], vec![4.0, 2.5]).unwrap();
        let instance = Instance {
            graph,
            commodities: vec![Commodity {
                origin: 0,
                destination: 2,
                demand: 1.5,
            }],
            witness: Some(vec![vec![0, 1]]),
        };
        let text = format_instance(&instance);
        let back = parse_instance(&text).unwrap();
        assert_eq!(format_instance(&back), text);
        assert_eq!(back.witness, instance.witness);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "nodes 2 arcs 1 commodities 1\n0 1 oops\n0 1 1\n";
        match parse_instance(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_header() {
        assert!(parse_instance("nodes 2 arcs 1\n").is_err());
    }

    #[test]
    fn solution_round_trip() {
        let assignment = PathAssignment {
            paths: vec![vec![0, 1], vec![2]],
        };
        let metrics = Metrics {
            overflow_sum: 2.0,
            congestion: 1.4,
            per_arc_load: vec![],
        };
        let text = format_solution(&assignment, &metrics);
        let back = parse_solution(&text, 2).unwrap();
        assert_eq!(back, assignment);
    }
}
