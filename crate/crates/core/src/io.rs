//! Text formats for groups and near-structure tables.
//!
//! A group file lists the degree and generators as image lists; cycle
//! notation is accepted on input:
//!
//! ```text
//! degree: 3
//! gen: 1 2 0
//! gen: (0 1)
//! ```
//!
//! A table file gives the order, the zero and one, and both tables row by
//! row after `add:` and `mul:` headers. Blank lines and `#` comments are
//! ignored in both formats.

use crate::error::{Error, Result};
use crate::nearfield::NearStructure;
use crate::perm::{generate_group, FiniteGroup, Permutation};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Non-empty, comment-free lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_usize(line: usize, tok: &str) -> Result<usize> {
    tok.parse().map_err(|_| {
        perr(
            line,
            format!("expected a non-negative integer, found `{tok}`"),
        )
    })
}

fn parse_perm(line: usize, degree: usize, body: &str) -> Result<Permutation> {
    let p = if body.starts_with('(') {
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        for chunk in body.split('(').skip(1) {
            let inner = chunk
                .trim()
                .strip_suffix(')')
                .ok_or_else(|| perr(line, "unbalanced parentheses"))?;
            cycles.push(
                inner
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| parse_usize(line, t))
                    .collect::<Result<_>>()?,
            );
        }
        let refs: Vec<&[usize]> = cycles.iter().map(Vec::as_slice).collect();
        Permutation::from_cycles(degree, &refs)
    } else {
        let images = body
            .split_whitespace()
            .map(|t| parse_usize(line, t))
            .collect::<Result<Vec<_>>>()?;
        if images.len() != degree {
            return Err(perr(
                line,
                format!("generator has {} images, expected {degree}", images.len()),
            ));
        }
        Permutation::new(images)
    };
    p.map_err(|e| perr(line, e.to_string()))
}

/// Parses a group file and closes the generators, failing past `cap`
/// elements.
pub fn parse_group(text: &str, cap: usize) -> Result<FiniteGroup> {
    let mut degree = None;
    let mut gens = Vec::new();
    for (line, l) in content_lines(text) {
        let (key, rest) = l
            .split_once(':')
            .ok_or_else(|| perr(line, "expected `key: value`"))?;
        match key.trim() {
            "degree" => {
                if degree.is_some() {
                    return Err(perr(line, "duplicate `degree`"));
                }
                let d = parse_usize(line, rest.trim())?;
                if d == 0 {
                    return Err(perr(line, "degree must be positive"));
                }
                degree = Some(d);
            }
            "gen" => {
                let d = degree.ok_or_else(|| perr(line, "`gen` before `degree`"))?;
                gens.push(parse_perm(line, d, rest.trim())?);
            }
            other => return Err(perr(line, format!("unknown key `{other}`"))),
        }
    }
    let degree = degree.ok_or_else(|| perr(text.lines().count() + 1, "missing `degree`"))?;
    if gens.is_empty() {
        gens.push(Permutation::identity(degree));
    }
    generate_group(&gens, cap)
}

/// Canonical group file: degree and generator image lists.
pub fn print_group(g: &FiniteGroup) -> String {
    let mut s = format!("degree: {}\n", g.degree());
    for p in g.generators() {
        let imgs: Vec<String> = p.images().iter().map(usize::to_string).collect();
        s.push_str(&format!("gen: {}\n", imgs.join(" ")));
    }
    s
}

/// Parses a table file. A missing row is reported by table name and index.
pub fn parse_table(text: &str) -> Result<NearStructure> {
    let mut order = None;
    let mut zero = None;
    let mut one = None;
    let mut add: Vec<Vec<usize>> = Vec::new();
    let mut mul: Vec<Vec<usize>> = Vec::new();
    let mut section: Option<&str> = None;
    let missing_rows = |name: &str, have: usize, n: usize, line: usize| {
        perr(
            line,
            format!("{name} table is missing row {have} (has {have} of {n})"),
        )
    };
    for (line, l) in content_lines(text) {
        if let Some((key, rest)) = l.split_once(':') {
            let rest = rest.trim();
            let key = key.trim();
            match key {
                "order" | "zero" | "one" => {
                    let v = parse_usize(line, rest)?;
                    let slot = match key {
                        "order" => &mut order,
                        "zero" => &mut zero,
                        _ => &mut one,
                    };
                    if slot.replace(v).is_some() {
                        return Err(perr(line, format!("duplicate `{key}`")));
                    }
                }
                "add" | "mul" => {
                    let n = order.ok_or_else(|| perr(line, "`order` must come first"))?;
                    if let Some(prev) = section {
                        let rows = if prev == "add" { &add } else { &mul };
                        if rows.len() < n {
                            return Err(missing_rows(prev, rows.len(), n, line));
                        }
                    }
                    if (key == "add" && !add.is_empty()) || (key == "mul" && !mul.is_empty()) {
                        return Err(perr(line, format!("duplicate `{key}` section")));
                    }
                    if !rest.is_empty() {
                        return Err(perr(
                            line,
                            format!("`{key}:` rows go on the following lines"),
                        ));
                    }
                    section = Some(if key == "add" { "add" } else { "mul" });
                }
                other => return Err(perr(line, format!("unknown key `{other}`"))),
            }
            continue;
        }
        let name = section.ok_or_else(|| perr(line, "table row outside `add:`/`mul:` section"))?;
        let n = order.expect("sections require order");
        let row = l
            .split_whitespace()
            .map(|t| parse_usize(line, t))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != n {
            return Err(perr(
                line,
                format!("{name} row has {} entries, expected {n}", row.len()),
            ));
        }
        if let Some(v) = row.iter().find(|&&v| v >= n) {
            return Err(perr(line, format!("entry {v} out of range for order {n}")));
        }
        let rows = if name == "add" { &mut add } else { &mut mul };
        if rows.len() == n {
            return Err(perr(line, format!("{name} table has more than {n} rows")));
        }
        rows.push(row);
    }
    let end = text.lines().count() + 1;
    let n = order.ok_or_else(|| perr(end, "missing `order`"))?;
    let zero = zero.ok_or_else(|| perr(end, "missing `zero`"))?;
    let one = one.ok_or_else(|| perr(end, "missing `one`"))?;
    for (name, rows) in [("add", &add), ("mul", &mul)] {
        if rows.len() < n {
            return Err(missing_rows(name, rows.len(), n, end));
        }
    }
    NearStructure::new(n, add, mul, zero, one).map_err(|e| perr(end, e.to_string()))
}

pub fn print_table(s: &NearStructure) -> String {
    let mut out = format!(
        "order: {}\nzero: {}\none: {}\n",
        s.order(),
        s.zero(),
        s.one()
    );
    for (name, table) in [("add", s.add_table()), ("mul", s.mul_table())] {
        out.push_str(name);
        out.push_str(":\n");
        for row in table {
            let r: Vec<String> = row.iter().map(usize::to_string).collect();
            out.push_str(&r.join(" "));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nearfield::{build_dickson_nearfield, build_field_nearfield};
    use crate::perm::catalog;

    #[test]
    fn group_round_trip() {
        let s3 = catalog("S(3)").unwrap();
        let text = print_group(&s3);
        let back = parse_group(&text, 1000).unwrap();
        assert_eq!(back, s3);
        assert_eq!(print_group(&back), text);
    }

    #[test]
    fn group_canonicalization() {
        let text = "# symmetric group\n\ndegree: 3\ngen: (0 1 2)\ngen: (0 1)  # a transposition\n";
        let g = parse_group(text, 100).unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(print_group(&g), "degree: 3\ngen: 1 2 0\ngen: 1 0 2\n");
    }

    #[test]
    fn group_errors() {
        let err = |t: &str| parse_group(t, 100).unwrap_err();
        assert!(matches!(
            err("degree: 3\ngen: 0 0 1\n"),
            Error::Parse { line: 2, .. }
        ));
        assert!(matches!(err("gen: 0 1\n"), Error::Parse { line: 1, .. }));
        assert!(matches!(
            err("degree: 3\n\ngen: 0 1\n"),
            Error::Parse { line: 3, .. }
        ));
        assert!(matches!(
            err("degree: 3\nfoo: 1\n"),
            Error::Parse { line: 2, .. }
        ));
        assert!(matches!(err("# nothing\n"), Error::Parse { line: 2, .. }));
        assert!(matches!(
            parse_group("degree: 5\ngen: 1 2 3 4 0\ngen: 1 0 2 3 4\n", 50),
            Err(Error::CapExceeded { cap: 50, .. })
        ));
    }

    #[test]
    fn table_round_trip() {
        for s in [
            build_field_nearfield(4).unwrap(),
            build_dickson_nearfield(9).unwrap(),
        ] {
            let text = print_table(&s);
            let back = parse_table(&text).unwrap();
            assert_eq!(back, s);
            assert_eq!(print_table(&back), text);
        }
    }

    #[test]
    fn truncated_table_names_missing_row() {
        let text = print_table(&build_field_nearfield(4).unwrap());
        let cut: Vec<&str> = text.lines().collect();
        // drop the last mul row
        let truncated = cut[..cut.len() - 1].join("\n");
        match parse_table(&truncated) {
            Err(Error::Parse { msg, .. }) => {
                assert!(msg.contains("mul table is missing row 3"), "{msg}")
            }
            other => panic!("{other:?}"),
        }
        // drop an add row
        let mut lines = cut.clone();
        lines.remove(5);
        match parse_table(&lines.join("\n")) {
            Err(Error::Parse { line, msg }) => {
                assert!(msg.contains("add table is missing row 3"), "{msg}");
                assert_eq!(line, 8);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn table_errors() {
        assert!(matches!(
            parse_table("order: 2\nzero: 0\none: 1\nadd:\n0 1\n1 5\n"),
            Err(Error::Parse { line: 6, .. })
        ));
        assert!(matches!(
            parse_table("zero: 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_table("order: 2\nzero: 0\none: 1\nadd:\n0 1\n1 0\nmul:\n0 0\n0 0\n"),
            Err(Error::Parse { .. })
        ));
    }
}
