//! Slash notation for game values.
//!
//! `a|b||c|d` is `{{a|b}|{c|d}}`: the longest run of bars is the
//! outermost separator. Option lists are comma separated and braces
//! group anything that would otherwise be ambiguous.

use thiserror::Error;

use super::dyadic::Dyadic;
use super::game::{GameValue, Node};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("cannot parse game `{input}`: {reason}")]
pub struct NotationError {
    pub input: String,
    pub reason: String,
}

fn err(input: &str, reason: impl Into<String>) -> NotationError {
    NotationError {
        input: input.to_string(),
        reason: reason.into(),
    }
}

/// Renders `g` without outer braces.
pub fn render(g: GameValue) -> String {
    render_level(g).0
}

/// Text and bar level of the bare rendering. Numbers and `*` have level 0.
fn render_level(g: GameValue) -> (String, usize) {
    if g == GameValue::star() {
        return ("*".into(), 0);
    }
    match &*g.node() {
        Node::Number(x) => (x.to_string(), 0),
        Node::Form { left, right } => {
            let (l, ll) = render_side(left);
            let (r, rl) = render_side(right);
            let level = ll.max(rl) + 1;
            (format!("{l}{}{r}", "|".repeat(level)), level)
        }
    }
}

fn render_side(options: &[GameValue]) -> (String, usize) {
    if let [only] = options {
        let (text, level) = render_level(*only);
        if level <= 1 {
            return (text, level);
        }
        return (format!("{{{text}}}"), 0);
    }
    let parts: Vec<String> = options
        .iter()
        .map(|&o| {
            let (text, level) = render_level(o);
            if level == 0 {
                text
            } else {
                format!("{{{text}}}")
            }
        })
        .collect();
    (parts.join(","), 0)
}

/// Parses slash notation into a canonical value.
pub fn parse(input: &str) -> Result<GameValue, NotationError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(err(input, "empty"));
    }
    parse_game(s).map_err(|reason| err(input, reason))
}

fn parse_game(s: &str) -> Result<GameValue, String> {
    let s = s.trim();
    let runs = bar_runs(s)?;
    if runs.is_empty() {
        return parse_atom(s);
    }
    let top = runs.iter().map(|r| r.1).max().unwrap_or(0);
    let at_top: Vec<_> = runs.iter().filter(|r| r.1 == top).collect();
    if at_top.len() > 1 {
        return Err(format!("ambiguous: several `{}` separators", "|".repeat(top)));
    }
    let (start, len) = *at_top[0];
    let left = parse_side(&s[..start])?;
    let right = parse_side(&s[start + len..])?;
    Ok(GameValue::from_options(left, right))
}

fn parse_side(s: &str) -> Result<Vec<GameValue>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if !bar_runs(s)?.is_empty() {
        return Ok(vec![parse_game(s)?]);
    }
    split_top(s, ',')
        .into_iter()
        .map(|item| parse_atom(item.trim()))
        .collect()
}

fn parse_atom(s: &str) -> Result<GameValue, String> {
    if s == "*" {
        return Ok(GameValue::star());
    }
    if let Some(inner) = s.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
        if matching_close(s) == Some(s.len() - 1) {
            let inner = inner.trim();
            if inner.is_empty() {
                return Ok(GameValue::zero());
            }
            if bar_runs(inner)?.is_empty() {
                return Err(format!("`{s}` has no `|`"));
            }
            return parse_game(inner);
        }
    }
    s.parse::<Dyadic>()
        .map(GameValue::number)
        .map_err(|_| format!("`{s}` is not a number, `*` or braced game"))
}

/// Index of the brace closing the one at position 0.
fn matching_close(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '{' => depth += 1,
            '}' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Top-level runs of `|` as (byte offset, length).
fn bar_runs(s: &str) -> Result<Vec<(usize, usize)>, String> {
    let mut runs = Vec::new();
    let mut depth = 0i32;
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth < 0 {
                    return Err("unbalanced `}`".into());
                }
            }
            b'|' if depth == 0 => {
                let start = i;
                while i < bytes.len() && bytes[i] == b'|' {
                    i += 1;
                }
                runs.push((start, i - start));
                continue;
            }
            _ => {}
        }
        i += 1;
    }
    if depth != 0 {
        return Err("unbalanced `{`".into());
    }
    Ok(runs)
}

fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut last = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '{' => depth += 1,
            '}' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&s[last..i]);
                last = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[last..]);
    parts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for text in [
            "0",
            "-5/2",
            "*",
            "1|-1",
            "3/2|0||-1/2|-5/2",
            "1|{1/2|-1||-3/2|-7/2}",
            "{2|0||-1/2|-2}|-5/2",
            "5|3||11/4|1/4",
            "0|*",
        ] {
            let g = parse(text).unwrap();
            assert_eq!(render(g), text);
        }
    }

    #[test]
    fn braces_and_lists() {
        let a = parse("{3/2|0}|{-1/2|-5/2}").unwrap();
        assert_eq!(a, parse("3/2|0||-1/2|-5/2").unwrap());
        assert_eq!(parse("{0|}").unwrap(), GameValue::integer(1));
        assert_eq!(parse("0,*|0,*").unwrap(), parse("{0,*|0,*}").unwrap());
        assert_eq!(parse("{*|*}").unwrap(), GameValue::zero());
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("").is_err());
        assert!(parse("1|2|3").is_err());
        assert!(parse("{1|2").is_err());
        assert!(parse("1/3").is_err());
        assert!(parse("x").is_err());
    }
}
