use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::primitives::Primitive;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Node {
    Op(Primitive),
    Feature(usize),
    Const(f64),
}

impl Node {
    pub fn arity(&self) -> usize {
        match self {
            Node::Op(p) => p.arity(),
            _ => 0,
        }
    }

    pub fn is_terminal(&self) -> bool {
        !matches!(self, Node::Op(_))
    }
}

/// An expression tree stored as its pre-order node sequence.
///
/// Text form is a prefix s-expression such as `(mul (add x0 0.5) x1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    nodes: Vec<Node>,
}

impl Program {
    /// Wraps a node sequence after checking that it forms exactly one tree.
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        check_prefix(&nodes)?;
        Ok(Self { nodes })
    }

    pub(crate) fn from_nodes_unchecked(nodes: Vec<Node>) -> Self {
        debug_assert!(check_prefix(&nodes).is_ok());
        Self { nodes }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            nodes: vec![Node::Const(value)],
        }
    }

    pub fn feature(index: usize) -> Self {
        Self {
            nodes: vec![Node::Feature(index)],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// One past the last node of the subtree rooted at `start`.
    pub fn subtree_end(&self, start: usize) -> usize {
        subtree_end(&self.nodes, start)
    }

    /// Depth of the tree; a lone terminal has depth 0.
    pub fn depth(&self) -> usize {
        let mut pending: Vec<usize> = Vec::new();
        let mut max_depth = 0;
        for node in &self.nodes {
            let depth = pending.len();
            max_depth = max_depth.max(depth);
            match node.arity() {
                0 => {
                    // Close every parent whose last child this was.
                    while let Some(left) = pending.last_mut() {
                        *left -= 1;
                        if *left > 0 {
                            break;
                        }
                        pending.pop();
                    }
                }
                n => pending.push(n),
            }
        }
        max_depth
    }

    /// Largest feature index referenced, if any.
    pub fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Feature(i) => Some(*i),
                _ => None,
            })
            .max()
    }

    /// Replaces `self[start..subtree_end(start)]` with `replacement`.
    pub(crate) fn splice(&self, start: usize, replacement: &[Node]) -> Program {
        let end = self.subtree_end(start);
        let mut nodes = Vec::with_capacity(self.nodes.len() - (end - start) + replacement.len());
        nodes.extend_from_slice(&self.nodes[..start]);
        nodes.extend_from_slice(replacement);
        nodes.extend_from_slice(&self.nodes[end..]);
        Program::from_nodes_unchecked(nodes)
    }

    fn write_from(&self, start: usize, out: &mut String) -> usize {
        match self.nodes[start] {
            Node::Const(v) => {
                let _ = write!(out, "{v:?}");
                start + 1
            }
            Node::Feature(i) => {
                let _ = write!(out, "x{i}");
                start + 1
            }
            Node::Op(p) => {
                out.push('(');
                out.push_str(p.name());
                let mut next = start + 1;
                for _ in 0..p.arity() {
                    out.push(' ');
                    next = self.write_from(next, out);
                }
                out.push(')');
                next
            }
        }
    }
}

pub(crate) fn subtree_end(nodes: &[Node], start: usize) -> usize {
    let mut open = 1usize;
    let mut i = start;
    while open > 0 {
        open = open - 1 + nodes[i].arity();
        i += 1;
    }
    i
}

fn check_prefix(nodes: &[Node]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::InvalidProgram("empty node sequence".into()));
    }
    let mut open: isize = 1;
    for (i, node) in nodes.iter().enumerate() {
        if open == 0 {
            return Err(Error::InvalidProgram(format!(
                "trailing nodes after complete tree at position {i}"
            )));
        }
        if let Node::Const(v) = node {
            if !v.is_finite() {
                return Err(Error::InvalidProgram(format!("non-finite constant {v}")));
            }
        }
        open += node.arity() as isize - 1;
    }
    if open != 0 {
        return Err(Error::InvalidProgram(format!(
            "incomplete tree: {open} missing argument(s)"
        )));
    }
    Ok(())
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::with_capacity(self.nodes.len() * 6);
        self.write_from(0, &mut s);
        f.write_str(&s)
    }
}

enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(s: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut atom_start: Option<usize> = None;
    for (i, c) in s.char_indices() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if let Some(a) = atom_start.take() {
                tokens.push(Token::Atom(&s[a..i]));
            }
            match c {
                '(' => tokens.push(Token::Open),
                ')' => tokens.push(Token::Close),
                _ => {}
            }
        } else if atom_start.is_none() {
            atom_start = Some(i);
        }
    }
    if let Some(a) = atom_start {
        tokens.push(Token::Atom(&s[a..]));
    }
    tokens
}

fn parse_terminal(atom: &str) -> Result<Node> {
    if let Some(idx) = atom.strip_prefix('x') {
        return idx
            .parse::<usize>()
            .map(Node::Feature)
            .map_err(|_| Error::InvalidProgram(format!("bad feature '{atom}'")));
    }
    match atom.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Node::Const(v)),
        _ => Err(Error::InvalidProgram(format!("bad terminal '{atom}'"))),
    }
}

impl FromStr for Program {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens = tokenize(s);
        let mut nodes = Vec::new();
        // Remaining argument count for each open parenthesis.
        let mut frames: Vec<usize> = Vec::new();
        let mut i = 0;
        let mut complete = false;
        while i < tokens.len() {
            if complete {
                return Err(Error::InvalidProgram("trailing input after expression".into()));
            }
            if let Some(0) = frames.last() {
                match tokens[i] {
                    Token::Close => {
                        frames.pop();
                        i += 1;
                        complete = frames.is_empty();
                        continue;
                    }
                    _ => return Err(Error::InvalidProgram("too many arguments".into())),
                }
            }
            match tokens[i] {
                Token::Open => {
                    let Some(Token::Atom(name)) = tokens.get(i + 1) else {
                        return Err(Error::InvalidProgram("expected primitive after '('".into()));
                    };
                    let p: Primitive = name.parse()?;
                    if let Some(left) = frames.last_mut() {
                        *left -= 1;
                    }
                    nodes.push(Node::Op(p));
                    frames.push(p.arity());
                    i += 2;
                }
                Token::Close => {
                    return Err(Error::InvalidProgram("unexpected ')' (too few arguments?)".into()))
                }
                Token::Atom(a) => {
                    nodes.push(parse_terminal(a)?);
                    match frames.last_mut() {
                        Some(left) => *left -= 1,
                        None => complete = true,
                    }
                    i += 1;
                }
            }
        }
        if !frames.is_empty() || nodes.is_empty() {
            return Err(Error::InvalidProgram("unterminated expression".into()));
        }
        Program::new(nodes)
    }
}
