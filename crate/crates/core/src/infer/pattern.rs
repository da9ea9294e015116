//! Common-pattern mining over string columns.
//!
//! Strings are tokenized into maximal alphanumeric runs and single delimiter
//! characters. A pattern is a sequence of literal tokens that occurs, in
//! order, in the token sequences of at least `⌈N·p⌉` strings; gaps between
//! literals become wildcards. The mined pattern maximizes total literal
//! length, then support, then has fewer wildcards.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternToken {
    Literal(String),
    Wildcard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StringPattern {
    pub tokens: Vec<PatternToken>,
    /// Fraction of the mined strings matched by [`match_and_extract`].
    pub support: f64,
    pub wildcard_count: usize,
}

impl StringPattern {
    /// Builds a pattern from tokens, merging adjacent literals and collapsing
    /// runs of wildcards.
    pub fn from_tokens(tokens: Vec<PatternToken>) -> Self {
        let mut out: Vec<PatternToken> = Vec::with_capacity(tokens.len());
        for t in tokens {
            match (out.last_mut(), t) {
                (Some(PatternToken::Wildcard), PatternToken::Wildcard) => {}
                (Some(PatternToken::Literal(prev)), PatternToken::Literal(s)) => prev.push_str(&s),
                (_, t) => out.push(t),
            }
        }
        out.retain(|t| !matches!(t, PatternToken::Literal(s) if s.is_empty()));
        let wildcard_count = out.iter().filter(|t| **t == PatternToken::Wildcard).count();
        Self {
            tokens: out,
            support: 1.0,
            wildcard_count,
        }
    }

    pub fn literal_len(&self) -> usize {
        self.tokens
            .iter()
            .map(|t| match t {
                PatternToken::Literal(s) => s.chars().count(),
                PatternToken::Wildcard => 0,
            })
            .sum()
    }

    /// Parses the `*` rendering back into tokens.
    pub fn parse(rendered: &str) -> Self {
        let mut tokens = Vec::new();
        for (i, part) in rendered.split('*').enumerate() {
            if i > 0 {
                tokens.push(PatternToken::Wildcard);
            }
            tokens.push(PatternToken::Literal(part.to_string()));
        }
        Self::from_tokens(tokens)
    }
}

impl fmt::Display for StringPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.tokens {
            match t {
                PatternToken::Literal(s) => f.write_str(s)?,
                PatternToken::Wildcard => f.write_str("*")?,
            }
        }
        Ok(())
    }
}

/// Splits into maximal alphanumeric runs and single other characters.
pub fn tokenize(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in s.char_indices() {
        if c.is_alphanumeric() {
            start.get_or_insert(i);
        } else {
            if let Some(st) = start.take() {
                out.push(&s[st..i]);
            }
            out.push(&s[i..i + c.len_utf8()]);
        }
    }
    if let Some(st) = start {
        out.push(&s[st..]);
    }
    out
}

/// Default cap on search nodes; the best pattern found so far is returned
/// when it is hit.
pub const DEFAULT_NODE_BUDGET: usize = 200_000;

pub fn mine_string_pattern<S: AsRef<str>>(strings: &[S], p: f64) -> Option<StringPattern> {
    mine_string_pattern_with_budget(strings, p, DEFAULT_NODE_BUDGET)
}

pub fn mine_string_pattern_with_budget<S: AsRef<str>>(
    strings: &[S],
    p: f64,
    node_budget: usize,
) -> Option<StringPattern> {
    if strings.is_empty() {
        return None;
    }
    let n = strings.len();
    let required = ((n as f64 * p) - 1e-9).ceil().max(1.0) as usize;

    // Intern tokens.
    let mut vocab: Vec<String> = Vec::new();
    let mut index: std::collections::HashMap<String, u32> = std::collections::HashMap::new();
    let seqs: Vec<Vec<u32>> = strings
        .iter()
        .map(|s| {
            tokenize(s.as_ref())
                .into_iter()
                .map(|t| {
                    *index.entry(t.to_string()).or_insert_with(|| {
                        vocab.push(t.to_string());
                        (vocab.len() - 1) as u32
                    })
                })
                .collect()
        })
        .collect();
    let lens: Vec<usize> = vocab.iter().map(|t| t.chars().count()).collect();

    // Only tokens present in enough strings can appear in the pattern.
    let mut doc_freq = vec![0usize; vocab.len()];
    for seq in &seqs {
        let mut seen: Vec<u32> = seq.clone();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            doc_freq[t as usize] += 1;
        }
    }
    let mut frequent: Vec<u32> = (0..vocab.len() as u32)
        .filter(|&t| doc_freq[t as usize] >= required)
        .collect();
    if frequent.is_empty() {
        return None;
    }
    frequent.sort_by(|&a, &b| vocab[a as usize].cmp(&vocab[b as usize]));
    let is_frequent: Vec<bool> = (0..vocab.len())
        .map(|t| doc_freq[t] >= required)
        .collect();

    // suffix_len[s][i]: literal length of frequent tokens in seqs[s][i..].
    let suffix_len: Vec<Vec<usize>> = seqs
        .iter()
        .map(|seq| {
            let mut acc = vec![0usize; seq.len() + 1];
            for i in (0..seq.len()).rev() {
                let t = seq[i] as usize;
                acc[i] = acc[i + 1] + if is_frequent[t] { lens[t] } else { 0 };
            }
            acc
        })
        .collect();

    let mut search = Search {
        seqs: &seqs,
        lens: &lens,
        frequent: &frequent,
        suffix_len: &suffix_len,
        required,
        nodes: 0,
        budget: node_budget,
        best: None,
        path: Vec::new(),
    };
    let start: Vec<(usize, usize)> = (0..n).map(|s| (s, 0)).collect();
    search.extend(&start, 0);

    let (_, _, literals) = search.best?;
    let pattern = assemble(&literals, &seqs, &vocab, required);
    let matched = strings
        .iter()
        .filter(|s| match_and_extract(&pattern, s.as_ref()).is_some())
        .count();
    Some(StringPattern {
        support: matched as f64 / n as f64,
        ..pattern
    })
}

struct Search<'a> {
    seqs: &'a [Vec<u32>],
    lens: &'a [usize],
    frequent: &'a [u32],
    suffix_len: &'a [Vec<usize>],
    required: usize,
    nodes: usize,
    budget: usize,
    /// (literal length, support, literal token ids)
    best: Option<(usize, usize, Vec<u32>)>,
    path: Vec<u32>,
}

impl Search<'_> {
    /// `alive` holds (string index, next token position) for strings that
    /// still embed the current literal sequence.
    fn extend(&mut self, alive: &[(usize, usize)], len: usize) {
        self.nodes += 1;
        if len > 0 {
            let better = match &self.best {
                None => true,
                Some((bl, bs, _)) => (len, alive.len()) > (*bl, *bs),
            };
            if better {
                self.best = Some((len, alive.len(), self.path.clone()));
            }
        }
        if self.nodes >= self.budget {
            return;
        }
        // Upper bound: the `required`-th largest remaining literal length.
        let mut rem: Vec<usize> = alive
            .iter()
            .map(|&(s, pos)| self.suffix_len[s][pos])
            .collect();
        rem.sort_unstable_by(|a, b| b.cmp(a));
        let bound = len + rem[self.required - 1];
        if let Some((bl, bs, _)) = &self.best {
            if bound < *bl || (bound == *bl && alive.len() <= *bs) {
                return;
            }
        }
        for &t in self.frequent {
            let next: Vec<(usize, usize)> = alive
                .iter()
                .filter_map(|&(s, pos)| {
                    self.seqs[s][pos..]
                        .iter()
                        .position(|&x| x == t)
                        .map(|off| (s, pos + off + 1))
                })
                .collect();
            if next.len() < self.required {
                continue;
            }
            self.path.push(t);
            self.extend(&next, len + self.lens[t as usize]);
            self.path.pop();
            if self.nodes >= self.budget {
                return;
            }
        }
    }
}

/// Places wildcards in the gaps that some supporting string fills under its
/// leftmost embedding.
fn assemble(literals: &[u32], seqs: &[Vec<u32>], vocab: &[String], _required: usize) -> StringPattern {
    let k = literals.len();
    let mut gap_filled = vec![false; k + 1];
    for seq in seqs {
        let mut positions = Vec::with_capacity(k);
        let mut pos = 0;
        for &t in literals {
            match seq[pos..].iter().position(|&x| x == t) {
                Some(off) => {
                    positions.push(pos + off);
                    pos += off + 1;
                }
                None => break,
            }
        }
        if positions.len() < k {
            continue;
        }
        let mut prev_end = 0;
        for (g, &p) in positions.iter().enumerate() {
            if p > prev_end {
                gap_filled[g] = true;
            }
            prev_end = p + 1;
        }
        if seq.len() > prev_end {
            gap_filled[k] = true;
        }
    }
    let mut tokens = Vec::with_capacity(2 * k + 1);
    for (g, &t) in literals.iter().enumerate() {
        if gap_filled[g] {
            tokens.push(PatternToken::Wildcard);
        }
        tokens.push(PatternToken::Literal(vocab[t as usize].clone()));
    }
    if gap_filled[k] {
        tokens.push(PatternToken::Wildcard);
    }
    StringPattern::from_tokens(tokens)
}

/// Matches `s` against the pattern and returns one capture per wildcard.
///
/// Literals are anchored greedily at their leftmost occurrence; a leading
/// literal must be a prefix and a trailing literal a suffix of `s`.
pub fn match_and_extract(pattern: &StringPattern, s: &str) -> Option<Vec<String>> {
    let toks = &pattern.tokens;
    let mut captures = Vec::with_capacity(pattern.wildcard_count);
    let mut pos = 0usize;
    let mut open_wildcard = false;
    for (i, t) in toks.iter().enumerate() {
        match t {
            PatternToken::Wildcard => open_wildcard = true,
            PatternToken::Literal(lit) => {
                let last = i + 1 == toks.len();
                let start = if !open_wildcard {
                    if !s[pos..].starts_with(lit.as_str()) {
                        return None;
                    }
                    pos
                } else if last {
                    if s.len() < pos + lit.len() || !s.ends_with(lit.as_str()) {
                        return None;
                    }
                    s.len() - lit.len()
                } else {
                    pos + s[pos..].find(lit.as_str())?
                };
                if open_wildcard {
                    captures.push(s[pos..start].to_string());
                    open_wildcard = false;
                }
                pos = start + lit.len();
            }
        }
    }
    if open_wildcard {
        captures.push(s[pos..].to_string());
    } else if pos != s.len() {
        return None;
    }
    Some(captures)
}
