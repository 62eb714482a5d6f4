//! Descriptor thesaurus with tree-number positions, plus the boolean query
//! language evaluated against record descriptors.
//!
//! A descriptor may sit at several tree positions. Exploding a descriptor
//! collects every descriptor positioned strictly below any of its positions,
//! where "below" means prefixed at a dot boundary (`C01.22` is not an
//! ancestor of `C01.221.500`).

mod eval;
mod query;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

pub use eval::{eval_query, run_query, CompiledQuery, TraceLine};
pub use query::{parse_query, Date, DateRange, QueryExpr, TermClause};

use crate::error::{Error, Result};

/// Default maximum hierarchy depth accepted on load.
pub const MAX_TREE_DEPTH: usize = 13;

/// A validated dot-separated tree position such as `C01.221.500`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeNumber(String);

impl TreeNumber {
    pub fn parse(s: &str) -> Option<TreeNumber> {
        let mut segments = s.split('.');
        let head = segments.next()?;
        let mut chars = head.chars();
        let letter = chars.next()?;
        if !letter.is_ascii_uppercase() {
            return None;
        }
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        for seg in segments {
            if seg.is_empty() || !seg.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
        }
        Some(TreeNumber(s.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Number of levels; `C01` has depth 1.
    pub fn depth(&self) -> usize {
        self.0.split('.').count()
    }

    pub fn parent(&self) -> Option<TreeNumber> {
        self.0.rfind('.').map(|i| TreeNumber(self.0[..i].to_owned()))
    }

    /// True when `self` is a strict ancestor of `other` at a dot boundary.
    pub fn is_ancestor_of(&self, other: &TreeNumber) -> bool {
        other.0.len() > self.0.len() && other.0.starts_with(&self.0) && other.0.as_bytes()[self.0.len()] == b'.'
    }
}

impl fmt::Display for TreeNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshDescriptor {
    pub name: String,
    pub tree_numbers: BTreeSet<TreeNumber>,
}

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// `None` disables the depth check.
    pub max_depth: Option<usize>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            max_depth: Some(MAX_TREE_DEPTH),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MeshThesaurus {
    descriptors: BTreeMap<String, MeshDescriptor>,
    index: BTreeMap<TreeNumber, String>,
}

impl MeshThesaurus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a thesaurus from (name, tree number) pairs, as `load` would.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<MeshThesaurus>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut t = MeshThesaurus::new();
        for (i, (name, tn)) in pairs.into_iter().enumerate() {
            let tree = TreeNumber::parse(tn).ok_or_else(|| Error::Thesaurus {
                line: i + 1,
                message: format!("malformed tree number \"{tn}\""),
            })?;
            t.insert(name, tree)
                .map_err(|message| Error::Thesaurus { line: i + 1, message })?;
        }
        Ok(t)
    }

    /// Returns `Ok(false)` when the pair was already present.
    fn insert(&mut self, name: &str, tree: TreeNumber) -> std::result::Result<bool, String> {
        if let Some(owner) = self.index.get(&tree) {
            if owner == name {
                return Ok(false);
            }
            return Err(format!(
                "tree number {tree} assigned to both \"{owner}\" and \"{name}\""
            ));
        }
        self.index.insert(tree.clone(), name.to_owned());
        self.descriptors
            .entry(name.to_owned())
            .or_insert_with(|| MeshDescriptor {
                name: name.to_owned(),
                tree_numbers: BTreeSet::new(),
            })
            .tree_numbers
            .insert(tree);
        Ok(true)
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&MeshDescriptor> {
        self.descriptors.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.descriptors.contains_key(name)
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &MeshDescriptor> {
        self.descriptors.values()
    }

    pub fn tree_numbers(&self) -> impl Iterator<Item = (&TreeNumber, &str)> {
        self.index.iter().map(|(t, n)| (t, n.as_str()))
    }

    pub fn name_at(&self, tree: &TreeNumber) -> Option<&str> {
        self.index.get(tree).map(String::as_str)
    }

    /// Immediate parent position, when it is present in the thesaurus.
    pub fn parent_of(&self, tree: &TreeNumber) -> Option<&TreeNumber> {
        let parent = tree.parent()?;
        self.index.get_key_value(&parent).map(|(k, _)| k)
    }

    /// All positions strictly below `tree`.
    pub fn descendants_of<'a>(&'a self, tree: &TreeNumber) -> impl Iterator<Item = (&'a TreeNumber, &'a str)> + 'a {
        // '/' is the byte after '.', so this range covers exactly the "<tree>." prefix.
        let lo = TreeNumber(format!("{}.", tree.0));
        let hi = TreeNumber(format!("{}/", tree.0));
        self.index.range(lo..hi).map(|(t, n)| (t, n.as_str()))
    }

    /// The descriptor itself plus every descriptor below any of its positions.
    pub fn explode(&self, name: &str) -> Result<BTreeSet<String>> {
        let desc = self
            .descriptors
            .get(name)
            .ok_or_else(|| Error::UnknownDescriptor(name.to_owned()))?;
        let mut out = BTreeSet::new();
        out.insert(desc.name.clone());
        for tree in &desc.tree_numbers {
            for (_, n) in self.descendants_of(tree) {
                out.insert(n.to_owned());
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct LoadedThesaurus {
    pub thesaurus: MeshThesaurus,
    pub warnings: Vec<String>,
}

/// Reads a two-column tab-separated (name, tree number) file.
/// Blank lines and lines starting with `#` are ignored.
pub fn load_thesaurus<R: BufRead>(reader: R, options: LoadOptions) -> Result<LoadedThesaurus> {
    let mut thesaurus = MeshThesaurus::new();
    let mut warnings = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fail = |message: String| Error::Thesaurus { line: lineno, message };
        let (name, tn) = trimmed
            .split_once('\t')
            .ok_or_else(|| fail("expected <name>\\t<tree number>".into()))?;
        let name = name.trim();
        let tn = tn.trim();
        if name.is_empty() {
            return Err(fail("empty descriptor name".into()));
        }
        let tree = TreeNumber::parse(tn).ok_or_else(|| fail(format!("malformed tree number \"{tn}\"")))?;
        if let Some(max) = options.max_depth {
            if tree.depth() > max {
                return Err(fail(format!("tree number {tree} deeper than {max} levels")));
            }
        }
        match thesaurus.insert(name, tree) {
            Ok(true) => {}
            Ok(false) => warnings.push(format!("line {lineno}: duplicate pair ({name}, {tn}) ignored")),
            Err(message) => return Err(fail(message)),
        }
    }
    Ok(LoadedThesaurus { thesaurus, warnings })
}

pub fn load_thesaurus_file(path: &Path, options: LoadOptions) -> Result<LoadedThesaurus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    load_thesaurus(BufReader::new(file), options)
}
