use std::fmt;
use std::sync::Arc;

use crate::nvalue::NValue;
use crate::value::{DeviceId, FunName, Literal};

/// Which evaluation step produced a tree node. Used only to check alignment
/// in debug builds; never serialised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Site(pub u32);

impl Site {
    pub const UNKNOWN: Site = Site(u32::MAX);
    /// The synthetic application of an exchange handler.
    pub const HANDLER: Site = Site(u32::MAX - 1);

    pub(crate) fn builtin(b: crate::stdlib::Builtin) -> Site {
        Site(u32::MAX - 2 - b as u32)
    }
}

/// `⟨θ̄⟩` when `payload` is absent, `w⟨θ̄⟩` otherwise. Cheap to clone.
#[derive(Clone)]
pub struct ValueTree(Arc<Node>);

struct Node {
    payload: Option<NValue>,
    children: Vec<ValueTree>,
    site: Site,
}

impl ValueTree {
    pub fn branch(children: Vec<ValueTree>) -> Self {
        ValueTree::with_site(Site::UNKNOWN, None, children)
    }

    pub fn payload(w: NValue, children: Vec<ValueTree>) -> Self {
        ValueTree::with_site(Site::UNKNOWN, Some(w), children)
    }

    pub(crate) fn with_site(site: Site, payload: Option<NValue>, children: Vec<ValueTree>) -> Self {
        ValueTree(Arc::new(Node { payload, children, site }))
    }

    pub(crate) fn leaf(site: Site) -> Self {
        ValueTree::with_site(site, None, Vec::new())
    }

    pub fn root(&self) -> Option<&NValue> {
        self.0.payload.as_ref()
    }

    pub fn children(&self) -> &[ValueTree] {
        &self.0.children
    }

    pub fn site(&self) -> Site {
        self.0.site
    }

    /// `π_i`, 1-based.
    pub fn child(&self, i: usize) -> Option<&ValueTree> {
        i.checked_sub(1).and_then(|i| self.0.children.get(i))
    }

    pub fn node_count(&self) -> usize {
        1 + self.0.children.iter().map(ValueTree::node_count).sum::<usize>()
    }

    /// Structural equality with bit-level comparison of numbers.
    pub fn same(&self, other: &ValueTree) -> bool {
        let payloads = match (self.root(), other.root()) {
            (None, None) => true,
            (Some(a), Some(b)) => a.same(b),
            _ => false,
        };
        payloads
            && self.children().len() == other.children().len()
            && self.children().iter().zip(other.children()).all(|(a, b)| a.same(b))
    }

    /// Pre-order binary encoding: a tag byte (0 branch, 1 payload), for
    /// payload nodes the canonical nvalue text prefixed by its length as a
    /// little-endian u32, then the child count as a little-endian u32.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode_into(&mut out);
        out
    }

    fn encode_into(&self, out: &mut Vec<u8>) {
        match self.root() {
            None => out.push(0),
            Some(w) => {
                out.push(1);
                let text = w.to_string();
                out.extend_from_slice(&(text.len() as u32).to_le_bytes());
                out.extend_from_slice(text.as_bytes());
            }
        }
        out.extend_from_slice(&(self.children().len() as u32).to_le_bytes());
        for c in self.children() {
            c.encode_into(out);
        }
    }

    /// Inverse of [`ValueTree::encode`]. Function values named `τN` are
    /// rebuilt through `closures`.
    pub fn decode(bytes: &[u8], closures: &dyn Fn(&str) -> Option<Literal>) -> Result<ValueTree, DecodeError> {
        let mut pos = 0;
        let t = decode_at(bytes, &mut pos, closures, 0)?;
        if pos != bytes.len() {
            return Err(DecodeError(format!("{} trailing bytes", bytes.len() - pos)));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed value-tree: {0}")]
pub struct DecodeError(String);

fn read_u32(bytes: &[u8], pos: &mut usize) -> Result<u32, DecodeError> {
    let end = *pos + 4;
    let b = bytes.get(*pos..end).ok_or_else(|| DecodeError("truncated".into()))?;
    *pos = end;
    Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

fn decode_at(
    bytes: &[u8],
    pos: &mut usize,
    closures: &dyn Fn(&str) -> Option<Literal>,
    depth: usize,
) -> Result<ValueTree, DecodeError> {
    if depth > 100_000 {
        return Err(DecodeError("nesting too deep".into()));
    }
    let tag = *bytes.get(*pos).ok_or_else(|| DecodeError("truncated".into()))?;
    *pos += 1;
    let payload = match tag {
        0 => None,
        1 => {
            let len = read_u32(bytes, pos)? as usize;
            let raw = bytes.get(*pos..*pos + len).ok_or_else(|| DecodeError("truncated payload".into()))?;
            *pos += len;
            let text = std::str::from_utf8(raw).map_err(|e| DecodeError(e.to_string()))?;
            Some(NValue::parse_with(text, closures).map_err(|e| DecodeError(e.to_string()))?)
        }
        t => return Err(DecodeError(format!("unknown tag {t}"))),
    };
    let n = read_u32(bytes, pos)? as usize;
    if n > bytes.len() - *pos {
        return Err(DecodeError("child count exceeds input".into()));
    }
    let mut children = Vec::with_capacity(n);
    for _ in 0..n {
        children.push(decode_at(bytes, pos, closures, depth + 1)?);
    }
    Ok(ValueTree::with_site(Site::UNKNOWN, payload, children))
}

impl PartialEq for ValueTree {
    fn eq(&self, other: &Self) -> bool {
        self.root() == other.root() && self.children() == other.children()
    }
}

impl fmt::Display for ValueTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(w) = self.root() {
            write!(f, "{w}")?;
        }
        f.write_str("<")?;
        for (i, c) in self.children().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(">")
    }
}

impl fmt::Debug for ValueTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Value-trees of aligned devices, kept in ascending device order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VTEnv(Vec<(DeviceId, ValueTree)>);

impl VTEnv {
    pub fn new() -> Self {
        VTEnv(Vec::new())
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (DeviceId, ValueTree)>) -> Self {
        let mut v: Vec<(DeviceId, ValueTree)> = entries.into_iter().collect();
        v.sort_by_key(|(d, _)| *d);
        v.dedup_by_key(|(d, _)| *d);
        VTEnv(v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn keys(&self) -> impl Iterator<Item = DeviceId> + '_ {
        self.0.iter().map(|(d, _)| *d)
    }

    pub fn entries(&self) -> &[(DeviceId, ValueTree)] {
        &self.0
    }

    pub fn get(&self, d: DeviceId) -> Option<&ValueTree> {
        self.0.binary_search_by_key(&d, |(k, _)| *k).ok().map(|i| &self.0[i].1)
    }

    /// `π_i` applied to every entry; entries without an `i`-th child are
    /// dropped.
    pub fn project(&self, i: usize) -> VTEnv {
        VTEnv(self.0.iter().filter_map(|(d, t)| t.child(i).map(|c| (*d, c.clone()))).collect())
    }

    /// Keeps the entries whose root applied a function with the given name,
    /// as seen from each entry's own device.
    pub fn filter_name(&self, name: FunName) -> VTEnv {
        VTEnv(
            self.0
                .iter()
                .filter(|(d, t)| t.root().and_then(|w| w.lookup(*d).fun_name()) == Some(name))
                .cloned()
                .collect(),
        )
    }
}
