//! Path-based node identities shared by the engine and the diagram.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::term::ClauseId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    /// Position of a goal in a clause body, 0-based.
    Body(usize),
    /// An alternative clause under a calling goal.
    Alt(ClauseId),
}

/// Address of a diagram node: the path of segments from the root.
///
/// Addresses embed clause ids rather than visual positions, so they survive
/// relayout and patching. They are persistent lists sharing their prefixes:
/// extending an address or taking its parent is O(1), which keeps deep
/// recursion from costing memory quadratic in its depth.
#[derive(Clone, Default)]
pub struct NodeAddress(Option<Arc<Link>>);

struct Link {
    parent: NodeAddress,
    seg: Segment,
    len: usize,
}

impl NodeAddress {
    pub fn root() -> Self {
        NodeAddress(None)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_none()
    }

    pub fn body(&self, i: usize) -> Self {
        self.child(Segment::Body(i))
    }

    pub fn alt(&self, id: ClauseId) -> Self {
        self.child(Segment::Alt(id))
    }

    pub fn child(&self, seg: Segment) -> Self {
        NodeAddress(Some(Arc::new(Link { parent: self.clone(), seg, len: self.len() + 1 })))
    }

    pub fn parent(&self) -> Option<Self> {
        self.0.as_ref().map(|l| l.parent.clone())
    }

    pub fn last(&self) -> Option<Segment> {
        self.0.as_ref().map(|l| l.seg)
    }

    pub fn len(&self) -> usize {
        self.0.as_ref().map_or(0, |l| l.len)
    }

    pub fn is_empty(&self) -> bool {
        self.is_root()
    }

    /// The ancestor (or self) with `n` segments.
    pub fn truncate(&self, n: usize) -> NodeAddress {
        self.truncate_ref(n).clone()
    }

    fn truncate_ref(&self, n: usize) -> &NodeAddress {
        let mut cur = self;
        while cur.len() > n {
            cur = &cur.0.as_ref().unwrap().parent;
        }
        cur
    }

    pub fn starts_with(&self, prefix: &NodeAddress) -> bool {
        prefix.len() <= self.len() && self.truncate_ref(prefix.len()) == prefix
    }

    /// Segments from the root down.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out: Vec<Segment> = self.links().map(|l| l.seg).collect();
        out.reverse();
        out
    }

    /// The segments past the first `n`, deepest first.
    pub fn segments_after(&self, n: usize) -> impl Iterator<Item = Segment> + '_ {
        self.links().take(self.len().saturating_sub(n)).map(|l| l.seg)
    }

    /// Prefixes from the root (empty path) up to and including `self`.
    pub fn prefixes(&self) -> impl DoubleEndedIterator<Item = NodeAddress> {
        let mut out = vec![self.clone()];
        let mut cur = self.clone();
        while let Some(p) = cur.parent() {
            out.push(p.clone());
            cur = p;
        }
        out.reverse();
        out.into_iter()
    }

    fn links(&self) -> impl Iterator<Item = &Link> {
        std::iter::successors(self.0.as_deref(), |l| l.parent.0.as_deref())
    }

    fn same(&self, other: &NodeAddress) -> bool {
        match (&self.0, &other.0) {
            (None, None) => true,
            (Some(a), Some(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl From<Vec<Segment>> for NodeAddress {
    fn from(segments: Vec<Segment>) -> Self {
        segments.into_iter().fold(NodeAddress::root(), |a, s| a.child(s))
    }
}

impl FromIterator<Segment> for NodeAddress {
    fn from_iter<I: IntoIterator<Item = Segment>>(iter: I) -> Self {
        iter.into_iter().fold(NodeAddress::root(), |a, s| a.child(s))
    }
}

impl Drop for NodeAddress {
    // Unlink iteratively so dropping a very long path cannot overflow the stack.
    fn drop(&mut self) {
        let mut cur = self.0.take();
        while let Some(link) = cur {
            match Arc::try_unwrap(link) {
                Ok(mut link) => cur = link.parent.0.take(),
                Err(_) => break,
            }
        }
    }
}

impl PartialEq for NodeAddress {
    fn eq(&self, other: &Self) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let (mut a, mut b) = (self, other);
        while !a.same(b) {
            let (la, lb) = (a.0.as_ref().unwrap(), b.0.as_ref().unwrap());
            if la.seg != lb.seg {
                return false;
            }
            a = &la.parent;
            b = &lb.parent;
        }
        true
    }
}

impl Eq for NodeAddress {}

impl Hash for NodeAddress {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_usize(self.len());
        for link in self.links() {
            link.seg.hash(state);
        }
    }
}

impl Ord for NodeAddress {
    /// Lexicographic by segments from the root, so a parent sorts before its descendants.
    fn cmp(&self, other: &Self) -> Ordering {
        if self.same(other) {
            return Ordering::Equal;
        }
        // Compare the common-length prefixes; the first differing segment
        // from the root is the last one seen walking up.
        let n = self.len().min(other.len());
        let (mut a, mut b) = (self.truncate_ref(n), other.truncate_ref(n));
        let mut first_difference = Ordering::Equal;
        while !a.same(b) {
            let (la, lb) = (a.0.as_deref().unwrap(), b.0.as_deref().unwrap());
            if la.seg != lb.seg {
                first_difference = la.seg.cmp(&lb.seg);
            }
            a = &la.parent;
            b = &lb.parent;
        }
        first_difference.then(self.len().cmp(&other.len()))
    }
}

impl PartialOrd for NodeAddress {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for NodeAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeAddress({self})")
    }
}

impl fmt::Display for NodeAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            return f.write_str("/");
        }
        for seg in self.segments() {
            match seg {
                Segment::Body(i) => write!(f, "/b{i}")?,
                Segment::Alt(c) => write!(f, "/c{c}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for NodeAddress {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.segments().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NodeAddress {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Vec::<Segment>::deserialize(deserializer).map(NodeAddress::from)
    }
}
