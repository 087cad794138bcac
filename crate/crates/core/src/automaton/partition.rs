use std::collections::BTreeMap;

use super::ModeId;

/// Union-find over mode ids `0..len`. The representative of every class is
/// its smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    parent: Vec<usize>,
}

impl Partition {
    /// The identity partition over `0..len`.
    pub fn new(len: usize) -> Self {
        Partition {
            parent: (0..len).collect(),
        }
    }

    /// The identity partition covering every id up to the largest in `ids`.
    pub fn covering(ids: impl IntoIterator<Item = ModeId>) -> Self {
        let len = ids.into_iter().map(|m| m.0 + 1).max().unwrap_or(0);
        Partition::new(len)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&self, m: ModeId) -> ModeId {
        let mut x = m.0;
        while self.parent[x] != x {
            x = self.parent[x];
        }
        ModeId(x)
    }

    fn find_compress(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut x = x;
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// Joins the classes of `a` and `b`. Returns whether they were distinct.
    pub fn union(&mut self, a: ModeId, b: ModeId) -> bool {
        let ra = self.find_compress(a.0);
        let rb = self.find_compress(b.0);
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub fn same(&self, a: ModeId, b: ModeId) -> bool {
        self.find(a) == self.find(b)
    }

    /// Points every element directly at its representative.
    pub fn flatten(&mut self) {
        for x in 0..self.parent.len() {
            self.find_compress(x);
        }
    }

    /// Members of every class restricted to `ids`, keyed by representative.
    pub fn classes_of(&self, ids: impl IntoIterator<Item = ModeId>) -> BTreeMap<ModeId, Vec<ModeId>> {
        let mut out: BTreeMap<ModeId, Vec<ModeId>> = BTreeMap::new();
        for m in ids {
            out.entry(self.find(m)).or_default().push(m);
        }
        out
    }
}
