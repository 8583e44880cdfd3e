use crate::genealogy::NodeId;

const ABSENT: u32 = u32::MAX;

/// Set of node ids with O(1) insert, remove and uniform sampling.
#[derive(Clone, Debug, Default)]
pub(crate) struct IndexedSet {
    items: Vec<NodeId>,
    slot: Vec<u32>,
}

impl IndexedSet {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.items.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    #[inline]
    pub fn contains(&self, id: NodeId) -> bool {
        self.slot.get(id.index()).is_some_and(|&s| s != ABSENT)
    }

    pub fn insert(&mut self, id: NodeId) {
        let i = id.index();
        if self.slot.len() <= i {
            self.slot.resize(i + 1, ABSENT);
        }
        debug_assert_eq!(self.slot[i], ABSENT, "node inserted twice");
        self.slot[i] = self.items.len() as u32;
        self.items.push(id);
    }

    pub fn remove(&mut self, id: NodeId) {
        let s = self.slot[id.index()];
        debug_assert_ne!(s, ABSENT, "removing absent node");
        let last = *self.items.last().expect("non-empty");
        self.items.swap_remove(s as usize);
        if last != id {
            self.slot[last.index()] = s;
        }
        self.slot[id.index()] = ABSENT;
    }

    #[inline]
    pub fn get(&self, k: usize) -> NodeId {
        self.items[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.items.iter().copied()
    }
}
