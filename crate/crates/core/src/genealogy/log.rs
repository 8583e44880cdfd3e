use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::ops::Range;

use super::{GenealogyError, Label};
use crate::scalar::Real;

const NONE: u32 = u32::MAX;

/// Index of an individual in an [`EventLog`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    parent: u32,
    /// 1-based position among its siblings; 0 for the root.
    child_index: u32,
    born_by: u32,
    replaced_by: u32,
}

/// One reproduction event: `parent` is replaced by `offspring_count`
/// children at `time` (zero children is a death).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event<T> {
    pub time: T,
    pub parent: NodeId,
    pub offspring_count: u32,
    first_child: u32,
}

impl<T: Copy> Event<T> {
    /// Node ids of the children created by this event.
    pub fn children(&self) -> impl Iterator<Item = NodeId> + use<T> {
        (self.first_child..self.first_child + self.offspring_count).map(NodeId)
    }
}

/// Birth time and (if it happened before the end of the log) replacement
/// time of an individual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lifespan<T> {
    pub birth: T,
    pub replaced: Option<T>,
}

/// The population at one instant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PopulationSnapshot {
    pub alive: BTreeSet<Label>,
    pub size: usize,
}

/// Append-only history of a population started from the single root
/// individual at time 0.
///
/// Individuals are stored in an arena: children always get larger ids
/// than their parent, and siblings are contiguous.
#[derive(Clone, Debug)]
pub struct EventLog<T> {
    nodes: Vec<Node>,
    events: Vec<Event<T>>,
}

impl<T: Real> Default for EventLog<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> EventLog<T> {
    pub fn new() -> Self {
        Self {
            nodes: vec![Node { parent: NONE, child_index: 0, born_by: NONE, replaced_by: NONE }],
            events: Vec::new(),
        }
    }

    pub fn with_capacity(events: usize) -> Self {
        let mut log = Self::new();
        log.events.reserve(events);
        log.nodes.reserve(2 * events);
        log
    }

    pub fn root(&self) -> NodeId {
        NodeId::ROOT
    }

    pub fn events(&self) -> &[Event<T>] {
        &self.events
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Time of the last event, or zero for an empty log.
    pub fn last_time(&self) -> T {
        self.events.last().map_or_else(T::zero, |e| e.time)
    }

    /// Number of individuals alive after the last event.
    pub fn final_size(&self) -> usize {
        let born: usize = self.events.iter().map(|e| e.offspring_count as usize).sum();
        1 + born - self.events.len()
    }

    /// Appends an event. `parent` must currently be alive and `time` must not
    /// precede the previous event.
    pub fn record(&mut self, time: T, parent: NodeId, offspring_count: u32) -> Result<Range<NodeId>, GenealogyError> {
        if !time.is_finite() || time < T::zero() {
            return Err(GenealogyError::InvalidTime(time.as_f64()));
        }
        if time < self.last_time() {
            return Err(GenealogyError::TimeOrder { time: time.as_f64(), previous: self.last_time().as_f64() });
        }
        let Some(node) = self.nodes.get(parent.index()) else {
            return Err(GenealogyError::UnknownNode(parent.0));
        };
        if node.replaced_by != NONE {
            return Err(GenealogyError::NotAlive(self.label(parent).to_string()));
        }
        Ok(self.record_unchecked(time, parent, offspring_count))
    }

    /// Hot-path variant used by the simulators, which maintain liveness
    /// and time order themselves.
    pub(crate) fn record_unchecked(&mut self, time: T, parent: NodeId, offspring_count: u32) -> Range<NodeId> {
        let event = self.events.len() as u32;
        let first_child = self.nodes.len() as u32;
        self.nodes[parent.index()].replaced_by = event;
        for k in 1..=offspring_count {
            self.nodes.push(Node { parent: parent.0, child_index: k, born_by: event, replaced_by: NONE });
        }
        self.events.push(Event { time, parent, offspring_count, first_child });
        NodeId(first_child)..NodeId(first_child + offspring_count)
    }

    pub fn record_label(&mut self, time: T, parent: &Label, offspring_count: u32) -> Result<Range<NodeId>, GenealogyError> {
        let node = self
            .node(parent)
            .ok_or_else(|| GenealogyError::NotAlive(parent.to_string()))?;
        self.record(time, node, offspring_count)
    }

    /// Finds the node carrying `label`, if that individual ever lived.
    pub fn node(&self, label: &Label) -> Option<NodeId> {
        let mut id = NodeId::ROOT;
        for &k in label.path() {
            let node = &self.nodes[id.index()];
            if node.replaced_by == NONE {
                return None;
            }
            let event = &self.events[node.replaced_by as usize];
            if k > event.offspring_count {
                return None;
            }
            id = NodeId(event.first_child + k - 1);
        }
        Some(id)
    }

    pub fn label(&self, id: NodeId) -> Label {
        let mut path = Vec::new();
        let mut cur = id.0;
        while cur != 0 {
            let node = &self.nodes[cur as usize];
            path.push(node.child_index);
            cur = node.parent;
        }
        path.reverse();
        Label::new(path)
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        let p = self.nodes[id.index()].parent;
        (p != NONE).then_some(NodeId(p))
    }

    pub fn child_index(&self, id: NodeId) -> u32 {
        self.nodes[id.index()].child_index
    }

    pub fn birth(&self, id: NodeId) -> T {
        match self.nodes[id.index()].born_by {
            NONE => T::zero(),
            e => self.events[e as usize].time,
        }
    }

    pub fn replaced(&self, id: NodeId) -> Option<T> {
        match self.nodes[id.index()].replaced_by {
            NONE => None,
            e => Some(self.events[e as usize].time),
        }
    }

    pub fn is_alive_at(&self, id: NodeId, t: T) -> bool {
        self.birth(id) <= t && self.replaced(id).is_none_or(|r| r > t)
    }

    /// Children created when `id` was replaced (empty if still alive or died).
    pub fn children(&self, id: NodeId) -> Range<NodeId> {
        match self.nodes[id.index()].replaced_by {
            NONE => NodeId(0)..NodeId(0),
            e => {
                let ev = &self.events[e as usize];
                NodeId(ev.first_child)..NodeId(ev.first_child + ev.offspring_count)
            }
        }
    }

    pub fn child_ids(&self, id: NodeId) -> impl Iterator<Item = NodeId> {
        let r = self.children(id);
        (r.start.0..r.end.0).map(NodeId)
    }

    /// Walks up from `descendant` to test `ancestor ⪯ descendant`.
    pub fn is_ancestor_node(&self, ancestor: NodeId, descendant: NodeId) -> bool {
        let mut cur = descendant.0;
        while cur != NONE && cur >= ancestor.0 {
            if cur == ancestor.0 {
                return true;
            }
            cur = self.nodes[cur as usize].parent;
        }
        false
    }

    /// Ids of everyone alive at `t` (events at times `<= t` applied), in id order.
    pub fn alive_nodes_at(&self, t: T) -> Vec<NodeId> {
        (0..self.nodes.len() as u32)
            .map(NodeId)
            .filter(|&id| self.is_alive_at(id, t))
            .collect()
    }

    /// Ids of everyone alive after the last event.
    pub fn alive_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes.len() as u32)
            .filter(|&i| self.nodes[i as usize].replaced_by == NONE)
            .map(NodeId)
            .collect()
    }

    /// Number of events with time `<= t`.
    pub fn events_until(&self, t: T) -> usize {
        self.events.partition_point(|e| e.time <= t)
    }

    pub fn size_at(&self, t: T) -> usize {
        let applied = &self.events[..self.events_until(t)];
        let born: usize = applied.iter().map(|e| e.offspring_count as usize).sum();
        1 + born - applied.len()
    }

    /// The population at `t`, applying every event with time `<= t`.
    pub fn replay(&self, t: T) -> PopulationSnapshot {
        let alive: BTreeSet<Label> = self.alive_nodes_at(t).into_iter().map(|id| self.label(id)).collect();
        let size = alive.len();
        PopulationSnapshot { alive, size }
    }

    pub fn lifespan(&self, label: &Label) -> Option<Lifespan<T>> {
        let id = self.node(label)?;
        Some(Lifespan { birth: self.birth(id), replaced: self.replaced(id) })
    }

    /// `time,parent,offspring_count` rows; times use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "time,parent,offspring_count")?;
        for e in &self.events {
            writeln!(out, "{},{},{}", e.time, self.label(e.parent), e.offspring_count)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, GenealogyError> {
        let mut log = Self::new();
        let mut lines = input.lines().enumerate();
        match lines.next() {
            Some((_, Ok(h))) if h.trim() == "time,parent,offspring_count" => {}
            Some((_, Err(e))) => return Err(e.into()),
            _ => return Err(GenealogyError::Csv { line: 1, message: "missing header `time,parent,offspring_count`".into() }),
        }
        for (k, line) in lines {
            let line = line?;
            let line_no = k + 1;
            if line.trim().is_empty() {
                continue;
            }
            let csv_err = |message: String| GenealogyError::Csv { line: line_no, message };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(csv_err(format!("expected 3 fields, found {}", fields.len())));
            }
            let time: f64 = fields[0].trim().parse().map_err(|_| csv_err(format!("bad time `{}`", fields[0])))?;
            let parent: Label = fields[1].parse().map_err(|e: GenealogyError| csv_err(e.to_string()))?;
            let count: u32 = fields[2]
                .trim()
                .parse()
                .map_err(|_| csv_err(format!("bad offspring count `{}`", fields[2])))?;
            log.record_label(T::of(time), &parent, count).map_err(|e| csv_err(e.to_string()))?;
        }
        Ok(log)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(p: &[u32]) -> Label {
        Label::from(p)
    }

    fn split_at(t: f64, j: u32) -> EventLog<f64> {
        let mut log = EventLog::new();
        log.record_label(t, &Label::root(), j).unwrap();
        log
    }

    #[test]
    fn replay_examples() {
        let log = split_at(0.7, 2);
        let s = log.replay(0.5);
        assert_eq!(s.size, 1);
        assert!(s.alive.contains(&Label::root()));
        let s = log.replay(1.0);
        assert_eq!(s.alive.into_iter().collect::<Vec<_>>(), vec![l(&[1]), l(&[2])]);
        // right-continuous
        assert_eq!(log.replay(0.7).size, 2);
        let dead = split_at(0.7, 0);
        assert_eq!(dead.replay(1.0).size, 0);
        assert_eq!(dead.size_at(1.0), 0);
    }

    #[test]
    fn lifespan_examples() {
        let log = split_at(0.7, 2);
        assert_eq!(log.lifespan(&Label::root()), Some(Lifespan { birth: 0.0, replaced: Some(0.7) }));
        assert_eq!(log.lifespan(&l(&[1])), Some(Lifespan { birth: 0.7, replaced: None }));
        assert_eq!(log.lifespan(&l(&[3])), None);
        assert_eq!(log.lifespan(&l(&[1, 1])), None);
    }

    #[test]
    fn rejects_invalid_events() {
        let mut log = split_at(0.7, 2);
        assert!(matches!(log.record_label(0.8, &Label::root(), 1), Err(GenealogyError::NotAlive(_))));
        assert!(matches!(log.record_label(0.6, &l(&[1]), 1), Err(GenealogyError::TimeOrder { .. })));
        assert!(matches!(log.record_label(f64::NAN, &l(&[1]), 1), Err(GenealogyError::InvalidTime(_))));
        assert!(log.record_label(0.7, &l(&[1]), 3).is_ok());
        assert_eq!(log.final_size(), 4);
    }

    #[test]
    fn csv_round_trip() {
        let mut log = split_at(0.3, 2);
        log.record_label(0.9, &l(&[1]), 2).unwrap();
        log.record_label(1.25, &l(&[2]), 0).unwrap();
        let text = log.to_csv_string();
        assert_eq!(text, "time,parent,offspring_count\n0.3,,2\n0.9,1,2\n1.25,2,0\n");
        let back = EventLog::<f64>::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.to_csv_string(), text);
        assert!(EventLog::<f64>::read_csv("t,p\n".as_bytes()).is_err());
        assert!(matches!(
            EventLog::<f64>::read_csv("time,parent,offspring_count\n0.5,3,1\n".as_bytes()),
            Err(GenealogyError::Csv { line: 2, .. })
        ));
    }

    #[test]
    fn node_navigation() {
        let mut log = split_at(0.3, 3);
        log.record_label(0.5, &l(&[2]), 2).unwrap();
        let id = log.node(&l(&[2, 2])).unwrap();
        assert_eq!(log.label(id), l(&[2, 2]));
        assert!(log.is_ancestor_node(log.node(&l(&[2])).unwrap(), id));
        assert!(!log.is_ancestor_node(log.node(&l(&[3])).unwrap(), id));
        assert!(log.is_ancestor_node(NodeId::ROOT, id));
        assert_eq!(log.child_ids(log.node(&l(&[2])).unwrap()).count(), 2);
    }
}
