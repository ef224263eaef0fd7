//! Priority structures for minimal freezing. Priorities are weight values
//! under the domain order and only ever move downward, which is what makes
//! decrease-key sufficient.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::domain::{OrderDirection, WeightValue};
use crate::StateId;

/// Queue contract used by the heap-accelerated solver: insert, decrease,
/// peek, and extraction of the whole tie group at the minimum.
pub trait MinQueue {
    fn insert(&mut self, state: StateId, priority: WeightValue);
    /// New priority must satisfy `new ⊑ old`.
    fn decrease(&mut self, state: StateId, priority: WeightValue);
    fn peek_min(&mut self) -> Option<WeightValue>;
    /// Removes and returns every entry tied at the minimum, sorted by state.
    fn pop_all_minimal(&mut self) -> Vec<StateId>;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueueKind {
    Fibonacci,
    Binary,
}

pub fn new_queue(kind: QueueKind, states: usize, dir: OrderDirection) -> Box<dyn MinQueue> {
    match kind {
        QueueKind::Fibonacci => Box::new(FibonacciHeap::new(states, dir)),
        QueueKind::Binary => Box::new(LazyBinaryHeap::new(states, dir)),
    }
}

fn order_cmp(dir: OrderDirection, a: &WeightValue, b: &WeightValue) -> Ordering {
    match dir {
        OrderDirection::Ascending => a.numeric_cmp(b),
        OrderDirection::Descending => a.numeric_cmp(b).reverse(),
    }
}

// --- Fibonacci heap ---

#[derive(Debug, Clone)]
struct FibNode {
    priority: WeightValue,
    parent: Option<usize>,
    child: Option<usize>,
    left: usize,
    right: usize,
    degree: usize,
    marked: bool,
}

/// Arena-backed Fibonacci heap keyed by dense state ids. Amortized O(1)
/// insert and decrease-key, O(log n) extraction.
#[derive(Debug)]
pub struct FibonacciHeap {
    dir: OrderDirection,
    nodes: Vec<Option<FibNode>>,
    min: Option<usize>,
    len: usize,
}

impl FibonacciHeap {
    pub fn new(states: usize, dir: OrderDirection) -> Self {
        FibonacciHeap {
            dir,
            nodes: vec![None; states],
            min: None,
            len: 0,
        }
    }

    fn node(&self, i: usize) -> &FibNode {
        self.nodes[i].as_ref().expect("live node")
    }

    fn node_mut(&mut self, i: usize) -> &mut FibNode {
        self.nodes[i].as_mut().expect("live node")
    }

    fn lt(&self, a: usize, b: usize) -> bool {
        let cmp = order_cmp(self.dir, &self.node(a).priority, &self.node(b).priority);
        // Tie-break on state id so extraction order is deterministic.
        cmp == Ordering::Less || (cmp == Ordering::Equal && a < b)
    }

    /// Splices `i` into the root list next to the current minimum.
    fn add_root(&mut self, i: usize) {
        self.node_mut(i).parent = None;
        self.node_mut(i).marked = false;
        match self.min {
            None => {
                let n = self.node_mut(i);
                n.left = i;
                n.right = i;
                self.min = Some(i);
            }
            Some(m) => {
                let right = self.node(m).right;
                self.node_mut(i).left = m;
                self.node_mut(i).right = right;
                self.node_mut(m).right = i;
                self.node_mut(right).left = i;
                if self.lt(i, m) {
                    self.min = Some(i);
                }
            }
        }
    }

    /// Unlinks `i` from its sibling ring; returns a remaining sibling if any.
    fn unlink(&mut self, i: usize) -> Option<usize> {
        let (l, r) = {
            let n = self.node(i);
            (n.left, n.right)
        };
        if l == i {
            return None;
        }
        self.node_mut(l).right = r;
        self.node_mut(r).left = l;
        Some(l)
    }

    fn cut(&mut self, i: usize, parent: usize) {
        let remaining = self.unlink(i);
        let p = self.node_mut(parent);
        p.degree -= 1;
        if p.child == Some(i) {
            p.child = remaining;
        }
        self.add_root(i);
    }

    fn cascading_cut(&mut self, mut i: usize) {
        while let Some(p) = self.node(i).parent {
            if !self.node(i).marked {
                self.node_mut(i).marked = true;
                return;
            }
            let parent = p;
            self.cut(i, parent);
            i = parent;
        }
    }

    /// Makes `child` a child of `root`; both must be roots.
    fn link(&mut self, root: usize, child: usize) {
        self.unlink(child);
        let old_child = self.node(root).child;
        match old_child {
            None => {
                let c = self.node_mut(child);
                c.left = child;
                c.right = child;
            }
            Some(oc) => {
                let right = self.node(oc).right;
                self.node_mut(child).left = oc;
                self.node_mut(child).right = right;
                self.node_mut(oc).right = child;
                self.node_mut(right).left = child;
            }
        }
        self.node_mut(child).parent = Some(root);
        self.node_mut(child).marked = false;
        let r = self.node_mut(root);
        r.child = Some(child);
        r.degree += 1;
    }

    fn roots(&self) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some(m) = self.min {
            let mut i = m;
            loop {
                out.push(i);
                i = self.node(i).right;
                if i == m {
                    break;
                }
            }
        }
        out
    }

    fn pop_min(&mut self) -> Option<(StateId, WeightValue)> {
        let m = self.min?;
        // Promote children to roots.
        let mut children = Vec::new();
        if let Some(c) = self.node(m).child {
            let mut i = c;
            loop {
                children.push(i);
                i = self.node(i).right;
                if i == c {
                    break;
                }
            }
        }
        let survivor = self.unlink(m);
        self.min = survivor;
        for c in children {
            self.add_root(c);
        }
        let removed = self.nodes[m].take().expect("live node");
        self.len -= 1;

        if self.min.is_some() {
            // Consolidate: merge roots of equal degree.
            let mut by_degree: Vec<Option<usize>> = Vec::new();
            for r in self.roots() {
                let mut x = r;
                loop {
                    let d = self.node(x).degree;
                    if d >= by_degree.len() {
                        by_degree.resize(d + 1, None);
                    }
                    match by_degree[d].take() {
                        None => {
                            by_degree[d] = Some(x);
                            break;
                        }
                        Some(y) => {
                            let (root, child) = if self.lt(x, y) { (x, y) } else { (y, x) };
                            self.link(root, child);
                            x = root;
                        }
                    }
                }
            }
            // Rebuild the root ring and locate the minimum.
            let roots: Vec<usize> = by_degree.into_iter().flatten().collect();
            self.min = None;
            for r in &roots {
                let n = self.node_mut(*r);
                n.left = *r;
                n.right = *r;
                n.parent = None;
            }
            for r in roots {
                self.add_root(r);
            }
        }
        Some((m, removed.priority))
    }
}

impl MinQueue for FibonacciHeap {
    fn insert(&mut self, state: StateId, priority: WeightValue) {
        assert!(self.nodes[state].is_none(), "state {state} already queued");
        self.nodes[state] = Some(FibNode {
            priority,
            parent: None,
            child: None,
            left: state,
            right: state,
            degree: 0,
            marked: false,
        });
        self.len += 1;
        let m = self.min;
        match m {
            None => self.min = Some(state),
            Some(_) => {
                let anchor = self.min.unwrap();
                let right = self.node(anchor).right;
                self.node_mut(state).left = anchor;
                self.node_mut(state).right = right;
                self.node_mut(anchor).right = state;
                self.node_mut(right).left = state;
                if self.lt(state, anchor) {
                    self.min = Some(state);
                }
            }
        }
    }

    fn decrease(&mut self, state: StateId, priority: WeightValue) {
        let node = self.nodes[state].as_mut().expect("state in queue");
        let cmp = order_cmp(self.dir, &priority, &node.priority);
        assert!(cmp != Ordering::Greater, "priorities may only decrease");
        if cmp == Ordering::Equal {
            return;
        }
        node.priority = priority;
        if let Some(p) = self.node(state).parent {
            if self.lt(state, p) {
                self.cut(state, p);
                self.cascading_cut(p);
            }
        }
        if let Some(m) = self.min {
            if self.node(state).parent.is_none() && self.lt(state, m) {
                self.min = Some(state);
            }
        }
    }

    fn peek_min(&mut self) -> Option<WeightValue> {
        self.min.map(|m| self.node(m).priority.clone())
    }

    fn pop_all_minimal(&mut self) -> Vec<StateId> {
        let Some((first, priority)) = self.pop_min() else {
            return Vec::new();
        };
        let mut out = vec![first];
        while let Some(next) = self.peek_min() {
            if order_cmp(self.dir, &next, &priority) != Ordering::Equal {
                break;
            }
            out.push(self.pop_min().expect("non-empty").0);
        }
        out.sort_unstable();
        out
    }

    fn len(&self) -> usize {
        self.len
    }
}

// --- lazy-deletion binary heap ---

#[derive(Debug, Clone)]
struct Entry {
    priority: WeightValue,
    state: StateId,
    dir: OrderDirection,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // BinaryHeap is a max-heap; reverse so the order-minimum surfaces first,
    // with smaller state ids ahead within a tie group.
    fn cmp(&self, other: &Self) -> Ordering {
        order_cmp(self.dir, &self.priority, &other.priority)
            .reverse()
            .then(self.state.cmp(&other.state).reverse())
    }
}

/// Binary heap with stale entries skipped on extraction; decrease-key is a
/// fresh O(log n) push.
#[derive(Debug)]
pub struct LazyBinaryHeap {
    dir: OrderDirection,
    heap: BinaryHeap<Entry>,
    current: Vec<Option<WeightValue>>,
    len: usize,
}

impl LazyBinaryHeap {
    pub fn new(states: usize, dir: OrderDirection) -> Self {
        LazyBinaryHeap {
            dir,
            heap: BinaryHeap::new(),
            current: vec![None; states],
            len: 0,
        }
    }

    fn skim_stale(&mut self) {
        while let Some(top) = self.heap.peek() {
            match &self.current[top.state] {
                Some(p) if *p == top.priority => return,
                _ => {
                    self.heap.pop();
                }
            }
        }
    }
}

impl MinQueue for LazyBinaryHeap {
    fn insert(&mut self, state: StateId, priority: WeightValue) {
        assert!(
            self.current[state].is_none(),
            "state {state} already queued"
        );
        self.current[state] = Some(priority.clone());
        self.heap.push(Entry {
            priority,
            state,
            dir: self.dir,
        });
        self.len += 1;
    }

    fn decrease(&mut self, state: StateId, priority: WeightValue) {
        let old = self.current[state].as_ref().expect("state in queue");
        let cmp = order_cmp(self.dir, &priority, old);
        assert!(cmp != Ordering::Greater, "priorities may only decrease");
        if cmp == Ordering::Equal {
            return;
        }
        self.current[state] = Some(priority.clone());
        self.heap.push(Entry {
            priority,
            state,
            dir: self.dir,
        });
    }

    fn peek_min(&mut self) -> Option<WeightValue> {
        self.skim_stale();
        self.heap.peek().map(|e| e.priority.clone())
    }

    fn pop_all_minimal(&mut self) -> Vec<StateId> {
        self.skim_stale();
        let Some(first) = self.heap.pop() else {
            return Vec::new();
        };
        self.current[first.state] = None;
        self.len -= 1;
        let mut out = vec![first.state];
        loop {
            self.skim_stale();
            match self.heap.peek() {
                Some(top)
                    if order_cmp(self.dir, &top.priority, &first.priority) == Ordering::Equal =>
                {
                    let e = self.heap.pop().expect("non-empty");
                    self.current[e.state] = None;
                    self.len -= 1;
                    out.push(e.state);
                }
                _ => break,
            }
        }
        out.sort_unstable();
        out
    }

    fn len(&self) -> usize {
        self.len
    }
}
