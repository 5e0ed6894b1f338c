use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Time-ordered event queue; equal timestamps pop in insertion order.
#[derive(Debug)]
pub(crate) struct Calendar<E> {
    heap: BinaryHeap<Entry<E>>,
    next_seq: u64,
}

#[derive(Debug)]
struct Entry<E> {
    time: f64,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

impl<E> Calendar<E> {
    pub(crate) fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            next_seq: 0,
        }
    }

    pub(crate) fn schedule(&mut self, time: f64, event: E) {
        if time.is_finite() {
            self.heap.push(Entry {
                time,
                seq: self.next_seq,
                event,
            });
            self.next_seq += 1;
        }
    }

    pub(crate) fn pop(&mut self) -> Option<(f64, E)> {
        self.heap.pop().map(|e| (e.time, e.event))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_by_time_then_fifo() {
        let mut cal = Calendar::new();
        cal.schedule(2.0, "c");
        cal.schedule(1.0, "a");
        cal.schedule(2.0, "d");
        cal.schedule(1.0, "b");
        cal.schedule(f64::INFINITY, "never");
        let order: Vec<&str> = std::iter::from_fn(|| cal.pop().map(|e| e.1)).collect();
        assert_eq!(order, vec!["a", "b", "c", "d"]);
    }
}
