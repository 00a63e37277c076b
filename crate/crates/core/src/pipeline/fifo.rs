//! Bounded, typed FIFO between two block ports.

use thiserror::Error;

use super::{ElementKind, Payload};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FifoError {
    #[error("overflow: {queued} queued + {incoming} incoming exceeds capacity {capacity}")]
    Overflow {
        queued: usize,
        incoming: usize,
        capacity: usize,
    },
    #[error("element kind mismatch: FIFO carries {expected}, got {got}")]
    KindMismatch {
        expected: ElementKind,
        got: ElementKind,
    },
}

#[derive(Debug, Clone)]
pub struct FifoChannel {
    queue: Payload,
    capacity: usize,
    pushed: u64,
    popped: u64,
}

impl FifoChannel {
    pub fn new(kind: ElementKind, capacity: usize) -> Self {
        Self {
            queue: Payload::empty(kind),
            capacity,
            pushed: 0,
            popped: 0,
        }
    }

    pub fn kind(&self) -> ElementKind {
        self.queue.kind()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Items pushed over the channel's lifetime.
    pub fn pushed(&self) -> u64 {
        self.pushed
    }

    pub fn popped(&self) -> u64 {
        self.popped
    }

    /// Append `items` at the tail. Nothing is queued on error.
    pub fn push(&mut self, items: Payload) -> Result<(), FifoError> {
        if items.kind() != self.kind() {
            return Err(FifoError::KindMismatch {
                expected: self.kind(),
                got: items.kind(),
            });
        }
        let incoming = items.len();
        if self.len() + incoming > self.capacity {
            return Err(FifoError::Overflow {
                queued: self.len(),
                incoming,
                capacity: self.capacity,
            });
        }
        self.queue.append(items).expect("kinds checked above");
        self.pushed += incoming as u64;
        Ok(())
    }

    /// Remove and return everything queued, oldest first.
    pub fn drain(&mut self) -> Payload {
        let kind = self.kind();
        let out = std::mem::replace(&mut self.queue, Payload::empty(kind));
        self.popped += out.len() as u64;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn overflow_is_an_error() {
        let mut f = FifoChannel::new(ElementKind::Bit, 4);
        f.push(Payload::Bits(vec![1, 0, 1])).unwrap();
        let err = f.push(Payload::Bits(vec![1, 1])).unwrap_err();
        assert!(matches!(err, FifoError::Overflow { queued: 3, incoming: 2, capacity: 4 }));
        assert_eq!(f.len(), 3);
    }

    #[test]
    fn kind_checked() {
        let mut f = FifoChannel::new(ElementKind::Soft, 8);
        assert!(matches!(
            f.push(Payload::Bits(vec![1])),
            Err(FifoError::KindMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn order_and_counts(chunks in proptest::collection::vec(proptest::collection::vec(0u8..2, 0..20), 0..10)) {
            let mut f = FifoChannel::new(ElementKind::Bit, 1000);
            for c in &chunks {
                f.push(Payload::Bits(c.clone())).unwrap();
            }
            let all: Vec<u8> = chunks.concat();
            prop_assert_eq!(f.pushed(), all.len() as u64);
            prop_assert_eq!(f.drain(), Payload::Bits(all.clone()));
            prop_assert_eq!(f.popped(), f.pushed());
            prop_assert!(f.is_empty());
        }
    }
}
