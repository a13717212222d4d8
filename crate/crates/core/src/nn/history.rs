use crate::real::Real;

/// Ring buffer of the most recent input frames of a causal layer, zero-initialized
/// (frames before the stream start are treated as silence).
#[derive(Debug, Clone)]
pub struct FrameHistory<T> {
    frame_len: usize,
    depth: usize,
    head: usize,
    data: Vec<T>,
}

impl<T: Real> FrameHistory<T> {
    pub fn new(depth: usize, frame_len: usize) -> Self {
        assert!(depth > 0);
        FrameHistory {
            frame_len,
            depth,
            head: 0,
            data: vec![T::zero(); depth * frame_len],
        }
    }

    pub fn push(&mut self, frame: &[T]) {
        debug_assert_eq!(frame.len(), self.frame_len);
        self.head = (self.head + 1) % self.depth;
        let start = self.head * self.frame_len;
        self.data[start..start + self.frame_len].copy_from_slice(frame);
    }

    /// Frame pushed `lag` steps ago (0 = most recent).
    pub fn get(&self, lag: usize) -> &[T] {
        debug_assert!(lag < self.depth);
        let slot = (self.head + self.depth - lag) % self.depth;
        &self.data[slot * self.frame_len..(slot + 1) * self.frame_len]
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn reset(&mut self) {
        self.data.fill(T::zero());
        self.head = 0;
    }
}
