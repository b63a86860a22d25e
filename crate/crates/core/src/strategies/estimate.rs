use crate::scalar::Scalar;

/// Running guess of the rate. Moves only by factors of two and stays in
/// `[floor, cap]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonEstimate<S> {
    value: S,
    floor: S,
    cap: S,
}

impl<S: Scalar> EpsilonEstimate<S> {
    pub fn new(initial: S, floor: S, cap: S) -> Self {
        debug_assert!(floor > S::zero() && floor <= cap);
        EpsilonEstimate { value: initial.max(floor).min(cap), floor, cap }
    }

    /// Starts at `1/T`.
    pub fn from_horizon(horizon: usize) -> Self {
        let floor = S::one() / S::of_usize(horizon);
        Self::new(floor, floor, S::half())
    }

    #[inline]
    pub fn get(&self) -> S {
        self.value
    }

    pub fn floor(&self) -> S {
        self.floor
    }

    /// Doubles up to the cap. Returns false if already at the cap.
    pub fn double(&mut self) -> bool {
        if self.value >= self.cap {
            return false;
        }
        self.value = (self.value * S::two()).min(self.cap);
        true
    }

    /// Halves if the estimate is above the floor.
    pub fn halve(&mut self) -> bool {
        if self.value <= self.floor {
            return false;
        }
        self.value = (self.value / S::two()).max(self.floor);
        true
    }

    pub fn at_cap(&self) -> bool {
        self.value >= self.cap
    }
}
