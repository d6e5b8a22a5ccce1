use crate::field::Field;

/// A consistent snapshot: `w` solves the elliptic constraint for `n`, and `mu`, `p`
/// are derived from `(n, w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateBundle {
    pub t: f64,
    pub n: Field,
    pub w: Field,
    pub mu: Field,
    pub p: Field,
    /// L∞ residual of the elliptic equation reached when `w` was computed.
    pub elliptic_residual: f64,
}

impl StateBundle {
    pub fn is_finite(&self) -> bool {
        self.n.is_finite() && self.w.is_finite() && self.mu.is_finite() && self.p.is_finite()
    }
}
