use serde::{Deserialize, Serialize};

/// Mobility `B(n)`. With `eps > 0` this is the clamped mobility
/// `eps` for `n <= eps`, `1/eps` for `n >= 1/eps`, `n` otherwise; `eps = 0` gives the
/// degenerate mobility `max(0, n)`.
#[inline]
pub fn mobility(n: f64, eps: f64) -> f64 {
    if eps == 0.0 {
        n.max(0.0)
    } else if n <= eps {
        eps
    } else if n >= 1.0 / eps {
        1.0 / eps
    } else {
        n
    }
}

/// How the mobility is evaluated on a cell face.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceMobility {
    /// Value in the cell the mass flows out of.
    #[default]
    Upwind,
    /// Mean of the two adjacent cell values.
    Arithmetic,
}

impl FaceMobility {
    /// Face mobility for a flux driven by `drive = q_right - q_left`, mass moving toward the
    /// lower value of `q`.
    #[inline]
    pub fn face_value(self, n_left: f64, n_right: f64, drive: f64, eps: f64) -> f64 {
        match self {
            FaceMobility::Upwind => {
                if drive > 0.0 {
                    mobility(n_right, eps)
                } else {
                    mobility(n_left, eps)
                }
            }
            FaceMobility::Arithmetic => 0.5 * (mobility(n_left, eps) + mobility(n_right, eps)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regularized_branches() {
        assert_eq!(mobility(0.05, 0.1), 0.1);
        assert_eq!(mobility(0.5, 0.1), 0.5);
        assert_eq!(mobility(100.0, 0.1), 10.0);
    }

    #[test]
    fn degenerate_and_continuity() {
        assert_eq!(mobility(-0.2, 0.0), 0.0);
        assert_eq!(mobility(0.7, 0.0), 0.7);
        let eps = 0.1;
        for edge in [eps, 1.0 / eps] {
            let below = mobility(edge - 1e-12, eps);
            let above = mobility(edge + 1e-12, eps);
            assert!((below - above).abs() < 1e-11);
        }
    }

    #[test]
    fn upwind_picks_source_cell() {
        let f = FaceMobility::Upwind;
        // mu increases to the right: mass flows right-to-left, source is the right cell
        assert_eq!(f.face_value(0.2, 0.8, 1.0, 0.0), 0.8);
        assert_eq!(f.face_value(0.2, 0.8, -1.0, 0.0), 0.2);
        assert_eq!(FaceMobility::Arithmetic.face_value(0.2, 0.8, 1.0, 0.0), 0.5);
    }
}
