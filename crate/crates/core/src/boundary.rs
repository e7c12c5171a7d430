//! Boundary treatment for the sweeps.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundaryError {
    #[error("periodic rotation needs at least 1 cell shift")]
    ZeroShift,
    #[error("periodic rotation shift {shift} too large for {cells} cells")]
    ShiftTooLarge { shift: usize, cells: usize },
    #[error("Dirichlet boundary requires boundary values (or an exact solution) on the problem")]
    MissingBoundaryValues,
}

/// Treatment of one domain end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndBc {
    /// Pin the two outermost nodes to their previous-level values
    /// (compact-support data).
    Freeze,
    /// Prescribe the boundary node from the problem's boundary-value map
    /// at the new time level.
    Dirichlet,
    /// Copy the neighbouring solved node (outflow).
    Extrapolate,
}

impl EndBc {
    /// Number of nodes this end pins (excluded from the solve).
    pub fn width(&self) -> usize {
        match self {
            EndBc::Freeze => 2,
            EndBc::Dirichlet | EndBc::Extrapolate => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundaryPolicy {
    Ends { left: EndBc, right: EndBc },
    /// Freeze two nodes per side during the sweeps, then rotate the field
    /// back by a whole number of cells after each step. Matches periodic
    /// transport when the per-step displacement is exactly `cells * h`.
    PeriodicRotate { cells: usize },
}

impl BoundaryPolicy {
    pub fn compact_support_freeze() -> Self {
        Self::Ends { left: EndBc::Freeze, right: EndBc::Freeze }
    }

    pub fn exact_dirichlet() -> Self {
        Self::Ends { left: EndBc::Dirichlet, right: EndBc::Dirichlet }
    }

    pub fn extrapolate() -> Self {
        Self::Ends { left: EndBc::Extrapolate, right: EndBc::Extrapolate }
    }

    pub fn periodic_rotate(cells: usize) -> Self {
        Self::PeriodicRotate { cells }
    }

    pub fn left_width(&self) -> usize {
        match self {
            Self::Ends { left, .. } => left.width(),
            Self::PeriodicRotate { .. } => 2,
        }
    }

    pub fn right_width(&self) -> usize {
        match self {
            Self::Ends { right, .. } => right.width(),
            Self::PeriodicRotate { .. } => 2,
        }
    }

    pub fn validate(&self, cells: usize) -> Result<(), BoundaryError> {
        if let Self::PeriodicRotate { cells: shift } = self {
            if *shift == 0 {
                return Err(BoundaryError::ZeroShift);
            }
            if *shift >= cells {
                return Err(BoundaryError::ShiftTooLarge { shift: *shift, cells });
            }
        }
        Ok(())
    }

    pub(crate) fn needs_dirichlet_values(&self) -> bool {
        matches!(
            self,
            Self::Ends { left: EndBc::Dirichlet, .. } | Self::Ends { right: EndBc::Dirichlet, .. }
        )
    }
}

/// Rotate nodal values left by `shift` cells with periodic wrap-around;
/// node `cells` is identified with node 0.
pub(crate) fn rotate_periodic(values: &mut [f64], shift: usize) {
    let cells = values.len() - 1;
    let base: Vec<f64> = values[..cells].to_vec();
    for i in 0..cells {
        values[i] = base[(i + shift) % cells];
    }
    values[cells] = values[0];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths() {
        assert_eq!(BoundaryPolicy::compact_support_freeze().left_width(), 2);
        assert_eq!(BoundaryPolicy::exact_dirichlet().left_width(), 1);
        let mixed = BoundaryPolicy::Ends { left: EndBc::Dirichlet, right: EndBc::Extrapolate };
        assert_eq!(mixed.left_width(), 1);
        assert_eq!(mixed.right_width(), 1);
    }

    #[test]
    fn rotation_wraps() {
        let mut v = vec![0.0, 1.0, 2.0, 3.0, 0.0]; // 4 cells, node 4 = node 0
        rotate_periodic(&mut v, 1);
        assert_eq!(v, vec![1.0, 2.0, 3.0, 0.0, 1.0]);
    }

    #[test]
    fn periodic_validation() {
        assert!(BoundaryPolicy::periodic_rotate(0).validate(10).is_err());
        assert!(BoundaryPolicy::periodic_rotate(10).validate(10).is_err());
        assert!(BoundaryPolicy::periodic_rotate(4).validate(500).is_ok());
    }
}
