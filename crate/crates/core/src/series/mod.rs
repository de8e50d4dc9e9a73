//! Fourier–Taylor series: polynomials in action variables whose coefficients
//! are real trigonometric polynomials in the angles.

mod compose;
mod ft;
mod index;
mod trig;
pub mod field;

pub use compose::{compose_many, ft_compose, invert_near_identity, InvertMode, TaylorOrder};
pub use ft::FtSeries;
pub use index::{monomials, monomials_between, MultiIndex};
pub use trig::{Parity, TrigPoly, MAX_DIM};

use core::cell::Cell;

/// Truncation budget for one computation plus an accumulator for what the
/// truncation discarded (majorant at s = 0, r = 1).
#[derive(Debug)]
pub struct Ctx {
    kmax: usize,
    ymax: usize,
    floor: Cell<f64>,
}

impl Ctx {
    pub fn new(kmax: usize, ymax: usize) -> Ctx {
        Ctx {
            kmax,
            ymax,
            floor: Cell::new(0.0),
        }
    }

    /// Largest stored |k|∞.
    pub fn kmax(&self) -> usize {
        self.kmax
    }

    /// Largest stored total degree in the action variables.
    pub fn ymax(&self) -> usize {
        self.ymax
    }

    pub fn floor(&self) -> f64 {
        self.floor.get()
    }

    pub fn add_floor(&self, x: f64) {
        self.floor.set(self.floor.get() + x);
    }
}

/// Domain radii for majorant norms and the parameter balls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainSpec {
    /// Width of the complex strip around the real torus.
    pub s: f64,
    /// Action radius.
    pub r: f64,
    /// Radius of the ξ-parameter ball.
    pub a: f64,
    /// Radius of the η-parameter ball.
    pub b: f64,
}

impl DomainSpec {
    pub fn new(s: f64, r: f64, a: f64, b: f64) -> crate::Result<DomainSpec> {
        if !(s > 0.0 && r > 0.0 && a >= 0.0 && b >= 0.0) {
            return Err(crate::Error::InvalidParameter(
                "domain requires s > 0, r > 0, a >= 0, b >= 0",
            ));
        }
        Ok(DomainSpec { s, r, a, b })
    }
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec {
            s: 0.5,
            r: 0.2,
            a: 0.05,
            b: 1.0,
        }
    }
}
