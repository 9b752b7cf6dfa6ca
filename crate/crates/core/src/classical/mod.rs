//! Mean-field steady states of the driven Jaynes-Cummings model.
//!
//! Each theory reduces to a self-consistent equation `n = eta^2 / den(n)`
//! whose denominator does not depend on the drive. Along a solution branch
//! this gives the parametric curve `eta^2 = n * den(n)`, which is what the
//! slope classification and the boundary search work with.

mod boundary;
mod intuitive;
mod maxwell_bloch;
mod neoclassical;
mod semiclassical;

pub use boundary::{trace_boundary, trace_boundary_with, BoundaryCurve, BoundaryPoint};
pub use intuitive::{intuitive_critical_drive, intuitive_photon_number};
pub use maxwell_bloch::{maxwell_bloch_integrate, MeanFieldSample, MeanFieldState};
pub use neoclassical::{neoclassical_denominator, neoclassical_roots};
pub use semiclassical::{
    dispersive_shift, semiclassical_denominator, semiclassical_pseudospin, semiclassical_roots,
};

use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theory {
    Semiclassical,
    Neoclassical,
    Intuitive,
}

impl Theory {
    pub fn name(self) -> &'static str {
        match self {
            Theory::Semiclassical => "semiclassical",
            Theory::Neoclassical => "neoclassical",
            Theory::Intuitive => "intuitive",
        }
    }
}

impl std::str::FromStr for Theory {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "semiclassical" => Ok(Theory::Semiclassical),
            "neoclassical" => Ok(Theory::Neoclassical),
            "intuitive" => Ok(Theory::Intuitive),
            other => Err(format!("unknown theory `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootClass {
    StableDim,
    StableBright,
    Unstable,
    Nonphysical,
}

impl RootClass {
    pub fn name(self) -> &'static str {
        match self {
            RootClass::StableDim => "stable_dim",
            RootClass::StableBright => "stable_bright",
            RootClass::Unstable => "unstable",
            RootClass::Nonphysical => "nonphysical",
        }
    }

    pub fn is_physical(self) -> bool {
        self != RootClass::Nonphysical
    }

    pub fn is_stable(self) -> bool {
        matches!(self, RootClass::StableDim | RootClass::StableBright)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    /// Mean photon number.
    pub n: f64,
    pub class: RootClass,
    /// `|n - rhs(n)|` of the fixed-point equation the root solves.
    pub residual: f64,
    /// `dn/d(eta)` along the branch through this root.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub theory: Theory,
    pub params: SystemParams,
    /// Ascending in `n`.
    pub roots: Vec<Root>,
    /// Set when the drive sits exactly on a degenerate critical point
    /// (resonant neoclassical drive at `eta = g/2`).
    pub critical_point: bool,
}

impl RootSet {
    pub fn physical(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| r.class.is_physical())
    }

    pub fn physical_count(&self) -> usize {
        self.physical().count()
    }

    pub fn stable_count(&self) -> usize {
        self.roots.iter().filter(|r| r.class.is_stable()).count()
    }

    pub fn is_bistable(&self) -> bool {
        self.stable_count() >= 2
    }

    pub fn dim(&self) -> Option<&Root> {
        self.roots.iter().find(|r| r.class == RootClass::StableDim)
    }

    pub fn bright(&self) -> Option<&Root> {
        self.roots
            .iter()
            .rev()
            .find(|r| r.class == RootClass::StableBright)
    }

    /// Residual tolerance every returned root satisfies.
    pub fn residual_tolerance(&self) -> f64 {
        1e-9 * self.params.eta.powi(2).max(1.0)
    }
}

/// A solution branch parametrized by `p` (photon number or an auxiliary
/// variable), giving the photon number and the squared drive at which `p`
/// solves the fixed-point equation.
pub(crate) trait Branch {
    fn photons(&self, p: f64) -> f64;
    fn drive_sq(&self, p: f64) -> f64;

    /// `dn/d(eta)` at drive `eta`, by central differences in `p`.
    fn slope(&self, p: f64, eta: f64) -> f64 {
        let h = 1e-6 * p.abs().max(1e-12);
        let dn = (self.photons(p + h) - self.photons(p - h)) / (2.0 * h);
        let de = (self.drive_sq(p + h) - self.drive_sq(p - h)) / (2.0 * h);
        dn * 2.0 * eta / de
    }
}

/// Labels physical roots (ascending in `n`): negative slope is unstable,
/// the lowest and highest positive-slope roots are the dim and bright
/// attractors. A lone stable root is labelled by `bright_side`.
pub(crate) fn classify_physical(roots: &mut [Root], bright_side: impl Fn(&Root) -> bool) {
    let stable: Vec<usize> = roots
        .iter()
        .enumerate()
        .filter(|(_, r)| r.class != RootClass::Nonphysical && r.slope >= 0.0)
        .map(|(i, _)| i)
        .collect();
    for r in roots.iter_mut() {
        if r.class != RootClass::Nonphysical && r.slope < 0.0 {
            r.class = RootClass::Unstable;
        }
    }
    match stable.as_slice() {
        [] => {}
        [only] => {
            let bright = bright_side(&roots[*only]);
            roots[*only].class = if bright {
                RootClass::StableBright
            } else {
                RootClass::StableDim
            };
        }
        [first, .., last] => {
            roots[*first].class = RootClass::StableDim;
            roots[*last].class = RootClass::StableBright;
            for &i in &stable[1..stable.len() - 1] {
                roots[i].class = RootClass::Unstable;
            }
        }
    }
}
