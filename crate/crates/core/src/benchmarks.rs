//! Analytic test surfaces given directly as harmonic weights.
//!
//! Each surface is a spheroid whose radius is modulated by smooth
//! Gaussian bumps, projected onto the basis by quadrature so no input
//! mesh is needed.

use crate::error::Result;
use crate::harmonics::{project_function, FourierWeights};
use crate::mesh::Vec3;
use crate::spheroidal::{DomainKind, SpheroidDomain};

/// Radial bump centred on a unit direction.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub direction: Vec3,
    pub amplitude: f64,
    /// Angular width, radians.
    pub width: f64,
}

impl Bump {
    pub fn new(direction: Vec3, amplitude: f64, width: f64) -> Self {
        Self {
            direction: direction.normalize(),
            amplitude,
            width,
        }
    }

    fn value(&self, dir: &Vec3) -> f64 {
        let c = dir.dot(&self.direction).clamp(-1.0, 1.0);
        self.amplitude * (-(1.0 - c) / (self.width * self.width)).exp()
    }
}

/// Shell of `domain` scaled radially by `1 + Σ bumps`.
pub fn bumped_shell(domain: SpheroidDomain, bumps: &[Bump], n_max: usize) -> Result<FourierWeights> {
    project_function(&domain, n_max, |eta, phi| {
        let p = domain.point(domain.zeta0, eta, phi);
        let dir = p.normalize();
        p * (1.0 + bumps.iter().map(|b| b.value(&dir)).sum::<f64>())
    })
}

/// Oblate spheroid (semi-axes 1 and 0.75) with six bumps of up to 10 %.
pub fn bumpy_spheroid(n_max: usize) -> Result<FourierWeights> {
    let domain = SpheroidDomain::from_semi_axes(1.0, 0.75, false)?;
    let bumps = [
        Bump::new(Vec3::new(1.0, 0.0, 0.3), 0.10, 0.35),
        Bump::new(Vec3::new(-0.5, 0.8, 0.1), 0.08, 0.30),
        Bump::new(Vec3::new(-0.4, -0.9, -0.2), 0.09, 0.40),
        Bump::new(Vec3::new(0.1, 0.2, 1.0), 0.07, 0.35),
        Bump::new(Vec3::new(0.3, -0.1, -1.0), 0.10, 0.30),
        Bump::new(Vec3::new(0.7, 0.7, -0.5), 0.06, 0.25),
    ];
    bumped_shell(domain, &bumps, n_max)
}

/// Prolate spheroid (semi-axes 1 and 1.3) with one tall protrusion on the
/// equator.
pub fn protrusion_spheroid(n_max: usize) -> Result<FourierWeights> {
    let domain = SpheroidDomain::from_semi_axes(1.0, 1.3, false)?;
    let bumps = [Bump::new(Vec3::x(), 0.6, 0.3)];
    bumped_shell(domain, &bumps, n_max)
}

/// Prolate hemispheroidal cap (semi-axes 1 and 1.2) with bumps kept away
/// from the rim, so the rim stays an exact circle of radius 1.
pub fn bumpy_cap(n_max: usize) -> Result<FourierWeights> {
    let domain = SpheroidDomain::from_semi_axes(1.0, 1.2, true)?;
    debug_assert_eq!(domain.kind, DomainKind::ProlateHemispheroid);
    let bumps = [
        Bump::new(Vec3::new(0.0, 0.0, 1.0), 0.10, 0.30),
        Bump::new(Vec3::new(0.8, 0.0, 0.9), 0.08, 0.20),
        Bump::new(Vec3::new(-0.5, 0.7, 0.8), 0.07, 0.20),
    ];
    bumped_shell(domain, &bumps, n_max)
}
