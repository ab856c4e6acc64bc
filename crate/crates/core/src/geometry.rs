//! Feasible sets, Euclidean projection and direction sampling.
//!
//! A [`ConvexDomain`] always contains the origin and is sandwiched between two
//! balls, `r·B ⊆ X ⊆ R·B`. The shrunken set `(1−α)X` used by the learners is
//! never built explicitly: because `0 ∈ X`, projecting onto `cX` is
//! `c·Π_X(z/c)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::rng::{Purpose, Streams};
use crate::Vector;

/// Absolute tolerance used for feasibility assertions.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Tolerance on the norm of a [`UnitDirection`].
pub const UNIT_TOL: f64 = 1e-12;

/// Number of random probes run when a custom projection is registered.
pub const CUSTOM_PROBES: usize = 100;

/// Projection oracle supplied by the caller for custom domains.
pub type ProjectionFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

#[derive(Clone)]
pub enum Shape {
    Ball { radius: f64 },
    Box { half_widths: Vec<f64> },
    Custom { name: String, project: ProjectionFn },
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Ball { radius } => f.debug_struct("Ball").field("radius", radius).finish(),
            Shape::Box { half_widths } => f.debug_struct("Box").field("half_widths", half_widths).finish(),
            Shape::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

/// A compact convex set containing the origin.
#[derive(Debug, Clone)]
pub struct ConvexDomain {
    dim: usize,
    diameter: f64,
    in_radius: f64,
    outer_radius: f64,
    shape: Shape,
}

impl ConvexDomain {
    /// Euclidean ball of the given radius centred at the origin.
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("domain dimension must be positive".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self {
            dim,
            diameter: 2.0 * radius,
            in_radius: radius,
            outer_radius: radius,
            shape: Shape::Ball { radius },
        })
    }

    /// Axis-aligned box `∏[−h_i, h_i]`.
    pub fn boxed(half_widths: Vec<f64>) -> Result<Self> {
        if half_widths.is_empty() {
            return Err(Error::InvalidConfig("box needs at least one half-width".into()));
        }
        if let Some(h) = half_widths.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidConfig(format!("box half-widths must be positive, got {h}")));
        }
        let outer = half_widths.iter().map(|h| h * h).sum::<f64>().sqrt();
        let inner = half_widths.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            dim: half_widths.len(),
            diameter: 2.0 * outer,
            in_radius: inner,
            outer_radius: outer,
            shape: Shape::Box { half_widths },
        })
    }

    /// Domain given by a projection oracle and declared geometry.
    ///
    /// The declarations are trusted but probed: the origin must be fixed,
    /// `r·u` must be feasible for random unit `u`, and the projection must be
    /// idempotent, non-expansive and land inside the `R`-ball.
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        diameter: f64,
        in_radius: f64,
        outer_radius: f64,
        project: ProjectionFn,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("domain dimension must be positive".into()));
        }
        if !(in_radius > 0.0 && in_radius <= outer_radius && outer_radius <= diameter) {
            return Err(Error::InvalidConfig(format!(
                "custom domain needs 0 < r <= R <= D, got r={in_radius}, R={outer_radius}, D={diameter}"
            )));
        }
        let domain = Self {
            dim,
            diameter,
            in_radius,
            outer_radius,
            shape: Shape::Custom { name: name.into(), project },
        };
        domain.probe_declarations()?;
        Ok(domain)
    }

    fn probe_declarations(&self) -> Result<()> {
        let tol = FEASIBILITY_TOL;
        let fail = |what: &str| Err(Error::InvalidConfig(format!("custom projection failed probe: {what}")));
        let zero = Vector::zeros(self.dim);
        if self.project_raw(&zero).norm() > tol {
            return fail("project(0) != 0");
        }
        let streams = Streams::new(0x5eed_c0de);
        for k in 0..CUSTOM_PROBES as u64 {
            let mut rng = streams.rng(Purpose::Probe, k);
            let u = sample_sphere(self.dim, &mut rng).into_inner();
            let inner = &u * self.in_radius;
            if (self.project_raw(&inner) - &inner).norm() > tol {
                return fail("r·u not feasible");
            }
            let a = gaussian(self.dim, &mut rng) * (2.0 * self.outer_radius);
            let b = gaussian(self.dim, &mut rng) * (2.0 * self.outer_radius);
            let pa = self.project_raw(&a);
            let pb = self.project_raw(&b);
            if pa.len() != self.dim {
                return fail("projection changed the dimension");
            }
            if pa.norm() > self.outer_radius + tol {
                return fail("projected point outside the declared outer ball");
            }
            if (self.project_raw(&pa) - &pa).norm() > tol {
                return fail("projection is not idempotent");
            }
            if (&pa - &pb).norm() > (&a - &b).norm() + tol {
                return fail("projection is expansive");
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Diameter `D`.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// In-radius `r`: the ball `r·B` is contained in the domain.
    pub fn in_radius(&self) -> f64 {
        self.in_radius
    }

    /// Outer radius `R`: the domain is contained in `R·B`.
    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Euclidean projection onto the domain.
    pub fn project(&self, z: &Vector) -> Result<Vector> {
        check_dim(self.dim, z.len())?;
        Ok(self.project_raw(z))
    }

    pub(crate) fn project_raw(&self, z: &Vector) -> Vector {
        match &self.shape {
            Shape::Ball { radius } => {
                let n = z.norm();
                if n <= *radius {
                    z.clone()
                } else {
                    z * (radius / n)
                }
            }
            Shape::Box { half_widths } => {
                Vector::from_iterator(self.dim, z.iter().zip(half_widths).map(|(x, h)| x.clamp(-h, *h)))
            }
            Shape::Custom { project, .. } => project(z),
        }
    }

    /// Whether `x` lies in the domain up to `tol` (projection-identity check).
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.len() == self.dim && (self.project_raw(x) - x).norm() <= tol
    }

    /// A random feasible point. Uniform for balls and boxes.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        match &self.shape {
            Shape::Ball { radius } => {
                let u = sample_sphere(self.dim, rng).into_inner();
                let s: f64 = rng.random::<f64>().powf(1.0 / self.dim as f64);
                u * (radius * s)
            }
            Shape::Box { half_widths } => {
                Vector::from_iterator(self.dim, half_widths.iter().map(|h| rng.random_range(-h..=*h)))
            }
            Shape::Custom { .. } => self.project_raw(&(gaussian(self.dim, rng) * self.outer_radius)),
        }
    }

    /// `argmin_{x ∈ X} ⟨w, x⟩` when it has a closed form. Returns `0` for `w = 0`.
    pub fn minimize_linear(&self, w: &Vector) -> Option<Vector> {
        let n = w.norm();
        if n == 0.0 {
            return Some(Vector::zeros(self.dim));
        }
        match &self.shape {
            Shape::Ball { radius } => Some(w * (-radius / n)),
            Shape::Box { half_widths } => Some(Vector::from_iterator(
                self.dim,
                w.iter().zip(half_widths).map(|(wi, h)| {
                    if *wi > 0.0 {
                        -h
                    } else if *wi < 0.0 {
                        *h
                    } else {
                        0.0
                    }
                }),
            )),
            Shape::Custom { .. } => None,
        }
    }

    /// A diameter-realising segment as `(midpoint, unit direction)`, so that
    /// `midpoint ± (D/2)·direction` are both feasible.
    ///
    /// For balls the direction is drawn from `rng`; boxes use the main diagonal.
    pub fn diameter_segment<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<(Vector, UnitDirection)> {
        match &self.shape {
            Shape::Ball { .. } => Some((Vector::zeros(self.dim), sample_sphere(self.dim, rng))),
            Shape::Box { half_widths } => {
                let h = Vector::from_column_slice(half_widths);
                let n = h.norm();
                Some((Vector::zeros(self.dim), UnitDirection(h / n)))
            }
            Shape::Custom { .. } => None,
        }
    }
}

/// The shrunken set `X_α = (1−α)X`.
#[derive(Debug, Clone, Copy)]
pub struct ShrunkenDomain<'a> {
    base: &'a ConvexDomain,
    alpha: f64,
}

impl<'a> ShrunkenDomain<'a> {
    pub fn new(base: &'a ConvexDomain, alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidConfig(format!("shrinkage alpha must lie in [0, 1), got {alpha}")));
        }
        Ok(Self { base, alpha })
    }

    /// Caller guarantees `0 ≤ α < 1`.
    pub(crate) fn unchecked(base: &'a ConvexDomain, alpha: f64) -> Self {
        debug_assert!((0.0..1.0).contains(&alpha));
        Self { base, alpha }
    }

    /// Shrinkage matching a perturbation radius: `α = δ/r`.
    pub fn for_perturbation(base: &'a ConvexDomain, delta: f64) -> Result<Self> {
        Self::new(base, delta / base.in_radius())
    }

    pub fn base(&self) -> &'a ConvexDomain {
        self.base
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scale(&self) -> f64 {
        1.0 - self.alpha
    }

    /// Projection onto `(1−α)X` via `c·Π_X(z/c)`.
    pub fn project(&self, z: &Vector) -> Result<Vector> {
        check_dim(self.base.dim(), z.len())?;
        Ok(self.project_raw(z))
    }

    pub(crate) fn project_raw(&self, z: &Vector) -> Vector {
        if self.alpha == 0.0 {
            return self.base.project_raw(z);
        }
        let c = self.scale();
        self.base.project_raw(&(z / c)) * c
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.len() == self.base.dim() && (self.project_raw(x) - x).norm() <= tol
    }
}

/// A vector of unit Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitDirection(Vector);

impl UnitDirection {
    /// Accepts `v` only if `|‖v‖ − 1| ≤ 1e−12`.
    pub fn new(v: Vector) -> Result<Self> {
        if (v.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidInput(format!("direction has norm {}, expected 1", v.norm())));
        }
        Ok(Self(v))
    }

    /// Normalises a nonzero vector.
    pub fn normalize(v: Vector) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidInput("cannot normalise a zero or non-finite vector".into()));
        }
        Ok(Self(v / n))
    }

    /// The `i`-th standard basis vector (0-based).
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::InvalidInput(format!("basis index {i} out of range for dimension {dim}")));
        }
        let mut v = Vector::zeros(dim);
        v[i] = 1.0;
        Ok(Self(v))
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }

    pub fn into_inner(self) -> Vector {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl std::ops::Deref for UnitDirection {
    type Target = Vector;
    fn deref(&self) -> &Vector {
        &self.0
    }
}

fn gaussian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
    Vector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Uniform direction on the sphere `S^{d−1}` (normalised Gaussian).
///
/// For `d = 1` this is a fair sign.
pub fn sample_sphere<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitDirection {
    assert!(dim >= 1, "sphere dimension must be positive");
    loop {
        let g = gaussian(dim, rng);
        let n = g.norm();
        if n > 0.0 {
            return UnitDirection(g / n);
        }
    }
}

/// Uniform coordinate index (0-based) together with its basis vector.
pub fn sample_basis_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> (usize, UnitDirection) {
    assert!(dim >= 1, "dimension must be positive");
    let i = rng.random_range(0..dim);
    let mut v = Vector::zeros(dim);
    v[i] = 1.0;
    (i, UnitDirection(v))
}

/// Radial clip onto the ball of radius `radius` (projection onto `radius·B`).
pub fn clip_to_ball(v: &Vector, radius: f64) -> Vector {
    let n = v.norm();
    if n <= radius {
        v.clone()
    } else if radius <= 0.0 {
        Vector::zeros(v.len())
    } else {
        v * (radius / n)
    }
}
