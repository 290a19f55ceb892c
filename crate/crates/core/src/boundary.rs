//! Piecewise-smooth Dirichlet data, its jumps, and the singular-function
//! split that removes them.
//!
//! For boundary data `g` that is smooth on every boundary segment but may
//! jump at the marker points, each jumping marker gets an explicit harmonic
//! function matching the jump there. Subtracting those functions from `g`
//! leaves continuous boundary data (and, at straight markers, a continuous
//! tangential derivative), so the remaining problem has an H2 solution that
//! a standard method can approximate at full order.

use std::sync::Arc;

use crate::geometry::{Point2, PolarFrame, PolygonDomain};
use crate::{FemError, Result};

/// Scalar function of one parameter (arc length along a boundary segment).
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Scalar field on the domain.
pub type FieldFn = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;

/// Which one-sided limit at a marker point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Limit along the outgoing segment (`theta = 0` side).
    Plus,
    /// Limit along the incoming segment (`theta = omega` side).
    Minus,
}

/// Smooth trace of the boundary data on one segment: value and tangential
/// derivative, both as functions of arc length in counter-clockwise
/// direction, finite on the closed segment.
#[derive(Clone)]
pub struct EdgeTrace {
    pub value: ScalarFn,
    pub derivative: ScalarFn,
}

impl EdgeTrace {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { value: Arc::new(value), derivative: Arc::new(derivative) }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, |_| 0.0)
    }
}

/// One-sided values, derivatives and jumps of the data at a marker point.
#[derive(Debug, Clone, Copy)]
pub struct JumpRecord {
    pub index: usize,
    pub g_plus: f64,
    pub g_minus: f64,
    /// `g(A+) - g(A-)`.
    pub jump_g: f64,
    pub gprime_plus: f64,
    pub gprime_minus: f64,
    /// `g'(A+) - g'(A-)`; only meaningful where the interior angle is pi.
    pub jump_gprime: f64,
}

/// Per-segment Dirichlet traces, aligned with the domain's segment list.
#[derive(Clone)]
pub struct BoundaryData {
    traces: Vec<EdgeTrace>,
}

impl BoundaryData {
    pub fn new(traces: Vec<EdgeTrace>) -> Self {
        Self { traces }
    }

    /// Builds traces by restricting a global field to every segment; the
    /// tangential derivative is the supplied gradient dotted with each
    /// segment's counter-clockwise tangent. Only usable when the field is
    /// continuous at all segment endpoints.
    pub fn from_field(
        domain: &PolygonDomain,
        value: FieldFn,
        gradient: Arc<dyn Fn(Point2) -> Point2 + Send + Sync>,
    ) -> Self {
        let traces = domain
            .segments()
            .iter()
            .map(|seg| {
                let seg = *seg;
                let v = value.clone();
                let grad = gradient.clone();
                EdgeTrace::new(
                    move |s| v(seg.point_at_arclength(s)),
                    move |s| grad(seg.point_at_arclength(s)).dot(seg.tangent),
                )
            })
            .collect();
        Self { traces }
    }

    pub fn num_edges(&self) -> usize {
        self.traces.len()
    }

    pub fn trace(&self, i: usize) -> &EdgeTrace {
        &self.traces[i]
    }

    pub fn value(&self, i: usize, s: f64) -> f64 {
        (self.traces[i].value)(s)
    }

    /// One-sided limits of value and tangential derivative at marker `i`:
    /// the plus side from the start of segment `i`, the minus side from the
    /// end of segment `i - 1`.
    pub fn one_sided_limits(&self, domain: &PolygonDomain, i: usize) -> JumpRecord {
        let m = self.traces.len();
        let prev = (i + m - 1) % m;
        let prev_len = domain.segment(prev).length;
        let g_plus = (self.traces[i].value)(0.0);
        let g_minus = (self.traces[prev].value)(prev_len);
        let gprime_plus = (self.traces[i].derivative)(0.0);
        let gprime_minus = (self.traces[prev].derivative)(prev_len);
        JumpRecord {
            index: i,
            g_plus,
            g_minus,
            jump_g: g_plus - g_minus,
            gprime_plus,
            gprime_minus,
            jump_gprime: gprime_plus - gprime_minus,
        }
    }

    pub fn jumps(&self, domain: &PolygonDomain) -> Vec<JumpRecord> {
        (0..self.traces.len()).map(|i| self.one_sided_limits(domain, i)).collect()
    }

    /// Cross-checks every supplied tangential derivative against a centered
    /// finite difference of the value callable at a few interior parameters.
    pub fn validate(&self, domain: &PolygonDomain) -> Result<()> {
        if self.traces.len() != domain.num_segments() {
            return Err(FemError::InvalidBoundaryData(format!(
                "{} traces for {} boundary segments",
                self.traces.len(),
                domain.num_segments()
            )));
        }
        for (i, trace) in self.traces.iter().enumerate() {
            let len = domain.segment(i).length;
            let h = 1.0e-6 * len;
            for frac in [0.2, 0.5, 0.8] {
                let s = frac * len;
                let fd = ((trace.value)(s + h) - (trace.value)(s - h)) / (2.0 * h);
                let given = (trace.derivative)(s);
                let scale = 1.0 + given.abs().max(fd.abs());
                if (fd - given).abs() > 1.0e-5 * scale {
                    return Err(FemError::InvalidBoundaryData(format!(
                        "tangential derivative on segment {i} disagrees with a finite \
                         difference of the value at s = {s:.6} ({given:.6e} vs {fd:.6e})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `sigma(r, theta) = r (ln r sin theta + theta cos theta)`, the radial-log
/// profile used to remove tangential-derivative jumps at straight markers.
/// Continuous at the origin with value 0; harmonic away from it.
pub fn sigma(r: f64, theta: f64) -> f64 {
    // Floor inside the log so r = 0 yields 0 * finite = 0 instead of NaN.
    r * (r.max(1.0e-300).ln() * theta.sin() + theta * theta.cos())
}

/// Explicit harmonic function matching the data jump at one marker point.
///
/// In the local polar frame `(r, theta)` at the marker:
/// interior angle below pi: `g_plus - (theta / omega) * [g]`;
/// interior angle exactly pi: `g_plus - ([g] theta + [g'] sigma(r, theta)) / pi`.
#[derive(Debug, Clone)]
pub struct SingularFunction {
    frame: PolarFrame,
    omega: f64,
    g_plus: f64,
    jump_g: f64,
    jump_gprime: f64,
}

impl SingularFunction {
    pub fn new(frame: PolarFrame, jump: &JumpRecord) -> Result<Self> {
        let omega = frame.omega;
        if !(omega > 0.0 && omega <= std::f64::consts::PI) {
            return Err(FemError::InvalidBoundaryData(format!(
                "singular function requires an interior angle in (0, pi], got {omega}"
            )));
        }
        Ok(Self {
            frame,
            omega,
            g_plus: jump.g_plus,
            jump_g: jump.jump_g,
            jump_gprime: jump.jump_gprime,
        })
    }

    pub fn origin(&self) -> Point2 {
        self.frame.origin
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn jump(&self) -> f64 {
        self.jump_g
    }

    pub fn derivative_jump(&self) -> f64 {
        self.jump_gprime
    }

    /// Evaluates at local polar coordinates.
    pub fn eval_polar(&self, r: f64, theta: f64) -> f64 {
        if self.omega < std::f64::consts::PI {
            self.g_plus - theta / self.omega * self.jump_g
        } else {
            self.g_plus
                - (theta * self.jump_g + sigma(r, theta) * self.jump_gprime)
                    / std::f64::consts::PI
        }
    }

    /// Evaluates at a point of the closed domain other than the marker
    /// itself, where the function has no value.
    pub fn eval(&self, p: Point2) -> f64 {
        let (r, theta) = self.frame.to_polar(p);
        assert!(
            r > 0.0,
            "singular function evaluated at its own marker point ({}, {})",
            p.x,
            p.y
        );
        self.eval_polar(r, theta)
    }

    /// One-sided limit at the marker point itself: `g_plus` approaching
    /// along the outgoing segment, `g_minus` along the incoming one.
    pub fn limit_at_origin(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.g_plus,
            // theta -> omega kills the sigma term (sigma(r, pi) -> 0 with r),
            // so both branches converge to g_plus - [g] = g_minus.
            Side::Minus => self.g_plus - self.jump_g,
        }
    }

    /// Analytic gradient at `p != A`. Assembly never needs it (the load
    /// functional only integrates boundary values); it backs diagnostic
    /// checks. In frame coordinates `(xi, eta)` the angle has gradient
    /// `(-eta, xi) / r^2` and `sigma = eta ln r + theta xi` has gradient
    /// `(theta, ln r + 1)`.
    pub fn gradient(&self, p: Point2) -> Point2 {
        let v = p - self.frame.origin;
        let d = self.frame.zero_direction;
        let xi = d.dot(v);
        let eta = d.cross(v);
        let r2 = v.dot(v);
        assert!(r2 > 0.0, "gradient at the marker point is undefined");
        let (r, theta) = self.frame.to_polar(p);

        let pi = std::f64::consts::PI;
        let angle_coeff = if self.omega < pi { self.jump_g / self.omega } else { self.jump_g / pi };
        let mut g_xi = -angle_coeff * (-eta / r2);
        let mut g_eta = -angle_coeff * (xi / r2);
        if self.omega >= pi && self.jump_gprime != 0.0 {
            let c = self.jump_gprime / pi;
            g_xi -= c * theta;
            g_eta -= c * (r.ln() + 1.0);
        }
        // Back to global coordinates: the frame axes are d and perp(d).
        Point2::new(g_xi * d.x - g_eta * d.y, g_xi * d.y + g_eta * d.x)
    }
}

/// The auxiliary problem with regularized data: boundary values
/// `g_hat = g - sum Theta_i` (continuous), source `f_hat = f - mu sum Theta_i`,
/// and the list of singular functions that were split off.
#[derive(Clone)]
pub struct RegularizedProblem {
    domain: PolygonDomain,
    data: BoundaryData,
    source: FieldFn,
    reaction: FieldFn,
    singular: Vec<SingularFunction>,
}

impl RegularizedProblem {
    /// Computes the jumps of `data`, builds one singular function per marker
    /// where the data actually jumps, and bundles the regularized problem.
    ///
    /// A marker contributes when `[g] != 0`, or when the interior angle is
    /// pi and `[g'] != 0` (at sharper corners the derivative jump needs no
    /// correction).
    pub fn new(
        domain: &PolygonDomain,
        data: BoundaryData,
        source: FieldFn,
        reaction: FieldFn,
    ) -> Result<Self> {
        data.validate(domain)?;
        let mut singular = Vec::new();
        for jump in data.jumps(domain) {
            let omega = domain.interior_angle(jump.index)?;
            let straight = omega == std::f64::consts::PI;
            if jump.jump_g != 0.0 || (straight && jump.jump_gprime != 0.0) {
                let frame = domain.polar_frame(jump.index)?;
                singular.push(SingularFunction::new(frame, &jump)?);
            }
        }
        Ok(Self { domain: domain.clone(), data, source, reaction, singular })
    }

    pub fn domain(&self) -> &PolygonDomain {
        &self.domain
    }

    pub fn data(&self) -> &BoundaryData {
        &self.data
    }

    pub fn singular_parts(&self) -> &[SingularFunction] {
        &self.singular
    }

    /// Sum of all singular functions at `p` (zero when none were needed).
    pub fn singular_sum(&self, p: Point2) -> f64 {
        self.singular.iter().map(|s| s.eval(p)).sum()
    }

    /// Regularized boundary value on segment `i` at arc length `s`, for `s`
    /// strictly inside the segment.
    pub fn g_hat(&self, i: usize, s: f64) -> f64 {
        let p = self.domain.segment(i).point_at_arclength(s);
        self.data.value(i, s) - self.singular_sum(p)
    }

    /// One-sided limit of the regularized boundary value at marker `j`.
    /// The two sides agree for any data, which is the point of the split.
    pub fn g_hat_limit(&self, j: usize, side: Side) -> f64 {
        let m = self.domain.num_segments();
        let a = self.domain.discontinuity_points()[j];
        let g_limit = match side {
            Side::Plus => (self.data.trace(j).value)(0.0),
            Side::Minus => {
                let prev = (j + m - 1) % m;
                (self.data.trace(prev).value)(self.domain.segment(prev).length)
            }
        };
        let singular_limit: f64 = self
            .singular
            .iter()
            .map(|s| {
                if s.origin() == a {
                    s.limit_at_origin(side)
                } else {
                    s.eval(a)
                }
            })
            .sum();
        g_limit - singular_limit
    }

    /// Regularized source `f_hat(p) = f(p) - mu(p) * sum Theta_i(p)` at an
    /// interior point.
    pub fn f_hat(&self, p: Point2) -> f64 {
        let mu = (self.reaction)(p);
        let correction = if self.singular.is_empty() || mu == 0.0 {
            0.0
        } else {
            mu * self.singular_sum(p)
        };
        (self.source)(p) - correction
    }

    pub fn reaction(&self, p: Point2) -> f64 {
        (self.reaction)(p)
    }

    pub fn source(&self, p: Point2) -> f64 {
        (self.source)(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, PI};

    /// Domain and data of the split-rectangle problem: trace of
    /// `u = exp(-r^2) * theta` (global polar angle) on (-1,1) x (0,1),
    /// which jumps by -pi at the origin.
    pub(crate) fn split_domain() -> PolygonDomain {
        PolygonDomain::rectangle(-1.0, 1.0, 0.0, 1.0, &[Point2::new(0.0, 0.0)]).unwrap()
    }

    pub(crate) fn split_boundary_data(domain: &PolygonDomain) -> BoundaryData {
        // Traces of exp(-(x^2+y^2)) * atan2(y, x) per segment, with
        // hand-differentiated tangential derivatives. The two half-edges
        // meeting at the origin get exact closed forms so the one-sided
        // limits are exact.
        let trace_of = |start: Point2, tangent: Point2| {
            let value = move |s: f64| {
                let p = start + tangent.scale(s);
                let r2 = p.x * p.x + p.y * p.y;
                (-r2).exp() * p.y.atan2(p.x)
            };
            let derivative = move |s: f64| {
                let p = start + tangent.scale(s);
                let r2 = p.x * p.x + p.y * p.y;
                let theta = p.y.atan2(p.x);
                let radial = p.x * tangent.x + p.y * tangent.y;
                let angular = (p.x * tangent.y - p.y * tangent.x) / r2;
                (-r2).exp() * (-2.0 * radial * theta + angular)
            };
            EdgeTrace::new(value, derivative)
        };
        let m = domain.num_segments();
        let i0 = origin_index(domain);
        let mut traces = Vec::new();
        for (i, seg) in domain.segments().iter().enumerate() {
            if i == i0 {
                // Origin to (1, 0): the angle is identically zero.
                traces.push(EdgeTrace::constant(0.0));
            } else if i == (i0 + m - 1) % m {
                // (-1, 0) to origin: the angle is identically pi.
                traces.push(EdgeTrace::new(
                    move |s: f64| {
                        let x = s - 1.0;
                        PI * (-(x * x)).exp()
                    },
                    move |s: f64| {
                        let x = s - 1.0;
                        PI * (-(x * x)).exp() * (-2.0 * x)
                    },
                ));
            } else {
                traces.push(trace_of(seg.start, seg.tangent));
            }
        }
        BoundaryData::new(traces)
    }

    pub(crate) fn split_problem() -> RegularizedProblem {
        let domain = split_domain();
        let data = split_boundary_data(&domain);
        let source: FieldFn = Arc::new(|p: Point2| {
            let r2 = p.x * p.x + p.y * p.y;
            (-r2).exp() * (5.0 - 4.0 * r2) * p.y.atan2(p.x)
        });
        let reaction: FieldFn = Arc::new(|_| 1.0);
        RegularizedProblem::new(&domain, data, source, reaction).unwrap()
    }

    fn origin_index(domain: &PolygonDomain) -> usize {
        domain
            .discontinuity_points()
            .iter()
            .position(|p| p.norm() == 0.0)
            .unwrap()
    }

    #[test]
    fn one_sided_limits_at_the_origin() {
        let domain = split_domain();
        let data = split_boundary_data(&domain);
        let rec = data.one_sided_limits(&domain, origin_index(&domain));
        assert_eq!(rec.g_plus, 0.0);
        assert_relative_eq!(rec.g_minus, PI, epsilon = 1e-15);
        assert_relative_eq!(rec.jump_g, -PI, epsilon = 1e-15);
        assert_eq!(rec.gprime_plus, 0.0);
        assert_eq!(rec.gprime_minus, 0.0);
        assert_eq!(rec.jump_gprime, 0.0);
    }

    #[test]
    fn limits_continuous_at_true_corners() {
        let domain = split_domain();
        let data = split_boundary_data(&domain);
        for i in 0..domain.num_segments() {
            if i == origin_index(&domain) {
                continue;
            }
            let rec = data.one_sided_limits(&domain, i);
            assert_eq!(rec.jump_g, 0.0, "value jump at corner {i}");
        }
    }

    #[test]
    fn derivative_callables_match_finite_differences() {
        let domain = split_domain();
        let data = split_boundary_data(&domain);
        data.validate(&domain).unwrap();
    }

    #[test]
    fn validate_rejects_wrong_derivative() {
        let domain = split_domain();
        let mut traces: Vec<EdgeTrace> =
            (0..domain.num_segments()).map(|_| EdgeTrace::constant(1.0)).collect();
        traces[2] = EdgeTrace::new(|s| s * s, |_| 0.0);
        let data = BoundaryData::new(traces);
        assert!(matches!(data.validate(&domain), Err(FemError::InvalidBoundaryData(_))));
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(0.5, 0.0), 0.0);
        assert_eq!(sigma(2.0, 0.0), 0.0);
        assert_relative_eq!(sigma(1.0, PI / 2.0), 0.0, epsilon = 1e-16);
        // sigma(e, pi) = e (ln e sin pi + pi cos pi) = -pi e
        assert_relative_eq!(sigma(E, PI), -PI * E, epsilon = 1e-14);
        assert_eq!(sigma(0.0, 1.0), 0.0);
    }

    #[test]
    fn singular_function_recovers_one_sided_traces() {
        let frame = PolarFrame {
            origin: Point2::new(0.0, 0.0),
            zero_direction: Point2::new(1.0, 0.0),
            omega: PI / 2.0,
        };
        let jump = JumpRecord {
            index: 0,
            g_plus: 1.0,
            g_minus: 0.0,
            jump_g: 1.0,
            gprime_plus: 0.0,
            gprime_minus: 0.0,
            jump_gprime: 0.0,
        };
        let theta_fn = SingularFunction::new(frame, &jump).unwrap();
        // theta = 0 side recovers g_plus, theta = omega side recovers g_minus.
        assert_eq!(theta_fn.eval_polar(0.3, 0.0), 1.0);
        assert_eq!(theta_fn.eval_polar(0.7, PI / 2.0), 0.0);
    }

    #[test]
    fn split_case_singular_function_is_the_polar_angle() {
        let problem = split_problem();
        assert_eq!(problem.singular_parts().len(), 1);
        let theta_fn = &problem.singular_parts()[0];
        assert_relative_eq!(theta_fn.eval_polar(0.5, PI / 2.0), PI / 2.0, epsilon = 1e-15);
        for (r, theta) in [(0.1, 0.3), (0.9, PI - 0.2), (1.3, 1.0), (0.02, 2.8)] {
            assert_relative_eq!(theta_fn.eval_polar(r, theta), theta, epsilon = 1e-13);
        }
        // Through Cartesian evaluation as well.
        let p = Point2::new(0.3, 0.4);
        assert_relative_eq!(theta_fn.eval(p), p.y.atan2(p.x), epsilon = 1e-13);
    }

    #[test]
    #[should_panic(expected = "marker point")]
    fn eval_at_own_marker_is_rejected() {
        let problem = split_problem();
        problem.singular_parts()[0].eval(Point2::new(0.0, 0.0));
    }

    #[test]
    fn jump_reproduction_is_kronecker() {
        // Data with jumps at two markers of the split rectangle; each
        // singular function must reproduce exactly its own jump and leave
        // every other marker untouched.
        let domain = split_domain();
        let m = domain.num_segments();
        let mut traces = Vec::new();
        for i in 0..m {
            traces.push(EdgeTrace::constant(i as f64));
        }
        let data = BoundaryData::new(traces);
        let jumps = data.jumps(&domain);
        let singulars: Vec<SingularFunction> = jumps
            .iter()
            .filter(|j| j.jump_g != 0.0)
            .map(|j| SingularFunction::new(domain.polar_frame(j.index).unwrap(), j).unwrap())
            .collect();
        assert_eq!(singulars.len(), m); // piecewise constants jump everywhere

        // Small enough that the smooth variation of the off-marker
        // functions stays below the jump tolerance.
        let eps = 1.0e-12;
        for s in &singulars {
            for (j, a) in domain.discontinuity_points().iter().enumerate() {
                let plus_pt = domain.segment(j).point_at_arclength(eps);
                let prev = (j + m - 1) % m;
                let prev_len = domain.segment(prev).length;
                let minus_pt = domain.segment(prev).point_at_arclength(prev_len - eps);
                let observed = s.eval(plus_pt) - s.eval(minus_pt);
                let expected = if s.origin() == *a { jumps[j].jump_g } else { 0.0 };
                assert!(
                    (observed - expected).abs() <= 1e-10,
                    "jump of marker-{:?} function at marker {j}: {observed} vs {expected}",
                    s.origin()
                );
            }
        }
    }

    #[test]
    fn derivative_jump_reproduction_at_straight_marker() {
        // Synthetic data on the split rectangle: value continuous at the
        // origin but with a tangential-derivative jump there.
        let domain = split_domain();
        let m = domain.num_segments();
        let i0 = origin_index(&domain);
        let mut traces: Vec<EdgeTrace> = (0..m).map(|_| EdgeTrace::constant(0.0)).collect();
        // Outgoing segment (origin -> (1,0)): g = s => slope 1.
        traces[i0] = EdgeTrace::new(|s| s, |_| 1.0);
        // Incoming segment ((-1,0) -> origin): g = 2(1-s) - 2... choose
        // g = 2(s-1) so g(end) = 0 and the CCW derivative is 2.
        traces[(i0 + m - 1) % m] = EdgeTrace::new(|s| 2.0 * (s - 1.0), |_| 2.0);
        // Keep the remaining traces consistent at their corners: all those
        // corner values are 0 except segment i0 ends at (1,0) with value 1,
        // so make the next segment start at 1 and decay to 0.
        traces[(i0 + 1) % m] = EdgeTrace::new(|s| 1.0 - s, |_| -1.0);
        let data = BoundaryData::new(traces);

        let rec = data.one_sided_limits(&domain, i0);
        assert_eq!(rec.jump_g, 0.0);
        assert_eq!(rec.jump_gprime, -1.0); // 1 - 2

        let frame = domain.polar_frame(i0).unwrap();
        let theta_fn = SingularFunction::new(frame, &rec).unwrap();

        // One-sided second-order finite differences of the boundary trace of
        // Theta along both segments, swept over step sizes.
        let seg_plus = domain.segment(i0);
        let prev = (i0 + m - 1) % m;
        let seg_minus = domain.segment(prev);
        let best = [1e-2, 1e-3, 1e-4, 1e-5]
            .iter()
            .map(|&h| {
                let f = |s: f64| theta_fn.eval(seg_plus.point_at_arclength(s));
                let d_plus =
                    (4.0 * f(h) - f(2.0 * h) - 3.0 * theta_fn.limit_at_origin(Side::Plus))
                        / (2.0 * h);
                let g = |s: f64| theta_fn.eval(seg_minus.point_at_arclength(seg_minus.length - s));
                // g measures distance from the marker against the CCW
                // direction, so the CCW derivative flips sign.
                let d_minus =
                    -(4.0 * g(h) - g(2.0 * h) - 3.0 * theta_fn.limit_at_origin(Side::Minus))
                        / (2.0 * h);
                (d_plus - d_minus - rec.jump_gprime).abs()
            })
            .fold(f64::MAX, f64::min);
        assert!(best <= 1e-8, "derivative-jump reproduction error {best:.3e}");
    }

    #[test]
    fn derivative_jump_vanishes_at_other_straight_markers() {
        // Two mid-edge markers: a function splitting the jump at the bottom
        // one must leave no tangential-derivative jump at the top one.
        let domain = PolygonDomain::rectangle(
            -1.0,
            1.0,
            0.0,
            1.0,
            &[Point2::new(0.0, 0.0), Point2::new(0.0, 1.0)],
        )
        .unwrap();
        let bottom = domain
            .discontinuity_points()
            .iter()
            .position(|p| p.norm() == 0.0)
            .unwrap();
        let top = domain
            .discontinuity_points()
            .iter()
            .position(|p| p.x == 0.0 && p.y == 1.0)
            .unwrap();
        assert_eq!(domain.interior_angle(top).unwrap(), PI);
        let jump = JumpRecord {
            index: bottom,
            g_plus: 0.0,
            g_minus: 1.0,
            jump_g: -1.0,
            gprime_plus: 2.0,
            gprime_minus: 0.0,
            jump_gprime: 2.0,
        };
        let s = SingularFunction::new(domain.polar_frame(bottom).unwrap(), &jump).unwrap();

        let m = domain.num_segments();
        let out_seg = domain.segment(top);
        let prev = (top + m - 1) % m;
        let in_seg = domain.segment(prev);
        let at = domain.discontinuity_points()[top];
        let best = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&h| {
                let f = |s_: f64| s.eval(out_seg.point_at_arclength(s_));
                let d_plus = (4.0 * f(h) - f(2.0 * h) - 3.0 * s.eval(at)) / (2.0 * h);
                let g = |s_: f64| s.eval(in_seg.point_at_arclength(in_seg.length - s_));
                let d_minus = -(4.0 * g(h) - g(2.0 * h) - 3.0 * s.eval(at)) / (2.0 * h);
                (d_plus - d_minus).abs()
            })
            .fold(f64::MAX, f64::min);
        assert!(best <= 1e-8, "spurious derivative jump {best:.3e} at the other marker");
    }

    #[test]
    fn singular_functions_are_harmonic() {
        // Five-point Laplacian of Theta at interior points decays at
        // second order in the step, as it must for a harmonic function.
        let problem = split_problem();
        let theta_fn = &problem.singular_parts()[0];
        check_harmonic(|p| theta_fn.eval(p));
        // A straight-marker function with a derivative jump exercises the
        // sigma term as well.
        let domain = split_domain();
        let i0 = origin_index(&domain);
        let jump = JumpRecord {
            index: i0,
            g_plus: 0.5,
            g_minus: 0.0,
            jump_g: 0.5,
            gprime_plus: 2.0,
            gprime_minus: -1.0,
            jump_gprime: 3.0,
        };
        let s = SingularFunction::new(domain.polar_frame(i0).unwrap(), &jump).unwrap();
        check_harmonic(|p| s.eval(p));
        // And sigma itself.
        check_harmonic(|p| sigma(p.norm(), p.y.atan2(p.x)));
    }

    fn check_harmonic(f: impl Fn(Point2) -> f64) {
        let lap = |p: Point2, h: f64| {
            (f(Point2::new(p.x + h, p.y))
                + f(Point2::new(p.x - h, p.y))
                + f(Point2::new(p.x, p.y + h))
                + f(Point2::new(p.x, p.y - h))
                - 4.0 * f(p))
                / (h * h)
        };
        // Deterministic sample points in a band well inside the domain and
        // away from the origin.
        let mut state: u64 = 0x9e3779b97f4a7c15;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let r = 0.25 + 0.2 * next();
            let theta = 0.3 + (PI - 0.6) * next();
            let p = Point2::new(r * theta.cos(), r * theta.sin());
            let l1 = lap(p, 1.0e-2).abs();
            let l2 = lap(p, 5.0e-3).abs();
            if l2 < 1.0e-11 {
                continue; // already at roundoff; nothing to rate
            }
            let rate = (l1 / l2).log2();
            assert!(
                rate > 1.5 && rate < 2.5,
                "five-point Laplacian at ({}, {}) decays at rate {rate:.2}",
                p.x,
                p.y
            );
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let domain = split_domain();
        let i0 = origin_index(&domain);
        // Straight marker with both jumps active, and a corner marker.
        let straight = SingularFunction::new(
            domain.polar_frame(i0).unwrap(),
            &JumpRecord {
                index: i0,
                g_plus: 0.3,
                g_minus: 1.0,
                jump_g: -0.7,
                gprime_plus: 1.5,
                gprime_minus: 0.25,
                jump_gprime: 1.25,
            },
        )
        .unwrap();
        let corner_idx = (i0 + 1) % domain.num_segments();
        let corner = SingularFunction::new(
            domain.polar_frame(corner_idx).unwrap(),
            &JumpRecord {
                index: corner_idx,
                g_plus: 2.0,
                g_minus: -1.0,
                jump_g: 3.0,
                gprime_plus: 0.0,
                gprime_minus: 0.0,
                jump_gprime: 0.0,
            },
        )
        .unwrap();
        let h = 1.0e-6;
        for s in [&straight, &corner] {
            for p in [Point2::new(0.2, 0.3), Point2::new(-0.4, 0.6), Point2::new(0.7, 0.1)] {
                let g = s.gradient(p);
                let fdx = (s.eval(Point2::new(p.x + h, p.y)) - s.eval(Point2::new(p.x - h, p.y)))
                    / (2.0 * h);
                let fdy = (s.eval(Point2::new(p.x, p.y + h)) - s.eval(Point2::new(p.x, p.y - h)))
                    / (2.0 * h);
                assert_relative_eq!(g.x, fdx, epsilon = 1e-8, max_relative = 1e-7);
                assert_relative_eq!(g.y, fdy, epsilon = 1e-8, max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn sigma_is_the_imaginary_part_of_z_ln_z() {
        // With z = xi + i eta: Im(z ln z) = eta ln r + theta xi.
        for (r, theta) in [(0.3, 0.4), (1.7, 2.9), (0.01, 3.0), (2.0, 0.1)] {
            let (xi, eta) = (r * f64::cos(theta), r * f64::sin(theta));
            let through_z = eta * f64::ln(f64::hypot(xi, eta)) + f64::atan2(eta, xi) * xi;
            assert_relative_eq!(sigma(r, theta), through_z, epsilon = 1e-12);
        }
    }

    #[test]
    fn g_hat_is_continuous_at_every_marker() {
        let problem = split_problem();
        let domain = problem.domain();
        for j in 0..domain.num_segments() {
            let plus = problem.g_hat_limit(j, Side::Plus);
            let minus = problem.g_hat_limit(j, Side::Minus);
            assert!(
                (plus - minus).abs() <= 1e-12,
                "g_hat jump {:.3e} at marker {j}",
                plus - minus
            );
        }
        // At the origin both limits are zero for this data.
        let i0 = origin_index(domain);
        assert_relative_eq!(problem.g_hat_limit(i0, Side::Plus), 0.0, epsilon = 1e-15);
        assert_relative_eq!(problem.g_hat_limit(i0, Side::Minus), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn continuous_data_needs_no_singular_parts() {
        let domain = PolygonDomain::rectangle(0.0, 1.0, 0.0, 1.0, &[]).unwrap();
        let data = BoundaryData::from_field(
            &domain,
            Arc::new(|p: Point2| p.x + p.y),
            Arc::new(|_| Point2::new(1.0, 1.0)),
        );
        let problem = RegularizedProblem::new(
            &domain,
            data,
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
        )
        .unwrap();
        assert!(problem.singular_parts().is_empty());
        // g_hat equals g pointwise.
        for i in 0..domain.num_segments() {
            let s = 0.37 * domain.segment(i).length;
            let p = domain.segment(i).point_at_arclength(s);
            assert_eq!(problem.g_hat(i, s), p.x + p.y);
        }
    }

    #[test]
    fn f_hat_of_the_split_case() {
        let problem = split_problem();
        for p in [Point2::new(0.3, 0.2), Point2::new(-0.5, 0.7), Point2::new(0.9, 0.05)] {
            let r2 = p.x * p.x + p.y * p.y;
            let theta = p.y.atan2(p.x);
            let expected = ((5.0 - 4.0 * r2) * (-r2).exp() - 1.0) * theta;
            assert_relative_eq!(problem.f_hat(p), expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn f_hat_without_reaction_or_singulars() {
        let domain = split_domain();
        let data = split_boundary_data(&domain);
        let source: FieldFn = Arc::new(|p: Point2| p.x * p.y);
        let problem =
            RegularizedProblem::new(&domain, data, source.clone(), Arc::new(|_| 0.0)).unwrap();
        // mu = 0 leaves the source untouched even though a singular part exists.
        assert_eq!(problem.singular_parts().len(), 1);
        let p = Point2::new(0.25, 0.5);
        assert_eq!(problem.f_hat(p), 0.125);

        // No singular parts: f_hat = f regardless of mu.
        let square = PolygonDomain::rectangle(0.0, 1.0, 0.0, 1.0, &[]).unwrap();
        let zero: Vec<EdgeTrace> = (0..4).map(|_| EdgeTrace::constant(0.0)).collect();
        let problem = RegularizedProblem::new(
            &square,
            BoundaryData::new(zero),
            source,
            Arc::new(|_| 3.0),
        )
        .unwrap();
        assert_eq!(problem.f_hat(p), 0.125);
    }
}
