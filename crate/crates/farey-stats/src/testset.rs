//! Bounded test sets on the torus and in `R^n`: boxes in two boundary
//! flavors and origin-centered balls, with exact volumes and the scaled
//! translate membership predicate shared by every counting route.

use crate::error::{Error, Result};
use crate::exact::cmp_ratio_f64;
use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

/// Boundary convention for box test sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxFlavor {
    /// `[lo, hi)` per axis (default).
    HalfOpen,
    /// `(lo, hi]` per axis; matches the one-dimensional gap convention `(0, s]`.
    OpenClosed,
}

#[derive(Debug, Clone)]
enum Shape {
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        flavor: BoxFlavor,
    },
    /// Open ball centered at the origin.
    Ball { radius: f64 },
}

/// A bounded region with positive volume, exact volume formula and
/// deterministic membership conventions.
#[derive(Debug, Clone)]
pub struct TestSet {
    dim: usize,
    shape: Shape,
}

/// Volume of the unit ball in dimension `n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * PI / n as f64,
    }
}

impl TestSet {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>, flavor: BoxFlavor) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidTestSet(
                "box needs equal, nonzero lo/hi lengths".into(),
            ));
        }
        for (&a, &b) in lo.iter().zip(&hi) {
            if !a.is_finite() || !b.is_finite() || a.abs() > 8.0 || b.abs() > 8.0 {
                return Err(Error::InvalidTestSet(format!(
                    "box bounds must be finite and within [-8, 8], got [{a}, {b}]"
                )));
            }
            if !(b > a) {
                return Err(Error::InvalidTestSet(format!(
                    "degenerate box axis [{a}, {b}] has no interior"
                )));
            }
        }
        let dim = lo.len();
        Ok(TestSet {
            dim,
            shape: Shape::Box { lo, hi, flavor },
        })
    }

    /// The 1-D set `(0, s]` used for gap statistics.
    pub fn interval_oc(s: f64) -> Result<Self> {
        Self::boxed(vec![0.0], vec![s], BoxFlavor::OpenClosed)
    }

    /// `[0, s)`.
    pub fn interval_ho(s: f64) -> Result<Self> {
        Self::boxed(vec![0.0], vec![s], BoxFlavor::HalfOpen)
    }

    /// The full torus `[0,1)^n`.
    pub fn full_torus(dim: usize) -> Self {
        Self::boxed(vec![0.0; dim], vec![1.0; dim], BoxFlavor::HalfOpen)
            .expect("unit box is valid")
    }

    /// Open ball of the given radius centered at the origin.
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidTestSet("ball needs dimension >= 1".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() || radius > 8.0 {
            return Err(Error::InvalidTestSet(format!(
                "ball radius must be in (0, 8], got {radius}"
            )));
        }
        Ok(TestSet {
            dim,
            shape: Shape::Ball { radius },
        })
    }

    /// Open ball with a prescribed volume.
    pub fn ball_with_volume(dim: usize, volume: f64) -> Result<Self> {
        if !(volume > 0.0) {
            return Err(Error::InvalidTestSet("ball volume must be positive".into()));
        }
        Self::ball(dim, (volume / unit_ball_volume(dim)).powf(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn volume(&self) -> f64 {
        match &self.shape {
            Shape::Box { lo, hi, .. } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            Shape::Ball { radius } => unit_ball_volume(self.dim) * radius.powi(self.dim as i32),
        }
    }

    /// Largest axis-aligned extent; the torus-wrap conditions are stated in
    /// terms of this.
    pub fn max_axis_diameter(&self) -> f64 {
        match &self.shape {
            Shape::Box { lo, hi, .. } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| b - a)
                .fold(0.0f64, f64::max),
            Shape::Ball { radius } => 2.0 * radius,
        }
    }

    pub fn is_ball(&self) -> bool {
        matches!(self.shape, Shape::Ball { .. })
    }

    /// Parses the test-set DSL: `box:lo,hi[;lo,hi...]`, `boxoc:...` for the
    /// open-low/closed-high flavor, `ball:r`, `ballvol:v`.
    pub fn parse(spec: &str, dim: usize) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("malformed test set `{spec}`")))?;
        let parse_f = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad number `{s}` in `{spec}`")))
        };
        let set = match kind {
            "box" | "boxoc" => {
                let flavor = if kind == "box" {
                    BoxFlavor::HalfOpen
                } else {
                    BoxFlavor::OpenClosed
                };
                let mut lo = Vec::new();
                let mut hi = Vec::new();
                for axis in rest.split(';') {
                    let (a, b) = axis.split_once(',').ok_or_else(|| {
                        Error::InvalidArgument(format!("axis `{axis}` needs `lo,hi`"))
                    })?;
                    lo.push(parse_f(a)?);
                    hi.push(parse_f(b)?);
                }
                TestSet::boxed(lo, hi, flavor)?
            }
            "ball" => TestSet::ball(dim, parse_f(rest)?)?,
            "ballvol" => TestSet::ball_with_volume(dim, parse_f(rest)?)?,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown test set kind `{other}`"
                )))
            }
        };
        if set.dim() != dim {
            return Err(Error::InvalidArgument(format!(
                "test set `{spec}` has dimension {} but --dim is {dim}",
                set.dim()
            )));
        }
        Ok(set)
    }

    /// A descriptor string in the same DSL, recorded in output metadata.
    pub fn descriptor(&self) -> String {
        match &self.shape {
            Shape::Box { lo, hi, flavor } => {
                let axes: Vec<String> = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| format!("{a},{b}"))
                    .collect();
                let kind = match flavor {
                    BoxFlavor::HalfOpen => "box",
                    BoxFlavor::OpenClosed => "boxoc",
                };
                format!("{kind}:{}", axes.join(";"))
            }
            Shape::Ball { radius } => format!("ball:{radius}"),
        }
    }
}

impl fmt::Display for TestSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

/// The translate `x + delta * A` on the torus, with thresholds fixed once at
/// construction so that every counting route resolves boundary points
/// identically.
///
/// Box membership is exact: each axis compares the integer numerator of the
/// candidate against the `f64` threshold through [`cmp_ratio_f64`]. Ball
/// membership is floating point with a documented `1e-12` relative slack;
/// candidates are reduced to canonical residues first so that the arithmetic
/// is independent of the integer representative.
#[derive(Debug, Clone)]
pub struct ScaledTranslate {
    dim: usize,
    delta: f64,
    kind: TranslateKind,
}

#[derive(Debug, Clone)]
enum TranslateKind {
    Box {
        t_lo: Vec<f64>,
        t_hi: Vec<f64>,
        flavor: BoxFlavor,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        rsq: f64,
    },
}

impl ScaledTranslate {
    /// Builds the translate for counting `F_Q` inside `x + delta*A`.
    /// Requires `delta * diam(A) < 1` on every axis.
    pub fn new(x: &[f64], delta: f64, set: &TestSet) -> Result<Self> {
        let d = delta * set.max_axis_diameter();
        if !(d < 1.0) {
            return Err(Error::TestSetTooLarge { diameter: d });
        }
        Self::build(x, delta, set)
    }

    /// Region variant used for `D`-membership: axis widths up to exactly 1
    /// are allowed, so the full torus is expressible.
    pub fn region(set: &TestSet) -> Result<Self> {
        let d = set.max_axis_diameter();
        if d > 1.0 {
            return Err(Error::TestSetTooLarge { diameter: d });
        }
        Self::build(&vec![0.0; set.dim()], 1.0, set)
    }

    fn build(x: &[f64], delta: f64, set: &TestSet) -> Result<Self> {
        if x.len() != set.dim() {
            return Err(Error::InvalidArgument(
                "translate point dimension mismatch".into(),
            ));
        }
        if x.iter().any(|v| !(0.0..1.0).contains(v)) {
            return Err(Error::InvalidArgument(
                "translate base point must lie in [0,1)^n".into(),
            ));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        let kind = match &set.shape {
            Shape::Box { lo, hi, flavor } => {
                let t_lo: Vec<f64> = x.iter().zip(lo).map(|(&x, &l)| x + delta * l).collect();
                let t_hi: Vec<f64> = x.iter().zip(hi).map(|(&x, &h)| x + delta * h).collect();
                for (&a, &b) in t_lo.iter().zip(&t_hi) {
                    if !(-1.0..=2.0).contains(&a) || !(-1.0..=2.0).contains(&b) {
                        return Err(Error::InvalidArgument(format!(
                            "translate thresholds [{a}, {b}] leave the wrap window (-1, 2)"
                        )));
                    }
                }
                TranslateKind::Box {
                    t_lo,
                    t_hi,
                    flavor: *flavor,
                }
            }
            Shape::Ball { radius } => {
                let r = delta * radius;
                TranslateKind::Ball {
                    center: x.to_vec(),
                    radius: r,
                    rsq: r * r,
                }
            }
        };
        Ok(ScaledTranslate {
            dim: set.dim(),
            delta,
            kind,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Covering interval on one axis (unwrapped), for cell and candidate
    /// enumeration. Padding for boundary safety is the caller's business.
    pub fn cover(&self, axis: usize) -> (f64, f64) {
        match &self.kind {
            TranslateKind::Box { t_lo, t_hi, .. } => (t_lo[axis], t_hi[axis]),
            TranslateKind::Ball { center, radius, .. } => {
                (center[axis] - radius, center[axis] + radius)
            }
        }
    }

    #[inline]
    fn box_axis(&self, lo: f64, hi: f64, flavor: BoxFlavor, num: i64, q: i64) -> bool {
        match flavor {
            BoxFlavor::HalfOpen => {
                cmp_ratio_f64(num, q, lo) != Ordering::Less
                    && cmp_ratio_f64(num, q, hi) == Ordering::Less
            }
            BoxFlavor::OpenClosed => {
                cmp_ratio_f64(num, q, lo) == Ordering::Greater
                    && cmp_ratio_f64(num, q, hi) != Ordering::Greater
            }
        }
    }

    /// Membership of the canonical Farey point `p/q` (`0 <= p_i < q`) in the
    /// translate modulo `Z^n`.
    #[inline]
    pub fn contains_wrapped<I>(&self, p: I, q: i64) -> bool
    where
        I: IntoIterator<Item = i64>,
    {
        match &self.kind {
            TranslateKind::Box { t_lo, t_hi, flavor } => {
                for (axis, pi) in p.into_iter().enumerate() {
                    let (lo, hi) = (t_lo[axis], t_hi[axis]);
                    // at most one shift k in {-1,0,1} can match since the
                    // translate is narrower than the torus
                    let hit = self.box_axis(lo, hi, *flavor, pi, q)
                        || self.box_axis(lo, hi, *flavor, pi + q, q)
                        || self.box_axis(lo, hi, *flavor, pi - q, q);
                    if !hit {
                        return false;
                    }
                }
                true
            }
            TranslateKind::Ball { center, rsq, .. } => {
                let mut dist2 = 0.0f64;
                for (axis, pi) in p.into_iter().enumerate() {
                    let mut d = pi as f64 / q as f64 - center[axis];
                    if d < -0.5 {
                        d += 1.0;
                    } else if d >= 0.5 {
                        d -= 1.0;
                    }
                    dist2 += d * d;
                }
                dist2 < *rsq
            }
        }
    }

    /// Membership of an arbitrary integer vector `p/q` without wrapping, as
    /// used by the direct lattice-cone count. Balls reduce to canonical
    /// residues internally so both routes share identical arithmetic.
    #[inline]
    pub fn contains_unwrapped(&self, p: &[i64], q: i64) -> bool {
        match &self.kind {
            TranslateKind::Box { t_lo, t_hi, flavor } => p
                .iter()
                .enumerate()
                .all(|(axis, &pi)| self.box_axis(t_lo[axis], t_hi[axis], *flavor, pi, q)),
            TranslateKind::Ball { .. } => {
                self.contains_wrapped(p.iter().map(|&pi| pi.rem_euclid(q)), q)
            }
        }
    }

    pub fn is_box(&self) -> bool {
        matches!(self.kind, TranslateKind::Box { .. })
    }

    /// `(lo, hi, open_low)` thresholds for one axis of a box translate.
    fn box_thresholds(&self, axis: usize) -> (f64, f64, bool) {
        match &self.kind {
            TranslateKind::Box { t_lo, t_hi, flavor } => {
                (t_lo[axis], t_hi[axis], *flavor == BoxFlavor::OpenClosed)
            }
            TranslateKind::Ball { .. } => unreachable!("box thresholds on a ball translate"),
        }
    }

    /// Flavor-aware boundary check for the rational `num/den` against the
    /// lower (`lower = true`) or upper threshold; used by the whole-cell
    /// shortcut in the grid index.
    pub(crate) fn box_axis_check(&self, axis: usize, num: i64, den: i64, lower: bool) -> bool {
        let (lo, hi, open_low) = self.box_thresholds(axis);
        if lower {
            let c = cmp_ratio_f64(num, den, lo);
            if open_low {
                c == Ordering::Greater
            } else {
                c != Ordering::Less
            }
        } else {
            let c = cmp_ratio_f64(num, den, hi);
            if open_low {
                c != Ordering::Greater
            } else {
                c == Ordering::Less
            }
        }
    }

    /// True when a cell whose exclusive upper endpoint is `num/den` stays
    /// within the upper threshold, so every point of the cell is below it.
    pub(crate) fn box_axis_upper_ok(&self, axis: usize, num: i64, den: i64) -> bool {
        let (_, hi, _) = self.box_thresholds(axis);
        cmp_ratio_f64(num, den, hi) != Ordering::Greater
    }

    /// Monotone bisection predicate: is `num/den` strictly below the prefix
    /// boundary of the selected threshold under the set's flavor.
    pub(crate) fn below_threshold(
        &self,
        axis: usize,
        num: i64,
        den: i64,
        hi_threshold: bool,
    ) -> bool {
        let (lo, hi, open_low) = self.box_thresholds(axis);
        let t = if hi_threshold { hi } else { lo };
        let c = cmp_ratio_f64(num, den, t);
        if open_low {
            // (lo, hi]: prefix is value <= t
            c != Ordering::Greater
        } else {
            // [lo, hi): prefix is value < t
            c == Ordering::Less
        }
    }

    /// Distance-squared margin of the nearest candidate to the ball boundary,
    /// used by acceptance runs to confirm no decision was within slack.
    /// Returns `None` for boxes (exact arithmetic needs no margin).
    pub fn ball_boundary_margin<I>(&self, p: I, q: i64) -> Option<f64>
    where
        I: IntoIterator<Item = i64>,
    {
        match &self.kind {
            TranslateKind::Box { .. } => None,
            TranslateKind::Ball { center, rsq, .. } => {
                let mut dist2 = 0.0f64;
                for (axis, pi) in p.into_iter().enumerate() {
                    let mut d = pi as f64 / q as f64 - center[axis];
                    if d < -0.5 {
                        d += 1.0;
                    } else if d >= 0.5 {
                        d -= 1.0;
                    }
                    dist2 += d * d;
                }
                Some((dist2 - rsq).abs())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_boxes() {
        assert!(TestSet::boxed(vec![0.3], vec![0.3], BoxFlavor::HalfOpen).is_err());
        assert!(TestSet::boxed(vec![0.5], vec![0.2], BoxFlavor::HalfOpen).is_err());
        assert!(TestSet::boxed(vec![], vec![], BoxFlavor::HalfOpen).is_err());
        assert!(TestSet::ball(2, 0.0).is_err());
        assert!(TestSet::ball(2, f64::NAN).is_err());
    }

    #[test]
    fn volumes() {
        let b = TestSet::boxed(vec![0.0, -1.0], vec![0.5, 1.0], BoxFlavor::HalfOpen).unwrap();
        assert!((b.volume() - 1.0).abs() < 1e-15);
        assert!((TestSet::ball(2, 1.0).unwrap().volume() - PI).abs() < 1e-12);
        assert!((TestSet::ball(3, 2.0).unwrap().volume() - 4.0 / 3.0 * PI * 8.0).abs() < 1e-12);
        let unit = TestSet::ball_with_volume(2, 1.0).unwrap();
        assert!((unit.volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parse_round_trip() {
        for spec in ["box:0,1", "boxoc:0,2.5", "box:0,0.5;-1,1", "ball:0.75"] {
            let dim = if spec.contains(';') { 2 } else { 1 };
            let dim = if spec.starts_with("ball") { 2 } else { dim };
            let set = TestSet::parse(spec, dim).unwrap();
            assert_eq!(set.descriptor(), spec);
        }
        assert!(TestSet::parse("box:0,1", 2).is_err());
        assert!(TestSet::parse("blob:1", 1).is_err());
        assert!(TestSet::parse("ball:x", 1).is_err());
    }

    #[test]
    fn translate_size_guard() {
        let a = TestSet::interval_oc(1.0).unwrap();
        assert!(ScaledTranslate::new(&[0.0], 1.0, &a).is_err());
        assert!(ScaledTranslate::new(&[0.0], 0.999, &a).is_ok());
        let torus = TestSet::full_torus(1);
        assert!(ScaledTranslate::region(&torus).is_ok());
    }

    #[test]
    fn wrapped_box_membership() {
        // x = 0.9, A = [0, 0.3), delta = 1: covers [0.9, 1.2) ~ [0.9,1) u [0,0.2)
        let a = TestSet::interval_ho(0.3).unwrap();
        let t = ScaledTranslate::new(&[0.9], 1.0, &a).unwrap();
        // 19/20 = 0.95 in; 1/10 = 0.1 in; 1/2 out; 9/10 = 0.9 in (closed low)
        assert!(t.contains_wrapped([19], 20));
        assert!(t.contains_wrapped([1], 10));
        assert!(!t.contains_wrapped([1], 2));
        assert!(t.contains_wrapped([9], 10));
        // 0.2 excluded (half-open high): 1/5
        assert!(!t.contains_wrapped([1], 5));
    }

    #[test]
    fn open_closed_flavor_excludes_zero() {
        // A = (0, s]: the reference point itself (difference 0) is excluded
        let a = TestSet::interval_oc(0.5).unwrap();
        let t = ScaledTranslate::new(&[0.0], 0.9, &a).unwrap();
        assert!(!t.contains_wrapped([0], 1));
        // 0.45 = 9/20 <= 0.45 boundary: threshold is exactly x + 0.9*0.5 = 0.45
        assert!(t.contains_wrapped([9], 20));
        assert!(!t.contains_wrapped([1], 2));
    }

    #[test]
    fn unwrapped_matches_wrapped_on_representatives() {
        let a = TestSet::boxed(vec![-0.2], vec![0.4], BoxFlavor::HalfOpen).unwrap();
        let t = ScaledTranslate::new(&[0.95], 0.5, &a).unwrap();
        for q in 1..40i64 {
            for p in 0..q {
                let wrapped = t.contains_wrapped([p], q);
                let any_rep = (-2..=2).any(|k| t.contains_unwrapped(&[p + k * q], q));
                assert_eq!(wrapped, any_rep, "p={p} q={q}");
            }
        }
    }

    #[test]
    fn ball_membership_wraps() {
        let a = TestSet::ball(2, 1.0).unwrap();
        let t = ScaledTranslate::new(&[0.05, 0.95], 0.1, &a).unwrap();
        // (0.0, 0.0): wrapped distance (0.05, -0.05), norm^2 = 0.005 < 0.01
        assert!(t.contains_wrapped([0, 0], 1));
        // (1/2, 1/2): far away
        assert!(!t.contains_wrapped([1, 1], 2));
    }
}
