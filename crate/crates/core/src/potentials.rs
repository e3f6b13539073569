//! Electric potential, pseudoscalar profile θ(z), turn-on ramp and the
//! auxiliary fields `f` and `U` of the interpolating Hamiltonian.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Piecewise-constant profile on the box: `values[i]` holds on
/// `[edges[i], edges[i+1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepProfile {
    edges: Vec<f64>,
    values: Vec<f64>,
}

impl StepProfile {
    /// Builds a profile from interior breakpoints `(z_start, value)`; the
    /// first entry must start at the left box edge.
    pub fn from_steps(steps: &[(f64, f64)], box_len: f64) -> Result<Self> {
        let half = 0.5 * box_len;
        if steps.is_empty() {
            return Err(Error::InvalidConfig {
                field: "profile",
                reason: "step table is empty".into(),
            });
        }
        if (steps[0].0 + half).abs() > 1e-12 * box_len {
            return Err(Error::InvalidConfig {
                field: "profile",
                reason: format!("first step must start at -L/2 = {}, got {}", -half, steps[0].0),
            });
        }
        let mut edges = vec![-half];
        let mut values = vec![steps[0].1];
        for w in steps.windows(2) {
            let (z, v) = w[1];
            if !(z > w[0].0 && z < half) {
                return Err(Error::InvalidConfig {
                    field: "profile",
                    reason: format!("step positions must increase inside the box, got {z}"),
                });
            }
            edges.push(z);
            values.push(v);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig {
                field: "profile",
                reason: "non-finite value".into(),
            });
        }
        edges.push(half);
        Ok(StepProfile { edges, values })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn value(&self, z: f64) -> f64 {
        let i = self.edges[1..].partition_point(|&e| e <= z);
        self.values[i.min(self.values.len() - 1)]
    }

    fn mean(&self) -> f64 {
        let len = self.edges[self.edges.len() - 1] - self.edges[0];
        self.edges
            .windows(2)
            .zip(&self.values)
            .map(|(e, v)| (e[1] - e[0]) * v)
            .sum::<f64>()
            / len
    }
}

/// Shape of the electric potential.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialShape {
    /// `−η` for `|z| < a/2`, zero outside.
    SquareWell,
    /// User-supplied piecewise-constant table.
    Steps(StepProfile),
}

/// Physical and numerical parameters shared by every module.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialConfig {
    pub m: f64,
    pub eta: f64,
    pub a: f64,
    pub box_len: f64,
    pub cutoff: usize,
    pub compensate: bool,
    pub lambda_damp: Option<f64>,
    pub shape: PotentialShape,
    /// Optional static position-dependent mass; `m` is used when absent.
    pub mass_profile: Option<StepProfile>,
}

impl PotentialConfig {
    /// Reference square well: `m = 1`, `η = 0.5`, `a = 4`, `L = 40`, `N = 256`.
    pub fn reference() -> Self {
        PotentialConfig {
            m: 1.0,
            eta: 0.5,
            a: 4.0,
            box_len: 40.0,
            cutoff: 256,
            compensate: true,
            lambda_damp: None,
            shape: PotentialShape::SquareWell,
            mass_profile: None,
        }
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: String| Err(Error::InvalidConfig { field, reason });
        if !(self.m.is_finite() && self.m > 0.0) {
            return bad("m", format!("must be positive, got {}", self.m));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0 && self.eta <= self.m) {
            return bad("eta", format!("must satisfy 0 <= eta <= m = {}, got {}", self.m, self.eta));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return bad("a", format!("must be positive, got {}", self.a));
        }
        if !(self.box_len.is_finite() && self.box_len >= 4.0 * self.a) {
            return bad("L", format!("must be at least 4a = {}, got {}", 4.0 * self.a, self.box_len));
        }
        if self.cutoff < 16 {
            return bad("N", format!("must be at least 16, got {}", self.cutoff));
        }
        if let Some(l) = self.lambda_damp {
            if !(l.is_finite() && l > 0.0) {
                return bad("Lambda_damp", format!("must be positive, got {l}"));
            }
        }
        for (field, p) in [
            ("profile", match &self.shape {
                PotentialShape::Steps(p) => Some(p),
                PotentialShape::SquareWell => None,
            }),
            ("mass_profile", self.mass_profile.as_ref()),
        ] {
            if let Some(p) = p {
                let (lo, hi) = (p.edges[0], p.edges[p.edges.len() - 1]);
                if (lo + 0.5 * self.box_len).abs() > 1e-9 || (hi - 0.5 * self.box_len).abs() > 1e-9 {
                    return bad(field, "table does not span the box".into());
                }
            }
        }
        if let Some(mp) = &self.mass_profile {
            if mp.values.iter().any(|&v| v <= 0.0) {
                return bad("mass_profile", "mass must stay positive".into());
            }
        }
        Ok(())
    }

    pub fn half_len(&self) -> f64 {
        0.5 * self.box_len
    }

    /// Largest wavenumber of the truncated basis.
    pub fn k_max(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.cutoff as f64 / self.box_len
    }

    fn raw_v(&self, z: f64) -> f64 {
        match &self.shape {
            PotentialShape::SquareWell => {
                if z.abs() < 0.5 * self.a {
                    -self.eta
                } else {
                    0.0
                }
            }
            PotentialShape::Steps(p) => p.value(z),
        }
    }

    fn raw_mean(&self) -> f64 {
        match &self.shape {
            PotentialShape::SquareWell => -self.eta * self.a / self.box_len,
            PotentialShape::Steps(p) => p.mean(),
        }
    }

    /// Constant added to the raw profile (zero unless compensating).
    pub fn offset(&self) -> f64 {
        if self.compensate {
            -self.raw_mean()
        } else {
            0.0
        }
    }

    /// Potential value outside the well, where bound states decay.
    pub fn outside_value(&self) -> f64 {
        self.raw_v(self.half_len()) + self.offset()
    }

    pub fn mass_at(&self, z: f64) -> f64 {
        self.mass_profile.as_ref().map_or(self.m, |p| p.value(z))
    }

    fn raw_edges(&self) -> Vec<f64> {
        let h = self.half_len();
        let mut edges = match &self.shape {
            PotentialShape::SquareWell => vec![-h, -0.5 * self.a, 0.5 * self.a, h],
            PotentialShape::Steps(p) => p.edges.clone(),
        };
        if let Some(mp) = &self.mass_profile {
            edges.extend_from_slice(&mp.edges);
            edges.sort_by(f64::total_cmp);
            edges.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        }
        edges
    }

    /// Constant pieces of `(V, M)` covering the box, left to right.
    pub fn segments(&self) -> Vec<Segment> {
        let off = self.offset();
        self.raw_edges()
            .windows(2)
            .map(|e| {
                let mid = 0.5 * (e[0] + e[1]);
                Segment {
                    z0: e[0],
                    z1: e[1],
                    v: self.raw_v(mid) + off,
                    mass: self.mass_at(mid),
                }
            })
            .collect()
    }

    /// Potential including the compensation offset, defined everywhere on
    /// the box; at a step the value of the outer piece is taken.
    pub fn potential(&self, z: f64) -> Result<f64> {
        let h = self.half_len();
        if !(z.abs() <= h) {
            return Err(Error::Domain { z, half: h });
        }
        Ok(self.raw_v(z) + self.offset())
    }
}

/// One constant piece of the potential and mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub z0: f64,
    pub z1: f64,
    pub v: f64,
    pub mass: f64,
}

/// `V(z)` for the configured square well (or table).
pub fn square_well_v(cfg: &PotentialConfig, z: f64) -> Result<f64> {
    cfg.potential(z)
}

/// Closed-form piecewise-linear `θ(z) = −2∫₀^z V` and its antiderivative
/// `Θ₂(z) = ∫₀^z θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaField {
    segments: Vec<Segment>,
    /// θ at each segment's left edge, plus the right box edge.
    theta_knots: Vec<f64>,
    /// `∫_{−L/2}^{knot} θ`.
    cumulative: Vec<f64>,
    theta2_origin: f64,
    box_len: f64,
}

pub fn theta_from_v(cfg: &PotentialConfig) -> ThetaField {
    let segments = cfg.segments();
    // θ relative to the left edge, then shifted so θ(0) = 0
    let mut theta = Vec::with_capacity(segments.len() + 1);
    theta.push(0.0);
    for s in &segments {
        let last = *theta.last().unwrap();
        theta.push(last - 2.0 * s.v * (s.z1 - s.z0));
    }
    let mut field = ThetaField {
        segments,
        theta_knots: theta,
        cumulative: Vec::new(),
        theta2_origin: 0.0,
        box_len: cfg.box_len,
    };
    let at_zero = field.raw_theta(0.0);
    for t in &mut field.theta_knots {
        *t -= at_zero;
    }
    let mut cum = vec![0.0];
    for (i, s) in field.segments.iter().enumerate() {
        let h = s.z1 - s.z0;
        cum.push(cum[i] + 0.5 * h * (field.theta_knots[i] + field.theta_knots[i + 1]));
    }
    field.cumulative = cum;
    field.theta2_origin = field.raw_theta2(0.0);
    field
}

impl ThetaField {
    fn locate(&self, z: f64) -> usize {
        let i = self.segments.partition_point(|s| s.z1 <= z);
        i.min(self.segments.len() - 1)
    }

    fn raw_theta(&self, z: f64) -> f64 {
        let i = self.locate(z);
        let s = &self.segments[i];
        self.theta_knots[i] - 2.0 * s.v * (z - s.z0)
    }

    fn raw_theta2(&self, z: f64) -> f64 {
        let i = self.locate(z);
        let s = &self.segments[i];
        let d = z - s.z0;
        self.cumulative[i] + self.theta_knots[i] * d - s.v * d * d
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// θ(z); outside the box the edge pieces are extended linearly.
    pub fn theta(&self, z: f64) -> f64 {
        self.raw_theta(z)
    }

    /// θ′(z) = −2V(z).
    pub fn theta_prime(&self, z: f64) -> f64 {
        -2.0 * self.segments[self.locate(z)].v
    }

    pub fn theta2(&self, z: f64) -> f64 {
        self.raw_theta2(z) - self.theta2_origin
    }

    /// θ(L/2) − θ(−L/2); zero for a compensated potential.
    pub fn seam_jump(&self) -> f64 {
        self.theta_knots[self.theta_knots.len() - 1] - self.theta_knots[0]
    }

    /// θ with periodic continuation outside the box.
    pub fn theta_periodic(&self, z: f64) -> f64 {
        self.theta(wrap(z, self.box_len))
    }

    /// `(1/L) ∫ M(z) e^{iλθ(z)} e^{−iqz} dz` over the box, in closed form.
    pub fn exp_coefficient(&self, lambda: f64, q: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, s) in self.segments.iter().enumerate() {
            let h = s.z1 - s.z0;
            let zm = 0.5 * (s.z0 + s.z1);
            let slope = -2.0 * s.v;
            let theta_mid = self.theta_knots[i] + slope * 0.5 * h;
            let kappa = lambda * slope - q;
            let phase = Complex64::from_polar(1.0, lambda * theta_mid - q * zm);
            acc += phase * (s.mass * h * sinc(0.5 * kappa * h));
        }
        acc / self.box_len
    }

    /// Fourier coefficients of `M cos(λθ)` and `M sin(λθ)` at wavenumber `q`.
    pub fn trig_coefficients(&self, lambda: f64, q: f64) -> (Complex64, Complex64) {
        let plus = self.exp_coefficient(lambda, q);
        let minus = self.exp_coefficient(lambda, -q).conj();
        let cos = 0.5 * (plus + minus);
        let sin = (plus - minus) / Complex64::new(0.0, 2.0);
        (cos, sin)
    }
}

/// `sin(x)/x` with the removable point handled.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Maps `z` into `[−L/2, L/2)`.
pub fn wrap(z: f64, box_len: f64) -> f64 {
    let h = 0.5 * box_len;
    if (-h..=h).contains(&z) {
        z
    } else {
        (z + h).rem_euclid(box_len) - h
    }
}

/// Quintic smoothstep turn-on of duration `t_f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RampSpec {
    pub t_f: f64,
}

impl RampSpec {
    pub fn new(t_f: f64) -> Result<Self> {
        if !(t_f.is_finite() && t_f > 0.0) {
            return Err(Error::InvalidConfig {
                field: "t_f",
                reason: format!("must be positive, got {t_f}"),
            });
        }
        Ok(RampSpec { t_f })
    }
}

/// `(λ, λ′, λ″)` at time `t`.
pub fn ramp_lambda(ramp: RampSpec, t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= ramp.t_f {
        return (1.0, 0.0, 0.0);
    }
    let s = t / ramp.t_f;
    let s2 = s * s;
    let lam = s2 * s * (10.0 - 15.0 * s + 6.0 * s2);
    let d1 = 30.0 * s2 * (1.0 - s) * (1.0 - s) / ramp.t_f;
    let d2 = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (ramp.t_f * ramp.t_f);
    (lam, d1, d2)
}

/// `(f, U)` at `(z, t)` for `θ(z, t) = λ(t)θ(z)` in the gauge `f(0, t) = 0`.
pub fn auxiliary_fields(theta: &ThetaField, ramp: RampSpec, z: f64, t: f64) -> (f64, f64) {
    let (lam, d1, d2) = ramp_lambda(ramp, t);
    if lam == 0.0 && d1 == 0.0 && d2 == 0.0 {
        return (0.0, 0.0);
    }
    let big = theta.theta2(z);
    let f = -0.5 * d1 * big;
    let u = -0.5 * d2 * big + 0.5 * lam * theta.theta_prime(z);
    (f, u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uncompensated() -> PotentialConfig {
        PotentialConfig {
            compensate: false,
            ..PotentialConfig::reference()
        }
    }

    #[test]
    fn well_values() {
        let cfg = uncompensated();
        assert_eq!(square_well_v(&cfg, 0.0).unwrap(), -0.5);
        assert_eq!(square_well_v(&cfg, 3.0).unwrap(), 0.0);
        assert_eq!(square_well_v(&cfg, 2.0).unwrap(), 0.0);
        assert_eq!(square_well_v(&cfg, -2.0).unwrap(), 0.0);
        assert!(matches!(square_well_v(&cfg, 20.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn compensated_offset() {
        let cfg = PotentialConfig::reference();
        assert!((cfg.offset() - 0.05).abs() < 1e-15);
        assert!((cfg.potential(0.0).unwrap() + 0.45).abs() < 1e-15);
        assert!((cfg.outside_value() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn theta_closed_form_uncompensated() {
        let th = theta_from_v(&uncompensated());
        assert_eq!(th.theta(0.0), 0.0);
        assert!((th.theta(1.3) - 1.3).abs() < 1e-14);
        assert!((th.theta(7.0) - 2.0).abs() < 1e-14);
        assert!((th.theta(-7.0) + 2.0).abs() < 1e-14);
        // Θ₂ = z²/2 inside, then linear growth with slope ηa
        assert!((th.theta2(1.0) - 0.5).abs() < 1e-14);
        assert!((th.theta2(5.0) - (2.0 + 2.0 * 3.0)).abs() < 1e-13);
    }

    #[test]
    fn compensated_theta_is_periodic() {
        let th = theta_from_v(&PotentialConfig::reference());
        assert!(th.seam_jump().abs() < 1e-12);
        // slope 2η(1 − a/L) inside the well
        assert!((th.theta(1.0) - 0.9).abs() < 1e-14);
    }

    #[test]
    fn ramp_endpoints() {
        let r = RampSpec::new(20.0).unwrap();
        assert_eq!(ramp_lambda(r, -1.0), (0.0, 0.0, 0.0));
        assert_eq!(ramp_lambda(r, 20.0), (1.0, 0.0, 0.0));
        let (l, d1, d2) = ramp_lambda(r, 10.0);
        assert!((l - 0.5).abs() < 1e-15);
        assert!((d1 - 30.0 / 16.0 / 20.0).abs() < 1e-15);
        assert!(d2.abs() < 1e-15);
    }

    #[test]
    fn fields_after_ramp() {
        let cfg = PotentialConfig::reference();
        let th = theta_from_v(&cfg);
        let r = RampSpec::new(5.0).unwrap();
        for &z in &[-15.0, -1.0, 0.5, 3.0] {
            let (f, u) = auxiliary_fields(&th, r, z, 6.0);
            assert_eq!(f, 0.0);
            assert!((u + cfg.potential(z).unwrap()).abs() < 1e-15);
            assert_eq!(auxiliary_fields(&th, r, z, -0.5), (0.0, 0.0));
        }
    }

    #[test]
    fn validation_messages_name_fields() {
        let mut cfg = PotentialConfig::reference();
        cfg.eta = 1.5;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig { field: "eta", .. })));
        let cfg = PotentialConfig::reference().with_cutoff(8);
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig { field: "N", .. })));
        let mut cfg = PotentialConfig::reference();
        cfg.box_len = 12.0;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig { field: "L", .. })));
    }

    #[test]
    fn step_table_round_trip() {
        let p = StepProfile::from_steps(&[(-20.0, 0.1), (-2.0, -0.4), (2.0, 0.1)], 40.0).unwrap();
        let cfg = PotentialConfig {
            shape: PotentialShape::Steps(p),
            compensate: false,
            ..PotentialConfig::reference()
        };
        assert_eq!(cfg.potential(0.0).unwrap(), -0.4);
        assert_eq!(cfg.potential(10.0).unwrap(), 0.1);
        assert_eq!(cfg.segments().len(), 3);
    }

    #[test]
    fn wrap_into_box() {
        assert!((wrap(21.0, 40.0) + 19.0).abs() < 1e-14);
        assert!((wrap(-61.0, 40.0) - 19.0).abs() < 1e-14);
        assert_eq!(wrap(3.0, 40.0), 3.0);
    }
}
