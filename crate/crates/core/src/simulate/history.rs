//! Dense record of `y1` on the solver grid, with running integrals of the
//! delay integrand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{hill_unchecked, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    #[default]
    Trapezoid,
    Simpson,
}

/// Quadrature on the solver grid. `subdivisions` splits every step interval
/// into equal pieces evaluated on the Hermite interpolant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    #[serde(default)]
    pub rule: QuadratureRule,
    #[serde(default = "one")]
    pub subdivisions: usize,
}

fn one() -> usize {
    1
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { rule: QuadratureRule::Trapezoid, subdivisions: 1 }
    }
}

impl Quadrature {
    /// `∫₀^len g(seg(u)) du`, where `len` may stop short of the segment end.
    fn integrate_segment(&self, g: &dyn Fn(f64) -> f64, seg: &Hermite, len: f64) -> f64 {
        if len <= 0.0 {
            return 0.0;
        }
        let r = self.subdivisions.max(1);
        let h = len / r as f64;
        let mut sum = 0.0;
        let mut ga = g(seg.at(0.0));
        for j in 0..r {
            let b = if j + 1 == r { len } else { (j + 1) as f64 * h };
            let a = j as f64 * h;
            let gb = g(seg.at(b));
            sum += match self.rule {
                QuadratureRule::Trapezoid => 0.5 * (ga + gb) * (b - a),
                QuadratureRule::Simpson => (ga + 4.0 * g(seg.at(0.5 * (a + b))) + gb) * (b - a) / 6.0,
            };
            ga = gb;
        }
        sum
    }
}

/// Cubic Hermite segment starting at local coordinate 0.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Hermite {
    pub y0: f64,
    pub m0: f64,
    pub y1: f64,
    pub m1: f64,
    pub span: f64,
}

impl Hermite {
    pub(crate) fn at(&self, u: f64) -> f64 {
        if u == 0.0 {
            return self.y0;
        }
        if u == self.span {
            return self.y1;
        }
        let s = u / self.span;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.y0
            + (s3 - 2.0 * s2 + s) * self.span * self.m0
            + (-2.0 * s3 + 3.0 * s2) * self.y1
            + (s3 - s2) * self.span * self.m1
    }
}

type Integrand = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Node `i` sits at `t = i·dt`. Each node keeps its value, a left and a
/// right slope (they differ only where the initial profile meets the
/// solution), and the running integral of the integrand from the first node
/// ever stored.
pub struct History {
    dt: f64,
    first: i64,
    y: Vec<f64>,
    dl: Vec<f64>,
    dr: Vec<f64>,
    cum: Vec<f64>,
    quad: Quadrature,
    integrand: Integrand,
    keep: usize,
}

impl std::fmt::Debug for History {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("History")
            .field("dt", &self.dt)
            .field("first", &self.first)
            .field("len", &self.y.len())
            .field("quad", &self.quad)
            .finish()
    }
}

impl History {
    /// Empty record on the grid `i·dt`; `keep` is the number of trailing
    /// nodes that must stay available (0 keeps everything).
    pub fn new(dt: f64, quad: Quadrature, integrand: Integrand, keep: usize) -> Self {
        History { dt, first: 0, y: vec![], dl: vec![], dr: vec![], cum: vec![], quad, integrand, keep }
    }

    /// Record using the Hill function of `params`.
    pub fn for_model(params: &ModelParams, dt: f64, quad: Quadrature) -> Self {
        let (a, n) = (params.a, params.n);
        let keep = if params.tau > 0.0 { (params.tau / dt).ceil() as usize + 4 } else { 4 };
        History::new(dt, quad, Box::new(move |x| hill_unchecked(x, a, n)), keep)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn integrand(&self, x: f64) -> f64 {
        (self.integrand)(x)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn earliest_time(&self) -> f64 {
        self.first as f64 * self.dt
    }

    pub fn last_time(&self) -> f64 {
        (self.first + self.y.len() as i64 - 1) as f64 * self.dt
    }

    pub fn last_index(&self) -> i64 {
        self.first + self.y.len() as i64 - 1
    }

    pub fn last_value(&self) -> (f64, f64) {
        let j = self.y.len() - 1;
        (self.y[j], self.dl[j])
    }

    /// Appends node `index` (the first call fixes the starting index).
    pub fn push_node(&mut self, index: i64, y: f64, slope_left: f64, slope_right: f64) {
        if self.y.is_empty() {
            self.first = index;
            self.y.push(y);
            self.dl.push(slope_left);
            self.dr.push(slope_right);
            self.cum.push(0.0);
            return;
        }
        debug_assert_eq!(index, self.last_index() + 1);
        let j = self.y.len() - 1;
        let seg = Hermite { y0: self.y[j], m0: self.dr[j], y1: y, m1: slope_left, span: self.dt };
        let piece = self.quad.integrate_segment(&*self.integrand, &seg, self.dt);
        let c = self.cum[j] + piece;
        self.y.push(y);
        self.dl.push(slope_left);
        self.dr.push(slope_right);
        self.cum.push(c);
        self.prune();
    }

    pub fn push(&mut self, y: f64, slope: f64) {
        let idx = if self.y.is_empty() { 0 } else { self.last_index() + 1 };
        self.push_node(idx, y, slope, slope);
    }

    /// Sets the right slope of the newest node.
    pub fn set_last_right_slope(&mut self, slope: f64) {
        if let Some(last) = self.dr.last_mut() {
            *last = slope;
        }
    }

    fn prune(&mut self) {
        if self.keep == 0 {
            return;
        }
        let excess = self.y.len().saturating_sub(self.keep);
        if excess > self.keep.max(1024) {
            self.y.drain(..excess);
            self.dl.drain(..excess);
            self.dr.drain(..excess);
            self.cum.drain(..excess);
            self.first += excess as i64;
        }
    }

    /// Node and offset for `t`, snapping to a node within `1e-9` steps.
    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let x = t / self.dt;
        let r = x.round();
        let (k, off) = if (x - r).abs() < 1e-9 { (r as i64, 0.0) } else { (x.floor() as i64, t - x.floor() * self.dt) };
        let j = k - self.first;
        let earliest = self.earliest_time();
        if j < 0 || j as usize >= self.y.len() || (j as usize == self.y.len() - 1 && off > 0.0) {
            return Err(Error::HistoryUnderflow { requested: t, earliest });
        }
        Ok((j as usize, off))
    }

    fn segment(&self, j: usize) -> Hermite {
        Hermite { y0: self.y[j], m0: self.dr[j], y1: self.y[j + 1], m1: self.dl[j + 1], span: self.dt }
    }

    /// Interpolated `y1(t)` inside the record.
    pub fn value(&self, t: f64) -> Result<f64> {
        let (j, off) = self.locate(t)?;
        if off == 0.0 {
            return Ok(self.y[j]);
        }
        Ok(self.segment(j).at(off))
    }

    /// Running integral of the integrand up to `t`.
    fn running(&self, t: f64) -> Result<f64> {
        let (j, off) = self.locate(t)?;
        if off == 0.0 {
            return Ok(self.cum[j]);
        }
        Ok(self.cum[j] + self.quad.integrate_segment(&*self.integrand, &self.segment(j), off))
    }

    /// `∫_lo^hi g(y1(u)) du` with both ends inside the record.
    pub fn window_integral(&self, lo: f64, hi: f64) -> Result<f64> {
        Ok(self.running(hi)? - self.running(lo)?)
    }

    /// `α g(y1(t)) + (1-α)(1/τ)∫₀^τ g(y1(t-s)) ds` for `t` inside the record.
    pub fn distributed_term(&self, t: f64, params: &ModelParams) -> Result<f64> {
        let (alpha, tau) = (params.alpha, params.tau);
        let now = self.integrand(self.value(t)?);
        if tau == 0.0 || alpha == 1.0 {
            return Ok(now);
        }
        let mean = self.window_integral(t - tau, t)? / tau;
        Ok(alpha * now + (1.0 - alpha) * mean)
    }

    /// As [`History::distributed_term`] at a time `t` past the newest node,
    /// where `y1(t) = y` with slope `slope` is known from a solver stage.
    pub fn stage_term(&self, t: f64, y: f64, slope: f64, params: &ModelParams) -> Result<f64> {
        let (alpha, tau) = (params.alpha, params.tau);
        let now = self.integrand(y);
        if tau == 0.0 || alpha == 1.0 {
            return Ok(now);
        }
        let t_last = self.last_time();
        let len = t - t_last;
        if len <= 0.0 {
            return self.distributed_term(t, params);
        }
        let (y0, m0) = (self.y[self.y.len() - 1], self.dr[self.y.len() - 1]);
        let seg = Hermite { y0, m0, y1: y, m1: slope, span: len };
        let tail = self.quad.integrate_segment(&*self.integrand, &seg, len);
        let body = self.window_integral(t - tau, t_last)?;
        Ok(alpha * now + (1.0 - alpha) * (body + tail) / tau)
    }
}
