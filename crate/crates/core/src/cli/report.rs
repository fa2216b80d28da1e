//! Report types emitted by each command. Every report serializes to JSON and
//! re-parses under the same types; `render` gives the `--pretty` text.

use std::fmt::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibrium::Equilibrium;
use crate::model::ModelParams;
use crate::normalform::{ReferenceNormalForm, BifurcationQuantities, Direction, FormulaVariant, NormalForm, OrbitStability, PeriodTrend};
use crate::simulate::LongTermReport;
use crate::stability::{CharCoeffs, HopfPoint, ImaginaryAxisBound, RejectedCandidate};

/// Published values for the default parameter set.
pub const PUBLISHED_OMEGA: f64 = 0.1;
pub const PUBLISHED_TAU: f64 = 0.100_165_126_3;
pub const PUBLISHED_MU2: f64 = -0.210_156_795_3;
pub const PUBLISHED_BETA2: f64 = -0.302_998_011_4;
pub const PUBLISHED_T2: f64 = 0.114_869_918_3;
pub const PUBLISHED_Y10: f64 = 21.034_171_91;

pub const NO_DELAY_HOPF: &str = "no delay-induced Hopf (h=0)";

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Report {
    Equilibrium(EquilibriumReport),
    Stability(StabilityReport),
    Normalform(NormalFormReport),
    Simulate(SimulateReport),
    Scan(ScanReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub params: ModelParams,
    pub equilibrium: Equilibrium,
    /// Max-norm of the right-hand side at the equilibrium.
    pub steady_state_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub params: ModelParams,
    pub coeffs: CharCoeffs,
    pub zero_delay_stable: bool,
    pub zero_delay_verdict: String,
    pub zero_delay_roots: Vec<Complex64>,
    pub imaginary_axis_bound: ImaginaryAxisBound,
    pub grid_size: usize,
    pub candidates: usize,
    pub hopf_points: Vec<HopfPoint>,
    pub rejected: Vec<RejectedCandidate>,
    /// Smallest certified critical delay.
    pub selected: Option<HopfPoint>,
    pub messages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: FormulaVariant,
    pub c1: Complex64,
    pub g21: Complex64,
    pub mu2: f64,
    pub beta2: f64,
    pub t2: f64,
    pub direction: Direction,
    pub orbit_stability: OrbitStability,
    pub period_trend: PeriodTrend,
    pub sentences: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub quantity: String,
    pub published: f64,
    pub printed: f64,
    pub pattern_consistent: f64,
    pub rel_dev_printed: f64,
    pub rel_dev_pattern_consistent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSource {
    /// Smallest certified root of the characteristic equation.
    Certified,
    /// The `normalform.evaluate_at` pair from the config; not certified.
    Configured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub params: ModelParams,
    pub source: PairSource,
    pub hopf: HopfPoint,
    pub selected_variant: FormulaVariant,
    pub mu2: f64,
    pub beta2: f64,
    pub t2: f64,
    pub variants: Vec<VariantSummary>,
    pub pairing_psi_phi: Complex64,
    pub pairing_psi_phibar: Complex64,
    pub eigen_residual: f64,
    pub normal_form: NormalForm,
    /// Standard projection formula at the same pair and eigenvector.
    pub reference: ReferenceNormalForm,
    pub reference_sentences: Vec<String>,
    pub comparison: Option<Vec<ComparisonRow>>,
    pub messages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub params: ModelParams,
    pub tau: f64,
    pub tau0: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub perturbation: f64,
    pub rows: usize,
    pub files: Vec<String>,
    pub overlay: bool,
    pub longterm: LongTermReport,
    pub classification: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub tau: f64,
    pub classification: String,
    pub final_amplitude: Option<f64>,
    pub ratio: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub params: ModelParams,
    pub tau0: Option<f64>,
    pub threads: usize,
    pub rows: Vec<ScanRow>,
    pub failed: usize,
    pub files: Vec<String>,
}

pub fn variant_summary(nf: &NormalForm) -> VariantSummary {
    let q: BifurcationQuantities = nf.quantities;
    VariantSummary {
        variant: nf.variant,
        c1: q.c1,
        g21: nf.g21,
        mu2: q.mu2,
        beta2: q.beta2,
        t2: q.t2,
        direction: q.direction,
        orbit_stability: q.orbit_stability,
        period_trend: q.period_trend,
        sentences: sentences(&q),
    }
}

/// Plain-language reading of the signs of `μ₂`, `β₂` and `T₂`.
pub fn sentences(q: &BifurcationQuantities) -> Vec<String> {
    let dir = match q.direction {
        Direction::Supercritical => "mu2 > 0: the Hopf bifurcation is supercritical and periodic solutions exist for tau > tau0",
        Direction::Subcritical => "mu2 < 0: the Hopf bifurcation is subcritical and periodic solutions exist for tau < tau0",
    };
    let stab = match q.orbit_stability {
        OrbitStability::Stable => "beta2 < 0: the bifurcating periodic solutions are orbitally stable",
        OrbitStability::Unstable => "beta2 > 0: the bifurcating periodic solutions are orbitally unstable",
    };
    let per = match q.period_trend {
        PeriodTrend::Increasing => "T2 > 0: the period increases",
        PeriodTrend::Decreasing => "T2 < 0: the period decreases",
    };
    vec![dir.into(), stab.into(), per.into()]
}

fn rel_dev(x: f64, reference: f64) -> f64 {
    ((x - reference) / reference).abs()
}

/// Published `(μ₂, β₂, T₂)` next to both variants.
pub fn comparison_table(printed: &VariantSummary, pattern: &VariantSummary) -> Vec<ComparisonRow> {
    let rows = [
        ("mu2", PUBLISHED_MU2, printed.mu2, pattern.mu2),
        ("beta2", PUBLISHED_BETA2, printed.beta2, pattern.beta2),
        ("T2", PUBLISHED_T2, printed.t2, pattern.t2),
    ];
    rows.iter()
        .map(|&(name, p, a, b)| ComparisonRow {
            quantity: name.into(),
            published: p,
            printed: a,
            pattern_consistent: b,
            rel_dev_printed: rel_dev(a, p),
            rel_dev_pattern_consistent: rel_dev(b, p),
        })
        .collect()
}

fn cfmt(z: Complex64) -> String {
    format!("{:.10e} {} {:.10e}i", z.re, if z.im < 0.0 { '-' } else { '+' }, z.im.abs())
}

fn params_line(p: &ModelParams) -> String {
    format!(
        "a1={} a2={} a12={} b1={} b2={} a={} n={} alpha={} tau={}",
        p.a1, p.a2, p.a12, p.b1, p.b2, p.a, p.n, p.alpha, p.tau
    )
}

impl Report {
    pub fn render(&self) -> String {
        let mut s = String::new();
        match self {
            Report::Equilibrium(r) => {
                let e = &r.equilibrium;
                let _ = writeln!(s, "equilibrium");
                let _ = writeln!(s, "  params: {}", params_line(&r.params));
                let _ = writeln!(s, "  x10 = {:.10}", e.x10);
                let _ = writeln!(s, "  y10 = {:.10}", e.y10);
                let _ = writeln!(s, "  x20 = {:.10}", e.x20);
                let _ = writeln!(s, "  y20 = {:.10}", e.y20);
                let _ = writeln!(s, "  rho1 = {:.10e}  rho2 = {:.10e}  rho3 = {:.10e}", e.rho1, e.rho2, e.rho3);
                let _ = writeln!(s, "  scalar residual = {:.3e}", e.residual);
                let _ = writeln!(s, "  steady-state residual = {:.3e}", r.steady_state_residual);
            }
            Report::Stability(r) => {
                let k = &r.coeffs;
                let _ = writeln!(s, "stability");
                let _ = writeln!(s, "  params: {}", params_line(&r.params));
                let _ = writeln!(s, "  b = {:.10e}  c = {:.10e}  d = {:.10e}  h = {:.10e}", k.b, k.c, k.d, k.h);
                let _ = writeln!(s, "  zero delay: {}", r.zero_delay_verdict);
                let b = &r.imaginary_axis_bound;
                let _ = writeln!(
                    s,
                    "  min |p(i omega)| = {:.6e} at omega = {:.6e} (h = {:.6e}){}",
                    b.min_cubic_modulus,
                    b.omega_at_min,
                    b.h,
                    if b.excludes_hopf { ": no purely imaginary root for any delay" } else { "" }
                );
                let _ = writeln!(s, "  scan: {} grid points, {} candidates", r.grid_size, r.candidates);
                for h in &r.hopf_points {
                    let _ = writeln!(
                        s,
                        "  hopf: omega0 = {:.12} tau0 = {:.12} |Delta| = {:.2e} M = {:.6e} N = {:.6e}",
                        h.omega0, h.tau0, h.delta_residual, h.m, h.n
                    );
                }
                for c in &r.rejected {
                    let _ = writeln!(s, "  rejected: omega = {:.6} tau = {:.6}: {}", c.omega, c.tau, c.reason);
                }
                match &r.selected {
                    Some(h) => {
                        let _ = writeln!(s, "  selected tau0 = {:.12}", h.tau0);
                    }
                    None => {
                        let _ = writeln!(s, "  no certified Hopf point");
                    }
                }
                for m in &r.messages {
                    let _ = writeln!(s, "  {m}");
                }
            }
            Report::Normalform(r) => {
                let _ = writeln!(s, "normal form");
                let _ = writeln!(s, "  params: {}", params_line(&r.params));
                let src = match r.source {
                    PairSource::Certified => "certified",
                    PairSource::Configured => "configured, not certified",
                };
                let _ = writeln!(
                    s,
                    "  pair ({src}): omega0 = {:.12} tau0 = {:.12} |Delta| = {:.2e}",
                    r.hopf.omega0, r.hopf.tau0, r.hopf.delta_residual
                );
                let _ = writeln!(s, "  M = {:.10e}  N = {:.10e}", r.hopf.m, r.hopf.n);
                let _ = writeln!(s, "  <Psi,Phi> = {}", cfmt(r.pairing_psi_phi));
                let _ = writeln!(s, "  <Psi,conj Phi> = {}", cfmt(r.pairing_psi_phibar));
                let nf = &r.normal_form;
                let _ = writeln!(s, "  g20 = {}", cfmt(nf.g20));
                let _ = writeln!(s, "  g11 = {}", cfmt(nf.g11));
                let _ = writeln!(s, "  g02 = {}", cfmt(nf.g02));
                for v in &r.variants {
                    let _ = writeln!(s, "  [{}]", variant_name(v.variant));
                    let _ = writeln!(s, "    g21 = {}", cfmt(v.g21));
                    let _ = writeln!(s, "    C1(0) = {}", cfmt(v.c1));
                    let _ = writeln!(s, "    mu2 = {:.10e}  beta2 = {:.10e}  T2 = {:.10e}", v.mu2, v.beta2, v.t2);
                    for line in &v.sentences {
                        let _ = writeln!(s, "    {line}");
                    }
                }
                let q = &r.reference.quantities;
                let _ = writeln!(s, "  [reference projection formula]");
                let _ = writeln!(s, "    c1 = {}", cfmt(r.reference.c1));
                let _ = writeln!(s, "    mu2 = {:.10e}  beta2 = {:.10e}  T2 = {:.10e}", q.mu2, q.beta2, q.t2);
                for line in &r.reference_sentences {
                    let _ = writeln!(s, "    {line}");
                }
                if let Some(rows) = &r.comparison {
                    let _ = writeln!(s, "  published comparison:");
                    let _ = writeln!(
                        s,
                        "    {:<6} {:>16} {:>16} {:>16} {:>10} {:>10}",
                        "", "published", "printed", "pattern", "dev", "dev"
                    );
                    for row in rows {
                        let _ = writeln!(
                            s,
                            "    {:<6} {:>16.10} {:>16.6e} {:>16.6e} {:>10.3e} {:>10.3e}",
                            row.quantity,
                            row.published,
                            row.printed,
                            row.pattern_consistent,
                            row.rel_dev_printed,
                            row.rel_dev_pattern_consistent
                        );
                    }
                }
                for m in &r.messages {
                    let _ = writeln!(s, "  {m}");
                }
            }
            Report::Simulate(r) => {
                let _ = writeln!(s, "simulate");
                let _ = writeln!(s, "  params: {}", params_line(&r.params));
                if let Some(t0) = r.tau0 {
                    let _ = writeln!(s, "  tau0 = {t0:.12}  tau/tau0 = {:.6}", r.tau / t0);
                }
                let _ = writeln!(s, "  dt = {}  t_end = {}  perturbation = {}", r.dt, r.t_end, r.perturbation);
                let _ = writeln!(s, "  rows written: {}", r.rows);
                for f in &r.files {
                    let _ = writeln!(s, "  wrote {f}");
                }
                let l = &r.longterm;
                let _ = writeln!(
                    s,
                    "  envelope: middle = {:.6e} final = {:.6e} ratio = {:.6}",
                    l.middle_amplitude, l.final_amplitude, l.ratio
                );
                let _ = writeln!(s, "  classification: {}", r.classification);
            }
            Report::Scan(r) => {
                let _ = writeln!(s, "scan");
                let _ = writeln!(s, "  params: {}", params_line(&r.params));
                if let Some(t0) = r.tau0 {
                    let _ = writeln!(s, "  tau0 = {t0:.12}");
                }
                for row in &r.rows {
                    match (&row.error, row.final_amplitude) {
                        (Some(e), _) => {
                            let _ = writeln!(s, "  tau = {:.8}  error: {e}", row.tau);
                        }
                        (None, a) => {
                            let _ = writeln!(
                                s,
                                "  tau = {:.8}  {:<22} final amplitude = {:.6e}",
                                row.tau,
                                row.classification,
                                a.unwrap_or(f64::NAN)
                            );
                        }
                    }
                }
                let _ = writeln!(s, "  failed rows: {}", r.failed);
                for f in &r.files {
                    let _ = writeln!(s, "  wrote {f}");
                }
            }
        }
        s
    }
}

pub fn variant_name(v: FormulaVariant) -> &'static str {
    match v {
        FormulaVariant::Printed => "printed",
        FormulaVariant::PatternConsistent => "pattern_consistent",
    }
}
