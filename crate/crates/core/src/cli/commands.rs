use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::RunConfig;
use super::report::*;
use super::Failure;
use crate::equilibrium::{find_equilibrium, steady_state_residual, Equilibrium};
use crate::model::ModelParams;
use crate::normalform::{eigenpair, normal_form_from_pair, reference_normal_form, FormulaVariant, NormalForm};
use crate::plot::{line_plot, Series};
use crate::simulate::{
    analytic_waveform, classify_longterm, integrate_normal_form, integrate_with, HistorySpec, IntegrateOptions,
    Trajectory,
};
use crate::stability::{char_coeffs, locate_hopf_points, zero_delay_roots, zero_delay_stable, HopfPoint, HopfSearch};

fn equilibrium(cfg: &RunConfig) -> Result<Equilibrium, Failure> {
    Ok(find_equilibrium(&cfg.params, cfg.equilibrium.tolerance)?)
}

fn search(cfg: &RunConfig, eq: &Equilibrium) -> Result<HopfSearch, Failure> {
    let k = char_coeffs(&cfg.params, eq);
    Ok(locate_hopf_points(&k, cfg.stability.grid_size)?)
}

fn smallest_tau0(cfg: &RunConfig, eq: &Equilibrium) -> Result<f64, Failure> {
    let s = search(cfg, eq)?;
    s.first()
        .map(|h| h.tau0)
        .ok_or_else(|| Failure::Numerical("no certified Hopf point to scale the delay by".into()))
}

/// The published parameter set, up to the delay.
fn published_params_active(p: &ModelParams) -> bool {
    p.with_tau(0.0) == ModelParams::default().with_tau(0.0)
}

type Pick = fn(&crate::model::State) -> f64;

pub fn cmd_equilibrium(cfg: &RunConfig) -> Result<Report, Failure> {
    let eq = equilibrium(cfg)?;
    Ok(Report::Equilibrium(EquilibriumReport {
        params: cfg.params,
        steady_state_residual: steady_state_residual(&cfg.params, &eq.state()),
        equilibrium: eq,
    }))
}

/// Returns the report together with whether every candidate failed.
pub fn cmd_stability(cfg: &RunConfig) -> Result<(Report, bool), Failure> {
    let eq = equilibrium(cfg)?;
    let k = char_coeffs(&cfg.params, &eq);
    let stable = zero_delay_stable(&k);
    let mut messages = Vec::new();
    let s = if k.h == 0.0 {
        messages.push(NO_DELAY_HOPF.to_string());
        HopfSearch {
            candidates: 0,
            refined: vec![],
            rejected: vec![],
            bound: crate::stability::imaginary_axis_bound(&k),
        }
    } else {
        locate_hopf_points(&k, cfg.stability.grid_size)?
    };
    if k.h != 0.0 && s.bound.excludes_hopf {
        messages.push(format!(
            "|p(i omega)| >= {:.6e} > h = {:.6e} on the whole imaginary axis: no Hopf point for any delay",
            s.bound.min_cubic_modulus, k.h
        ));
    }
    let all_failed = s.candidates > 0 && s.refined.is_empty();
    if all_failed {
        messages.push("refinement failed for every candidate".into());
    }
    let report = StabilityReport {
        params: cfg.params,
        coeffs: k,
        zero_delay_stable: stable,
        zero_delay_verdict: if stable { "stable at tau=0".into() } else { "unstable at tau=0".into() },
        zero_delay_roots: zero_delay_roots(&k).to_vec(),
        imaginary_axis_bound: s.bound,
        grid_size: cfg.stability.grid_size,
        candidates: s.candidates,
        selected: s.first().copied(),
        hopf_points: s.refined,
        rejected: s.rejected,
        messages,
    };
    Ok((Report::Stability(report), all_failed))
}

/// The configured pair if any, otherwise the smallest certified one.
fn hopf_for_normal_form(cfg: &RunConfig, eq: &Equilibrium) -> Result<(HopfPoint, PairSource), Failure> {
    let k = char_coeffs(&cfg.params, eq);
    if let Some(g) = cfg.normalform.evaluate_at {
        return Ok((HopfPoint::at(g.omega, g.tau, &k), PairSource::Configured));
    }
    let s = search(cfg, eq)?;
    match s.first() {
        Some(h) => Ok((*h, PairSource::Certified)),
        None => Err(Failure::Numerical(
            "no certified Hopf point; set normalform.evaluate_at to evaluate at a given pair".into(),
        )),
    }
}

fn normal_forms(
    cfg: &RunConfig,
    eq: &Equilibrium,
    hopf: &HopfPoint,
) -> Result<Vec<NormalForm>, Failure> {
    let pair = eigenpair(&cfg.params, eq, hopf)?;
    FormulaVariant::ALL
        .iter()
        .map(|&v| normal_form_from_pair(&cfg.params, eq, hopf, &pair, v).map_err(Failure::from))
        .collect()
}

pub fn cmd_normalform(cfg: &RunConfig) -> Result<Report, Failure> {
    let eq = equilibrium(cfg)?;
    let (hopf, source) = hopf_for_normal_form(cfg, &eq)?;
    let forms = normal_forms(cfg, &eq, &hopf)?;
    let variants: Vec<VariantSummary> = forms.iter().map(variant_summary).collect();
    let selected = forms.iter().find(|f| f.variant == cfg.normalform.variant).copied().unwrap_or(forms[0]);
    let pair = selected.pair;
    let (_, b) = {
        let lp = crate::model::linear_matrices(&cfg.params, &eq);
        (lp.a, lp.b)
    };
    let mut messages = Vec::new();
    if source == PairSource::Configured {
        messages.push(format!(
            "evaluated at the configured pair; |Delta(i omega, tau)| = {:.3e}",
            hopf.delta_residual
        ));
    }
    let reference = reference_normal_form(&cfg.params, &eq, &hopf, &pair)?;
    let comparison = if published_params_active(&cfg.params) {
        let printed = variants.iter().find(|v| v.variant == FormulaVariant::Printed);
        let pattern = variants.iter().find(|v| v.variant == FormulaVariant::PatternConsistent);
        printed.zip(pattern).map(|(a, b)| comparison_table(a, b))
    } else {
        None
    };
    Ok(Report::Normalform(NormalFormReport {
        params: cfg.params,
        source,
        hopf,
        selected_variant: selected.variant,
        mu2: selected.quantities.mu2,
        beta2: selected.quantities.beta2,
        t2: selected.quantities.t2,
        variants,
        pairing_psi_phi: pair.pairing_psi_phi(&b),
        pairing_psi_phibar: pair.pairing_psi_phibar(&b),
        eigen_residual: pair.eigen_residual(&cfg.params, &eq),
        normal_form: selected,
        reference_sentences: sentences(&reference.quantities),
        reference,
        comparison,
        messages,
    }))
}

fn out_path(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn component(traj: &Trajectory, pick: fn(&crate::model::State) -> f64) -> (Vec<f64>, Vec<f64>) {
    (traj.times.clone(), traj.states.iter().map(pick).collect())
}

pub fn cmd_simulate(cfg: &RunConfig, prefix: &Path) -> Result<Report, Failure> {
    let opts = &cfg.simulate;
    let eq = equilibrium(cfg)?;
    let mut tau0 = None;
    let tau = match (opts.tau_factor, opts.tau) {
        (Some(f), _) => {
            let t0 = smallest_tau0(cfg, &eq)?;
            tau0 = Some(t0);
            f * t0
        }
        (None, Some(t)) => t,
        (None, None) => cfg.params.tau,
    };
    let params = cfg.params.with_tau(tau);
    let history = HistorySpec::perturbed(&eq, opts.perturbation);
    let traj = integrate_with(
        &params,
        &history,
        opts.t_end,
        opts.dt,
        &IntegrateOptions { quadrature: opts.quadrature, record_every: 1 },
    )?;
    let longterm = classify_longterm(&traj, &eq);

    let csv_path = out_path(prefix, "_trajectory.csv");
    let mut w = create(&csv_path)?;
    traj.write_csv(&mut w, opts.decimation)
        .and_then(|_| std::io::Write::flush(&mut w))
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", csv_path.display())))?;
    let rows = traj.len().div_ceil(opts.decimation);

    let overlay = if opts.overlay_waveform {
        let (hopf, _) = hopf_for_normal_form(cfg, &eq)?;
        tau0.get_or_insert(hopf.tau0);
        let forms = normal_forms(cfg, &eq, &hopf)?;
        let nf = forms.into_iter().find(|f| f.variant == cfg.normalform.variant).expect("both variants computed");
        let path = integrate_normal_form(&nf, Complex64::new(opts.overlay_z0, 0.0), opts.t_end, opts.dt)?;
        Some(analytic_waveform(&nf, &eq, &path))
    } else {
        None
    };

    let mut files = vec![csv_path.display().to_string()];
    let plots: [(&str, Pick); 2] = [("y1", |s| s.y1), ("y2", |s| s.y2)];
    for (name, pick) in plots {
        let (xs, ys) = component(&traj, pick);
        let mut series = vec![Series { label: name, xs: &xs, ys: &ys }];
        let over = overlay.as_ref().map(|o| component(o, pick));
        if let Some((oxs, oys)) = &over {
            series.push(Series { label: "center-manifold waveform", xs: oxs, ys: oys });
        }
        let title = format!("{name}(t), tau = {tau:.6}");
        let svg = line_plot(&title, "t", name, &series);
        let path = out_path(prefix, &format!("_{name}.svg"));
        write_text(&path, &svg)?;
        files.push(path.display().to_string());
    }

    Ok(Report::Simulate(SimulateReport {
        params,
        tau,
        tau0,
        dt: opts.dt,
        t_end: opts.t_end,
        perturbation: opts.perturbation,
        rows,
        files,
        overlay: overlay.is_some(),
        classification: longterm.class.as_str().into(),
        longterm,
    }))
}

/// Thread cap from `HOPFDDE_THREADS`, falling back to the available cores.
pub fn scan_threads() -> usize {
    std::env::var("HOPFDDE_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn scan_row(params: &ModelParams, eq: &Equilibrium, cfg: &RunConfig, tau: f64) -> ScanRow {
    let sc = &cfg.scan;
    let history = HistorySpec::perturbed(eq, sc.perturbation);
    let opts = IntegrateOptions { quadrature: sc.quadrature, record_every: 10 };
    match integrate_with(&params.with_tau(tau), &history, sc.t_end, sc.dt, &opts) {
        Ok(traj) => {
            let l = classify_longterm(&traj, eq);
            ScanRow {
                tau,
                classification: l.class.as_str().into(),
                final_amplitude: Some(l.final_amplitude),
                ratio: l.ratio.is_finite().then_some(l.ratio),
                error: None,
            }
        }
        Err(e) => ScanRow { tau, classification: "error".into(), final_amplitude: None, ratio: None, error: Some(e.to_string()) },
    }
}

/// Returns the report together with whether every row failed.
pub fn cmd_scan(cfg: &RunConfig, prefix: &Path) -> Result<(Report, bool), Failure> {
    let eq = equilibrium(cfg)?;
    let range = cfg.scan.tau_range;
    let tau0 = if range.relative_to_tau0 { Some(smallest_tau0(cfg, &eq)?) } else { None };
    let taus = range.points(tau0.unwrap_or(1.0));
    let threads = scan_threads();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Numerical(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<ScanRow> = pool.install(|| taus.par_iter().map(|&t| scan_row(&cfg.params, &eq, cfg, t)).collect());

    let path = out_path(prefix, "_scan.csv");
    let mut text = String::from("tau,classification,final_amplitude\n");
    for r in &rows {
        let amp = r.final_amplitude.map(|a| a.to_string()).unwrap_or_default();
        text.push_str(&format!("{},{},{}\n", r.tau, r.classification, amp));
    }
    write_text(&path, &text)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let all_failed = failed == rows.len();
    Ok((
        Report::Scan(ScanReport { params: cfg.params, tau0, threads, failed, rows, files: vec![path.display().to_string()] }),
        all_failed,
    ))
}
