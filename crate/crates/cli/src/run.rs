//! Experiment orchestration. Everything is computed before anything is written.

use nhbath::dressed::{bulk_dressed_state, edge_dressed_state, verify_eigenstate, DressedKind, DressedState};
use nhbath::dynamics::{
    decay_fit_window, emitter_populations, evolve, fit_decay_rate, localization_report, peak, photon_density,
    time_grid, Trajectory,
};
use nhbath::effective::{
    heff_closed_form, heff_lossless_limit, heff_numeric, interaction_range, EffectiveCouplingMatrix, RegimeChoice,
};
use nhbath::spectral::{bloch_spectrum, dense_spectrum, point_gap_winding, twisted_boundary_winding, WindingOutcome};
use nhbath::{total_hamiltonian, Boundary, Complex64, LatticeParams, Picture, SingleExcitationState};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig, HeffChoice};
use crate::export::{fmt_f64, write_bundle, Bundle, Csv};
use crate::CliError;

/// Build identifier recorded in every manifest.
pub fn build_id() -> String {
    format!("nhbath {}", env!("CARGO_PKG_VERSION"))
}

fn model<T>(op: &'static str, r: nhbath::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Model { op, source })
}

fn params_json(p: &LatticeParams) -> Value {
    json!({"N": p.n_cells, "t1": p.t1, "t2": p.t2, "gamma": p.gamma, "boundary": p.boundary.as_str()})
}

fn cplx(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Compute the datasets of an experiment without touching the file system.
pub fn compute(config: &ExperimentConfig) -> Result<Bundle, CliError> {
    if let Some(layout) = &config.emitters {
        for w in layout.diagnostics(&config.lattice) {
            log::warn!("{w:?}");
        }
    }
    match config.experiment {
        Experiment::Spectrum => spectrum(config),
        Experiment::Emit => emit(config, true),
        Experiment::Transfer => emit(config, false),
        Experiment::Heff => heff(config),
        Experiment::Dressed => dressed(config),
        Experiment::SweepGamma => sweep(config),
    }
}

/// Compute, then write the datasets and the manifest. Returns the file names written.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<String>, CliError> {
    let bundle = compute(config)?;
    write_bundle(&config.output_dir, &bundle, &config.to_json(), &build_id())
}

fn spectrum(config: &ExperimentConfig) -> Result<Bundle, CliError> {
    let p = &config.lattice;
    let result = match p.boundary {
        Boundary::Periodic => model("bloch_spectrum", bloch_spectrum(p))?,
        Boundary::Open => model("dense_spectrum", dense_spectrum(p))?,
    };
    let mut csv = Csv::new(&["re_E", "im_E", "boundary", "q_or_index"]);
    for (k, e) in result.eigenvalues.iter().enumerate() {
        let label = match &result.momenta {
            Some(q) => fmt_f64(q[k]),
            None => k.to_string(),
        };
        csv.row(&[fmt_f64(e.re), fmt_f64(e.im), p.boundary.as_str().into(), label]);
    }
    let mut summary = json!({
        "params": params_json(p),
        "defectivity": result.defectivity,
        "defective": result.is_defective(),
        "n_eigenvalues": result.eigenvalues.len(),
    });
    if let Some(e0) = config.e0 {
        let winding = match p.boundary {
            Boundary::Periodic => json!(model("point_gap_winding", point_gap_winding(p, e0))?),
            Boundary::Open => match model("twisted_boundary_winding", twisted_boundary_winding(p, e0))? {
                WindingOutcome::Winding(w) => json!(w),
                WindingOutcome::Trivial => json!("trivial"),
                WindingOutcome::Degenerate => json!("degenerate"),
            },
        };
        summary["E0"] = cplx(e0);
        summary["winding"] = winding;
    }
    let mut bundle = Bundle::default();
    bundle.add("spectrum.csv", csv.into_bytes());
    bundle.add_json("spectrum_summary.json", &summary);
    Ok(bundle)
}

fn trajectory(config: &ExperimentConfig, params: &LatticeParams, times: &[f64]) -> Result<Trajectory, CliError> {
    let layout = config.emitters.as_ref().expect("validated");
    let h = model("total_hamiltonian", total_hamiltonian(params, layout, Picture::Original))?;
    let psi = model(
        "excited_emitter",
        SingleExcitationState::excited_emitter(layout.len(), params.n_cells, config.initial - 1, Picture::Original),
    )?;
    model("evolve", evolve(&h, &psi, times, config.tol))
}

fn emit(config: &ExperimentConfig, with_density: bool) -> Result<Bundle, CliError> {
    let tg = config.time_grid.expect("validated");
    let times = model("time_grid", time_grid(tg.t_max, tg.n_points))?;
    let traj = trajectory(config, &config.lattice, &times)?;
    let pops = emitter_populations(&traj);

    let mut csv = Csv::new(&["t", "emitter_index", "p"]);
    for (k, t) in times.iter().enumerate() {
        for (e, series) in pops.iter().enumerate() {
            csv.row(&[fmt_f64(*t), (e + 1).to_string(), fmt_f64(series[k])]);
        }
    }
    let mut bundle = Bundle::default();
    bundle.add("populations.csv", csv.into_bytes());

    if with_density {
        let density = model("photon_density", photon_density(&traj, config.picture))?;
        let mut csv = Csv::new(&["t", "site_index", "density"]);
        for (t, row) in times.iter().zip(&density) {
            for (site, d) in row.iter().enumerate() {
                csv.row(&[fmt_f64(*t), (site + 1).to_string(), fmt_f64(*d)]);
            }
        }
        bundle.add("density.csv", csv.into_bytes());
    }

    let peaks: Vec<Value> = pops
        .iter()
        .enumerate()
        .map(|(e, s)| {
            let (t, p) = peak(&times, s);
            json!({"emitter": e + 1, "t_peak": t, "p_peak": p, "p_final": s[s.len() - 1]})
        })
        .collect();
    let mut summary = json!({
        "params": params_json(&config.lattice),
        "g": config.g(),
        "initial": config.initial,
        "final_norm": traj.norm_history[traj.norm_history.len() - 1],
        "substeps": traj.substeps,
        "emitters": peaks,
    });
    let layout = config.emitters.as_ref().expect("validated");
    if with_density && layout.len() == 1 && config.g() > 0.0 {
        let rate = config.g().powi(2) / (4.0 * config.lattice.t1);
        let window = decay_fit_window(rate);
        if window.1 <= tg.t_max {
            let fitted = model("fit_decay_rate", fit_decay_rate(&times, &pops[0], window))?;
            summary["decay_rate_fit"] = json!(fitted);
            summary["decay_rate_reference"] = json!(rate);
        }
        if config.t_av <= tg.t_max {
            let r = model("localization_report", localization_report(&traj, layout.cells[0], config.t_av))?;
            summary["localization"] = json!({"t_av": r.t_av, "P_loc": r.p_loc, "P_L": r.p_l, "P_R": r.p_r});
        }
    }
    bundle.add_json("summary.json", &summary);
    Ok(bundle)
}

fn heff_matrix(config: &ExperimentConfig) -> Result<EffectiveCouplingMatrix, CliError> {
    let p = &config.lattice;
    let layout = config.emitters.as_ref().expect("validated");
    match config.method {
        HeffChoice::Numeric => model("heff_numeric", heff_numeric(p, layout, Complex64::new(0.0, 0.0))),
        HeffChoice::ClosedForm => model("heff_closed_form", heff_closed_form(p, layout, RegimeChoice::Auto)),
        HeffChoice::Lossless => model("heff_lossless_limit", heff_lossless_limit(p, layout)),
    }
}

fn heff(config: &ExperimentConfig) -> Result<Bundle, CliError> {
    let h = heff_matrix(config)?;
    let layout = config.emitters.as_ref().expect("validated");
    let n = h.dim();
    let mut csv = Csv::new(&["m", "n", "re", "im"]);
    let mut entries = Vec::with_capacity(n * n);
    for m in 0..n {
        for k in 0..n {
            let z = h.entries[(m, k)];
            csv.row(&[layout.cells[m].to_string(), layout.cells[k].to_string(), fmt_f64(z.re), fmt_f64(z.im)]);
            entries.push(cplx(z));
        }
    }
    let p = &config.lattice;
    let lambda = if p.is_uniform() { json!(fmt_f64(interaction_range(p.gamma, p.t1))) } else { Value::Null };
    let doc = json!({
        "method": h.method.as_str(),
        "boundary": h.boundary.as_str(),
        "regime": h.regime.as_str(),
        "weak_coupling_valid": h.weak_coupling_valid,
        "params": params_json(p),
        "g": layout.g,
        "cells": layout.cells,
        "interaction_range": lambda,
        "entries": entries,
    });
    let mut bundle = Bundle::default();
    bundle.add_json("heff.json", &doc);
    bundle.add("heff.csv", csv.into_bytes());
    Ok(bundle)
}

fn dressed(config: &ExperimentConfig) -> Result<Bundle, CliError> {
    let p = &config.lattice;
    let g = config.g();
    let ds: DressedState = match config.dressed_kind {
        DressedKind::Bulk => {
            model("bulk_dressed_state", bulk_dressed_state(p, config.source_cell.expect("validated"), g))?
        }
        DressedKind::Edge => model("edge_dressed_state", edge_dressed_state(p, g))?,
    };
    let h = model("total_hamiltonian", ds.hamiltonian(p))?;
    let residual = model("verify_eigenstate", verify_eigenstate(&h, &ds))?;

    let mut csv = Csv::new(&["site_label", "re_amp", "im_amp", "modulus"]);
    let mut push = |label: String, z: Complex64| csv.row(&[label, fmt_f64(z.re), fmt_f64(z.im), fmt_f64(z.norm())]);
    push("e".into(), ds.state.emitter_amps[0]);
    for cell in 1..=p.n_cells {
        push(format!("alpha_{cell}"), ds.state.photon_amps[2 * (cell - 1)]);
        push(format!("beta_{cell}"), ds.state.photon_amps[2 * cell - 1]);
    }
    let summary = json!({
        "params": params_json(p),
        "kind": ds.kind.as_str(),
        "source_cell": ds.source_cell,
        "g": g,
        "energy": cplx(ds.energy),
        "residual": residual,
        "picture": "mapped",
    });
    let mut bundle = Bundle::default();
    bundle.add("dressed.csv", csv.into_bytes());
    bundle.add_json("dressed_summary.json", &summary);
    Ok(bundle)
}

fn sweep(config: &ExperimentConfig) -> Result<Bundle, CliError> {
    let tg = config.time_grid.expect("validated");
    let times = model("time_grid", time_grid(tg.t_max, tg.n_points))?;
    let cell = config.emitters.as_ref().expect("validated").cells[0];
    let gammas = config.gamma_values.as_ref().expect("validated");
    let reports = gammas
        .par_iter()
        .map(|&gamma| {
            let params = config.lattice.with_gamma(gamma);
            let traj = trajectory(config, &params, &times)?;
            model("localization_report", localization_report(&traj, cell, config.t_av))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(&["gamma", "P_loc", "P_L", "P_R"]);
    for (gamma, r) in gammas.iter().zip(&reports) {
        csv.row(&[fmt_f64(*gamma), fmt_f64(r.p_loc), fmt_f64(r.p_l), fmt_f64(r.p_r)]);
    }
    let mut bundle = Bundle::default();
    bundle.add("sweep.csv", csv.into_bytes());
    Ok(bundle)
}
