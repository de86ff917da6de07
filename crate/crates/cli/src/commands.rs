//! Subcommand drivers. Each writes its tables into the output directory and returns a
//! short summary for the terminal.

use std::path::Path;

use nhfp_core::bands::uniform_k_grid;
use nhfp_core::dynamics::{cycle_positions, displacement_per_cycle};
use nhfp_core::floquet::quasienergy_distance;
use nhfp_core::floquet::spectral::{spectral_density_from_bands, uniform_e_grid};
use nhfp_core::{
    center_of_mass, gap_scan, norm_decay, oracle, propagate, spacetime_spectrum, FloquetProblem, GapCell, GapScanOptions,
    Input, SpectralInput, SpectralMap, Sublattice, Trajectory,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Table, Units};

fn label(s: Sublattice) -> &'static str {
    match s {
        Sublattice::A => "A",
        Sublattice::B => "B",
    }
}

fn spectral_input(s: Sublattice) -> SpectralInput {
    match s {
        Sublattice::A => SpectralInput::A,
        Sublattice::B => SpectralInput::B,
    }
}

pub fn bands(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let u = Units { si: cfg.output.si };
    let p = &cfg.model;
    let k_grid = uniform_k_grid(cfg.bands.n_k, p.a0);
    let bs = FloquetProblem::new(p, cfg.bands.n_harmonics)?.band_structure(&k_grid)?;

    let mut t = Table::new([
        "k".to_string(),
        "band".into(),
        u.energy_label("re_eps"),
        u.energy_label("im_eps"),
        u.energy_label("re_eps_unfolded"),
    ]);
    for (i, &k) in bs.k_grid.iter().enumerate() {
        for (b, band) in bs.bands.iter().enumerate() {
            let e = band.quasienergies[i];
            t.row(vec![
                k.into(),
                (b + 1).into(),
                u.energy(e.re).into(),
                u.energy(e.im).into(),
                u.energy(band.unfolded[i]).into(),
            ]);
        }
    }
    t.write(out, "bands.csv", "bands", cfg)?;

    let status = if bs.gap_closed() { "closed" } else { "open" };
    let mut s = Table::new(["quantity", "band", "value", "status"]);
    s.row(vec![u.energy_label("gap").into(), 0usize.into(), u.energy(bs.gap).into(), status.into()]);
    let mut lines = vec![format!("gap {:.6e} ({status})", u.energy(bs.gap))];
    for (b, w) in bs.windings().iter().enumerate() {
        let st = if w.is_defined() { "defined".to_string() } else { format!("undefined (residual {:.3e})", w.residual) };
        s.row(vec!["winding_raw".into(), (b + 1).into(), w.raw.into(), st.clone().into()]);
        s.row(vec!["winding".into(), (b + 1).into(), (w.z as f64).into(), st.clone().into()]);
        if w.is_defined() {
            lines.push(format!("band {} winding {:+}", b + 1, w.z));
        } else {
            lines.push(format!("band {} winding {st}, raw {:.6}", b + 1, w.raw));
        }
        s.row(vec![u.energy_label("mean_im_eps").into(), (b + 1).into(), u.energy(bs.bands[b].mean_im()).into(), "".into()]);
    }
    s.write(out, "bands_summary.csv", "bands", cfg)?;
    Ok(lines.join("\n"))
}

pub fn gapscan(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let u = Units { si: cfg.output.si };
    let g = &cfg.gapscan;
    let omegas = g.omega.values("gapscan.omega")?;
    let gammas = g.gamma0.values("gapscan.gamma0")?;
    let opts = GapScanOptions {
        n_k: g.n_k,
        n_harmonics: g.n_harmonics,
        closed_tol: g.closed_tol,
        ..GapScanOptions::default()
    };
    let r = gap_scan(&cfg.model, &omegas, &gammas, &opts)?;

    let mut t = Table::new([u.energy_label("omega"), u.energy_label("gamma0"), u.energy_label("gap"), "status".into()]);
    for (io, &om) in r.omega_grid.iter().enumerate() {
        for (ig, &ga) in r.gamma_grid.iter().enumerate() {
            let (gap, status) = match r.cell(io, ig) {
                GapCell::Gap(v) if *v < r.closed_tol => (u.energy(*v), "closed".to_string()),
                GapCell::Gap(v) => (u.energy(*v), "open".to_string()),
                GapCell::Failed(m) => (f64::NAN, format!("failed: {m}")),
            };
            t.row(vec![u.energy(om).into(), u.energy(ga).into(), gap.into(), status.into()]);
        }
    }
    t.write(out, "gapscan.csv", "gapscan", cfg)?;

    let mut th = Table::new([u.energy_label("omega"), u.energy_label("gamma_star"), "n_harmonics".into()]);
    let mut lines = vec![format!("truncation N_h = {}, failed cells {}", r.n_harmonics, r.failures())];
    for (&om, gs) in r.omega_grid.iter().zip(&r.thresholds) {
        let v = gs.map(|x| u.energy(x)).unwrap_or(f64::NAN);
        th.row(vec![u.energy(om).into(), v.into(), r.n_harmonics.into()]);
        lines.push(match gs {
            Some(x) => format!("omega {:.4}: gap closes at gamma0 {:.4}", u.energy(om), u.energy(*x)),
            None => format!("omega {:.4}: gap stays open on the grid", u.energy(om)),
        });
    }
    th.write(out, "threshold.csv", "gapscan", cfg)?;
    Ok(lines.join("\n"))
}

fn write_map(map: &SpectralMap, u: Units, out: &Path, name: &str, command: &str, cfg: &RunConfig) -> Result<(), CliError> {
    let mut t = Table::new(["k".to_string(), u.energy_label("energy"), "intensity".into()]);
    for (ik, &k) in map.k_grid.iter().enumerate() {
        for (ie, &e) in map.e_grid.iter().enumerate() {
            t.row(vec![k.into(), u.energy(e).into(), map.at(ik, ie).into()]);
        }
    }
    t.write(out, name, command, cfg)
}

fn write_trajectory(tr: &Trajectory, tag: &str, cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let u = Units { si: cfg.output.si };
    let mut t = Table::new([u.time_label("t"), "cell".into(), "sublattice".into(), "x".into(), "re".into(), "im".into()]);
    for (time, psi) in tr.times.iter().zip(&tr.states) {
        for (i, a) in psi.iter().enumerate() {
            let sub = if i % 2 == 0 { "A" } else { "B" };
            t.row(vec![u.time(*time).into(), (i / 2).into(), sub.into(), tr.position(i).into(), a.re.into(), a.im.into()]);
        }
    }
    t.write(out, &format!("trajectory_{tag}.csv"), "evolve", cfg)
}

pub fn evolve(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let u = Units { si: cfg.output.si };
    let e = &cfg.evolve;
    let opts = e.lattice.options();
    let mut lines = Vec::new();
    let mut summary = Table::new(["input", "quantity", "value"]);
    for &s in &e.inputs {
        let tag = label(s);
        let tr = propagate(&cfg.model, Input { cell: e.lattice.cell(), sublattice: s }, &opts)?;
        if e.write_amplitudes {
            write_trajectory(&tr, tag, cfg, out)?;
        }

        let com = center_of_mass(&tr);
        let cycles = cycle_positions(&tr);
        let mut t = Table::new(["kind".to_string(), "index".into(), u.time_label("t"), "x_com".into()]);
        for (i, (time, x)) in tr.times.iter().zip(&com).enumerate() {
            t.row(vec!["step".into(), i.into(), u.time(*time).into(), (*x).into()]);
        }
        let period = cfg.model.period();
        for (c, x) in cycles.iter().enumerate() {
            t.row(vec!["cycle".into(), c.into(), u.time(c as f64 * period).into(), (*x).into()]);
        }
        t.write(out, &format!("com_{tag}.csv"), "evolve", cfg)?;

        let mut n = Table::new([u.time_label("t"), "norm".into()]);
        for (time, v) in tr.times.iter().zip(&tr.norms) {
            n.row(vec![u.time(*time).into(), (*v).into()]);
        }
        n.write(out, &format!("norm_{tag}.csv"), "evolve", cfg)?;

        let slope = displacement_per_cycle(&tr)?;
        let fit = norm_decay(&tr)?;
        summary.row(vec![tag.into(), "displacement_per_cycle".into(), slope.into()]);
        summary.row(vec![tag.into(), u.energy_label("decay_rate").into(), u.energy(fit.rate).into()]);
        summary.row(vec![tag.into(), "decay_fit_residual".into(), fit.residual.into()]);
        summary.row(vec![tag.into(), "final_norm".into(), (*tr.norms.last().unwrap_or(&1.0)).into()]);
        lines.push(format!(
            "input {tag}: {slope:+.4} cells/cycle, decay rate {:.4e}, final norm {:.4e}",
            u.energy(fit.rate),
            tr.norms.last().unwrap_or(&1.0)
        ));

        if e.spectrum {
            let map = spacetime_spectrum(&tr, e.n_k, e.n_e)?;
            write_map(&map, u, out, &format!("spacetime_{tag}.csv"), "evolve", cfg)?;
        }
    }
    summary.write(out, "evolve_summary.csv", "evolve", cfg)?;
    Ok(lines.join("\n"))
}

pub fn spectrum(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let u = Units { si: cfg.output.si };
    let s = &cfg.spectrum;
    let p = &cfg.model;
    let mut lines = Vec::new();
    if s.analytic {
        let k_grid = uniform_k_grid(s.n_k, p.a0);
        let e_grid = uniform_e_grid(s.n_e, p.omega);
        let bs = FloquetProblem::new(p, s.n_harmonics)?.band_structure(&k_grid)?;
        let mut map = spectral_density_from_bands(&bs, &e_grid, spectral_input(s.input), s.eta)?;
        if s.normalize {
            map.normalize_per_k();
        }
        write_map(&map, u, out, "spectrum_analytic.csv", "spectrum", cfg)?;
        let shift = nhfp_core::pumped_shift(&bs, &map, 0)?;
        lines.push(format!("analytic map {}x{}, pumped shift of band 1 {shift:+.4}", s.n_k, s.n_e));
    }
    if s.simulated {
        let input = Input { cell: s.lattice.cell(), sublattice: s.input };
        let tr = propagate(p, input, &s.lattice.options())?;
        let mut map = spacetime_spectrum(&tr, s.n_k, s.n_e)?;
        if s.normalize {
            map.normalize_per_k();
        }
        write_map(&map, u, out, "spectrum_simulated.csv", "spectrum", cfg)?;
        lines.push(format!("simulated map {}x{} from {} cells over {} cycles", s.n_k, s.n_e, s.lattice.n_cells, s.lattice.n_cycles));
    }
    Ok(lines.join("\n"))
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
    message: String,
}

impl Check {
    fn passed(&self) -> bool {
        self.value.is_finite() && self.value <= self.tolerance
    }
}

fn measured(name: &'static str, tolerance: f64, r: Result<f64, nhfp_core::Error>) -> Check {
    match r {
        Ok(value) => Check { name, value, tolerance, message: String::new() },
        Err(e) => Check { name, value: f64::NAN, tolerance, message: e.to_string() },
    }
}

/// Numerical self-checks; any breach maps to exit code 2.
pub fn check(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let c = &cfg.check;
    let p = &cfg.model;
    let tol = c.tolerance;
    let k_grid = uniform_k_grid(c.n_k, p.a0);
    let problem = FloquetProblem::new(p, c.n_harmonics)?;
    let mut checks = Vec::new();

    let probe = [-std::f64::consts::PI / p.a0, 0.0, 0.5 * std::f64::consts::PI / p.a0];
    let mut conv = measured(
        "truncation_convergence",
        tol,
        probe.iter().try_fold(0.0f64, |m, &k| Ok(m.max(problem.truncation_error(k)?))),
    );
    if !conv.passed() && conv.message.is_empty() {
        conv.message = format!("quasienergies move by {:.3e} when N_h grows from {}; increase check.n_harmonics", conv.value, c.n_harmonics);
    }
    checks.push(conv);

    checks.push(measured(
        "oracle_agreement",
        tol,
        k_grid.iter().try_fold(0.0f64, |m, &k| {
            let a = problem.modes(k)?;
            let b = oracle::modes(p, k, c.monodromy_steps)?;
            Ok(m.max(quasienergy_distance(&a, &b, p.omega)))
        }),
    ));

    let sample: Vec<f64> = k_grid.iter().step_by((c.n_k / 8).max(1)).copied().collect();
    checks.push(measured(
        "biorthonormality",
        1e-10,
        sample
            .iter()
            .try_fold(0.0f64, |m, &k| Ok(m.max(problem.eigensystem(k)?.biorthonormality_residual()))),
    ));

    let bands = problem.band_structure(&k_grid);
    let im: Result<Vec<f64>, nhfp_core::Error> =
        bands.as_ref().map(|bs| bs.bands.iter().flat_map(|b| b.quasienergies.iter().map(|e| e.im)).collect()).map_err(Clone::clone);
    if p.gamma0 == 0.0 {
        checks.push(measured("hermitian_reality", 1e-10, im.map(|v| v.iter().fold(0.0f64, |m, x| m.max(x.abs())))));
    } else {
        checks.push(measured("loss_sign", 1e-10, im.map(|v| v.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x)).max(0.0))));
    }
    checks.push(measured("band_tracking", 0.5 * p.omega, bands.map(|bs| bs.max_step())));

    let mut t = Table::new(["check", "value", "tolerance", "status", "message"]);
    let mut lines = Vec::new();
    for ch in &checks {
        let status = if ch.passed() { "pass" } else { "fail" };
        t.row(vec![ch.name.into(), ch.value.into(), ch.tolerance.into(), status.into(), ch.message.clone().into()]);
        let mut line = format!("{status} {}: {:.3e} (tol {:.1e})", ch.name, ch.value, ch.tolerance);
        if !ch.message.is_empty() {
            line.push_str(&format!(" {}", ch.message));
        }
        lines.push(line);
    }
    t.write(out, "check.csv", "check", cfg)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(lines.join("\n"))
    } else {
        Err(CliError::Check(format!("{}\n{}", failed.join(", "), lines.join("\n"))))
    }
}
