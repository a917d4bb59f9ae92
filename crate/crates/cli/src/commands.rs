use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;
use specflow::asymptotics::{bounded_branches, detect_kappa, validate_asymptotics};
use specflow::critical::{definability, real_obstruction_witness, DefinabilityMode};
use specflow::flow::{self, CsvRow, EventKind, Trajectory, Window};
use specflow::linalg::eig_oracle_values;
use specflow::nonneg::{divergence_count, empirical_count};
use specflow::structured::{hamiltonian_forecast, observed_axes, verify_symmetry, StructureKind};
use specflow::{io, RankOneSystem, SpectralPortrait, C64};

use crate::output::OutDir;
use crate::svg::Plot;
use crate::Command;

pub struct Outcome {
    pub written: Vec<PathBuf>,
    /// False when a checking subcommand found a violated property.
    pub verified: bool,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(path: &Path) -> Result<RankOneSystem> {
    io::parse_system(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

pub fn run(command: Command, out: &Path) -> Result<Outcome> {
    let mut dir = OutDir::new(out)?;
    let verified = match command {
        Command::Portrait { file } => portrait(&load(&file)?, &mut dir)?,
        Command::Trace {
            file,
            theta,
            tmin,
            tmax,
            steps,
        } => trace(&load(&file)?, theta, tmin, tmax, steps, &mut dir)?,
        Command::Circle { file, t, steps } => circle(&load(&file)?, t, steps, &mut dir)?,
        Command::Levelset { file, t, window, res } => levelset(&load(&file)?, t, window, res, &mut dir)?,
        Command::Asymptotics { file, tau_grid, theta } => asymptotics(&load(&file)?, tau_grid, theta, &mut dir)?,
        Command::CheckStructured { file, tau_samples } => check_structured(&load(&file)?, &tau_samples, &mut dir)?,
        Command::CheckNonneg { file, edge, tau } => {
            let a = io::parse_matrix(&read(&file)?).with_context(|| format!("parsing {}", file.display()))?;
            check_nonneg(&a, &edge, tau, &mut dir)?
        }
        Command::Verify { file } => verify(&load(&file)?, &mut dir)?,
    };
    Ok(Outcome {
        written: dir.written,
        verified,
    })
}

fn portrait(sys: &RankOneSystem, dir: &mut OutDir) -> Result<bool> {
    let p = SpectralPortrait::new(sys)?;
    let witness = if sys.is_real() {
        real_obstruction_witness(sys)?
    } else {
        None
    };
    dir.json(
        "portrait.json",
        &json!({
            "n": sys.n(),
            "l": p.l(),
            "char_poly": p.char_poly.coeffs(),
            "min_poly": p.min_poly.coeffs(),
            "puv": p.puv.coeffs(),
            "q0": p.q0.coeffs(),
            "eigenvalues": p.eigs,
            "frozen": p.frozen,
            "critical": p.critical,
            "definability": {
                "real_ray": definability(&p, DefinabilityMode::RealRay),
                "unit_circle": definability(&p, DefinabilityMode::UnitCircle),
            },
            "real_witness": witness,
        }),
    )?;
    println!("l = {}, {} critical points", p.l(), p.critical.len());
    for cp in &p.critical {
        println!("  z = {:.6}, t = {:.6}", cp.z, cp.t);
    }
    Ok(true)
}

fn branch_plot(title: String, tr: &Trajectory, p: &SpectralPortrait) -> Plot {
    let mut plot = Plot::new(title);
    for &b in &tr.branch_ids {
        plot.line(tr.branch(b), false, b);
    }
    plot.dots(p.eigs.iter().map(|e| e.value).collect(), "black", 3.0);
    let collisions: Vec<C64> = tr
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Collision)
        .map(|e| e.z)
        .collect();
    plot.dots(collisions, "red", 4.0);
    plot
}

fn report_events(tr: &Trajectory) {
    for e in &tr.events {
        let t = e.critical_t.map(|t| format!(", t = {t:.6}")).unwrap_or_default();
        println!("  {:?} at z = {:.6}, tau = {:.6}{t}", e.kind, e.z, e.tau);
    }
}

fn trace(sys: &RankOneSystem, theta: f64, tmin: f64, tmax: f64, steps: usize, dir: &mut OutDir) -> Result<bool> {
    let p = SpectralPortrait::new(sys)?;
    let tr = flow::trace_ray(&p, theta, (tmin, tmax), steps)?;
    dir.csv::<CsvRow>("trajectory.csv", &tr.rows())?;
    let plot = branch_plot(format!("tau = t e^(i {theta}), t in [{tmin}, {tmax}]"), &tr, &p);
    dir.write("trace.svg", plot.render().as_bytes())?;
    println!(
        "{} branches, {} samples, max residual {:.2e}, {} events",
        tr.branch_ids.len(),
        tr.samples.len(),
        tr.max_residual,
        tr.events.len()
    );
    report_events(&tr);
    Ok(true)
}

fn circle(sys: &RankOneSystem, t: f64, steps: usize, dir: &mut OutDir) -> Result<bool> {
    let p = SpectralPortrait::new(sys)?;
    let tr = flow::sweep_circle(&p, t, steps)?;
    dir.csv::<CsvRow>("sweep.csv", &tr.rows())?;
    let singular = tr.events.iter().any(|e| e.kind == EventKind::Collision);
    dir.json(
        "sweep.json",
        &json!({
            "t": t,
            "steps": steps,
            "monodromy": tr.monodromy,
            "cycle_lengths": tr.cycle_lengths,
            "singular": singular,
            "events": tr.events,
            "max_residual": tr.max_residual,
        }),
    )?;
    let plot = branch_plot(format!("|tau| = {t}"), &tr, &p);
    dir.write("circle.svg", plot.render().as_bytes())?;
    println!("monodromy {:?}, cycles {:?}", tr.monodromy.clone().unwrap_or_default(), tr.cycle_lengths);
    if singular {
        println!("singular sweep: the circle passes a critical radius");
    }
    report_events(&tr);
    Ok(true)
}

fn levelset(sys: &RankOneSystem, t: f64, window: Option<Vec<f64>>, res: usize, dir: &mut OutDir) -> Result<bool> {
    let p = SpectralPortrait::new(sys)?;
    let window = match window.as_deref() {
        None => None,
        Some([x0, x1, y0, y1]) => Some(Window::new(*x0, *x1, *y0, *y1)?),
        Some(w) => bail!("--window needs four values x0,x1,y0,y1, got {}", w.len()),
    };
    let ls = flow::level_set(&p, t, window, res)?;
    let w = ls.window;
    let cell = ((w.x1 - w.x0) / res as f64).hypot((w.y1 - w.y0) / res as f64);
    let rows: Vec<CsvRow> = ls
        .polylines
        .iter()
        .enumerate()
        .flat_map(|(k, pl)| {
            let ls = &ls;
            pl.points.iter().map(move |z| CsvRow {
                parameter: t,
                branch_id: k,
                re: z.re,
                im: z.im,
                event_flag: ls.singular_points.iter().any(|cp| (cp.z - z).norm() <= 2.0 * cell) as u8,
            })
        })
        .collect();
    dir.csv("levelset.csv", &rows)?;
    let mut plot = Plot::new(format!("|Q(z)| = 1/{t}")).bounds(w.x0, w.x1, w.y0, w.y1);
    for (k, pl) in ls.polylines.iter().enumerate() {
        plot.line(pl.points.clone(), pl.closed, k);
    }
    plot.dots(p.eigs.iter().map(|e| e.value).collect(), "black", 3.0);
    if p.q_num.degree() >= 1 {
        plot.dots(p.q_num.root_values()?, "gray", 3.0);
    }
    plot.dots(ls.singular_points.iter().map(|cp| cp.z).collect(), "red", 4.0);
    dir.write("levelset.svg", plot.render().as_bytes())?;
    println!(
        "{} polylines ({} closed), {} singular points",
        ls.polylines.len(),
        ls.polylines.iter().filter(|p| p.closed).count(),
        ls.singular_points.len()
    );
    for cp in &ls.singular_points {
        println!("  self-intersection at z = {:.6} (t_j = {:.6})", cp.z, cp.t);
    }
    Ok(true)
}

fn asymptotics(sys: &RankOneSystem, grid: Option<Vec<f64>>, theta: f64, dir: &mut OutDir) -> Result<bool> {
    let model = detect_kappa(sys)?;
    let moduli = match grid {
        Some(g) => g,
        None if model.is_degenerate() => vec![1e2, 1e3, 1e4, 1e5, 1e6],
        None => {
            let base = 100f64.max(2.0 * model.tau_min);
            (0..5).map(|k| base * 10f64.powi(k)).collect()
        }
    };
    let taus: Vec<C64> = moduli.iter().map(|&r| C64::from_polar(r, theta)).collect();
    let report = validate_asymptotics(sys, &model, &taus)?;
    dir.json("asym.json", &json!({ "model": model, "report": report }))?;
    println!(
        "kappa = {:?}, c_-1 = {:.6}, c0 = {:.6}, c1 = {:.6}",
        model.kappa, model.c_minus1, model.c0, model.c1
    );
    if let Some(u) = &report.unbounded {
        println!("  unbounded branches: error slope {:?}", u.slope);
    }
    for b in &report.bounded {
        println!("  {}: error slope {:?}", b.label, b.slope);
    }
    let p = SpectralPortrait::new(sys)?;
    if !model.is_degenerate() {
        for b in bounded_branches(&p)? {
            if b.resolvent_sign_agrees() == Some(false) {
                println!(
                    "  note: at zeta = {:.6} (k = {}) the resolvent-power coefficient has the opposite sign",
                    b.zeta, b.k
                );
            }
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct AxesSample {
    tau: f64,
    observed: specflow::structured::Axes,
    forecast: specflow::structured::Axes,
}

fn check_structured(sys: &RankOneSystem, samples: &[f64], dir: &mut OutDir) -> Result<bool> {
    let ctx = sys
        .structure()
        .context("system has no \"structure\" field")?;
    let symmetry = verify_symmetry(sys, samples)?;
    let mut pass = symmetry.pass;
    let mut axes = Vec::new();
    let forecast = match ctx.kind {
        StructureKind::JHamiltonian => match hamiltonian_forecast(sys) {
            Ok(f) => {
                for tau in [1e6, -1e6] {
                    let vals = eig_oracle_values(&sys.matrix_at(C64::new(tau, 0.0)))?;
                    let expect = if tau > 0.0 { f.plus } else { f.minus };
                    let observed = observed_axes(&vals, f.count, 1e-3);
                    pass &= observed == expect;
                    axes.push(AxesSample {
                        tau,
                        observed,
                        forecast: expect,
                    });
                }
                Some(serde_json::to_value(f)?)
            }
            Err(e) => Some(json!({ "error": e.to_string() })),
        },
        StructureKind::HSelfadjoint => None,
    };
    dir.json(
        "structured.json",
        &json!({
            "kind": ctx.kind,
            "defect": ctx.defect(sys.a()),
            "forecast": forecast,
            "axes": axes,
            "symmetry": symmetry,
            "pass": pass,
        }),
    )?;
    println!("symmetry {}", if symmetry.pass { "holds" } else { "violated" });
    for a in &axes {
        println!("  tau = {:e}: observed {:?}, forecast {:?}", a.tau, a.observed, a.forecast);
    }
    Ok(pass)
}

fn check_nonneg(a: &specflow::CMatrix, edge: &[usize], tau: f64, dir: &mut OutDir) -> Result<bool> {
    let &[i, j] = edge else {
        bail!("--edge needs two 1-based indices i,j");
    };
    if i == 0 || j == 0 || i > a.n() || j > a.n() {
        bail!("--edge {i},{j} out of range for n = {}", a.n());
    }
    let (i0, j0) = (i - 1, j - 1);
    let d = divergence_count(a, i0, j0)?;
    let empirical = empirical_count(a, i0, j0, d.l, tau)?;
    let pass = d.check && empirical == d.l;
    dir.json(
        "nonneg.json",
        &json!({
            "edge": [i, j],
            "l": d.l,
            "index": d.index,
            "kappa": d.kappa,
            "edge_in_graph": d.edge_in_graph,
            "divisible": d.divisible,
            "check": d.check,
            "tau": tau,
            "empirical_count": empirical,
            "pass": pass,
        }),
    )?;
    println!(
        "l = {}, imprimitivity index {}, {} of {} eigenvalues above tau^(1/(l+1)) at tau = {tau:e}",
        d.l,
        d.index,
        empirical,
        a.n()
    );
    Ok(pass)
}

fn verify(sys: &RankOneSystem, dir: &mut OutDir) -> Result<bool> {
    let report = specflow::verify(sys)?;
    dir.json("verify.json", &report)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for c in &report.checks {
        let status = if c.skipped {
            "SKIP"
        } else if c.pass {
            "ok"
        } else {
            "FAIL"
        };
        println!("{status:>4} {}: {}", c.name, c.detail);
    }
    Ok(report.pass)
}
