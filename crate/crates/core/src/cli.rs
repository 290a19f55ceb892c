//! Run configuration, study orchestration, and file outputs (CSV table,
//! SVG error plot, mesh/system/solution dumps).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::analysis::{self, ConvergenceTable, DiscreteSolution};
use crate::assembly;
use crate::geometry::Point2;
use crate::mesh::ElementKind;
use crate::{FemError, Result};

/// Fully resolved configuration of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case: String,
    pub element: ElementKind,
    pub levels: usize,
    pub gamma: f64,
    pub tol: f64,
    pub output: PathBuf,
    pub dump_mesh: bool,
    pub dump_system: bool,
    pub dump_solution: bool,
    pub plot: bool,
}

/// Optional fields as they appear in a JSON config file; command-line flags
/// override anything set here.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub case: Option<String>,
    pub element: Option<String>,
    pub levels: Option<usize>,
    pub gamma: Option<f64>,
    pub tol: Option<f64>,
    pub output: Option<PathBuf>,
    pub dump_mesh: Option<bool>,
    pub dump_system: Option<bool>,
    pub dump_solution: Option<bool>,
    pub plot: Option<bool>,
}

impl PartialConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| FemError::InvalidConfig(format!("{}: {e}", path.display())))
    }

    /// Field-wise merge; `self` wins over `fallback`.
    pub fn or(self, fallback: PartialConfig) -> PartialConfig {
        PartialConfig {
            case: self.case.or(fallback.case),
            element: self.element.or(fallback.element),
            levels: self.levels.or(fallback.levels),
            gamma: self.gamma.or(fallback.gamma),
            tol: self.tol.or(fallback.tol),
            output: self.output.or(fallback.output),
            dump_mesh: self.dump_mesh.or(fallback.dump_mesh),
            dump_system: self.dump_system.or(fallback.dump_system),
            dump_solution: self.dump_solution.or(fallback.dump_solution),
            plot: self.plot.or(fallback.plot),
        }
    }

    /// Applies defaults and validates.
    pub fn resolve(self) -> Result<RunConfig> {
        let case = self
            .case
            .ok_or_else(|| FemError::InvalidConfig("no case selected (use --case)".into()))?;
        let element = ElementKind::parse(self.element.as_deref().unwrap_or("p1"))?;
        let levels = self.levels.unwrap_or(4);
        if levels < 1 {
            return Err(FemError::InvalidConfig("levels must be at least 1".into()));
        }
        let gamma = self.gamma.unwrap_or(10.0);
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(FemError::InvalidConfig(format!("gamma must be positive, got {gamma}")));
        }
        let tol = self.tol.unwrap_or(1.0e-10);
        if !tol.is_finite() || tol <= 0.0 || tol >= 1.0 {
            return Err(FemError::InvalidConfig(format!("tol must lie in (0, 1), got {tol}")));
        }
        Ok(RunConfig {
            case,
            element,
            levels,
            gamma,
            tol,
            output: self.output.unwrap_or_else(|| PathBuf::from("out")),
            dump_mesh: self.dump_mesh.unwrap_or(false),
            dump_system: self.dump_system.unwrap_or(false),
            dump_solution: self.dump_solution.unwrap_or(false),
            plot: self.plot.unwrap_or(false),
        })
    }
}

/// Runs the configured study, writes all requested outputs under the output
/// directory, and prints one summary line per level. Returns the completed
/// table; a failed level still writes the partial table before erroring.
pub fn run(config: &RunConfig) -> Result<ConvergenceTable> {
    let case = analysis::cases::case_by_name(&config.case)?;
    println!(
        "case {} ({}), levels = {}, gamma = {}, tol = {:e}",
        config.case,
        config.element.label(),
        config.levels,
        config.gamma,
        config.tol
    );

    let outcome = analysis::run_convergence_study(
        &case,
        config.element,
        config.levels,
        config.gamma,
        config.tol,
    );

    std::fs::create_dir_all(&config.output)?;
    let csv_path = config.output.join("convergence.csv");
    std::fs::write(&csv_path, outcome.table.to_csv())?;

    for r in &outcome.table.records {
        let eoc = r.eoc.map_or_else(|| "   -".to_string(), |v| format!("{v:.3}"));
        println!(
            "level {}: h = {:.4e}, elements = {:>6}, dofs = {:>6}, l2_error = {:.6e}, eoc = {eoc}",
            r.level, r.h, r.elements, r.dofs, r.l2_error
        );
    }
    println!("wrote {}", csv_path.display());

    if let Some(finest) = &outcome.finest {
        write_optional_outputs(config, &case, finest, &outcome.table)?;
    }

    match outcome.failure {
        None => Ok(outcome.table),
        Some(e) => Err(e),
    }
}

fn write_optional_outputs(
    config: &RunConfig,
    case: &analysis::ManufacturedCase,
    finest: &DiscreteSolution,
    table: &ConvergenceTable,
) -> Result<()> {
    if config.dump_mesh {
        let path = config.output.join("mesh.txt");
        std::fs::write(&path, finest.mesh().dump())?;
        println!("wrote {}", path.display());
    }
    if config.dump_system {
        let problem = case.regularize()?;
        let system = assembly::assemble(finest.mesh(), &problem, config.gamma)?;
        let path = config.output.join("system.txt");
        std::fs::write(&path, system.dump())?;
        println!("wrote {}", path.display());
    }
    if config.dump_solution {
        let path = config.output.join("solution.csv");
        std::fs::write(&path, sample_solution_csv(finest)?)?;
        println!("wrote {}", path.display());
    }
    if config.plot {
        let path = config.output.join("error_plot.svg");
        std::fs::write(&path, emit_plot(table))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Samples the full discrete solution on a uniform grid of interior cell
/// centers covering the domain's bounding box; CSV columns `x,y,u_h`.
pub fn sample_solution_csv(solution: &DiscreteSolution) -> Result<String> {
    let domain = solution.mesh().domain();
    let (lo, hi) = domain
        .as_axis_aligned_rectangle()
        .unwrap_or((Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)));
    let width = hi.x - lo.x;
    let height = hi.y - lo.y;
    let nx = if width >= height { 64 } else { (64.0 * width / height).round() as usize };
    let ny = if height >= width { 64 } else { (64.0 * height / width).round() as usize };
    let mut out = String::from("x,y,u_h\n");
    for j in 0..ny {
        for i in 0..nx {
            // Cell centers: strictly interior, never on a singular marker.
            let x = lo.x + width * (i as f64 + 0.5) / nx as f64;
            let y = lo.y + height * (j as f64 + 0.5) / ny as f64;
            let value = solution.eval_full(Point2::new(x, y))?;
            out.push_str(&format!("{x:.15e},{y:.15e},{value:.15e}\n"));
        }
    }
    Ok(out)
}

/// Self-contained SVG: the study's (h, error) points on log-log axes with
/// markers and, when at least two points exist, a dashed slope-2 reference
/// line anchored at the last data point.
pub fn emit_plot(table: &ConvergenceTable) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const ML: f64 = 80.0; // left margin
    const MR: f64 = 24.0;
    const MT: f64 = 24.0;
    const MB: f64 = 64.0;

    let points: Vec<(f64, f64)> = table
        .records
        .iter()
        .filter(|r| {
            if r.l2_error <= 0.0 {
                eprintln!(
                    "warning: level {} has nonpositive error {:.3e}; omitted from plot",
                    r.level, r.l2_error
                );
                return false;
            }
            true
        })
        .map(|r| (r.h, r.l2_error))
        .collect();

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"sans-serif\" font-size=\"14\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));

    if points.is_empty() {
        svg.push_str("<text x=\"320\" y=\"240\" text-anchor=\"middle\">no data</text>\n</svg>\n");
        return svg;
    }

    let (mut lx0, mut lx1) = (f64::MAX, f64::MIN);
    let (mut ly0, mut ly1) = (f64::MAX, f64::MIN);
    for (h, e) in &points {
        lx0 = lx0.min(h.log10());
        lx1 = lx1.max(h.log10());
        ly0 = ly0.min(e.log10());
        ly1 = ly1.max(e.log10());
    }
    // Keep the reference line inside the viewport.
    if points.len() >= 2 {
        let (h_last, e_last) = *points.last().unwrap();
        for (h, _) in &points {
            let refv = e_last * (h / h_last) * (h / h_last);
            ly0 = ly0.min(refv.log10());
            ly1 = ly1.max(refv.log10());
        }
    }
    let pad = |lo: &mut f64, hi: &mut f64| {
        let span = (*hi - *lo).max(1.0e-6);
        *lo -= 0.08 * span;
        *hi += 0.08 * span;
    };
    pad(&mut lx0, &mut lx1);
    pad(&mut ly0, &mut ly1);

    let to_x = |h: f64| ML + (h.log10() - lx0) / (lx1 - lx0) * (W - ML - MR);
    let to_y = |e: f64| H - MB - (e.log10() - ly0) / (ly1 - ly0) * (H - MT - MB);

    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB
    ));
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR,
        H - MB
    ));
    // Decade ticks.
    for d in (lx0.ceil() as i32)..=(lx1.floor() as i32) {
        let x = to_x(10f64.powi(d));
        svg.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{}\" x2=\"{x:.1}\" y2=\"{}\" stroke=\"black\"/>\n",
            H - MB,
            H - MB + 6.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{}\" text-anchor=\"middle\">1e{d}</text>\n",
            H - MB + 22.0
        ));
    }
    for d in (ly0.ceil() as i32)..=(ly1.floor() as i32) {
        let y = to_y(10f64.powi(d));
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y:.1}\" x2=\"{ML}\" y2=\"{y:.1}\" stroke=\"black\"/>\n",
            ML - 6.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{y:.1}\" text-anchor=\"end\" dominant-baseline=\"middle\">1e{d}</text>\n",
            ML - 10.0
        ));
    }
    // Axis labels.
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">h</text>\n",
        ML + (W - ML - MR) / 2.0,
        H - 16.0
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.1})\">L2 error</text>\n",
        MT + (H - MT - MB) / 2.0,
        MT + (H - MT - MB) / 2.0
    ));

    // Slope-2 reference through the last (finest) data point.
    if points.len() >= 2 {
        let (h_last, e_last) = *points.last().unwrap();
        let (h_first, _) = points[0];
        let e_first_ref = e_last * (h_first / h_last) * (h_first / h_last);
        svg.push_str(&format!(
            "<line class=\"reference\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
             stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n",
            to_x(h_first),
            to_y(e_first_ref),
            to_x(h_last),
            to_y(e_last)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"gray\">slope 2</text>\n",
            to_x(h_first) + 8.0,
            to_y(e_first_ref) + 18.0
        ));
    }

    // Error polyline and markers.
    if points.len() >= 2 {
        let path: Vec<String> = points
            .iter()
            .map(|(h, e)| format!("{:.2},{:.2}", to_x(*h), to_y(*e)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
            path.join(" ")
        ));
    }
    for (h, e) in &points {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"steelblue\"/>\n",
            to_x(*h),
            to_y(*e)
        ));
    }

    svg.push_str("</svg>\n");
    svg
}
