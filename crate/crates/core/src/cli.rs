//! Command-line front end: configuration, dispatch and result records.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::curve::{
    make_cusp, make_implicit, make_map, normalize, pullback_form, pullback_function, CurveSpec,
};
use crate::form::TestForm;
use crate::kernels::{
    curve_kernel_assemble, stout_boundary_kernel, KernelError, KernelRole, WeightSpec,
};
use crate::obstruction::{
    build_jet_system, feasibility, required_order, Feasibility, AMBIENT_NAMES, PARAM_NAMES,
};
use crate::operators::{
    apply_k, apply_p, correct_solution, extract_residue_coeffs, membership_test, solve_dbar,
    verify_koppelman, Corrected, MembershipOptions, MembershipReport, OperatorError, Sampled,
    SolveOptions, Verdict,
};
use crate::parse::{parse_poly, VarTable};
use crate::regularization::{Bump, QuadratureSpec, RegularizationError, RegularizationSchedule};
use crate::residue::{residue_pair, ResidueError};
use crate::selftest::{run_all, spiral_targets};

/// One output line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub command: String,
    pub params: Value,
    pub value_re: f64,
    pub value_im: f64,
    pub error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TracePoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub delta: f64,
    pub value_re: f64,
    pub value_im: f64,
}

impl Record {
    pub fn new(command: &str, params: Value, value: Complex64, error: f64) -> Self {
        Record {
            command: command.to_string(),
            params,
            value_re: value.re,
            value_im: value.im,
            error,
            trace: None,
            verdict: None,
        }
    }

    pub fn with_verdict(mut self, v: impl Into<String>) -> Self {
        self.verdict = Some(v.into());
        self
    }

    pub fn with_trace(mut self, trace: &[(f64, Complex64)]) -> Self {
        self.trace = Some(
            trace
                .iter()
                .map(|(d, v)| TracePoint {
                    delta: *d,
                    value_re: v.re,
                    value_im: v.im,
                })
                .collect(),
        );
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    /// The target point stored in `params.t`, if any.
    fn target(&self) -> Option<(f64, f64)> {
        let t = self.params.get("t")?;
        Some((t.get(0)?.as_f64()?, t.get(1)?.as_f64()?))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveSection {
    /// `cusp`, `map` or `implicit`.
    pub kind: Option<String>,
    pub r: Option<u32>,
    pub s: Option<u32>,
    pub gamma: Option<[String; 2]>,
    pub a: Option<String>,
    pub ball_radius: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularizationSection {
    pub delta_max: Option<f64>,
    pub ratio: Option<f64>,
    pub count: Option<usize>,
    pub extrapolation_order: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub radial_points: Option<usize>,
    pub angular_points: Option<usize>,
    pub tol: Option<f64>,
    pub max_refinements: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Contents of a TOML config file; command-line flags override it.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub curve: CurveSection,
    pub regularization: RegularizationSection,
    pub quadrature: QuadratureSection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<Self, CliError> {
        toml::from_str(src).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Self::from_toml(&src)
    }

    /// Copy the command-line overrides into the config.
    pub fn merge(&mut self, a: &GlobalArgs) {
        if let Some(c) = &a.curve {
            self.curve = CurveSection {
                kind: Some(c.clone()),
                ball_radius: self.curve.ball_radius,
                ..CurveSection::default()
            };
        }
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = Some(v);
                }
            };
        }
        set!(self.curve.ball_radius, a.ball_radius);
        set!(self.regularization.delta_max, a.delta_max);
        set!(self.regularization.ratio, a.ratio);
        set!(self.regularization.count, a.count);
        set!(
            self.regularization.extrapolation_order,
            a.extrapolation_order
        );
        set!(self.quadrature.radial_points, a.radial_points);
        set!(self.quadrature.angular_points, a.angular_points);
        set!(self.quadrature.tol, a.tol);
        set!(self.quadrature.max_refinements, a.max_refinements);
        set!(self.output.path, a.output);
        set!(self.output.format, a.format);
    }

    /// The curve, if one is configured.
    pub fn curve_spec(&self) -> Result<Option<CurveSpec>, CliError> {
        let c = &self.curve;
        let ball = c.ball_radius.unwrap_or(1.0);
        let Some(kind) = &c.kind else { return Ok(None) };
        let spec = match kind.split_once(':') {
            Some((k, rest)) => parse_curve_descriptor(k, rest, ball)?,
            None => match kind.as_str() {
                "cusp" => {
                    let (r, s) = c.r.zip(c.s).ok_or_else(|| bad("cusp needs r and s"))?;
                    make_cusp(r, s, ball).map_err(|e| bad(e.to_string()))?
                }
                "map" => {
                    let [g1, g2] = c.gamma.as_ref().ok_or_else(|| bad("map needs gamma"))?;
                    map_curve(g1, g2, ball)?
                }
                "implicit" => {
                    implicit_curve(c.a.as_deref().ok_or_else(|| bad("implicit needs a"))?, ball)?
                }
                other => return Err(bad(format!("unknown curve kind {other:?}"))),
            },
        };
        Ok(Some(spec))
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let d = QuadratureSpec::default();
        let q = &self.quadrature;
        let spec = QuadratureSpec {
            radial_points: q.radial_points.unwrap_or(d.radial_points),
            angular_points: q.angular_points.unwrap_or(d.angular_points),
            adaptive_tolerance: q.tol.unwrap_or(d.adaptive_tolerance),
            max_refinements: q.max_refinements.unwrap_or(d.max_refinements),
            ..d
        };
        spec.validate().map_err(|e| bad(e.to_string()))?;
        Ok(spec)
    }

    /// The configured schedule with unset fields taken from `base`.
    pub fn schedule(
        &self,
        base: RegularizationSchedule,
    ) -> Result<RegularizationSchedule, CliError> {
        let r = &self.regularization;
        let s = RegularizationSchedule {
            delta_max: r.delta_max.unwrap_or(base.delta_max),
            ratio: r.ratio.unwrap_or(base.ratio),
            count: r.count.unwrap_or(base.count),
            extrapolation_order: r.extrapolation_order.unwrap_or(base.extrapolation_order),
        };
        s.validate().map_err(|e| bad(e.to_string()))?;
        Ok(s)
    }

    /// Everything that can be checked before a computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(b) = self.curve.ball_radius {
            if !(b > 0.0 && b.is_finite()) {
                return Err(bad(format!("ball_radius must be positive, got {b}")));
            }
        }
        self.curve_spec()?;
        self.quadrature()?;
        self.schedule(RegularizationSchedule::for_disc(1.0))?;
        Ok(())
    }
}

fn bad(m: impl Into<String>) -> CliError {
    CliError::Validation(m.into())
}

fn map_curve(g1: &str, g2: &str, ball: f64) -> Result<CurveSpec, CliError> {
    let u = VarTable::univariate();
    let p1 = parse_poly(g1, &u).map_err(|e| bad(format!("{g1:?}: {e}")))?;
    let p2 = parse_poly(g2, &u).map_err(|e| bad(format!("{g2:?}: {e}")))?;
    make_map(p1, p2, ball).map_err(|e| bad(e.to_string()))
}

fn implicit_curve(a: &str, ball: f64) -> Result<CurveSpec, CliError> {
    let p = parse_poly(a, &VarTable::plane()).map_err(|e| bad(format!("{a:?}: {e}")))?;
    make_implicit(p, ball).map_err(|e| bad(e.to_string()))
}

/// `cusp:r,s`, `map:γ₁,γ₂` or `implicit:a`.
fn parse_curve_descriptor(kind: &str, rest: &str, ball: f64) -> Result<CurveSpec, CliError> {
    match kind {
        "cusp" => {
            let (r, s) = rest
                .split_once(',')
                .and_then(|(r, s)| Some((r.trim().parse().ok()?, s.trim().parse().ok()?)))
                .ok_or_else(|| bad(format!("cusp needs two integers, got {rest:?}")))?;
            make_cusp(r, s, ball).map_err(|e| bad(e.to_string()))
        }
        "map" => {
            let (g1, g2) = rest
                .split_once(',')
                .ok_or_else(|| bad(format!("map needs two polynomials, got {rest:?}")))?;
            map_curve(g1.trim(), g2.trim(), ball)
        }
        "implicit" => implicit_curve(rest, ball),
        other => Err(bad(format!("unknown curve kind {other:?}"))),
    }
}

/// Failure classes and their exit codes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    NonConvergent(String),
    #[error("{0}")]
    Acceptance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::NonConvergent(_) => 2,
            CliError::Acceptance(_) => 3,
        }
    }
}

fn from_regularization(e: &RegularizationError) -> CliError {
    match e {
        RegularizationError::NonConvergent { .. } | RegularizationError::Diverging { .. } => {
            CliError::NonConvergent(e.to_string())
        }
        _ => bad(e.to_string()),
    }
}

impl From<RegularizationError> for CliError {
    fn from(e: RegularizationError) -> Self {
        from_regularization(&e)
    }
}

impl From<OperatorError> for CliError {
    fn from(e: OperatorError) -> Self {
        match &e {
            OperatorError::AtTarget { source, .. } | OperatorError::Regularization(source) => {
                match from_regularization(source) {
                    CliError::NonConvergent(_) => CliError::NonConvergent(e.to_string()),
                    _ => bad(e.to_string()),
                }
            }
            _ => bad(e.to_string()),
        }
    }
}

impl From<ResidueError> for CliError {
    fn from(e: ResidueError) -> Self {
        match &e {
            ResidueError::Regularization(r) => from_regularization(r),
            _ => bad(e.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        bad(e.to_string())
    }
}

#[derive(Clone, Debug, Default, clap::Args)]
pub struct GlobalArgs {
    /// TOML config with [curve], [regularization], [quadrature], [output].
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// `cusp:2,3`, `map:t^3,t^7+t^8` or `implicit:z1^2-z2^3`.
    #[arg(long, global = true)]
    pub curve: Option<String>,
    /// Radius of the ambient ball around the singular point.
    #[arg(long, global = true)]
    pub ball_radius: Option<f64>,
    /// Largest regularization radius.
    #[arg(long, global = true)]
    pub delta_max: Option<f64>,
    /// Ratio between consecutive regularization radii.
    #[arg(long, global = true)]
    pub ratio: Option<f64>,
    /// Number of regularization radii.
    #[arg(long, global = true)]
    pub count: Option<usize>,
    /// Polynomial order of the δ → 0 extrapolation.
    #[arg(long, global = true)]
    pub extrapolation_order: Option<usize>,
    /// Gauss points per radial panel.
    #[arg(long, global = true)]
    pub radial_points: Option<usize>,
    /// Trapezoid points per circle; must be even.
    #[arg(long, global = true)]
    pub angular_points: Option<usize>,
    /// Target quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Mesh doublings before giving up.
    #[arg(long, global = true)]
    pub max_refinements: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Record format (default: json).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Parser)]
#[command(
    name = "koppelman",
    version,
    about = "Residue currents and Koppelman operators on singular plane curves"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RoleArg {
    K,
    P,
}

#[derive(Debug, Subcommand)]
pub enum KernelAction {
    /// The scalar kernel factor F(tau, t) and its diagnostics.
    Eval {
        #[arg(long, value_enum, default_value = "k")]
        role: RoleArg,
        /// `re,im`
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pair dbar(1/t^m) with psi(t, tb) times a bump.
    Residue {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value = "1")]
        psi: String,
        /// Outer radius of the bump multiplying psi.
        #[arg(long, default_value_t = 0.8)]
        support: f64,
    },
    /// Point evaluations of the curve kernels.
    Kernel {
        #[command(subcommand)]
        action: KernelAction,
    },
    /// K applied to the pullback of p dzb1 + q dzb2 (times a bump) and,
    /// with --verify, the residual of the Koppelman identity.
    Koppelman {
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value = "0")]
        p: String,
        #[arg(long, default_value = "1")]
        q: String,
        #[arg(long, default_value_t = 20)]
        targets: usize,
    },
    /// P applied to the pullback of a holomorphic polynomial, next to the
    /// boundary-integral formula.
    Reproduce {
        #[arg(long, default_value = "z2")]
        phi: String,
        #[arg(long, default_value_t = 10)]
        targets: usize,
    },
    /// Solve dbar u = mu for mu the pullback of p dzb1 + q dzb2 times a bump.
    SolveDbar {
        #[arg(long, default_value = "0")]
        p: String,
        #[arg(long, default_value = "z2")]
        q: String,
        #[arg(long, default_value_t = 0.4)]
        bump_inner: f64,
        #[arg(long, default_value_t = 0.6)]
        bump_outer: f64,
    },
    /// Boundary-condition test for u(t, tb) + planted/t.
    Membership {
        #[arg(long)]
        u: String,
        /// `re,im` coefficient of an added 1/t term.
        #[arg(long, allow_hyphen_values = true)]
        planted: Option<String>,
        /// Also extract the residue and test the corrected function.
        #[arg(long)]
        correct: bool,
    },
    /// Exact jet-space test for a smooth solution of dbar psi = mu.
    Obstruction {
        #[arg(long)]
        mu: String,
        #[arg(long)]
        order: Option<u32>,
    },
    /// The full acceptance suite.
    Selftest,
}

fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let p = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| bad(format!("{s:?}: {e}")))
    };
    Ok(Complex64::new(p(re)?, p(im)?))
}

fn cpair(t: Complex64) -> Value {
    json!([t.re, t.im])
}

/// Records plus the plot traces that go to side files in CSV mode.
#[derive(Debug, Default)]
pub struct Output {
    pub records: Vec<Record>,
}

impl Output {
    fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn json_lines(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            let _ = writeln!(s, "{}", r.to_json());
        }
        s
    }

    /// `t_re,t_im,value_re,value_im,error`, one row per record with a target.
    pub fn csv_table(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| bad(e.to_string());
        w.write_record(["t_re", "t_im", "value_re", "value_im", "error"])
            .map_err(io)?;
        for r in &self.records {
            let Some((a, b)) = r.target() else { continue };
            w.serialize((a, b, r.value_re, r.value_im, r.error))
                .map_err(io)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| bad(e.to_string()))?)
            .map_err(|e| bad(e.to_string()))
    }

    /// `record,delta,value_re,value_im` for every trace.
    pub fn csv_traces(&self) -> Result<Option<String>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| bad(e.to_string());
        w.write_record(["record", "delta", "value_re", "value_im"])
            .map_err(io)?;
        let mut any = false;
        for (i, r) in self.records.iter().enumerate() {
            for p in r.trace.iter().flatten() {
                any = true;
                w.serialize((i, p.delta, p.value_re, p.value_im))
                    .map_err(io)?;
            }
        }
        let s = String::from_utf8(w.into_inner().map_err(|e| bad(e.to_string()))?)
            .map_err(|e| bad(e.to_string()))?;
        Ok(any.then_some(s))
    }
}

fn write_out(out: &Output, cfg: &RunConfig) -> Result<(), CliError> {
    let format = cfg.output.format.unwrap_or_default();
    let (main, side) = match format {
        Format::Json => (out.json_lines(), None),
        Format::Csv => (out.csv_table()?, out.csv_traces()?),
    };
    match &cfg.output.path {
        Some(p) => {
            fs::write(p, main).map_err(|e| bad(format!("{}: {e}", p.display())))?;
            if let Some(s) = side {
                let tp = p.with_extension("trace.csv");
                fs::write(&tp, s).map_err(|e| bad(format!("{}: {e}", tp.display())))?;
            }
        }
        None => {
            let mut so = std::io::stdout().lock();
            let _ = so.write_all(main.as_bytes());
            if let Some(s) = side {
                let _ = so.write_all(b"\n");
                let _ = so.write_all(s.as_bytes());
            }
        }
    }
    Ok(())
}

fn need_curve(cfg: &RunConfig) -> Result<CurveSpec, CliError> {
    cfg.curve_spec()?
        .ok_or_else(|| bad("this command needs --curve or a [curve] section"))
}

fn ambient(s: &str) -> Result<crate::poly::AmbientPoly<crate::poly::QI>, CliError> {
    parse_poly(s, &VarTable::ambient()).map_err(|e| bad(format!("{s:?}: {e}")))
}

fn membership_records(out: &mut Output, stage: &str, rep: &MembershipReport) {
    for t in rep.tests.iter().chain(&rep.moments) {
        if let Some(v) = &t.value {
            out.push(
                Record::new(
                    "membership",
                    json!({"stage": stage, "test": t.label}),
                    v.value,
                    v.error_estimate,
                )
                .with_trace(&v.trace),
            );
        }
    }
    out.push(
        Record::new(
            "membership",
            json!({"stage": stage, "summary": true}),
            Complex64::new(0.0, 0.0),
            0.0,
        )
        .with_verdict(rep.verdict.to_string()),
    );
}

fn diverging(v: &Verdict) -> bool {
    matches!(v, Verdict::Diverging { .. })
}

/// Execute one command; records are returned even when the exit code is
/// nonzero.
pub fn execute(command: &Command, cfg: &RunConfig) -> Result<Output, (Output, CliError)> {
    let mut out = Output::default();
    let r = execute_into(command, cfg, &mut out);
    match r {
        Ok(()) => Ok(out),
        Err(e) => Err((out, e)),
    }
}

fn execute_into(command: &Command, cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    cfg.validate()?;
    let quad = cfg.quadrature()?;
    match command {
        Command::Residue { m, psi, support } => {
            if !(*support > 0.0) {
                return Err(bad("support must be positive"));
            }
            let form = TestForm::parse(psi, Some(Bump::with_support(*support)))
                .map_err(|e| bad(format!("{psi:?}: {e}")))?;
            let sched = cfg.schedule(RegularizationSchedule::for_disc(*support))?;
            let v = residue_pair(*m, &form, &sched, &quad)?;
            out.push(
                Record::new(
                    "residue",
                    json!({"m": m, "psi": psi, "support": support}),
                    v.value,
                    v.error_estimate,
                )
                .with_trace(&v.trace),
            );
        }
        Command::Kernel {
            action: KernelAction::Eval { role, tau, t },
        } => {
            let spec = need_curve(cfg)?;
            let (tau, t) = (parse_complex(tau)?, parse_complex(t)?);
            let role = match role {
                RoleArg::K => KernelRole::SolutionK,
                RoleArg::P => KernelRole::ProjectionP,
            };
            let rho = normalize(&spec)
                .map_err(|e| bad(e.to_string()))?
                .disc_radius;
            let k = curve_kernel_assemble(&spec, WeightSpec::for_disc(rho), role)?;
            let f = k.factor(tau, t);
            let (chi, dchi) = k.chi(tau);
            let branch = k.branch_consistency(64)?;
            out.push(Record::new(
                "kernel",
                json!({
                    "curve": spec.to_string(),
                    "role": format!("{role:?}"),
                    "variant": format!("{:?}", k.variant),
                    "tau": cpair(tau),
                    "t": cpair(t),
                    "disc_radius": rho,
                    "origin_pole_order": k.origin_pole_order(),
                    "distance": (tau - t).norm(),
                    "chi": chi,
                    "dbar_chi": cpair(dchi),
                    "branch_disagreement": branch,
                }),
                f,
                0.0,
            ));
        }
        Command::Koppelman {
            verify,
            p,
            q,
            targets,
        } => {
            let spec = need_curve(cfg)?;
            let param = normalize(&spec).map_err(|e| bad(e.to_string()))?;
            let k = curve_kernel_assemble(
                &spec,
                WeightSpec::for_disc(param.disc_radius),
                KernelRole::SolutionK,
            )?;
            let phi = pullback_form(
                &param,
                &ambient(p)?,
                &ambient(q)?,
                Some(Bump::new(0.4, 0.6)),
            );
            let ts = spiral_targets(*targets, 0.2, 0.6 * param.disc_radius);
            if *verify {
                let rep = verify_koppelman(&k, &phi, &ts, &quad)?;
                for row in &rep.rows {
                    out.push(Record::new(
                        "koppelman",
                        json!({"t": cpair(row.t), "abs_t": row.t.norm(), "phi": cpair(row.phi)}),
                        row.dbar_k + row.k_dbar + row.p,
                        row.residual,
                    ));
                }
                let pass = rep.max_residual <= 1e-3;
                out.push(
                    Record::new(
                        "koppelman",
                        json!({"max_residual": rep.max_residual, "tolerance": 1e-3}),
                        Complex64::new(rep.max_residual, 0.0),
                        0.0,
                    )
                    .with_verdict(if pass { "pass" } else { "fail" }),
                );
                if !pass {
                    return Err(CliError::Acceptance(format!(
                        "Koppelman residual {:.3e} > 1e-3",
                        rep.max_residual
                    )));
                }
            } else {
                for s in apply_k(&k, &phi, &ts, &quad)? {
                    out.push(Record::new(
                        "koppelman",
                        json!({"t": cpair(s.t)}),
                        s.value,
                        s.error,
                    ));
                }
            }
        }
        Command::Reproduce { phi, targets } => {
            let spec = need_curve(cfg)?;
            let param = normalize(&spec).map_err(|e| bad(e.to_string()))?;
            let k = curve_kernel_assemble(
                &spec,
                WeightSpec::for_disc(param.disc_radius),
                KernelRole::ProjectionP,
            )?;
            let plane =
                parse_poly(phi, &VarTable::plane()).map_err(|e| bad(format!("{phi:?}: {e}")))?;
            let hol = crate::poly::AmbientPoly::from_terms(
                plane.terms().map(|(e, c)| ([e[0], 0, e[1], 0], c.clone())),
            );
            let psi = pullback_function(&param, &hol, None);
            let ts = spiral_targets(*targets, 0.2, 0.6 * param.disc_radius);
            let mut worst: f64 = 0.0;
            for s in apply_p(&k, &psi, &ts, &quad)? {
                let exact = psi.eval(s.t);
                let boundary = stout_boundary_kernel(&spec, &plane, s.t, &quad)?;
                let e = (s.value - exact).norm() / exact.norm().max(f64::MIN_POSITIVE);
                let eb = (boundary - exact).norm() / exact.norm().max(f64::MIN_POSITIVE);
                worst = worst.max(e).max(eb);
                out.push(Record::new(
                    "reproduce",
                    json!({"t": cpair(s.t), "phi": cpair(exact), "boundary": cpair(boundary), "relative_error": e}),
                    s.value,
                    s.error,
                ));
            }
            let pass = worst <= 1e-3;
            out.push(
                Record::new(
                    "reproduce",
                    json!({"max_relative_error": worst, "tolerance": 1e-3}),
                    Complex64::new(worst, 0.0),
                    0.0,
                )
                .with_verdict(if pass { "pass" } else { "fail" }),
            );
            if !pass {
                return Err(CliError::Acceptance(format!(
                    "reproduction error {worst:.3e} > 1e-3"
                )));
            }
        }
        Command::SolveDbar {
            p,
            q,
            bump_inner,
            bump_outer,
        } => {
            if !(0.0 < *bump_inner && bump_inner < bump_outer) {
                return Err(bad("need 0 < bump_inner < bump_outer"));
            }
            let spec = need_curve(cfg)?;
            let param = normalize(&spec).map_err(|e| bad(e.to_string()))?;
            let k = curve_kernel_assemble(
                &spec,
                WeightSpec::for_disc(param.disc_radius),
                KernelRole::SolutionK,
            )?;
            let mu = pullback_form(
                &param,
                &ambient(p)?,
                &ambient(q)?,
                Some(Bump::new(*bump_inner, *bump_outer)),
            );
            let mut opts = SolveOptions::for_problem(&k, &mu);
            opts.quad = QuadratureSpec {
                max_refinements: opts.quad.max_refinements.min(quad.max_refinements),
                ..quad
            };
            opts.membership.schedule = cfg.schedule(opts.membership.schedule)?;
            let rep = solve_dbar(&k, &mu, &opts)?;
            for (t, r) in &rep.dbar_residuals {
                out.push(Record::new(
                    "solve-dbar",
                    json!({"t": cpair(*t), "quantity": "dbar residual"}),
                    Complex64::new(*r, 0.0),
                    *r,
                ));
            }
            for (e, c) in &rep.correction.terms {
                out.push(Record::new(
                    "solve-dbar",
                    json!({"correction_exponent": e}),
                    *c,
                    0.0,
                ));
            }
            membership_records(out, "before", &rep.membership_before);
            membership_records(out, "after", &rep.membership_after);
            if let Some(w) = &rep.coefficients.warning {
                eprintln!("warning: {w}");
            }
            if diverging(&rep.membership_after.verdict) {
                return Err(CliError::NonConvergent(
                    rep.membership_after.verdict.to_string(),
                ));
            }
        }
        Command::Membership {
            u,
            planted,
            correct,
        } => {
            let spec = need_curve(cfg)?;
            let param = normalize(&spec).map_err(|e| bad(e.to_string()))?;
            let omega = crate::curve::structure_form(&spec).map_err(|e| bad(e.to_string()))?;
            let form = TestForm::parse(u, None).map_err(|e| bad(format!("{u:?}: {e}")))?;
            let c = planted
                .as_deref()
                .map(parse_complex)
                .transpose()?
                .unwrap_or_default();
            let f = Sampled(|t: Complex64| form.eval(t) + c / t);
            let mut opts = MembershipOptions::within(0.35 * param.disc_radius);
            opts.schedule = cfg.schedule(opts.schedule)?;
            opts.quad = quad;
            let rep = membership_test(&f, &omega, &param, &opts)?;
            membership_records(out, "input", &rep);
            let mut verdict = rep.verdict;
            if *correct {
                let co = extract_residue_coeffs(&f, &omega, opts.j_max(&omega), &opts)?;
                let corr = correct_solution(&co, &omega);
                for (e, v) in &corr.terms {
                    out.push(Record::new(
                        "membership",
                        json!({"correction_exponent": e}),
                        *v,
                        0.0,
                    ));
                }
                let fixed = Corrected {
                    base: &f,
                    correction: &corr,
                };
                let after = membership_test(&fixed, &omega, &param, &opts)?;
                membership_records(out, "corrected", &after);
                verdict = after.verdict;
            }
            if diverging(&verdict) {
                return Err(CliError::NonConvergent(verdict.to_string()));
            }
        }
        Command::Obstruction { mu, order } => {
            let spec = need_curve(cfg)?;
            let param = normalize(&spec).map_err(|e| bad(e.to_string()))?;
            let m =
                parse_poly(mu, &VarTable::parameter()).map_err(|e| bad(format!("{mu:?}: {e}")))?;
            let target = crate::obstruction::dbar_primitive(&m)
                .total_degree()
                .unwrap_or(0);
            let order = order.unwrap_or_else(|| required_order(&param, target));
            let sys = build_jet_system(&param, &m, order).map_err(|e| bad(e.to_string()))?;
            let f = feasibility(&sys);
            let mut params = json!({
                "curve": spec.to_string(),
                "mu": mu,
                "order": order,
                "rows": sys.rows.len(),
                "columns": sys.columns.len(),
            });
            match &f {
                Feasibility::Infeasible { certificate } => {
                    let terms: Vec<Value> = sys
                        .certificate_terms(certificate)
                        .into_iter()
                        .map(|(row, v)| json!({"row": row, "value": v.to_string()}))
                        .collect();
                    params["certificate"] = Value::Array(terms);
                }
                Feasibility::Feasible {
                    witness,
                    holomorphic,
                } => {
                    params["witness"] = json!(witness.named(AMBIENT_NAMES).to_string());
                    params["holomorphic"] = json!(holomorphic.named(PARAM_NAMES).to_string());
                }
                Feasibility::Inconclusive { witness } => {
                    params["witness"] = json!(witness.named(AMBIENT_NAMES).to_string());
                }
            }
            out.push(
                Record::new("obstruction", params, Complex64::new(0.0, 0.0), 0.0)
                    .with_verdict(f.label()),
            );
        }
        Command::Selftest => {
            let results = run_all();
            for r in &results {
                eprintln!("{}", r.line());
            }
            out.records.extend(crate::selftest::records(&results));
            let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
            if !failed.is_empty() {
                return Err(CliError::Acceptance(format!("criteria failed: {failed:?}")));
            }
        }
    }
    Ok(())
}

/// Parse, configure, run and write; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let mut cfg = match &cli.global.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return e.exit_code();
            }
        },
        None => RunConfig::default(),
    };
    cfg.merge(&cli.global);
    if let Some(n) = cli.global.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 1;
        }
        // fails only if a pool already exists, which keeps its size
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let (out, err) = match execute(&cli.command, &cfg) {
        Ok(o) => (o, None),
        Err((o, e)) => (o, Some(e)),
    };
    if let Err(e) = write_out(&out, &cfg) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match err {
        None => 0,
        Some(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let cfg = RunConfig::from_toml(
            r#"
[curve]
kind = "cusp"
r = 2
s = 3
ball_radius = 1.0

[regularization]
delta_max = 0.1
count = 6

[quadrature]
radial_points = 12
tol = 1e-9

[output]
format = "csv"
"#,
        )
        .unwrap();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.output.format, Some(Format::Csv));
        assert_eq!(cfg.quadrature().unwrap().radial_points, 12);
        let s = cfg.schedule(RegularizationSchedule::for_disc(1.0)).unwrap();
        assert_eq!((s.delta_max, s.count, s.ratio), (0.1, 6, 0.5));
    }

    #[test]
    fn validation_errors() {
        let cfg = RunConfig::from_toml("[curve]\nkind = \"cusp\"\nr = 2\ns = 4\n").unwrap();
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 1);
        assert!(RunConfig::from_toml("[curve]\nbogus = 1\n").is_err());
        let cfg = RunConfig::from_toml("[quadrature]\nangular_points = 7\n").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = RunConfig::from_toml("[regularization]\nratio = 1.5\n").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn curve_descriptors() {
        for (d, ok) in [
            ("cusp:2,3", true),
            ("cusp:2,4", false),
            ("map:t^3,t^7+t^8", true),
            ("map:t^2,t^4", false),
            ("implicit:z1^2-z2^3", true),
            ("helix:1", false),
        ] {
            let mut cfg = RunConfig::default();
            cfg.curve.kind = Some(d.into());
            assert_eq!(cfg.curve_spec().is_ok(), ok, "{d}");
        }
    }

    #[test]
    fn obstruction_command() {
        let mut cfg = RunConfig::default();
        cfg.curve.kind = Some("map:t^3,t^7+t^8".into());
        let cmd = Command::Obstruction {
            mu: "3*(conj(t)^9+conj(t)^10)".into(),
            order: Some(12),
        };
        let out = execute(&cmd, &cfg).unwrap();
        assert_eq!(out.records[0].verdict.as_deref(), Some("Infeasible"));
        let line = out.json_lines();
        assert!(line.starts_with("{\"command\":\"obstruction\""));
        assert_eq!(line, execute(&cmd, &cfg).unwrap().json_lines());
    }

    #[test]
    fn residue_command_and_csv() {
        let cfg = RunConfig::default();
        let cmd = Command::Residue {
            m: 2,
            psi: "t".into(),
            support: 0.8,
        };
        let out = execute(&cmd, &cfg).unwrap();
        let r = &out.records[0];
        assert!((r.value_im - 2.0 * std::f64::consts::PI).abs() < 1e-9);
        assert!(r.trace.as_ref().is_some_and(|t| t.len() == 8));
        assert_eq!(
            out.csv_table().unwrap(),
            "t_re,t_im,value_re,value_im,error\n"
        );
        assert!(out
            .csv_traces()
            .unwrap()
            .unwrap()
            .starts_with("record,delta"));
    }
}
