//! Command implementations behind the `wshift` binary and the versioned
//! report document they write.
//!
//! Every command returns an [`Outcome`] carrying its exit code; the binary
//! only prints and exits. Commands taking a spec path have a `*_spec`
//! counterpart that accepts an already built [`WeightSpec`].

use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bpe::{bpe_regions, BpeReport};
use crate::momentclass::{
    berger_hausdorff_test, bilateral_moment_test, classify_normal_hyponormal, MomentCertificate, MomentError, Verdict,
    DEFAULT_TOLERANCE,
};
use crate::oracle::{ap_membership_probe, grid_probe, hyponormal_not_subnormal_witness, OracleError, TruncationProbe};
use crate::radii::{estimate_radii, RadiiError, RadiiReport, DEFAULT_WINDOW, MIN_WINDOW};
use crate::regions::{boundary_samples, write_boundary_csv, RadialRegion};
use crate::spectra::{check_picture_consistency, spectral_picture, SpectraError, SpectralPicture};
use crate::weightspec::{parse_weight_spec, Builtin, SpecDocument, SpecError, TailRule, WeightSpec};

pub const SCHEMA_VERSION: &str = "1";
pub const DEFAULT_HANKEL_ORDER: usize = 8;
pub const DEFAULT_BILATERAL_SHIFTS: usize = 1;
pub const DEFAULT_DIM: usize = 400;
pub const DEFAULT_SAMPLES: usize = 64;
pub const AGREEMENT_FLOOR: f64 = 0.95;

pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const SPEC_ERROR: i32 = 2;
    pub const NOT_SUBNORMAL: i32 = 3;
    pub const BUDGET: i32 = 4;
    pub const ORACLE_DISAGREEMENT: i32 = 5;
    pub const COUNTEREXAMPLE_FAILED: i32 = 6;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassesSection {
    pub normal: bool,
    pub hyponormal: bool,
    pub exact: bool,
    pub subnormal_certificate: Option<MomentCertificate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridStats {
    pub radial: usize,
    pub angular: usize,
    pub threshold: f64,
    pub counted: usize,
    pub agreeing: usize,
    pub excluded: usize,
    pub agreement_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub weight_spec: SpecDocument,
    pub radii: RadiiReport,
    pub picture: SpectralPicture,
    pub classes: ClassesSection,
    pub bpe: Option<BpeReport>,
    pub probes: Vec<TruncationProbe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridStats>,
    pub annotations: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports hold only finite values");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Exit code plus everything a command prints.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<Report>,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn fail(code: i32, message: impl Into<String>) -> Outcome {
        Outcome { code, stderr: message.into() + "\n", ..Outcome::default() }
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub n_max: usize,
    pub out: Option<PathBuf>,
    pub boundary_samples: Option<PathBuf>,
    pub samples: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { n_max: DEFAULT_WINDOW, out: None, boundary_samples: None, samples: DEFAULT_SAMPLES }
    }
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    pub hankel_order: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { hankel_order: DEFAULT_HANKEL_ORDER, tol: DEFAULT_TOLERANCE, out: None }
    }
}

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub lambda: Option<Complex64>,
    pub dim: usize,
    pub grid: Option<(usize, usize)>,
    pub out: Option<PathBuf>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { lambda: None, dim: DEFAULT_DIM, grid: None, out: None }
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut file = tempfile::NamedTempFile::new_in(dir)?;
    file.write_all(bytes)?;
    file.as_file().sync_all()?;
    file.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn load_spec(path: &Path) -> Result<WeightSpec, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_weight_spec(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn radii_code(err: &RadiiError) -> i32 {
    match err {
        RadiiError::Spec(SpecError::Unrepresentable { .. }) => exit::BUDGET,
        _ => exit::SPEC_ERROR,
    }
}

fn moment_code(err: &MomentError) -> i32 {
    match err {
        MomentError::BudgetExceeded { .. } | MomentError::Overflow { .. } => exit::BUDGET,
        _ => exit::SPEC_ERROR,
    }
}

fn oracle_code(err: &OracleError) -> i32 {
    match err {
        OracleError::Budget(_) => exit::BUDGET,
        _ => exit::SPEC_ERROR,
    }
}

fn certificate(spec: &WeightSpec, order: usize, tol: f64) -> Result<MomentCertificate, MomentError> {
    if spec.is_bilateral() {
        bilateral_moment_test(spec, order, DEFAULT_BILATERAL_SHIFTS, tol)
    } else {
        berger_hausdorff_test(spec, order, tol)
    }
}

fn classes_section(
    spec: &WeightSpec,
    window: usize,
    order: usize,
    tol: f64,
) -> Result<(ClassesSection, Option<MomentError>), SpecError> {
    let classes = classify_normal_hyponormal(spec, window)?;
    let (subnormal_certificate, failure) = match certificate(spec, order, tol) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e)),
    };
    Ok((
        ClassesSection {
            normal: classes.normal,
            hyponormal: classes.hyponormal,
            exact: classes.exact,
            subnormal_certificate,
        },
        failure,
    ))
}

fn annotations(picture: &SpectralPicture, bpe: Option<&BpeReport>, classes: &ClassesSection) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(b) = bpe {
        if b.question1_answer_negative {
            out.push(
                "negative answer to Question 1 (is B_a(T) = Γ(T)\\σ_ap(T)?): r1 < r2, so Ba is strictly larger \
                 than gamma_minus_ap"
                    .to_string(),
            );
        } else {
            out.push(
                "Question 1 (is B_a(T) = Γ(T)\\σ_ap(T)?): no gap between r1 and r2 was detected for this shift"
                    .to_string(),
            );
        }
        out.push(
            "Question 2 (is the interior of B(T) equal to B_a(T) for every cyclic T?): open; for this shift Ba is \
             the interior of B"
                .to_string(),
        );
    }
    if classes.hyponormal {
        out.push(if classes.normal {
            "Question 3 (for which hyponormal T is σ_T(h) = σ(T) for all h ≠ 0?): not informative here, the shift \
             is normal"
                .to_string()
        } else {
            "Question 3 (for which hyponormal T is σ_T(h) = σ(T) for all h ≠ 0?): this non-normal hyponormal \
             weighted shift is one such operator"
                .to_string()
        });
    }
    for v in check_picture_consistency(picture) {
        out.push(format!("consistency violation: {v}"));
    }
    out
}

fn build_report(spec: &WeightSpec, window: usize) -> Result<Report, Box<Outcome>> {
    let radii = estimate_radii(spec, window).map_err(|e| Box::new(Outcome::fail(radii_code(&e), e.to_string())))?;
    let picture = spectral_picture(&radii).map_err(|e| match e {
        SpectraError::InconsistentRadii(_) => {
            Box::new(Outcome::fail(exit::BUDGET, format!("{e}; increase the window (--n-max)")))
        }
        SpectraError::MissingNegativeSide => Box::new(Outcome::fail(exit::SPEC_ERROR, e.to_string())),
    })?;
    let (classes, failure) = classes_section(spec, window, DEFAULT_HANKEL_ORDER, DEFAULT_TOLERANCE)
        .map_err(|e| Box::new(Outcome::fail(exit::SPEC_ERROR, e.to_string())))?;
    let bpe = if spec.is_bilateral() {
        None
    } else {
        Some(bpe_regions(&radii, &picture).map_err(|e| Box::new(Outcome::fail(exit::SPEC_ERROR, e.to_string())))?)
    };
    let mut notes = annotations(&picture, bpe.as_ref(), &classes);
    if let Some(e) = failure {
        notes.push(format!("no moment certificate at order {DEFAULT_HANKEL_ORDER}: {e}"));
    }
    Ok(Report {
        schema_version: SCHEMA_VERSION.to_string(),
        weight_spec: spec.to_document(),
        radii,
        picture,
        classes,
        bpe,
        probes: Vec::new(),
        grid: None,
        annotations: notes,
    })
}

fn emit(mut outcome: Outcome, out: Option<&Path>, text: String) -> Outcome {
    match out {
        Some(path) => {
            if let Err(e) = write_atomic(path, text.as_bytes()) {
                return Outcome::fail(exit::SPEC_ERROR, format!("{}: {e}", path.display()));
            }
        }
        None => outcome.stdout.push_str(&text),
    }
    outcome
}

fn region_files(report: &Report) -> Vec<(&'static str, &RadialRegion)> {
    let p = &report.picture;
    let mut files = vec![
        ("spectrum", &p.spectrum),
        ("approx_point", &p.approx_point),
        ("point", &p.point),
        ("point_adjoint", &p.point_adjoint),
        ("compression", &p.compression),
    ];
    if let Some(b) = &report.bpe {
        files.extend([("B", &b.b), ("Ba", &b.ba), ("gamma_minus_ap", &b.gamma_minus_ap)]);
    }
    files
}

/// One CSV per region, named after the region, inside `dir`.
pub fn write_boundary_files(report: &Report, dir: &Path, samples: usize) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, region) in region_files(report) {
        let mut buf = Vec::new();
        write_boundary_csv(&mut buf, &boundary_samples(region, samples)).map_err(std::io::Error::other)?;
        let path = dir.join(format!("{name}.csv"));
        write_atomic(&path, &buf)?;
        written.push(path);
    }
    Ok(written)
}

pub fn cmd_analyze(spec_path: &Path, options: &AnalyzeOptions) -> Outcome {
    match load_spec(spec_path) {
        Ok(spec) => analyze_spec(&spec, options),
        Err(e) => Outcome::fail(exit::SPEC_ERROR, e),
    }
}

pub fn analyze_spec(spec: &WeightSpec, options: &AnalyzeOptions) -> Outcome {
    if options.n_max < MIN_WINDOW {
        return Outcome::fail(exit::SPEC_ERROR, format!("--n-max must be at least {MIN_WINDOW}"));
    }
    let report = match build_report(spec, options.n_max) {
        Ok(r) => r,
        Err(o) => return *o,
    };
    if let Some(dir) = &options.boundary_samples {
        if options.samples < 4 {
            return Outcome::fail(exit::SPEC_ERROR, "--samples must be at least 4");
        }
        if let Err(e) = write_boundary_files(&report, dir, options.samples) {
            return Outcome::fail(exit::SPEC_ERROR, format!("{}: {e}", dir.display()));
        }
    }
    let text = report.to_json();
    emit(Outcome { code: exit::OK, report: Some(report), ..Outcome::default() }, options.out.as_deref(), text)
}

pub fn cmd_classify(spec_path: &Path, options: &ClassifyOptions) -> Outcome {
    match load_spec(spec_path) {
        Ok(spec) => classify_spec(&spec, options),
        Err(e) => Outcome::fail(exit::SPEC_ERROR, e),
    }
}

pub fn classify_spec(spec: &WeightSpec, options: &ClassifyOptions) -> Outcome {
    if !(options.tol >= 0.0) {
        return Outcome::fail(exit::SPEC_ERROR, "--tol must be nonnegative");
    }
    let (section, failure) = match classes_section(spec, DEFAULT_WINDOW, options.hankel_order, options.tol) {
        Ok(s) => s,
        Err(e) => return Outcome::fail(exit::SPEC_ERROR, e.to_string()),
    };
    if let Some(e) = failure {
        return Outcome::fail(moment_code(&e), e.to_string());
    }
    let code = match section.subnormal_certificate.as_ref().map(|c| c.verdict) {
        Some(Verdict::NotSubnormal) => exit::NOT_SUBNORMAL,
        _ => exit::OK,
    };
    let mut text = serde_json::to_string_pretty(&section).expect("certificates hold only finite values");
    text.push('\n');
    emit(Outcome { code, ..Outcome::default() }, options.out.as_deref(), text)
}

pub fn cmd_oracle(spec_path: &Path, options: &OracleOptions) -> Outcome {
    match load_spec(spec_path) {
        Ok(spec) => oracle_spec(&spec, options),
        Err(e) => Outcome::fail(exit::SPEC_ERROR, e),
    }
}

pub fn oracle_spec(spec: &WeightSpec, options: &OracleOptions) -> Outcome {
    if options.lambda.is_none() && options.grid.is_none() {
        return Outcome::fail(exit::SPEC_ERROR, "give --lambda or --grid");
    }
    let mut report = match build_report(spec, DEFAULT_WINDOW) {
        Ok(r) => r,
        Err(o) => return *o,
    };
    let mut code = exit::OK;
    if let Some(lambda) = options.lambda {
        match ap_membership_probe(spec, &report.picture, lambda, options.dim, None) {
            Ok(p) => report.probes.push(p),
            Err(e) => return Outcome::fail(oracle_code(&e), e.to_string()),
        }
    }
    if let Some((radial, angular)) = options.grid {
        let g = match grid_probe(spec, &report.picture, radial, angular, options.dim) {
            Ok(g) => g,
            Err(e) => return Outcome::fail(oracle_code(&e), e.to_string()),
        };
        report.annotations.push(format!(
            "grid {radial}x{angular} at N = {}: {} of {} counted points agree ({} excluded near edges or undetermined)",
            options.dim, g.agreeing, g.counted, g.excluded
        ));
        if g.agreement_rate < AGREEMENT_FLOOR {
            code = exit::ORACLE_DISAGREEMENT;
        }
        report.grid = Some(GridStats {
            radial,
            angular,
            threshold: g.threshold,
            counted: g.counted,
            agreeing: g.agreeing,
            excluded: g.excluded,
            agreement_rate: g.agreement_rate,
        });
        report.probes.extend(g.probes);
    }
    let text = report.to_json();
    emit(Outcome { code, report: Some(report), ..Outcome::default() }, options.out.as_deref(), text)
}

pub fn williams_spec() -> WeightSpec {
    WeightSpec::unilateral(vec![], TailRule::Builtin(Builtin::WilliamsGap))
        .expect("builtin tail is valid")
        .with_name("williams_gap")
}

fn factorial(m: usize) -> usize {
    (1..=m).product()
}

pub fn cmd_counterexample(factorial_max: usize, out: Option<&Path>) -> Outcome {
    counterexample_spec(&williams_spec(), factorial_max, out)
}

/// Analyzes `spec` over the indices through `m!` and checks the factorial
/// run counterexample: `r1 = 0`, `r2 = 1`, `Ba` the open unit disc and
/// nothing of the compression spectrum outside `approx_point`.
pub fn counterexample_spec(spec: &WeightSpec, factorial_max: usize, out: Option<&Path>) -> Outcome {
    if !(3..=8).contains(&factorial_max) {
        return Outcome::fail(exit::SPEC_ERROR, format!("--factorial-max {factorial_max} is outside 3..=8"));
    }
    let window = factorial(factorial_max).max(MIN_WINDOW);
    let options = AnalyzeOptions { n_max: window, ..AnalyzeOptions::default() };
    let mut outcome = analyze_spec(spec, &options);
    let Some(report) = outcome.report.as_mut() else {
        return outcome;
    };
    let plus = &report.radii.plus;
    let mut failed = Vec::new();
    if !(plus.r1 <= 1e-6) {
        failed.push(format!("r1 = {} exceeds 1e-6", plus.r1));
    }
    if !((plus.r2 - 1.0).abs() <= 1e-9) {
        failed.push(format!("r2 = {} differs from 1", plus.r2));
    }
    match &report.bpe {
        Some(b) => {
            if !b.ba.same_set(&RadialRegion::open_disc(1.0)) {
                failed.push(format!("Ba = {} is not the open unit disc", b.ba));
            }
            if !b.gamma_minus_ap.is_empty() {
                failed.push(format!("gamma_minus_ap = {} is not empty", b.gamma_minus_ap));
            }
        }
        None => failed.push("Ba is missing".to_string()),
    }
    report.annotations.push(format!("counterexample analyzed through index {}! = {window}", factorial_max));
    let text = report.to_json();
    if !failed.is_empty() {
        let mut o = Outcome::fail(exit::COUNTEREXAMPLE_FAILED, failed.join("\n"));
        o.report = outcome.report;
        return o;
    }
    let o = Outcome { code: exit::OK, report: outcome.report.take(), ..Outcome::default() };
    emit(o, out, text)
}

pub fn bergman_spec() -> WeightSpec {
    WeightSpec::unilateral(vec![], TailRule::Builtin(Builtin::Bergman))
        .expect("builtin tail is valid")
        .with_name("bergman")
}

pub fn cmd_verify_paper() -> Outcome {
    verify_paper_with(&bergman_spec())
}

/// The `√89 > √80` witness, the unitary bilateral picture and the
/// certificate of `bergman`, one PASS/FAIL line each.
pub fn verify_paper_with(bergman: &WeightSpec) -> Outcome {
    let mut lines = Vec::new();
    let w = hyponormal_not_subnormal_witness();
    lines.push((
        w.pass,
        format!("hyponormal_not_subnormal_witness: ‖(T*)²x‖² = {}, ‖T²x‖² = {}", w.norm_adjoint_sq, w.norm_sq),
    ));
    let unitary = WeightSpec::bilateral(vec![], TailRule::Constant(1.0), vec![], TailRule::Constant(1.0))
        .expect("constant tails are valid");
    let unit = RadialRegion::circle(1.0);
    let ok = estimate_radii(&unitary, DEFAULT_WINDOW).ok().and_then(|r| spectral_picture(&r).ok()).is_some_and(|p| {
        p.spectrum.same_set(&unit) && p.approx_point.same_set(&unit) && p.point.is_empty() && p.point_adjoint.is_empty()
    });
    lines.push((ok, "unitary_bilateral_picture: σ = σ_ap = unit circle, both point spectra empty".to_string()));
    let verdict = berger_hausdorff_test(bergman, DEFAULT_HANKEL_ORDER, DEFAULT_TOLERANCE).map(|c| c.verdict);
    lines.push((
        verdict == Ok(Verdict::ConsistentSubnormal),
        format!("bergman_certificate: {verdict:?} at order {DEFAULT_HANKEL_ORDER}"),
    ));
    let mut stdout = String::new();
    for (pass, line) in &lines {
        stdout.push_str(&format!("{} {line}\n", if *pass { "PASS" } else { "FAIL" }));
    }
    let code = if lines.iter().all(|(p, _)| *p) { exit::OK } else { exit::VERIFY_FAILED };
    Outcome { code, stdout, ..Outcome::default() }
}

/// `"RE,IM"` as a complex number.
pub fn parse_lambda(text: &str) -> Result<Complex64, String> {
    let (re, im) = text.split_once(',').ok_or_else(|| format!("expected RE,IM, got {text:?}"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("{re:?}: {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("{im:?}: {e}"))?;
    Ok(Complex64::new(re, im))
}

/// `"RxT"` as radial and angular counts.
pub fn parse_grid(text: &str) -> Result<(usize, usize), String> {
    let (r, t) = text.split_once(['x', 'X', '×']).ok_or_else(|| format!("expected RxT, got {text:?}"))?;
    let r: usize = r.trim().parse().map_err(|e| format!("{r:?}: {e}"))?;
    let t: usize = t.trim().parse().map_err(|e| format!("{t:?}: {e}"))?;
    Ok((r, t))
}
