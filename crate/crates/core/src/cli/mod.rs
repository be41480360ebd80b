//! Command-line front end. Every subcommand prints one JSON document on
//! stdout; the exit status is 0 for pass or success, 1 for fail, 2 for
//! inconclusive and 64 for usage errors.

pub mod corpus;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

pub use corpus::{corpus_cases, run_case, CaseResult, CorpusCase};

use crate::directions::{allow_overapprox_with, forbidden_certificate_search, whole_sphere_certificate, AllowOptions, ForbidOptions, ForbidOutcome};
use crate::error::{Error, Result};
use crate::geometry::{estimate_tangent_directions, parse_points_csv, Direction, TangentOptions};
use crate::ideal::JetIdeal;
use crate::jetring::{jet_compose, jet_parse, DiffeoJet, Jet, RingSignature};
use crate::symfun::{parse_expr, regularize, GaugeFn, Params, RegularizeOptions};
use crate::verifier::{
    check_annulus_condition, check_flat, check_negligible, check_strong_directional, check_strong_global, check_tame,
    scale_coherence, ConditionVariant, ImplicationCertificate, ImplicationOptions, NegligibleOptions, Region, SampleOptions,
    Verdict,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "jetclosure", version, about = "Jet ideals, allowed directions and implication certificates")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Jet order m.
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Number of variables n.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Generators separated by `;`.
    #[arg(long, global = true)]
    pub gens: Option<String>,
    /// Certificate JSON file.
    #[arg(long, global = true)]
    pub cert: Option<PathBuf>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Subdivision depth for sphere covers.
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    /// Search or box budget.
    #[arg(long, global = true)]
    pub budget: Option<u32>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Indented output.
    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Product of two jets.
    Mul { p: String, q: String },
    /// p∘φ truncated at order m; φ is given by its components.
    Compose {
        p: String,
        /// Components of φ separated by `;`.
        #[arg(long)]
        phi: String,
    },
    /// Order of vanishing at the origin.
    Order { p: String },
    /// Lowest-degree homogeneous part.
    Lowpart { p: String },
    /// Basis of the ideal generated by --gens.
    IdealBasis,
    /// Membership of a jet in the ideal generated by --gens.
    Member { p: String },
    /// Over-approximation of the allowed directions.
    Allow,
    /// Forbidden-direction certificate at a direction, or on the whole sphere.
    ForbidCert {
        /// Direction as comma-separated coordinates; omit for the whole sphere.
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
    },
    /// Tangent directions of sampled points (CSV file, one point per line).
    Tangent {
        points: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        delta_out: f64,
    },
    /// C^m-flatness trend check on dyadic shells.
    VerifyFlat {
        expr: String,
        #[command(flatten)]
        region: RegionArgs,
    },
    /// C^m-tameness check on dyadic shells.
    VerifyTame {
        expr: String,
        #[command(flatten)]
        region: RegionArgs,
    },
    /// Negligibility of F for a finite direction set.
    VerifyNegligible {
        expr: String,
        /// Directions separated by `;`, coordinates by `,`.
        #[arg(long, allow_hyphen_values = true)]
        omega: String,
    },
    /// Strong implication certificate (from --cert).
    VerifyImplication {
        /// Check only this direction.
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
    },
    /// Annulus condition C, C* or C** for the certificate's annulus data.
    VerifyAnnulus {
        #[arg(long, default_value = "C")]
        variant: String,
        /// Also compare C and C* on this many random perturbations.
        #[arg(long)]
        coherence: Option<usize>,
    },
    /// Gauge regularization g ↦ g⁺ with its property checks.
    GaugeReg {
        /// sqrt, invlog, pow or minpow.
        name: String,
        #[arg(long)]
        param: Option<f64>,
        /// Include the tabulated functions.
        #[arg(long)]
        table: bool,
    },
    /// The reproducible example corpus.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Args, Debug, Clone)]
pub struct RegionArgs {
    /// Cone axes separated by `;`; omit for the punctured ball.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
}

#[derive(Subcommand, Debug)]
pub enum CorpusAction {
    /// Case ids with their citations.
    List,
    /// Runs one case, or `all`.
    Run { id: String },
}

/// A command's JSON document and exit status.
pub struct Outcome {
    pub doc: Value,
    pub code: i32,
}

impl Outcome {
    fn ok(doc: Value) -> Self {
        Outcome { doc, code: EXIT_PASS }
    }

    fn verdict(doc: Value, v: Verdict) -> Self {
        Outcome { doc, code: exit_code(v) }
    }
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn is_usage(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse { .. }
            | Error::InvalidSignature(_)
            | Error::SignatureMismatch(..)
            | Error::DimensionMismatch { .. }
            | Error::UnsupportedDimension(_)
            | Error::Invalid(_)
            | Error::Io(_)
    )
}

pub fn error_doc(e: &Error) -> Value {
    json!({ "error": { "code": e.code(), "message": e.to_string() } })
}

impl Common {
    fn sig(&self) -> Result<RingSignature> {
        let m = self.m.ok_or_else(|| Error::Invalid("--m is required".into()))?;
        let n = self.n.ok_or_else(|| Error::Invalid("--n is required".into()))?;
        RingSignature::new(m, n)
    }

    fn ideal(&self) -> Result<JetIdeal> {
        let gens = self.gens.as_deref().ok_or_else(|| Error::Invalid("--gens is required".into()))?;
        JetIdeal::parse_list(self.sig()?, gens)
    }

    fn cert(&self) -> Result<ImplicationCertificate> {
        let path = self.cert.as_deref().ok_or_else(|| Error::Invalid("--cert is required".into()))?;
        ImplicationCertificate::from_json(&read(path)?)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn parse_direction(text: &str) -> Result<Direction> {
    let coords = text
        .trim()
        .trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Invalid(format!("bad direction `{text}`"))))
        .collect::<Result<Vec<_>>>()?;
    Direction::new(coords)
}

pub fn parse_directions(text: &str) -> Result<Vec<Direction>> {
    text.split(';').filter(|s| !s.trim().is_empty()).map(parse_direction).collect()
}

fn region(args: &RegionArgs, n: usize) -> Result<Region> {
    Ok(match &args.omega {
        None => Region::Punctured { n },
        Some(w) => Region::Cone { omega: parse_directions(w)?, delta: args.delta, r: args.r },
    })
}

fn order_str(j: &Jet) -> String {
    j.order_of_vanishing().to_string()
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    match &cli.command {
        Command::Mul { p, q } => {
            let sig = c.sig()?;
            let r = jet_parse(p, sig)?.mul(&jet_parse(q, sig)?)?;
            Ok(Outcome::ok(json!({ "result": r.to_string() })))
        }
        Command::Compose { p, phi } => {
            let sig = c.sig()?;
            let p = jet_parse(p, sig)?;
            let comps = phi.split(';').map(|t| jet_parse(t, sig)).collect::<Result<Vec<_>>>()?;
            let r = jet_compose(&p, &DiffeoJet::new(comps)?)?;
            Ok(Outcome::ok(json!({
                "result": r.to_string(),
                "order_before": order_str(&p),
                "order_after": order_str(&r),
                "degree_before": p.degree(),
                "degree_after": r.degree(),
            })))
        }
        Command::Order { p } => {
            let p = jet_parse(p, c.sig()?)?;
            Ok(Outcome::ok(json!({ "order": order_str(&p) })))
        }
        Command::Lowpart { p } => {
            let p = jet_parse(p, c.sig()?)?;
            Ok(Outcome::ok(json!({ "result": p.lowest_homogeneous_part()?.to_string() })))
        }
        Command::IdealBasis => {
            let ideal = c.ideal()?;
            let basis: Vec<String> = ideal.basis_jets().iter().map(|j| j.to_string()).collect();
            Ok(Outcome::ok(json!({
                "m": ideal.sig().m,
                "n": ideal.sig().n,
                "generators": ideal.to_doc().generators,
                "dim": ideal.dim(),
                "basis": basis,
                "multiplicatively_closed": ideal.is_multiplicatively_closed(),
            })))
        }
        Command::Member { p } => {
            let ideal = c.ideal()?;
            let member = ideal.contains(&jet_parse(p, ideal.sig())?)?;
            Ok(Outcome { doc: json!({ "member": member }), code: if member { EXIT_PASS } else { EXIT_FAIL } })
        }
        Command::Allow => {
            let ideal = c.ideal()?;
            let a = allow_overapprox_with(&ideal, &AllowOptions { depth: c.depth })?;
            Ok(Outcome::ok(a.to_json()))
        }
        Command::ForbidCert { omega } => {
            let ideal = c.ideal()?;
            let opts = ForbidOptions { budget: c.budget.unwrap_or(ForbidOptions::default().budget) };
            let out = match omega {
                Some(w) => forbidden_certificate_search(ideal.generators(), &parse_direction(w)?, &opts)?,
                None => whole_sphere_certificate(ideal.generators(), &opts)?,
            };
            Ok(match out {
                ForbidOutcome::Found(cert) => Outcome::ok(json!({ "found": true, "certificate": to_value(&cert) })),
                ForbidOutcome::NotFound { attempts } => {
                    Outcome { doc: json!({ "found": false, "attempts": attempts }), code: EXIT_INCONCLUSIVE }
                }
            })
        }
        Command::Tangent { points, delta_out } => {
            let pts = parse_points_csv(&read(points)?)?;
            let dirs = estimate_tangent_directions(&pts, &TangentOptions { delta_out: *delta_out, start_shell: None })?;
            Ok(Outcome::ok(json!({ "delta_out": delta_out, "directions": to_value(&dirs) })))
        }
        Command::VerifyFlat { expr, region: ra } | Command::VerifyTame { expr, region: ra } => {
            let sig = c.sig()?;
            let e = parse_expr(expr, sig.n, &Params::new())?;
            let reg = region(ra, sig.n)?;
            let opts = SampleOptions { seed: c.seed, ..Default::default() };
            if matches!(cli.command, Command::VerifyFlat { .. }) {
                let r = check_flat(&e, &reg, sig.m, &opts)?;
                Ok(Outcome::verdict(to_value(&r), r.verdict))
            } else {
                let r = check_tame(&e, &reg, sig.m, &opts)?;
                Ok(Outcome::verdict(to_value(&r), r.verdict))
            }
        }
        Command::VerifyNegligible { expr, omega } => {
            let sig = c.sig()?;
            let e = parse_expr(expr, sig.n, &Params::new())?;
            let mut opts = NegligibleOptions::default();
            if let Some(eps) = c.eps {
                opts.eps_grid = vec![eps];
            }
            let r = check_negligible(&e, &parse_directions(omega)?, sig.n, sig.m, &opts)?;
            Ok(Outcome::verdict(to_value(&r), r.verdict))
        }
        Command::VerifyImplication { omega } => {
            let cert = c.cert()?;
            let opts = ImplicationOptions::default();
            match omega {
                Some(w) => {
                    let r = check_strong_directional(&cert, &parse_direction(w)?, &opts)?;
                    Ok(Outcome::verdict(to_value(&r), r.verdict))
                }
                None => {
                    let r = check_strong_global(&cert, &opts)?;
                    Ok(Outcome::verdict(to_value(&r), r.verdict))
                }
            }
        }
        Command::VerifyAnnulus { variant, coherence } => {
            let cert = c.cert()?;
            let data = cert.annulus.as_ref().ok_or_else(|| Error::Invalid("certificate has no annulus data".into()))?;
            let variant: ConditionVariant = variant.parse()?;
            let qs: Vec<Jet> = cert.terms.iter().map(|t| t.q.clone()).collect();
            let omega = crate::directions::allow_overapprox(&cert.ideal)?.directions();
            let opts = Default::default();
            let r = check_annulus_condition(variant, data, &cert.target, &qs, &omega, &opts)?;
            let mut verdict = r.verdict;
            let mut doc = json!({ "condition": to_value(&r) });
            if let Some(draws) = coherence {
                let co = scale_coherence(data, &cert.target, &qs, &omega, *draws, c.seed, &opts)?;
                if !co.agree {
                    verdict = verdict.meet(Verdict::Fail);
                }
                doc["coherence"] = to_value(&co);
            }
            Ok(Outcome::verdict(doc, verdict))
        }
        Command::GaugeReg { name, param, table } => {
            let g = GaugeFn::by_name(name, *param)?;
            let r = regularize(&g.name, g.value(), &RegularizeOptions::default())?;
            let mut doc = json!({
                "gauge": r.gauge,
                "pass": r.passed(),
                "kernel_mass": r.kernel_mass,
                "c_prime": r.c_prime,
                "c_double_prime": r.c_double_prime,
                "max_doubling_ratio": r.max_doubling_ratio,
                "checks": to_value(&r.checks),
            });
            if *table {
                doc["table"] = to_value(&r);
            }
            let v = if r.passed() { Verdict::Pass } else { Verdict::Fail };
            Ok(Outcome::verdict(doc, v))
        }
        Command::Corpus { action } => match action {
            CorpusAction::List => {
                let cases: Vec<Value> =
                    corpus_cases().iter().map(|k| json!({ "id": k.id, "citation": k.citation, "summary": k.summary })).collect();
                Ok(Outcome::ok(json!({ "cases": cases })))
            }
            CorpusAction::Run { id } => {
                let cases = corpus_cases();
                let selected: Vec<&CorpusCase> = cases.iter().filter(|k| id == "all" || k.id == id).collect();
                if selected.is_empty() {
                    return Err(Error::Invalid(format!("no corpus case `{id}`")));
                }
                let results: Vec<CaseResult> = selected.iter().map(|k| run_case(k)).collect();
                let all_pass = results.iter().all(|r| r.pass);
                let doc = if id == "all" {
                    json!({ "cases": to_value(&results), "all_pass": all_pass })
                } else {
                    to_value(&results[0])
                };
                Ok(Outcome { doc, code: if all_pass { EXIT_PASS } else { EXIT_FAIL } })
            }
        },
    }
}

fn render(doc: &Value, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(doc).expect("json")
    } else {
        doc.to_string()
    }
}

/// Writes one line to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

/// Parses arguments (the first is the program name), runs the command and
/// prints its document. Returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_PASS;
            }
            eprint!("{e}");
            println!("{}", json!({ "error": { "code": "usage", "message": e.kind().to_string() } }));
            return EXIT_USAGE;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            emit(&render(&out.doc, cli.common.pretty));
            out.code
        }
        Err(e) => {
            emit(&render(&error_doc(&e), cli.common.pretty));
            if is_usage(&e) {
                EXIT_USAGE
            } else {
                EXIT_FAIL
            }
        }
    }
}
