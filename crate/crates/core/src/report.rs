//! Check reports and the full catalog verification run.
//!
//! A [`Report`] is a flat list of [`Item`]s, each with a status of PASS, FAIL
//! or FINDING. FINDING marks a documented discrepancy (a misprinted family
//! together with the reading that verifies, or a finite-field completeness
//! gap) and does not fail the run.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraError, BilinearProduct, LieAlgebra, StructureConstants, Vector};
use crate::catalog::{
    flag_values, parse_bindings, same_products, sub_adjacent_matches, Catalog, CatalogError, EntryKind,
    EXPECTED_COUNTS,
};
use crate::formats::{parse_document, print_document, AlgebraDef, FamilyDef, TensorDef};
use crate::operators::{
    nijenhuis_residual, operator_square, rota_baxter_residual, validate_family, FamilyReport, LinearOperator,
    OperatorKind, ParametricFamily,
};
use crate::oracle::{
    enumerate_rb_ff, family_coverage, family_points, instances, search, square_is_zero, CoverageReport, DenseTable,
    FFMatrix, FfIdentity, OracleError,
};
use crate::scalars::{is_prime, Assignment, Coefficient, Fp, GaussianRational, Scalar};
use crate::yangbaxter::{cybe_residual, operator_to_tensor, semidirect_double, skewize, Tensor2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Finding,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Finding => "FINDING",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The nine parts of the full run, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Section {
    Algebras,
    SubAdjacent,
    Nijenhuis,
    Identities,
    RotaBaxter,
    Cybe,
    Oracle,
    CybeExhaustive,
    Catalog,
}

impl Section {
    pub const ALL: [Section; 9] = [
        Section::Algebras,
        Section::SubAdjacent,
        Section::Nijenhuis,
        Section::Identities,
        Section::RotaBaxter,
        Section::Cybe,
        Section::Oracle,
        Section::CybeExhaustive,
        Section::Catalog,
    ];

    /// 1-based position.
    pub fn number(&self) -> usize {
        Self::ALL.iter().position(|s| s == self).expect("listed") + 1
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Section::Algebras => "algebras",
            Section::SubAdjacent => "sub-adjacent",
            Section::Nijenhuis => "nijenhuis",
            Section::Identities => "identities",
            Section::RotaBaxter => "rota-baxter",
            Section::Cybe => "cybe",
            Section::Oracle => "oracle",
            Section::CybeExhaustive => "cybe-exhaustive",
            Section::Catalog => "catalog",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Section::Algebras => "pre-Lie, associative and Jacobi identities of every catalog algebra",
            Section::SubAdjacent => "commutator algebras against the stored Lie algebras",
            Section::Nijenhuis => "symbolic validation of every Nijenhuis family",
            Section::Identities => "operator identities on random operators, scaling and shift invariance",
            Section::RotaBaxter => "symbolic validation of every Rota-Baxter operator and its provenance",
            Section::Cybe => "classical Yang-Baxter residuals on the coadjoint doubles",
            Section::Oracle => "finite-field soundness and completeness of the Nijenhuis families",
            Section::CybeExhaustive => "Rota-Baxter operators versus CYBE solutions on g1 over F_p",
            Section::Catalog => "round-trip parsing, cross-references and recorded findings",
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Section {
    type Err = ReportError;

    /// A number 1 to 9 or a section name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Ok(k) = t.parse::<usize>() {
            return k
                .checked_sub(1)
                .and_then(|i| Self::ALL.get(i).copied())
                .ok_or_else(|| ReportError::UnknownSection(s.to_string()));
        }
        Self::ALL
            .into_iter()
            .find(|x| x.as_str() == t)
            .ok_or_else(|| ReportError::UnknownSection(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown section `{0}` (expected 1-9 or a section name)")]
    UnknownSection(String),
    #[error("unknown format `{0}` (expected text, machine or json)")]
    UnknownFormat(String),
    #[error("{0} is not a prime")]
    NonPrime(u32),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// One check and its outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Item {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub section: Option<Section>,
    pub check: String,
    pub subject: String,
    pub status: Status,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Item {
    pub fn new(check: &str, subject: impl Into<String>, status: Status, detail: impl Into<String>) -> Self {
        Self {
            section: None,
            check: check.to_string(),
            subject: subject.into(),
            status,
            detail: detail.into(),
            witness: None,
        }
    }

    pub fn pass(check: &str, subject: impl Into<String>, detail: impl Into<String>) -> Self {
        Self::new(check, subject, Status::Pass, detail)
    }

    /// A failure always carries a witness.
    pub fn fail(check: &str, subject: impl Into<String>, detail: impl Into<String>, witness: impl Into<String>) -> Self {
        Self::new(check, subject, Status::Fail, detail).with_witness(witness)
    }

    pub fn finding(check: &str, subject: impl Into<String>, detail: impl Into<String>) -> Self {
        Self::new(check, subject, Status::Finding, detail)
    }

    pub fn with_witness(mut self, w: impl Into<String>) -> Self {
        self.witness = Some(w.into());
        self
    }

    fn in_section(mut self, s: Section) -> Self {
        self.section = Some(s);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub finding: usize,
}

impl Summary {
    pub fn status(&self) -> Status {
        Status::from_bool(self.fail == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    /// One `key=value` record per line.
    Machine,
    Json,
}

impl FromStr for OutputFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "machine" => Ok(OutputFormat::Machine),
            "json" => Ok(OutputFormat::Json),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

/// Items in the order they were produced, plus per-section wall time.
///
/// Timing is only rendered on request so that the default output is
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub command: String,
    pub items: Vec<Item>,
    pub timings: Vec<(Section, Duration)>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    command: &'a str,
    status: Status,
    summary: Summary,
    items: &'a [Item],
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<BTreeMap<&'static str, f64>>,
}

fn machine_value(s: &str) -> String {
    let plain = !s.is_empty() && s.chars().all(|c| !c.is_whitespace() && c != '"' && c != '=' && c != '\\');
    if plain {
        s.to_string()
    } else {
        serde_json::to_string(s).expect("strings serialize")
    }
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, item: Item) {
        self.items.push(item);
    }

    pub fn extend(&mut self, items: impl IntoIterator<Item = Item>) {
        self.items.extend(items);
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        for it in &self.items {
            match it.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Finding => s.finding += 1,
            }
        }
        s
    }

    pub fn passed(&self) -> bool {
        self.summary().fail == 0
    }

    /// 0 when nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn items_in(&self, s: Section) -> impl Iterator<Item = &Item> {
        self.items.iter().filter(move |i| i.section == Some(s))
    }

    pub fn render(&self, format: OutputFormat, timing: bool) -> String {
        match format {
            OutputFormat::Text => self.render_text(timing),
            OutputFormat::Machine => self.render_machine(timing),
            OutputFormat::Json => self.render_json(timing),
        }
    }

    pub fn render_text(&self, timing: bool) -> String {
        let mut out = format!("# {}\n", self.command);
        let mut current: Option<Section> = None;
        for it in &self.items {
            if it.section.is_some() && it.section != current {
                current = it.section;
                let s = current.expect("checked");
                out.push_str(&format!("\n== {} {} ==", s.number(), s.as_str()));
                if timing {
                    if let Some((_, d)) = self.timings.iter().find(|(x, _)| *x == s) {
                        out.push_str(&format!(" ({:.2}s)", d.as_secs_f64()));
                    }
                }
                out.push('\n');
            }
            out.push_str(&format!("{:<8}{:<20}{}", it.status.as_str(), it.check, it.subject));
            if !it.detail.is_empty() {
                out.push_str(": ");
                out.push_str(&it.detail);
            }
            out.push('\n');
            if let Some(w) = &it.witness {
                for line in w.lines() {
                    out.push_str(&format!("        witness: {line}\n"));
                }
            }
        }
        let s = self.summary();
        out.push_str(&format!(
            "\n{}: {} pass, {} fail, {} finding\n",
            s.status(),
            s.pass,
            s.fail,
            s.finding
        ));
        out
    }

    pub fn render_machine(&self, timing: bool) -> String {
        let mut out = format!("command={}\n", machine_value(&self.command));
        for it in &self.items {
            let mut fields = Vec::new();
            if let Some(s) = it.section {
                fields.push(format!("section={}", s.as_str()));
            }
            fields.push(format!("check={}", machine_value(&it.check)));
            fields.push(format!("subject={}", machine_value(&it.subject)));
            fields.push(format!("status={}", it.status));
            fields.push(format!("detail={}", machine_value(&it.detail)));
            if let Some(w) = &it.witness {
                fields.push(format!("witness={}", machine_value(w)));
            }
            out.push_str(&fields.join(" "));
            out.push('\n');
        }
        if timing {
            for (s, d) in &self.timings {
                out.push_str(&format!("timing section={} seconds={:.3}\n", s, d.as_secs_f64()));
            }
        }
        let s = self.summary();
        out.push_str(&format!(
            "summary status={} pass={} fail={} finding={}\n",
            s.status(),
            s.pass,
            s.fail,
            s.finding
        ));
        out
    }

    pub fn render_json(&self, timing: bool) -> String {
        let summary = self.summary();
        let doc = JsonReport {
            command: &self.command,
            status: summary.status(),
            summary,
            items: &self.items,
            timings: timing.then(|| self.timings.iter().map(|(s, d)| (s.as_str(), d.as_secs_f64())).collect()),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Options for [`run_verify_paper`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Sections to run; empty means all.
    pub sections: Vec<Section>,
    pub prime: u32,
    /// Random operators per algebra in the identities section.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            sections: Vec::new(),
            prime: 5,
            samples: 200,
            seed: 0x5eed,
        }
    }
}

impl VerifyOptions {
    pub fn runs(&self, s: Section) -> bool {
        self.sections.is_empty() || self.sections.contains(&s)
    }

    /// The equivalent command line.
    pub fn command(&self) -> String {
        let mut c = String::from("verify-paper");
        for s in &self.sections {
            c.push_str(&format!(" --section {}", s.number()));
        }
        c.push_str(&format!(" --prime {}", self.prime));
        c
    }
}

/// Algebras whose Nijenhuis families must cover every finite-field solution.
pub const COMPLETENESS_REQUIRED: [&str; 7] = ["A2", "A3", "A4", "A5", "B1", "B2", "B4"];

/// Scalars used for the scaling and shift checks.
fn invariance_constants() -> Vec<Scalar> {
    vec![Scalar::ratio(2, 1), Scalar::i(), Scalar::ratio(-1, 3)]
}

/// Load the catalog (honouring `NIJ_CATALOG_DIR`) and run the selected
/// sections.
pub fn run_verify_paper(opts: &VerifyOptions) -> Result<Report, ReportError> {
    let cat = Catalog::load()?;
    verify_catalog(&cat, opts)
}

/// Run the selected sections against `cat`.
pub fn verify_catalog(cat: &Catalog, opts: &VerifyOptions) -> Result<Report, ReportError> {
    if !is_prime(opts.prime as u64) {
        return Err(ReportError::NonPrime(opts.prime));
    }
    let mut report = Report::new(opts.command());
    for s in Section::ALL {
        if !opts.runs(s) {
            continue;
        }
        let start = Instant::now();
        let items = match s {
            Section::Algebras => section_algebras(cat),
            Section::SubAdjacent => section_sub_adjacent(cat),
            Section::Nijenhuis => section_nijenhuis(cat),
            Section::Identities => section_identities(cat, opts),
            Section::RotaBaxter => section_rota_baxter(cat, opts.prime),
            Section::Cybe => section_cybe(cat, opts.seed),
            Section::Oracle => section_oracle(cat, opts.prime),
            Section::CybeExhaustive => section_cybe_exhaustive(cat, opts.prime),
            Section::Catalog => section_catalog(cat),
        };
        report.extend(items.into_iter().map(|i| i.in_section(s)));
        report.timings.push((s, start.elapsed()));
    }
    Ok(report)
}

fn triple(names: &[String], (i, j, k): (usize, usize, usize)) -> String {
    format!("({}, {}, {})", names[i], names[j], names[k])
}

fn pair(names: &[String], (i, j): (usize, usize)) -> String {
    format!("({}, {})", names[i], names[j])
}

/// Pre-Lie identity, plus associativity or Jacobi when the algebra claims it.
pub fn algebra_items(a: &AlgebraDef) -> Vec<Item> {
    let c = &a.constants;
    let names = c.basis_names();
    let triples = c.dim().pow(3);
    let mut out = Vec::new();
    if a.is_lie {
        out.push(match a.lie() {
            Ok(_) => Item::pass("jacobi", a.id(), format!("{triples} basis triples")),
            Err(e) => Item::fail("jacobi", a.id(), "Jacobi identity fails", e.to_string()),
        });
        return out;
    }
    let check = |name: &str, w: Vec<((usize, usize, usize), Vector<Scalar>)>| match w.first() {
        None => Item::pass(name, a.id(), format!("{triples} basis triples")),
        Some((t, v)) => Item::fail(
            name,
            a.id(),
            format!("nonzero on {} of {triples} basis triples", w.len()),
            format!("{} -> {}", triple(names, *t), v.display(names)),
        ),
    };
    out.push(check("pre-lie", c.check_pre_lie().witnesses));
    if a.flags.iter().any(|f| f == "associative") {
        out.push(check("associative", c.check_associative().witnesses));
    }
    out
}

fn section_algebras(cat: &Catalog) -> Vec<Item> {
    let mut out = Vec::new();
    for kind in [EntryKind::Algebra, EntryKind::LieAlgebra] {
        for e in cat.of_kind(kind) {
            if let Ok(a) = cat.any_algebra(&e.id) {
                out.extend(algebra_items(a));
            }
        }
    }
    out
}

fn remark_checks<'a>(cat: &'a Catalog, keyword: &'a str) -> impl Iterator<Item = (&'a str, &'a [String])> + 'a {
    cat.remarks().flat_map(move |r| {
        r.checks.iter().filter_map(move |c| match c.split_first() {
            Some((kw, args)) if kw == keyword => Some((r.id.as_str(), args)),
            _ => None,
        })
    })
}

fn section_sub_adjacent(cat: &Catalog) -> Vec<Item> {
    let mut out = Vec::new();
    for (_, args) in remark_checks(cat, "abelian") {
        for a in args {
            let res = cat
                .algebra(a)
                .map_err(|e| e.to_string())
                .and_then(|d| d.constants.sub_adjacent().map_err(|e| e.to_string()));
            out.push(match res {
                Ok(g) if g.is_abelian() => Item::pass("abelian", a, "commutator bracket vanishes"),
                Ok(g) => Item::fail(
                    "abelian",
                    a,
                    "commutator bracket is nonzero",
                    g.constants().product_lines(crate::algebra::ProductNotation::Bracket).join(", "),
                ),
                Err(e) => Item::fail("abelian", a, "could not form the commutator algebra", e),
            });
        }
    }
    for (_, args) in remark_checks(cat, "sub-adjacent") {
        if let Some((lie, algs)) = args.split_first() {
            for a in algs {
                out.push(match sub_adjacent_matches(cat, lie, a) {
                    Ok(()) => Item::pass("sub-adjacent", a, format!("commutator algebra is {lie}")),
                    Err(e) => Item::fail("sub-adjacent", a, format!("commutator algebra is not {lie}"), e),
                });
            }
        }
    }
    out
}

fn validate_def(cat: &Catalog, f: &FamilyDef) -> Result<FamilyReport, String> {
    let a = match f.kind {
        OperatorKind::Nijenhuis => cat.algebra(&f.family.algebra).map(|a| a.constants.clone()),
        OperatorKind::RotaBaxter(_) => cat.lie(&f.family.algebra).map(|l| l.into_constants()),
    }
    .map_err(|e| e.to_string())?;
    validate_family(&a, &f.family, &f.kind).map_err(|e| e.to_string())
}

fn residual_witness(r: &FamilyReport, names: &[String]) -> String {
    match &r.witness {
        Some((ij, v)) => format!("{} -> {v}", pair(names, *ij)),
        None => String::new(),
    }
}

fn basis_of(cat: &Catalog, f: &FamilyDef) -> Vec<String> {
    cat.any_algebra(&f.family.algebra)
        .map(|a| a.constants.basis_names().to_vec())
        .unwrap_or_else(|_| (1..=f.family.dim()).map(|i| format!("e{i}")).collect())
}

/// Validation items for a list of families, with variant groups resolved:
/// a failing member of a group that another member verifies is a FINDING.
fn family_items(cat: &Catalog, fams: &[&FamilyDef], check: &str) -> Vec<Item> {
    let results: Vec<Result<FamilyReport, String>> = fams.par_iter().map(|f| validate_def(cat, f)).collect();
    let passed: BTreeSet<&str> = fams
        .iter()
        .zip(&results)
        .filter(|(_, r)| matches!(r, Ok(r) if r.passed()))
        .map(|(f, _)| f.family.id.as_str())
        .collect();
    let groups = cat.variant_groups();
    let mut out = Vec::new();
    for (f, r) in fams.iter().zip(&results) {
        let id = &f.family.id;
        let kind = f.kind.to_string();
        out.push(match r {
            Err(e) => Item::fail(check, id, "could not validate", e.clone()),
            Ok(r) if r.passed() => Item::pass(check, id, format!("{kind} on {}, all basis pairs", f.family.algebra)),
            Ok(r) => {
                let w = residual_witness(r, &basis_of(cat, f));
                let verifying: Vec<&str> = flag_values(&f.flags, "variant")
                    .flat_map(|g| groups.get(g).into_iter().flatten())
                    .map(String::as_str)
                    .filter(|m| passed.contains(m))
                    .collect();
                if verifying.is_empty() {
                    Item::fail(check, id, format!("{kind} residual is nonzero"), w)
                } else {
                    Item::finding(
                        check,
                        id,
                        format!("residual is nonzero as transcribed; variant {} verifies", verifying.join(", ")),
                    )
                    .with_witness(w)
                }
            }
        });
    }
    let ids: BTreeSet<&str> = fams.iter().map(|f| f.family.id.as_str()).collect();
    for (g, members) in &groups {
        if !members.iter().any(|m| ids.contains(m.as_str())) {
            continue;
        }
        let ok: Vec<&String> = members.iter().filter(|m| passed.contains(m.as_str())).collect();
        out.push(if ok.is_empty() {
            Item::fail("variant", g, "no variant verifies", members.join(", "))
        } else {
            Item::pass(
                "variant",
                g,
                format!(
                    "verified by {}; of {}",
                    ok.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", "),
                    members.join(", ")
                ),
            )
        });
    }
    out
}

fn same_family(a: &ParametricFamily, b: &ParametricFamily) -> bool {
    let cons = |f: &ParametricFamily| -> Vec<String> {
        let mut v: Vec<String> = f.constraints.iter().map(|c| c.to_string()).collect();
        v.sort();
        v
    };
    a.dim() == b.dim()
        && a.matrix.add(&b.matrix.scale(&Scalar::ratio(-1, 1))).is_zero()
        && cons(a) == cons(b)
}

/// `same` and `specializes` remark checks whose first family is of `kind`.
fn relation_items(cat: &Catalog, kind: EntryKind) -> Vec<Item> {
    let mut out = Vec::new();
    for (_, args) in remark_checks(cat, "same") {
        if cat.get(kind, &args[0]).is_none() {
            continue;
        }
        let subject = args.join(" = ");
        let fams: Result<Vec<&FamilyDef>, _> = args.iter().map(|a| cat.family(a)).collect();
        out.push(match fams {
            Err(e) => Item::fail("same", subject, "unknown family", e.to_string()),
            Ok(fs) => match fs.iter().skip(1).find(|f| !same_family(&fs[0].family, &f.family)) {
                None => Item::pass("same", subject, "identical matrices and constraints"),
                Some(f) => Item::fail(
                    "same",
                    subject,
                    format!("{} differs from {}", f.family.id, fs[0].family.id),
                    format!("{:?} vs {:?}", f.family.matrix, fs[0].family.matrix),
                ),
            },
        });
    }
    for (_, args) in remark_checks(cat, "specializes") {
        let (general, special, values) = match args {
            [g, s, v @ ..] => (g, s, v),
            _ => continue,
        };
        if cat.get(kind, special).is_none() {
            continue;
        }
        let subject = format!("{general} -> {special}");
        let res = (|| -> Result<(), String> {
            let g = cat.family(general).map_err(|e| e.to_string())?;
            let s = cat.family(special).map_err(|e| e.to_string())?;
            let vals = parse_bindings(values)?;
            let spec = g.family.specialize_partial(&vals).map_err(|e| e.to_string())?;
            if same_family(&ParametricFamily { constraints: Vec::new(), ..spec.clone() }, &ParametricFamily {
                constraints: Vec::new(),
                ..s.family.clone()
            }) {
                Ok(())
            } else {
                Err(format!("{:?} vs {:?}", spec.matrix, s.family.matrix))
            }
        })();
        out.push(match res {
            Ok(()) => Item::pass("specializes", subject, values.join(" ")),
            Err(e) => Item::fail("specializes", subject, format!("at {}", values.join(" ")), e),
        });
    }
    out
}

fn section_nijenhuis(cat: &Catalog) -> Vec<Item> {
    let fams: Vec<&FamilyDef> = cat.families(EntryKind::NijenhuisFamily).collect();
    let mut out = family_items(cat, &fams, "nijenhuis");
    out.extend(relation_items(cat, EntryKind::NijenhuisFamily));
    out
}

fn random_gaussian(rng: &mut ChaCha8Rng) -> GaussianRational {
    if rng.gen_ratio(1, 4) {
        return GaussianRational::from_integer(0);
    }
    let re = GaussianRational::from_ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3));
    if rng.gen_bool(0.5) {
        return re;
    }
    re + GaussianRational::from_ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3)) * GaussianRational::i()
}

fn random_operator(rng: &mut ChaCha8Rng, n: usize) -> LinearOperator<GaussianRational> {
    let rows = (0..n).map(|_| (0..n).map(|_| random_gaussian(rng)).collect()).collect();
    LinearOperator::from_dense(rows).expect("square")
}

/// First basis pair where the Nijenhuis residual differs from the weight-0
/// Rota-Baxter residual plus `N²(e_i e_j)`.
pub fn nijenhuis_split_failure<S: Coefficient>(
    a: &StructureConstants<S>,
    n: &LinearOperator<S>,
) -> Result<Option<(usize, usize)>, AlgebraError> {
    let nn = operator_square(n);
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let lhs = nijenhuis_residual(a, n, i, j)?;
            let rhs = rota_baxter_residual(a, n, &S::zero(), i, j)?.add(&nn.apply(&a.product_basis(i, j)));
            if !lhs.sub(&rhs).is_zero() {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// First basis pair where the Rota-Baxter residual on the commutator algebra
/// differs from the antisymmetrized pre-Lie residual.
pub fn commutator_rb_failure<S: Coefficient>(
    a: &StructureConstants<S>,
    g: &LieAlgebra<S>,
    r: &LinearOperator<S>,
    w: &S,
) -> Result<Option<(usize, usize)>, AlgebraError> {
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let lhs = rota_baxter_residual(g, r, w, i, j)?;
            let rhs = rota_baxter_residual(a, r, w, i, j)?.sub(&rota_baxter_residual(a, r, w, j, i)?);
            if !lhs.sub(&rhs).is_zero() {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// Both identities on one algebra; the operators and weights are given over
/// the Gaussian rationals and mapped into `S`.
fn identity_witnesses<S: Coefficient>(
    a: &StructureConstants<S>,
    samples: &[(LinearOperator<GaussianRational>, GaussianRational)],
    embed: impl Fn(&GaussianRational) -> S,
) -> Result<[Option<String>; 2], AlgebraError> {
    let g = a.sub_adjacent()?;
    let names = a.basis_names();
    let mut found: [Option<String>; 2] = [None, None];
    for (k, (op, w)) in samples.iter().enumerate() {
        let op: LinearOperator<S> = op.map(|c| Ok::<_, AlgebraError>(embed(c)))?;
        if found[0].is_none() {
            if let Some(ij) = nijenhuis_split_failure(a, &op)? {
                found[0] = Some(format!("sample {k} at {}: {op:?}", pair(names, ij)));
            }
        }
        if found[1].is_none() {
            if let Some(ij) = commutator_rb_failure(a, &g, &op, &embed(w))? {
                found[1] = Some(format!("sample {k} at {} (weight {w}): {op:?}", pair(names, ij)));
            }
        }
    }
    Ok(found)
}

/// `c N` and `N + c Id` are again Nijenhuis; `c R` is again a weight-zero
/// Rota-Baxter operator.
fn invariance_failure(a: &StructureConstants<Scalar>, f: &FamilyDef) -> Result<Option<String>, String> {
    let n = f.family.dim();
    let weight_zero = matches!(&f.kind, OperatorKind::RotaBaxter(w) if w.is_zero());
    for c in invariance_constants() {
        let mut variants = vec![("scaled", f.family.matrix.scale(&c))];
        if f.kind == OperatorKind::Nijenhuis {
            variants.push(("shifted", f.family.matrix.add(&LinearOperator::identity(n).scale(&c))));
        } else if !weight_zero {
            return Ok(None);
        }
        for (how, m) in variants {
            let g = ParametricFamily {
                matrix: m,
                ..f.family.clone()
            };
            let r = validate_family(a, &g, &f.kind).map_err(|e| e.to_string())?;
            if !r.passed() {
                return Ok(Some(format!("{} {how} by {c}: {}", f.family.id, residual_witness(&r, a.basis_names()))));
            }
        }
    }
    Ok(None)
}

fn section_identities(cat: &Catalog, opts: &VerifyOptions) -> Vec<Item> {
    let algs: Vec<&AlgebraDef> = cat
        .of_kind(EntryKind::Algebra)
        .filter_map(|e| cat.algebra(&e.id).ok())
        .collect();
    let mut out = Vec::new();
    for (k, a) in algs.iter().enumerate() {
        let c = &a.constants;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(k as u64);
        let samples: Vec<_> = (0..opts.samples)
            .map(|_| (random_operator(&mut rng, c.dim()), random_gaussian(&mut rng)))
            .collect();
        let res = match c.map(|s| s.as_constant().ok_or(())) {
            Ok(q) => identity_witnesses(&q, &samples, |g| g.clone()),
            Err(()) => identity_witnesses(c, &samples, |g| Scalar::constant(g.clone())),
        };
        let detail = format!("{} random operators, seed {:#x}", opts.samples, opts.seed);
        match res {
            Err(e) => out.push(Item::fail("nijenhuis-split", a.id(), "could not evaluate", e.to_string())),
            Ok([split, comm]) => {
                out.push(match split {
                    None => Item::pass("nijenhuis-split", a.id(), detail.clone()),
                    Some(w) => Item::fail("nijenhuis-split", a.id(), "residuals disagree", w),
                });
                out.push(match comm {
                    None => Item::pass("commutator-rb", a.id(), detail.clone()),
                    Some(w) => Item::fail("commutator-rb", a.id(), "residuals disagree", w),
                });
            }
        }
    }
    let fams: Vec<&FamilyDef> = cat.families(EntryKind::NijenhuisFamily).chain(cat.families(EntryKind::RbOperator)).collect();
    let results: Vec<(&FamilyDef, Result<Option<String>, String>)> = fams
        .par_iter()
        .map(|f| {
            let ok = validate_def(cat, f).map(|r| r.passed()).unwrap_or(false);
            if !ok {
                return (*f, Ok(None));
            }
            let a = match f.kind {
                OperatorKind::Nijenhuis => cat.algebra(&f.family.algebra).map(|a| a.constants.clone()),
                OperatorKind::RotaBaxter(_) => cat.lie(&f.family.algebra).map(|l| l.into_constants()),
            };
            (*f, a.map_err(|e| e.to_string()).and_then(|a| invariance_failure(&a, f)))
        })
        .collect();
    let mut by_algebra: BTreeMap<(usize, &str), (usize, Option<String>)> = BTreeMap::new();
    let order: BTreeMap<&str, usize> = cat.entries().iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
    for (f, r) in results {
        let key = (order.get(f.family.algebra.as_str()).copied().unwrap_or(usize::MAX), f.family.algebra.as_str());
        let slot = by_algebra.entry(key).or_insert((0, None));
        slot.0 += 1;
        let err = match r {
            Ok(w) => w,
            Err(e) => Some(e),
        };
        if slot.1.is_none() {
            slot.1 = err;
        }
    }
    let cs: Vec<String> = invariance_constants().iter().map(|c| c.to_string()).collect();
    for ((_, alg), (count, err)) in by_algebra {
        out.push(match err {
            None => Item::pass(
                "scale-shift",
                alg,
                format!("{count} families, c in {{{}}}", cs.join(", ")),
            ),
            Some(w) => Item::fail("scale-shift", alg, "an invariance fails", w),
        });
    }
    out
}

/// `R` satisfies the Nijenhuis identity on `src`'s algebra and squares to 0.
fn derived_item(cat: &Catalog, r: &FamilyDef, src: &str) -> Item {
    let subject = format!("{} <- {src}", r.family.id);
    let res = (|| -> Result<Option<String>, String> {
        let s = cat.family(src).map_err(|e| e.to_string())?;
        let a = cat.algebra(&s.family.algebra).map_err(|e| e.to_string())?;
        let rep = validate_family(&a.constants, &r.family, &OperatorKind::Nijenhuis).map_err(|e| e.to_string())?;
        if !rep.passed() {
            return Ok(Some(format!(
                "not Nijenhuis on {}: {}",
                a.id(),
                residual_witness(&rep, a.constants.basis_names())
            )));
        }
        let sq = operator_square(&r.family.matrix);
        if !sq.is_zero() {
            return Ok(Some(format!("square is {sq:?}")));
        }
        Ok(None)
    })();
    match res {
        Ok(None) => Item::pass("derived", subject, "square-zero Nijenhuis operator on the source algebra"),
        Ok(Some(w)) => Item::fail("derived", subject, "not a square-zero Nijenhuis operator on the source algebra", w),
        Err(e) => Item::fail("derived", subject, "could not check", e),
    }
}

fn fp_constants(a: &StructureConstants<Scalar>, p: u32) -> Result<StructureConstants<Fp>, String> {
    let asg = Assignment::modulo(p);
    a.map(|s| s.substitute_fp(&asg)).map_err(|e| e.to_string())
}

fn oracle_err(e: OracleError) -> String {
    e.to_string()
}

fn nilpotent_items(cat: &Catalog, p: u32) -> Vec<Item> {
    let mut out = Vec::new();
    for (_, args) in remark_checks(cat, "nilpotent-nijenhuis-zero") {
        for id in args {
            let res = (|| -> Result<(usize, Vec<u64>), String> {
                let a = cat.algebra(id).map_err(|e| e.to_string())?;
                let n = a.constants.dim();
                let mut bad = Vec::new();
                let insts = instances(&a.constants, p).map_err(oracle_err)?;
                for inst in &insts {
                    let t = DenseTable::new(&inst.constants, p);
                    let found = search(n, p, |m| square_is_zero(n, p as u64, m) && t.holds(FfIdentity::Nijenhuis, m))
                        .map_err(oracle_err)?;
                    bad.extend(found.into_iter().filter(|&c| c != 0));
                }
                Ok((insts.len(), bad))
            })();
            out.push(match res {
                Ok((k, bad)) if bad.is_empty() => Item::pass(
                    "nilpotent-zero",
                    id,
                    format!("over F_{p} ({k} instance(s)) the only square-zero Nijenhuis operator is 0"),
                ),
                Ok((_, bad)) => {
                    let n = cat.algebra(id).map(|a| a.constants.dim()).unwrap_or(0);
                    Item::fail(
                        "nilpotent-zero",
                        id,
                        format!("{} nonzero square-zero Nijenhuis operators over F_{p}", bad.len()),
                        FFMatrix::from_code(bad[0], n, p).to_string(),
                    )
                }
                Err(e) => Item::fail("nilpotent-zero", id, "could not search", e),
            });
        }
    }
    for (_, args) in remark_checks(cat, "nilpotent-rb") {
        for id in args {
            let res = (|| -> Result<(usize, Vec<u64>), String> {
                let a = cat.algebra(id).map_err(|e| e.to_string())?;
                let n = a.constants.dim();
                let mut count = 0;
                let mut bad = Vec::new();
                for inst in instances(&a.constants, p).map_err(oracle_err)? {
                    let g = inst.constants.sub_adjacent().map_err(|e| e.to_string())?;
                    let t = DenseTable::new(g.constants(), p);
                    count += search(n, p, |m| square_is_zero(n, p as u64, m)).map_err(oracle_err)?.len();
                    bad.extend(
                        search(n, p, |m| square_is_zero(n, p as u64, m) && !t.holds(FfIdentity::RotaBaxter(0), m))
                            .map_err(oracle_err)?,
                    );
                }
                Ok((count, bad))
            })();
            out.push(match res {
                Ok((count, bad)) if bad.is_empty() => Item::pass(
                    "nilpotent-rb",
                    id,
                    format!("all {count} square-zero maps over F_{p} are Rota-Baxter on the commutator algebra"),
                ),
                Ok((_, bad)) => {
                    let n = cat.algebra(id).map(|a| a.constants.dim()).unwrap_or(0);
                    Item::fail(
                        "nilpotent-rb",
                        id,
                        format!("{} square-zero maps over F_{p} are not Rota-Baxter", bad.len()),
                        FFMatrix::from_code(bad[0], n, p).to_string(),
                    )
                }
                Err(e) => Item::fail("nilpotent-rb", id, "could not search", e),
            });
        }
    }
    for (_, args) in remark_checks(cat, "nilpotent-cone") {
        let Some((lie, charts)) = args.split_first() else { continue };
        let subject = format!("{lie}: {}", charts.join(" + "));
        let res = (|| -> Result<(usize, Vec<u64>, Vec<u64>), String> {
            let g = cat.lie_def(lie).map_err(|e| e.to_string())?;
            let n = g.constants.dim();
            let cone = search(n, p, |m| square_is_zero(n, p as u64, m)).map_err(oracle_err)?;
            let inst = instances(&g.constants, p).map_err(oracle_err)?.into_iter().next().ok_or("no instance")?;
            let mut covered = BTreeSet::new();
            for c in charts {
                let f = cat.family(c).map_err(|e| e.to_string())?;
                covered.extend(family_points(&g.constants, &f.family, &inst, p).map_err(oracle_err)?);
            }
            let cone_set: BTreeSet<u64> = cone.iter().copied().collect();
            let missing: Vec<u64> = cone_set.difference(&covered).copied().collect();
            let extra: Vec<u64> = covered.difference(&cone_set).copied().collect();
            Ok((cone.len(), missing, extra))
        })();
        let n = cat.lie_def(lie).map(|g| g.constants.dim()).unwrap_or(0);
        out.push(match res {
            Ok((k, missing, extra)) if missing.is_empty() && extra.is_empty() => Item::pass(
                "nilpotent-cone",
                subject,
                format!("the charts cover exactly the {k} square-zero maps over F_{p}"),
            ),
            Ok((_, missing, extra)) => {
                let w = missing.first().or(extra.first()).copied().unwrap_or(0);
                Item::fail(
                    "nilpotent-cone",
                    subject,
                    format!("{} square-zero maps missed, {} chart points not square-zero", missing.len(), extra.len()),
                    FFMatrix::from_code(w, n, p).to_string(),
                )
            }
            Err(e) => Item::fail("nilpotent-cone", subject, "could not search", e),
        });
    }
    out
}

fn section_rota_baxter(cat: &Catalog, p: u32) -> Vec<Item> {
    let fams: Vec<&FamilyDef> = cat.families(EntryKind::RbOperator).collect();
    let mut out = family_items(cat, &fams, "rota-baxter");
    for f in &fams {
        for src in flag_values(&f.flags, "derived-from") {
            out.push(derived_item(cat, f, src));
        }
    }
    out.extend(nilpotent_items(cat, p));
    out.extend(relation_items(cat, EntryKind::RbOperator));
    out
}

fn tensor_residual(cat: &Catalog, t: &TensorDef) -> Result<Option<String>, String> {
    let lie = cat.lie(&t.algebra).map_err(|e| e.to_string())?;
    let d = semidirect_double(&lie).map_err(|e| e.to_string())?;
    let res = cybe_residual(&d.total, &t.tensor).map_err(|e| e.to_string())?;
    Ok((!res.is_zero()).then(|| {
        let (idx, c) = res.terms().next().expect("nonzero");
        let names = d.basis_names();
        format!("{c} at {} (x) {} (x) {}", names[idx[0]], names[idx[1]], names[idx[2]])
    }))
}

/// `skewize(operator_to_tensor(R))` for the tensor's source operator.
fn tensor_from_operator(cat: &Catalog, t: &TensorDef) -> Result<Option<String>, String> {
    let Some(src) = &t.from else {
        return Err("no source operator".to_string());
    };
    let f = cat.family(src).map_err(|e| e.to_string())?;
    let lie = cat.lie(&t.algebra).map_err(|e| e.to_string())?;
    let d = semidirect_double(&lie).map_err(|e| e.to_string())?;
    let r = skewize(&operator_to_tensor(&d, &f.family.matrix).map_err(|e| e.to_string())?);
    let diff = r.sub(&t.tensor);
    Ok((!diff.is_zero()).then(|| format!("R - R21 = {}", r.display(d.basis_names()))))
}

/// Random operators on `lie` (dense ones and specializations of `fams`):
/// whether each is a weight-zero Rota-Baxter operator and whether `R - R21`
/// solves the CYBE. Returns the operator count, the Rota-Baxter count and the
/// first operator where the two tests disagree.
pub fn rb_cybe_agreement(
    lie: &LieAlgebra<Scalar>,
    fams: &[&ParametricFamily],
    dense: usize,
    seed: u64,
) -> Result<(usize, usize, Option<String>), String> {
    let n = lie.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ops: Vec<LinearOperator<Scalar>> = (0..dense)
        .map(|_| random_operator(&mut rng, n).map(|c| Ok::<_, ()>(Scalar::constant(c.clone()))).expect("constant"))
        .collect();
    for f in fams {
        for _ in 0..5 {
            let vals: BTreeMap<String, Scalar> = f
                .params
                .iter()
                .map(|p| {
                    let v = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
                    (p.clone(), Scalar::ratio(v, 1))
                })
                .collect();
            let Ok(spec) = f.specialize_partial(&vals) else { continue };
            if spec.constraints.iter().all(|c| !c.is_zero()) && spec.side_conditions.iter().all(|c| c.is_zero()) {
                ops.push(spec.matrix);
            }
        }
    }
    let d = semidirect_double(lie).map_err(|e| e.to_string())?;
    let zero = Scalar::ratio(0, 1);
    let mut rb_count = 0;
    for op in &ops {
        let mut rb = true;
        'pairs: for i in 0..n {
            for j in 0..n {
                if !rota_baxter_residual(lie, op, &zero, i, j).map_err(|e| e.to_string())?.is_zero() {
                    rb = false;
                    break 'pairs;
                }
            }
        }
        let t = skewize(&operator_to_tensor(&d, op).map_err(|e| e.to_string())?);
        let cybe = cybe_residual(&d.total, &t).map_err(|e| e.to_string())?.is_zero();
        rb_count += rb as usize;
        if rb != cybe {
            return Ok((ops.len(), rb_count, Some(format!("{op:?}: rota-baxter {rb}, cybe {cybe}"))));
        }
    }
    Ok((ops.len(), rb_count, None))
}

fn section_cybe(cat: &Catalog, seed: u64) -> Vec<Item> {
    let tensors: Vec<&TensorDef> = cat.tensors().collect();
    let results: Vec<(Result<Option<String>, String>, Result<Option<String>, String>)> = tensors
        .par_iter()
        .map(|t| (tensor_residual(cat, t), tensor_from_operator(cat, t)))
        .collect();
    let verified: BTreeSet<&str> = tensors
        .iter()
        .zip(&results)
        .filter(|(_, (r, _))| matches!(r, Ok(None)))
        .map(|(t, _)| t.id.as_str())
        .collect();
    let derived: BTreeSet<&str> = tensors
        .iter()
        .zip(&results)
        .filter(|(_, (_, f))| matches!(f, Ok(None)))
        .map(|(t, _)| t.id.as_str())
        .collect();
    let groups = cat.variant_groups();
    let verifying_variants = |t: &TensorDef| -> Vec<&str> {
        flag_values(&t.flags, "variant")
            .flat_map(|g| groups.get(g).into_iter().flatten())
            .map(String::as_str)
            .filter(|m| *m != t.id && verified.contains(m) && derived.contains(m))
            .collect()
    };
    let mut out = Vec::new();
    for (t, (res, from)) in tensors.iter().zip(&results) {
        let variants = verifying_variants(t);
        out.push(match res {
            Ok(None) => Item::pass("cybe", &t.id, format!("zero residual on the double of {}", t.algebra)),
            Ok(Some(w)) if !variants.is_empty() => Item::finding(
                "cybe",
                &t.id,
                format!("nonzero residual as transcribed; variant {} verifies", variants.join(", ")),
            )
            .with_witness(w.clone()),
            Ok(Some(w)) => Item::fail("cybe", &t.id, "nonzero residual", w.clone()),
            Err(e) => Item::fail("cybe", &t.id, "could not evaluate", e.clone()),
        });
        let src = t.from.clone().unwrap_or_default();
        out.push(match from {
            Ok(None) => Item::pass("from-operator", &t.id, format!("equals R - R21 for {src}")),
            Ok(Some(w)) if !variants.is_empty() => Item::finding(
                "from-operator",
                &t.id,
                format!("differs from R - R21 for {src}; variant {} matches", variants.join(", ")),
            )
            .with_witness(w.clone()),
            Ok(Some(w)) => Item::fail("from-operator", &t.id, format!("differs from R - R21 for {src}"), w.clone()),
            Err(e) => Item::fail("from-operator", &t.id, "could not evaluate", e.clone()),
        });
    }
    for (g, members) in &groups {
        if !tensors.iter().any(|t| members.contains(&t.id)) {
            continue;
        }
        let zero: Vec<&str> = members.iter().map(String::as_str).filter(|m| verified.contains(m)).collect();
        let full: Vec<&str> = zero.iter().copied().filter(|m| derived.contains(m)).collect();
        let others: Vec<&str> = members.iter().map(String::as_str).filter(|m| !full.contains(m)).collect();
        out.push(if zero.is_empty() {
            Item::fail("variant", g, "no variant has zero residual", members.join(", "))
        } else if others.is_empty() {
            Item::pass("variant", g, format!("{} all verify", members.join(", ")))
        } else {
            let why: Vec<String> = others
                .iter()
                .map(|m| {
                    if verified.contains(m) {
                        format!("{m} has zero residual but is not R - R21 for its operator")
                    } else {
                        format!("{m} has nonzero residual")
                    }
                })
                .collect();
            let head = if full.is_empty() {
                format!("only {} have zero residual", zero.join(", "))
            } else {
                format!("{} verifies", full.join(", "))
            };
            Item::finding("variant", g, format!("{head}; {}", why.join("; ")))
        });
    }
    let mut lies: Vec<&str> = rbs_algebras(cat);
    lies.dedup();
    for (k, lie_id) in lies.iter().enumerate() {
        let fams: Vec<&ParametricFamily> = cat
            .families(EntryKind::RbOperator)
            .filter(|f| f.family.algebra == *lie_id)
            .map(|f| &f.family)
            .collect();
        let res = cat
            .lie(lie_id)
            .map_err(|e| e.to_string())
            .and_then(|l| rb_cybe_agreement(&l, &fams, 50, seed.wrapping_add(k as u64)));
        out.push(match res {
            Ok((total, rb, None)) => Item::pass(
                "rb-iff-cybe",
                *lie_id,
                format!("{total} operators, {rb} Rota-Baxter; R - R21 solves the CYBE exactly for those"),
            ),
            Ok((_, _, Some(w))) => Item::fail("rb-iff-cybe", *lie_id, "the two tests disagree", w),
            Err(e) => Item::fail("rb-iff-cybe", *lie_id, "could not evaluate", e),
        });
    }
    // Every operator yields a solution through R - R21.
    let rbs: Vec<&FamilyDef> = cat.families(EntryKind::RbOperator).collect();
    let rb_results: Vec<Result<Option<String>, String>> = rbs
        .par_iter()
        .map(|f| {
            let lie = cat.lie(&f.family.algebra).map_err(|e| e.to_string())?;
            let d = semidirect_double(&lie).map_err(|e| e.to_string())?;
            let r = skewize(&operator_to_tensor(&d, &f.family.matrix).map_err(|e| e.to_string())?);
            let res = cybe_residual(&d.total, &r).map_err(|e| e.to_string())?;
            Ok((!res.is_zero()).then(|| format!("{res:?}")))
        })
        .collect();
    for (f, r) in rbs.iter().zip(rb_results) {
        out.push(match r {
            Ok(None) => Item::pass("operator-to-cybe", &f.family.id, "R - R21 has zero residual"),
            Ok(Some(w)) => Item::fail("operator-to-cybe", &f.family.id, "R - R21 has nonzero residual", w),
            Err(e) => Item::fail("operator-to-cybe", &f.family.id, "could not evaluate", e),
        });
    }
    for (_, args) in remark_checks(cat, "double") {
        let [base, printed] = args else { continue };
        let res = (|| -> Result<Option<String>, String> {
            let d = semidirect_double(&cat.lie(base).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let pr = cat.lie_def(printed).map_err(|e| e.to_string())?;
            if same_products(d.total.constants(), &pr.constants) {
                Ok(None)
            } else {
                Ok(Some(
                    d.total.constants().product_lines(crate::algebra::ProductNotation::Bracket).join(", "),
                ))
            }
        })();
        out.push(match res {
            Ok(None) => Item::pass("double", base, format!("brackets match {printed}")),
            Ok(Some(w)) => Item::fail("double", base, format!("brackets differ from {printed}"), w),
            Err(e) => Item::fail("double", base, "could not compare", e),
        });
    }
    out
}

/// Lie algebras carrying Rota-Baxter families, in catalog order.
fn rbs_algebras(cat: &Catalog) -> Vec<&str> {
    let mut seen = BTreeSet::new();
    cat.families(EntryKind::RbOperator)
        .map(|f| f.family.algebra.as_str())
        .filter(|a| seen.insert(*a))
        .collect()
}

fn coverage_subject(r: &CoverageReport) -> String {
    if r.instance.is_empty() {
        r.algebra.clone()
    } else {
        format!("{} [{}]", r.algebra, r.instance_label())
    }
}

/// Soundness and completeness items for one coverage report. `errata` are
/// families known to fail symbolically, whose unsound points are expected.
pub fn coverage_items(r: &CoverageReport, errata: &BTreeSet<String>, require_complete: bool) -> Vec<Item> {
    let subject = coverage_subject(r);
    let p = r.p;
    let mut out = Vec::new();
    if r.is_sound() {
        out.push(Item::pass(
            "soundness",
            &subject,
            format!("every specialization of {} families over F_{p} is a solution", r.families.len()),
        ));
    } else {
        let bad: Vec<String> = r.unsound_counts.iter().map(|(f, n)| format!("{f} ({n})")).collect();
        let sample = r
            .unsound
            .first()
            .map(|u| {
                let asg: Vec<String> = u.assignment.iter().map(|(k, v)| format!("{k}={v}")).collect();
                format!("{} at {} gives {}", u.family, asg.join(" "), u.matrix)
            })
            .unwrap_or_default();
        let status = if r.unsound_counts.keys().all(|f| errata.contains(f)) {
            Status::Finding
        } else {
            Status::Fail
        };
        out.push(
            Item::new(
                "soundness",
                &subject,
                status,
                format!("non-solution specializations from {}", bad.join(", ")),
            )
            .with_witness(sample),
        );
    }
    let empty: Vec<String> = r.empty_families.iter().map(|e| format!("{} ({})", e.family, e.reason)).collect();
    if r.is_complete() {
        out.push(Item::pass(
            "completeness",
            &subject,
            format!("all {} solutions over F_{p} are covered", r.total),
        ));
    } else {
        let mut detail = format!("{} of {} solutions over F_{p} are not covered", r.unmatched.len(), r.total);
        if !empty.is_empty() {
            detail.push_str(&format!("; empty here: {}", empty.join(", ")));
        }
        let w = r.unmatched.iter().take(3).map(|m| m.to_string()).collect::<Vec<_>>().join(" ");
        out.push(if require_complete {
            Item::fail("completeness", &subject, detail, w)
        } else {
            Item::finding("completeness", &subject, detail).with_witness(w)
        });
    }
    out
}

/// Fixed solution counts for the zero algebra and for `e1 e1 = e2`.
fn count_items(id: &str, r: &CoverageReport, sols: impl Fn() -> Vec<FFMatrix>) -> Option<Item> {
    let p = r.p as usize;
    match id {
        "A4" => Some(if r.total == p.pow(4) {
            Item::pass("count", id, format!("{} solutions, every map", r.total))
        } else {
            Item::fail("count", id, format!("{} solutions, expected {}", r.total, p.pow(4)), r.total.to_string())
        }),
        "A5" => {
            let all = sols();
            let shaped = all.iter().all(|m| m.entry(1, 0) == 0 && m.entry(0, 0) == m.entry(1, 1));
            Some(if all.len() == p * p && shaped {
                Item::pass("count", id, format!("{} solutions, exactly [[a, b], [0, a]]", all.len()))
            } else {
                let odd = all.iter().find(|m| !(m.entry(1, 0) == 0 && m.entry(0, 0) == m.entry(1, 1)));
                Item::fail(
                    "count",
                    id,
                    format!("{} solutions, expected {} of shape [[a, b], [0, a]]", all.len(), p * p),
                    odd.map(|m| m.to_string()).unwrap_or_else(|| all.len().to_string()),
                )
            })
        }
        _ => None,
    }
}

fn section_oracle(cat: &Catalog, p: u32) -> Vec<Item> {
    let mut out = Vec::new();
    for e in cat.of_kind(EntryKind::Algebra) {
        let Ok(a) = cat.algebra(&e.id) else { continue };
        let defs: Vec<&FamilyDef> = cat
            .families(EntryKind::NijenhuisFamily)
            .filter(|f| f.family.algebra == e.id)
            .collect();
        let fams: Vec<ParametricFamily> = defs.iter().map(|f| f.family.clone()).collect();
        let errata: BTreeSet<String> = defs
            .par_iter()
            .filter(|f| !validate_def(cat, f).map(|r| r.passed()).unwrap_or(false))
            .map(|f| f.family.id.clone())
            .collect();
        match family_coverage(&a.constants, &fams, FfIdentity::Nijenhuis, p) {
            Ok(reports) => {
                for r in &reports {
                    out.extend(coverage_items(r, &errata, COMPLETENESS_REQUIRED.contains(&e.id.as_str())));
                    let sols = || {
                        fp_constants(&a.constants, p)
                            .ok()
                            .and_then(|c| crate::oracle::enumerate_nijenhuis_ff(&c, p).ok())
                            .unwrap_or_default()
                    };
                    out.extend(count_items(&e.id, r, sols));
                }
            }
            Err(err @ OracleError::SearchSpaceTooLarge { .. }) => {
                out.push(Item::finding("oracle", &e.id, format!("skipped: {err}")));
            }
            Err(err) => out.push(Item::fail("oracle", &e.id, "search failed", err.to_string())),
        }
    }
    out
}

/// On `lie` over F_p: the weight-zero Rota-Baxter operators and the maps `R`
/// with `R - R21` solving the CYBE in the double, as sorted codes.
pub fn rb_and_cybe_sets(lie: &LieAlgebra<Scalar>, p: u32) -> Result<(Vec<u64>, Vec<u64>), String> {
    let asg = Assignment::modulo(p);
    let l = lie.map(|s| s.substitute_fp(&asg)).map_err(|e| e.to_string())?;
    let n = l.dim();
    let rb: Vec<u64> = enumerate_rb_ff(&l, p, Fp::new(0, p))
        .map_err(oracle_err)?
        .iter()
        .map(FFMatrix::code)
        .collect();
    let d = semidirect_double(&l).map_err(|e| e.to_string())?;
    let cybe = search(n, p, |m| {
        let rows: Vec<Vec<Fp>> = m.chunks(n).map(|r| r.iter().map(|&x| Fp::new(x as i64, p)).collect()).collect();
        let op = LinearOperator::from_dense(rows).expect("square");
        let t: Tensor2<Fp> = skewize(&operator_to_tensor(&d, &op).expect("dimension"));
        cybe_residual(&d.total, &t).map(|r| r.is_zero()).unwrap_or(false)
    })
    .map_err(oracle_err)?;
    Ok((rb, cybe))
}

fn section_cybe_exhaustive(cat: &Catalog, p: u32) -> Vec<Item> {
    let id = "g1";
    let res = cat.lie(id).map_err(|e| e.to_string()).and_then(|l| rb_and_cybe_sets(&l, p));
    let total = (p as usize).pow(4);
    match res {
        Ok((rb, cybe)) if rb == cybe => vec![Item::pass(
            "rb-equals-cybe",
            id,
            format!("{} of {total} maps over F_{p} are Rota-Baxter, and exactly these give CYBE solutions", rb.len()),
        )],
        Ok((rb, cybe)) => {
            let a: BTreeSet<u64> = rb.iter().copied().collect();
            let b: BTreeSet<u64> = cybe.iter().copied().collect();
            let w = a.symmetric_difference(&b).next().copied().unwrap_or(0);
            vec![Item::fail(
                "rb-equals-cybe",
                id,
                format!("{} Rota-Baxter maps but {} CYBE maps over F_{p}", rb.len(), cybe.len()),
                FFMatrix::from_code(w, 2, p).to_string(),
            )]
        }
        Err(e) => vec![Item::fail("rb-equals-cybe", id, "could not enumerate", e)],
    }
}

fn section_catalog(cat: &Catalog) -> Vec<Item> {
    let mut out = Vec::new();
    for f in cat.files() {
        let res = parse_document(&f.text).map_err(|e| e.to_string()).and_then(|blocks| {
            let again = parse_document(&print_document(&blocks)).map_err(|e| format!("reparse: {e}"))?;
            match blocks.iter().zip(&again).find(|(a, b)| a != b) {
                _ if blocks.len() != again.len() => Err(format!("{} blocks became {}", blocks.len(), again.len())),
                Some((a, _)) => Err(format!("`{}` changed", a.id())),
                None => Ok(blocks.len()),
            }
        });
        out.push(match res {
            Ok(k) => Item::pass("round-trip", &f.path, format!("{k} blocks")),
            Err(e) => Item::fail("round-trip", &f.path, "print then parse is not the identity", e),
        });
    }
    let integ = cat.integrity();
    out.push(if integ.passed() {
        Item::pass("integrity", "catalog", format!("{} cross-reference checks", integ.checks))
    } else {
        Item::fail(
            "integrity",
            "catalog",
            format!("{} of {} checks fail", integ.issues.len(), integ.checks),
            integ.issues.iter().map(|i| format!("{}: {}", i.id, i.message)).collect::<Vec<_>>().join("\n"),
        )
    });
    let counts = cat.counts();
    for (kind, want) in EXPECTED_COUNTS {
        let got = counts.get(&kind).copied().unwrap_or(0);
        out.push(if got == want {
            Item::pass("count", kind.as_str(), format!("{got} entries"))
        } else {
            Item::fail("count", kind.as_str(), format!("{got} entries, expected {want}"), got.to_string())
        });
    }
    for r in cat.remarks() {
        for f in &r.findings {
            out.push(Item::finding("remark", &r.id, f.clone()));
        }
    }
    out
}
