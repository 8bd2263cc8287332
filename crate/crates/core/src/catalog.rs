//! The built-in transcription of the classification tables.
//!
//! The data lives in text files under `catalog/` (embedded at build time) and
//! is parsed with [`crate::formats`]. Set `NIJ_CATALOG_DIR` to load a
//! different directory with the same layout.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraError, BilinearProduct, LieAlgebra, StructureConstants};
use crate::formats::{parse_document, AlgebraDef, Block, FamilyDef, FormatError, RemarkDef, TensorDef};
use crate::operators::OperatorKind;
use crate::scalars::Scalar;

mod embedded {
    include!(concat!(env!("OUT_DIR"), "/catalog_files.rs"));
}

/// Environment variable that points the catalog at another directory.
pub const CATALOG_DIR_VAR: &str = "NIJ_CATALOG_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryKind {
    /// Pre-Lie or associative algebra given by a product table.
    Algebra,
    LieAlgebra,
    NijenhuisFamily,
    RbOperator,
    CybeSolution,
    Remark,
}

impl EntryKind {
    pub const ALL: [EntryKind; 6] = [
        EntryKind::Algebra,
        EntryKind::LieAlgebra,
        EntryKind::NijenhuisFamily,
        EntryKind::RbOperator,
        EntryKind::CybeSolution,
        EntryKind::Remark,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EntryKind::Algebra => "algebra",
            EntryKind::LieAlgebra => "lie-algebra",
            EntryKind::NijenhuisFamily => "nijenhuis-family",
            EntryKind::RbOperator => "rb-operator",
            EntryKind::CybeSolution => "cybe-solution",
            EntryKind::Remark => "remark",
        }
    }

    fn of(block: &Block) -> Self {
        match block {
            Block::Algebra(a) if a.is_lie => EntryKind::LieAlgebra,
            Block::Algebra(_) => EntryKind::Algebra,
            Block::Family(f) => match f.kind {
                OperatorKind::Nijenhuis => EntryKind::NijenhuisFamily,
                OperatorKind::RotaBaxter(_) => EntryKind::RbOperator,
            },
            Block::Tensor(_) => EntryKind::CybeSolution,
            Block::Remark(_) => EntryKind::Remark,
        }
    }
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntryKind {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.replace('_', "-");
        EntryKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm || (norm == "lie" && *k == EntryKind::LieAlgebra))
            .ok_or_else(|| CatalogError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{file}: {source}")]
    Parse { file: String, source: FormatError },
    #[error("{kind} `{id}` defined twice ({first} and {second})")]
    DuplicateId {
        kind: EntryKind,
        id: String,
        first: String,
        second: String,
    },
    #[error("no {kind} with id `{id}` in the catalog")]
    UnknownId { kind: EntryKind, id: String },
    #[error("`{id}`: {source}")]
    Algebra { id: String, source: AlgebraError },
    #[error("unknown entry kind `{0}`")]
    UnknownKind(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub kind: EntryKind,
    pub id: String,
    pub payload: Block,
    /// Catalog file the entry was read from, relative to the catalog root.
    pub source: String,
}

/// A catalog file as loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogFile {
    pub path: String,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct Catalog {
    files: Vec<CatalogFile>,
    entries: Vec<CatalogEntry>,
    index: HashMap<(EntryKind, String), usize>,
}

impl Catalog {
    /// The catalog compiled into the library.
    pub fn embedded() -> Result<Self, CatalogError> {
        Self::from_sources(
            embedded::EMBEDDED
                .iter()
                .map(|(p, t)| CatalogFile {
                    path: p.to_string(),
                    text: t.to_string(),
                })
                .collect(),
        )
    }

    /// Every `.alg`, `.fam`, `.tns` and `.rmk` file below `root`.
    pub fn from_dir(root: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let root = root.as_ref();
        let mut paths = Vec::new();
        walk(root, &mut paths)?;
        let mut files = Vec::new();
        for p in paths {
            let text = std::fs::read_to_string(&p).map_err(|e| CatalogError::Io {
                path: p.display().to_string(),
                message: e.to_string(),
            })?;
            let rel = p.strip_prefix(root).unwrap_or(&p).to_string_lossy().replace('\\', "/");
            files.push(CatalogFile { path: rel, text });
        }
        Self::from_sources(files)
    }

    /// `NIJ_CATALOG_DIR` if set, else the embedded catalog.
    pub fn load() -> Result<Self, CatalogError> {
        match std::env::var_os(CATALOG_DIR_VAR) {
            Some(dir) if !dir.is_empty() => Self::from_dir(dir),
            _ => Self::embedded(),
        }
    }

    /// Parse files in the given order; ids must be unique per kind.
    pub fn from_sources(mut files: Vec<CatalogFile>) -> Result<Self, CatalogError> {
        files.sort_by(|a, b| a.path.cmp(&b.path));
        let mut entries = Vec::new();
        let mut index = HashMap::new();
        for f in &files {
            let blocks = parse_document(&f.text).map_err(|source| CatalogError::Parse {
                file: f.path.clone(),
                source,
            })?;
            for b in blocks {
                let kind = EntryKind::of(&b);
                let id = b.id().to_string();
                if let Some(&prev) = index.get(&(kind, id.clone())) {
                    let first: &CatalogEntry = &entries[prev];
                    return Err(CatalogError::DuplicateId {
                        kind,
                        id,
                        first: first.source.clone(),
                        second: f.path.clone(),
                    });
                }
                index.insert((kind, id.clone()), entries.len());
                entries.push(CatalogEntry {
                    kind,
                    id,
                    payload: b,
                    source: f.path.clone(),
                });
            }
        }
        Ok(Self { files, entries, index })
    }

    pub fn files(&self) -> &[CatalogFile] {
        &self.files
    }

    /// Entries in file order.
    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn of_kind(&self, kind: EntryKind) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter().filter(move |e| e.kind == kind)
    }

    pub fn counts(&self) -> BTreeMap<EntryKind, usize> {
        let mut out: BTreeMap<EntryKind, usize> = EntryKind::ALL.iter().map(|k| (*k, 0)).collect();
        for e in &self.entries {
            *out.entry(e.kind).or_default() += 1;
        }
        out
    }

    pub fn get(&self, kind: EntryKind, id: &str) -> Option<&CatalogEntry> {
        self.index.get(&(kind, id.to_string())).map(|&i| &self.entries[i])
    }

    pub fn lookup(&self, kind: EntryKind, id: &str) -> Result<&CatalogEntry, CatalogError> {
        self.get(kind, id).ok_or_else(|| CatalogError::UnknownId {
            kind,
            id: id.to_string(),
        })
    }

    /// A pre-Lie / associative algebra, or failing that a Lie algebra.
    pub fn any_algebra(&self, id: &str) -> Result<&AlgebraDef, CatalogError> {
        self.algebra(id).or_else(|_| self.lie_def(id))
    }

    pub fn algebra(&self, id: &str) -> Result<&AlgebraDef, CatalogError> {
        match &self.lookup(EntryKind::Algebra, id)?.payload {
            Block::Algebra(a) => Ok(a),
            _ => unreachable!("kind follows payload"),
        }
    }

    pub fn lie_def(&self, id: &str) -> Result<&AlgebraDef, CatalogError> {
        match &self.lookup(EntryKind::LieAlgebra, id)?.payload {
            Block::Algebra(a) => Ok(a),
            _ => unreachable!("kind follows payload"),
        }
    }

    /// A Lie algebra block, checked for antisymmetry and Jacobi.
    pub fn lie(&self, id: &str) -> Result<LieAlgebra<Scalar>, CatalogError> {
        self.lie_def(id)?.lie().map_err(|source| CatalogError::Algebra {
            id: id.to_string(),
            source,
        })
    }

    /// A Nijenhuis family or Rota-Baxter operator.
    pub fn family(&self, id: &str) -> Result<&FamilyDef, CatalogError> {
        let e = self
            .get(EntryKind::NijenhuisFamily, id)
            .or_else(|| self.get(EntryKind::RbOperator, id))
            .ok_or_else(|| CatalogError::UnknownId {
                kind: EntryKind::NijenhuisFamily,
                id: id.to_string(),
            })?;
        match &e.payload {
            Block::Family(f) => Ok(f),
            _ => unreachable!("kind follows payload"),
        }
    }

    pub fn tensor(&self, id: &str) -> Result<&TensorDef, CatalogError> {
        match &self.lookup(EntryKind::CybeSolution, id)?.payload {
            Block::Tensor(t) => Ok(t),
            _ => unreachable!("kind follows payload"),
        }
    }

    pub fn remark(&self, id: &str) -> Result<&RemarkDef, CatalogError> {
        match &self.lookup(EntryKind::Remark, id)?.payload {
            Block::Remark(r) => Ok(r),
            _ => unreachable!("kind follows payload"),
        }
    }

    pub fn families(&self, kind: EntryKind) -> impl Iterator<Item = &FamilyDef> {
        self.of_kind(kind).filter_map(|e| match &e.payload {
            Block::Family(f) => Some(f),
            _ => None,
        })
    }

    pub fn tensors(&self) -> impl Iterator<Item = &TensorDef> {
        self.of_kind(EntryKind::CybeSolution).filter_map(|e| match &e.payload {
            Block::Tensor(t) => Some(t),
            _ => None,
        })
    }

    pub fn remarks(&self) -> impl Iterator<Item = &RemarkDef> {
        self.of_kind(EntryKind::Remark).filter_map(|e| match &e.payload {
            Block::Remark(r) => Some(r),
            _ => None,
        })
    }

    /// Cross-references and commutator-algebra aliases.
    pub fn integrity(&self) -> IntegrityReport {
        let mut r = IntegrityReport::default();
        for e in &self.entries {
            match &e.payload {
                Block::Algebra(a) if a.is_lie => {
                    r.check(&e.id, a.lie().map(|_| ()).map_err(|err| err.to_string()));
                }
                Block::Algebra(_) => {}
                Block::Family(f) => self.check_family(&mut r, e.kind, f),
                Block::Tensor(t) => self.check_tensor(&mut r, t),
                Block::Remark(rm) => self.check_remark(&mut r, rm),
            }
        }
        for (group, members) in self.variant_groups() {
            r.check(
                &group,
                if members.len() < 2 {
                    Err(format!("variant group has {} member", members.len()))
                } else if !members.iter().any(|m| *m == group) {
                    Err("no member carries the group id".to_string())
                } else {
                    Ok(())
                },
            );
        }
        r
    }

    fn check_family(&self, r: &mut IntegrityReport, kind: EntryKind, f: &FamilyDef) {
        let fam = &f.family;
        let target = match kind {
            EntryKind::RbOperator => self.lie_def(&fam.algebra),
            _ => self.algebra(&fam.algebra),
        };
        r.check(
            &fam.id,
            target.map_err(|e| e.to_string()).and_then(|a| {
                if a.constants.dim() != fam.dim() {
                    return Err(format!("dimension {} but `{}` has dimension {}", fam.dim(), a.id(), a.constants.dim()));
                }
                fam.check_declared(&a.constants.params).map_err(|e| e.to_string())
            }),
        );
        for src in flag_values(&f.flags, "derived-from") {
            r.check(
                &fam.id,
                self.lookup(EntryKind::NijenhuisFamily, src).map(|_| ()).map_err(|e| e.to_string()),
            );
        }
    }

    fn check_tensor(&self, r: &mut IntegrityReport, t: &TensorDef) {
        r.check(
            &t.id,
            self.lie_def(&t.algebra).map_err(|e| e.to_string()).and_then(|l| {
                if l.constants.dim() != t.dim {
                    return Err(format!("dimension {} but `{}` has dimension {}", t.dim, t.algebra, l.constants.dim()));
                }
                Ok(())
            }),
        );
        match &t.from {
            Some(src) => r.check(
                &t.id,
                self.lookup(EntryKind::RbOperator, src)
                    .map_err(|e| e.to_string())
                    .and_then(|_| {
                        let f = self.family(src).map_err(|e| e.to_string())?;
                        if f.family.algebra == t.algebra {
                            Ok(())
                        } else {
                            Err(format!("`{src}` is on {}, not {}", f.family.algebra, t.algebra))
                        }
                    }),
            ),
            None => r.check(&t.id, Err("no `from` operator".to_string())),
        }
    }

    fn check_remark(&self, r: &mut IntegrityReport, rm: &RemarkDef) {
        for c in &rm.checks {
            let (kw, args) = match c.split_first() {
                Some(x) => x,
                None => continue,
            };
            let res: Result<(), String> = match kw.as_str() {
                "abelian" | "nilpotent-nijenhuis-zero" | "nilpotent-rb" => args
                    .iter()
                    .try_for_each(|a| self.algebra(a).map(|_| ()).map_err(|e| e.to_string())),
                "sub-adjacent" => match args.split_first() {
                    Some((lie, algs)) if !algs.is_empty() => algs
                        .iter()
                        .try_for_each(|a| sub_adjacent_matches(self, lie, a).map_err(|e| format!("{a}: {e}"))),
                    _ => Err("expected `sub-adjacent LIE ALG…`".to_string()),
                },
                "nilpotent-cone" => match args.split_first() {
                    Some((lie, fams)) if !fams.is_empty() => self.lie_def(lie).map_err(|e| e.to_string()).and_then(|_| {
                        fams.iter()
                            .try_for_each(|f| self.lookup(EntryKind::RbOperator, f).map(|_| ()).map_err(|e| e.to_string()))
                    }),
                    _ => Err("expected `nilpotent-cone LIE FAMILY…`".to_string()),
                },
                "double" => match args {
                    [base, printed] => self
                        .lie_def(base)
                        .and_then(|_| self.lie_def(printed))
                        .map(|_| ())
                        .map_err(|e| e.to_string()),
                    _ => Err("expected `double LIE PRINTED`".to_string()),
                },
                "same" => {
                    if args.len() < 2 {
                        Err("expected at least two ids".to_string())
                    } else {
                        args.iter().try_for_each(|a| self.family(a).map(|_| ()).map_err(|e| e.to_string()))
                    }
                }
                "specializes" => match args {
                    [general, special, values @ ..] => self
                        .family(general)
                        .and_then(|_| self.family(special))
                        .map_err(|e| e.to_string())
                        .and_then(|_| parse_bindings(values).map(|_| ())),
                    _ => Err("expected `specializes GENERAL SPECIAL name=value…`".to_string()),
                },
                other => Err(format!("unknown check `{other}`")),
            };
            r.check(&rm.id, res);
        }
    }

    /// Variant groups from `flag variant GROUP`, members in catalog order.
    pub fn variant_groups(&self) -> BTreeMap<String, Vec<String>> {
        let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for e in &self.entries {
            let flags = match &e.payload {
                Block::Family(f) => &f.flags,
                Block::Tensor(t) => &t.flags,
                _ => continue,
            };
            for g in flag_values(flags, "variant") {
                out.entry(g.to_string()).or_default().push(e.id.clone());
            }
        }
        out
    }
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CatalogError> {
    let io = |e: std::io::Error| CatalogError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    };
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            walk(&p, out)?;
        } else if matches!(p.extension().and_then(|e| e.to_str()), Some("alg" | "fam" | "tns" | "rmk")) {
            out.push(p);
        }
    }
    Ok(())
}

/// Values of flags of the form `NAME value`.
pub fn flag_values<'a>(flags: &'a [String], name: &'a str) -> impl Iterator<Item = &'a str> + 'a {
    flags.iter().filter_map(move |f| {
        let mut it = f.splitn(2, char::is_whitespace);
        (it.next() == Some(name)).then(|| it.next().unwrap_or("").trim())
    })
}

/// `name=value` pairs with scalar values.
pub fn parse_bindings(words: &[String]) -> Result<BTreeMap<String, Scalar>, String> {
    words
        .iter()
        .map(|w| {
            let (k, v) = w.split_once('=').ok_or_else(|| format!("expected name=value, found `{w}`"))?;
            let s = crate::formats::parse_scalar(v).map_err(|e| e.to_string())?;
            Ok((k.to_string(), s))
        })
        .collect()
}

/// Same dimension and the same nonzero products, ignoring names.
pub fn same_products<S: crate::scalars::Coefficient>(a: &StructureConstants<S>, b: &StructureConstants<S>) -> bool {
    a.dim() == b.dim() && a.products().eq(b.products())
}

/// The commutator algebra of `alg` equals the catalog Lie algebra `lie`.
pub fn sub_adjacent_matches(cat: &Catalog, lie: &str, alg: &str) -> Result<(), String> {
    let g = cat.lie_def(lie).map_err(|e| e.to_string())?;
    let a = cat.algebra(alg).map_err(|e| e.to_string())?;
    let s = a.constants.sub_adjacent().map_err(|e| e.to_string())?;
    if same_products(s.constants(), &g.constants) {
        Ok(())
    } else {
        Err(format!(
            "computed {} but {lie} is {}",
            s.constants().product_lines(crate::algebra::ProductNotation::Bracket).join(", "),
            g.constants.product_lines(crate::algebra::ProductNotation::Bracket).join(", ")
        ))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IntegrityIssue {
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IntegrityReport {
    pub checks: usize,
    pub issues: Vec<IntegrityIssue>,
}

impl IntegrityReport {
    fn check(&mut self, id: &str, res: Result<(), String>) {
        self.checks += 1;
        if let Err(message) = res {
            self.issues.push(IntegrityIssue {
                id: id.to_string(),
                message,
            });
        }
    }

    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Entry counts of the shipped catalog, per kind.
pub const EXPECTED_COUNTS: [(EntryKind, usize); 6] = [
    (EntryKind::Algebra, 35),
    (EntryKind::LieAlgebra, 13),
    (EntryKind::NijenhuisFamily, 132),
    (EntryKind::RbOperator, 31),
    (EntryKind::CybeSolution, 26),
    (EntryKind::Remark, 11),
];

/// The embedded catalog, parsed once.
///
/// Panics if the embedded files do not parse; the test suite guards this.
pub fn builtin() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| Catalog::embedded().expect("embedded catalog parses"))
}

pub fn catalog_lookup(kind: EntryKind, id: &str) -> Result<CatalogEntry, CatalogError> {
    builtin().lookup(kind, id).cloned()
}

/// Integrity of the embedded catalog, including the fixed entry counts.
pub fn catalog_integrity() -> IntegrityReport {
    let cat = builtin();
    let mut r = cat.integrity();
    let counts = cat.counts();
    for (kind, want) in EXPECTED_COUNTS {
        let got = counts.get(&kind).copied().unwrap_or(0);
        r.check(
            kind.as_str(),
            if got == want {
                Ok(())
            } else {
                Err(format!("{got} entries, expected {want}"))
            },
        );
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_catalog_parses() {
        let cat = Catalog::embedded().unwrap();
        assert!(cat.files().len() >= 10);
    }

    #[test]
    fn kinds_round_trip_through_strings() {
        for k in EntryKind::ALL {
            assert_eq!(k.as_str().parse::<EntryKind>().unwrap(), k);
        }
        assert_eq!("lie".parse::<EntryKind>().unwrap(), EntryKind::LieAlgebra);
        assert!("tensor-ish".parse::<EntryKind>().is_err());
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let f = |p: &str| CatalogFile {
            path: p.to_string(),
            text: "algebra X\ndim 1\nend\n".to_string(),
        };
        let err = Catalog::from_sources(vec![f("a.alg"), f("b.alg")]).unwrap_err();
        assert!(matches!(err, CatalogError::DuplicateId { .. }));
    }

    #[test]
    fn flags_split_on_first_space() {
        let flags = vec!["variant N_X^1".to_string(), "derived-from N_Y^2".to_string()];
        assert_eq!(flag_values(&flags, "variant").collect::<Vec<_>>(), vec!["N_X^1"]);
        assert_eq!(flag_values(&flags, "derived-from").collect::<Vec<_>>(), vec!["N_Y^2"]);
    }
}
