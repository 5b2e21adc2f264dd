//! TOML reduction recipes. Paths are relative to the recipe file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use qcsp_core::format::{parse_gadget, parse_structure};
use qcsp_core::gadgets::CommGadget;
use qcsp_core::qhom::Mode;
use qcsp_core::reduce::ReductionRecipe;
use qcsp_core::structures::{Signature, Structure};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipeFile {
    /// Gadget file for each symbol of the instance signature.
    pub gadgets: BTreeMap<String, PathBuf>,
    pub comm: Option<PathBuf>,
    pub mode: Option<String>,
    #[serde(default)]
    pub dedupe_pairs: bool,
    pub certify: Option<Certify>,
}

/// Structures `B` and `A` to certify the recipe against.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certify {
    pub source: PathBuf,
    pub target: PathBuf,
}

pub fn parse_mode(s: &str) -> Result<Mode> {
    match s {
        "oracular" => Ok(Mode::Oracular),
        "nonoracular" | "non-oracular" => Ok(Mode::NonOracular),
        _ => bail!("unknown mode `{s}` (expected oracular or nonoracular)"),
    }
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_structure(path: &Path) -> Result<Structure> {
    parse_structure(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

pub struct Loaded {
    pub recipe: ReductionRecipe,
    pub certify: Option<(Structure, Structure)>,
}

/// Builds the recipe for instances over `source`. `mode` and `dedupe` override the file.
pub fn load(path: &Path, source: &Signature, mode: Option<Mode>, dedupe: bool) -> Result<Loaded> {
    let file: RecipeFile = toml::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    for sym in file.gadgets.keys() {
        if source.index_of(sym).is_none() {
            bail!("recipe has a gadget for `{sym}`, which the instance signature lacks");
        }
    }
    let mut gadgets = Vec::new();
    let mut certificates = Vec::new();
    for (sym, _) in source.symbols() {
        let rel = file.gadgets.get(sym).ok_or_else(|| anyhow!("recipe has no gadget for `{sym}`"))?;
        let p = dir.join(rel);
        let (g, cert) = parse_gadget(&read(&p)?).with_context(|| format!("parsing {}", p.display()))?;
        gadgets.push(g);
        certificates.push(cert);
    }
    let target = gadgets
        .first()
        .map(|g| g.structure.signature().clone())
        .ok_or_else(|| anyhow!("the instance signature is empty"))?;
    let (comm, comm_certificate) = match &file.comm {
        Some(rel) => {
            let p = dir.join(rel);
            let (g, cert) = parse_gadget(&read(&p)?).with_context(|| format!("parsing {}", p.display()))?;
            (Some(CommGadget::new(g)?), cert)
        }
        None => (None, None),
    };
    let mode = match (mode, &file.mode) {
        (Some(m), _) => m,
        (None, Some(s)) => parse_mode(s)?,
        (None, None) => Mode::Oracular,
    };
    let mut recipe = ReductionRecipe::new(source.clone(), target, gadgets, comm, mode)?
        .with_dedupe_pairs(dedupe || file.dedupe_pairs);
    recipe.certificates = certificates;
    recipe.comm_certificate = comm_certificate;
    let certify = match &file.certify {
        Some(c) => Some((load_structure(&dir.join(&c.source))?, load_structure(&dir.join(&c.target))?)),
        None => None,
    };
    Ok(Loaded { recipe, certify })
}
