//! Run manifests: the resolved settings in config-file form plus versions and
//! output digests. Passing a manifest back through `--config` repeats the run.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use toml::Table;

use crate::settings::ConfigFile;
use crate::{CliError, Context};

pub const MANIFEST_FILE: &str = "manifest.toml";

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Writes the manifest of a finished command; `outputs` are file names in
/// the output directory.
pub fn write<S: Serialize>(ctx: &Context, settings: &S, outputs: &[PathBuf], passed: bool) -> Result<PathBuf, CliError> {
    let section = Table::try_from(settings).map_err(anyhow::Error::from)?;
    let mut meta = Table::new();
    meta.insert("command".into(), ctx.command.into());
    meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    meta.insert("status".into(), if passed { "pass" } else { "fail" }.into());
    let mut files = Vec::new();
    for p in outputs {
        let mut t = Table::new();
        let name = p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        t.insert("file".into(), name.into());
        t.insert("sha256".into(), sha256_file(p)?.into());
        files.push(toml::Value::Table(t));
    }
    meta.insert("outputs".into(), toml::Value::Array(files));
    let mut file = ConfigFile {
        seed: Some(ctx.seed),
        threads: ctx.threads,
        out: Some(ctx.out.clone()),
        manifest: Some(meta),
        ..ConfigFile::default()
    };
    match ctx.command {
        "validate" => file.validate = Some(section),
        "fluxes" => file.fluxes = Some(section),
        "simulate" => file.simulate = Some(section),
        "solve-pde" => file.solve_pde = Some(section),
        "build-entropy" => file.build_entropy = Some(section),
        "verify-bounds" => file.verify_bounds = Some(section),
        "converge" => file.converge = Some(section),
        "tails" => file.tails = Some(section),
        "enumerate" => file.enumerate = Some(section),
        c => unreachable!("unknown command {c}"),
    }
    let text = toml::to_string(&file).map_err(anyhow::Error::from)?;
    let path = ctx.path(MANIFEST_FILE);
    std::fs::write(&path, text)?;
    Ok(path)
}
