use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use courtvec_core::checkpoint::load_checkpoint;
use courtvec_core::ingest::{
    build_registry, detect_play_file, ingest_raw, parse_plays, OutcomeMapping, PlayFileKind,
};
use courtvec_core::{EmbeddingModel, Play, PlayerRegistry};
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

/// Expands `@path` arguments into the lines of that file. Blank lines and
/// lines starting with `#` are skipped; no nesting.
pub fn expand_argfiles(args: impl IntoIterator<Item = OsString>) -> CliResult<Vec<OsString>> {
    let mut out = Vec::new();
    for (i, arg) in args.into_iter().enumerate() {
        match arg.to_str().and_then(|s| s.strip_prefix('@')) {
            Some(path) if i > 0 => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read argument file {path}: {e}")))?;
                out.extend(
                    text.lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty() && !l.starts_with('#'))
                        .map(OsString::from),
                );
            }
            _ => out.push(arg),
        }
    }
    Ok(out)
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn context(path: &Path) -> impl Fn(courtvec_core::Error) -> CliError + '_ {
    move |e| CliError::from(e).within(path)
}

/// Writes through a temporary file in the target directory, then renames it
/// over `path`, so readers never see a partial file.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io_err = |e: std::io::Error| CliError::Runtime(format!("{}: {e}", path.display()));
    let tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush().map_err(io_err)?;
    }
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    write_atomic(path, |w| {
        w.write_all(text.as_bytes())
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
    })
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    write_text(path, &to_json(value))
}

pub fn to_json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn load_model(path: &Path) -> CliResult<EmbeddingModel> {
    load_checkpoint(open(path)?).map_err(context(path))
}

pub fn load_registry(path: &Path) -> CliResult<PlayerRegistry> {
    build_registry(open(path)?).map_err(context(path))
}

/// The registry at `path`, or a synthetic one covering ids `0..vocab`.
pub fn registry_or_synthetic(path: Option<&Path>, vocab: usize) -> CliResult<PlayerRegistry> {
    match path {
        Some(p) => load_registry(p),
        None => Ok(PlayerRegistry::synthetic(vocab)),
    }
}

pub struct LoadedPlays {
    pub plays: Vec<Play>,
    pub dropped: usize,
    pub kind: PlayFileKind,
}

/// Reads either a normalized play file or a raw feed, chosen by its header.
pub fn load_plays(path: &Path, registry: &PlayerRegistry, rules: Option<&Path>) -> CliResult<LoadedPlays> {
    let mut reader = open(path)?;
    let header = {
        let buf = reader.fill_buf().map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let text = String::from_utf8_lossy(buf);
        text.lines().next().unwrap_or("").to_string()
    };
    let kind = detect_play_file(&header)
        .ok_or_else(|| CliError::Data(format!("{}: unrecognised header {header:?}", path.display())))?;
    match kind {
        PlayFileKind::Normalized => {
            let plays = parse_plays(reader, registry).map_err(context(path))?;
            Ok(LoadedPlays { plays, dropped: 0, kind })
        }
        PlayFileKind::Raw => {
            let mapping = match rules {
                Some(r) => {
                    let text = fs::read_to_string(r).map_err(|e| CliError::Data(format!("{}: {e}", r.display())))?;
                    OutcomeMapping::parse(&text).map_err(context(r))?
                }
                None => OutcomeMapping::default_rules(),
            };
            let summary = ingest_raw(reader, registry, &mapping).map_err(context(path))?;
            Ok(LoadedPlays { plays: summary.plays, dropped: summary.dropped, kind })
        }
    }
}

/// Comma- or whitespace-separated ids.
pub fn parse_ids(text: &str) -> CliResult<Vec<u32>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Usage(format!("{s:?} is not a player id")))
        })
        .collect()
}

pub fn split_names(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}
