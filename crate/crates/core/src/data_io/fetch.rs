//! Dataset registry and cached HTTP download.
//!
//! Files are cached at `<cache_dir>/<name>/<basename>`, where `basename` is
//! the last URL segment with any `.gz` / `.bz2` suffix removed. The stored
//! file is always the decompressed payload, and `sha256` refers to it.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{DenseVector, SparseColMatrix};

use super::libsvm::parse_libsvm;

const REGISTRY_JSON: &str = include_str!("../../data/datasets.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub density: f64,
    pub source_url: String,
    #[serde(default)]
    pub sha256: Option<String>,
    /// Feature count to use when parsing, if the file's largest index is
    /// not the intended one.
    #[serde(default)]
    pub n_features_override: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct Registry {
    version: u32,
    datasets: Vec<DatasetMeta>,
}

/// Version of the shipped registry file.
pub fn registry_version() -> u32 {
    parse_registry().version
}

fn parse_registry() -> Registry {
    serde_json::from_str(REGISTRY_JSON).expect("shipped dataset registry is valid JSON")
}

pub fn registry() -> Vec<DatasetMeta> {
    parse_registry().datasets
}

pub fn lookup(name: &str) -> Option<DatasetMeta> {
    registry().into_iter().find(|m| m.name == name)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Compression {
    None,
    Gzip,
    Bzip2,
}

fn sniff(head: &[u8]) -> Result<Compression> {
    const UNSUPPORTED: [(&[u8], &str); 4] = [
        (&[0xFD, b'7', b'z', b'X', b'Z', 0x00], "xz"),
        (&[0x28, 0xB5, 0x2F, 0xFD], "zstd"),
        (b"PK\x03\x04", "zip"),
        (b"7z\xBC\xAF\x27\x1C", "7z"),
    ];
    if head.starts_with(&[0x1F, 0x8B]) {
        return Ok(Compression::Gzip);
    }
    if head.starts_with(b"BZh") {
        return Ok(Compression::Bzip2);
    }
    for (magic, name) in UNSUPPORTED {
        if head.starts_with(magic) {
            return Err(Error::Fetch(format!("unsupported compression: {name}")));
        }
    }
    Ok(Compression::None)
}

/// Cache file name for a URL.
pub fn cache_basename(url: &str) -> Result<String> {
    let path = url.split(['?', '#']).next().unwrap_or(url);
    let last = path.rsplit('/').next().unwrap_or("");
    let base = last
        .strip_suffix(".gz")
        .or_else(|| last.strip_suffix(".bz2"))
        .unwrap_or(last);
    if base.is_empty() || base == "." || base == ".." {
        return Err(Error::Fetch(format!("cannot derive a file name from {url:?}")));
    }
    Ok(base.to_string())
}

pub fn cache_path(meta: &DatasetMeta, cache_dir: &Path) -> Result<PathBuf> {
    Ok(cache_dir.join(&meta.name).join(cache_basename(&meta.source_url)?))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    io::copy(&mut BufReader::new(File::open(path)?), &mut hasher)?;
    Ok(hex::encode(hasher.finalize()))
}

fn check_hash(path: &Path, expected: &str) -> Result<()> {
    let found = sha256_file(path)?;
    if found.eq_ignore_ascii_case(expected) {
        Ok(())
    } else {
        Err(Error::HashMismatch {
            path: path.to_path_buf(),
            expected: expected.to_string(),
            found,
        })
    }
}

/// Returns the cached file for `meta`, downloading it first if needed.
///
/// A cached file whose hash does not match is deleted and reported as
/// [`Error::HashMismatch`]; the next call downloads afresh. Downloads go to a
/// temporary file in the same directory and are renamed into place only
/// after decompression and hash verification succeed.
pub fn fetch_dataset(meta: &DatasetMeta, cache_dir: &Path) -> Result<PathBuf> {
    let target = cache_path(meta, cache_dir)?;
    if target.is_file() {
        if let Some(expected) = &meta.sha256 {
            if let Err(e) = check_hash(&target, expected) {
                fs::remove_file(&target)?;
                return Err(e);
            }
        }
        return Ok(target);
    }
    let dir = target.parent().expect("cache path has a parent");
    fs::create_dir_all(dir)?;

    let mut raw = tempfile::tempfile_in(dir)?;
    let response = ureq::get(&meta.source_url)
        .call()
        .map_err(|e| Error::Fetch(format!("{}: {e}", meta.source_url)))?;
    let mut body = response.into_body().into_reader();
    io::copy(&mut body, &mut raw).map_err(|e| Error::Fetch(format!("{}: {e}", meta.source_url)))?;
    raw.seek(SeekFrom::Start(0))?;

    let mut head = [0u8; 8];
    let n = read_up_to(&mut raw, &mut head)?;
    raw.seek(SeekFrom::Start(0))?;
    let raw = BufReader::new(raw);
    let mut decoded: Box<dyn Read> = match sniff(&head[..n])? {
        Compression::None => Box::new(raw),
        Compression::Gzip => Box::new(flate2::read::MultiGzDecoder::new(raw)),
        Compression::Bzip2 => Box::new(bzip2::read::MultiBzDecoder::new(raw)),
    };

    let mut out = tempfile::NamedTempFile::new_in(dir)?;
    let mut hasher = Sha256::new();
    {
        let mut writer = BufWriter::new(out.as_file_mut());
        let mut buf = vec![0u8; 1 << 16];
        loop {
            let k = decoded
                .read(&mut buf)
                .map_err(|e| Error::Fetch(format!("decompression failed: {e}")))?;
            if k == 0 {
                break;
            }
            hasher.update(&buf[..k]);
            writer.write_all(&buf[..k])?;
        }
        writer.flush()?;
    }
    let found = hex::encode(hasher.finalize());
    if let Some(expected) = &meta.sha256 {
        if !found.eq_ignore_ascii_case(expected) {
            return Err(Error::HashMismatch {
                path: target,
                expected: expected.clone(),
                found,
            });
        }
    }
    out.as_file().sync_all()?;
    out.persist(&target).map_err(|e| Error::Io(e.error))?;
    Ok(target)
}

fn read_up_to<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..])? {
            0 => break,
            k => filled += k,
        }
    }
    Ok(filled)
}

/// Parses a fetched file using the meta's feature-count override.
pub fn load_dataset(meta: &DatasetMeta, path: &Path) -> Result<(SparseColMatrix, DenseVector)> {
    parse_libsvm(BufReader::new(File::open(path)?), meta.n_features_override)
}
