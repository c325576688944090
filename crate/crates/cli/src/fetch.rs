//! Downloads benchmark archives with SHA-256 pinning.
//!
//! A digest given on the command line must match. Otherwise the digest is
//! compared with `checksums.lock` in the destination directory, and
//! recorded there on first download.

use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;

use log::{info, warn};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const BENCHMARK_BASE_URL: &str = "https://www.chrsmrrs.com/graphkerneldatasets";
pub const LOCK_FILE: &str = "checksums.lock";
const MAX_BYTES: u64 = 2 << 30;

pub fn default_url(name: &str) -> String {
    format!("{BENCHMARK_BASE_URL}/{name}.zip")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn read_lock(dest: &Path) -> Result<Vec<(String, String)>, CliError> {
    let path = dest.join(LOCK_FILE);
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(&path).map_err(|e| netclass::Error::io(&path, e))?;
    Ok(text
        .lines()
        .filter_map(|l| {
            let mut parts = l.split_whitespace();
            Some((parts.next()?.to_owned(), parts.next()?.to_owned()))
        })
        .collect())
}

/// Checks `digest` against the pin for `name`, recording it if unpinned.
pub fn verify_pin(dest: &Path, name: &str, digest: &str, expected: Option<&str>) -> Result<(), CliError> {
    if let Some(expected) = expected {
        if !expected.eq_ignore_ascii_case(digest) {
            return Err(CliError::Data(format!("{name}: SHA-256 {digest} does not match the pinned {expected}")));
        }
    }
    let mut lock = read_lock(dest)?;
    match lock.iter().find(|(n, _)| n == name) {
        Some((_, pinned)) if pinned != digest => {
            return Err(CliError::Data(format!(
                "{name}: SHA-256 {digest} differs from {pinned} recorded in {LOCK_FILE}"
            )))
        }
        Some(_) => {}
        None => {
            if expected.is_none() {
                warn!("{name}: no pinned checksum; recording {digest} in {LOCK_FILE}");
            }
            lock.push((name.to_owned(), digest.to_owned()));
            lock.sort();
            let text: String = lock.iter().map(|(n, d)| format!("{n} {d}\n")).collect();
            let path = dest.join(LOCK_FILE);
            fs::write(&path, text).map_err(|e| netclass::Error::io(&path, e))?;
        }
    }
    Ok(())
}

pub fn fetch(name: &str, url: &str, dest: &Path, expected: Option<&str>) -> Result<(), CliError> {
    fs::create_dir_all(dest).map_err(|e| netclass::Error::io(dest, e))?;
    info!("downloading {url}");
    let mut response = ureq::get(url)
        .call()
        .map_err(|e| CliError::Data(format!("download of {url} failed: {e}")))?;
    let mut bytes = Vec::new();
    response
        .body_mut()
        .as_reader()
        .take(MAX_BYTES)
        .read_to_end(&mut bytes)
        .map_err(|e| CliError::Data(format!("download of {url} failed: {e}")))?;
    let digest = sha256_hex(&bytes);
    verify_pin(dest, name, &digest, expected)?;
    let mut archive =
        zip::ZipArchive::new(Cursor::new(bytes)).map_err(|e| CliError::Data(format!("{url}: bad archive: {e}")))?;
    archive
        .extract(dest)
        .map_err(|e| CliError::Data(format!("{url}: extraction failed: {e}")))?;
    println!("{name} -> {} (sha256 {digest})", dest.join(name).display());
    Ok(())
}
