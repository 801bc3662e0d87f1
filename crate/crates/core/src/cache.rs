//! On-disk cache of integral decompositions, addressed by a hash of the
//! canonical `(params, d)` JSON. Writes go to a temp file and are renamed.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::elementary::Decomposer;
use crate::form::LinearForm;
use crate::linear_form::{decompose_integral_with, IntegralParams, ShiftVector};
use crate::Error;

pub const CACHE_ENV: &str = "LINFORMS_CACHE_DIR";

#[derive(Serialize)]
struct Key<'a> {
    m: usize,
    group_ends: &'a [usize],
    a: &'a [u32],
    b: &'a [u32],
    c: &'a [u32],
    d: &'a [u32],
}

#[derive(Clone, Debug)]
pub struct FormCache {
    dir: PathBuf,
}

impl FormCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// The cache named by `LINFORMS_CACHE_DIR`, if set and non-empty.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV)
            .filter(|v| !v.is_empty())
            .map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(params: &IntegralParams, d: &ShiftVector) -> String {
        let key = Key {
            m: params.m,
            group_ends: &params.group_ends,
            a: &params.a,
            b: &params.b,
            c: &params.c,
            d: &d.d,
        };
        let canonical = serde_json::to_string(&key).expect("plain integer struct serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    fn path(&self, params: &IntegralParams, d: &ShiftVector) -> PathBuf {
        self.dir.join(format!("{}.json", Self::key(params, d)))
    }

    pub fn load(
        &self,
        params: &IntegralParams,
        d: &ShiftVector,
    ) -> Result<Option<LinearForm>, Error> {
        match std::fs::read_to_string(self.path(params, d)) {
            Ok(text) => Ok(Some(LinearForm::from_json(&text)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn store(
        &self,
        params: &IntegralParams,
        d: &ShiftVector,
        form: &LinearForm,
    ) -> Result<(), Error> {
        std::fs::create_dir_all(&self.dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(form.to_json()?.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.path(params, d)).map_err(|e| e.error)?;
        Ok(())
    }
}

/// Decomposes through the cache when one is given; the flag reports a hit.
pub fn decompose_integral_cached(
    cache: Option<&FormCache>,
    params: &IntegralParams,
    d: &ShiftVector,
    engine: &mut Decomposer,
) -> Result<(LinearForm, bool), Error> {
    if let Some(cache) = cache {
        if let Some(form) = cache.load(params, d)? {
            return Ok((form, true));
        }
    }
    let form = decompose_integral_with(params, d, engine)?;
    if let Some(cache) = cache {
        cache.store(params, d, &form)?;
    }
    Ok((form, false))
}
