//! On-disk cache of integer power series, one file per kind.
//!
//! A file holds the longest series computed so far. Reads are verified by a
//! SHA-256 checksum over the coefficients; anything that fails to parse or
//! verify is recomputed and overwritten.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thetalab::padic::IntSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    /// A shorter series was on disk and has been replaced.
    Superseded,
    /// The stored entry failed verification and has been replaced.
    Corrupt,
    Disabled,
}

impl fmt::Display for CacheStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CacheStatus::Hit => "hit",
            CacheStatus::Miss => "miss",
            CacheStatus::Superseded => "miss (superseded shorter entry)",
            CacheStatus::Corrupt => "miss (checksum failure, recomputed)",
            CacheStatus::Disabled => "disabled",
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    schema: u32,
    kind: String,
    order: i64,
    lead: i64,
    coeffs: Vec<String>,
    sha256: String,
}

fn checksum(kind: &str, order: i64, lead: i64, coeffs: &[String]) -> String {
    let mut h = Sha256::new();
    h.update(format!("{kind}\n{order}\n{lead}\n").as_bytes());
    for c in coeffs {
        h.update(c.as_bytes());
        h.update(b",");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub struct SeriesCache {
    dir: Option<PathBuf>,
}

impl SeriesCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        SeriesCache { dir }
    }

    fn path(dir: &Path, kind: &str) -> PathBuf {
        dir.join(format!("{kind}.json"))
    }

    /// Returns `None` for a missing entry and `Some(Err(()))` for one that
    /// fails verification.
    fn read(dir: &Path, kind: &str) -> Option<Result<(i64, IntSeries), ()>> {
        let text = fs::read_to_string(Self::path(dir, kind)).ok()?;
        let parsed = (|| {
            let e: Entry = serde_json::from_str(&text).map_err(|_| ())?;
            if e.schema != 1 || e.kind != kind || checksum(kind, e.order, e.lead, &e.coeffs) != e.sha256 {
                return Err(());
            }
            let coeffs = e
                .coeffs
                .iter()
                .map(|c| c.parse::<BigInt>().map_err(|_| ()))
                .collect::<Result<Vec<_>, _>>()?;
            let s = IntSeries::new(e.lead, coeffs);
            if s.order() != e.order {
                return Err(());
            }
            Ok((e.order, s))
        })();
        Some(parsed)
    }

    fn write(dir: &Path, kind: &str, s: &IntSeries) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let coeffs: Vec<String> = s.coeffs().iter().map(BigInt::to_string).collect();
        let e = Entry {
            schema: 1,
            kind: kind.to_string(),
            order: s.order(),
            lead: s.lead_exponent(),
            sha256: checksum(kind, s.order(), s.lead_exponent(), &coeffs),
            coeffs,
        };
        let tmp = dir.join(format!(".{kind}.{}.tmp", std::process::id()));
        fs::write(&tmp, serde_json::to_string(&e)?)?;
        fs::rename(tmp, Self::path(dir, kind))
    }

    /// The series of `kind` truncated at `order`, computing and storing it
    /// unless a verified entry of at least that order exists.
    pub fn series(&self, kind: &str, order: i64, compute: impl FnOnce(i64) -> IntSeries) -> (IntSeries, CacheStatus) {
        let Some(dir) = &self.dir else {
            return (compute(order), CacheStatus::Disabled);
        };
        let status = match Self::read(dir, kind) {
            Some(Ok((stored, s))) if stored >= order => return (s.truncate(order), CacheStatus::Hit),
            Some(Ok(_)) => CacheStatus::Superseded,
            Some(Err(())) => CacheStatus::Corrupt,
            None => CacheStatus::Miss,
        };
        let s = compute(order);
        if let Err(e) = Self::write(dir, kind, &s) {
            eprintln!("warning: cannot write cache entry {kind} in {}: {e}", dir.display());
        }
        (s, status)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use thetalab::tate::q_of_t_series;

    #[test]
    fn hit_miss_supersede_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SeriesCache::new(Some(dir.path().to_path_buf()));
        let (a, st) = cache.series("q_of_t", 6, q_of_t_series);
        assert_eq!(st, CacheStatus::Miss);
        let (b, st) = cache.series("q_of_t", 6, |_| panic!("should hit"));
        assert_eq!((st, &b), (CacheStatus::Hit, &a));
        let (c, st) = cache.series("q_of_t", 4, |_| panic!("should hit"));
        assert_eq!((st, c), (CacheStatus::Hit, q_of_t_series(4)));
        let (_, st) = cache.series("q_of_t", 9, q_of_t_series);
        assert_eq!(st, CacheStatus::Superseded);

        let path = dir.path().join("q_of_t.json");
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replacen("744", "745", 1)).unwrap();
        let (d, st) = cache.series("q_of_t", 9, q_of_t_series);
        assert_eq!((st, d), (CacheStatus::Corrupt, q_of_t_series(9)));
        let (_, st) = cache.series("q_of_t", 9, |_| panic!("should hit"));
        assert_eq!(st, CacheStatus::Hit);

        fs::write(&path, "not json").unwrap();
        let (_, st) = cache.series("q_of_t", 9, q_of_t_series);
        assert_eq!(st, CacheStatus::Corrupt);
    }
}
