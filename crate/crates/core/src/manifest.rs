//! Dataset manifests and content-disjoint train/validation/test splits.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    /// Distortions applied to known reference images.
    Synthetic,
    /// Distortions introduced at capture time; no references.
    Authentic,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Synthetic => "synthetic",
            Scenario::Authentic => "authentic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "synthetic" => Some(Scenario::Synthetic),
            "authentic" => Some(Scenario::Authentic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Val,
    Test,
    Unassigned,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
            Split::Unassigned => "",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "train" => Some(Split::Train),
            "val" => Some(Split::Val),
            "test" => Some(Split::Test),
            "" => Some(Split::Unassigned),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    /// Path as written in the manifest (relative paths resolve against the
    /// manifest's directory).
    pub image_path: String,
    pub mos: f64,
    pub reference_id: Option<String>,
    /// Optional distortion family, used for per-family breakdowns.
    pub distortion: Option<String>,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub scenario: Scenario,
    pub mos_range: (f64, f64),
}

impl DatasetManifest {
    /// Checks the manifest invariants. Row numbers in errors are 1-based
    /// entry indices.
    pub fn validate(&self) -> Result<()> {
        let (min, max) = self.mos_range;
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(Error::InvalidConfig(alloc::format!(
                "bad MOS range [{min}, {max}]"
            )));
        }
        let mut seen = BTreeSet::new();
        for (i, e) in self.entries.iter().enumerate() {
            if !seen.insert(e.image_path.as_str()) {
                return Err(Error::DuplicatePath(e.image_path.clone()));
            }
            if !e.mos.is_finite() {
                return Err(Error::MalformedRow {
                    line: i + 1,
                    reason: "MOS is not finite".into(),
                });
            }
            if e.mos < min || e.mos > max {
                return Err(Error::MosOutOfDeclaredRange {
                    path: e.image_path.clone(),
                    mos: e.mos,
                    min,
                    max,
                });
            }
            if self.scenario == Scenario::Synthetic
                && e.reference_id.as_deref().is_none_or(str::is_empty)
            {
                return Err(Error::MalformedRow {
                    line: i + 1,
                    reason: "synthetic entries need a reference_id".into(),
                });
            }
        }
        Ok(())
    }

    pub fn indices_in(&self, split: Split) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.split == split)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn count(&self, split: Split) -> usize {
        self.entries.iter().filter(|e| e.split == split).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitFractions {
    /// 80/20 train/test with 10 % of training held out for validation.
    pub const DEFAULT: Self = Self {
        train: 0.72,
        val: 0.08,
        test: 0.20,
    };

    fn as_array(self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Largest-remainder apportionment of `units` over the fractions.
pub fn apportion(units: usize, fractions: SplitFractions) -> [usize; 3] {
    let f = fractions.as_array();
    let exact: Vec<f64> = f.iter().map(|x| x * units as f64).collect();
    let mut counts = [0usize; 3];
    for k in 0..3 {
        counts[k] = libm::floor(exact[k] + 1e-9) as usize;
    }
    let mut left = units.saturating_sub(counts.iter().sum());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let ra = exact[a] - counts[a] as f64;
        let rb = exact[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if f[k] > 0.0 {
            counts[k] += 1;
            left -= 1;
        }
    }
    counts
}

/// Assigns every entry to a split.
///
/// Units are whole reference groups for synthetic manifests and single
/// entries otherwise. Units are ordered by content (reference id or image
/// path), shuffled with a ChaCha8 stream seeded by `seed`, and cut into
/// test, validation and training runs, so the result depends only on the
/// seed and the manifest contents.
pub fn split_manifest(
    manifest: &DatasetManifest,
    seed: u64,
    fractions: SplitFractions,
) -> Result<DatasetManifest> {
    let f = fractions.as_array();
    if f.iter().any(|x| !x.is_finite() || *x < 0.0) || libm::fabs(f.iter().sum::<f64>() - 1.0) > 1e-9 {
        return Err(Error::BadFractions);
    }

    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, e) in manifest.entries.iter().enumerate() {
        let key = match manifest.scenario {
            Scenario::Synthetic => e.reference_id.as_deref().unwrap_or(""),
            Scenario::Authentic => e.image_path.as_str(),
        };
        groups.entry(key).or_default().push(i);
    }
    if groups.len() < 3 {
        return Err(Error::InsufficientData(alloc::format!(
            "need at least 3 split units, got {}",
            groups.len()
        )));
    }
    let mut units: Vec<Vec<usize>> = groups.into_values().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    units.shuffle(&mut rng);

    let [n_train, n_val, n_test] = apportion(units.len(), fractions);
    for (count, frac, name) in [
        (n_train, fractions.train, "train"),
        (n_val, fractions.val, "val"),
        (n_test, fractions.test, "test"),
    ] {
        if count == 0 && frac > 0.0 {
            return Err(Error::DegenerateSplit(name));
        }
    }
    if n_train == 0 {
        return Err(Error::DegenerateSplit("train"));
    }

    let mut out = manifest.clone();
    for (rank, unit) in units.iter().enumerate() {
        let split = if rank < n_test {
            Split::Test
        } else if rank < n_test + n_val {
            Split::Val
        } else {
            Split::Train
        };
        for &i in unit {
            out.entries[i].split = split;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn synthetic(n_refs: usize, per_ref: usize) -> DatasetManifest {
        let mut entries = Vec::new();
        for r in 0..n_refs {
            for k in 0..per_ref {
                entries.push(ManifestEntry {
                    image_path: format!("img_{r}_{k}.png"),
                    mos: 1.0 + (k % 5) as f64,
                    reference_id: Some(format!("ref{r}")),
                    distortion: None,
                    split: Split::Unassigned,
                });
            }
        }
        DatasetManifest {
            entries,
            scenario: Scenario::Synthetic,
            mos_range: (1.0, 5.0),
        }
    }

    fn authentic(n: usize) -> DatasetManifest {
        DatasetManifest {
            entries: (0..n)
                .map(|i| ManifestEntry {
                    image_path: format!("a{i:03}.jpg"),
                    mos: (i % 100) as f64,
                    reference_id: None,
                    distortion: None,
                    split: Split::Unassigned,
                })
                .collect(),
            scenario: Scenario::Authentic,
            mos_range: (0.0, 100.0),
        }
    }

    #[test]
    fn reference_groups_never_straddle_splits() {
        let m = synthetic(5, 2);
        let fr = SplitFractions {
            train: 0.8,
            val: 0.0,
            test: 0.2,
        };
        let s = split_manifest(&m, 3, fr).unwrap();
        let mut by_ref: BTreeMap<&str, Split> = BTreeMap::new();
        for e in &s.entries {
            let prev = by_ref.insert(e.reference_id.as_deref().unwrap(), e.split);
            assert!(prev.is_none() || prev == Some(e.split));
            assert_ne!(e.split, Split::Unassigned);
        }
        assert_eq!(s.count(Split::Val), 0);
        assert_eq!(s.count(Split::Test), 2);
    }

    #[test]
    fn deterministic() {
        let m = synthetic(5, 2);
        let a = split_manifest(&m, 11, SplitFractions::DEFAULT);
        let b = split_manifest(&m, 11, SplitFractions::DEFAULT);
        assert_eq!(a, b);
    }

    #[test]
    fn authentic_counts_over_seed_sweep() {
        let m = authentic(100);
        for seed in 0..10 {
            let s = split_manifest(&m, seed, SplitFractions::DEFAULT).unwrap();
            assert_eq!(
                (s.count(Split::Train), s.count(Split::Val), s.count(Split::Test)),
                (72, 8, 20)
            );
        }
    }

    #[test]
    fn bad_fractions() {
        let m = authentic(10);
        let fr = SplitFractions {
            train: 0.5,
            val: 0.1,
            test: 0.1,
        };
        assert_eq!(split_manifest(&m, 0, fr), Err(Error::BadFractions));
    }

    #[test]
    fn empty_positive_split_is_degenerate() {
        let m = authentic(3);
        let fr = SplitFractions {
            train: 0.9,
            val: 0.05,
            test: 0.05,
        };
        assert!(matches!(
            split_manifest(&m, 0, fr),
            Err(Error::DegenerateSplit(_))
        ));
    }

    #[test]
    fn validation_errors() {
        let mut m = synthetic(2, 2);
        m.entries[1].reference_id = Some(String::new());
        assert!(matches!(m.validate(), Err(Error::MalformedRow { line: 2, .. })));

        let mut m = authentic(3);
        m.entries[2].image_path = m.entries[0].image_path.clone();
        assert!(matches!(m.validate(), Err(Error::DuplicatePath(_))));

        let mut m = authentic(3);
        m.entries[1].mos = 101.0;
        assert!(matches!(m.validate(), Err(Error::MosOutOfDeclaredRange { .. })));
    }

    #[test]
    fn apportion_sums() {
        for n in 3..50 {
            let c = apportion(n, SplitFractions::DEFAULT);
            assert_eq!(c.iter().sum::<usize>(), n);
        }
        assert_eq!(apportion(10, SplitFractions::DEFAULT), [7, 1, 2]);
    }
}
