use rand::Rng;
use rayon::prelude::*;

use crate::channels::isotropic_p_range;
use crate::channels::{make_isotropic, GammaKind, KrausChannel};
use crate::error::{Error, Result};
use crate::sampling::{
    child_seed, haar_unitary, random_completely_decohering, random_cptp, random_example_channel, random_unital_mixture,
    substream, SampleRng,
};

use super::commutativity::is_commutativity_preserving;
use super::detect::{is_completely_decohering, is_isotropic, is_unital};

/// Unitality threshold used when `d = 2` channels are sorted into the known classes.
const UNITAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelFamily {
    CompletelyDecohering,
    IsotropicUnitary,
    IsotropicTranspose,
    UnitalMixture,
    ExampleQutrit,
    RandomCptp,
}

impl ChannelFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelFamily::CompletelyDecohering => "completely_decohering",
            ChannelFamily::IsotropicUnitary => "isotropic_unitary",
            ChannelFamily::IsotropicTranspose => "isotropic_transpose",
            ChannelFamily::UnitalMixture => "unital_mixture",
            ChannelFamily::ExampleQutrit => "example_qutrit",
            ChannelFamily::RandomCptp => "random_cptp",
        }
    }

    /// Families sampled in dimension `d`, in round-robin order.
    pub fn for_dim(d: usize) -> Vec<ChannelFamily> {
        let mut v = vec![
            ChannelFamily::CompletelyDecohering,
            ChannelFamily::IsotropicUnitary,
            ChannelFamily::IsotropicTranspose,
            ChannelFamily::UnitalMixture,
            ChannelFamily::RandomCptp,
        ];
        if d == 3 {
            v.push(ChannelFamily::ExampleQutrit);
        }
        v
    }

    pub fn sample(&self, d: usize, rng: &mut SampleRng) -> KrausChannel {
        match self {
            ChannelFamily::CompletelyDecohering => random_completely_decohering(d, rng),
            ChannelFamily::IsotropicUnitary | ChannelFamily::IsotropicTranspose => {
                let kind = if *self == ChannelFamily::IsotropicUnitary {
                    GammaKind::Unitary
                } else {
                    GammaKind::TransposeUnitary
                };
                let (lo, hi) = isotropic_p_range(d, kind);
                let p = lo + (hi - lo) * rng.random::<f64>();
                let u = haar_unitary(d, rng);
                make_isotropic(d, kind, &u, p).expect("p inside range")
            }
            ChannelFamily::UnitalMixture => {
                let n = rng.random_range(2..=4);
                random_unital_mixture(d, n, rng)
            }
            ChannelFamily::ExampleQutrit => random_example_channel(2, rng),
            ChannelFamily::RandomCptp => {
                let env = rng.random_range(1..=d);
                random_cptp(d, env, rng).expect("valid dimensions")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Anomaly {
    /// No violation found, yet outside the known preserving classes.
    CounterexampleCandidate,
    /// In a known preserving class, yet a violation was found.
    SoundnessBug,
}

impl Anomaly {
    pub fn as_str(&self) -> &'static str {
        match self {
            Anomaly::CounterexampleCandidate => "counterexample_candidate",
            Anomaly::SoundnessBug => "soundness_bug",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanRecord {
    pub index: usize,
    pub family: ChannelFamily,
    pub is_cd: bool,
    pub is_isotropic: bool,
    pub is_unital: bool,
    pub cp_preserving: bool,
    pub max_violation: f64,
    pub anomaly: Option<Anomaly>,
    pub channel: KrausChannel,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FamilyCounts {
    pub total: usize,
    pub cd: usize,
    pub isotropic: usize,
    pub unital: usize,
    pub creator: usize,
    pub cp_pass: usize,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub dim: usize,
    pub records: Vec<ScanRecord>,
}

impl ScanReport {
    pub fn counts(&self) -> Vec<(ChannelFamily, FamilyCounts)> {
        let mut out: Vec<(ChannelFamily, FamilyCounts)> = ChannelFamily::for_dim(self.dim)
            .into_iter()
            .map(|f| (f, FamilyCounts::default()))
            .collect();
        for r in &self.records {
            let Some((_, c)) = out.iter_mut().find(|(f, _)| *f == r.family) else {
                continue;
            };
            c.total += 1;
            c.cd += r.is_cd as usize;
            c.isotropic += r.is_isotropic as usize;
            c.unital += r.is_unital as usize;
            c.creator += !r.cp_preserving as usize;
            c.cp_pass += r.cp_preserving as usize;
        }
        out
    }

    pub fn anomalies(&self) -> Vec<&ScanRecord> {
        self.records.iter().filter(|r| r.anomaly.is_some()).collect()
    }
}

/// Samples `n_channels` channels round-robin over [`ChannelFamily::for_dim`]
/// and compares the detectors with the commutativity search.
///
/// The known preserving classes are CD ∪ unital for `d = 2` and
/// CD ∪ isotropic otherwise. Channel `i` is drawn from substream `i` of a
/// seed taken from `rng`, so records do not depend on the worker count.
pub fn census(d: usize, n_channels: usize, budget: usize, tol: f64, rng: &mut SampleRng) -> Result<ScanReport> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("census needs d ≥ 2, got {d}")));
    }
    let master = child_seed(rng);
    let families = ChannelFamily::for_dim(d);
    let records = (0..n_channels)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(master, i as u64);
            let family = families[i % families.len()];
            let channel = family.sample(d, &mut rng);
            let is_cd = is_completely_decohering(&channel, tol).is_some();
            let is_iso = is_isotropic(&channel, tol).is_some();
            let unital = is_unital(&channel, UNITAL_TOL);
            let cp = is_commutativity_preserving(&channel, budget, tol, &mut rng);
            let known = is_cd || if d == 2 { unital } else { is_iso };
            let anomaly = match (known, cp.preserving) {
                (false, true) => Some(Anomaly::CounterexampleCandidate),
                (true, false) => Some(Anomaly::SoundnessBug),
                _ => None,
            };
            ScanRecord {
                index: i,
                family,
                is_cd,
                is_isotropic: is_iso,
                is_unital: unital,
                cp_preserving: cp.preserving,
                max_violation: cp.max_violation,
                anomaly,
                channel,
            }
        })
        .collect();
    Ok(ScanReport { dim: d, records })
}

/// [`census`] restricted to `d ≥ 4`, where no classification theorem is available.
pub fn conjecture_scan(
    d: usize,
    n_channels: usize,
    budget: usize,
    tol: f64,
    rng: &mut SampleRng,
) -> Result<ScanReport> {
    if d < 4 {
        return Err(Error::InvalidArgument(format!("conjecture scan needs d ≥ 4, got {d}")));
    }
    census(d, n_channels, budget, tol, rng)
}
