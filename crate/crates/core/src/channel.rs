//! Pauli noise channels as probability distributions over phase-free Paulis.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::pauli::{Pauli1, PauliOperator};

/// Probabilities below this are dropped after composition.
pub const PRUNE_THRESHOLD: f64 = 1e-15;
/// Allowed deviation of the total probability from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct PauliChannel {
    n: usize,
    support: BTreeMap<PauliOperator, f64>,
    sampler: OnceLock<(Vec<PauliOperator>, Vec<f64>)>,
}

impl PartialEq for PauliChannel {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.support == other.support
    }
}

impl PauliChannel {
    /// Validates and builds a channel. Keys are phase-normalized; repeated
    /// keys after normalization are rejected.
    pub fn new(n: usize, weights: impl IntoIterator<Item = (PauliOperator, f64)>) -> Result<Self> {
        let mut support = BTreeMap::new();
        let mut total = 0.0;
        for (p, w) in weights {
            check_dim(n, p.n_qubits())?;
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidChannel(format!("probability {w} for {p}")));
            }
            total += w;
            if support.insert(p.without_phase(), w).is_some() {
                return Err(Error::InvalidChannel(format!("duplicate Pauli {}", p.letters())));
            }
        }
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidChannel(format!("probabilities sum to {total}")));
        }
        support.retain(|_, w| *w > 0.0);
        Ok(PauliChannel { n, support, sampler: OnceLock::new() })
    }

    pub fn identity(n: usize) -> PauliChannel {
        PauliChannel::new(n, [(PauliOperator::identity(n), 1.0)]).unwrap()
    }

    pub fn point(p: &PauliOperator) -> PauliChannel {
        PauliChannel::new(p.n_qubits(), [(p.without_phase(), 1.0)]).unwrap()
    }

    /// Builds from a Pauli-string → probability map (e.g. parsed JSON).
    pub fn from_strings<'a>(n: usize, map: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let mut weights = Vec::new();
        for (s, w) in map {
            weights.push((s.parse::<PauliOperator>()?, w));
        }
        PauliChannel::new(n, weights)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &BTreeMap<PauliOperator, f64> {
        &self.support
    }

    pub fn probability(&self, p: &PauliOperator) -> f64 {
        self.support.get(&p.without_phase()).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Draws one Pauli with probability equal to its weight. Uses a single
    /// uniform variate per call.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &PauliOperator {
        let (ops, cdf) = self.sampler.get_or_init(|| {
            let mut acc = 0.0;
            let mut ops = Vec::with_capacity(self.support.len());
            let mut cdf = Vec::with_capacity(self.support.len());
            for (p, &w) in &self.support {
                acc += w;
                ops.push(p.clone());
                cdf.push(acc);
            }
            (ops, cdf)
        });
        if ops.len() == 1 {
            // Point masses consume a draw too so streams stay aligned.
            let _: f64 = rng.gen();
            return &ops[0];
        }
        let u: f64 = rng.gen::<f64>() * cdf[cdf.len() - 1];
        let i = cdf.partition_point(|&c| c <= u).min(ops.len() - 1);
        &ops[i]
    }

    fn from_accumulated(n: usize, acc: BTreeMap<PauliOperator, f64>) -> PauliChannel {
        let mut support: BTreeMap<_, _> = acc.into_iter().filter(|(_, w)| *w >= PRUNE_THRESHOLD).collect();
        let total: f64 = support.values().sum();
        support.values_mut().for_each(|w| *w /= total);
        PauliChannel { n, support, sampler: OnceLock::new() }
    }
}

/// Draws an error from `c` (see [`PauliChannel::sample`]).
pub fn sample_error<R: Rng + ?Sized>(c: &PauliChannel, rng: &mut R) -> PauliOperator {
    c.sample(rng).clone()
}

fn check_probability(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} is not a probability")))
    }
}

/// Independent bit flips: qubit `i` suffers `X_i` with probability `p`.
pub fn bitflip_independent(p: f64, n: usize) -> Result<PauliChannel> {
    check_probability("p", p)?;
    let factor = PauliChannel::new(
        1,
        [
            (PauliOperator::identity(1), 1.0 - p),
            ("X".parse().unwrap(), p),
        ],
    )?;
    let factors = vec![factor; n];
    Ok(tensor_product(&factors))
}

/// Composition of pairwise channels `ρ → (1-q)ρ + q X_i X_j ρ X_i X_j`, applied
/// in the order given. Qubit indices are 0-based.
pub fn bitflip_correlated(q: f64, pairs: &[(usize, usize)], n: usize) -> Result<PauliChannel> {
    check_probability("q", q)?;
    let mut channel = PauliChannel::identity(n);
    for &(i, j) in pairs {
        if i >= n || j >= n || i == j {
            return Err(Error::Domain(format!("bad qubit pair ({i}, {j}) for n={n}")));
        }
        let pair = PauliChannel::new(
            n,
            [
                (PauliOperator::identity(n), 1.0 - q),
                (PauliOperator::x_on(n, &[i, j])?, q),
            ],
        )?;
        channel = compose_channels(&pair, &channel)?;
    }
    Ok(channel)
}

/// Equal mixture `(1/n) Σ_i E_i` of single-qubit bit-flip channels.
pub fn bitflip_mixture(p: f64, n: usize) -> Result<PauliChannel> {
    check_probability("p", p)?;
    let mut acc = BTreeMap::new();
    *acc.entry(PauliOperator::identity(n)).or_insert(0.0) += 1.0 - p;
    for i in 0..n {
        *acc.entry(PauliOperator::x_on(n, &[i])?).or_insert(0.0) += p / n as f64;
    }
    Ok(PauliChannel::from_accumulated(n, acc))
}

/// Single-qubit depolarizing channel with PTM `diag(1, λ, λ, λ)`.
pub fn depolarizing(lambda: f64) -> Result<PauliChannel> {
    if !(-1.0 / 3.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("depolarizing λ = {lambda} outside [-1/3, 1]")));
    }
    let e = (1.0 - lambda) / 4.0;
    PauliChannel::from_strings(1, [("I", 1.0 - 3.0 * e), ("X", e), ("Y", e), ("Z", e)])
}

/// Tensor product of channels on disjoint qubit registers, in order.
pub fn tensor_product(factors: &[PauliChannel]) -> PauliChannel {
    let mut acc: BTreeMap<PauliOperator, f64> = BTreeMap::new();
    acc.insert(PauliOperator::identity(0), 1.0);
    let mut n = 0;
    for f in factors {
        let mut next = BTreeMap::new();
        for (a, wa) in &acc {
            for (b, wb) in &f.support {
                *next.entry(a.tensor(b)).or_insert(0.0) += wa * wb;
            }
        }
        acc = next;
        n += f.n;
    }
    PauliChannel::from_accumulated(n, acc)
}

/// Channel composition `a ∘ b` (apply `b`, then `a`). For Pauli channels this is
/// the convolution of the distributions under Pauli multiplication.
pub fn compose_channels(a: &PauliChannel, b: &PauliChannel) -> Result<PauliChannel> {
    check_dim(a.n, b.n)?;
    let mut acc: BTreeMap<PauliOperator, f64> = BTreeMap::new();
    for (pa, wa) in &a.support {
        for (pb, wb) in &b.support {
            let mut prod = pa.clone();
            prod.mul_assign_unchecked(pb);
            *acc.entry(prod.without_phase()).or_insert(0.0) += wa * wb;
        }
    }
    Ok(PauliChannel::from_accumulated(a.n, acc))
}

/// Reduced single-qubit channel on `qubit`.
pub fn marginal_channel(c: &PauliChannel, qubit: usize) -> Result<PauliChannel> {
    if qubit >= c.n {
        return Err(Error::Domain(format!("qubit {qubit} out of range for {} qubits", c.n)));
    }
    let mut acc: BTreeMap<PauliOperator, f64> = BTreeMap::new();
    for (p, w) in &c.support {
        *acc.entry(PauliOperator::from_paulis(&[p.get(qubit)])).or_insert(0.0) += w;
    }
    Ok(PauliChannel::from_accumulated(1, acc))
}

/// Flip probability `Pr[X or Y]` of a single-qubit channel.
pub fn flip_probability(c: &PauliChannel) -> f64 {
    c.support
        .iter()
        .filter(|(p, _)| matches!(p.get(0), Pauli1::X | Pauli1::Y))
        .map(|(_, w)| w)
        .sum()
}

/// Channel specification as it appears in experiment configs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Identity {
        n: usize,
    },
    BitflipIndependent {
        p: f64,
        n: usize,
    },
    BitflipCorrelated {
        q: f64,
        /// 0-based qubit pairs, applied in order.
        pairs: Vec<(usize, usize)>,
        n: usize,
    },
    BitflipMixture {
        p: f64,
        n: usize,
    },
    Depolarizing {
        lambda: f64,
    },
    /// Composition of the listed channels, first entry applied first.
    Composite {
        channels: Vec<ChannelSpec>,
    },
    /// Reduced channel on one qubit of another channel.
    Marginal {
        channel: Box<ChannelSpec>,
        qubit: usize,
    },
    Custom {
        n: usize,
        probabilities: BTreeMap<String, f64>,
    },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<PauliChannel> {
        match self {
            ChannelSpec::Identity { n } => Ok(PauliChannel::identity(*n)),
            ChannelSpec::BitflipIndependent { p, n } => bitflip_independent(*p, *n),
            ChannelSpec::BitflipCorrelated { q, pairs, n } => bitflip_correlated(*q, pairs, *n),
            ChannelSpec::BitflipMixture { p, n } => bitflip_mixture(*p, *n),
            ChannelSpec::Depolarizing { lambda } => depolarizing(*lambda),
            ChannelSpec::Composite { channels } => {
                let mut iter = channels.iter();
                let first = iter
                    .next()
                    .ok_or_else(|| Error::InvalidChannel("empty composite".into()))?
                    .build()?;
                iter.try_fold(first, |acc, spec| compose_channels(&spec.build()?, &acc))
            }
            ChannelSpec::Marginal { channel, qubit } => marginal_channel(&channel.build()?, *qubit),
            ChannelSpec::Custom { n, probabilities } => {
                PauliChannel::from_strings(*n, probabilities.iter().map(|(k, v)| (k.as_str(), *v)))
            }
        }
    }
}
