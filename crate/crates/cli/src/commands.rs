use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::json;

use qcorr::certify::{
    census, classify as classify_any, classify_qubit, classify_qutrit, is_commutativity_preserving, is_unital,
    msf as msf_search, verify_msf_bound, witness_from_pair, ChannelLabel,
};
use qcorr::channels::{
    amplitude_damping, depolarizing, full_dephasing, make_example_channel, make_isotropic, rotation2, GammaKind,
    KrausChannel,
};
use qcorr::linalg::ComplexMatrix;
use qcorr::sampling::{
    haar_unitary, random_completely_decohering, random_cptp, random_density, random_probability_vector,
    random_unital_mixture, rng_from_seed,
};
use qcorr::states::{make_half_classical, BipartiteState, DensityMatrix, PureState};

use crate::io::{load_channel, load_state, ChannelFile, ChannelMeta, StateFile};
use crate::report::{cp_json, gamma_kind_str, msf_json, verdict_json, witness_json};
use crate::{exit, CliError, Options, Outcome};

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a PathBuf, CliError> {
    path.as_ref()
        .ok_or_else(|| CliError::Input(format!("{flag} is required for this command")))
}

pub fn classify(opts: &Options, seed: u64) -> Result<Outcome, CliError> {
    let (ch, _) = load_channel(required(&opts.input, "--in")?)?;
    let mut rng = rng_from_seed(seed);
    let verdict = match ch.dim() {
        2 => classify_qubit(&ch, opts.budget, opts.tol, &mut rng)?,
        3 => classify_qutrit(&ch, opts.budget, opts.tol, &mut rng)?,
        _ => classify_any(&ch, opts.budget, opts.tol, &mut rng),
    };
    let mut result = verdict_json(&verdict);
    result["dim"] = json!(ch.dim());
    result["complete_classification"] = json!(ch.dim() <= 3);
    let mut summary = vec![format!("dim {}: {}", ch.dim(), verdict.label.as_str())];
    if let Some(q) = result["evidence"]["output_quantumness"].as_f64() {
        summary.push(format!("witness output quantumness {q:.3e}"));
    }
    if let Some(p) = result["evidence"]["p"].as_f64() {
        summary.push(format!("fitted p = {p}"));
    }
    let status = if verdict.label == ChannelLabel::PreservingUnclassified {
        summary.push("no detector matched and no violation was found within the budget".into());
        exit::FAILURE
    } else {
        exit::OK
    };
    Ok(Outcome {
        result,
        summary,
        status,
    })
}

pub fn witness(opts: &Options, seed: u64) -> Result<Outcome, CliError> {
    let (ch, _) = load_channel(required(&opts.input, "--in")?)?;
    let mut rng = rng_from_seed(seed);
    let verdict = is_commutativity_preserving(&ch, opts.budget, opts.tol, &mut rng);
    let found = match &verdict.witness_pair {
        Some((phi, psi)) => witness_from_pair(&ch, phi, psi, opts.tol)?,
        None => None,
    };
    let (result, summary, status) = match found {
        Some(w) => (
            json!({ "found": true, "search": cp_json(&verdict), "witness": witness_json(&w) }),
            vec![format!(
                "witness found: output quantumness {:.3e}, violation {:.3e}",
                w.output_quantumness, verdict.max_violation
            )],
            exit::OK,
        ),
        None => (
            json!({ "found": false, "search": cp_json(&verdict), "witness": null }),
            vec![format!(
                "none found within budget ({} evaluations, max violation {:.3e})",
                verdict.evaluations, verdict.max_violation
            )],
            exit::NOT_FOUND,
        ),
    };
    Ok(Outcome {
        result,
        summary,
        status,
    })
}

pub fn msf(opts: &Options, seed: u64) -> Result<Outcome, CliError> {
    let s = load_state(required(&opts.input, "--in")?)?;
    if s.dim_a() != s.dim_b() {
        return Err(CliError::Input(format!(
            "singlet fraction needs dimA = dimB, got {} and {}",
            s.dim_a(),
            s.dim_b()
        )));
    }
    let mut rng = rng_from_seed(seed);
    let Some(path) = &opts.channel else {
        let r = msf_search(&s, opts.budget, &mut rng)?;
        return Ok(Outcome {
            summary: vec![format!("F = {}, f = {}", r.singlet_fraction, r.fidelity)],
            result: json!({ "before": msf_json(&r) }),
            status: exit::OK,
        });
    };
    let (ch, _) = load_channel(path)?;
    if ch.dim() != s.dim_b() {
        return Err(CliError::Input(format!(
            "channel acts on dimension {}, state has dimB = {}",
            ch.dim(),
            s.dim_b()
        )));
    }
    let unital = is_unital(&ch, 1e-9);
    if opts.require_mixing && !unital {
        return Err(CliError::Input(format!(
            "channel is not unital (‖Λ(I) − I‖_F = {:.3e}) and --require-mixing is set",
            ch.unitality_residual()
        )));
    }
    if unital {
        let b = verify_msf_bound(&s, &ch, opts.budget, &mut rng)?;
        Ok(Outcome {
            summary: vec![
                format!(
                    "F = {}, F_after = {}",
                    b.before.singlet_fraction, b.after.singlet_fraction
                ),
                format!("bound F_after ≤ F holds: {}", b.holds),
            ],
            result: json!({
                "before": msf_json(&b.before),
                "after": msf_json(&b.after),
                "unital": true,
                "bound_holds": b.holds,
            }),
            status: if b.holds { exit::OK } else { exit::FAILURE },
        })
    } else {
        let before = msf_search(&s, opts.budget, &mut rng)?;
        let after = msf_search(&ch.apply_local_b(&s)?, opts.budget, &mut rng)?;
        Ok(Outcome {
            summary: vec![
                format!("F = {}, F_after = {}", before.singlet_fraction, after.singlet_fraction),
                "channel is not unital; no bound is claimed".into(),
            ],
            result: json!({
                "before": msf_json(&before),
                "after": msf_json(&after),
                "unital": false,
                "bound_holds": null,
            }),
            status: exit::OK,
        })
    }
}

pub fn scan(opts: &Options, seed: u64) -> Result<Outcome, CliError> {
    let d = opts.dim.unwrap_or(4);
    if d < 2 {
        return Err(CliError::Input("scan needs --dim ≥ 2".into()));
    }
    let mut rng = rng_from_seed(seed);
    let report = census(d, opts.samples, opts.budget, opts.tol, &mut rng)?;
    let mut summary = vec![format!(
        "d = {d}, {} channels; known preserving classes: {}",
        opts.samples,
        if d == 2 { "CD ∪ unital" } else { "CD ∪ isotropic" }
    )];
    let families: Vec<_> = report
        .counts()
        .into_iter()
        .map(|(f, c)| {
            summary.push(format!(
                "{:<22} total {:>4}  CD {:>4}  isotropic {:>4}  unital {:>4}  creator {:>4}  cp-pass {:>4}",
                f.as_str(),
                c.total,
                c.cd,
                c.isotropic,
                c.unital,
                c.creator,
                c.cp_pass
            ));
            json!({
                "family": f.as_str(),
                "total": c.total,
                "completely_decohering": c.cd,
                "isotropic": c.isotropic,
                "unital_mixing": c.unital,
                "creator": c.creator,
                "cp_pass": c.cp_pass,
            })
        })
        .collect();
    let anomalies: Vec<_> = report
        .anomalies()
        .into_iter()
        .map(|r| {
            json!({
                "index": r.index,
                "family": r.family.as_str(),
                "anomaly": r.anomaly.map(|a| a.as_str()),
                "max_violation": r.max_violation,
                "channel": ChannelFile::from_channel(&r.channel, None),
            })
        })
        .collect();
    summary.push(format!("anomalies: {}", anomalies.len()));
    let status = if anomalies.is_empty() { exit::OK } else { exit::FAILURE };
    Ok(Outcome {
        result: json!({
            "dim": d,
            "channels": opts.samples,
            "families": families,
            "anomalies": anomalies,
            "evidence_only": true,
        }),
        summary,
        status,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChannelKind {
    Identity,
    Depolarizing,
    Dephasing,
    /// `pUρU† + (1 − p)I/d` with Haar `U`, or `pUρᵀU† + …` with `--transpose`.
    Isotropic,
    /// Mixture of `--count` Haar unitaries.
    UnitalMixture,
    /// Random completely decohering channel.
    Decohering,
    /// Qutrit example with weights (1/√2, 1/√2) and rank-2 blocks `I`, `R(θ)`.
    Example,
    AmplitudeDamping,
    /// Random CPTP map with `--count` Kraus operators.
    Random,
}

#[derive(Clone, Debug, Args)]
pub struct MakeChannel {
    #[arg(value_enum)]
    pub kind: ChannelKind,
    /// Mixing parameter (depolarizing, isotropic) or damping rate.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub p: f64,
    /// Use the transpose form of the isotropic channel.
    #[arg(long)]
    pub transpose: bool,
    /// Rotation angle of the second block in the example channel.
    #[arg(long, default_value_t = FRAC_PI_4, allow_negative_numbers = true)]
    pub theta: f64,
    /// Number of unitaries or Kraus operators for random families.
    #[arg(long, default_value_t = 2)]
    pub count: usize,
}

pub fn make_channel(args: &MakeChannel, opts: &Options, seed: u64) -> Result<String, CliError> {
    let d = opts.dim.unwrap_or(2);
    let mut rng = rng_from_seed(seed);
    let (ch, kind, params): (KrausChannel, &str, serde_json::Value) = match args.kind {
        ChannelKind::Identity => (KrausChannel::identity(d), "identity", json!({})),
        ChannelKind::Depolarizing => (depolarizing(d, args.p)?, "depolarizing", json!({ "p": args.p })),
        ChannelKind::Dephasing => (full_dephasing(d), "dephasing", json!({})),
        ChannelKind::Isotropic => {
            let kind = if args.transpose {
                GammaKind::TransposeUnitary
            } else {
                GammaKind::Unitary
            };
            let u = haar_unitary(d, &mut rng);
            (
                make_isotropic(d, kind, &u, args.p)?,
                "isotropic",
                json!({ "p": args.p, "gamma_kind": gamma_kind_str(kind), "seed": seed }),
            )
        }
        ChannelKind::UnitalMixture => (
            random_unital_mixture(d, args.count.max(1), &mut rng),
            "unital_mixture",
            json!({ "count": args.count, "seed": seed }),
        ),
        ChannelKind::Decohering => (
            random_completely_decohering(d, &mut rng),
            "completely_decohering",
            json!({ "seed": seed }),
        ),
        ChannelKind::Example => (
            make_example_channel(
                &[FRAC_1_SQRT_2, FRAC_1_SQRT_2],
                &[ComplexMatrix::identity(2), rotation2(args.theta)],
            )?,
            "example_qutrit",
            json!({ "e_weights": [FRAC_1_SQRT_2, FRAC_1_SQRT_2], "theta": args.theta }),
        ),
        ChannelKind::AmplitudeDamping => (
            amplitude_damping(args.p)?,
            "amplitude_damping",
            json!({ "gamma": args.p }),
        ),
        ChannelKind::Random => (
            random_cptp(d, args.count.max(1), &mut rng)?,
            "random_cptp",
            json!({ "count": args.count, "seed": seed }),
        ),
    };
    let meta = ChannelMeta {
        kind: kind.into(),
        params,
    };
    let file = ChannelFile::from_channel(&ch, Some(meta));
    Ok(serde_json::to_string_pretty(&file).expect("serializable") + "\n")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    /// `|Φ⁺⟩` on `C^d ⊗ C^d`.
    PhiPlus,
    MaximallyMixed,
    /// Hilbert–Schmidt random state of rank `--rank` on `C^d ⊗ C^d`.
    Random,
    /// Random state on `C² ⊗ C^d` that is classical on B.
    HalfClassical,
}

#[derive(Clone, Debug, Args)]
pub struct MakeState {
    #[arg(value_enum)]
    pub kind: StateKind,
    /// Rank of a random state; full rank by default.
    #[arg(long)]
    pub rank: Option<usize>,
}

pub fn make_state(args: &MakeState, opts: &Options, seed: u64) -> Result<String, CliError> {
    let d = opts.dim.unwrap_or(2);
    let mut rng = rng_from_seed(seed);
    let s = match args.kind {
        StateKind::PhiPlus => BipartiteState::maximally_entangled(d),
        StateKind::MaximallyMixed => BipartiteState::new(d, d, DensityMatrix::maximally_mixed(d * d))?,
        StateKind::Random => {
            let rank = args.rank.unwrap_or(d * d);
            BipartiteState::new(d, d, random_density(d * d, rank, &mut rng)?)?
        }
        StateKind::HalfClassical => {
            let u = haar_unitary(d, &mut rng);
            let basis: Vec<PureState> = (0..d).map(|j| PureState::new(u.col(j))).collect::<Result<_, _>>()?;
            let cond = (0..d)
                .map(|_| random_density(2, 2, &mut rng))
                .collect::<Result<Vec<_>, _>>()?;
            make_half_classical(&random_probability_vector(d, &mut rng), &cond, &basis)?
        }
    };
    Ok(serde_json::to_string_pretty(&StateFile::from_state(&s)).expect("serializable") + "\n")
}
