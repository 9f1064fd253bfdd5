use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use qcorr::certify::{ClassificationVerdict, CpVerdict, CreationWitness, Evidence, MsfResult};
use qcorr::channels::GammaKind;
use qcorr::states::PureState;

use crate::io::{matrix_to_json, vector_to_json, StateFile};

pub const NOTES: [&str; 6] = [
    "joint index of a state on A⊗B is a·dimB + b; matrices are row-major with [re, im] entries",
    "Choi matrix J = (Λ⊗I)(|Φ⁺⟩⟨Φ⁺|) with the output leg first and unit trace",
    "violation = ‖[Λ(φ),Λ(ψ)]‖_F / (‖Λ(φ)‖_F ‖Λ(ψ)‖_F) over orthogonal pure pairs; a pass means none was found within the budget",
    "quantumness = largest normalized commutator or normality defect among the blocks ⟨k|_A ρ |l⟩_A",
    "random states use the Hilbert–Schmidt measure and random unitaries the Haar measure",
    "singlet fraction F = max_U ⟨Φ_U|ρ|Φ_U⟩ with |Φ_U⟩ = (I⊗U)|Φ⁺⟩; fidelity f = (dF+1)/(d+1)",
];

#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub command: String,
    pub dim: Option<usize>,
    pub seed: u64,
    pub tol: f64,
    pub budget: usize,
    pub samples: usize,
    pub input: Option<String>,
    pub channel: Option<String>,
    pub require_mixing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: ConfigEcho,
    pub result: Value,
    pub notes: [&'static str; 6],
    pub timing: Timing,
    #[serde(skip)]
    pub summary: Vec<String>,
}

impl Report {
    pub fn new(config: ConfigEcho, result: Value, summary: Vec<String>, elapsed_seconds: f64) -> Self {
        Self {
            tool: "qcorr",
            version: env!("CARGO_PKG_VERSION"),
            config,
            result,
            notes: NOTES,
            timing: Timing { elapsed_seconds },
            summary,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qcorr {} {}", self.version, self.config.command);
        for line in &self.summary {
            let _ = writeln!(out, "  {line}");
        }
        let _ = writeln!(out, "  elapsed {:.3}s", self.timing.elapsed_seconds);
        out
    }
}

pub fn pure_json(v: &PureState) -> Value {
    json!(vector_to_json(v.amplitudes()))
}

pub fn gamma_kind_str(kind: GammaKind) -> &'static str {
    match kind {
        GammaKind::Unitary => "unitary",
        GammaKind::TransposeUnitary => "transpose_unitary",
    }
}

pub fn witness_json(w: &CreationWitness) -> Value {
    json!({
        "input": StateFile::from_state(&w.input),
        "output": StateFile::from_state(&w.output),
        "input_quantumness": w.input_quantumness,
        "output_quantumness": w.output_quantumness,
        "pair": [pure_json(&w.pair.0), pure_json(&w.pair.1)],
    })
}

pub fn cp_json(v: &CpVerdict) -> Value {
    json!({
        "preserving": v.preserving,
        "max_violation": v.max_violation,
        "evaluations": v.evaluations,
        "tol": v.tol,
        "witness_pair": v.witness_pair.as_ref().map(|(a, b)| json!([pure_json(a), pure_json(b)])),
    })
}

pub fn verdict_json(v: &ClassificationVerdict) -> Value {
    let evidence = match &v.evidence {
        Evidence::Basis(basis) => json!({
            "type": "basis",
            "basis": basis.iter().map(pure_json).collect::<Vec<_>>(),
        }),
        Evidence::Unital { residual } => json!({ "type": "unital", "residual": residual }),
        Evidence::Isotropic(fit) => json!({
            "type": "isotropic",
            "p": fit.p,
            "gamma_kind": fit.kind.map(gamma_kind_str),
            "unitary": fit.unitary.as_ref().map(matrix_to_json),
            "residual": fit.residual,
            "gamma_identifiable": fit.kind.is_some(),
        }),
        Evidence::Witness(w) => {
            let mut j = witness_json(w);
            j["type"] = json!("witness");
            j
        }
        Evidence::NoViolationFound {
            max_violation,
            evaluations,
        } => json!({
            "type": "no_violation_found",
            "max_violation": max_violation,
            "evaluations": evaluations,
        }),
    };
    json!({ "label": v.label.as_str(), "evidence": evidence })
}

pub fn msf_json(r: &MsfResult) -> Value {
    json!({
        "singlet_fraction": r.singlet_fraction,
        "fidelity": r.fidelity,
        "optimal_unitary": matrix_to_json(&r.optimal_unitary),
        "evaluations": r.evaluations,
    })
}
