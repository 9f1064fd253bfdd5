//! Built-in checks against closed forms. Each check reports a residual that
//! must not exceed `--tol`, or a margin that must exceed it.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use serde_json::json;

use qcorr::certify::{
    creation_witness, is_commutativity_preserving, is_completely_decohering, is_isotropic, msf, verify_msf_bound,
};
use qcorr::channels::{
    depolarizing, full_dephasing, isotropic_choi_matrix, isotropic_p_range, kraus_from_choi, make_example_channel,
    make_isotropic, rotation2, GammaKind, KrausChannel,
};
use qcorr::linalg::{expm_i_hermitian, hermitian_eig, hermitian_from_coords, ComplexMatrix};
use qcorr::sampling::{haar_unitary, random_cptp, random_density, substream};
use qcorr::states::{is_classical_on_b, make_half_classical, BipartiteState, DensityMatrix, PureState};

use crate::{exit, Options, Outcome};

enum Kind {
    /// Passes when `value ≤ tol`.
    Residual,
    /// Passes when `value > tol`.
    Margin,
}

struct Check {
    group: &'static str,
    name: &'static str,
    kind: Kind,
    value: f64,
}

impl Check {
    fn residual(group: &'static str, name: &'static str, value: f64) -> Self {
        Self {
            group,
            name,
            kind: Kind::Residual,
            value,
        }
    }

    fn margin(group: &'static str, name: &'static str, value: f64) -> Self {
        Self {
            group,
            name,
            kind: Kind::Margin,
            value,
        }
    }

    fn passes(&self, tol: f64) -> bool {
        match self.kind {
            Kind::Residual => self.value <= tol,
            Kind::Margin => self.value > tol,
        }
    }
}

// Failed constructions count as infinite residuals.
fn or_inf<T>(r: qcorr::Result<T>, f: impl FnOnce(T) -> f64) -> f64 {
    r.map(f).unwrap_or(f64::INFINITY)
}

fn linalg(seed: u64, out: &mut Vec<Check>) {
    let mut rng = substream(seed, 0);
    let u = haar_unitary(5, &mut rng);
    out.push(Check::residual("linalg", "haar unitarity defect", u.unitarity_defect()));

    let x: Vec<f64> = (0..16).map(|k| ((k * 7 % 11) as f64 - 5.0) / 3.0).collect();
    let h = hermitian_from_coords(4, &x);
    let recon = or_inf(hermitian_eig(&h), |s| s.reconstruct().distance(&h) / h.frobenius_norm());
    out.push(Check::residual("linalg", "eigendecomposition reconstruction", recon));
    out.push(Check::residual(
        "linalg",
        "exp(iH) unitarity defect",
        expm_i_hermitian(&h).unitarity_defect(),
    ));
}

fn states(seed: u64, out: &mut Vec<Check>) {
    let mut rng = substream(seed, 1);
    let u = haar_unitary(3, &mut rng);
    let basis: Vec<PureState> = (0..3).filter_map(|j| PureState::new(u.col(j)).ok()).collect();
    let cond: Vec<DensityMatrix> = (0..3).filter_map(|_| random_density(2, 2, &mut rng).ok()).collect();
    let q = or_inf(make_half_classical(&[0.5, 0.3, 0.2], &cond, &basis), |s| {
        is_classical_on_b(&s, 1e-9).quantumness
    });
    out.push(Check::residual("states", "half-classical quantumness", q));
    let q = is_classical_on_b(&BipartiteState::maximally_entangled(2), 1e-9).quantumness;
    out.push(Check::margin("states", "maximally entangled quantumness", q));
}

fn channels(seed: u64, out: &mut Vec<Check>) {
    let mut rng = substream(seed, 2);
    let ch = random_cptp(3, 3, &mut rng);
    let tp = or_inf(ch.clone(), |c| c.trace_preservation_residual());
    out.push(Check::residual("channels", "random channel trace preservation", tp));
    let rt = or_inf(ch, |c| {
        let j = c.choi();
        or_inf(kraus_from_choi(&j), |back| back.choi().matrix().distance(j.matrix()))
    });
    out.push(Check::residual("channels", "choi/kraus round trip", rt));
    let dep = or_inf(depolarizing(3, 0.4), |c| {
        let x = ComplexMatrix::unit(3, 0, 1);
        c.apply_matrix(&x).distance(&x.scale_real(0.4))
    });
    out.push(Check::residual("channels", "depolarizing on off-diagonal unit", dep));
}

fn detectors(tol: f64, out: &mut Vec<Check>) {
    let cd = is_completely_decohering(&full_dephasing(3), tol).map_or(f64::INFINITY, |_| 0.0);
    out.push(Check::residual("detectors", "dephasing is completely decohering", cd));
    let iso = or_inf(depolarizing(3, 0.5), |c| {
        is_isotropic(&c, tol).map_or(f64::INFINITY, |fit| (fit.p - 0.5).abs().max(fit.residual))
    });
    out.push(Check::residual("detectors", "depolarizing isotropic fit", iso));
}

fn p_ranges(seed: u64, out: &mut Vec<Check>) {
    let mut rng = substream(seed, 3);
    let u = haar_unitary(3, &mut rng);
    for (kind, name_lo, name_hi, name_out) in [
        (
            GammaKind::Unitary,
            "unitary lower boundary",
            "unitary upper boundary",
            "unitary outside range rejected",
        ),
        (
            GammaKind::TransposeUnitary,
            "transpose lower boundary",
            "transpose upper boundary",
            "transpose outside range rejected",
        ),
    ] {
        let (lo, hi) = isotropic_p_range(3, kind);
        for (p, name) in [(lo, name_lo), (hi, name_hi)] {
            // At an endpoint the Choi matrix is PSD with a zero eigenvalue.
            let min = or_inf(hermitian_eig(&isotropic_choi_matrix(3, kind, &u, p)), |s| {
                s.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min).abs()
            });
            out.push(Check::residual("p-ranges", name, min));
        }
        let outside =
            make_isotropic(3, kind, &u, lo - 1e-3).is_err() && make_isotropic(3, kind, &u, hi + 1e-3).is_err();
        out.push(Check::residual(
            "p-ranges",
            name_out,
            if outside { 0.0 } else { f64::INFINITY },
        ));
    }
}

fn commutativity(seed: u64, tol: f64, budget: usize, out: &mut Vec<Check>) {
    let id = KrausChannel::identity(2);
    let v = is_commutativity_preserving(&id, budget, tol, &mut substream(seed, 4));
    out.push(Check::residual(
        "commutativity",
        "identity max violation",
        v.max_violation,
    ));
    let ex = make_example_channel(
        &[FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        &[ComplexMatrix::identity(2), rotation2(FRAC_PI_4)],
    );
    let q = or_inf(ex, |c| {
        creation_witness(&c, budget, tol, &mut substream(seed, 5)).map_or(0.0, |w| w.output_quantumness)
    });
    out.push(Check::margin("commutativity", "example channel witness quantumness", q));
}

fn singlet_fraction(seed: u64, budget: usize, out: &mut Vec<Check>) {
    let phi = BipartiteState::maximally_entangled(2);
    let f = or_inf(msf(&phi, budget, &mut substream(seed, 6)), |r| {
        (r.singlet_fraction - 1.0).abs()
    });
    out.push(Check::residual("msf", "maximally entangled state", f));
    let p = 0.6;
    let b = or_inf(depolarizing(2, p), |c| {
        or_inf(verify_msf_bound(&phi, &c, budget, &mut substream(seed, 7)), |b| {
            (b.after.singlet_fraction - (1.0 + 3.0 * p) / 4.0).abs()
        })
    });
    out.push(Check::residual("msf", "depolarized singlet fraction (1+3p)/4", b));
}

pub fn run(opts: &Options, seed: u64) -> Outcome {
    let budget = opts.budget.min(4_000);
    let mut checks = Vec::new();
    linalg(seed, &mut checks);
    states(seed, &mut checks);
    channels(seed, &mut checks);
    detectors(opts.tol.max(1e-9), &mut checks);
    p_ranges(seed, &mut checks);
    commutativity(seed, opts.tol, budget, &mut checks);
    singlet_fraction(seed, budget, &mut checks);

    let mut summary = Vec::new();
    let rows: Vec<_> = checks
        .iter()
        .map(|c| {
            let pass = c.passes(opts.tol);
            let kind = match c.kind {
                Kind::Residual => "residual",
                Kind::Margin => "margin",
            };
            summary.push(format!(
                "[{}] {:<14} {:<40} {kind} {:.3e}",
                if pass { "PASS" } else { "FAIL" },
                c.group,
                c.name,
                c.value
            ));
            json!({
                "group": c.group,
                "name": c.name,
                "kind": kind,
                "value": if c.value.is_finite() { json!(c.value) } else { json!(null) },
                "pass": pass,
            })
        })
        .collect();
    let failed = rows.iter().filter(|r| r["pass"] == json!(false)).count();
    summary.push(format!("{} checks, {failed} failed", rows.len()));
    Outcome {
        result: json!({ "checks": rows, "failed": failed, "passed": failed == 0 }),
        summary,
        status: if failed == 0 { exit::OK } else { exit::FAILURE },
    }
}
