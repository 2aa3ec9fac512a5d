"""End-to-end acceptance gate.

Each numbered criterion asserts its stated tolerance and records a single
pass/fail line; the lines are echoed in the terminal summary by conftest.
Criterion 3 runs the full-size beam-splitter suite (N = 2000) and dominates
the runtime of this module.
"""

import json

import numpy as np
import pytest

from qpilot.cli import EXIT_OK, main as cli_main
from qpilot.epr_bell import (
    SpinSetting,
    correlator,
    factorization_dependence_report,
    local_bound_bruteforce,
    sampled_chsh,
    singlet_chsh,
    singlet_joint,
)
from qpilot.ontomodel import (
    AuditInapplicableError,
    EpistemicState,
    LambdaSpace,
    OntologicalModel,
    ResponseFunction,
    make_segregated_model,
    pbr_overlap_audit,
    product_predicted_probability,
)
from qpilot.pbr_scenario import (
    JOINT_SETTING,
    PREP_1,
    PREP_2,
    build_pbr_basis,
    make_contextual_quantum_model,
    pbr_states,
    verify_zero_conditions,
)
from qpilot.pilotwave import (
    BeamSplitterParams,
    Grid1D,
    bohmian_energy,
    box_energy,
    box_eigenstate,
    box_superposition,
    continuity_residual,
    density,
    evolve,
    evolve_history,
    gaussian_packet,
    integrate_trajectories,
    run_beam_splitter_suite,
    superpose,
    velocity_field,
    velocity_field_weak_value,
)
from qpilot.qstate import born_probabilities, tensor

RESULTS: list[str] = []


def criterion(num: int, desc: str, ok: bool) -> None:
    line = f"criterion {num}: {desc} ... {'PASS' if ok else 'FAIL'}"
    RESULTS.append(line)
    assert ok, line


@pytest.fixture(scope="module")
def full_suite():
    # Defaults: sigma_k / k0 = 0.05 exactly, N = 2000 trajectories.
    return run_beam_splitter_suite(BeamSplitterParams())


@pytest.fixture(scope="module")
def segregated():
    psi1, psi2 = pbr_states()
    return make_segregated_model([(PREP_1, psi1), (PREP_2, psi2)], [build_pbr_basis()])


def test_criterion_1_zero_conditions():
    basis = build_pbr_basis()
    worst_amp = verify_zero_conditions(basis)
    gram_dev = float(np.max(np.abs(basis.gram() - np.eye(4))))
    criterion(
        1,
        f"zero conditions max |amp| = {worst_amp:.2e} < 1e-10, "
        f"Gram deviation {gram_dev:.2e} < 1e-10",
        worst_amp < 1e-10 and gram_dev < 1e-10,
    )


def test_criterion_2_audit_soundness(segregated):
    # Branch A: hand-built overlapping non-contextual model is contradictory.
    space = LambdaSpace(("shared",))
    epi = {
        PREP_1: EpistemicState(space, (1.0,), PREP_1),
        PREP_2: EpistemicState(space, (1.0,), PREP_2),
    }
    response = ResponseFunction("noncontextual")
    response.set_row(JOINT_SETTING, ("shared", "shared"), [0.0] * 4, validate=False)
    overlapping = OntologicalModel(space, epi, response)
    cert = pbr_overlap_audit(overlapping, PREP_1, PREP_2, JOINT_SETTING)
    cert_ok = cert is not None and cert.normalization_deficit == pytest.approx(1.0, abs=1e-9)

    # Branch B: the segregated model sails through.
    seg_ok = pbr_overlap_audit(segregated, PREP_1, PREP_2, JOINT_SETTING) is None

    # Branch C: the contextual model is inapplicable yet exactly quantum.
    contextual = make_contextual_quantum_model(segregated)
    try:
        pbr_overlap_audit(contextual, PREP_1, PREP_2, JOINT_SETTING)
        inapplicable = False
    except AuditInapplicableError:
        inapplicable = True
    basis = build_pbr_basis()
    psi1, psi2 = pbr_states()
    kets = {PREP_1: psi1, PREP_2: psi2}
    max_dev = 0.0
    for pa in (PREP_1, PREP_2):
        for pb in (PREP_1, PREP_2):
            got = product_predicted_probability(contextual, pa, pb, JOINT_SETTING)
            want = born_probabilities(basis, tensor(kets[pa], kets[pb]))
            max_dev = max(max_dev, float(np.max(np.abs(got - want))))
    criterion(
        2,
        "audit: overlapping model certified (deficit 1), segregated passes, "
        f"contextual inapplicable with joint deviation {max_dev:.2e} < 1e-10",
        cert_ok and seg_ok and inapplicable and max_dev < 1e-10,
    )


def test_criterion_3_beam_splitter(full_suite):
    r = full_suite["results"]
    n = BeamSplitterParams().n_samples
    gate_ok = abs(r["gate1"].p3_wave - 0.5) <= 0.02
    plus_ok = r["plus"].p3_wave >= 0.98
    minus_ok = r["minus"].p4_wave >= 0.98
    traj_ok = True
    for kind, res in r.items():
        p = res.p3_wave
        sigma = np.sqrt(max(p * (1 - p), 1.0 / n) / n)
        traj_ok &= abs(res.p3_traj - p) <= max(3 * sigma, 3.0 / n)
    pm_ok = full_suite["lambda_overlap_plus_minus"] >= 0.99
    g12_ok = full_suite["lambda_overlap_gate1_gate2"] <= 0.01
    criterion(
        3,
        f"beam splitter: P3(gate1)={r['gate1'].p3_wave:.4f} in 0.5+/-0.02, "
        f"P3(plus)={r['plus'].p3_wave:.4f}>=0.98, P4(minus)={r['minus'].p4_wave:.4f}>=0.98, "
        f"trajectory exits within 3 sigma, overlap(plus,minus)="
        f"{full_suite['lambda_overlap_plus_minus']:.3f}>=0.99, "
        f"overlap(gate1,gate2)={full_suite['lambda_overlap_gate1_gate2']:.3f}<=0.01",
        gate_ok and plus_ok and minus_ok and traj_ok and pm_ok and g12_ok,
    )


def test_criterion_4_numerics(full_suite):
    # Norm drift over the full runs.
    drift = max(
        abs(res.ensemble.final_wave.norm() - 1.0) for res in full_suite["results"].values()
    )
    drift_ok = drift < 1e-8

    # Continuity residual refines by >= 3x under joint (dx, dt) halving.
    def residual(n, dt):
        grid = Grid1D(-64.0, 64.0, n, dt)
        psi = gaussian_packet(grid, -10.0, 5.0, 0.8)
        history = evolve_history(psi, None, int(round(8.0 / dt)), store_every=25)
        return continuity_residual(history)

    coarse, fine = residual(1024, 0.04), residual(2048, 0.02)
    refine_ok = coarse / fine >= 3.0

    # No-crossing at every stored step of every scenario.
    crossing_ok = True
    for res in full_suite["results"].values():
        paths = res.ensemble.paths
        order = np.argsort(paths[:, 0])
        crossing_ok &= bool(np.all(np.diff(paths[order], axis=0) > -1e-9))

    # KS equivariance at the 1% level for N = 2000 transported samples.
    grid = Grid1D(-128.0, 128.0, 2048, 0.02)
    psi = gaussian_packet(grid, -20.0, 6.0, 0.8)
    n = 2000
    ens = integrate_trajectories(psi, None, n, seed=4, t_final=20.0)
    finals = np.sort(ens.final_positions())
    cdf = np.interp(finals, grid.x, np.cumsum(density(evolve(psi, None, 1000))) * grid.dx)
    empirical = np.arange(1, n + 1) / n
    d = float(np.max(np.maximum(np.abs(empirical - cdf), np.abs(empirical - 1 / n - cdf))))
    ks_ok = d < 1.628 / np.sqrt(n)

    criterion(
        4,
        f"numerics: norm drift {drift:.1e} < 1e-8, continuity refinement "
        f"{coarse / fine:.2f}x >= 3x, no-crossing at all stored steps, "
        f"KS D={d:.4f} < {1.628 / np.sqrt(n):.4f}",
        drift_ok and refine_ok and crossing_ok and ks_ok,
    )


def test_criterion_5_guidance_identities():
    grid = Grid1D(-128.0, 128.0, 2048, 0.02)
    real_psi = superpose(
        gaussian_packet(grid, -15.0, 5.0, 0.0), gaussian_packet(grid, 15.0, 5.0, 0.0),
        0.6, 0.8,
    )
    v_real = velocity_field(real_psi)
    still_ok = float(np.nanmax(np.abs(v_real))) < 1e-9

    moving = evolve(gaussian_packet(grid, -20.0, 6.0, 0.9), None, 500)
    v1, v2 = velocity_field(moving), velocity_field_weak_value(moving)
    mask = np.isfinite(v1)
    rel = float(np.max(np.abs(v1[mask] - v2[mask]) / np.maximum(np.abs(v1[mask]), 1e-30)))
    identity_ok = rel < 1e-9
    criterion(
        5,
        f"guidance identities: real state max |v| = {np.nanmax(np.abs(v_real)):.1e} < 1e-9, "
        f"J/rho vs weak value rel dev {rel:.1e} < 1e-9",
        still_ok and identity_ok,
    )


def test_criterion_6_bohmian_energy():
    grid = Grid1D(-10.0, 10.0, 512, 0.05)
    n_level = 2
    psi = box_eigenstate(grid, -5.0, 5.0, n_level)
    e = bohmian_energy(psi, box_eigenstate(grid, -5.0, 5.0, n_level, t=grid.dt))
    want = box_energy(n_level, 10.0)
    finite = np.isfinite(e)
    eig_dev = float(np.max(np.abs(e[finite] - want)) / want)
    eig_ok = eig_dev < 0.01

    e1, e2 = box_energy(1, 10.0), box_energy(2, 10.0)
    probe = int(np.argmin(np.abs(grid.x + 2.5)))
    series = []
    for t in np.arange(0.0, 100.0, 0.5):
        a = box_superposition(grid, -5.0, 5.0, 1, 2, t)
        b = box_superposition(grid, -5.0, 5.0, 1, 2, t + grid.dt)
        series.append(bohmian_energy(a, b)[probe])
    y = np.asarray(series) - np.mean(series)
    nonconstant_ok = float(np.std(y)) > 0.01
    idx = np.flatnonzero((y[:-1] < 0) & (y[1:] >= 0))
    crossings = [0.5 * (i + (-y[i]) / (y[i + 1] - y[i])) for i in idx]
    period = float(np.mean(np.diff(crossings)))
    want_period = 2 * np.pi / abs(e2 - e1)
    period_ok = abs(period - want_period) / want_period < 0.05
    criterion(
        6,
        f"energy: eigenstate E within {eig_dev:.2e} of {want:.4f} (<1%), "
        f"superposition beat period {period:.2f} vs {want_period:.2f} (<5%)",
        eig_ok and nonconstant_ok and period_ok,
    )


def test_criterion_7_epr_bell():
    rng = np.random.default_rng(123)
    corr_dev = 0.0
    for _ in range(100):
        a = SpinSetting(rng.uniform(0, 2 * np.pi))
        b = SpinSetting(rng.uniform(0, 2 * np.pi))
        e = correlator(singlet_joint(a, b))
        corr_dev = max(corr_dev, abs(e + np.cos(a.angle - b.angle)))
    corr_ok = corr_dev < 1e-10

    s_exact = abs(singlet_chsh())
    exact_ok = abs(s_exact - 2 * np.sqrt(2)) < 1e-10
    s_sampled = abs(sampled_chsh(100_000, seed=77))
    sampled_ok = abs(s_sampled - 2 * np.sqrt(2)) < 0.05
    bound_ok = local_bound_bruteforce() == 2.0
    report = factorization_dependence_report(100_000, seed=5)
    gap_ok = abs(report["dependence_gap"] - np.sqrt(2) / 2) < 0.02
    criterion(
        7,
        f"EPR/Bell: correlator dev {corr_dev:.1e} < 1e-10, CHSH exact "
        f"{s_exact:.6f}, sampled {s_sampled:.4f} (+/-0.05), local bound 2, "
        f"dependence gap {report['dependence_gap']:.4f} (0.7071 +/- 0.02)",
        corr_ok and exact_ok and sampled_ok and bound_ok and gap_ok,
    )


def test_criterion_8_reproducibility(tmp_path):
    def run_twice(args_builder):
        outs = []
        for tag in ("r1", "r2"):
            out = tmp_path / tag / args_builder.__name__
            assert cli_main(args_builder(str(out))) == EXIT_OK
            outs.append(
                {
                    str(p.relative_to(out)): p.read_bytes()
                    for p in sorted(out.rglob("*"))
                    if p.is_file()
                }
            )
        return outs[0] == outs[1]

    epr_cfg = tmp_path / "epr.json"
    epr_cfg.write_text(
        json.dumps(
            {
                "version": 1,
                "angles": {"a": 0.0, "a'": np.pi / 2, "b": np.pi / 4, "b'": 3 * np.pi / 4},
                "n": 50000,
                "seed": 31337,
            }
        )
    )

    def epr(out):
        return ["epr", "--config", str(epr_cfg), "--out", out]

    fields_cfg = tmp_path / "fields.json"
    fields_cfg.write_text(
        json.dumps(
            {
                "version": 1,
                "grid": {"x_min": -10.0, "x_max": 10.0, "n": 512, "dt": 0.05},
                "state": {
                    "kind": "box_superposition", "left": -5.0, "right": 5.0, "n1": 1, "n2": 2,
                },
                "t_final": 30.0,
                "store_every": 20,
            }
        )
    )

    def fields(out):
        return ["fields", "--config", str(fields_cfg), "--out", out]

    epr_same = run_twice(epr)
    fields_same = run_twice(fields)
    criterion(
        8,
        "reproducibility: identical config+seed reruns byte-identical "
        f"(epr: {epr_same}, fields: {fields_same})",
        epr_same and fields_same,
    )
