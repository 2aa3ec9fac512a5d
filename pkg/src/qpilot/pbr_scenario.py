"""Concrete two-qubit no-overlap scenario.

Two non-orthogonal single-qubit preparations and a four-outcome entangled
measurement whose outcomes each annihilate one of the four product
preparations.  The basis is found numerically from those orthogonality
constraints and cached; only its post-conditions are contractual.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .qstate import (
    EPS_ORTHO,
    Ket,
    MeasurementBasis,
    basis_ket,
    born_probabilities,
    inner,
    ket,
    normalize,
    tensor,
)
from .ontomodel import (
    AuditInapplicableError,
    OntologicalModel,
    ResponseFunction,
    pbr_overlap_audit,
    predicted_probability,
    product_predicted_probability,
    support_overlap,
)

JOINT_SETTING = "pbr"
PREP_1 = "psi1"
PREP_2 = "psi2"


def pbr_states() -> tuple[Ket, Ket]:
    """The two non-orthogonal preparations: |0> and (|0>+|1>)/sqrt(2)."""
    psi1 = basis_ket(2, 0)
    psi2 = ket(1.0, 1.0)
    return psi1, psi2


def zero_pairings() -> list[tuple[int, tuple[str, str]]]:
    """(outcome index, preparation pair) combinations with zero Born probability."""
    return [
        (0, (PREP_1, PREP_1)),
        (1, (PREP_1, PREP_2)),
        (2, (PREP_2, PREP_1)),
        (3, (PREP_2, PREP_2)),
    ]


def _product_states() -> list[np.ndarray]:
    psi1, psi2 = pbr_states()
    kets = {PREP_1: psi1, PREP_2: psi2}
    return [
        tensor(kets[a], kets[b]).as_array() for _, (a, b) in zero_pairings()
    ]


def _unitary_from_params(params: np.ndarray) -> np.ndarray:
    """Unitary exp(iH) from 16 real parameters of a Hermitian generator H."""
    h = np.zeros((4, 4), dtype=complex)
    h[np.diag_indices(4)] = params[:4]
    upper = params[4:10] + 1j * params[10:16]
    rows, cols = np.triu_indices(4, k=1)
    h[rows, cols] = upper
    h[cols, rows] = upper.conj()
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def _gauss_newton_polish(u0: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Drive the forbidden amplitudes to machine zero along the unitary manifold.

    Each step solves the linearized constraints with a minimum-norm
    Gauss-Newton update exp(iH) * U, so unitarity is exact throughout.
    """

    def residual(u: np.ndarray) -> np.ndarray:
        amps = np.einsum("ij,ij->i", u.conj(), targets)
        return np.concatenate([amps.real, amps.imag])

    u = u0
    for _ in range(20):
        r0 = residual(u)
        if np.max(np.abs(r0)) < 1e-15:
            break
        jac = np.empty((8, 16))
        eps = 1e-7
        for k in range(16):
            h = np.zeros(16)
            h[k] = eps
            r_plus = residual(_unitary_from_params(h) @ u)
            h[k] = -eps
            r_minus = residual(_unitary_from_params(h) @ u)
            jac[:, k] = (r_plus - r_minus) / (2 * eps)
        step = -np.linalg.pinv(jac) @ r0
        u = _unitary_from_params(step) @ u
    return u


@lru_cache(maxsize=1)
def build_pbr_basis() -> MeasurementBasis:
    """Orthonormal four-outcome basis satisfying the four zero conditions.

    Found numerically: the basis is the row set of a unitary, parametrized by
    a Hermitian generator, and the summed squared forbidden amplitudes are
    driven to zero with BFGS.  Seeded restarts make the result reproducible;
    only the post-conditions are contractual.
    """
    from scipy.optimize import minimize

    targets = np.array(_product_states())

    def cost(params: np.ndarray) -> float:
        u = _unitary_from_params(params)
        amps = np.einsum("ij,ij->i", u.conj(), targets)
        return float(np.sum(np.abs(amps) ** 2))

    rng = np.random.default_rng(20111114)
    for _ in range(20):
        x0 = rng.uniform(-np.pi, np.pi, size=16)
        res = minimize(cost, x0, method="BFGS", options={"gtol": 1e-14, "maxiter": 2000})
        if res.fun > 1e-8:
            continue
        u = _gauss_newton_polish(_unitary_from_params(res.x), targets)
        basis = MeasurementBasis(tuple(Ket.from_array(v) for v in u), label=JOINT_SETTING)
        if verify_zero_conditions(basis) < EPS_ORTHO:
            return basis
    raise RuntimeError("basis construction failed to satisfy the zero conditions")


def verify_zero_conditions(basis: MeasurementBasis) -> float:
    """Max |<xi_i | product state_i>| over the four designated pairings."""
    if basis.dim != 4:
        raise ValueError(f"expected a dim-4 basis, got dim {basis.dim}")
    targets = _product_states()
    return max(
        abs(inner(basis.vectors[i], Ket.from_array(phi))) for i, phi in enumerate(targets)
    )


def make_contextual_quantum_model(model: OntologicalModel) -> OntologicalModel:
    """Contextual twin of a model: joint rows are the Born probabilities of
    the preparation pair, identical for every cell pair.

    Reproduces all quantum statistics regardless of how much the epistemic
    states overlap: the second branch of the amended no-overlap theorem.
    """
    basis = build_pbr_basis()
    psi1, psi2 = pbr_states()
    kets = {PREP_1: psi1, PREP_2: psi2}
    response = ResponseFunction("contextual")
    cells = model.space.cells
    for pa in (PREP_1, PREP_2):
        for pb in (PREP_1, PREP_2):
            probs = born_probabilities(basis, tensor(kets[pa], kets[pb]))
            for ca in cells:
                for cb in cells:
                    response.set_row(JOINT_SETTING, (ca, cb), probs, prep=(pa, pb))
    return OntologicalModel(model.space, dict(model.epistemic), response)


def run_pbr_demo(model: OntologicalModel) -> dict:
    """Drive the scenario end to end against a supplied hidden-variable model.

    The report carries the quantum zero amplitudes, the model's joint
    predictions for all four preparation pairs, the support overlap of the
    two epistemic states and the audit verdict.
    """
    basis = build_pbr_basis()
    psi1, psi2 = pbr_states()
    kets = {PREP_1: psi1, PREP_2: psi2}

    quantum_joint = {}
    for pa in (PREP_1, PREP_2):
        for pb in (PREP_1, PREP_2):
            probs = born_probabilities(basis, tensor(kets[pa], kets[pb]))
            quantum_joint[f"{pa},{pb}"] = [float(p) for p in probs]

    contextual = model.response.kind == "contextual"
    model_joint = {}
    for pa in (PREP_1, PREP_2):
        for pb in (PREP_1, PREP_2):
            probs = product_predicted_probability(model, pa, pb, JOINT_SETTING)
            model_joint[f"{pa},{pb}"] = [float(p) for p in probs]

    overlap_mass, disjoint = support_overlap(model.epistemic[PREP_1], model.epistemic[PREP_2])

    audit: dict = {}
    try:
        cert = pbr_overlap_audit(model, PREP_1, PREP_2, JOINT_SETTING)
    except AuditInapplicableError as exc:
        audit = {"status": "inapplicable", "reason": str(exc)}
    else:
        if cert is None:
            audit = {"status": "pass"}
        else:
            audit = {
                "status": "contradiction",
                "cell": cert.cell,
                "weight1": cert.weight1,
                "weight2": cert.weight2,
                "forced_zero_outcomes": list(cert.forced_zero_outcomes),
                "normalization_deficit": cert.normalization_deficit,
            }

    return {
        "zero_conditions_max": float(verify_zero_conditions(basis)),
        "quantum_joint": quantum_joint,
        "model_joint": model_joint,
        "prediction_path": "preparation-dependent response" if contextual else "preparation-independent response",
        "overlap_mass": float(overlap_mass),
        "supports_disjoint": bool(disjoint),
        "audit": audit,
    }
