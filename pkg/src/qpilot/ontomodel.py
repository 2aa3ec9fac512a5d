"""Finite hidden-variable model framework.

A model pairs epistemic distributions over a finite lambda-space with a
response function giving outcome probabilities per lambda cell.  Response
functions come in two flavors: ones that only see the cell (and the
measurement setting), and ones that additionally see which quantum state
prepared the ensemble.  The overlap audit realizes the no-overlap argument
for the first flavor and explicitly refuses the second.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

EPS_WEIGHT = 1e-12
ZERO_TOL = 1e-10


class SpaceMismatchError(ValueError):
    """Raised when two epistemic states live on different lambda spaces."""


class AuditInapplicableError(ValueError):
    """The overlap audit only applies to preparation-independent responses."""


@dataclass(frozen=True)
class LambdaSpace:
    """Ordered finite set of hidden-variable cells."""

    cells: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(str(c) for c in self.cells))
        if len(set(self.cells)) != len(self.cells):
            raise ValueError("cell identifiers must be unique")

    @property
    def size(self) -> int:
        return len(self.cells)

    def index(self, cell: str) -> int:
        return self.cells.index(cell)


@dataclass(frozen=True)
class EpistemicState:
    """Probability distribution over lambda cells, conditioned on a preparation."""

    space: LambdaSpace
    weights: tuple[float, ...]
    preparation_label: str

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        if len(self.weights) != self.space.size:
            raise ValueError("one weight per cell required")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > EPS_WEIGHT:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def support(self, threshold: float = 0.0) -> list[str]:
        return [c for c, w in zip(self.space.cells, self.weights) if w > threshold]


def support_overlap(e1: EpistemicState, e2: EpistemicState) -> tuple[float, bool]:
    """Overlap mass sum_cell min(w1, w2) and a disjointness verdict.

    Disjoint means no cell carries weight under both distributions beyond
    numerical residue (threshold 1e-12 times the largest weight involved).
    """
    if e1.space != e2.space:
        raise SpaceMismatchError("epistemic states live on different lambda spaces")
    w1, w2 = e1.as_array(), e2.as_array()
    overlap_mass = float(np.minimum(w1, w2).sum())
    tau = EPS_WEIGHT * max(w1.max(), w2.max())
    disjoint = not bool(np.any(w1 * w2 > tau))
    return overlap_mass, disjoint


def _norm_cell(cell) -> str | tuple[str, str]:
    if isinstance(cell, (tuple, list)):
        return tuple(str(c) for c in cell)
    return str(cell)


def _norm_prep(prep) -> str | tuple[str, str] | None:
    if prep is None:
        return None
    if isinstance(prep, (tuple, list)):
        return tuple(str(p) for p in prep)
    return str(prep)


class ResponseFunction:
    """Outcome-probability table keyed by (setting, cell) or (setting, cell, prep).

    kind "noncontextual": rows may not depend on the preparing state and
    preparation-keyed lookups are rejected.  kind "contextual": every row is
    keyed by the preparation as well.
    """

    KINDS = ("noncontextual", "contextual")

    def __init__(self, kind: str):
        if kind not in self.KINDS:
            raise ValueError(f"kind must be one of {self.KINDS}")
        self.kind = kind
        self._table: dict[tuple, np.ndarray] = {}

    def _key(self, setting: str, cell, prep) -> tuple:
        cell = _norm_cell(cell)
        prep = _norm_prep(prep)
        if self.kind == "noncontextual" and prep is not None:
            raise KeyError("non-contextual response rejects preparation-keyed access")
        if self.kind == "contextual" and prep is None:
            raise KeyError("contextual response requires a preparation key")
        return (str(setting), cell, prep)

    def set_row(self, setting: str, cell, probs, prep=None, validate: bool = True):
        row = np.asarray(probs, dtype=float)
        if validate:
            if np.any(row < 0):
                raise ValueError("outcome probabilities must be non-negative")
            if abs(row.sum() - 1.0) > EPS_WEIGHT:
                raise ValueError(f"outcome probabilities must sum to 1, got {row.sum()!r}")
        self._table[self._key(setting, cell, prep)] = row

    def row(self, setting: str, cell, prep=None) -> np.ndarray:
        key = self._key(setting, cell, prep)
        try:
            return self._table[key]
        except KeyError:
            raise KeyError(f"no response row for setting={setting!r}, cell={key[1]!r}, prep={key[2]!r}")

    def has_row(self, setting: str, cell, prep=None) -> bool:
        try:
            return self._key(setting, cell, prep) in self._table
        except KeyError:
            return False

    def entries(self):
        for (setting, cell, prep), row in self._table.items():
            yield setting, cell, prep, row


@dataclass(frozen=True)
class OntologicalModel:
    """Full hidden-variable model: lambda space, epistemic states, response."""

    space: LambdaSpace
    epistemic: Mapping[str, EpistemicState]
    response: ResponseFunction

    def __post_init__(self):
        for e in self.epistemic.values():
            if e.space != self.space:
                raise SpaceMismatchError("all epistemic states must share the model's lambda space")


@dataclass(frozen=True)
class ContradictionCertificate:
    """Witness that a shared cell cannot carry a normalized response row."""

    cell: str
    weight1: float
    weight2: float
    forced_zero_outcomes: tuple[int, ...]
    normalization_deficit: float


def predicted_probability(model: OntologicalModel, preparation: str, setting: str) -> np.ndarray:
    """Outcome distribution sum_cell P(outcome | setting, cell[, prep]) * w(cell)."""
    epi = model.epistemic[preparation]
    prep = preparation if model.response.kind == "contextual" else None
    acc = None
    for cell, w in zip(model.space.cells, epi.weights):
        if w <= 0.0:
            continue
        try:
            row = model.response.row(setting, cell, prep)
        except KeyError:
            raise KeyError(f"populated cell {cell!r} has no response row for setting {setting!r}")
        acc = w * row if acc is None else acc + w * row
    if acc is None:
        raise ValueError(f"preparation {preparation!r} has empty support")
    return acc


def product_predicted_probability(
    model: OntologicalModel, prep_a: str, prep_b: str, joint_setting: str
) -> np.ndarray:
    """Joint-outcome distribution under preparation independence.

    The pair weight is the product w_a(cell) * w_b(cell'), i.e. independently
    prepared subsystems carry independent hidden variables.
    """
    ea, eb = model.epistemic[prep_a], model.epistemic[prep_b]
    prep = (prep_a, prep_b) if model.response.kind == "contextual" else None
    acc = None
    for cell_a, wa in zip(model.space.cells, ea.weights):
        if wa <= 0.0:
            continue
        for cell_b, wb in zip(model.space.cells, eb.weights):
            if wb <= 0.0:
                continue
            try:
                row = model.response.row(joint_setting, (cell_a, cell_b), prep)
            except KeyError:
                raise KeyError(
                    f"populated cell pair ({cell_a!r}, {cell_b!r}) has no joint response row"
                )
            acc = wa * wb * row if acc is None else acc + wa * wb * row
    if acc is None:
        raise ValueError("both preparations must have non-empty support")
    return acc


def pbr_overlap_audit(
    model: OntologicalModel, prep1: str, prep2: str, joint_setting: str
) -> ContradictionCertificate | None:
    """Check whether overlapping supports are compatible with the model's zeros.

    Returns None when the two supports are disjoint (nothing to object to).
    When a cell is shared and the model's joint predictions put zero
    probability on some outcome for each preparation pair, every joint
    outcome at the shared cell pair is forced to zero while the row must sum
    to one: that impossibility is returned as a certificate.

    Preparation-dependent responses are rejected outright; for them the
    forcing argument has no purchase.
    """
    if model.response.kind == "contextual":
        raise AuditInapplicableError(
            "audit inapplicable: response depends on the preparing state"
        )
    e1, e2 = model.epistemic[prep1], model.epistemic[prep2]
    w1, w2 = e1.as_array(), e2.as_array()
    tau = EPS_WEIGHT * max(w1.max(), w2.max())
    shared = np.flatnonzero(w1 * w2 > tau)
    if shared.size == 0:
        return None

    idx = int(shared[0])
    cell = model.space.cells[idx]
    pairs = [(prep1, prep1), (prep1, prep2), (prep2, prep1), (prep2, prep2)]
    forced: dict[int, float] = {}
    n_outcomes = None
    for pa, pb in pairs:
        predicted = product_predicted_probability(model, pa, pb, joint_setting)
        n_outcomes = len(predicted)
        wa = model.epistemic[pa].weights[idx]
        wb = model.epistemic[pb].weights[idx]
        for i, p in enumerate(predicted):
            if p < ZERO_TOL:
                # All summands are non-negative, so the row entry at the
                # shared cell pair is bounded by p / (wa * wb).
                bound = float(p) / (wa * wb)
                forced[i] = min(forced.get(i, np.inf), bound)

    if n_outcomes is None or len(forced) < n_outcomes:
        return None
    deficit = 1.0 - sum(forced.values())
    return ContradictionCertificate(
        cell=cell,
        weight1=float(w1[idx]),
        weight2=float(w2[idx]),
        forced_zero_outcomes=tuple(sorted(forced)),
        normalization_deficit=deficit,
    )


def make_segregated_model(
    preparations: Sequence[tuple[str, "Ket"]], bases: Sequence["MeasurementBasis"]
) -> OntologicalModel:
    """One lambda cell per preparation, point-mass epistemic states.

    The response simply replays the Born rule of the cell's own state, so the
    model reproduces quantum statistics exactly with pairwise-disjoint
    supports.  Bases whose dimension is the square of the preparation
    dimension are registered as joint settings over ordered cell pairs.
    """
    from .qstate import born_probabilities, tensor

    labels = [label for label, _ in preparations]
    if len(set(labels)) != len(labels):
        raise ValueError("preparation labels must be unique")
    kets = dict(preparations)
    dim = preparations[0][1].dim

    space = LambdaSpace(tuple(labels))
    n = space.size
    epistemic = {}
    for i, label in enumerate(labels):
        weights = [0.0] * n
        weights[i] = 1.0
        epistemic[label] = EpistemicState(space, tuple(weights), label)

    response = ResponseFunction("noncontextual")
    for basis in bases:
        if basis.dim == dim:
            for label in labels:
                response.set_row(basis.label, label, born_probabilities(basis, kets[label]))
        elif basis.dim == dim * dim:
            for la in labels:
                for lb in labels:
                    probs = born_probabilities(basis, tensor(kets[la], kets[lb]))
                    response.set_row(basis.label, (la, lb), probs)
        else:
            raise ValueError(
                f"basis {basis.label!r} has dim {basis.dim}, expected {dim} or {dim * dim}"
            )
    return OntologicalModel(space, epistemic, response)


def make_bohmian_discrete_model(
    ensembles: Mapping[str, "TrajectoryEnsemble"],
    outcome_of: Callable[[float], str],
    bins: int,
    setting: str = "exit",
) -> OntologicalModel:
    """Discretize trajectory ensembles into a contextual hidden-variable model.

    Lambda cells are bins over initial positions; the epistemic state of each
    preparation is its bin-occupation histogram and the response row for
    (bin, preparation) is the empirical outcome frequency among samples that
    started in that bin.  Determinism (rows equal to 0 or 1) emerges in the
    fine-bin limit away from bin boundaries.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    x_lo = min(e.x_min for e in ensembles.values())
    x_hi = max(e.x_max for e in ensembles.values())
    edges = np.linspace(x_lo, x_hi, bins + 1)
    cells = tuple(f"bin{i:03d}" for i in range(bins))
    space = LambdaSpace(cells)

    outcome_labels = sorted(
        {outcome_of(x) for e in ensembles.values() for x in e.final_positions()}
    )
    out_index = {o: i for i, o in enumerate(outcome_labels)}

    response = ResponseFunction("contextual")
    epistemic = {}
    for prep, ens in ensembles.items():
        x0 = np.asarray(ens.initial_positions, dtype=float)
        finals = ens.final_positions()
        bin_of = np.clip(np.searchsorted(edges, x0, side="right") - 1, 0, bins - 1)
        counts = np.bincount(bin_of, minlength=bins).astype(float)
        epistemic[prep] = EpistemicState(space, tuple(counts / counts.sum()), prep)
        for b in range(bins):
            mask = bin_of == b
            if not np.any(mask):
                continue
            row = np.zeros(len(outcome_labels))
            for xf in finals[mask]:
                row[out_index[outcome_of(xf)]] += 1.0
            response.set_row(setting, cells[b], row / row.sum(), prep=prep)

    model = OntologicalModel(space, epistemic, response)
    # Stash the outcome ordering so callers can name columns.
    object.__setattr__(model, "outcome_labels", tuple(outcome_labels))
    return model


def model_to_json(model: OntologicalModel) -> str:
    """Serialize to the documented interchange schema."""
    entries = []
    for setting, cell, prep, row in model.response.entries():
        entry = {
            "setting": setting,
            "cell": list(cell) if isinstance(cell, tuple) else cell,
            "probs": [float(p) for p in row],
        }
        if prep is not None:
            entry["prep"] = list(prep) if isinstance(prep, tuple) else prep
        entries.append(entry)
    doc = {
        "cells": list(model.space.cells),
        "epistemic": {label: [float(w) for w in e.weights] for label, e in model.epistemic.items()},
        "response": {"kind": model.response.kind, "entries": entries},
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def model_from_json(text: str, validate_rows: bool = True) -> OntologicalModel:
    """Parse the interchange schema produced by model_to_json.

    validate_rows=False admits deliberately inconsistent rows (e.g. the
    all-zero rows used to exercise the overlap audit).
    """
    doc = json.loads(text)
    for key in ("cells", "epistemic", "response"):
        if key not in doc:
            raise ValueError(f"model document missing field {key!r}")
    space = LambdaSpace(tuple(doc["cells"]))
    epistemic = {
        label: EpistemicState(space, tuple(weights), label)
        for label, weights in doc["epistemic"].items()
    }
    resp_doc = doc["response"]
    response = ResponseFunction(resp_doc["kind"])
    for entry in resp_doc["entries"]:
        response.set_row(
            entry["setting"],
            _norm_cell(entry["cell"]),
            entry["probs"],
            prep=_norm_prep(entry.get("prep")),
            validate=validate_rows,
        )
    return OntologicalModel(space, epistemic, response)
