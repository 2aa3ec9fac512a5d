"""Hidden-variable framework: segregated oracle, audit soundness, JSON roundtrip."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpilot.ontomodel import (
    AuditInapplicableError,
    ContradictionCertificate,
    EpistemicState,
    LambdaSpace,
    OntologicalModel,
    ResponseFunction,
    SpaceMismatchError,
    make_segregated_model,
    model_from_json,
    model_to_json,
    pbr_overlap_audit,
    predicted_probability,
    product_predicted_probability,
    support_overlap,
)
from qpilot.qstate import basis_ket, born_probabilities, computational_basis, ket, tensor


@pytest.fixture()
def space():
    return LambdaSpace(("a", "b", "c"))


class TestEpistemicState:
    def test_valid(self, space):
        e = EpistemicState(space, (0.5, 0.5, 0.0), "p")
        assert e.support() == ["a", "b"]

    def test_negative_rejected(self, space):
        with pytest.raises(ValueError):
            EpistemicState(space, (1.5, -0.5, 0.0), "p")

    def test_unnormalized_rejected(self, space):
        with pytest.raises(ValueError):
            EpistemicState(space, (0.5, 0.4, 0.0), "p")

    def test_wrong_length_rejected(self, space):
        with pytest.raises(ValueError):
            EpistemicState(space, (1.0,), "p")


class TestSupportOverlap:
    def test_point_masses_disjoint(self, space):
        e1 = EpistemicState(space, (1.0, 0.0, 0.0), "p1")
        e2 = EpistemicState(space, (0.0, 1.0, 0.0), "p2")
        mass, disjoint = support_overlap(e1, e2)
        assert mass == 0.0
        assert disjoint

    def test_overlap_mass_oracle(self, space):
        e1 = EpistemicState(space, (0.6, 0.4, 0.0), "p1")
        e2 = EpistemicState(space, (0.1, 0.7, 0.2), "p2")
        mass, disjoint = support_overlap(e1, e2)
        assert mass == pytest.approx(0.5, abs=1e-15)  # min sums: 0.1 + 0.4 + 0
        assert not disjoint

    def test_identical_states_full_overlap(self, space):
        e = EpistemicState(space, (0.2, 0.3, 0.5), "p")
        mass, disjoint = support_overlap(e, e)
        assert mass == pytest.approx(1.0)
        assert not disjoint

    def test_space_mismatch(self, space):
        other = LambdaSpace(("x", "y"))
        with pytest.raises(SpaceMismatchError):
            support_overlap(
                EpistemicState(space, (1.0, 0.0, 0.0), "p"),
                EpistemicState(other, (1.0, 0.0), "q"),
            )

    def test_tiny_shared_weight_below_threshold(self, space):
        # A residue at 1e-16 of the max weight is numerical noise, not overlap.
        e1 = EpistemicState(space, (1.0 - 1e-16, 1e-16, 0.0), "p1")
        e2 = EpistemicState(space, (0.0, 1.0, 0.0), "p2")
        _, disjoint = support_overlap(e1, e2)
        assert disjoint


class TestResponseFunction:
    def test_noncontextual_rejects_prep_key(self):
        r = ResponseFunction("noncontextual")
        with pytest.raises(KeyError):
            r.set_row("s", "a", [1.0, 0.0], prep="p")

    def test_contextual_requires_prep_key(self):
        r = ResponseFunction("contextual")
        with pytest.raises(KeyError):
            r.set_row("s", "a", [1.0, 0.0])

    def test_row_validation(self):
        r = ResponseFunction("noncontextual")
        with pytest.raises(ValueError):
            r.set_row("s", "a", [0.5, 0.4])
        with pytest.raises(ValueError):
            r.set_row("s", "a", [1.5, -0.5])
        r.set_row("s", "a", [0.0, 0.0], validate=False)  # escape hatch
        assert r.row("s", "a").sum() == 0.0

    def test_missing_row_message(self):
        r = ResponseFunction("noncontextual")
        with pytest.raises(KeyError, match="no response row"):
            r.row("s", "nope")


def two_prep_model(kind: str = "noncontextual") -> OntologicalModel:
    space = LambdaSpace(("a", "b"))
    e1 = EpistemicState(space, (0.75, 0.25), "p1")
    e2 = EpistemicState(space, (0.25, 0.75), "p2")
    r = ResponseFunction(kind)
    rows = {"a": [0.9, 0.1], "b": [0.2, 0.8]}
    for cell, row in rows.items():
        if kind == "noncontextual":
            r.set_row("m", cell, row)
        else:
            for prep in ("p1", "p2"):
                r.set_row("m", cell, row, prep=prep)
    return OntologicalModel(space, {"p1": e1, "p2": e2}, r)


class TestPrediction:
    def test_predicted_probability_hand_sum(self):
        model = two_prep_model()
        p = predicted_probability(model, "p1", "m")
        # 0.75*[0.9,0.1] + 0.25*[0.2,0.8]
        assert p == pytest.approx([0.725, 0.275], abs=1e-15)

    def test_product_prediction_hand_sum(self):
        space = LambdaSpace(("a", "b"))
        e1 = EpistemicState(space, (1.0, 0.0), "p1")
        e2 = EpistemicState(space, (0.5, 0.5), "p2")
        r = ResponseFunction("noncontextual")
        r.set_row("joint", ("a", "a"), [1.0, 0.0])
        r.set_row("joint", ("a", "b"), [0.0, 1.0])
        model = OntologicalModel(space, {"p1": e1, "p2": e2}, r)
        p = product_predicted_probability(model, "p1", "p2", "joint")
        assert p == pytest.approx([0.5, 0.5], abs=1e-15)

    def test_missing_populated_row_raises(self):
        space = LambdaSpace(("a", "b"))
        e = EpistemicState(space, (0.5, 0.5), "p")
        r = ResponseFunction("noncontextual")
        r.set_row("m", "a", [1.0, 0.0])
        model = OntologicalModel(space, {"p": e}, r)
        with pytest.raises(KeyError, match="populated cell"):
            predicted_probability(model, "p", "m")


class TestSegregatedModel:
    def test_reproduces_born_statistics(self):
        psi1 = basis_ket(2, 0)
        psi2 = ket(1.0, 1.0)
        basis = computational_basis(2)
        model = make_segregated_model([("p1", psi1), ("p2", psi2)], [basis])
        for label, state in (("p1", psi1), ("p2", psi2)):
            assert predicted_probability(model, label, "computational") == pytest.approx(
                born_probabilities(basis, state), abs=1e-14
            )

    def test_joint_basis_rows(self):
        psi1 = basis_ket(2, 0)
        psi2 = ket(1.0, 1.0)
        basis = computational_basis(4, label="joint4")
        model = make_segregated_model([("p1", psi1), ("p2", psi2)], [basis])
        got = product_predicted_probability(model, "p1", "p2", "joint4")
        want = born_probabilities(basis, tensor(psi1, psi2))
        assert got == pytest.approx(want, abs=1e-14)

    def test_supports_disjoint(self):
        model = make_segregated_model(
            [("p1", basis_ket(2, 0)), ("p2", ket(1.0, 1.0))], []
        )
        _, disjoint = support_overlap(model.epistemic["p1"], model.epistemic["p2"])
        assert disjoint

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError):
            make_segregated_model([("p", basis_ket(2, 0)), ("p", basis_ket(2, 1))], [])


def overlap_contradiction_model() -> OntologicalModel:
    """Single shared cell whose joint row is all zeros: maximally contradictory."""
    space = LambdaSpace(("shared",))
    e1 = EpistemicState(space, (1.0,), "p1")
    e2 = EpistemicState(space, (1.0,), "p2")
    r = ResponseFunction("noncontextual")
    r.set_row("joint", ("shared", "shared"), [0.0, 0.0, 0.0, 0.0], validate=False)
    return OntologicalModel(space, {"p1": e1, "p2": e2}, r)


class TestOverlapAudit:
    def test_disjoint_supports_pass(self):
        model = make_segregated_model(
            [("p1", basis_ket(2, 0)), ("p2", ket(1.0, 1.0))],
            [computational_basis(4, label="joint")],
        )
        assert pbr_overlap_audit(model, "p1", "p2", "joint") is None

    def test_contextual_rejected(self):
        model = two_prep_model("contextual")
        with pytest.raises(AuditInapplicableError):
            pbr_overlap_audit(model, "p1", "p2", "m")

    def test_shared_cell_with_forced_zeros_certified(self):
        cert = pbr_overlap_audit(overlap_contradiction_model(), "p1", "p2", "joint")
        assert isinstance(cert, ContradictionCertificate)
        assert cert.cell == "shared"
        assert cert.forced_zero_outcomes == (0, 1, 2, 3)
        assert cert.normalization_deficit == pytest.approx(1.0, abs=1e-9)

    def test_overlap_without_forced_zeros_passes(self):
        # Shared support but a uniform joint row: nothing is forced to zero.
        space = LambdaSpace(("shared",))
        e1 = EpistemicState(space, (1.0,), "p1")
        e2 = EpistemicState(space, (1.0,), "p2")
        r = ResponseFunction("noncontextual")
        r.set_row("joint", ("shared", "shared"), [0.25, 0.25, 0.25, 0.25])
        model = OntologicalModel(space, {"p1": e1, "p2": e2}, r)
        assert pbr_overlap_audit(model, "p1", "p2", "joint") is None

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_certificate_soundness_random_models(self, seed):
        # Whenever the audit certifies, the certified cell really is shared and
        # the forced bound follows from the model's own predictions.
        rng = np.random.default_rng(seed)
        space = LambdaSpace(("a", "b"))
        w1 = rng.dirichlet((1.0, 1.0))
        w2 = rng.dirichlet((1.0, 1.0))
        e1 = EpistemicState(space, tuple(w1), "p1")
        e2 = EpistemicState(space, tuple(w2), "p2")
        r = ResponseFunction("noncontextual")
        for ca in space.cells:
            for cb in space.cells:
                row = rng.dirichlet((1.0,) * 4)
                if rng.random() < 0.5:
                    row = np.zeros(4)
                r.set_row("joint", (ca, cb), row, validate=False)
        model = OntologicalModel(space, {"p1": e1, "p2": e2}, r)
        cert = pbr_overlap_audit(model, "p1", "p2", "joint")
        if cert is not None:
            i = space.index(cert.cell)
            assert w1[i] * w2[i] > 0
            assert len(cert.forced_zero_outcomes) == 4
            assert cert.normalization_deficit > 0.5


class TestJsonRoundtrip:
    def test_roundtrip_noncontextual(self):
        model = make_segregated_model(
            [("p1", basis_ket(2, 0)), ("p2", ket(1.0, 1.0))],
            [computational_basis(2), computational_basis(4, label="joint")],
        )
        text = model_to_json(model)
        back = model_from_json(text)
        assert back.space == model.space
        for label in ("p1", "p2"):
            assert back.epistemic[label].weights == model.epistemic[label].weights
        assert model_to_json(back) == text

    def test_roundtrip_contextual(self):
        model = two_prep_model("contextual")
        back = model_from_json(model_to_json(model))
        assert back.response.kind == "contextual"
        assert predicted_probability(back, "p1", "m") == pytest.approx(
            predicted_probability(model, "p1", "m"), abs=1e-15
        )

    def test_missing_field_rejected(self):
        with pytest.raises(ValueError, match="missing field"):
            model_from_json(json.dumps({"cells": ["a"], "epistemic": {}}))

    def test_invalid_rows_rejected_by_default(self):
        doc = {
            "cells": ["a"],
            "epistemic": {"p": [1.0]},
            "response": {
                "kind": "noncontextual",
                "entries": [{"setting": "s", "cell": "a", "probs": [0.0, 0.0]}],
            },
        }
        with pytest.raises(ValueError):
            model_from_json(json.dumps(doc))
        model = model_from_json(json.dumps(doc), validate_rows=False)
        assert model.response.row("s", "a").sum() == 0.0
