"""Singlet correlations, a two-step conditional sampler, and CHSH bounds.

The sampler realizes the decomposition P(beta, alpha) =
P(beta | alpha, b, a, lambda) * P(alpha | a, lambda) * rho(lambda): Alice's
outcome is fixed first from a setting-independent hidden variable, then
Bob's outcome is drawn from a conditional that explicitly depends on
Alice's outcome and setting.  Brute-force enumeration of deterministic
factorized assignments pins the local bound at 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .qstate import Ket, MeasurementBasis, born_probabilities, ket, tensor

OUTCOMES = (1, -1)


@dataclass(frozen=True)
class SpinSetting:
    """Analyzer direction in a fixed plane, identified by its angle."""

    angle: float
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % (2 * np.pi))


def spin_basis(setting: SpinSetting) -> MeasurementBasis:
    """Eigenbasis of the spin projection along the setting's direction."""
    half = setting.angle / 2
    up = Ket((np.cos(half), np.sin(half)))
    down = Ket((-np.sin(half), np.cos(half)))
    return MeasurementBasis((up, down), label=setting.label or f"angle={setting.angle:.6f}")


def singlet_ket() -> Ket:
    return ket(0.0, 1.0, -1.0, 0.0)


def singlet_joint(a: SpinSetting, b: SpinSetting) -> dict[tuple[int, int], float]:
    """Joint probabilities P(alpha, beta) of the singlet, via the Born rule.

    Equals (1 - alpha*beta*cos(a - b)) / 4 entrywise.
    """
    basis_a = spin_basis(a).vectors
    basis_b = spin_basis(b).vectors
    joint = MeasurementBasis(
        tuple(tensor(va, vb) for va in basis_a for vb in basis_b), label="joint"
    )
    probs = born_probabilities(joint, singlet_ket())
    table = {}
    for i, alpha in enumerate(OUTCOMES):
        for j, beta in enumerate(OUTCOMES):
            table[(alpha, beta)] = float(probs[2 * i + j])
    return table


def correlator(joint: dict[tuple[int, int], float]) -> float:
    """E(a, b) = sum alpha*beta*P(alpha, beta)."""
    return sum(alpha * beta * p for (alpha, beta), p in joint.items())


def two_step_sample(a: SpinSetting, b: SpinSetting, rng: np.random.Generator) -> tuple[int, int]:
    """Draw one (alpha, beta) pair through the two-step decomposition.

    lambda is uniform on [0, 1) and carries no setting dependence; alpha
    depends on lambda only; beta's conditional depends on alpha and both
    settings.
    """
    lam = rng.random()
    alpha = 1 if lam < 0.5 else -1
    p_beta_plus = conditional_beta_prob(1, alpha, a, b)
    beta = 1 if rng.random() < p_beta_plus else -1
    return alpha, beta


def conditional_beta_prob(beta: int, alpha: int, a: SpinSetting, b: SpinSetting) -> float:
    """P(beta | alpha, b, a) = (1 - alpha*beta*cos(a - b)) / 2."""
    return (1.0 - alpha * beta * np.cos(a.angle - b.angle)) / 2.0


def sample_joint_counts(
    a: SpinSetting, b: SpinSetting, n: int, rng: np.random.Generator
) -> dict[tuple[int, int], int]:
    """n two-step samples, vectorized; equivalent to looping two_step_sample."""
    lam = rng.random(n)
    alpha = np.where(lam < 0.5, 1, -1)
    p_plus = (1.0 - alpha * np.cos(a.angle - b.angle)) / 2.0
    beta = np.where(rng.random(n) < p_plus, 1, -1)
    return {
        (va, vb): int(np.sum((alpha == va) & (beta == vb)))
        for va in OUTCOMES
        for vb in OUTCOMES
    }


def chsh(correlators: dict[str, float]) -> float:
    """S = E(a,b) - E(a,b') + E(a',b) + E(a',b')."""
    return correlators["ab"] - correlators["ab'"] + correlators["a'b"] + correlators["a'b'"]


def chsh_optimal_settings() -> dict[str, SpinSetting]:
    """Angle choices at which the singlet reaches |S| = 2*sqrt(2)."""
    return {
        "a": SpinSetting(0.0, "a"),
        "a'": SpinSetting(np.pi / 2, "a'"),
        "b": SpinSetting(np.pi / 4, "b"),
        "b'": SpinSetting(3 * np.pi / 4, "b'"),
    }


def singlet_chsh(settings: dict[str, SpinSetting] | None = None) -> float:
    settings = settings or chsh_optimal_settings()
    pairs = {
        "ab": (settings["a"], settings["b"]),
        "ab'": (settings["a"], settings["b'"]),
        "a'b": (settings["a'"], settings["b"]),
        "a'b'": (settings["a'"], settings["b'"]),
    }
    return chsh({key: correlator(singlet_joint(sa, sb)) for key, (sa, sb) in pairs.items()})


def local_bound_bruteforce() -> float:
    """Max |S| over the 16 deterministic assignments; equals 2.

    Every factorized response-function model is a mixture of these
    assignments, so by convexity the bound covers them all.
    """
    best = 0.0
    for a0, a1, b0, b1 in product(OUTCOMES, repeat=4):
        s = a0 * b0 - a0 * b1 + a1 * b0 + a1 * b1
        best = max(best, abs(float(s)))
    return best


def deterministic_chsh_values() -> list[float]:
    """S for each of the 16 deterministic assignments."""
    return [
        float(a0 * b0 - a0 * b1 + a1 * b0 + a1 * b1)
        for a0, a1, b0, b1 in product(OUTCOMES, repeat=4)
    ]


def sampled_chsh(n: int, seed: int, settings: dict[str, SpinSetting] | None = None) -> float:
    """CHSH estimated from n two-step samples per setting pair."""
    settings = settings or chsh_optimal_settings()
    rng = np.random.default_rng(seed)
    pairs = {
        "ab": (settings["a"], settings["b"]),
        "ab'": (settings["a"], settings["b'"]),
        "a'b": (settings["a'"], settings["b"]),
        "a'b'": (settings["a'"], settings["b'"]),
    }
    est = {}
    for key, (sa, sb) in pairs.items():
        counts = sample_joint_counts(sa, sb, n, rng)
        est[key] = sum(alpha * beta * c for (alpha, beta), c in counts.items()) / n
    return chsh(est)


def factorization_dependence_report(n: int, seed: int,
                                    a: SpinSetting | None = None,
                                    b: SpinSetting | None = None) -> dict:
    """Estimate how strongly Bob's conditional depends on Alice's outcome.

    Reports the total-variation gap between P(beta | alpha=+1) and
    P(beta | alpha=-1) at the given settings (analytically |cos(a-b)|),
    plus the sampled CHSH against the local bound.
    """
    a = a or SpinSetting(0.0, "a")
    b = b if b is not None else SpinSetting(np.pi / 4, "b")
    rng = np.random.default_rng(seed)
    counts = sample_joint_counts(a, b, n, rng)

    conditionals = {}
    for alpha in OUTCOMES:
        total = counts[(alpha, 1)] + counts[(alpha, -1)]
        if total < 100:
            raise ValueError(
                f"only {total} samples with alpha={alpha}; too few for a conditional estimate"
            )
        conditionals[alpha] = {
            beta: counts[(alpha, beta)] / total for beta in OUTCOMES
        }
    gap = 0.5 * sum(
        abs(conditionals[1][beta] - conditionals[-1][beta]) for beta in OUTCOMES
    )
    return {
        "settings": {"a": a.angle, "b": b.angle},
        "n_samples": n,
        "conditional_beta_given_alpha": {
            str(alpha): {str(beta): p for beta, p in dist.items()}
            for alpha, dist in conditionals.items()
        },
        "dependence_gap": float(gap),
        "analytic_gap": float(abs(np.cos(a.angle - b.angle))),
        "sampled_chsh": float(sampled_chsh(n, seed + 1)),
        "local_bound": local_bound_bruteforce(),
    }
