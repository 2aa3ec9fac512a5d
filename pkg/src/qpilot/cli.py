"""Command-line front end.

Subcommands: pbr, beamsplitter, epr, fields.  Every run is driven by a JSON
config with a version field; unknown fields are rejected so published runs
stay reproducible.  Exit codes: 0 success, 2 config error, 3 overlap
contradiction found, 4 numerical or statistical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONTRADICTION = 3
EXIT_NUMERICAL = 4


class ConfigError(ValueError):
    pass


def _load_config(path: str, allowed: set[str], required: set[str]) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in config: {exc}")
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    missing = required - set(doc)
    if missing:
        raise ConfigError(f"missing config field(s): {', '.join(sorted(missing))}")
    if doc.get("version") != 1:
        raise ConfigError("config field 'version' must be 1")
    return doc


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(v) -> str:
    return repr(float(v))


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------- pbr


def cmd_pbr(config_path: str, out_dir: Path, seed: int | None) -> int:
    from .ontomodel import model_from_json
    from .pbr_scenario import run_pbr_demo

    cfg = _load_config(
        config_path,
        allowed={"version", "model", "model_file", "allow_unnormalized_rows"},
        required={"version"},
    )
    if ("model" in cfg) == ("model_file" in cfg):
        raise ConfigError("exactly one of 'model' / 'model_file' is required")
    validate_rows = not cfg.get("allow_unnormalized_rows", False)
    if "model" in cfg:
        text = json.dumps(cfg["model"])
    else:
        model_path = Path(config_path).parent / cfg["model_file"]
        try:
            text = model_path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read model_file: {exc}")
    try:
        model = model_from_json(text, validate_rows=validate_rows)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid model document: {exc}")

    try:
        report = run_pbr_demo(model)
    except KeyError as exc:
        raise ConfigError(f"model incomplete for the scenario: {exc}")
    _write_json(out_dir / "pbr_report.json", report)
    if report["audit"]["status"] == "contradiction":
        return EXIT_CONTRADICTION
    return EXIT_OK


# ---------------------------------------------------------------- beamsplitter


def _grid_from_cfg(doc: dict):
    from .pilotwave import Grid1D

    required = {"x_min", "x_max", "n", "dt"}
    if set(doc) != required:
        raise ConfigError(f"grid must have exactly the fields {sorted(required)}")
    try:
        return Grid1D(float(doc["x_min"]), float(doc["x_max"]), int(doc["n"]), float(doc["dt"]))
    except ValueError as exc:
        raise ConfigError(f"invalid grid: {exc}")


def _fields_rows(history, hbar: float = 1.0, m: float = 1.0):
    """CSV rows (t, x, rho, J, v, E) for each stored slice.

    E is differenced over one native dt (each slice against itself advanced
    a single step), not over the storage cadence.
    """
    from .pilotwave import (
        bohmian_energy,
        density,
        probability_current,
        velocity_field,
    )

    rows = []
    for psi, psi_next in history:
        x = psi.grid.x
        rho = density(psi)
        j = probability_current(psi, hbar=hbar, m=m)
        v = velocity_field(psi, hbar=hbar, m=m)
        e = bohmian_energy(psi, psi_next, hbar=hbar)
        for i in range(psi.grid.n):
            rows.append(
                (_fmt(psi.time), _fmt(x[i]), _fmt(rho[i]), _fmt(j[i]),
                 "" if np.isnan(v[i]) else _fmt(v[i]),
                 "" if np.isnan(e[i]) else _fmt(e[i]))
            )
    return rows


def cmd_beamsplitter(config_path: str, out_dir: Path, seed: int | None) -> int:
    from .pilotwave import (
        BeamSplitterParams,
        NormDriftError,
        PacketsNotClearedError,
        SplitStepEvolver,
        evolve_history,
        initial_state,
        run_beam_splitter_suite,
    )

    cfg = _load_config(
        config_path,
        allowed={"version", "grid", "packet", "barrier", "samples", "seed",
                 "t_final", "bins", "store_every"},
        required={"version", "grid", "packet", "samples", "seed"},
    )
    grid = _grid_from_cfg(cfg["grid"])
    packet = cfg["packet"]
    if set(packet) != {"x0", "sigma", "k0"}:
        raise ConfigError("packet must have exactly the fields ['k0', 'sigma', 'x0']")
    barrier_cfg = cfg.get("barrier", {"g": "auto"})
    if set(barrier_cfg) != {"g"}:
        raise ConfigError("barrier must have exactly the field 'g'")
    g = barrier_cfg["g"]
    t_final = cfg.get("t_final", "auto")
    try:
        params = BeamSplitterParams(
            grid=grid,
            x0=float(packet["x0"]),
            sigma=float(packet["sigma"]),
            k0=float(packet["k0"]),
            n_samples=int(cfg["samples"]),
            seed=int(seed if seed is not None else cfg["seed"]),
            t_final=None if t_final == "auto" else float(t_final),
            bins=int(cfg.get("bins", 50)),
            store_every=int(cfg.get("store_every", 50)),
            barrier_strength=None if g == "auto" else float(g),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))

    try:
        suite = run_beam_splitter_suite(params)
    except (NormDriftError, PacketsNotClearedError, ValueError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    results = suite["results"]
    checks = beam_splitter_checks(suite)
    summary = {
        "params": {
            "grid": {"x_min": grid.x_min, "x_max": grid.x_max, "n": grid.n, "dt": grid.dt},
            "packet": {"x0": params.x0, "sigma": params.sigma, "k0": params.k0},
            "samples": params.n_samples,
            "seed": params.seed,
            "t_final": params.run_time,
            "barrier_g": params.barrier().strength,
        },
        "probabilities": {
            kind: {"P3_wave": r.p3_wave, "P4_wave": r.p4_wave,
                   "P3_traj": r.p3_traj, "P4_traj": r.p4_traj}
            for kind, r in results.items()
        },
        "residual_center_mass": {kind: r.residual_center_mass for kind, r in results.items()},
        "density_overlaps": suite["density_overlaps"],
        "lambda_overlap_plus_minus": suite["lambda_overlap_plus_minus"],
        "lambda_overlap_gate1_gate2": suite["lambda_overlap_gate1_gate2"],
        "checks": checks,
    }
    _write_json(out_dir / "summary.json", summary)

    barrier = params.barrier()
    steps = int(round(params.run_time / grid.dt))
    field_cadence = max(1, steps // 8)
    evolver = SplitStepEvolver(grid, barrier)
    for kind, r in results.items():
        ens = r.ensemble
        rows = []
        for j, t in enumerate(ens.times):
            for s in range(ens.n_samples):
                rows.append((str(s), _fmt(t), _fmt(ens.paths[s, j])))
        _write_csv(out_dir / kind / "trajectories.csv", ["sample", "t", "x"], rows)

        history = evolve_history(r.initial_wave, barrier, steps, store_every=field_cadence)
        pairs = [(p, evolver.advance(p, 1)) for p in history]
        _write_csv(out_dir / kind / "fields.csv",
                   ["t", "x", "rho", "J", "v", "E"], _fields_rows(pairs))

    return EXIT_OK if all(checks.values()) else EXIT_NUMERICAL


def beam_splitter_checks(suite: dict) -> dict:
    """The invariant gates that decide the beamsplitter exit code."""
    results = suite["results"]
    checks = {
        "gate1_half": abs(results["gate1"].p3_wave - 0.5) <= 0.02,
        "gate2_half": abs(results["gate2"].p3_wave - 0.5) <= 0.02,
        "plus_exit3": results["plus"].p3_wave >= 0.98,
        "minus_exit4": results["minus"].p4_wave >= 0.98,
        "lambda_overlap_plus_minus": suite["lambda_overlap_plus_minus"] >= 0.95,
        "lambda_overlap_gates_disjoint": suite["lambda_overlap_gate1_gate2"] <= 0.01,
    }
    for kind, r in results.items():
        n = r.ensemble.n_samples
        p = r.p3_wave
        band = 3.0 * np.sqrt(max(p * (1 - p), 1.0 / n) / n)
        checks[f"{kind}_traj_matches_wave"] = abs(r.p3_traj - p) <= max(band, 3.0 / n)
    return {k: bool(v) for k, v in checks.items()}


# ---------------------------------------------------------------- epr


def cmd_epr(config_path: str, out_dir: Path, seed: int | None) -> int:
    from .epr_bell import (
        SpinSetting,
        chsh,
        correlator,
        factorization_dependence_report,
        sample_joint_counts,
        singlet_joint,
    )

    cfg = _load_config(
        config_path,
        allowed={"version", "angles", "n", "seed", "gap_pair", "chsh_band"},
        required={"version", "angles", "n", "seed"},
    )
    angles = cfg["angles"]
    if set(angles) != {"a", "a'", "b", "b'"}:
        raise ConfigError("angles must have exactly the keys a, a', b, b'")
    settings = {k: SpinSetting(float(v), k) for k, v in angles.items()}
    n = int(cfg["n"])
    run_seed = int(seed if seed is not None else cfg["seed"])
    band = cfg.get("chsh_band", [2 * np.sqrt(2) - 0.05, 2 * np.sqrt(2) + 0.05])

    pairs = {
        "ab": (settings["a"], settings["b"]),
        "ab'": (settings["a"], settings["b'"]),
        "a'b": (settings["a'"], settings["b"]),
        "a'b'": (settings["a'"], settings["b'"]),
    }
    rng = np.random.default_rng(run_seed)
    exact_corr, sampled_corr = {}, {}
    count_rows = []
    for key, (sa, sb) in pairs.items():
        exact_corr[key] = correlator(singlet_joint(sa, sb))
        counts = sample_joint_counts(sa, sb, n, rng)
        sampled_corr[key] = sum(al * be * c for (al, be), c in counts.items()) / n
        for (al, be), c in sorted(counts.items()):
            count_rows.append((_fmt(sa.angle), _fmt(sb.angle), str(al), str(be), str(c)))

    gap_cfg = cfg.get("gap_pair", {"a": 0.0, "b": float(np.pi / 4)})
    try:
        gap_report = factorization_dependence_report(
            n, run_seed + 1,
            a=SpinSetting(float(gap_cfg["a"]), "a"),
            b=SpinSetting(float(gap_cfg["b"]), "b"),
        )
    except ValueError as exc:
        print(f"statistical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    s_exact = chsh(exact_corr)
    s_sampled = chsh(sampled_corr)
    summary = {
        "angles": {k: settings[k].angle for k in settings},
        "n": n,
        "seed": run_seed,
        "correlators_exact": exact_corr,
        "correlators_sampled": sampled_corr,
        "chsh_exact": s_exact,
        "chsh_sampled": s_sampled,
        "chsh_band": [float(band[0]), float(band[1])],
        "dependence_gap": gap_report,
    }
    _write_json(out_dir / "epr_summary.json", summary)
    _write_csv(out_dir / "epr_counts.csv", ["a", "b", "alpha", "beta", "count"], count_rows)

    if not (band[0] <= abs(s_sampled) <= band[1]):
        print(
            f"statistical failure: sampled CHSH {s_sampled:.4f} outside band {band}",
            file=sys.stderr,
        )
        return EXIT_NUMERICAL
    return EXIT_OK


# ---------------------------------------------------------------- fields


def cmd_fields(config_path: str, out_dir: Path, seed: int | None) -> int:
    from .pilotwave import (
        DeltaBarrier,
        NormDriftError,
        SplitStepEvolver,
        continuity_residual,
        evolve_history,
        gaussian_packet,
        velocity_field,
        velocity_field_weak_value,
    )
    from .pilotwave.boxstates import box_eigenstate, box_superposition

    cfg = _load_config(
        config_path,
        allowed={"version", "grid", "state", "barrier", "t_final", "store_every",
                 "residual_max"},
        required={"version", "grid", "state", "t_final"},
    )
    grid = _grid_from_cfg(cfg["grid"])
    state = dict(cfg["state"])
    kind = state.pop("kind", None)
    store_every = int(cfg.get("store_every", 20))
    t_final = float(cfg["t_final"])
    steps = int(round(t_final / grid.dt))
    residual_max = float(cfg.get("residual_max", 1e-3))

    barrier_cfg = cfg.get("barrier")
    barrier = None
    if barrier_cfg is not None:
        if set(barrier_cfg) != {"g"}:
            raise ConfigError("barrier must have exactly the field 'g'")
        if barrier_cfg["g"] != "auto":
            barrier = DeltaBarrier(float(barrier_cfg["g"]))
        elif kind == "gaussian":
            from .pilotwave import calibrate_delta_barrier

            barrier = DeltaBarrier(calibrate_delta_barrier(float(state["k0"])))
        else:
            raise ConfigError("barrier 'auto' needs a gaussian state with k0")

    try:
        if kind == "gaussian":
            if set(state) != {"x0", "sigma", "k0"}:
                raise ConfigError("gaussian state needs exactly x0, sigma, k0")
            psi0 = gaussian_packet(grid, float(state["x0"]), float(state["sigma"]),
                                   float(state["k0"]))
            history = evolve_history(psi0, barrier, steps, store_every=store_every)
            evolver = SplitStepEvolver(grid, barrier)
            pairs = [(p, evolver.advance(p, 1)) for p in history]
        elif kind in ("box_eigenstate", "box_superposition"):
            times = [grid.dt * store_every * j for j in range(steps // store_every + 1)]
            if kind == "box_eigenstate":
                if set(state) != {"left", "right", "n_level"}:
                    raise ConfigError("box_eigenstate needs exactly left, right, n_level")
                make = lambda t: box_eigenstate(grid, float(state["left"]),
                                                float(state["right"]),
                                                int(state["n_level"]), t)
            else:
                if set(state) != {"left", "right", "n1", "n2"}:
                    raise ConfigError("box_superposition needs exactly left, right, n1, n2")
                make = lambda t: box_superposition(grid, float(state["left"]),
                                                   float(state["right"]),
                                                   int(state["n1"]), int(state["n2"]), t)
            history = [make(t) for t in times]
            pairs = [(p, make(p.time + grid.dt)) for p in history]
        else:
            raise ConfigError(f"unknown state kind {kind!r}")
    except NormDriftError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        raise ConfigError(str(exc))

    _write_csv(out_dir / "fields.csv", ["t", "x", "rho", "J", "v", "E"], _fields_rows(pairs))

    residual = continuity_residual(history) if len(history) >= 3 else 0.0
    identity_ok = True
    for p, _ in pairs:
        v1 = velocity_field(p)
        v2 = velocity_field_weak_value(p)
        mask = np.isfinite(v1) & np.isfinite(v2)
        if np.any(mask):
            rel = np.abs(v1[mask] - v2[mask]) / np.maximum(np.abs(v1[mask]), 1e-300)
            scale_ok = np.abs(v1[mask] - v2[mask]) <= 1e-9 * np.maximum(np.abs(v1[mask]), 1.0)
            if not np.all(scale_ok):
                identity_ok = False
    checks = {
        "continuity_residual": float(residual),
        "continuity_ok": bool(residual <= residual_max),
        "velocity_identity_ok": bool(identity_ok),
    }
    _write_json(out_dir / "fields_checks.json", checks)
    if not (checks["continuity_ok"] and checks["velocity_identity_ok"]):
        print("invariant failure:", checks, file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qpilot",
        description="Hidden-variable model auditing, pilot-wave beam-splitter "
                    "simulation, and Bell/CHSH verification runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("pbr", "beamsplitter", "epr", "fields"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")

    args = parser.parse_args(argv)
    out_dir = Path(args.out)
    handlers = {
        "pbr": cmd_pbr,
        "beamsplitter": cmd_beamsplitter,
        "epr": cmd_epr,
        "fields": cmd_fields,
    }
    try:
        return handlers[args.command](args.config, out_dir, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
