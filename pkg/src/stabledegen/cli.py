"""Command-line front end: config ingestion, dispatch, deterministic artifacts.

Every command reads one JSON config, validates it fully before any
computation, and writes JSON (plus CSV time series where meaningful) into
the output directory together with a ``run.json`` manifest recording the
config hash, package version, and the pinned tolerances.  All numerics are
emitted as decimal strings with 17 significant digits and keys are sorted,
so identical configs produce byte-identical artifacts.

Exit codes: 0 success, 2 config error (no artifacts written), 3 numerical
failure (rank/conditioning/quadrature), 4 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, bergman, degeneration, differentials, surface_model
from .bergman import EpsilonProductConfig
from .differentials import NodalCurveModel, RankDeficiencyError

__all__ = ["main", "run_config"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INVARIANT = 4

#: pinned tolerances recorded in every manifest
TOLERANCES = {
    "sv_gap_target": 1.0e6,
    "gram_identity": 1.0e-8,
    "defect_floor": degeneration.DEFECT_FLOOR,
    "residue_radius_independence": 1.0e-11,
    "alignment_tolerance": 1.0e-3,
}

_FIXTURE_MODELS = {
    "two_self_node_sphere": differentials.two_self_node_sphere,
    "three_self_node_sphere": differentials.three_self_node_sphere,
    "dollar_sign_curve": differentials.dollar_sign_curve,
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# deterministic serialization
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{float(x):.17e}"


def _jsonify(obj):
    """Floats to 17-digit decimal strings, complex to {re, im}, arrays to lists."""
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonify(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _fmt(obj.real), "im": _fmt(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    return obj


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(_jsonify(payload), sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row]
            )


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def _parse_model(cfg) -> NodalCurveModel:
    spec = cfg.get("model")
    if spec is None:
        raise ConfigError("config needs a 'model'")
    if isinstance(spec, str):
        if spec not in _FIXTURE_MODELS:
            raise ConfigError(f"unknown fixture model '{spec}'")
        return _FIXTURE_MODELS[spec]()
    try:
        return NodalCurveModel.from_dict(spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad model: {exc}") from exc


def _parse_t(cfg, key="t"):
    t = cfg.get(key, 0.0)
    if isinstance(t, (list, tuple)):
        return complex(t[0], t[1])
    return complex(t)


def _parse_product(cfg) -> EpsilonProductConfig:
    kwargs = {}
    for name in ("epsilon", "radial_order", "angular_order", "band_radial_order",
                 "band_angular_order", "margulis_cap", "split_radius"):
        if name in cfg:
            kwargs[name] = cfg[name]
    try:
        return EpsilonProductConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad quadrature config: {exc}") from exc


def _parse_schedule(cfg, key="schedule"):
    sched = cfg.get(key)
    if sched is None:
        return degeneration.default_schedule()
    if isinstance(sched, dict):
        return degeneration.default_schedule(
            decades=int(sched.get("decades", 6)),
            base=float(sched.get("base", 10.0)),
            argument=float(sched.get("argument", 0.0)),
        )
    return tuple(
        complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
        for v in sched
    )


def _parse_family(cfg) -> degeneration.FamilySpec:
    model = _parse_model(cfg)
    try:
        return degeneration.FamilySpec(
            model=model,
            schedule=_parse_schedule(cfg),
            m=int(cfg.get("m", 3)),
            truncation=cfg.get("truncation"),
            product=_parse_product(cfg),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _basis_for(cfg):
    model = _parse_model(cfg)
    m = int(cfg.get("m", 3))
    t = _parse_t(cfg)
    if t == 0:
        return differentials.nodal_basis(model, m)
    return differentials.plumbed_basis(model, t, m, cfg.get("truncation"))


# ---------------------------------------------------------------------------
# command implementations (each returns a dict of artifact name -> payload)
# ---------------------------------------------------------------------------


def _cmd_graphs(cfg, paper_norm):
    g = int(cfg.get("genus", 2))
    graphs = surface_model.enumerate_pants_graphs(g)
    return {
        "graphs.json": {
            "genus": g,
            "count": len(graphs),
            "graphs": [gr.to_dict() for gr in graphs],
            "volume": surface_model.paper_volume(
                g, "paper" if paper_norm else "curvature"
            ),
        }
    }, None


def _cmd_surface(cfg, paper_norm):
    graph = surface_model.PantsGraph.from_dict(cfg.get("graph", {}))
    violations = surface_model.validate_pants_graph(graph)
    fn = surface_model.FNCoordinates(
        tuple(cfg.get("lengths", [])), tuple(cfg.get("twists", []))
    )
    if len(fn.lengths) != len(graph.edges):
        raise ConfigError("need one length/twist per graph edge")
    tt = surface_model.thick_thin_decompose(
        fn, surface_model.ThickThinConfig(float(cfg.get("epsilon", 0.3)))
    )
    return {
        "surface.json": {
            "graph": graph.to_dict(),
            "violations": violations,
            "short_edges": tt.short_edges,
            "collar_params": tt.collar_params,
            "thin_volume": tt.thin_volume,
            "total_volume": surface_model.paper_volume(
                graph.genus, "paper" if paper_norm else "curvature"
            ),
        }
    }, None


def _cmd_basis(cfg, paper_norm):
    basis = _basis_for(cfg)
    return {
        "basis.json": {
            "model": basis.model.to_dict(),
            "m": basis.m,
            "t": complex(basis.smoothing),
            "dimension": len(basis.sections),
            "sv_gap": basis.sv_gap if math.isfinite(basis.sv_gap) else "inf",
            "source": basis.source,
            "coefficients": [
                [s.coefficients[c] for c in range(len(basis.model.components))]
                for s in basis.sections
            ],
        }
    }, None


def _cmd_gram(cfg, paper_norm):
    basis = _basis_for(cfg)
    product = _parse_product(cfg)
    gram = bergman.gram_matrix(basis, product)
    return {
        "gram.json": {
            "m": basis.m,
            "t": complex(basis.smoothing),
            "epsilon": product.epsilon,
            "entries": gram.entries,
            "condition_number": gram.condition_number,
            "eigenvalues": gram.eigenvalues,
        }
    }, None


def _cmd_embed(cfg, paper_norm):
    basis = _basis_for(cfg)
    product = _parse_product(cfg)
    onb = bergman.orthonormalize(basis, bergman.gram_matrix(basis, product))
    n = int(cfg.get("n_samples", 24))
    samples = degeneration.default_sample_points(basis.model, n)
    cloud = bergman.embed_cloud(onb, list(samples))
    rows = []
    for (comp, x), vec in zip(cloud.samples, cloud.vectors):
        row = [comp, _fmt(x.real), _fmt(x.imag)]
        for v in vec:
            row.extend([_fmt(v.real), _fmt(v.imag)])
        rows.append(row)
    header = ["component", "x_re", "x_im"]
    for k in range(cloud.vectors.shape[1]):
        header.extend([f"v{k}_re", f"v{k}_im"])
    payload = {
        "embed.json": {
            "m": basis.m,
            "t": complex(basis.smoothing),
            "epsilon": product.epsilon,
            "projective_dimension": cloud.vectors.shape[1] - 1,
            "samples": [{"component": c, "x": complex(x)} for c, x in cloud.samples],
            "cloud": cloud.vectors,
        }
    }
    return payload, ("embed.csv", header, rows)


def _cmd_degenerate(cfg, paper_norm):
    spec = _parse_family(cfg)
    report = degeneration.run_family(spec)
    if report.aborted_at is not None:
        raise RankDeficiencyError(
            f"family aborted at t={report.aborted_at}: {report.abort_reason}"
        )
    split = degeneration.bounded_section_split(report)
    payload = {
        "degenerate.json": {
            "m": spec.m,
            "epsilon": spec.product.epsilon,
            "t_values": report.t_values,
            "gram_condition": report.gram_condition,
            "max_defect": report.max_defect,
            "max_ratio": report.max_ratio,
            "min_vector_norm": report.min_vector_norm,
            "aligned_distance": report.aligned_distance,
            "flags": report.flags,
            "bounded_split": {
                "bounded": split.bounded,
                "unbounded": split.unbounded,
                "threshold": split.threshold,
                "inconclusive": split.inconclusive,
            },
        }
    }
    header = ["t_re", "t_im", "gram_condition", "max_defect", "max_ratio",
              "min_vector_norm", "aligned_distance"]
    rows = []
    for row in report.summary_rows():
        rows.append(
            [
                _fmt(row["t"].real),
                _fmt(row["t"].imag),
                row["gram_condition"],
                row["max_defect"],
                row["max_ratio"],
                row["min_vector_norm"],
                row["aligned_distance"],
            ]
        )
    return payload, ("degenerate.csv", header, rows)


def _cmd_robustness(cfg, paper_norm):
    spec = _parse_family(cfg)
    eps1 = float(cfg.get("eps1", spec.product.epsilon))
    eps2 = float(cfg.get("eps2", spec.product.epsilon / 2.0))
    rep = degeneration.epsilon_robustness(spec, eps1, eps2)
    payload = {
        "robustness.json": {
            "eps1": eps1,
            "eps2": eps2,
            "t_values": rep.t_values,
            "condition_numbers": rep.condition_numbers,
            "increments": rep.increments,
            "max_condition": rep.max_condition,
        }
    }
    header = ["t_re", "t_im", "condition_number", "increment"]
    rows = []
    for i, t in enumerate(rep.t_values):
        rows.append(
            [
                _fmt(t.real),
                _fmt(t.imag),
                rep.condition_numbers[i],
                rep.increments[i - 1] if i > 0 else float("nan"),
            ]
        )
    return payload, ("robustness.csv", header, rows)


def _cmd_uniqueness(cfg, paper_norm):
    spec = _parse_family(cfg)
    sched_a = _parse_schedule(cfg, "schedule_a")
    sched_b = _parse_schedule(cfg, "schedule_b")
    tol = float(cfg.get("tolerance", TOLERANCES["alignment_tolerance"]))
    verdict = degeneration.schedule_uniqueness_check(spec, sched_a, sched_b, tol)
    return {
        "uniqueness.json": {
            "schedule_a": list(sched_a),
            "schedule_b": list(sched_b),
            "residual": verdict.residual,
            "tolerance": verdict.tolerance,
            "verdict": verdict.verdict,
            "degenerate": verdict.degenerate,
            "unitary": verdict.unitary,
        }
    }, None


_COMMANDS = {
    "graphs": _cmd_graphs,
    "surface": _cmd_surface,
    "basis": _cmd_basis,
    "gram": _cmd_gram,
    "embed": _cmd_embed,
    "degenerate": _cmd_degenerate,
    "robustness": _cmd_robustness,
    "uniqueness": _cmd_uniqueness,
}


def run_config(command: str, config_path: str, out_dir: str,
               paper_normalization: bool = False) -> int:
    """Validate, compute, and emit artifacts; returns the exit code."""
    try:
        raw = Path(config_path).read_bytes()
        cfg = json.loads(raw)
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        if command not in _COMMANDS:
            raise ConfigError(f"unknown command '{command}'")
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        payloads, csv_art = _COMMANDS[command](cfg, paper_normalization)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RankDeficiencyError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except AssertionError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        # model/parameter validation surfaced mid-build
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, payload in payloads.items():
        _write_json(out / name, payload)
    if csv_art is not None:
        name, header, rows = csv_art
        _write_csv(out / name, header, rows)
    manifest = {
        "command": command,
        "config_sha256": hashlib.sha256(raw).hexdigest(),
        "version": __version__,
        "tolerances": TOLERANCES,
        "workers": int(os.environ.get("STABLEDEGEN_WORKERS", "1")),
        "paper_normalization": paper_normalization,
    }
    _write_json(out / "run.json", manifest)
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stable-degen",
        description="Degenerating-surface embeddings: bases, Gram matrices, "
                    "families, and diagnostics.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to a JSON config")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument(
        "--paper-normalization",
        action="store_true",
        help="report volumes/lengths in the bare normalization (2g-2, core "
             "parameter lambda) instead of the curvature -1 convention",
    )
    args = parser.parse_args(argv)
    return run_config(args.command, args.config, args.out, args.paper_normalization)


if __name__ == "__main__":
    sys.exit(main())
