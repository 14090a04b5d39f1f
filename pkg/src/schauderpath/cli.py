"""Command-line front end: reproducible experiments emitting CSV/JSON.

Subcommands
  generate            sample a path ensemble (paths.csv + manifest.json)
  analyze             regularity analytics of a stored ensemble
  normality           KS/JB p-values at dyadic test points
  covariance          dump the coefficient covariance (binary + sidecar)
  validate-partition  structure constants of the configured partition

Exit codes: 0 ok, 2 usage/config error, 3 numerical error.  All commands
are driven by a JSON config document (schema-validated, unknown keys
rejected); --seed overrides the config seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .basis import coeffs_to_csv, decompose, enumerate_supports
from .fbm import NumericalError, assemble_covariance, covariance_to_binary
from .partition import build_dyadic, build_shifted_binary, validate
from .roughness import (
    holder_exponent_estimate,
    pth_variation,
    scaled_qv,
    variation_index_estimate,
)
from .sampler import (
    MarginalSpec,
    PathConfig,
    PathEnsemble,
    LAW_NAMES,
    build_sequence,
    fake_bm_paths,
    fake_fbm_paths,
)
from .stats import jarque_bera, ks_normal, marginal_std

USAGE_ERROR = 2
NUMERICAL_ERROR = 3

_LAW_ENUM = {"enum": list(LAW_NAMES)}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["partition", "run"],
    "properties": {
        "partition": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["dyadic", "shifted-binary"]},
                "depth": {"type": "integer", "minimum": 1, "maximum": 24},
                "ratio": {"type": "number", "exclusiveMinimum": 1},
                "T": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "H": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "marginal": _LAW_ENUM,
                "mixing": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["even", "odd"],
                    "properties": {"even": _LAW_ENUM, "odd": _LAW_ENUM},
                },
                "pearson_correct": {"type": "boolean"},
                "include_endpoint": {"type": "boolean"},
            },
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "required": ["seed", "count"],
            "properties": {
                "seed": {"type": "integer", "minimum": 0},
                "count": {"type": "integer", "minimum": 1},
            },
        },
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "p_grid": {"type": "array", "items": {"type": "number"}, "minItems": 2},
                "window": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                "levels": {"type": "array", "items": {"type": "integer"}, "minItems": 3},
                "test_points": {"type": "array", "items": {"type": "number"}},
            },
        },
    },
}

COVARIANCE_DIM_GUARD = 8192


class ConfigError(ValueError):
    pass


def load_config(path: str, seed_override: int | None = None) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    import jsonschema

    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        field = "/".join(str(p) for p in exc.absolute_path) or "(root)"
        raise ConfigError(f"config field {field}: {exc.message}") from exc
    if seed_override is not None:
        doc["run"]["seed"] = seed_override
    return doc


def path_config(doc: dict) -> PathConfig:
    part = doc["partition"]
    model = doc.get("model", {})
    mixing = model.get("mixing")
    marginal = MarginalSpec(mixing=dict(mixing)) if mixing else MarginalSpec(
        law=model.get("marginal", "standard-normal"))
    # default truncation: level 15 for Brownian runs, 12 for fractional ones
    default_depth = 15 if model.get("H") is None else 12
    return PathConfig(
        seed=doc["run"]["seed"],
        depth=part.get("depth", default_depth),
        count=doc["run"]["count"],
        kind=part["kind"],
        ratio=part.get("ratio", 2.5),
        T=part.get("T", 1.0),
        H=model.get("H"),
        marginal=marginal,
        pearson_correct=model.get("pearson_correct", False),
        include_endpoint=model.get("include_endpoint", False),
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_paths_csv(ensemble: PathEnsemble, path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(_fmt(t) for t in ensemble.grid) + "\n")
        for row in ensemble.values:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_paths_csv(path):
    with open(path) as fh:
        grid = np.array([float(v) for v in fh.readline().split(",")])
        values = np.loadtxt(fh, delimiter=",", ndmin=2)
    if values.shape[1] != grid.size:
        raise ConfigError("paths.csv rows do not match the grid header")
    return grid, values


def _config_digest(doc: dict) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def cmd_generate(args) -> int:
    doc = load_config(args.config, args.seed)
    cfg = path_config(doc)
    ensemble = fake_bm_paths(cfg) if cfg.H is None else fake_fbm_paths(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_paths_csv(ensemble, out / "paths.csv")
    manifest = dict(ensemble.manifest)
    manifest["config_sha256"] = _config_digest(doc)
    manifest["tool_version"] = __version__
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)
    if args.dump_coeffs:
        seq = build_sequence(cfg)
        basis = enumerate_supports(seq, cfg.depth - 1)
        for i, row in enumerate(ensemble.values):
            coeffs_to_csv(decompose(row, basis), out / f"coeffs_{i:04d}.csv")
    print(f"wrote {out / 'paths.csv'} ({ensemble.count} paths, {ensemble.grid.size} points)")
    return 0


def _check_grid(cfg: PathConfig, grid) -> None:
    seq = build_sequence(cfg)
    expected = seq.points(cfg.depth)
    if grid.size != expected.size or not np.allclose(grid, expected, rtol=0, atol=1e-15):
        raise ConfigError("paths grid does not match the declared partition")


def cmd_analyze(args) -> int:
    doc = load_config(args.config, args.seed)
    cfg = path_config(doc)
    grid, values = read_paths_csv(args.paths)
    _check_grid(cfg, grid)
    analysis = doc.get("analysis", {})
    seq = build_sequence(cfg)
    basis = enumerate_supports(seq, cfg.depth - 1)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    path0 = values[args.path_index]
    field = decompose(path0, basis)
    window = tuple(analysis["window"]) if "window" in analysis else None
    est = holder_exponent_estimate(field, seq, window=window)
    with open(out / "holder.csv", "w") as fh:
        fh.write("m,log_max_coeff,log_mesh,ratio\n")
        for m, g, lm, r in est.trace:
            fh.write(f"{int(m)},{_fmt(g)},{_fmt(lm)},{_fmt(r)}\n")

    levels = analysis.get("levels", list(range(max(2, cfg.depth - 6), cfg.depth + 1)))
    p_grid = analysis.get("p_grid", [1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 8.0])
    res = variation_index_estimate(path0, grid, seq, p_grid, levels)
    with open(out / "variation.csv", "w") as fh:
        fh.write("p,level,sum,slope\n")
        for i, p in enumerate(res.p_grid):
            for j, n in enumerate(res.levels):
                fh.write(f"{_fmt(p)},{int(n)},{_fmt(res.sums[i, j])},{_fmt(res.slopes[i])}\n")

    with open(out / "qv.csv", "w") as fh:
        if cfg.H is not None and cfg.kind == "dyadic":
            fh.write("level,qv_at_T,scaled_qv_at_T\n")
        else:
            fh.write("level,qv_at_T\n")
        for n in levels:
            qv = pth_variation(path0, grid, seq, n, 2.0, seq.T)
            if cfg.H is not None and cfg.kind == "dyadic":
                sq = scaled_qv(path0, grid, seq, cfg.H, seq.T, n)
                fh.write(f"{int(n)},{_fmt(qv)},{_fmt(sq)}\n")
            else:
                fh.write(f"{int(n)},{_fmt(qv)}\n")

    qv_final = pth_variation(path0, grid, seq, cfg.depth, 2.0, seq.T)
    print(f"alpha_hat={est.alpha_hat:.4f} branch={est.branch} "
          f"index_hat={res.index_hat:.4f} qv_T={qv_final:.4f}")
    return 0


def _dyadic_test_points(cfg: PathConfig, n_points: int = 10) -> np.ndarray:
    rng = np.random.default_rng(cfg.seed)
    ks = rng.choice(np.arange(1, 2 ** cfg.depth), size=n_points, replace=False)
    return np.sort(ks) * (cfg.T / 2 ** cfg.depth)


def cmd_normality(args) -> int:
    doc = load_config(args.config, args.seed)
    cfg = path_config(doc)
    grid, values = read_paths_csv(args.paths)
    _check_grid(cfg, grid)
    if values.shape[0] < 100:
        raise ConfigError("normality protocol needs an ensemble of at least 100 paths")
    analysis = doc.get("analysis", {})
    if args.points:
        points = np.array([float(p) for p in args.points.split(",")])
    elif "test_points" in analysis:
        points = np.array(analysis["test_points"], dtype=float)
    else:
        points = _dyadic_test_points(cfg)
    idx = np.searchsorted(grid, points)
    if np.any(idx >= grid.size) or np.any(np.abs(grid[np.minimum(idx, grid.size - 1)] - points) > 1e-15):
        raise ConfigError("test points must be grid points of the declared partition")
    manifest = {"H": cfg.H, "include_endpoint": cfg.include_endpoint}
    with open(args.out, "w") as fh:
        fh.write("point,sigma,ks_stat,ks_p,jb_stat,jb_p\n")
        for j, t in enumerate(points):
            t = float(t)
            if cfg.H is None:
                # Brownian marginal on [0, T]: t for the anchored process,
                # t - t^2/T for the bridge
                var = t if cfg.include_endpoint else t - t * t / cfg.T
                sig = float(np.sqrt(var))
            else:
                sig = marginal_std(manifest, t)
            samples = values[:, idx[j]]
            ks = ks_normal(samples, 0.0, sig)
            jb = jarque_bera(samples)
            fh.write(f"{_fmt(t)},{_fmt(sig)},{_fmt(ks.statistic)},{_fmt(ks.p_value)},"
                     f"{_fmt(jb.statistic)},{_fmt(jb.p_value)}\n")
    print(f"wrote {args.out} ({points.size} points)")
    return 0


def cmd_covariance(args) -> int:
    doc = load_config(args.config, args.seed)
    cfg = path_config(doc)
    if cfg.H is None:
        raise ConfigError("covariance dump needs model.H")
    seq = build_sequence(cfg)
    basis = enumerate_supports(seq, cfg.depth - 1)
    dim = basis.size + (1 if cfg.include_endpoint else 0)
    if dim > COVARIANCE_DIM_GUARD:
        raise ConfigError(f"covariance dimension {dim} exceeds the guard {COVARIANCE_DIM_GUARD}")
    cov = assemble_covariance(basis, cfg.H, include_endpoint=cfg.include_endpoint)
    covariance_to_binary(cov, args.out_prefix)
    print(f"wrote {args.out_prefix}.bin ({cov.dim}x{cov.dim}), jitter={cov.jitter:g}")
    return 0


def cmd_validate_partition(args) -> int:
    doc = load_config(args.config, args.seed)
    part = doc["partition"]
    T = part.get("T", 1.0)
    depth = part.get("depth", 15 if doc.get("model", {}).get("H") is None else 12)
    if part["kind"] == "dyadic":
        seq = build_dyadic(T, depth)
    else:
        seq = build_shifted_binary(T, depth, part.get("ratio", 2.5))
    diag = validate(seq)
    report = {
        "kind": seq.kind,
        "depth": seq.depth,
        "M_hat": diag.M_hat,
        "c_hat": diag.c_hat,
        "a_hat": diag.a_hat,
        "b_hat": diag.b_hat,
        "is_finitely_refining": diag.is_finitely_refining,
        "is_balanced": diag.is_balanced,
        "is_complete_refining": diag.is_complete_refining,
    }
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="schauderpath",
        description="Schauder-expansion experiments: generation and pathwise analytics",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON experiment config")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--threads", type=int, default=None,
                        help="parallelism hint; never affects numerical results")

    g = sub.add_parser("generate", parents=[common], help="sample a path ensemble")
    g.add_argument("--out-dir", required=True)
    g.add_argument("--dump-coeffs", action="store_true",
                   help="also write per-path coefficient CSVs")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", parents=[common], help="regularity analytics of an ensemble")
    a.add_argument("--paths", required=True, help="paths.csv from generate")
    a.add_argument("--out-dir", required=True)
    a.add_argument("--path-index", type=int, default=0)
    a.set_defaults(func=cmd_analyze)

    n = sub.add_parser("normality", parents=[common], help="KS/JB table at test points")
    n.add_argument("--paths", required=True)
    n.add_argument("--out", required=True, help="output table.csv")
    n.add_argument("--points", default=None, help="comma-separated test times")
    n.set_defaults(func=cmd_normality)

    c = sub.add_parser("covariance", parents=[common], help="dump coefficient covariance")
    c.add_argument("--out-prefix", required=True)
    c.set_defaults(func=cmd_covariance)

    v = sub.add_parser("validate-partition", parents=[common], help="partition diagnostics")
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_validate_partition)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
