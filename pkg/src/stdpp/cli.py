"""Batch command-line front end.

Subcommands: validate, curves, simulate, summarize, fit.  Every run is
driven by a JSON config document (path as the positional argument) plus
optional dotted-key overrides, e.g.

    stdpp simulate run.json --set model.rho=0.12 --set replicates=50

Exit status: 0 on success (and on 'valid'), 1 on domain-level failure
(invalid model, truncation tolerance, non-convergence under --strict),
2 on usage, config or input-parsing errors.

Outputs are plot-ready CSV (curves: header 'u,t,value,statistic'; patterns:
header 'x,y,t') plus a manifest JSON that makes simulation runs fully
reproducible.  STDPP_THREADS caps the replicate fan-out; the default is the
machine parallelism.
"""

import argparse
import glob
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, estimate, kernels, moments, simulate
from .errors import InvalidParameterError, StdppError

__all__ = ["main"]


class ConfigError(Exception):
    """Malformed configuration or input file (exit status 2)."""


def _parse_override(text):
    if "=" not in text:
        raise ConfigError("override %r is not KEY=VALUE" % text)
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _apply_override(cfg, key, value):
    parts = key.split(".")
    node = cfg
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError("cannot override through non-object key %r"
                              % part)
    node[parts[-1]] = value


def load_config(path, overrides):
    if path is None:
        cfg = {}
    else:
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except OSError as err:
            raise ConfigError("cannot read config %s: %s" % (path, err))
        except json.JSONDecodeError as err:
            raise ConfigError("config %s is not valid JSON: %s" % (path, err))
        if not isinstance(cfg, dict):
            raise ConfigError("config %s must hold a JSON object" % path)
    for text in overrides or ():
        key, value = _parse_override(text)
        _apply_override(cfg, key, value)
    return cfg


def _require(cfg, key):
    if key not in cfg:
        raise ConfigError("config is missing the %r field" % key)
    return cfg[key]


def _model_from_cfg(cfg, key="model"):
    data = _require(cfg, key)
    try:
        return kernels.model_from_dict(data)
    except InvalidParameterError as err:
        raise ConfigError(str(err))


def _window_from_cfg(cfg):
    data = _require(cfg, "window")
    try:
        return simulate.Box.from_dict(data)
    except (KeyError, TypeError):
        raise ConfigError(
            "window must be an object with fields x, y, t")


def _grid_from_cfg(cfg, default_max=(1.0, 1.0), default_n=(20, 20)):
    data = cfg.get("grid") or {}
    if "u" in data or "t" in data:
        try:
            return moments.LagGrid(np.asarray(data["u"], dtype=float),
                                   np.asarray(data["t"], dtype=float))
        except (KeyError, InvalidParameterError) as err:
            raise ConfigError("bad explicit lag grid: %s" % err)
    u_max = float(data.get("u_max", default_max[0]))
    t_max = float(data.get("t_max", default_max[1]))
    n_u = int(data.get("n_u", default_n[0]))
    n_t = int(data.get("n_t", default_n[1]))
    include_zero = bool(data.get("include_zero", True))
    try:
        return moments.LagGrid.regular(u_max, t_max, n_u, n_t,
                                       include_zero=include_zero)
    except InvalidParameterError as err:
        raise ConfigError("bad lag grid: %s" % err)


def _out_dir(cfg):
    out = cfg.get("output", ".")
    os.makedirs(out, exist_ok=True)
    return out


def _threads(n_tasks):
    raw = os.environ.get("STDPP_THREADS", "")
    if raw.strip():
        try:
            cap = int(raw)
        except ValueError:
            raise ConfigError("STDPP_THREADS must be an integer")
        if cap < 1:
            raise ConfigError("STDPP_THREADS must be >= 1")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_tasks))


def write_pattern_csv(pattern, path):
    with open(path, "w") as fh:
        fh.write("x,y,t\n")
        for row in pattern.points:
            fh.write("%.17g,%.17g,%.17g\n" % (row[0], row[1], row[2]))


def read_pattern_csv(path, window):
    try:
        fh = open(path)
    except OSError as err:
        raise ConfigError("cannot read pattern %s: %s" % (path, err))
    rows = []
    with fh:
        header = fh.readline().strip()
        if header.replace(" ", "") != "x,y,t":
            raise ConfigError("%s:1: expected header 'x,y,t', got %r"
                              % (path, header))
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ConfigError("%s:%d: expected 3 comma-separated values"
                                  % (path, lineno))
            try:
                rows.append([float(v) for v in parts])
            except ValueError:
                raise ConfigError("%s:%d: non-numeric coordinate in %r"
                                  % (path, lineno, line))
    pts = np.asarray(rows, dtype=float) if rows else np.empty((0, 3))
    try:
        return simulate.PointPattern(points=pts, window=window,
                                     seed_provenance=os.path.basename(path))
    except InvalidParameterError as err:
        raise ConfigError("%s: %s" % (path, err))


def _collect_patterns(cfg):
    spec = _require(cfg, "patterns")
    if isinstance(spec, str):
        spec = [spec]
    paths = []
    for entry in spec:
        matches = sorted(glob.glob(entry))
        if matches:
            paths.extend(matches)
        elif os.path.exists(entry):
            paths.append(entry)
        else:
            raise ConfigError("pattern input %r matches no files" % entry)
    if not paths:
        raise ConfigError("no pattern files found")
    window = _window_for_patterns(cfg, paths)
    return [read_pattern_csv(p, window) for p in paths], window


def _window_for_patterns(cfg, paths):
    if "window" in cfg:
        return _window_from_cfg(cfg)
    manifest = cfg.get("manifest")
    if manifest is None:
        candidate = os.path.join(os.path.dirname(paths[0]), "manifest.json")
        if os.path.exists(candidate):
            manifest = candidate
    if manifest is None:
        raise ConfigError("summarize/fit needs a 'window' or a 'manifest'")
    try:
        with open(manifest) as fh:
            data = json.load(fh)
        return simulate.Box.from_dict(data["window"])
    except (OSError, json.JSONDecodeError, KeyError) as err:
        raise ConfigError("cannot recover window from manifest %s: %s"
                          % (manifest, err))


def run_validate(cfg):
    model = _model_from_cfg(cfg)
    report = kernels.validate_existence(model)
    print("family: %s" % report.family)
    print("valid: %s" % ("true" if report.valid else "false"))
    print("rho: %.12g" % report.rho)
    print("rho_max: %.12g" % report.rho_max)
    print("phi_max: %.12g" % report.phi_max)
    return 0 if report.valid else 1


def run_curves(cfg):
    if "models" in cfg:
        entries = cfg["models"]
        if not isinstance(entries, list) or not entries:
            raise ConfigError("'models' must be a non-empty list")
        models = []
        for data in entries:
            try:
                models.append(kernels.model_from_dict(data))
            except InvalidParameterError as err:
                raise ConfigError(str(err))
    else:
        models = [_model_from_cfg(cfg)]
    grid = _grid_from_cfg(cfg)
    stats = cfg.get("statistics", ["g"])
    if isinstance(stats, str):
        stats = [stats]
    if not set(stats) <= {"g", "K"}:
        raise ConfigError("statistics must be a subset of ['g', 'K']")
    fmt = cfg.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be 'csv' or 'json'")
    out = _out_dir(cfg)
    written = []
    for idx, model in enumerate(models):
        for stat in stats:
            if stat == "g":
                curve = moments.pcf_theoretical(model, grid)
            else:
                method = ("closed_form"
                          if isinstance(model,
                                        kernels.SeparableGaussExpParams)
                          else "quadrature")
                curve = moments.kfun_theoretical(model, grid, method=method)
            path = os.path.join(out, "curve_%02d_%s.%s" % (idx, stat, fmt))
            if fmt == "csv":
                curve.to_csv(path)
            else:
                with open(path, "w") as fh:
                    json.dump(curve.to_dict(), fh, indent=2)
            written.append(path)
            print(path)
    return 0


def _simulate_one(args):
    kind, approx_or_rho, window, seed, path = args
    if kind == "poisson":
        pattern = simulate.sample_poisson(approx_or_rho, window, seed)
    else:
        pattern = simulate.sample_stdpp(approx_or_rho, window, seed)
    write_pattern_csv(pattern, path)
    return len(pattern)


def run_simulate(cfg):
    model_data = _require(cfg, "model")
    window = _window_from_cfg(cfg)
    replicates = int(cfg.get("replicates", 1))
    if replicates < 1:
        raise ConfigError("replicates must be >= 1")
    seed = int(cfg.get("seed", 0))
    cutoff = cfg.get("cutoff", list(simulate.DEFAULT_CUTOFF))
    tolerance = float(cfg.get("tolerance", simulate.DEFAULT_TOLERANCE))
    padding = float(cfg.get("padding", simulate.DEFAULT_PADDING))
    out = _out_dir(cfg)

    is_poisson = isinstance(model_data, dict) \
        and model_data.get("family") == "poisson"
    if is_poisson:
        try:
            rho = float(model_data["rho"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("poisson model needs a numeric 'rho'")
        approx_or_rho = rho
        kind = "poisson"
    else:
        model = _model_from_cfg(cfg)
        approx_or_rho = simulate.build_spectral_approx(
            model, window, cutoff=cutoff, tolerance=tolerance,
            padding=padding)
        kind = "stdpp"

    seeds = simulate.replicate_seeds(seed, replicates)
    tasks = []
    files = []
    for i, s in enumerate(seeds):
        name = "pattern_%03d.csv" % i
        files.append(name)
        tasks.append((kind, approx_or_rho, window, s,
                      os.path.join(out, name)))
    workers = _threads(replicates)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(_simulate_one, tasks))
    else:
        counts = [_simulate_one(task) for task in tasks]

    manifest = {
        "model": model_data,
        "window": window.to_dict(),
        "grid": cfg.get("grid"),
        "seed": seed,
        "replicates": replicates,
        "cutoff": list(simulate._as_cutoff(cutoff)),
        "tolerance": tolerance,
        "padding": padding,
        "replicate_seeds": seeds,
        "files": files,
        "counts": counts,
        "version": __version__,
    }
    manifest_path = os.path.join(out, "manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    print(manifest_path)
    return 0


def run_summarize(cfg):
    patterns, window = _collect_patterns(cfg)
    u_cap = min(window.x_extent, window.y_extent) / 2.0
    grid = _grid_from_cfg(cfg, default_max=(u_cap / 2.0,
                                            window.t_extent / 4.0))
    stats = cfg.get("statistics", ["K", "g"])
    if isinstance(stats, str):
        stats = [stats]
    if not set(stats) <= {"g", "K"}:
        raise ConfigError("statistics must be a subset of ['g', 'K']")
    bw = None
    if "bandwidth" in cfg:
        data = cfg["bandwidth"]
        try:
            bw = estimate.BandwidthSpec(float(data["spatial"]),
                                        float(data["temporal"]))
        except (KeyError, TypeError, ValueError):
            raise ConfigError(
                "bandwidth must be an object with 'spatial' and 'temporal'")
    out = _out_dir(cfg)
    for stat in stats:
        if stat == "K":
            curve = estimate.estimate_kfun(patterns, grid)
        else:
            curve = estimate.estimate_pcf(patterns, grid, bw=bw)
        path = os.path.join(out, "summary_%s.csv" % stat)
        curve.to_csv(path)
        print(path)
    return 0


def run_fit(cfg):
    patterns, window = _collect_patterns(cfg)
    family = _require(cfg, "family")
    bounds = None
    if "bounds" in cfg:
        try:
            bounds = {k: (float(v[0]), float(v[1]))
                      for k, v in cfg["bounds"].items()}
        except (TypeError, ValueError, IndexError):
            raise ConfigError("bounds must map names to [lo, hi] pairs")
    statistic = cfg.get("statistic", "K")
    grid = None
    if cfg.get("grid"):
        grid = _grid_from_cfg(cfg)
    result = estimate.fit_min_contrast(patterns, family, bounds=bounds,
                                       statistic=statistic, grid=grid)
    out = _out_dir(cfg)
    path = os.path.join(out, "fit.json")
    with open(path, "w") as fh:
        json.dump(result.to_dict(), fh, indent=2)
        fh.write("\n")
    print(path)
    print("converged: %s  contrast: %.6g  iterations: %d"
          % (result.converged, result.contrast, result.iterations))
    if cfg.get("strict") and not result.converged:
        return 1
    return 0


_COMMANDS = {
    "validate": run_validate,
    "curves": run_curves,
    "simulate": run_simulate,
    "summarize": run_summarize,
    "fit": run_fit,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stdpp",
        description="Spatio-temporal determinantal point processes: "
                    "validate models, emit theoretical curves, simulate, "
                    "summarize and fit.")
    parser.add_argument("--version", action="version",
                        version="stdpp %s" % __version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
            ("validate", "check the existence condition of a model"),
            ("curves", "write theoretical g/K curves"),
            ("simulate", "draw replicate patterns and a manifest"),
            ("summarize", "estimate empirical g/K from pattern files"),
            ("fit", "minimum-contrast parameter fit from pattern files")):
        p = sub.add_parser(name, help=doc)
        p.add_argument("config", nargs="?", default=None,
                       help="JSON config document")
        p.add_argument("--set", dest="overrides", action="append",
                       metavar="KEY=VALUE", default=[],
                       help="override a config entry (dotted keys)")
        p.add_argument("--output", "-o", default=None,
                       help="output directory (overrides config)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        if args.output is not None:
            cfg["output"] = args.output
        return _COMMANDS[args.command](cfg)
    except ConfigError as err:
        print("error: %s" % err, file=sys.stderr)
        return 2
    except InvalidParameterError as err:
        print("error: %s" % err, file=sys.stderr)
        return 2
    except StdppError as err:
        print("error: %s" % err, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
