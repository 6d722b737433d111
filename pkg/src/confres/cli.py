"""Command-line surface: cluster, sweep, eval, experiment.

Exit codes: 0 success, 2 usage/input error, 1 internal failure.  Every
output JSON embeds the tool version, the fully resolved parameters, the
seed, and a SHA-256 hash of each input file so runs are reproducible.
"""

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .cognition import (HierarchySpec, run_evolution_experiment,
                        run_hierarchy_experiment, run_novelty_experiment)
from .energy import hamiltonian
from .errors import ConfresError, InputError
from .evaluation import (accuracy, ari, contingency, nmi, rms_align, v_measure)
from .graph import (build_knn_graph, derive_affinity, load_labels_csv,
                    load_points_csv)
from .mosaic import layout, render_svg
from .optimizer import OptimizeOptions, optimize
from .resolution import find_configurations

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _resolve_threads(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("CONFRES_THREADS")
    if env is not None:
        return int(env)
    return os.cpu_count() or 1


def _metadata(params: dict, inputs: dict) -> dict:
    return {
        "version": __version__,
        "params": params,
        "seed": params.get("seed"),
        "input_hashes": {name: _sha256(path) for name, path in inputs.items()},
    }


def _write_json(path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _load_config_file(path) -> dict:
    """Flat key = value lines; blank lines and # comments ignored."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key = value")
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _apply_config_defaults(args, parser_defaults: dict) -> None:
    """File values fill in only where the flag kept its parser default."""
    if not getattr(args, "config", None):
        return
    values = _load_config_file(args.config)
    for key, raw in values.items():
        if not hasattr(args, key):
            continue
        current = getattr(args, key)
        if key in parser_defaults and current == parser_defaults[key]:
            default = parser_defaults[key]
            caster = type(default) if default is not None else str
            if caster is bool:
                setattr(args, key, raw.lower() in ("1", "true", "yes"))
            else:
                setattr(args, key, caster(raw))


def _points_to_affinity(points, k: int):
    neighbors = build_knn_graph(points, k=k)
    return derive_affinity(neighbors)


def cmd_cluster(args) -> int:
    points = load_points_csv(args.input)
    graph = _points_to_affinity(points, args.k)
    labels, energy = optimize(graph, args.gamma, OptimizeOptions(seed=args.seed))
    params = {"command": "cluster", "input": args.input, "k": args.k,
              "gamma": args.gamma, "seed": args.seed,
              "threads": _resolve_threads(args.threads)}
    _write_json(args.out, {
        "labels": [int(x) for x in labels],
        "energy": {"gamma": energy.gamma, "h_a": energy.h_a,
                   "h_r": energy.h_r, "total": energy.total},
        "metadata": _metadata(params, {"input": args.input}),
    })
    return EXIT_OK


def cmd_sweep(args) -> int:
    points = load_points_csv(args.input)
    graph = _points_to_affinity(points, args.k)
    configs = find_configurations(graph, args.gamma_max,
                                  OptimizeOptions(seed=args.seed))
    params = {"command": "sweep", "input": args.input, "k": args.k,
              "gamma_max": args.gamma_max, "seed": args.seed,
              "threads": _resolve_threads(args.threads)}
    payload = configs.to_dict()
    payload["metadata"] = _metadata(params, {"input": args.input})
    _write_json(args.out, payload)
    if args.landscape:
        configs.landscape_csv(args.landscape)
    return EXIT_OK


def _load_partition_json(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if "labels" not in data:
        raise InputError(f"{path}: no 'labels' key")
    return np.asarray(data["labels"], dtype=np.int64)


def cmd_eval(args) -> int:
    pred = _load_partition_json(args.pred)
    truth = load_labels_csv(args.truth)
    if len(pred) != len(truth):
        raise InputError("prediction and truth lengths differ")
    table = contingency(truth, pred)
    alignment = rms_align(table)
    metrics = {
        "ari": ari(table),
        "nmi": nmi(table),
        "v": v_measure(table),
        "accuracy": accuracy(alignment) if args.align == "rms" else None,
        "auc": None,
    }
    params = {"command": "eval", "pred": args.pred, "truth": args.truth,
              "align": args.align, "seed": None}
    payload = dict(metrics)
    payload["metadata"] = _metadata(
        params, {"pred": args.pred, "truth": args.truth})
    if args.align == "rms":
        payload["alignment"] = {
            "row_order": [int(x) for x in alignment.row_order],
            "col_order": [int(x) for x in alignment.col_order],
            "splits": [[int(i), list(map(int, cols))]
                       for i, cols in alignment.splits],
            "merges": [[int(i), list(map(int, cols))]
                       for i, cols in alignment.merges],
        }
    _write_json(args.out, payload)
    if args.mosaic:
        source = alignment.aligned if args.align == "rms" else table
        with open(args.mosaic, "w", encoding="utf-8") as fh:
            fh.write(render_svg(layout(source)))
    return EXIT_OK


def cmd_experiment(args) -> int:
    spec = HierarchySpec(seed=args.seed) if args.kind == "hierarchy" else None
    params = {"command": "experiment", "kind": args.kind, "seed": args.seed,
              "threads": _resolve_threads(args.threads)}
    if args.kind == "hierarchy":
        report = run_hierarchy_experiment(spec)
    elif args.kind == "novelty":
        from .cognition import novelty_spec
        report = run_novelty_experiment(novelty_spec(args.seed),
                                        fraction=args.fraction)
    elif args.kind == "evolve":
        trace = run_evolution_experiment(seed=args.seed)
        report = {
            "timesteps": trace.timesteps,
            "inverse_ari": {m: list(map(float, s))
                            for m, s in trace.inverse_ari_series.items()},
            "events": [[int(t), kind, list(map(int, ids))]
                       for t, kind, ids in trace.events],
        }
        params["fraction"] = None
    else:  # pragma: no cover - argparse restricts choices
        raise InputError(f"unknown experiment {args.kind!r}")
    if args.kind == "novelty":
        params["fraction"] = args.fraction
    payload = {"report": report, "metadata": _metadata(params, {})}
    _write_json(args.out, payload)
    return EXIT_OK


def _subparser_defaults(sub_parser) -> dict:
    return {a.dest: a.default for a in sub_parser._actions
            if a.dest not in ("help", "func")}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confres",
        description="finite-resolution attraction-repulsion clustering")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.set_defaults(_defaults_by_command={})
    defaults_by_command = parser.get_default("_defaults_by_command")

    def common(p):
        p.add_argument("--config", default=None,
                       help="flat key = value file supplying flag defaults")
        p.add_argument("--threads", type=int, default=None,
                       help="parallelism bound (default: CONFRES_THREADS or "
                            "available cores); outputs are deterministic")

    p = sub.add_parser("cluster", help="cluster points at a fixed resolution")
    p.add_argument("--input", required=True, help="points CSV")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="partition JSON")
    common(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("sweep", help="discover all plateaus up to gamma-max")
    p.add_argument("--input", required=True, help="points CSV")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--gamma-max", dest="gamma_max", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="configuration-set JSON")
    p.add_argument("--landscape", default=None, help="optional landscape CSV")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="score a partition against truth labels")
    p.add_argument("--pred", required=True, help="partition JSON")
    p.add_argument("--truth", required=True, help="labels CSV")
    p.add_argument("--align", choices=("rms", "none"), default="rms")
    p.add_argument("--mosaic", default=None, help="optional mosaic SVG")
    p.add_argument("--out", required=True, help="metrics JSON")
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="run a built-in experiment")
    p.add_argument("kind", choices=("hierarchy", "novelty", "evolve"))
    p.add_argument("--fraction", type=float, default=0.05,
                   help="outlier fraction for the novelty experiment")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="report JSON")
    common(p)
    p.set_defaults(func=cmd_experiment)
    for name, sp in sub.choices.items():
        defaults_by_command[name] = _subparser_defaults(sp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    defaults = args._defaults_by_command[args.command]
    try:
        _apply_config_defaults(args, defaults)
        for attr in ("input", "pred", "truth", "config"):
            path = getattr(args, attr, None)
            if path is not None and not os.path.exists(path):
                raise InputError(f"{attr} file not found: {path}")
        return args.func(args)
    except InputError as exc:
        print(f"confres: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfresError as exc:
        print(f"confres: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"confres: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
