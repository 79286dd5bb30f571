"""Command-line entry point: ``transinv {game,vc,exp} <kind> --config FILE``.

Every command reads a key=value config (see README for the keys), writes
plain-text artifacts into ``--out`` and never overwrites without
``--force``. Exit codes: 0 ok, 2 config error, 3 precondition violation,
4 invariant failure or internal error. Failures print one JSON record on
stderr.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import experiment as ex
from . import games, io, vc
from .core import Identity, InvariantViolation, PreconditionError
from .hypotheses import Halfspaces, LowerBoundFamily, Thresholds1D, constants
from .transforms import (AllPermutations, BlockPermutations, BooleanBitmaps,
                         LinearMaps, LowerBoundTransforms, TransformSpace, bit_flip)

GAME_KINDS = ("minmax", "mw-erm", "regret", "mw-regret", "coverage", "inflate")
VC_KINDS = ("shatter", "sauer", "linear-closure", "boolean", "lowerbound", "sample-size")

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_INVARIANT = 0, 2, 3, 4


class Run:
    """Resolved invocation: command, config section, seed, output directory."""

    def __init__(self, command, kind, cfg_text, section, seed, out, force, base_dir):
        self.command, self.kind = command, kind
        self.section, self.seed = section, seed
        self.out, self.force = Path(out), force
        self.base_dir = base_dir
        canon = json.dumps({"command": command, "kind": kind, "config": section}, sort_keys=True)
        self.digest = io.config_digest(canon)
        self.files: dict[str, str] = {}

    def path(self, key):
        p = Path(io.get(self.section, key))
        return p if p.is_absolute() else self.base_dir / p

    def header(self) -> str:
        seed = "none" if self.seed is None else str(self.seed)
        return f"# transinv {self.command} {self.kind} config_digest={self.digest} seed={seed}\n"

    def emit(self, name: str, body: str):
        self.files[name] = self.header() + body

    def need_seed(self):
        if self.seed is None:
            raise io.ConfigError(f"{self.command} {self.kind} is stochastic and needs --seed")
        return self.seed

    def flush(self):
        self.out.mkdir(parents=True, exist_ok=True)
        clash = [n for n in self.files if (self.out / n).exists()]
        if clash and not self.force:
            raise io.ConfigError(f"refusing to overwrite {', '.join(sorted(clash))} without --force")
        for n in sorted(self.files):
            (self.out / n).write_text(self.files[n])


# ---------------------------------------------------------------- descriptors

def build_hypotheses(run: Run, points=None):
    """hypotheses = thresholds | halfspaces | dictators | signed-dictators | constants | lowerbound."""
    sec = run.section
    kind = io.get(sec, "hypotheses")
    if kind == "thresholds":
        return Thresholds1D(io.get(sec, "grid", "floats"))
    if kind == "halfspaces":
        if points is None:
            raise io.ConfigError("halfspaces need query points")
        return Halfspaces(points)
    if kind in ("dictators", "signed-dictators"):
        return vc.dictators(io.get(sec, "d", int), negations=kind == "signed-dictators")
    if kind == "constants":
        return constants()
    if kind == "lowerbound":
        return LowerBoundFamily(io.get(sec, "k", int))
    raise io.ConfigError(f"unknown hypotheses {kind!r}")


def build_transforms(run: Run) -> TransformSpace:
    """transforms = identity | linear | bitflips | permutations | block-permutations | lowerbound."""
    sec = run.section
    kind = io.get(sec, "transforms")
    w = io.get(sec, "weights", "floats", None)
    if kind == "identity":
        return TransformSpace([Identity()], w)
    if kind == "linear":
        return LinearMaps(io.read_linear_maps(run.path("maps")), w)
    if kind == "bitflips":
        d = io.get(sec, "d", int)
        masks = io.get(sec, "masks", str, "all")
        if masks == "all":
            return BooleanBitmaps.all_flips(d)
        ms = [[int(c) for c in m.strip()] for m in masks.split(",")]
        return BooleanBitmaps([bit_flip(m, index=j) for j, m in enumerate(ms)], w)
    if kind == "permutations":
        return TransformSpace(AllPermutations(io.get(sec, "d", int)).members(), w)
    if kind == "block-permutations":
        sp = BlockPermutations(io.get(sec, "d", int), io.get(sec, "blocks", int, 3))
        return TransformSpace(sp.members(), w)
    if kind == "lowerbound":
        return LowerBoundTransforms(io.get(sec, "k", int))
    raise io.ConfigError(f"unknown transforms {kind!r}")


def _load_game_inputs(run: Run):
    """(matrix,) from ``matrix = file`` or (H, T, s) from ``dataset = file``."""
    sec = run.section
    if "matrix" in sec:
        return io.read_matrix(run.path("matrix")), None, None, None
    s = io.read_dataset(run.path("dataset"))
    T = build_transforms(run)
    pts = None
    if sec.get("hypotheses") == "halfspaces":
        pts = np.concatenate([t(s.X) for t in T])
    return None, build_hypotheses(run, pts), T, s


# ---------------------------------------------------------------- game

def cmd_game(run: Run):
    sec = run.section
    E, H, T, s = _load_game_inputs(run)
    kind = run.kind
    if kind == "minmax":
        rep = games.minmax_erm(H, T, s, matrix=E)
    elif kind == "regret":
        rep = games.regret_minmax(H, T, s, matrix=E)
    elif kind == "coverage":
        eps = io.get(sec, "eps", float)
        w = io.get(sec, "w", "floats", None)
        rep = games.coverage_select(H, T, s, matrix=E, eps=eps, w=w)
    elif kind == "inflate":
        res = games.realizable_inflation(H, T, s, matrix=E)
        tag = None
        if res.predictor is not None:
            tag = res.predictor.tag
        elif res.selected is not None and E is not None:
            tag = E.row_tags[res.selected]
        run.emit("report.txt", io.format_report({
            "rule": "inflate", "selected": tag, "selected_index": res.selected,
            "realizable": res.realizable, "errors": list(res.errors)}))
        return
    elif kind in ("mw-erm", "mw-regret"):
        eps = io.get(sec, "eps", float)
        cap = io.get(sec, "max_rounds", int, games.DEFAULT_MAX_ROUNDS)
        if E is not None:
            fn = games.mw_erm_matrix if kind == "mw-erm" else games.mw_regret_matrix
            tr = fn(E, eps, max_rounds=cap)
        else:
            mode = io.get(sec, "mode", str, "exact")
            m_erm = io.get(sec, "m_erm", int, None)
            seed = run.need_seed() if mode == "sampled" else run.seed
            fn = games.mw_erm_reduction if kind == "mw-erm" else games.mw_regret_reduction
            tr = fn(H, T, s, eps, m_erm=m_erm, seed=seed, mode=mode, max_rounds=cap)
        chk = games.mw_regret_bound_check(tr)
        me = tr.mixture_errors()
        run.emit("trace.txt", io.format_trace(tr))
        run.emit("report.txt", io.format_report({
            "rule": kind, "rounds": tr.rounds, "eta": tr.eta, "capped": tr.capped, "mode": tr.mode,
            "mixture_errors": list(me), "mixture_risk": tr.mixture_risk(),
            "mixture_regret": tr.mixture_regret(), "bound_lhs": chk.lhs, "bound_rhs": chk.rhs,
            "bound_slack": chk.slack, "heuristic": tr.heuristic}))
        return
    else:
        raise io.ConfigError(f"unknown game {kind!r}")
    d = rep.as_dict()
    d.pop("predictor", None)
    if kind == "coverage":
        if not d["weighted"]:
            d["count"] = int(d["count"])
    else:
        d["value"] = rep.objective[rep.selected]
    run.emit("report.txt", io.format_report(d))


# ---------------------------------------------------------------- vc

def _label_file(path) -> np.ndarray:
    rows = [[int(float(v)) for v in ln.split(",")] for ln in io._lines(Path(path).read_text())]
    return np.array(rows, dtype=int)


def _report_of(obj) -> dict:
    return dataclasses.asdict(obj)


def cmd_vc(run: Run):
    sec = run.section
    kind = run.kind
    if kind == "shatter":
        if "labels" in sec:
            L = _label_file(run.path("labels"))
            name = "F"
        else:
            P = io.read_dataset(run.path("points")).X
            L = vc.label_matrix(build_hypotheses(run, P), P)
            name = sec["hypotheses"]
        r = vc.vc_of_labels(L, name, io.get(sec, "max_size", int, None),
                            io.get(sec, "max_candidates", int, 2_000_000))
        out = {"family": r.family, "vc": r.value, "exact": r.exact,
               "witness": list(r.witness), "n_functions": len(np.unique(L, axis=0)), "n_points": L.shape[1]}
    elif kind == "sauer":
        P = io.read_dataset(run.path("points")).X
        T = build_transforms(run)
        H = build_hypotheses(run, np.concatenate([P] + [t(P) for t in T]))
        out = _report_of(vc.sauer_bound_check(H, T, P))
    elif kind == "linear-closure":
        P = io.read_dataset(run.path("points")).X
        out = _report_of(vc.linear_closure_check(P, io.read_linear_maps(run.path("maps"))))
    elif kind == "boolean":
        d = io.get(sec, "d", int)
        out = _report_of(vc.boolean_composition_check(build_hypotheses(run), build_transforms(run), d))
    elif kind == "lowerbound":
        k = io.get(sec, "k", int)
        r = vc.lowerbound_check(k)
        out = {"k": k, "vc_h": r.vc_h.value, "vc_h_exact": r.vc_h.exact,
               "vc_ht_lower_bound": r.vc_ht.value, "witness": list(r.vc_ht.witness),
               "witness_verified": r.witness_verified}
    elif kind == "sample-size":
        r = vc.sample_size(io.get(sec, "vc", float), io.get(sec, "eps", float), io.get(sec, "delta", float),
                           io.get(sec, "shape", str, "uniform"), io.get(sec, "c", float, 1.0),
                           io.get(sec, "m", int, None))
        out = _report_of(r)
    else:
        raise io.ConfigError(f"unknown vc check {kind!r}")
    run.emit("report.txt", io.format_report(out))


# ---------------------------------------------------------------- experiment

_EXP_KEYS = {"d": int, "target": str, "train_size": int, "test_size": int, "transforms": str,
             "steps": int, "lr": float, "batch_size": int, "width": int, "eval_interval": int,
             "activation": str}


def experiment_config(run: Run, full_scale=None) -> ex.ExperimentConfig:
    sec = run.section
    unknown = set(sec) - set(_EXP_KEYS) - {"seeds", "n_seeds", "full_scale"}
    if unknown:
        raise io.ConfigError(f"unknown exp keys: {', '.join(sorted(unknown))}")
    kw = {k: io.get(sec, k, cast) for k, cast in _EXP_KEYS.items() if k in sec}
    if "seeds" in sec:
        kw["seeds"] = tuple(io.get(sec, "seeds", "ints"))
    else:
        base = run.need_seed()
        kw["seeds"] = tuple(range(base, base + io.get(sec, "n_seeds", int, 5)))
    full_scale = full_scale or sec.get("full_scale")
    if full_scale:
        return ex.ExperimentConfig.full_scale(full_scale, **kw)
    return ex.ExperimentConfig(**kw)


def cmd_experiment(run: Run, full_scale=None, dry_run=False):
    cfg = experiment_config(run, full_scale)
    run.emit("config.txt", io.format_report(dataclasses.asdict(cfg)))
    if dry_run:
        return cfg
    recs = ex.run_all(cfg)
    run.emit("records.csv", ex.records_to_csv(recs))
    run.emit("summary.csv", ex.summary_to_csv(ex.aggregate(recs)))
    run.emit("plot.gp", ex.gnuplot_script("summary.csv", f"{cfg.target} d={cfg.d}"))
    return cfg


# ---------------------------------------------------------------- main

def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="transinv", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="key=value config file")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--force", action="store_true", help="overwrite existing outputs")
    sub = p.add_subparsers(dest="command", required=True)
    g = sub.add_parser("game", parents=[common], help="learning rules and MW reductions")
    g.add_argument("kind", choices=GAME_KINDS)
    v = sub.add_parser("vc", parents=[common], help="VC-dimension and sample-size checks")
    v.add_argument("kind", choices=VC_KINDS)
    e = sub.add_parser("exp", parents=[common], help="hypercube SGD experiment")
    e.add_argument("--full-scale", choices=sorted(ex.FULL_SCALE_CONFIGS), default=None)
    e.add_argument("--dry-run", action="store_true", help="only echo the resolved config")
    return p


def _fail(code: int, exc: BaseException) -> int:
    rec = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = parser().parse_args(argv)
    kind = getattr(args, "kind", "run")
    try:
        cfg_path = Path(args.config)
        text = cfg_path.read_text()
        sections = io.parse_config(text)
        section = {**sections.get("", {}), **sections.get(args.command, {})}
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise io.ConfigError("seed must be a 64-bit unsigned integer")
        if getattr(args, "full_scale", None):
            section["full_scale"] = args.full_scale
        run = Run(args.command, kind, text, section, args.seed, args.out, args.force, cfg_path.parent)
        if args.command == "game":
            cmd_game(run)
        elif args.command == "vc":
            cmd_vc(run)
        else:
            cmd_experiment(run, dry_run=args.dry_run)
        run.flush()
    except (io.ConfigError, FileNotFoundError, IsADirectoryError) as exc:
        return _fail(EXIT_CONFIG, exc)
    except PreconditionError as exc:
        return _fail(EXIT_PRECONDITION, exc)
    except (InvariantViolation, AssertionError) as exc:
        return _fail(EXIT_INVARIANT, exc)
    except ValueError as exc:
        return _fail(EXIT_PRECONDITION, exc)
    except Exception as exc:  # noqa: BLE001
        return _fail(EXIT_INVARIANT, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
