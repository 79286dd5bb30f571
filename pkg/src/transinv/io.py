"""Plain-text file formats: datasets, distributions, error matrices, linear
maps, game traces, key=value reports, network parameters and configs.

Lines starting with ``#`` are comments everywhere.
"""
from __future__ import annotations

import hashlib
import math
from pathlib import Path

import numpy as np

from .core import ErrorMatrix, FiniteDistribution, LabeledSample
from .hypotheses import NetParams


class ConfigError(ValueError):
    pass


def _lines(text: str):
    for ln in text.splitlines():
        ln = ln.strip()
        if ln and not ln.startswith("#"):
            yield ln


def fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return ",".join(fmt(x) for x in v)
    if v is None:
        return "none"
    return str(v)


# ---------------------------------------------------------------- datasets

def _parse_table(text: str, extra: int):
    rows = list(_lines(text))
    if not rows or not rows[0].startswith("d="):
        raise ConfigError("data file must start with a 'd=<dim>' header")
    d = int(rows[0][2:])
    data = []
    for k, ln in enumerate(rows[1:], start=2):
        vals = [float(v) for v in ln.split(",")]
        if len(vals) != d + 1 + extra:
            raise ConfigError(f"line {k}: expected {d + 1 + extra} fields, got {len(vals)}")
        data.append(vals)
    A = np.array(data, dtype=float).reshape(-1, d + 1 + extra)
    return d, A


def parse_dataset(text: str) -> LabeledSample:
    d, A = _parse_table(text, 0)
    return LabeledSample(A[:, :d], A[:, d].astype(int))


def parse_distribution(text: str) -> FiniteDistribution:
    d, A = _parse_table(text, 1)
    return FiniteDistribution(A[:, :d], A[:, d].astype(int), A[:, d + 1])


def format_dataset(s: LabeledSample) -> str:
    out = [f"d={s.d}"]
    out += [",".join([fmt(float(v)) for v in x] + [str(int(y))]) for x, y in zip(s.X, s.y)]
    return "\n".join(out) + "\n"


def format_distribution(D: FiniteDistribution) -> str:
    out = [f"d={D.d}"]
    out += [",".join([fmt(float(v)) for v in x] + [str(int(y)), fmt(float(w))])
            for x, y, w in zip(D.X, D.y, D.mass)]
    return "\n".join(out) + "\n"


def read_dataset(path) -> LabeledSample:
    return parse_dataset(Path(path).read_text())


def read_distribution(path) -> FiniteDistribution:
    return parse_distribution(Path(path).read_text())


# ---------------------------------------------------------------- error matrices

def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def parse_matrix(text: str) -> ErrorMatrix:
    """Header of transform names then one row per hypothesis. A leading
    non-numeric column (row tags) is optional."""
    rows = [[c.strip() for c in ln.split(",")] for ln in _lines(text)]
    if len(rows) < 2:
        raise ConfigError("matrix file needs a header and at least one row")
    header, body = rows[0], rows[1:]
    tagged = not _is_float(body[0][0])
    cols = header[1:] if tagged and len(header) == len(body[0]) else header
    tags, vals = [], []
    for k, r in enumerate(body, start=2):
        if tagged:
            tags.append(r[0])
            r = r[1:]
        if len(r) != len(cols):
            raise ConfigError(f"matrix line {k}: {len(r)} values for {len(cols)} columns")
        vals.append([_parse_num(v) for v in r])
    return ErrorMatrix(np.array(vals), tuple(tags), tuple(cols))


def _parse_num(s: str) -> float:
    s = s.strip()
    if s.endswith("%"):
        return float(s[:-1]) / 100
    if "/" in s:
        a, b = s.split("/")
        return float(a) / float(b)
    return float(s)


def format_matrix(E: ErrorMatrix) -> str:
    out = [",".join(("hypothesis",) + tuple(E.col_names))]
    for tag, row in zip(E.row_tags, E.values):
        out.append(",".join([tag] + [fmt(float(v)) for v in row]))
    return "\n".join(out) + "\n"


def read_matrix(path) -> ErrorMatrix:
    return parse_matrix(Path(path).read_text())


# ---------------------------------------------------------------- linear maps

def parse_linear_maps(text: str) -> list[np.ndarray]:
    """Row-major matrices, one row per line, separated by blank lines."""
    maps, cur = [], []
    for ln in text.splitlines() + [""]:
        ln = ln.strip()
        if ln.startswith("#"):
            continue
        if not ln:
            if cur:
                A = np.array(cur, dtype=float)
                if A.shape[0] != A.shape[1]:
                    raise ConfigError(f"linear map {len(maps) + 1} is not square: {A.shape}")
                maps.append(A)
                cur = []
            continue
        cur.append([float(v) for v in ln.replace(",", " ").split()])
    return maps


def read_linear_maps(path) -> list[np.ndarray]:
    return parse_linear_maps(Path(path).read_text())


def format_linear_maps(maps) -> str:
    blocks = []
    for A in maps:
        blocks.append("\n".join(" ".join(fmt(float(v)) for v in row) for row in np.asarray(A)))
    return "\n\n".join(blocks) + "\n"


# ---------------------------------------------------------------- traces and reports

def format_trace(tr) -> str:
    out = [
        f"rule={tr.rule}",
        f"rounds={tr.rounds}",
        f"eta={fmt(tr.eta)}",
        f"mode={tr.mode}",
        f"capped={fmt(tr.capped)}",
        f"heuristic={fmt(tr.heuristic)}",
        f"transforms={fmt(list(tr.transform_names))}",
        f"offsets={fmt(list(tr.offsets))}",
        "r;h;Q;err;Z",
    ]
    for r in range(tr.rounds):
        out.append(";".join([str(r + 1), str(tr.tags[r]), fmt(tr.Q[r]), fmt(tr.errors[r]), fmt(tr.Z[r])]))
    return "\n".join(out) + "\n"


def parse_trace(text: str) -> dict:
    meta, rounds = {}, []
    it = _lines(text)
    for ln in it:
        if ln == "r;h;Q;err;Z":
            break
        k, _, v = ln.partition("=")
        meta[k] = v
    for ln in it:
        r, h, Q, e, Z = ln.split(";")
        rounds.append({"r": int(r), "h": h, "Q": [float(x) for x in Q.split(",")],
                       "err": [float(x) for x in e.split(",")], "Z": float(Z)})
    meta["records"] = rounds
    return meta


def format_report(d: dict) -> str:
    return "".join(f"{k}={fmt(v)}\n" for k, v in d.items())


def parse_report(text: str) -> dict:
    out = {}
    for ln in _lines(text):
        k, _, v = ln.partition("=")
        out[k.strip()] = v.strip()
    return out


# ---------------------------------------------------------------- network parameters

def format_net(p: NetParams) -> str:
    out = [f"# NetParams width={p.width} d={p.d} activation={p.activation}"]
    out += [" ".join(fmt(float(v)) for v in row) for row in p.W1]
    out.append(" ".join(fmt(float(v)) for v in p.b1))
    out.append(" ".join(fmt(float(v)) for v in p.w2))
    out.append(fmt(float(p.b2)))
    return "\n".join(out) + "\n"


def parse_net(text: str) -> NetParams:
    lines = text.splitlines()
    head = lines[0].lstrip("# ").split()
    if not head or head[0] != "NetParams":
        raise ConfigError("missing NetParams header")
    kv = dict(h.split("=") for h in head[1:])
    width, d = int(kv["width"]), int(kv["d"])
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != width + 3:
        raise ConfigError(f"expected {width + 3} data lines, got {len(body)}")
    W1 = np.array([[float(v) for v in ln.split()] for ln in body[:width]]).reshape(width, d)
    b1 = np.array([float(v) for v in body[width].split()])
    w2 = np.array([float(v) for v in body[width + 1].split()])
    return NetParams(W1, b1, w2, float(body[width + 2]), kv.get("activation", "relu"))


# ---------------------------------------------------------------- config

def parse_config(text: str) -> dict:
    """key = value lines grouped under optional [section] headers.

    Keys before the first header go to the "" section.
    """
    sections = {"": {}}
    cur = ""
    for k, ln in enumerate(text.splitlines(), start=1):
        ln = ln.split("#", 1)[0].strip() if not ln.strip().startswith("#") else ""
        if not ln:
            continue
        if ln.startswith("[") and ln.endswith("]"):
            cur = ln[1:-1].strip().lower()
            sections.setdefault(cur, {})
            continue
        if "=" not in ln:
            raise ConfigError(f"config line {k}: expected key = value")
        key, _, val = ln.partition("=")
        sections[cur][key.strip().lower()] = val.strip()
    return sections


def config_digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def get(section: dict, key: str, cast=str, default=...):
    if key not in section:
        if default is ...:
            raise ConfigError(f"missing config key {key!r}")
        return default
    raw = section[key]
    try:
        if cast is bool:
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if cast == "floats":
            return [_parse_num(v) for v in raw.split(",") if v.strip()]
        if cast == "ints":
            return [int(v) for v in raw.split(",") if v.strip()]
        v = cast(raw)
        if isinstance(v, float) and not math.isfinite(v):
            raise ValueError(raw)
        return v
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
