"""Command line interface: ``unfold embed|compare|generate|score``.

Errors are reported as one line starting with ``error:``; usage errors exit
with status 2, everything else with 1.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .datasets import GENERATORS, generate, load_csv
from .eval import GplvmScoreConfig, compare_methods, gplvm_fit
from .pipeline import METHODS, run_method

# option name -> (type, default); flags beat the config file, which beats these
OPTIONS = {
    "method": (str, None),
    "methods": (str, ",".join(METHODS)),
    "k": (int, 6),
    "q": (int, 2),
    "gamma": (float, 1e-4),
    "rho": (float, 0.0),
    "sigma": (float, None),
    "ridge": (float, 1e-6),
    "seed": (int, 0),
    "ordering": (str, "input"),
    "input": (str, None),
    "output": (str, None),
    "svg": (str, None),
    "embedding": (str, None),
    "header": (bool, False),
    "strict_connectivity": (bool, False),
    "trajectory": (bool, False),
    "timing": (bool, False),
    "restarts": (int, 5),
    "n": (int, 200),
    "noise": (float, 0.0),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes equal underscores."""
    out = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in OPTIONS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        typ = OPTIONS[key][0]
        try:
            out[key] = _bool(value) if typ is bool else typ(value)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: bad value {value!r} for {key}") from None
    return out


def _add(p, *names, **kw):
    for name in names:
        key = name.replace("-", "_")
        typ = OPTIONS[key][0]
        if typ is bool:
            p.add_argument(f"--{name}", action="store_true", default=None, **kw)
        else:
            p.add_argument(f"--{name}", type=typ, default=None, **kw)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="unfold", description="Spectral embeddings as Gaussian random fields.")
    ap.add_argument("--version", action="version", version=f"unfold {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    model = ("k", "q", "gamma", "rho", "sigma", "ridge", "seed", "ordering",
             "strict-connectivity")

    e = sub.add_parser("embed", help="embed a data file with one method")
    _add(e, "method", "input", "output", "svg", "header", "trajectory", *model)

    c = sub.add_parser("compare", help="score several methods on one data file")
    _add(c, "methods", "input", "output", "header", "restarts", "timing", *model)

    g = sub.add_parser("generate", help="write a synthetic data set")
    g.add_argument("name", choices=sorted(GENERATORS))
    _add(g, "n", "noise", "seed", "output")

    s = sub.add_parser("score", help="GP-LVM score of an embedding for a data file")
    _add(s, "input", "embedding", "header", "restarts", "seed", "output")

    for p in (e, c, g, s):
        p.add_argument("--config", default=None, help="flat key=value file")
    return ap


def resolve(args) -> dict:
    """Merge flags, config file and defaults (in that order of precedence)."""
    cfg = {k: v[1] for k, v in OPTIONS.items()}
    if args.config:
        cfg.update(read_config(args.config))
    for k, v in vars(args).items():
        if v is not None and k != "config":
            cfg[k] = v
    return cfg


def _check(cfg, command):
    if cfg["q"] < 1:
        raise UsageError("--q must be at least 1")
    if cfg["k"] < 1:
        raise UsageError("--k must be at least 1")
    if cfg["rho"] < 0:
        raise UsageError("--rho must be nonnegative")
    if not cfg["gamma"] > 0:
        raise UsageError("--gamma must be positive")
    if cfg["sigma"] is not None and not cfg["sigma"] > 0:
        raise UsageError("--sigma must be positive")
    if cfg["ridge"] < 0:
        raise UsageError("--ridge must be nonnegative")
    if cfg["ordering"] not in ("input", "random"):
        raise UsageError("--ordering must be 'input' or 'random'")
    if cfg["restarts"] < 1:
        raise UsageError("--restarts must be at least 1")
    if command == "embed":
        if cfg["method"] is None:
            raise UsageError("--method is required")
        if cfg["method"] not in METHODS:
            raise UsageError(f"invalid method {cfg['method']!r} (choose from {', '.join(METHODS)})")
    if command == "compare":
        bad = [m for m in _methods(cfg) if m not in METHODS]
        if bad:
            raise UsageError(f"invalid method {bad[0]!r} (choose from {', '.join(METHODS)})")
    if command in ("embed", "compare", "score") and cfg["input"] is None:
        raise UsageError("--input is required")
    if command == "score" and cfg["embedding"] is None:
        raise UsageError("--embedding is required")


def _methods(cfg):
    return [m.strip() for m in cfg["methods"].split(",") if m.strip()]


def _params(cfg):
    return dict(k=cfg["k"], gamma=cfg["gamma"], rho=cfg["rho"], sigma=cfg["sigma"],
                ridge=cfg["ridge"], seed=cfg["seed"], ordering=cfg["ordering"],
                strict=cfg["strict_connectivity"])


def _fmt(x) -> str:
    return "%.17g" % x


def write_matrix(path, X, header=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    for row in np.atleast_2d(X):
        w.writerow([_fmt(v) for v in row])
    _write_text(path, buf.getvalue())


def _write_text(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _sidecar(path, suffix):
    p = Path(path)
    return p.with_name(p.stem + suffix)


def read_matrix(path, header: bool = False) -> np.ndarray:
    """Numeric CSV; a first row with no numeric cell is taken as a header."""
    if not header:
        with open(path, newline="", encoding="utf-8") as fh:
            first = next(csv.reader(fh), [])
        header = bool(first) and not any(_is_number(c) for c in first)
    return load_csv(path, header=header).Y


def _is_number(text) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def svg_scatter(X, trajectory: bool = False, size: int = 480, pad: int = 24) -> str:
    """SVG 1.1 scatter of the first two coordinates (index on x when q = 1)."""
    X = np.asarray(X, dtype=float)
    if X.shape[1] == 1:
        X = np.c_[np.arange(X.shape[0]), X[:, 0]]
    xy = X[:, :2]
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    u = pad + (xy[:, 0] - lo[0]) / span[0] * (size - 2 * pad)
    v = size - pad - (xy[:, 1] - lo[1]) / span[1] * (size - 2 * pad)
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
           f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>']
    if trajectory and len(u) > 1:
        pts = " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(u, v))
        out.append(f'<polyline points="{pts}" fill="none" stroke="#888888" stroke-width="1"/>')
    for a, b in zip(u, v):
        out.append(f'<circle cx="{a:.3f}" cy="{b:.3f}" r="3" fill="#1f4e9c"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_embed(cfg):
    Y = read_matrix(cfg["input"], cfg["header"])
    emb = run_method(cfg["method"], Y, q=cfg["q"], **_params(cfg))
    names = [f"x{i + 1}" for i in range(emb.q)]
    write_matrix(cfg["output"], emb.X, names)
    if cfg["output"] not in (None, "-"):
        write_matrix(_sidecar(cfg["output"], ".eigenvalues.csv"),
                     np.asarray(emb.eigenvalues)[:, None], ["eigenvalue"])
    if cfg["svg"]:
        Path(cfg["svg"]).write_text(svg_scatter(emb.X, cfg["trajectory"]), encoding="utf-8")


def score_table(rows, timing: bool):
    """CSV and aligned text versions of a comparison."""
    head = ["method", "score"] + (["runtime_s"] if timing else []) + ["error"]
    body = []
    for r in rows:
        line = [r.method, "" if r.score is None else _fmt(r.score)]
        if timing:
            line.append("%.3f" % r.runtime)
        line.append(r.error or "")
        body.append(line)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(head)
    w.writerows(body)
    shown = [[c if i != 1 or not c else "%.3f" % float(c) for i, c in enumerate(line)]
             for line in body]
    widths = [max(len(x) for x in col) for col in zip(head, *shown)]
    text = "\n".join("  ".join(c.ljust(wd) for c, wd in zip(line, widths)).rstrip()
                     for line in [head] + shown) + "\n"
    return buf.getvalue(), text


def cmd_compare(cfg):
    Y = read_matrix(cfg["input"], cfg["header"])
    rows = compare_methods(Y, _methods(cfg), q=cfg["q"], params=_params(cfg),
                           cfg=GplvmScoreConfig(restarts=cfg["restarts"], seed=cfg["seed"]))
    table, text = score_table(rows, cfg["timing"])
    if cfg["output"] not in (None, "-"):
        _write_text(cfg["output"], table)
        _write_text(_sidecar(cfg["output"], ".txt"), text)
    sys.stdout.write(text)


def cmd_generate(cfg):
    d = generate(cfg["name"], cfg["n"], cfg["noise"], cfg["seed"])
    write_matrix(cfg["output"], d.Y)
    if cfg["output"] not in (None, "-") and d.truth is not None:
        names = [f"t{i + 1}" for i in range(d.truth.shape[1])]
        write_matrix(_sidecar(cfg["output"], ".truth.csv"), d.truth, names)


def cmd_score(cfg):
    Y = read_matrix(cfg["input"], cfg["header"])
    X = read_matrix(cfg["embedding"])
    res = gplvm_fit(Y, X, GplvmScoreConfig(restarts=cfg["restarts"], seed=cfg["seed"]))
    _write_text(cfg["output"], f"score,{_fmt(res.score)}\n")


COMMANDS = {"embed": cmd_embed, "compare": cmd_compare, "generate": cmd_generate,
            "score": cmd_score}


def _threads():
    raw = os.environ.get("UNFOLD_THREADS")
    if raw is None:
        return contextlib.nullcontext()
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"UNFOLD_THREADS must be a positive integer, got {raw!r}")
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve(args)
        _check(cfg, args.command)
        with _threads(), warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            COMMANDS[args.command](cfg)
        seen = set()
        for w in caught:
            msg = str(w.message).splitlines()[0]
            if msg not in seen:
                seen.add(msg)
                print(f"warning: {msg}", file=sys.stderr)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - every failure becomes one line
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
