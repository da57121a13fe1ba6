"""Command line entry point: ``okflow {flow,verify,critical,energy}``.

Every output file starts with a metadata header carrying the config hash,
the package version and the tolerances in force. Floats are written with 17
significant digits so repeated runs are byte-identical.

Exit codes: 0 success, 2 invalid configuration, 3 numerical halt
(self-intersection), 4 a check failed under ``--strict``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from . import inequalities as ineq
from .corpus import convex_corpus, small_mass_corpus, strip_sweep, symmetric_corpus
from .criticality import (
    CRITICAL_TOL,
    counterexample_log,
    counterexample_riesz,
    classify,
    el_residual,
    stripe_residual,
)
from .flow import C_STAB, FlowHalted, FlowState, StopRule, run, trace_csv
from .geometry import GeometryError, MultiCurve, ShapeSpec, generate, loads, to_dict
from .potential import Kernel, KernelError, total_energy

EXIT_OK, EXIT_CONFIG, EXIT_HALT, EXIT_CHECK = 0, 2, 3, 4

# keys that name where output goes; they do not change the computation
_OUTPUT_KEYS = {"out", "snapshots", "config", "func"}


class ConfigError(ValueError):
    """A parameter fails validation before any computation."""


# -- deterministic serialization ---------------------------------------------

def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def dump_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dump_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dump_json(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dump_json(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def config_hash(cfg: dict) -> str:
    core = {k: v for k, v in sorted(cfg.items()) if k not in _OUTPUT_KEYS}
    return hashlib.sha256(json.dumps(core, sort_keys=True, default=str).encode()).hexdigest()


def _meta(cfg: dict, tolerances: dict) -> dict:
    return {"config_sha256": config_hash(cfg), "version": __version__, "command": cfg.get("command"),
            "tolerances": tolerances}


def _write(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_json(doc: dict, path: str | None):
    _write(dump_json(doc) + "\n", path)


# -- shared parsing -------------------------------------------------------------

def _kernel(text: str) -> Kernel:
    try:
        return Kernel.parse(text)
    except KernelError as exc:
        raise ConfigError(str(exc)) from exc


def _shape(cfg: dict) -> MultiCurve:
    spec = cfg.get("shape")
    if spec is None:
        raise ConfigError("a --shape is required")
    n = cfg.get("n") or 512
    try:
        if spec.startswith("file:"):
            with open(spec[5:], encoding="utf-8") as fh:
                return loads(fh.read())
        return generate(ShapeSpec.parse(spec, n))
    except (GeometryError, ValueError, OSError) as exc:
        raise ConfigError(f"invalid shape {spec!r}: {exc}") from exc


def _positive_int(name: str, v, lo: int = 1):
    if v is None:
        return
    if int(v) != v or v < lo:
        raise ConfigError(f"{name} must be an integer >= {lo}, got {v}")


def _validate(cfg: dict):
    _positive_int("n", cfg.get("n"), 16)
    _positive_int("size", cfg.get("size"), 1)
    g = cfg.get("grid")
    if g is not None:
        try:
            Kernel.torus(int(g))
        except KernelError as exc:
            raise ConfigError(str(exc)) from exc
    gamma = cfg.get("gamma")
    if gamma is not None and not (math.isfinite(gamma) and gamma >= 0):
        raise ConfigError(f"gamma must be finite and non-negative, got {gamma}")
    cs = cfg.get("c_stab")
    if cs is not None and not 0 < cs <= C_STAB:
        raise ConfigError(f"c_stab must lie in (0, {C_STAB}], got {cs}")
    tol = cfg.get("tol")
    if tol is not None and not tol > 0:
        raise ConfigError(f"tol must be positive, got {tol}")
    for k in cfg.get("kernels") or []:
        _kernel(k)
    if cfg.get("kernel"):
        _kernel(cfg["kernel"])


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("OKFLOW_THREADS", "1")))
    except ValueError:
        return 1


def _map_ordered(fn, items):
    """Map over ``items`` with up to OKFLOW_THREADS workers, keeping input order."""
    nt = _threads()
    if nt == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(nt) as ex:
        return list(ex.map(fn, items))


# -- commands -------------------------------------------------------------------

def cmd_flow(cfg: dict) -> int:
    shape = _shape(cfg)
    kernel = _kernel(cfg["kernel"])
    try:
        stop = StopRule.parse(cfg["stop"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        state = FlowState.start(shape, kernel=kernel, gamma=cfg["gamma"], c_stab=cfg["c_stab"],
                                energy_every=cfg["energy_every"], n=cfg.get("n"))
    except (GeometryError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    every = cfg.get("snapshot_every") or 0
    snaps = [{"step": 0, "t": 0.0, "curve": to_dict(state.shape())}]
    code, error = EXIT_OK, None
    try:
        if every:
            while not stop.reached(state, state.history[-1].deficit):
                target = StopRule(max_time=stop.max_time, deficit=stop.deficit,
                                  max_steps=min(state.steps + every, stop.max_steps or 1 << 62))
                state = run(state, target)
                snaps.append({"step": state.steps, "t": state.t, "curve": to_dict(state.shape())})
        else:
            state = run(state, stop)
    except FlowHalted as exc:
        state, code = exc.state, EXIT_HALT
        error = {"error": "flow halted", "message": str(exc), "t": state.t, "steps": state.steps}
        print(dump_json(error), file=sys.stderr)
    if not every or snaps[-1]["step"] != state.steps:
        snaps.append({"step": state.steps, "t": state.t, "curve": to_dict(state.shape())})
    meta = _meta(cfg, {"area_drift": 1e-9, "uniform_chords": 1e-9, "stop": cfg["stop"]})
    header = {"config_sha256": meta["config_sha256"], "version": __version__,
              "tolerances": json.dumps(meta["tolerances"], sort_keys=True),
              "shape": cfg["shape"], "kernel": kernel.label, "gamma": format_float(cfg["gamma"])}
    if error:
        header["halted"] = error["message"]
    _write(trace_csv(state.history, header), cfg.get("out"))
    if cfg.get("snapshots"):
        _write_json({"meta": meta, "snapshots": snaps}, cfg["snapshots"])
    return code


_CHECKS = {
    "bonnesen": ("BONNESEN", False), "gage": ("GAGE", False), "iso_deficit": ("ISO_DEFICIT", False),
    "pot_deficit": ("POT_DEFICIT", True), "main_r2": ("MAIN_R2", True), "weak": ("WEAK", True),
}


def _plane_checks(shape: MultiCurve, kernels, only, gage: bool) -> list[dict]:
    out = []

    def attempt(fn, *args):
        try:
            return fn(*args).as_dict()
        except GeometryError as exc:
            return {"id": fn.__name__.replace("check_", "").upper(), "error": str(exc)}

    for name, (rid, with_kernel) in _CHECKS.items():
        if only and name not in only:
            continue
        if name == "gage" and not gage:
            continue
        fn = getattr(ineq, f"check_{name}")
        if name == "gage":
            out.append(attempt(fn, shape, (0.0, 0.0)))
        elif with_kernel:
            out += [attempt(fn, shape, k) for k in kernels]
        else:
            out.append(attempt(fn, shape))
    return out


def _summary(reports: list[dict]) -> dict:
    by_id: dict = {}
    for r in reports:
        key = r["id"] + (f"[{r['kernel']}]" if r.get("kernel") not in (None, "none") else "")
        s = by_id.setdefault(key, {"count": 0, "holds": 0, "errors": 0, "worst_margin": None,
                                   "max_sharpness": None, "max_ratio": None})
        s["count"] += 1
        if "error" in r:
            s["errors"] += 1
            continue
        s["holds"] += int(r["holds"])
        for fld, val, better in (("worst_margin", r["margin"], min), ("max_sharpness", r["sharpness"], max),
                                 ("max_ratio", r["ratio"], max)):
            s[fld] = val if s[fld] is None else better(s[fld], val)
    return by_id


def cmd_verify(cfg: dict) -> int:
    only = {s.strip().lower() for s in cfg["only"].split(",")} if cfg.get("only") else None
    if only and not only <= set(_CHECKS) | {"strip"}:
        raise ConfigError(f"unknown checks {sorted(only - set(_CHECKS))}; choose from {sorted(_CHECKS)}")
    kernels = [_kernel(k) for k in cfg["kernels"]]
    n, size, seed = cfg["n"], cfg["size"], cfg["seed"]
    entries = []
    if cfg.get("shape"):
        entries.append(("shape", cfg["shape"], _shape(cfg)))
    else:
        corpus = cfg["corpus"]
        if corpus == "convex":
            for k in kernels:
                entries += [(f"convex[{k.label}]", e.index, e.shape) for e in convex_corpus(k, size, seed, n)]
        elif corpus == "symmetric":
            entries += [("symmetric", e.index, e.shape) for e in symmetric_corpus(size, seed, n)]
        elif corpus == "small":
            entries += [("small", e.index, e.shape) for e in small_mass_corpus(size, seed, n)]
        elif corpus != "strips":
            raise ConfigError(f"unknown corpus {corpus!r}; expected convex, symmetric, small or strips")
    tol = {"report": "1e-8*max(|lhs|,|rhs|,1)"}
    doc = {"meta": _meta(cfg, tol), "reports": []}
    strip_shapes = [s for _, _, s in entries if s.is_torus and s.topology == "strip"]
    plane = [(g, i, s) for g, i, s in entries if not s.is_torus]
    if cfg.get("corpus") == "strips" and not cfg.get("shape"):
        strip_shapes = strip_sweep(tuple(cfg["eps"]), cfg["width"], n)

    def one(item):
        group, idx, shape = item
        gage = group == "symmetric" or (only is not None and "gage" in only)
        # corpus kernels: each convex sub-corpus is checked against its own kernel
        ks = [k for k in kernels if group == f"convex[{k.label}]"] if group.startswith("convex") else kernels
        return [dict(r, group=group, index=idx) for r in _plane_checks(shape, ks, only, gage)]

    for rs in _map_ordered(one, plane):
        doc["reports"] += rs
    if strip_shapes and (only is None or "strip" in only):
        consts, triples = ineq.calibrate_strips(strip_shapes, cfg["grid"])
        doc["strip_constants"] = {"STRIP_ISO": consts.iso, "STRIP_POT": consts.pot, "MAIN_T2": consts.c0}
        table = []
        for shape, triple in zip(strip_shapes, triples):
            row = {"eps": shape.meta.get("eps"), "width": shape.meta.get("w")}
            for r in triple:
                doc["reports"].append(r.as_dict())
                row[r.id] = r.ratio
            table.append(row)
        doc["strip_ratio_table"] = table
    doc["summary"] = _summary(doc["reports"])
    _write_json(doc, cfg.get("out"))
    failed = any("error" in r or not r["holds"] for r in doc["reports"])
    return EXIT_CHECK if cfg.get("strict") and failed else EXIT_OK


def cmd_critical(cfg: dict) -> int:
    tol = cfg["tol"]
    meta = _meta(cfg, {"critical": tol})
    doc: dict = {"meta": meta}
    ce = cfg.get("counterexample")
    if ce:
        kernel = _kernel(ce)
        if kernel.kind == "log":
            res = counterexample_log(cfg["n"], cfg["gamma"])
            rep = res["report"]
            doc.update(
                counterexample="log", r=res["r"], R=2 * res["r"],
                identity={"lhs": res["identity"][0], "rhs": res["identity"][1],
                          "difference": res["identity"][0] - res["identity"][1]},
                report=rep.as_dict(), exact_potential=res["exact_potential"], exact_jump=res["exact_jump"],
                eta_bar=res["eta_bar"], eta_bar_printed=res["eta_bar_printed"],
                r_star=res["r_star"], report_star=res["report_star"].as_dict(),
            )
        elif kernel.kind == "riesz":
            r, rep = counterexample_riesz(kernel.alpha, cfg["n"], gamma=cfg["gamma"])
            d = rep.as_dict()
            d.pop("trace", None)
            doc.update(counterexample=kernel.label, r_star=r, report=d)
        else:
            raise ConfigError("counterexamples exist for the log and riesz kernels")
    else:
        shape_spec = cfg.get("shape") or ""
        if shape_spec.startswith("stripe"):
            w = ShapeSpec.parse(shape_spec).params
            rep = stripe_residual(w[0] if w else 0.5, cfg["grid"], cfg["gamma"], cfg["n"])
            doc["report"] = rep.as_dict()
        else:
            shape = _shape(cfg)
            kernel = _kernel(cfg["kernel"]) if not shape.is_torus else Kernel.torus(cfg["grid"])
            if shape.topology == "simple":
                label, rep, dedt = classify(shape, kernel, cfg["gamma"], tol)
                doc.update(classification=label, dEdt=dedt)
            else:
                rep = el_residual(shape, kernel, cfg["gamma"])
                doc["classification"] = "CriticalLike" if rep.residual_sup < tol else "NotCritical"
            doc["report"] = rep.as_dict()
    doc["critical_like"] = bool(doc["report"]["residual_sup"] < tol)
    _write_json(doc, cfg.get("out"))
    return EXIT_CHECK if cfg.get("strict") and not doc["critical_like"] else EXIT_OK


def cmd_energy(cfg: dict) -> int:
    shape = _shape(cfg)
    kernel = _kernel(cfg["kernel"]) if not shape.is_torus else Kernel.torus(cfg["grid"])
    eb = total_energy(shape, kernel, cfg["gamma"])
    doc = {"meta": _meta(cfg, {}), "shape": cfg["shape"], **eb.as_dict()}
    _write_json(doc, cfg.get("out"))
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="okflow", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"okflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, gamma=1.0):
        sp.add_argument("--config", help="JSON file with defaults for any of the flags")
        sp.add_argument("--shape", help="generator spec such as ellipse:2,1 or file:curve.json")
        sp.add_argument("--kernel", default="log", help="log, riesz:ALPHA or torus[:GRID]")
        sp.add_argument("--gamma", type=float, default=gamma)
        sp.add_argument("--n", type=int, default=512, help="boundary vertices per component")
        sp.add_argument("--grid", type=int, default=512, help="torus grid size")
        sp.add_argument("--out", help="output file (default stdout)")

    f = sub.add_parser("flow", help="area-preserving curve shortening flow")
    common(f)
    f.add_argument("--stop", default="deficit:1e-6", help="deficit:EPS, time:T, steps:K joined by +")
    f.add_argument("--c-stab", dest="c_stab", type=float, default=C_STAB)
    f.add_argument("--energy-every", dest="energy_every", type=int, default=0)
    f.add_argument("--snapshots", help="JSON file for curve snapshots")
    f.add_argument("--snapshot-every", dest="snapshot_every", type=int, default=0)
    f.set_defaults(func=cmd_flow)

    v = sub.add_parser("verify", help="inequality checks over a seeded corpus")
    common(v)
    v.add_argument("--corpus", default="convex", help="convex, symmetric, small or strips")
    v.add_argument("--kernels", type=lambda s: [x for x in s.split(",") if x],
                   default=["log", "riesz:0.5"], help="comma separated kernels")
    v.add_argument("--size", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--only", help="comma separated subset of " + ",".join(_CHECKS) + ",strip")
    v.add_argument("--eps", type=lambda s: [float(x) for x in s.split(",")], default=[0.02, 0.05, 0.1])
    v.add_argument("--width", type=float, default=0.5)
    v.add_argument("--strict", action="store_true", help="exit 4 when any check fails")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("critical", help="Euler-Lagrange residuals and counterexamples")
    common(c)
    c.add_argument("--counterexample", help="log or riesz:ALPHA")
    c.add_argument("--tol", type=float, default=CRITICAL_TOL)
    c.add_argument("--strict", action="store_true", help="exit 4 unless the result is CriticalLike")
    c.set_defaults(func=cmd_critical)

    e = sub.add_parser("energy", help="single-shape energy breakdown")
    common(e)
    e.set_defaults(func=cmd_energy)
    return p


def _resolve(argv) -> dict:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        sp = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sp._actions}
        bad = sorted(set(file_cfg) - known)
        if bad:
            raise ConfigError(f"unknown config keys {bad}")
        # file values act as defaults; flags given on the command line win
        sp.set_defaults(**file_cfg)
        args = parser.parse_args(argv)
    return vars(args)


def main(argv=None) -> int:
    try:
        cfg = _resolve(argv)
        func = cfg["func"]
        _validate(cfg)
        return func(cfg)
    except ConfigError as exc:
        print(dump_json({"error": "invalid configuration", "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
