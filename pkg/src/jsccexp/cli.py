"""Command-line front end.

Subcommands read a JSON instance config, run one computation and write
``result.json`` (plus ``curves_*.csv`` for ``sweep-rho``) into ``--out``.
Exponents and rates are reported in the display base; ρ, distributions and
γ are base-free.

Exit codes: 0 success, 2 config error, 3 numerical non-convergence,
4 enumeration cap exceeded.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from importlib import metadata

import jsonschema
import numpy as np

from .ensemble import EnsembleConfig, exact_ensemble_error, monte_carlo_error
from .errors import (
    ConfigError,
    ConfigInvalid,
    ConfigParse,
    EnumerationCapExceeded,
    NoConvergence,
    ValidationError,
)
from .exponents import (
    best_pair_search,
    class_exponents,
    critical_rate,
    csiszar_jscc_exponent_dual,
    csiszar_jscc_exponent_primal,
    e0_model,
    gallager_jscc_exponent,
    jscc_sphere_packing_exponent,
)
from .finite import PartitionSpec, realize_partition, theorem1_bound
from .gallager import _e0, lemma1_bound, source_function
from .hull import DistributionSet, capacity
from .presets import PRESETS
from .prob import LOG2E, entropy, validate_channel, validate_input, validate_source

SCHEMA_VERSION = 1
DEFAULTS = {
    "base": "bits",
    "rho_step": 1e-3,
    "seed": 0,
    "trials": 10**5,
    "mode": "exact",
}

_prob_vector = {"type": "array", "items": {"type": "number"}, "minItems": 1}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "source", "channel"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "source": _prob_vector,
        "channel": {
            "oneOf": [
                {"type": "array", "items": _prob_vector, "minItems": 1},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["preset"],
                    "properties": {
                        "preset": {"enum": sorted(PRESETS)},
                        "xi1": {"type": "number", "minimum": 0, "maximum": 1 / 3},
                        "xi2": {"type": "number", "minimum": 0, "maximum": 0.5},
                    },
                },
            ]
        },
        "t": {"type": "number", "exclusiveMinimum": 0},
        "base": {"enum": ["bits", "nats"]},
        "rho_step": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.5},
        "input_distribution": _prob_vector,
        "k": {"type": "integer", "minimum": 1},
        "n": {"type": "integer", "minimum": 1},
        "gamma": {"type": "number", "minimum": 0, "maximum": 1},
        "q1": _prob_vector,
        "q2": _prob_vector,
        "seed": {"type": "integer", "minimum": 0},
        "trials": {"type": "integer", "minimum": 1},
        "mode": {"enum": ["exact", "mc"]},
    },
}


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# -- config ----------------------------------------------------------------------

class Instance:
    """Resolved config with validated numeric objects."""

    def __init__(self, raw: dict):
        self.raw = raw
        self.base = raw["base"]
        self.scale = LOG2E if self.base == "bits" else 1.0
        self.step = raw["rho_step"]
        self.t = raw.get("t")
        self.source = _field("source", validate_source, raw["source"])
        ch = raw["channel"]
        if isinstance(ch, dict):
            params = {k: v for k, v in ch.items() if k != "preset"}
            self.channel = _field("channel", PRESETS[ch["preset"]], **params)
        else:
            self.channel = _field("channel", validate_channel, ch)
        nx = self.channel.n_inputs
        self.fixed_q = None
        if "input_distribution" in raw:
            self.fixed_q = _field("input_distribution", validate_input, raw["input_distribution"], nx)
        self.q1 = _field("q1", validate_input, raw["q1"], nx) if "q1" in raw else None
        self.q2 = _field("q2", validate_input, raw["q2"], nx) if "q2" in raw else None

    def need(self, key):
        if self.raw.get(key) is None:
            raise ConfigInvalid(key, "required for this command (config or flag)")
        return self.raw[key]

    def rate(self):
        return float(self.need("t"))


def _field(path, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (ValidationError, ValueError) as exc:
        raise ConfigInvalid(path, str(exc)) from exc


def load_config(path, overrides=None) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigParse(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"{path}: {exc}") from exc
    return resolve_config(raw, overrides)


def resolve_config(raw, overrides=None) -> Instance:
    raw = copy.deepcopy(raw)
    for key, val in (overrides or {}).items():
        if val is not None:
            raw[key] = val
    for key, val in DEFAULTS.items():
        raw.setdefault(key, val)
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigInvalid(path, exc.message) from exc
    if isinstance(raw["channel"], dict) and raw["channel"]["preset"] == "example-6x4":
        raw["channel"].setdefault("xi1", 0.065)
        raw["channel"].setdefault("xi2", 0.01)
    return Instance(raw)


# -- output ----------------------------------------------------------------------

def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def write_result(out_dir, command, inst: Instance, results, started):
    doc = {
        "tool": "jsccexp",
        "version": _version(),
        "command": command,
        "config": inst.raw,
        "results": results,
        "wall_clock_s": round(time.monotonic() - started, 3),
    }
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"
    _atomic_write(os.path.join(out_dir, "result.json"), text)
    return doc


def write_csv(path, header, columns):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\r\n")
    wr.writerow(header)
    for row in zip(*columns):
        wr.writerow([format(float(v), ".12g") for v in row])
    _atomic_write(path, buf.getvalue())


def _q(q):
    return None if q is None else [float(v) for v in q.probs]


# -- commands --------------------------------------------------------------------

def _best_pair(inst: Instance):
    return best_pair_search(inst.source, inst.channel, inst.rate(), step=inst.step)


def cmd_exponent(inst: Instance):
    src, w, t, s, step = inst.source, inst.channel, inst.rate(), inst.scale, inst.step
    dset = DistributionSet.of(inst.fixed_q) if inst.fixed_q is not None else None
    cap, cap_q = capacity(w)
    g = gallager_jscc_exponent(src, w, t, dset, step)
    d = csiszar_jscc_exponent_dual(src, w, t, dset, step)
    out = {
        "entropy": entropy(src) * s,
        "capacity": cap * s,
        "capacity_input": _q(cap_q),
        "critical_rate": critical_rate(w) * s,
        "gallager": {"value": g.value * s, "rho": g.rho, "q": _q(g.q)},
        "csiszar_dual": {
            "value": d.value * s, "rho": d.rho, "lam": d.lam, "rho1": d.rho1, "rho2": d.rho2,
            "pair": None if d.pair is None else [_q(q) for q in d.pair],
        },
    }
    if dset is None:
        p = csiszar_jscc_exponent_primal(src, w, t, step)
        sp = jscc_sphere_packing_exponent(src, w, t, step)
        bp = _best_pair(inst)
        out["csiszar_primal"] = {"value": p.value * s, "rate_star": p.rate * s, "rho": p.rho}
        out["sphere_packing"] = {
            "value": math.inf if sp.infinite else sp.value * s,
            "rate_star": sp.rate * s, "tight": bool(sp.tight),
        }
        out["best_pair"] = _pair_doc(inst, bp)
    return out


def _pair_doc(inst: Instance, bp):
    s = inst.scale
    doc = {"value": bp.value * s, "rho0": bp.rho, "degenerate": bool(bp.degenerate)}
    if not bp.degenerate:
        e1, e2 = class_exponents(inst.source, inst.channel, inst.rate(), bp)
        doc.update({
            "q1": _q(bp.pair[0]), "q2": _q(bp.pair[1]), "rho1": bp.rho1, "rho2": bp.rho2,
            "gamma0": bp.gamma0, "gamma": bp.gamma, "class_exponents": [e1 * s, e2 * s],
        })
    else:
        doc["q"] = _q(bp.q)
    return doc


def cmd_sweep_rho(inst: Instance, out_dir):
    src, w, t, s, step = inst.source, inst.channel, inst.rate(), inst.scale, inst.step
    if inst.fixed_q is not None:
        rho = e0_model(w, DistributionSet.of(inst.fixed_q), step).hull.rho
        b = (_e0(rho, w.logw, inst.fixed_q.probs) - t * source_function(rho, src)) * s
        write_csv(os.path.join(out_dir, "curves_main.csv"), ["rho", "e0_minus_tEs"], [rho, b])
        g = gallager_jscc_exponent(src, w, t, DistributionSet.of(inst.fixed_q), step)
        return {"curves": ["curves_main.csv"], "gallager": g.value * s}
    model = e0_model(w, None, step)
    rho = model.hull.rho
    es = source_function(rho, src)
    a = (model.hull(rho) - t * es) * s
    b = (model.hull.e0 - t * es) * s
    g = gallager_jscc_exponent(src, w, t, None, step)
    d = csiszar_jscc_exponent_dual(src, w, t, None, step)
    gv, dv = g.value * s, d.value * s
    write_csv(os.path.join(out_dir, "curves_main.csv"),
              ["rho", "hull_minus_tEs", "e0_minus_tEs", "ej_gallager", "ej_csiszar"],
              [rho, a, b, np.full_like(rho, gv), np.full_like(rho, dv)])
    out = {"curves": ["curves_main.csv"], "gallager": gv, "csiszar": dv}
    bp = _best_pair(inst)
    out["best_pair"] = _pair_doc(inst, bp)
    if not bp.degenerate:
        cols, peaks = [rho], []
        for i, q in enumerate(bp.pair, start=1):
            c = (_e0(rho, w.logw, q.probs) - t * lemma1_bound(rho, bp.rho, bp.gamma0, src, i)) * s
            cols.append(c)
            j = int(np.argmax(c))
            peaks.append({"rho": float(rho[j]), "value": float(c[j])})
        write_csv(os.path.join(out_dir, "curves_class.csv"), ["rho", "class1", "class2"], cols)
        out["curves"].append("curves_class.csv")
        out["class_peaks"] = peaks
    return out


def _first(*xs):
    return next((x for x in xs if x is not None), None)


def _partition(inst: Instance, k):
    """Partition from overrides where given, the best-pair construction otherwise."""
    gamma, q1, q2 = inst.raw.get("gamma"), inst.q1, inst.q2
    if gamma == 0 and _first(q1, q2) is not None:
        return PartitionSpec.single(_first(q2, q1), k)
    if gamma is None or q1 is None or q2 is None:
        bp = _best_pair(inst)
        if bp.degenerate:
            q = _first(q2, q1, bp.q)
            if gamma is None:
                return PartitionSpec.single(q, k)
            return PartitionSpec(float(gamma), _first(q1, q), _first(q2, q), k)
        gamma = bp.gamma if gamma is None else gamma
        q1 = _first(q1, bp.pair[0])
        q2 = _first(q2, bp.pair[1])
    return PartitionSpec(float(gamma), q1, q2, k)


def _partition_doc(part: PartitionSpec):
    return {"gamma": part.gamma, "q1": _q(part.q1), "q2": _q(part.q2)}


def _bound_doc(inst, part, n):
    b = theorem1_bound(inst.source, inst.channel, part, n)
    s = inst.scale
    return {
        "log_bound": b.log_bound,
        "raw": b.raw,
        "clamped": b.clamped,
        "exponent_per_use": -b.log_bound / n * s,
        "prefactor": b.prefactor,
        "n_classes": b.n_classes,
        "classes": [
            {"class": c.cls_index, "empty": c.empty, "rho": c.rho,
             "exponent": c.exponent * s, "log_mass": c.log_mass}
            for c in b.terms
        ],
    }


def cmd_bound(inst: Instance):
    k, n = int(inst.need("k")), int(inst.need("n"))
    part = _partition(inst, k)
    return {"k": k, "n": n, "partition": _partition_doc(part), "bound": _bound_doc(inst, part, n)}


def cmd_simulate(inst: Instance):
    k, n = int(inst.need("k")), int(inst.need("n"))
    part = _partition(inst, k)
    cfg = EnsembleConfig(inst.source, inst.channel, k, n, part,
                         seed=int(inst.raw["seed"]), trials=int(inst.raw["trials"]))
    if inst.raw["mode"] == "exact":
        est = exact_ensemble_error(cfg)
    else:
        est = monte_carlo_error(cfg)
    bound = theorem1_bound(inst.source, inst.channel, part, n)
    return {"k": k, "n": n, "mode": inst.raw["mode"], "partition": _partition_doc(part),
            "error": est.as_dict(), "bound_raw": bound.raw}


def cmd_partition(inst: Instance):
    k = int(inst.need("k"))
    gamma = inst.raw.get("gamma")
    if gamma is None:
        gamma = _partition(inst, k).gamma
    return realize_partition(inst.source, k, float(gamma)).as_dict()


# -- entry point -----------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="jsccexp", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("exponent", "sweep-rho", "bound", "simulate", "partition"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, metavar="PATH")
        sp.add_argument("--out", default=".", metavar="DIR")
        sp.add_argument("--base", choices=["bits", "nats"])
        sp.add_argument("--seed", type=int, metavar="N")
        sp.add_argument("--trials", type=int, metavar="N")
        sp.add_argument("--mode", choices=["exact", "mc"])
        sp.add_argument("--k", type=int, metavar="N")
        sp.add_argument("--n", type=int, metavar="N")
        sp.add_argument("--gamma", type=float, metavar="X")
    return p


def run(argv=None):
    """Run one command; returns (exit code, result document or None)."""
    args = build_parser().parse_args(argv)
    started = time.monotonic()
    overrides = {k: getattr(args, k) for k in ("base", "seed", "trials", "mode", "k", "n", "gamma")}
    try:
        inst = load_config(args.config, overrides)
        if args.command == "exponent":
            res = cmd_exponent(inst)
        elif args.command == "sweep-rho":
            res = cmd_sweep_rho(inst, args.out)
        elif args.command == "bound":
            res = cmd_bound(inst)
        elif args.command == "simulate":
            res = cmd_simulate(inst)
        else:
            res = cmd_partition(inst)
        doc = write_result(args.out, args.command, inst, res, started)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2, None
    except NoConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return 3, None
    except EnumerationCapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return 4, None
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2, None
    return 0, doc


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
