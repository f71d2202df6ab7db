"""Batch front-end: read a JSON experiment, dispatch it, write CSV or JSON records.

A configuration looks like::

    {"v": 1, "command": "constant", "payload": {...},
     "quad": {"rel_tol": 1e-8}, "range": {"k_min": -40, "k_max": 40}}

``batch`` (a list of payloads) may replace ``payload``.  Commands are
``norm``, ``apply``, ``constant``, ``verify``, ``sweep`` and ``weights``.
"""

import argparse
import csv
import io
import json
import math
import sys
import time
import warnings

import numpy as np

from .constants import THEOREM_IDS, TheoremParams, compute_constant, compute_muckenhoupt_constant, validate_hypotheses, _LAYOUT
from .errors import (
    DIVERGENT,
    ConfigError,
    HausdorffBoundsError,
    IoError,
    is_divergent,
    is_unbounded,
)
from .operators import OperatorSpec, apply_operator
from .quadrature import QuadratureSpec
from .spaces import DEFAULT_RANGE, DyadicRange, SpaceSpec, TestFunction, space_norm
from .verify import DEFAULT_EPS, empirical_ratio, sharpness_sweep, two_sided_check
from .weights import BallGrid, MuckenhouptParams, Weight, ap_characteristic, ball_mass, critical_index_estimate, rh_constant

COMMANDS = ("norm", "apply", "constant", "verify", "sweep", "weights")
COLUMNS = ("command", "id", "value", "error", "verdict", "seed", "elapsed_ms", "inputs_json")
SCHEMA_VERSION = 1


# --------------------------------------------------------------------------
# payload parsing


def _require(data, key, where=""):
    if not isinstance(data, dict) or key not in data:
        raise ConfigError(f"missing field {where + key!r}", key)
    return data[key]


def _number(value, key):
    if isinstance(value, str) and value.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"field {key!r} must be a number", key) from None


def _numbers(value, key):
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"field {key!r} must be a list", key)
    return [_number(v, key) for v in value]


def parse_weight(data, n=None):
    kind = data.get("kind", "power")
    dim = int(data.get("n", n or 1))
    if kind == "power":
        return Weight.power(_number(data.get("gamma", 0.0), "gamma"), dim)
    if kind == "sampled":
        try:
            return Weight.from_table(_require(data, "table"), dim)
        except OSError as exc:
            raise ConfigError(f"cannot read weight table: {exc}", "table") from None
    raise ConfigError(f"unknown weight kind {kind!r}", "kind")


def parse_space(data):
    kind = _require(data, "kind", "space.")
    n = int(data.get("n", 1))
    omega = parse_weight(data.get("omega", {}), n)
    v = parse_weight(data["v"], n) if "v" in data else omega
    q = _number(_require(data, "q", "space."), "q")
    try:
        if kind == "lebesgue":
            return SpaceSpec.lebesgue(q, omega)
        if kind == "central_morrey":
            return SpaceSpec.central_morrey(q, _number(_require(data, "lam", "space."), "lam"), v, omega)
        p = _number(_require(data, "p", "space."), "p")
        alpha = _number(data.get("alpha", 0.0), "alpha")
        if kind == "herz":
            return SpaceSpec.herz(alpha, p, q, v, omega)
        if kind == "morrey_herz":
            return SpaceSpec.morrey_herz(alpha, _number(_require(data, "lam", "space."), "lam"), p, q, v, omega)
    except ValueError as exc:
        raise ConfigError(str(exc), "space") from None
    raise ConfigError(f"unknown space kind {kind!r}", "kind")


def parse_function(data):
    try:
        return TestFunction.from_json(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad test function: {exc}", "functions") from None


def parse_operator(data):
    try:
        return OperatorSpec.from_json(data)
    except KeyError as exc:
        raise ConfigError(f"missing field {exc.args[0]!r} in operator", exc.args[0]) from None
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad operator: {exc}", "operator") from None


def _required_fields(theorem_id):
    fields = ["q_i", "q"]
    if theorem_id in _LAYOUT:
        space = _LAYOUT[theorem_id][1]
        if space in ("morrey", "morrey_herz"):
            fields += ["lam_i", "lam"]
        if space in ("herz", "morrey_herz"):
            fields += ["alpha_i", "alpha", "p_i", "p"]
        return fields
    fields += ["q_star", "lam_i"]
    if theorem_id != "T3.4":
        fields += ["alpha_i", "alpha_star", "p_i", "p"]
    return fields


def parse_theorem(data):
    """TheoremParams from its JSON form; ConfigError names the first missing field."""
    tid = _require(data, "theorem_id")
    if tid not in THEOREM_IDS:
        raise ConfigError(f"unknown theorem id {tid!r}", "theorem_id")
    op = parse_operator(_require(data, "operator"))
    for key in _required_fields(tid):
        _require(data, key)
    kw = {}
    for key in ("q_i", "beta_i", "gamma_i", "lam_i", "alpha_i", "p_i"):
        if key in data:
            kw[key] = _numbers(data[key], key)
    for key in ("beta", "gamma", "q", "lam", "alpha", "p", "q_star", "alpha_star", "lam_star"):
        if key in data:
            kw[key] = _number(data[key], key)
    if "muck" in data:
        mk = dict(data["muck"])
        for key in ("r_omega", "r_v"):
            if key in mk:
                mk[key] = _number(mk[key], key)
                if math.isinf(mk[key]):
                    del mk[key]
        try:
            kw["muck"] = MuckenhouptParams(**{k: float(v) for k, v in mk.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad muck block: {exc}", "muck") from None
    try:
        return TheoremParams(tid, op, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc), "theorem_id") from None


def theorem_to_json(params):
    """JSON form read back by parse_theorem."""
    out = {"theorem_id": params.theorem_id, "operator": params.operator.to_json()}
    for key in ("q_i", "beta_i", "gamma_i", "lam_i", "alpha_i", "p_i"):
        value = getattr(params, key)
        if value is not None:
            out[key] = list(value)
    for key in ("beta", "gamma", "q", "lam", "alpha", "p", "q_star", "alpha_star", "lam_star"):
        value = getattr(params, key)
        if value is not None:
            out[key] = value
    mk = params.muck
    out["muck"] = {"xi": mk.xi, "eta": mk.eta, "delta1": mk.delta1, "delta2": mk.delta2}
    for key in ("r_omega", "r_v"):
        value = getattr(mk, key)
        if not is_unbounded(value):
            out["muck"][key] = value
    return out


def parse_grid(data, n):
    """``"default"`` or {"centers": [[...], ...], "radii": [...]} (every centre with every radius)."""
    if data is None or data == "default":
        return BallGrid.default(n)
    centers = [np.ravel(np.asarray(c, dtype=float)) for c in _require(data, "centers", "grid.")]
    radii = sorted(_numbers(_require(data, "radii", "grid."), "radii"))
    if any(c.size != n for c in centers):
        raise ConfigError(f"grid centres must have {n} coordinates", "centers")
    try:
        return BallGrid(tuple(map(tuple, centers)), tuple(radii))
    except ValueError as exc:
        raise ConfigError(str(exc), "grid") from None


def parse_quad(data, seed=None, tol=None):
    data = dict(data or {})
    allowed = {"rel_tol", "abs_tol", "max_refinement", "seed", "nodes"}
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown quadrature field {key!r}", key)
    if seed is not None:
        data["seed"] = seed
    if tol is not None:
        data["rel_tol"] = tol
    try:
        return QuadratureSpec(**data)
    except TypeError as exc:
        raise ConfigError(str(exc), "quad") from None


def parse_range(data, kmin=None, kmax=None):
    data = dict(data or {})
    k_min = int(kmin if kmin is not None else data.get("k_min", DEFAULT_RANGE.k_min))
    k_max = int(kmax if kmax is not None else data.get("k_max", DEFAULT_RANGE.k_max))
    try:
        return DyadicRange(k_min, k_max)
    except ValueError as exc:
        raise ConfigError(str(exc), "range") from None


# --------------------------------------------------------------------------
# commands


def _run_norm(payload, quad, range_):
    spec = parse_space(_require(payload, "space"))
    f = parse_function(_require(payload, "f"))
    value = space_norm(spec, f, range_, quad)
    return [{"id": spec.kind, "value": value, "error": None, "verdict": "Divergent" if is_divergent(value) else "Ok"}]


def _run_apply(payload, quad, range_):
    op = parse_operator(_require(payload, "operator"))
    fs = [parse_function(f) for f in _require(payload, "functions")]
    x = np.atleast_1d(np.asarray(_numbers(np.ravel(_require(payload, "x")).tolist(), "x")))
    value, err = apply_operator(op, fs, x, quad, return_error=True)
    return [{"id": f"m={op.m},n={op.n}", "value": value, "error": err, "verdict": "Ok"}]


def _run_constant(payload, quad, range_):
    params = parse_theorem(payload)
    bad = validate_hypotheses(params)
    if bad:
        return [{"id": params.constant_id, "value": None, "error": None, "verdict": "HypothesisViolation",
                 "message": "; ".join(bad), "failed": True}]
    method = payload.get("method", "auto")
    if params.theorem_id in _LAYOUT:
        value = compute_constant(params, quad, method)
    else:
        value = compute_muckenhoupt_constant(params, quad, method)
    return [{"id": params.constant_id, "value": value, "error": None, "verdict": "Ok"}]


def _report_record(params, rep, extra=None):
    rec = {"id": params.theorem_id, "value": rep.ratio, "error": rep.quadrature_error, "verdict": rep.verdict,
           "constant": rep.constant, "gap": rep.relative_gap, "flags": list(rep.flags)}
    if rep.verdict == "Violation":
        rec["failed"] = True
    rec.update(extra or {})
    return rec


def _run_verify(payload, quad, range_):
    params = parse_theorem(_require(payload, "params"))
    k_upper = _number(payload.get("K_upper", 10.0), "K_upper")
    if "functions" in payload:
        fs = [parse_function(f) for f in payload["functions"]]
        rep = empirical_ratio(params, fs, range_, quad, k_upper=k_upper)
    else:
        eps = _numbers(payload.get("eps", list(DEFAULT_EPS)), "eps")
        rep = two_sided_check(params, k_upper, range_, quad, eps_list=eps, cases=int(payload.get("cases", 20)),
                              seed=quad.seed)
    return [_report_record(params, rep)]


def _run_sweep(payload, quad, range_):
    params = parse_theorem(_require(payload, "params"))
    eps = _numbers(payload.get("eps", list(DEFAULT_EPS)), "eps")
    sweep = sharpness_sweep(params, eps, range_, quad)
    out = []
    for e, rep in zip(sweep.eps, sweep.reports):
        rec = _report_record(params, rep, {"id": f"{params.theorem_id}@eps={e!r}"})
        if not sweep.nondecreasing:
            rec["verdict"] = "Violation"
            rec["failed"] = True
        out.append(rec)
    return out


def _run_weights(payload, quad, range_):
    w = parse_weight(_require(payload, "weight"))
    quantity = _require(payload, "quantity")
    grid = parse_grid(payload.get("grid"), w.n)
    if quantity == "ap":
        value = ap_characteristic(w, _number(_require(payload, "xi"), "xi"), grid, quad)
    elif quantity == "rh":
        value = rh_constant(w, _number(_require(payload, "r"), "r"), grid, quad)
    elif quantity == "critical_index":
        value = critical_index_estimate(w, grid=None if payload.get("grid") is None else grid, quad=quad,
                                        analytic=bool(payload.get("analytic", True)))
    elif quantity == "ball_mass":
        center, radius = _require(payload, "ball")
        value = ball_mass(w, np.ravel(center), float(radius), quad)
    else:
        raise ConfigError(f"unknown weights quantity {quantity!r}", "quantity")
    verdict = "Ok"
    if is_divergent(value):
        verdict = "Divergent"
    elif is_unbounded(value):
        verdict = "Unbounded"
    return [{"id": quantity, "value": value, "error": None, "verdict": verdict}]


_DISPATCH = {"norm": _run_norm, "apply": _run_apply, "constant": _run_constant, "verify": _run_verify,
             "sweep": _run_sweep, "weights": _run_weights}


def validate_config(config):
    if not isinstance(config, dict):
        raise ConfigError("configuration must be a JSON object", None)
    if config.get("v") != SCHEMA_VERSION:
        raise ConfigError(f"schema version field 'v' must be {SCHEMA_VERSION}", "v")
    command = _require(config, "command")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}", "command")
    if ("payload" in config) == ("batch" in config):
        raise ConfigError("give exactly one of 'payload' and 'batch'", "payload")
    items = config["batch"] if "batch" in config else [config["payload"]]
    if not isinstance(items, list) or not all(isinstance(p, dict) for p in items):
        raise ConfigError("payloads must be JSON objects", "batch" if "batch" in config else "payload")
    return command, items


def _check_payload(command, payload):
    """Parse the payload once so schema errors surface before any computation."""
    if command == "norm":
        parse_space(_require(payload, "space"))
        parse_function(_require(payload, "f"))
    elif command == "apply":
        parse_operator(_require(payload, "operator"))
        [parse_function(f) for f in _require(payload, "functions")]
        _require(payload, "x")
    elif command == "constant":
        parse_theorem(payload)
    elif command in ("verify", "sweep"):
        parse_theorem(_require(payload, "params"))
    else:
        parse_weight(_require(payload, "weight"))
        _require(payload, "quantity")


def run_experiment(config, seed=None, tol=None, kmin=None, kmax=None, timing=False):
    """Run every payload of ``config`` in input order and return the result records.

    Module errors become records with verdict ``Error`` and do not stop the
    batch; schema problems raise ConfigError before anything runs.
    """
    command, items = validate_config(config)
    quad = parse_quad(config.get("quad"), seed, tol)
    range_ = parse_range(config.get("range"), kmin, kmax)
    for payload in items:
        _check_payload(command, payload)
    records = []
    for payload in items:
        start = time.perf_counter()
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                produced = _DISPATCH[command](payload, quad, range_)
            notes = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
        except (HausdorffBoundsError, ValueError, ArithmeticError) as exc:
            produced = [{"id": payload.get("theorem_id") or payload.get("params", {}).get("theorem_id", ""),
                         "value": None, "error": None, "verdict": "Error", "failed": True,
                         "message": f"{type(exc).__name__}: {exc}"}]
            notes = []
        elapsed = (time.perf_counter() - start) * 1000.0 if timing else None
        for rec in produced:
            rec.setdefault("warnings", notes)
            rec.update(command=command, seed=quad.seed, elapsed_ms=elapsed, inputs=payload)
            records.append(rec)
    return records


# --------------------------------------------------------------------------
# output


def _format(value):
    if value is None:
        return ""
    if value is DIVERGENT or is_divergent(value):
        return "Divergent"
    if is_unbounded(value):
        return "Unbounded"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def inputs_json(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def csv_text(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for rec in records:
        writer.writerow([rec["command"], rec["id"], _format(rec["value"]), _format(rec["error"]), rec["verdict"],
                         rec["seed"], _format(rec["elapsed_ms"]), inputs_json(rec["inputs"])])
    return buf.getvalue()


def emit_csv(records, path):
    """Write the records as UTF-8 CSV (header plus one row per record)."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text(records))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def json_text(records):
    def clean(v):
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, (float, np.floating)) and not math.isfinite(v) or is_divergent(v) or is_unbounded(v):
            return _format(v)
        if isinstance(v, np.floating):
            return float(v)
        return v

    return json.dumps([clean(r) for r in records], indent=2, ensure_ascii=False) + "\n"


def exit_code(records):
    return 1 if any(rec.get("failed") for rec in records) else 0


def build_parser():
    parser = argparse.ArgumentParser(prog="hausdorff-bounds", description=__doc__.splitlines()[0])
    parser.add_argument("--config", required=True, help="experiment JSON file")
    parser.add_argument("--out", help="output path (stdout when omitted)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--seed", type=int, help="override quad.seed")
    parser.add_argument("--kmin", type=int, help="override range.k_min")
    parser.add_argument("--kmax", type=int, help="override range.k_max")
    parser.add_argument("--tol", type=float, help="override quad.rel_tol")
    parser.add_argument("--timing", action="store_true", help="fill elapsed_ms (makes output nondeterministic)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        records = run_experiment(config, args.seed, args.tol, args.kmin, args.kmax, args.timing)
    except ConfigError as exc:
        where = f" (field {exc.field!r})" if exc.field else ""
        print(f"config error{where}: {exc}", file=sys.stderr)
        return 2
    text = csv_text(records) if args.format == "csv" else json_text(records)
    try:
        if args.out:
            if args.format == "csv":
                emit_csv(records, args.out)
            else:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(text)
        else:
            sys.stdout.write(text)
    except (IoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for rec in records:
        if rec.get("message"):
            print(f"{rec['command']} {rec['id']}: {rec['message']}", file=sys.stderr)
    return exit_code(records)


if __name__ == "__main__":
    sys.exit(main())
