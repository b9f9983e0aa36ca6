"""Command-line front end.

Exit codes:
    0  every check passed
    1  a physics check failed
    2  usage error (bad flag, missing or unknown key)
    3  parameter out of range
    4  unreadable config file or unwritable output path

The default seed is :data:`DEFAULT_SEED`; the ``QUDITWORKS_SEED`` environment
variable replaces it, and ``--seed`` takes precedence over both. Random
inputs are drawn with ``numpy.random.default_rng`` (PCG64).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import __version__
from . import broadcast as bc
from .cloner import apply_cloner, clone_fidelities, closed_form_clones, optimal_machine
from .errors import QuditError
from .linalg import fidelity, haar_state, trace_distance
from .teleclone import run_telecloning
from .teleport import EncodingBasis, entanglement_cost, run_many_to_many

SCHEMA_VERSION = 1
DEFAULT_SEED = 20240917
SEED_ENV = "QUDITWORKS_SEED"
CHECK_TOL = 1e-10

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RANGE, EXIT_IO = 0, 1, 2, 3, 4

COMMANDS = ("clone", "teleport", "teleclone", "broadcast", "telebroadcast", "sweep", "verify")

# key -> (type, default); a default of None marks a required key
_SCHEMA: dict[str, dict[str, tuple[type, Any]]] = {
    "clone": {"d": (int, None), "p": (float, None), "trials": (int, 5)},
    "teleport": {"d": (int, None), "N": (int, None), "M": (int, None), "trials": (int, 1),
                 "mode": (str, "enumerate")},
    "teleclone": {"d": (int, None), "p": (float, None), "mode": (str, "enumerate")},
    "broadcast": {"alpha_sq": (float, None), "p": (float, None)},
    "telebroadcast": {"alpha_sq": (float, None), "p": (float, None), "mode": (str, "enumerate")},
    "sweep": {"vary": (str, None), "start": (float, 0.0), "stop": (float, 1.0),
              "steps": (int, 101), "d": (int, 2), "p": (float, 0.5), "alpha_sq": (float, 0.5)},
    "verify": {},
}


class CliError(Exception):
    """Raised by configuration handling; carries the process exit code."""

    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment request.

    Attributes:
        command: One of :data:`COMMANDS`.
        parameters: Command parameters with defaults filled in, plus ``seed``.
        output: Destination path, or ``None`` for stdout.
        format: ``"csv"`` or ``"json"``.
    """

    command: str
    parameters: dict
    output: Optional[str] = None
    format: str = "json"
    targets: dict = field(default_factory=dict)

    def plan(self) -> list[float]:
        """Grid values of a sweep, in order."""
        if self.command != "sweep":
            return []
        p = self.parameters
        return [float(x) for x in np.linspace(p["start"], p["stop"], p["steps"])]


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{SEED_ENV}={raw!r} is not an integer", EXIT_USAGE) from None


def _read_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read config file {path!r}: {exc.strerror}", EXIT_IO) from None
    if path.endswith(".json") or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CliError(f"malformed JSON in {path!r}: {exc}", EXIT_USAGE) from None
        if not isinstance(data, dict):
            raise CliError(f"{path!r} must hold a JSON object", EXIT_USAGE)
        return data
    data = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CliError(f"{path}:{lineno}: expected key=value", EXIT_USAGE)
        data[key.strip().replace("-", "_")] = value.strip()
    return data


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quditworks",
                                     description="Qudit teleportation, cloning and broadcasting.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key=value or JSON file with parameters")
        sp.add_argument("--output", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--seed", type=int)
        for key, (typ, _) in _SCHEMA[name].items():
            if key == "mode":
                group = sp.add_mutually_exclusive_group()
                group.add_argument("--enumerate", dest="mode", action="store_const",
                                   const="enumerate", default=argparse.SUPPRESS)
                group.add_argument("--sample", dest="mode", action="store_const",
                                   const="sample", default=argparse.SUPPRESS)
                continue
            flag = {"start": "--from", "stop": "--to"}.get(key, "--" + key.replace("_", "-"))
            sp.add_argument(flag, dest=key, default=argparse.SUPPRESS)
    return parser


def _coerce(key: str, value, typ: type):
    if typ is str:
        return str(value)
    if isinstance(value, bool):
        raise CliError(f"{key} must be numeric, got {value!r}", EXIT_USAGE)
    try:
        out = typ(value) if typ is float else int(str(value), 10)
    except (TypeError, ValueError):
        raise CliError(f"{key} must be {typ.__name__}, got {value!r}", EXIT_USAGE) from None
    if typ is float and not math.isfinite(out):
        raise CliError(f"{key} must be finite, got {value!r}", EXIT_RANGE)
    return out


def _range_error(msg: str):
    raise CliError(msg, EXIT_RANGE)


def _validate_ranges(cmd: str, p: dict) -> None:
    if "d" in p and not 2 <= p["d"] <= 5:
        _range_error(f"d must lie in 2..5, got {p['d']}")
    for key in ("p", "alpha_sq", "start", "stop"):
        if key in p and not 0.0 <= p[key] <= 1.0:
            _range_error(f"{key} must lie in [0, 1], got {p[key]!r}")
    if cmd == "teleport":
        if p["N"] < 1 or p["M"] < 1 or p["N"] + p["M"] > 6:
            _range_error(f"need N, M >= 1 and N + M <= 6, got N={p['N']}, M={p['M']}")
        if p["d"] ** (2 * p["N"] + p["M"]) > 4 ** 6:
            _range_error("problem exceeds 4096 amplitudes")
    if cmd == "teleclone" and p["d"] > 3:
        _range_error("telecloning is simulated for d <= 3")
    if "trials" in p and not 1 <= p["trials"] <= 1000:
        _range_error(f"trials must lie in 1..1000, got {p['trials']}")
    if "mode" in p and p["mode"] not in ("enumerate", "sample"):
        raise CliError(f"mode must be enumerate or sample, got {p['mode']!r}", EXIT_USAGE)
    if cmd == "sweep":
        if p["vary"] not in ("p", "alpha_sq"):
            raise CliError(f"vary must be p or alpha_sq, got {p['vary']!r}", EXIT_USAGE)
        if not 1 <= p["steps"] <= 100001:
            _range_error(f"steps must lie in 1..100001, got {p['steps']}")
    if "seed" in p and not 0 <= p["seed"] < 2 ** 64:
        _range_error("seed must be a 64-bit unsigned integer")


def parse_config(argv=None) -> ExperimentConfig:
    """Parse flags (and an optional config file) into a validated config.

    Flags override file values. Raises :class:`CliError` with the exit code
    for the failure kind.
    """
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        raise CliError("invalid command line", EXIT_USAGE if exc.code else EXIT_OK) from None
    cmd = ns.command
    schema = _SCHEMA[cmd]
    raw: dict = {}
    if ns.config:
        raw.update(_read_config_file(ns.config))
    flags = {k: v for k, v in vars(ns).items()
             if k in schema and v is not None}
    raw.update(flags)
    seed = raw.pop("seed", None)
    fmt = raw.pop("format", None)
    output = raw.pop("output", None)
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise CliError(f"unknown key(s) for {cmd}: {', '.join(unknown)}", EXIT_USAGE)
    params = {}
    for key, (typ, default) in schema.items():
        if key in raw:
            params[key] = _coerce(key, raw[key], typ)
        elif default is None:
            raise CliError(f"{cmd} requires {key}", EXIT_USAGE)
        else:
            params[key] = default
    if ns.seed is not None:
        seed = ns.seed
    params["seed"] = _default_seed() if seed is None else _coerce("seed", seed, int)
    _validate_ranges(cmd, params)
    fmt = ns.format or fmt or ("csv" if cmd == "sweep" else "json")
    if fmt not in ("csv", "json"):
        raise CliError(f"format must be csv or json, got {fmt!r}", EXIT_USAGE)
    return ExperimentConfig(cmd, params, ns.output or output, fmt, _targets(cmd, params))


def _targets(cmd: str, p: dict) -> dict:
    if cmd in ("clone", "teleclone"):
        fb, fc = clone_fidelities(p["d"], p["p"])
        return {"F_B": fb, "F_C": fc}
    if cmd == "broadcast":
        return {"F": bc.broadcast_fidelity(bc.BroadcastInput.from_alpha_sq(p["alpha_sq"], p["p"]))}
    return {}


# --- commands -------------------------------------------------------------

def _check(name: str, value: float, reference: float, tol: float = CHECK_TOL) -> dict:
    delta = abs(value - reference)
    return {"name": name, "value": value, "reference": reference, "delta": delta,
            "tolerance": tol, "passed": bool(delta <= tol)}


def _run_clone(cfg, rng):
    d, p = cfg.parameters["d"], cfg.parameters["p"]
    machine = optimal_machine(d, p)
    fb_c, fc_c = clone_fidelities(d, p)
    rows, checks = [], []
    for trial in range(cfg.parameters["trials"]):
        psi = haar_state(("B",), (d,), rng)
        out = apply_cloner(machine, psi)
        rb, rc = closed_form_clones(machine, psi)
        fb, fc = fidelity(psi, out.rho_B), fidelity(psi.relabel({"B": "C"}), out.rho_C)
        frob = max(np.linalg.norm(out.rho_B.matrix - rb.matrix),
                   np.linalg.norm(out.rho_C.matrix - rc.matrix))
        rows.append({"trial": trial, "F_B": fb, "F_C": fc, "F_B_closed": fb_c,
                     "F_C_closed": fc_c, "max_delta": max(abs(fb - fb_c), abs(fc - fc_c)),
                     "oracle_frobenius": float(frob)})
        checks += [_check(f"trial {trial} F_B", fb, fb_c), _check(f"trial {trial} F_C", fc, fc_c),
                   _check(f"trial {trial} oracle", float(frob), 0.0)]
    return rows, checks


def _outcome_str(outcomes) -> str:
    return " ".join(f"({o.m},{o.n})" for o in outcomes)


def _runs(cfg, fn):
    if cfg.parameters["mode"] == "sample":
        return [fn("sample")]
    return fn("enumerate")


def _run_teleport(cfg, rng):
    d, N, M = (cfg.parameters[k] for k in ("d", "N", "M"))
    basis = EncodingBasis.repetition(d, M)
    expected = d ** -(N + 1)
    rows, checks = [], []
    for trial in range(cfg.parameters["trials"]):
        alpha = haar_state(("x",), (d,), rng).amplitudes
        pairs = _runs(cfg, lambda mode: run_many_to_many(d, N, M, alpha, basis, mode, rng))
        for final, t in pairs:
            rows.append({"trial": trial, "outcome": _outcome_str(t.outcomes),
                         "common_m": t.common_m if t.common_m is not None else "",
                         "probability": t.joint_probability, "probability_closed": expected,
                         "fidelity": t.fidelity, "fidelity_closed": 1.0,
                         "max_delta": abs(t.fidelity - 1.0)})
            checks.append(_check(f"trial {trial} {_outcome_str(t.outcomes)} fidelity",
                                 t.fidelity, 1.0))
            checks.append(_check(f"trial {trial} {_outcome_str(t.outcomes)} probability",
                                 t.joint_probability, expected, 1e-12))
            checks.append(_check(f"trial {trial} {_outcome_str(t.outcomes)} common m",
                                 float(t.common_m is not None), 1.0, 0.0))
        if cfg.parameters["mode"] == "enumerate":
            checks.append(_check(f"trial {trial} outcome count", float(len(pairs)),
                                 float(d ** (N + 1)), 0.0))
    e_sep, e_mtm = entanglement_cost(d, N, M)
    checks.append(_check("entanglement saved (bits)", e_sep - e_mtm, (M - 1) * math.log2(d), 1e-12))
    return rows, checks


def _run_teleclone(cfg, rng):
    d, p = cfg.parameters["d"], cfg.parameters["p"]
    psi = haar_state(("A",), (d,), rng)
    direct = apply_cloner(optimal_machine(d, p), psi.amplitudes)
    fb_c, fc_c = clone_fidelities(d, p)
    outs = _runs(cfg, lambda mode: run_telecloning(d, p, psi, mode, rng))
    rows, checks = [], []
    for o in outs:
        label = _outcome_str(o.transcript.outcomes)
        fb = fidelity(psi.relabel({"A": "B"}), o.rho_B)
        fc = fidelity(psi.relabel({"A": "C"}), o.rho_C)
        td = max(trace_distance(o.rho_B, direct.rho_B), trace_distance(o.rho_C, direct.rho_C))
        rows.append({"outcome": label, "probability": o.transcript.joint_probability,
                     "probability_closed": 1 / d ** 2, "F_B": fb, "F_C": fc,
                     "F_B_closed": fb_c, "F_C_closed": fc_c,
                     "trace_distance_direct": td, "fidelity_delta": abs(o.transcript.fidelity - 1),
                     "max_delta": max(abs(fb - fb_c), abs(fc - fc_c), td)})
        checks += [_check(f"{label} F_B", fb, fb_c), _check(f"{label} F_C", fc, fc_c),
                   _check(f"{label} trace distance", td, 0.0),
                   _check(f"{label} fidelity with direct clone", o.transcript.fidelity, 1.0),
                   _check(f"{label} probability", o.transcript.joint_probability,
                          1 / d ** 2, 1e-12)]
    return rows, checks


def _broadcast_row(inp: bc.BroadcastInput, alpha_sq: float) -> tuple[dict, list]:
    cond = bc.broadcast_conditions(inp)
    f_sim = bc.simulated_broadcast_fidelity(inp)
    f_closed = bc.broadcast_fidelity(inp)
    loc, nl = cond.regions
    local_closed = bc.local_ppt_closed_form(inp)
    nonlocal_closed = bc.nonlocal_ppt_closed_form(inp)
    local_ppt = all(r.ppt for r in cond.local_sep)
    nonlocal_ppt = all(r.ppt for r in cond.nonlocal_insep)
    row = {"alpha_sq": alpha_sq, "p": inp.p, "F": f_sim[0], "F_closed": f_closed,
           "local_ppt": local_ppt,
           "local_ppt_closed": "" if local_closed is None else local_closed,
           "local_min_eigenvalue": min(r.min_pt_eigenvalue for r in cond.local_sep),
           "nonlocal_ppt": nonlocal_ppt,
           "nonlocal_ppt_closed": "" if nonlocal_closed is None else nonlocal_closed,
           "nonlocal_min_eigenvalue": min(r.min_pt_eigenvalue for r in cond.nonlocal_insep),
           "broadcast": cond.broadcast,
           "max_delta": max(abs(f - f_closed) for f in f_sim)}
    tag = f"(alpha_sq={alpha_sq!r}, p={inp.p!r})"
    checks = [_check(f"{tag} fidelity", max(f_sim, key=lambda f: abs(f - f_closed)), f_closed)]
    for name, reports in (("local", cond.local_sep), ("nonlocal", cond.nonlocal_insep)):
        for r in reports:
            if r.closed_form_verdict is not None:
                checks.append(_check(f"{tag} {name} PPT verdict", float(r.ppt),
                                     float(r.closed_form_verdict), 0.0))
    return row, checks


def _run_broadcast(cfg, rng):
    a2 = cfg.parameters["alpha_sq"]
    row, checks = _broadcast_row(bc.BroadcastInput.from_alpha_sq(a2, cfg.parameters["p"]), a2)
    return [row], checks


def _run_telebroadcast(cfg, rng):
    inp = bc.BroadcastInput.from_alpha_sq(cfg.parameters["alpha_sq"], cfg.parameters["p"])
    target = bc.local_broadcast(inp).Pi_prime.relabel(dict(zip(bc.SIX, bc.RECEIVERS)))
    r14, r23 = bc.closed_form_rho14(inp), bc.closed_form_rho23(inp)
    outs = _runs(cfg, lambda mode: bc.telebroadcast_run(inp, mode, rng))
    rows, checks = [], []
    for o in outs:
        label = _outcome_str(o.transcript.outcomes)
        f = fidelity(target, o.final)
        d14 = float(np.abs(o.rho_B1B4.matrix - r14).max())
        d23 = float(np.abs(o.rho_B2B3.matrix - r23).max())
        rows.append({"outcome": label, "probability": o.transcript.joint_probability,
                     "fidelity": f, "fidelity_closed": 1.0, "rho_B1B4_delta": d14,
                     "rho_B2B3_delta": d23, "max_delta": max(abs(f - 1), d14, d23)})
        checks += [_check(f"{label} fidelity", f, 1.0), _check(f"{label} rho_B1B4", d14, 0.0),
                   _check(f"{label} rho_B2B3", d23, 0.0)]
    return rows, checks


def _run_sweep(cfg, rng):
    par = cfg.parameters
    rows, checks = [], []
    if par["vary"] == "p":
        psi = haar_state(("B",), (par["d"],), rng)
        for p in cfg.plan():
            fb_c, fc_c = clone_fidelities(par["d"], p)
            out = apply_cloner(optimal_machine(par["d"], p), psi)
            fb = fidelity(psi, out.rho_B)
            fc = fidelity(psi.relabel({"B": "C"}), out.rho_C)
            delta = max(abs(fb - fb_c), abs(fc - fc_c))
            rows.append({"p": p, "F_B": fb, "F_C": fc, "F_B_closed": fb_c,
                         "F_C_closed": fc_c, "max_delta": delta})
            checks.append(_check(f"p={p!r}", delta, 0.0))
    else:
        for a2 in cfg.plan():
            row, c = _broadcast_row(bc.BroadcastInput.from_alpha_sq(a2, par["p"]), a2)
            rows.append(row)
            checks += c
    return rows, checks


def _run_verify(cfg, rng):
    from .verification import run_all

    rows, checks = [], []
    for r in run_all(cfg.parameters["seed"]):
        rows.append({"criterion": r.id, "name": r.name, "passed": r.passed, "detail": r.detail})
        checks.append({"name": f"criterion {r.id}: {r.name}", "passed": r.passed})
    return rows, checks


_RUNNERS = {"clone": _run_clone, "teleport": _run_teleport, "teleclone": _run_teleclone,
            "broadcast": _run_broadcast, "telebroadcast": _run_telebroadcast,
            "sweep": _run_sweep, "verify": _run_verify}


def run_command(cfg: ExperimentConfig) -> dict:
    """Execute ``cfg`` and return a report dictionary.

    The report holds the echoed configuration, one row per data point with
    simulated and closed-form values, and the list of checks.
    """
    rng = np.random.default_rng(cfg.parameters["seed"])
    try:
        rows, checks = _RUNNERS[cfg.command](cfg, rng)
    except QuditError as exc:
        raise QuditError(f"{cfg.command} failed: {exc}") from exc
    return {"schema_version": SCHEMA_VERSION, "suite_version": __version__,
            "command": cfg.command, "config": dict(cfg.parameters), "targets": dict(cfg.targets),
            "rows": rows, "checks": checks, "passed": all(c["passed"] for c in checks)}


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(report: dict, fmt: str = "json", path: Optional[str] = None) -> bytes:
    """Serialize ``report`` and optionally write it to ``path``.

    Floats use the shortest round-trip decimal form, so output is byte-stable.
    """
    if fmt == "json":
        data = (json.dumps(report, indent=2, allow_nan=False) + "\n").encode()
    elif fmt == "csv":
        rows = report["rows"] or report["checks"]
        buf = io.StringIO()
        if rows:
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(list(rows[0]))
            for row in rows:
                writer.writerow([_cell(v) for v in row.values()])
        data = buf.getvalue().encode()
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        try:
            with open(path, "wb") as fh:
                fh.write(data)
        except OSError as exc:
            raise CliError(f"cannot write {path!r}: {exc.strerror}", EXIT_IO) from None
    return data


def _summary(report: dict) -> str:
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    head = f"{report['command']}: {len(report['checks']) - len(failed)}/" \
           f"{len(report['checks'])} checks passed"
    return "\n".join([head] + [f"  FAIL {n}" for n in failed[:20]])


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        report = run_command(cfg)
        data = emit_report(report, cfg.format, cfg.output)
    except CliError as exc:
        if exc.exit_code:
            print(f"quditworks: {exc}", file=sys.stderr)
        return exc.exit_code
    except QuditError as exc:
        print(f"quditworks: {exc}", file=sys.stderr)
        return EXIT_RANGE
    if cfg.output is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    elif cfg.command == "verify":
        print(_summary(report), file=sys.stderr)
    if cfg.command == "verify":
        for row in report["rows"]:
            print(f"{'PASS' if row['passed'] else 'FAIL'} [{row['criterion']:2d}] "
                  f"{row['name']}: {row['detail']}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
