"""Self-check suite run by ``quditworks verify``.

Each criterion recomputes a quantitative claim by simulation and compares it
with the closed form at a fixed tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import broadcast as bc
from .cloner import (apply_cloner, clone_fidelities, closed_form_clones, fidelity_sum_profile,
                     optimal_machine, profile_argmax)
from .linalg import QuditRegister, fidelity, haar_state, random_density
from .teleclone import run_telecloning
from .teleport import EncodingBasis, entanglement_cost, outcome_distribution, run_many_to_many
from .weyl import bell_vectors, error_operator


@dataclass(frozen=True)
class CriterionResult:
    id: int
    name: str
    passed: bool
    detail: str


def _c1(rng):
    worst = 0.0
    for d in (2, 3, 4, 5):
        psi = haar_state(("B",), (d,), rng)
        out = apply_cloner(optimal_machine(d, 0.5), psi)
        worst = max(worst, abs(fidelity(psi, out.rho_B) - (d + 3) / (2 * (d + 1))))
    return worst < 1e-10, f"max |F_B - (d+3)/(2(d+1))| = {worst:.3e}"


def _c2(rng):
    worst = 0.0
    for i in range(100):
        d = 2 + i % 2
        psi = haar_state(("B",), (d,), rng)
        m = optimal_machine(d, float(rng.uniform()))
        out = apply_cloner(m, psi)
        rb, rc = closed_form_clones(m, psi)
        worst = max(worst, np.linalg.norm(out.rho_B.matrix - rb.matrix),
                    np.linalg.norm(out.rho_C.matrix - rc.matrix))
    return worst < 1e-10, f"max Frobenius deviation = {worst:.3e}"


def _c3(rng):
    grid = np.linspace(0, 1, 1001)
    arg = [profile_argmax(fidelity_sum_profile(d, grid)) for d in (2, 3, 4)]
    return all(a == 0.5 for a in arg), f"argmax = {arg}"


def _c4(rng):
    worst_td, worst_p = 0.0, 0.0
    for d in (2, 3):
        psi = haar_state(("A",), (d,), rng)
        p = float(rng.uniform())
        direct = apply_cloner(optimal_machine(d, p), psi)
        outs = run_telecloning(d, p, psi)
        if len(outs) != d * d:
            return False, f"{len(outs)} outcomes for d={d}"
        for o in outs:
            worst_td = max(worst_td, 0.5 * np.abs(np.linalg.eigvalsh(
                o.rho_B.matrix - direct.rho_B.matrix)).sum(), 0.5 * np.abs(
                np.linalg.eigvalsh(o.rho_C.matrix - direct.rho_C.matrix)).sum())
            worst_p = max(worst_p, abs(o.transcript.joint_probability - 1 / d ** 2))
    return worst_td < 1e-10 and worst_p < 1e-12, \
        f"trace distance {worst_td:.3e}, probability deviation {worst_p:.3e}"


def _c5(rng):
    worst_f, worst_p, ok = 0.0, 0.0, True
    for N, M, d in ((1, 1, 2), (1, 3, 2), (2, 3, 2), (2, 3, 3)):
        basis = EncodingBasis.repetition(d, M)
        for _ in range(10):
            alpha = haar_state(("x",), (d,), rng).amplitudes
            runs = run_many_to_many(d, N, M, alpha, basis)
            ok &= len(runs) == d ** (N + 1)
            ok &= all(t.common_m is not None for _, t in runs)
            worst_f = max([worst_f] + [abs(t.fidelity - 1) for _, t in runs])
            worst_p = max([worst_p] + [abs(t.joint_probability - d ** -(N + 1)) for _, t in runs])
        e1, e2 = entanglement_cost(d, N, M)
        ok &= math.isclose(e1, M * math.log2(d)) and math.isclose(e2, math.log2(d))
    return ok and worst_f < 1e-10 and worst_p < 1e-12, \
        f"fidelity deviation {worst_f:.3e}, probability deviation {worst_p:.3e}"


def _c6(rng):
    mismatches = 0
    for a2 in np.linspace(0, 1, 201):
        for p in np.linspace(0, 1, 201):
            cond = bc.broadcast_conditions(bc.BroadcastInput.from_alpha_sq(float(a2), float(p)))
            for rep in cond.local_sep + cond.nonlocal_insep:
                if rep.closed_form_verdict is not None and not rep.agrees:
                    mismatches += 1
    loc = bc.local_region(0.5)
    nl = bc.nonlocal_region(0.5)
    plo, phi = bc.broadcast_p_range()
    ok = (mismatches == 0 and abs(loc.alpha_sq_low - (0.5 - math.sqrt(3) / 4)) < 1e-6
          and abs(bc.lambda_param(0.5) - 25 / 256) < 1e-12
          and abs(nl.alpha_sq_low - 0.1096875) < 1e-6 and abs(nl.alpha_sq_high - 0.8903125) < 1e-6
          and abs(plo - 0.2968059) < 1e-6 and abs(phi - 0.7031941) < 1e-6)
    return ok, (f"{mismatches} grid mismatches; local [{loc.alpha_sq_low:.6f}, "
                f"{loc.alpha_sq_high:.6f}], nonlocal [{nl.alpha_sq_low:.6f}, "
                f"{nl.alpha_sq_high:.6f}], p-range [{plo:.6f}, {phi:.6f}]")


def _c7(rng):
    worst = 0.0
    for a2 in np.linspace(0, 1, 21):
        for p in np.linspace(0, 1, 21):
            inp = bc.BroadcastInput.from_alpha_sq(float(a2), float(p))
            worst = max(worst, *(abs(f - bc.broadcast_fidelity(inp))
                                 for f in bc.simulated_broadcast_fidelity(inp)))
    at_half = bc.broadcast_fidelity(bc.BroadcastInput.from_alpha_sq(0.5, 0.5))
    grid = np.linspace(0, 1, 1001)
    args = []
    for a2 in (0.1, 0.5, 0.9):
        vals = [bc.broadcast_fidelity(bc.BroadcastInput.from_alpha_sq(a2, float(p))) for p in grid]
        args.append(float(grid[int(np.argmax(vals))]))
    ok = worst < 1e-10 and abs(at_half - 7 / 12) < 1e-12 and all(a == 0.5 for a in args)
    return ok, f"max deviation {worst:.3e}, F(1/2,1/2) = {at_half!r}, argmax {args}"


def _c8(rng):
    lo, hi = bc.broadcast_p_range()
    worst = max(bc.scaled_form_residual(bc.BroadcastInput.from_alpha_sq(0.5, float(p)))
                for p in np.linspace(lo, hi, 21))
    eta = bc.scaled_form_reduction(0.5)
    return worst < 1e-10 and abs(eta - 4 / 9) < 1e-15, f"residual {worst:.3e}, eta(1/2) = {eta!r}"


def _c9(rng):
    worst = 0.0
    for a2 in np.linspace(0, 1, 11):
        for p in np.linspace(0, 1, 11):
            inp = bc.BroadcastInput.from_alpha_sq(float(a2), float(p))
            out = bc.nonlocal_entangled_clone(inp)
            c1, c2 = bc.closed_form_nonlocal_clones(inp)
            worst = max(worst, np.abs(out.rho_1.matrix - c1).max(),
                        np.abs(out.rho_2.matrix - c2).max())
    f = bc.nonlocal_entangled_clone(bc.BroadcastInput.from_alpha_sq(0.3, 0.5)).fidelities
    contained = all(bc.nonlocal_interval(float(p)).contains_region(bc.nonlocal_region(float(p)))
                    for p in np.linspace(1 / 3, 2 / 3, 21))
    ok = (worst < 1e-10 and all(abs(x - 0.7) < 1e-10 for x in f)
          and bc.nonlocal_p_range() == (1 / 3, 2 / 3) and contained)
    return ok, f"max deviation {worst:.3e}, F(p=1/2) = {f}, containment {contained}"


def _c10(rng):
    worst_f, worst_rho = 0.0, 0.0
    for _ in range(10):
        inp = bc.BroadcastInput(float(rng.uniform()), float(rng.uniform()))
        target = bc.local_broadcast(inp).Pi_prime.relabel(dict(zip(bc.SIX, bc.RECEIVERS)))
        outs = bc.telebroadcast_run(inp)
        if len(outs) != 8:
            return False, f"{len(outs)} outcomes"
        for o in outs:
            worst_f = max(worst_f, abs(fidelity(target, o.final) - 1))
            worst_rho = max(worst_rho,
                            np.abs(o.rho_B1B4.matrix - bc.closed_form_rho14(inp)).max(),
                            np.abs(o.rho_B2B3.matrix - bc.closed_form_rho23(inp)).max())
    code = bc.six_qubit_code(0.37)
    worst_op = 0.0
    for m in (0, 1):
        for n1 in (0, 1):
            for n2 in (0, 1):
                v = bc.ubip_operator(m, n1, n2)
                for k in (0, 1):
                    want = (-1) ** (k * (n1 + n2)) * code[(k - m) % 2]
                    worst_op = max(worst_op, np.abs(v @ code[k] - want).max())
    ok = worst_f < 1e-10 and worst_rho < 1e-10 and worst_op < 1e-14
    return ok, f"fidelity {worst_f:.3e}, rho {worst_rho:.3e}, LRUO {worst_op:.3e}"


def _c11(rng):
    from .cli import emit_report, parse_config, run_command

    worst = 0.0
    for d in range(2, 6):
        vecs = bell_vectors(d)
        worst = max(worst, np.abs(vecs.T @ vecs.conj() - np.eye(d * d)).max())
        for m in range(d):
            for n in range(d):
                for m2 in range(d):
                    for n2 in range(d):
                        lhs = error_operator(d, m, n) @ error_operator(d, m2, n2)
                        rhs = np.exp(2j * np.pi * m2 * n / d) * \
                            error_operator(d, (m + m2) % d, (n + n2) % d)
                        worst = max(worst, np.abs(lhs - rhs).max())
    r1 = random_density(("x",), (3,), rng)
    r2 = random_density(("x",), (3,), rng)
    sym = abs(fidelity(r1, r2) - fidelity(r2, r1))
    psi = haar_state(("x",), (3,), rng)
    pure = abs(fidelity(psi.density(), r1) - np.vdot(psi.amplitudes, r1.matrix @ psi.amplitudes).real)
    cfg = parse_config(["clone", "--d", "3", "--p", "0.3", "--seed", "7"])
    same = emit_report(run_command(cfg), "json") == emit_report(run_command(cfg), "json")
    ok = worst < 1e-12 and sym < 1e-12 and pure < 1e-12 and same
    return ok, f"Bell/Weyl {worst:.3e}, symmetry {sym:.3e}, pure {pure:.3e}, deterministic {same}"


CRITERIA: list[tuple[int, str, Callable]] = [
    (1, "symmetric clone fidelity", _c1),
    (2, "cloner oracle equivalence", _c2),
    (3, "optimality at p=1/2", _c3),
    (4, "telecloning equals direct cloning", _c4),
    (5, "many-to-many correctness", _c5),
    (6, "broadcast separability regions", _c6),
    (7, "broadcast fidelity", _c7),
    (8, "scaled form", _c8),
    (9, "nonlocal d=4 cloning", _c9),
    (10, "telebroadcast", _c10),
    (11, "structural suites", _c11),
]


def run_all(seed: int) -> list[CriterionResult]:
    results = []
    for cid, name, fn in CRITERIA:
        ok, detail = fn(np.random.default_rng([seed, cid]))
        results.append(CriterionResult(cid, name, bool(ok), detail))
    return results
