"""Invariant checks behind ``petz verify``."""
from __future__ import annotations

import math
import traceback
from dataclasses import dataclass, field

import numpy as np

from . import numerics as nx
from .channels import KrausChannel, make_channel, superoperator, validate
from .dilation import dilate_general, dilate_rank2_analytic, induced_superoperator
from .errors import PetzError
from .ionnoise import (
    JZ,
    SpinChannel,
    eph_channel,
    fock_oracle_channel,
    residual_generators,
    residual_motion_channel,
)
from .petz import BlochState, build_petz
from .synth import decompose_3q, decompose_su4, raw_unitary, rewrite_cnot_to_gpg, verify_equiv

KINDS = ("dephasing", "amplitude_damping", "depolarizing")
INJECTIONS = ("tp-violation", "small-cutoff")


@dataclass
class SuiteResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    error: str | None = None

    def to_dict(self) -> dict:
        d = {"suite": self.name, "passed": self.passed, "details": self.details}
        if self.error:
            d["error"] = self.error
        return d


def _suite_channels(inject):
    worst = 0.0
    min_eig = 0.0
    chans = [make_channel(k, p) for k in KINDS for p in (0.1, 0.5, 0.9)]
    if inject == "tp-violation":
        chans.append(KrausChannel((1.1 * np.eye(2),)))
    for ch in chans:
        rep = validate(ch)
        worst = max(worst, rep.tp_residual)
        min_eig = min(min_eig, rep.min_choi_eig)
    ok = worst <= 1e-10 and min_eig >= -1e-10
    return ok, {"max_tp_residual": worst, "min_choi_eig": min_eig}


def _suite_petz(inject):
    rng = np.random.default_rng(1)
    worst_tp = worst_inf = 0.0
    for k in KINDS:
        for p in (0.2, 0.5, 0.8):
            ch = make_channel(k, p)
            for v in rng.standard_normal((5, 3)):
                v = v / np.linalg.norm(v) * rng.random() ** (1 / 3)
                r = float(np.linalg.norm(v))
                g = BlochState(r, math.acos(v[2] / r), math.atan2(v[1], v[0]))
                pm = build_petz(ch, g)
                tp = sum(m.conj().T @ m for m in pm.kraus)
                worst_tp = max(worst_tp, float(np.linalg.norm(tp - pm.support_projector)))
                gd = g.density()
                worst_inf = max(worst_inf, 1 - nx.uhlmann_fidelity(gd, pm(ch(gd))))
    return worst_tp <= 1e-9 and worst_inf <= 1e-9, {"max_tp_residual": worst_tp, "max_infidelity": worst_inf}


def _suite_dilation(inject):
    g = BlochState(0.5, math.pi / 2, math.pi / 4)
    worst = unit = 0.0
    for k in KINDS:
        pm = build_petz(make_channel(k, 0.5), g)
        dils = [dilate_general(pm)]
        if len(pm.all_kraus) == 2:
            dils.append(dilate_rank2_analytic(pm))
        for d in dils:
            worst = max(worst, float(np.linalg.norm(induced_superoperator(d) - superoperator(pm.all_kraus))))
            unit = max(unit, nx.unitarity_error(d.U))
    return worst <= 1e-9 and unit <= 1e-10, {"max_superop_diff": worst, "max_unitarity_error": unit}


def _suite_synthesis(inject):
    rng = np.random.default_rng(2)
    e2 = e3 = 0.0
    c2 = c3 = 0
    for _ in range(20):
        u = nx.haar_unitary(4, rng)
        gs = decompose_su4(u)
        e2 = max(e2, verify_equiv(u, gs))
        c2 = max(c2, gs.cnot_count)
    for _ in range(3):
        u = nx.haar_unitary(8, rng)
        gs = decompose_3q(u)
        e3 = max(e3, verify_equiv(u, gs))
        c3 = max(c3, gs.entangler_count)
        r = rewrite_cnot_to_gpg(gs)
        e3 = max(e3, nx.phase_distance(raw_unitary(gs), raw_unitary(r)))
    ok = e2 <= 1e-8 and c2 <= 3 and e3 <= 1e-6 and c3 <= 20
    return ok, {"su4_error": e2, "su4_max_cnots": c2, "3q_error": e3, "3q_max_entanglers": c3}


def _suite_noise(inject):
    tp = 0.0
    for d in np.linspace(0, 0.5, 25):
        ch = eph_channel(float(d))
        tp = max(tp, float(np.linalg.norm(sum(k.conj().T @ k for k in ch.kraus) - np.eye(4))))
    d = 1e-3
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 3] = 1.0
    out = SpinChannel.from_kraus(eph_channel(d))(rho)
    corner = abs(out[0, 3] - math.exp(-2 * d))
    g = BlochState(0.5, math.pi / 2, math.pi / 4)
    pm = build_petz(make_channel("dephasing", 0.5), g)
    gs = rewrite_cnot_to_gpg(decompose_su4(dilate_rank2_analytic(pm).U))
    gens = residual_generators(gs, d)
    cutoff = 4 if inject == "small-cutoff" else 32
    oracle = fock_oracle_channel(gens, d, cutoff)
    diff = residual_motion_channel(gens, d).distance(oracle)
    ok = tp <= 1e-14 and corner <= 1e-12 and diff <= 1e-8
    return ok, {"eph_tp_residual": tp, "corner_error": corner, "oracle_diff": diff, "jz_trace": float(np.trace(JZ).real)}


SUITES = {
    "channels": _suite_channels,
    "petz": _suite_petz,
    "dilation": _suite_dilation,
    "synthesis": _suite_synthesis,
    "noise": _suite_noise,
}


def run_verify(inject: str | None = None) -> list[SuiteResult]:
    """Run every suite; exceptions are reported as failures of that suite."""
    if inject is not None and inject not in INJECTIONS:
        raise ValueError(f"unknown injection {inject!r}")
    results = []
    for name, fn in SUITES.items():
        try:
            ok, details = fn(inject)
            results.append(SuiteResult(name, bool(ok), details))
        except PetzError as exc:
            results.append(SuiteResult(name, False, {}, f"{type(exc).__name__}: {exc}"))
        except Exception as exc:  # pragma: no cover - unexpected failure
            results.append(SuiteResult(name, False, {}, traceback.format_exception_only(type(exc), exc)[-1].strip()))
    return results
