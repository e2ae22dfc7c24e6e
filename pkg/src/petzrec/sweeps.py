"""Parameter sweeps: prior-mismatch boundaries and gate-error thresholds.

Both sweeps split their work into fixed index ranges and reassemble the
results in index order, so the numbers do not depend on the worker count.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import metadata

import numpy as np
from skimage import measure

from . import numerics as nx
from .channels import ChannelKind, apply, make_channel
from .dilation import dilate_general, dilate_rank2_analytic
from .errors import ConfigError
from .ionnoise import NoisyPetz
from .petz import BlochState, build_petz, delta_f_grid
from .synth import rewrite_cnot_to_gpg, synthesize

DEFAULT_DELTAS = (0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2)


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover - source checkout
        return "0+unknown"


# -- sampling ---------------------------------------------------------------------


def sample_bloch_vectors(n: int, seed: int, mode: str = "ball") -> np.ndarray:
    """``(n, 3)`` Bloch vectors, uniform in the ball (``R = u^(1/3)``) or on the sphere."""
    if n < 1:
        raise ConfigError("need at least one sample")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    if mode == "ball":
        v *= np.cbrt(rng.random(n))[:, None]
    elif mode != "surface":
        raise ConfigError(f"unknown sampling mode {mode!r}")
    return v


def _vector_to_bloch(v) -> BlochState:
    r = float(np.linalg.norm(v))
    if r < 1e-15:
        return BlochState(0.0)
    theta = math.acos(max(-1.0, min(1.0, v[2] / r)))
    phi = math.atan2(v[1], v[0]) % (2 * math.pi)
    return BlochState(min(r, 1.0), theta, phi)


def sample_bloch(n: int, seed: int, mode: str = "ball") -> list[BlochState]:
    return [_vector_to_bloch(v) for v in sample_bloch_vectors(n, seed, mode)]


# -- configuration ----------------------------------------------------------------


@dataclass
class SweepConfig:
    channel: str = "dephasing"
    p: float = 0.5
    gamma0: tuple[float, float, float] = (0.5, math.pi / 2, math.pi / 4)
    dR: float = 0.0
    dtheta: tuple[float, float, int] = (-math.pi / 2, math.pi / 2, 201)
    dphi: tuple[float, float, int] = (-math.pi / 2, math.pi / 2, 201)
    level: float = 0.01
    deltas: tuple[float, ...] = DEFAULT_DELTAS
    n: int = 10_000
    seed: int = 0
    mode: str = "ball"
    workers: int = 1
    noise_mode: str = "combined"
    rotation_offset: float = 0.0
    output: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> "SweepConfig":
        try:
            self.channel = ChannelKind(self.channel).value
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.channel not in ("dephasing", "amplitude_damping", "depolarizing"):
            raise ConfigError(f"sweeps need a parametric channel, got {self.channel}")
        if not 0.0 <= float(self.p) <= 1.0:
            raise ConfigError(f"p={self.p} outside [0, 1]")
        if len(self.gamma0) != 3:
            raise ConfigError("gamma0 needs (R, theta, phi)")
        self.gamma0 = tuple(float(x) for x in self.gamma0)
        for name in ("dtheta", "dphi"):
            bounds = getattr(self, name)
            if len(bounds) != 3 or int(bounds[2]) < 2 or not bounds[0] < bounds[1]:
                raise ConfigError(f"{name} grid needs (min < max, steps >= 2)")
            setattr(self, name, (float(bounds[0]), float(bounds[1]), int(bounds[2])))
        if not 0.0 < self.level < 1.0:
            raise ConfigError("contour level must lie in (0, 1)")
        self.deltas = tuple(float(d) for d in self.deltas)
        if any(d < 0 for d in self.deltas):
            raise ConfigError("gate errors must be >= 0")
        if int(self.n) < 1:
            raise ConfigError("n must be >= 1")
        self.n = int(self.n)
        if self.mode not in ("ball", "surface"):
            raise ConfigError(f"unknown sampling mode {self.mode!r}")
        if int(self.workers) < 1:
            raise ConfigError("workers must be >= 1")
        if self.noise_mode not in ("combined", "exact_product"):
            raise ConfigError(f"unknown noise mode {self.noise_mode!r}")
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**d)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return asdict(self)


def _axis(bounds) -> np.ndarray:
    lo, hi, steps = bounds
    return np.linspace(lo, hi, steps)


def _metadata_line(kind: str, cfg: SweepConfig, **extra) -> str:
    echo = {k: v for k, v in cfg.to_dict().items() if k not in ("workers", "output")}
    info = {"sweep": kind, "version": _version(), "config": echo, **extra}
    return "# " + json.dumps(info, sort_keys=True)


def _csv_text(header, rows, meta: str) -> str:
    buf = io.StringIO()
    buf.write(meta + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _run_chunks(fn, chunks, workers: int):
    if workers <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, chunks))


def _split(n: int, parts: int) -> list[tuple[int, int]]:
    edges = np.linspace(0, n, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


# -- prior-mismatch sweep ---------------------------------------------------------


@dataclass
class PriorResult:
    config: SweepConfig
    dtheta: np.ndarray
    dphi: np.ndarray
    grid: np.ndarray
    contour: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    area: float = float("nan")
    clipped: bool = False

    @property
    def origin_value(self) -> float:
        i = int(np.argmin(np.abs(self.dtheta)))
        j = int(np.argmin(np.abs(self.dphi)))
        return float(self.grid[i, j])

    def rows(self):
        for i, t in enumerate(self.dtheta):
            for j, f in enumerate(self.dphi):
                yield (float(t), float(f), float(self.grid[i, j]))

    def to_csv(self) -> str:
        meta = _metadata_line("prior", self.config, area=self.area, clipped=self.clipped)
        return _csv_text(("dtheta", "dphi", "deltaF"), self.rows(), meta)

    def contour_csv(self) -> str:
        rows = ((float(a), float(b)) for a, b in self.contour)
        return _csv_text(("dtheta", "dphi"), rows, _metadata_line("contour", self.config))


def _prior_chunk(args):
    kind, p, g0, dR, dtheta, dphi = args
    ch = make_channel(kind, p)
    return delta_f_grid(ch, BlochState(*g0), dtheta, dphi, dR)


def shoelace_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def origin_contour(grid: np.ndarray, dtheta: np.ndarray, dphi: np.ndarray, level: float):
    """Boundary of the sub-level region around the origin.

    Returns ``(polyline, area, clipped)``; ``clipped`` is set when the region
    reaches the edge of the grid, in which case the grid edge closes it.
    """
    hi = max(1.0, float(np.max(grid))) + 1.0
    padded = np.pad(grid, 1, constant_values=hi)
    origin = np.array([np.interp(0.0, dtheta, np.arange(dtheta.size)) + 1,
                       np.interp(0.0, dphi, np.arange(dphi.size)) + 1])
    best = None
    for c in measure.find_contours(padded, level):
        if not np.allclose(c[0], c[-1]):
            continue
        if not measure.points_in_poly(origin[None, :], c)[0]:
            continue
        # back to grid coordinates; the padding collapses onto the edge
        rows = np.clip(c[:, 0] - 1, 0, dtheta.size - 1)
        cols = np.clip(c[:, 1] - 1, 0, dphi.size - 1)
        poly = np.column_stack([
            np.interp(rows, np.arange(dtheta.size), dtheta),
            np.interp(cols, np.arange(dphi.size), dphi),
        ])
        area = shoelace_area(poly)
        if best is None or area < best[1]:
            edge = bool(np.any((rows <= 0) | (rows >= dtheta.size - 1) | (cols <= 0) | (cols >= dphi.size - 1)))
            best = (poly, area, edge)
    if best is None:
        return np.zeros((0, 2)), 0.0, False
    return best


def prior_sweep(cfg: SweepConfig) -> PriorResult:
    dtheta = _axis(cfg.dtheta)
    dphi = _axis(cfg.dphi)
    chunks = [
        (cfg.channel, cfg.p, cfg.gamma0, cfg.dR, dtheta[a:b], dphi)
        for a, b in _split(dtheta.size, max(cfg.workers, 1))
    ]
    grid = np.vstack(_run_chunks(_prior_chunk, chunks, cfg.workers))
    poly, area, clipped = origin_contour(grid, dtheta, dphi, cfg.level)
    return PriorResult(cfg, dtheta, dphi, grid, poly, area, clipped)


# -- gate-error threshold sweep ---------------------------------------------------


def compile_petz_circuit(pm):
    """Dilation, synthesis and GPG rewrite for one Petz map."""
    if len(pm.all_kraus) == 2:
        d = dilate_rank2_analytic(pm)
    else:
        d = dilate_general(pm)
    return d, rewrite_cnot_to_gpg(synthesize(d.U), merge=True)


def epsilon_for_state(ch, state: BlochState, deltas, noise_mode="combined", rotation_offset=0.0, reference=None):
    """Recovery error at each ``Delta`` for one input state.

    The Petz map is tuned to the input itself unless ``reference`` is given.
    """
    pm = build_petz(ch, state if reference is None else reference)
    _, gs = compile_petz_circuit(pm)
    model = NoisyPetz(pm, gs, rotation_offset, noise_mode)
    rho = state.density()
    sigma = apply(ch, rho)
    ideal = pm(sigma)
    out = np.empty(len(deltas))
    for k, dl in enumerate(deltas):
        noisy = model.system_map(dl)(sigma)
        out[k] = 1.0 - float(nx.qubit_fidelity(ideal, noisy))
    return np.clip(out, 0.0, 1.0)


def _threshold_chunk(args):
    kind, p, vecs, deltas, noise_mode, offset, ref = args
    ch = make_channel(kind, p)
    reference = None if ref is None else BlochState(*ref)
    return np.array([
        epsilon_for_state(ch, _vector_to_bloch(v), deltas, noise_mode, offset, reference)
        for v in vecs
    ]).reshape(len(vecs), len(deltas))


@dataclass
class ThresholdResult:
    config: SweepConfig
    deltas: np.ndarray
    eps: np.ndarray  # (n_samples, n_deltas)

    @property
    def mean(self) -> np.ndarray:
        return self.eps.mean(axis=0)

    @property
    def max(self) -> np.ndarray:
        return self.eps.max(axis=0)

    def rows(self):
        n = self.eps.shape[0]
        for k, d in enumerate(self.deltas):
            yield (float(d), float(self.mean[k]), float(self.max[k]), n)

    def to_csv(self) -> str:
        meta = _metadata_line("threshold", self.config)
        return _csv_text(("delta", "mean_eps", "max_eps", "n"), self.rows(), meta)


def threshold_sweep(cfg: SweepConfig, reference: BlochState | None = None) -> ThresholdResult:
    """Mean and max recovery error over sampled inputs, per gate error."""
    vecs = sample_bloch_vectors(cfg.n, cfg.seed, cfg.mode)
    ref = None if reference is None else (reference.R, reference.theta, reference.phi)
    parts = max(cfg.workers, 1) * 4 if cfg.workers > 1 else 1
    chunks = [
        (cfg.channel, cfg.p, vecs[a:b], cfg.deltas, cfg.noise_mode, cfg.rotation_offset, ref)
        for a, b in _split(cfg.n, parts)
    ]
    eps = np.vstack(_run_chunks(_threshold_chunk, chunks, cfg.workers))
    return ThresholdResult(cfg, np.asarray(cfg.deltas), eps)
