"""Multi-start search for the minimum output entropy over pure input states.

States are parameterized by the real and imaginary parts of every amplitude
except the largest one, which is kept real and positive (phase gauge) and
fixed by normalization. That leaves exactly ``2D - 2`` real coordinates.
Descent is steepest descent on these coordinates with central finite
difference gradients and an Armijo backtracking line search; the chart is
re-centered after every accepted step.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelSpec, apply_channel, vacuum_output_photons
from .entropy import g_function, von_neumann_entropy
from .errors import DomainError, SpectrumError, TruncationError
from .fock import PureState, Truncation, coherent_state, fock_state, moments, random_pure_state

log = logging.getLogger(__name__)

DEFAULT_SEED = 20240917
BOUND_SLACK = 1e-6


@dataclass(frozen=True)
class SearchConfig:
    dim: int = 20
    starts: int = 8
    seed: int = DEFAULT_SEED
    max_iters: int = 300
    grad_step: float = 1e-5
    conv_tol: float = 1e-5
    leakage_tol: float = 1e-8
    # Haar starts live on the lowest ``random_support`` levels; None means dim // 6.
    random_support: int | None = None
    physical_starts: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.starts < 1:
            raise DomainError("starts must be >= 1")
        if not 1e-8 < self.grad_step < 1e-3:
            raise DomainError(f"grad_step must lie in (1e-8, 1e-3), got {self.grad_step}")
        if not self.conv_tol > 0:
            raise DomainError("conv_tol must be positive")
        if self.max_iters < 0:
            raise DomainError("max_iters must be nonnegative")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    @property
    def trunc(self) -> Truncation:
        return Truncation(self.dim, self.leakage_tol)


@dataclass(frozen=True)
class StartRecord:
    index: int
    label: str
    entropy_nats: float
    iterations: int
    converged: bool
    grad_norm: float


@dataclass(frozen=True, eq=False)
class SearchResult:
    min_entropy_nats: float
    argmin: PureState
    coherent_fidelity: float
    fitted_alpha: complex
    start_index: int
    iterations: int
    converged: bool
    bound_nats: float
    min_evaluated_nats: float
    evaluations: int
    failed_evaluations: int
    violations: list = field(default_factory=list)
    starts: list = field(default_factory=list)

    @property
    def n_converged(self) -> int:
        return sum(s.converged for s in self.starts)

    @property
    def variance(self) -> float:
        return moments(self.argmin).variance


def objective(psi: PureState, spec: ChannelSpec) -> float:
    """Output entropy in nats of ``spec`` applied to ``|psi><psi|``."""
    return von_neumann_entropy(apply_channel(psi, spec).output).entropy_nats


def conjectured_bound(spec: ChannelSpec) -> float:
    """Entropy of the vacuum-input output, ``g(noise photons)``; coherent inputs attain it."""
    return g_function(vacuum_output_photons(spec))


def _gauge(amps: np.ndarray) -> tuple[np.ndarray, int]:
    amps = amps / np.linalg.norm(amps)
    p = int(np.argmax(np.abs(amps)))
    amps = amps * (abs(amps[p]) / amps[p])
    amps[p] = abs(amps[p])
    return amps, p


def _coords(amps: np.ndarray, pivot: int) -> np.ndarray:
    rest = np.delete(amps, pivot)
    return np.concatenate([rest.real, rest.imag])


def _from_coords(x: np.ndarray, pivot: int, dim: int) -> np.ndarray | None:
    k = dim - 1
    rest = x[:k] + 1j * x[k:]
    top = 1.0 - float(np.dot(x, x))
    if top <= 0:
        return None
    amps = np.insert(rest, pivot, np.sqrt(top))
    return amps / np.linalg.norm(amps)


class _Evaluator:
    """Objective with bookkeeping of every evaluation for the lower-bound audit."""

    def __init__(self, spec: ChannelSpec, trunc: Truncation, bound: float, start: int):
        self.spec, self.trunc, self.bound, self.start = spec, trunc, bound, start
        self.count = 0
        self.failed = 0
        self.lowest = np.inf
        self.violations: list[dict] = []

    def __call__(self, amps: np.ndarray | None) -> float:
        if amps is None:
            return np.inf
        self.count += 1
        try:
            val = objective(PureState(amps, self.trunc), self.spec)
        except (TruncationError, SpectrumError) as exc:
            self.failed += 1
            log.debug("start %d: objective rejected (%s)", self.start, exc)
            return np.inf
        self.lowest = min(self.lowest, val)
        if val < self.bound - BOUND_SLACK:
            log.warning("start %d: output entropy %.12g below bound %.12g", self.start, val, self.bound)
            self.violations.append({"start": self.start, "entropy": val,
                                    "amplitudes": [[z.real, z.imag] for z in amps]})
        return val


def _gradient(f: _Evaluator, amps: np.ndarray, pivot: int, step: float,
              center: float | None = None) -> np.ndarray:
    """Central differences; one-sided where a probe leaves the truncation."""
    x0 = _coords(amps, pivot)
    d = amps.size
    grad = np.empty_like(x0)
    for i in range(x0.size):
        e = np.zeros_like(x0)
        e[i] = step
        up = f(_from_coords(x0 + e, pivot, d))
        down = f(_from_coords(x0 - e, pivot, d))
        if np.isfinite(up) and np.isfinite(down):
            grad[i] = (up - down) / (2 * step)
            continue
        if center is None:
            center = f(amps)
        if np.isfinite(up):
            grad[i] = (up - center) / step
        elif np.isfinite(down):
            grad[i] = (center - down) / step
        else:
            grad[i] = 0.0
    return grad


def entropy_gradient(psi: PureState, spec: ChannelSpec, step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of the output entropy in the gauge-fixed chart at ``psi``.

    The returned vector has ``2D - 2`` entries.
    """
    if not 1e-8 < step < 1e-3:
        raise DomainError(f"step must lie in (1e-8, 1e-3), got {step}")
    amps, pivot = _gauge(psi.amplitudes)
    f = _Evaluator(spec, psi.trunc, -np.inf, -1)
    return _gradient(f, amps, pivot, step)


def _descend(f: _Evaluator, psi: PureState, cfg: SearchConfig):
    amps, pivot = _gauge(psi.amplitudes)
    val = f(amps)
    t = 1.0
    gnorm = np.inf
    it = 0
    converged = False
    while it < cfg.max_iters:
        g = _gradient(f, amps, pivot, cfg.grad_step, val)
        gnorm = float(np.linalg.norm(g))
        if not np.isfinite(gnorm):
            break
        if gnorm < cfg.conv_tol:
            converged = True
            break
        x0 = _coords(amps, pivot)
        accepted = False
        while t > 1e-12:
            cand = _from_coords(x0 - t * g, pivot, amps.size)
            new = f(cand)
            if new <= val - 1e-4 * t * gnorm ** 2:
                amps, pivot = _gauge(cand)
                val = new
                accepted = True
                break
            t *= 0.5
        it += 1
        if not accepted:
            break
        t = min(4.0 * t, 10.0)
    return amps, val, it, converged, gnorm


def initial_states(cfg: SearchConfig) -> list[tuple[str, PureState]]:
    """Physical starts followed by ``cfg.starts`` Haar-random starts from ``cfg.seed``."""
    trunc = cfg.trunc
    out = []
    if cfg.physical_starts:
        out.append(("vacuum", fock_state(0, trunc)))
        out.append(("fock1", fock_state(1, trunc)))
        for alpha in (0.5, -0.5, 1.0, -1.0):
            out.append((f"coherent({alpha:+g})", coherent_state(alpha, trunc)))
    rng = np.random.default_rng(cfg.seed)
    support = cfg.random_support or max(2, cfg.dim // 6)
    for i in range(cfg.starts):
        out.append((f"haar[{i}]", random_pure_state(trunc, rng, support=support)))
    return out


def coherent_fit(psi: PureState) -> tuple[complex, float]:
    """``alpha = <a>`` of ``psi`` and the fidelity ``|<alpha|psi>|^2``."""
    alpha = moments(psi).mean_a
    ref = coherent_state(alpha, Truncation(psi.dim, leakage_tol=1.0))
    return alpha, min(abs(ref.overlap(psi)) ** 2, 1.0)


def minimize(spec: ChannelSpec, config: SearchConfig = SearchConfig()) -> SearchResult:
    """Best output entropy found over all starts; ties go to the lowest start index."""
    trunc = config.trunc
    bound = conjectured_bound(spec)
    starts = initial_states(config)

    def run(item):
        idx, (label, psi) = item
        f = _Evaluator(spec, trunc, bound, idx)
        amps, val, it, conv, gnorm = _descend(f, psi, config)
        return idx, label, f, amps, val, it, conv, gnorm

    items = list(enumerate(starts))
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            runs = list(pool.map(run, items))
    else:
        runs = [run(item) for item in items]
    runs.sort(key=lambda r: r[0])

    records = [StartRecord(idx, label, float(val), it, conv, gnorm)
               for idx, label, _, _, val, it, conv, gnorm in runs]
    best = min(runs, key=lambda r: (r[4], r[0]))
    idx, _, _, amps, val, it, conv, _ = best
    if not np.isfinite(val):
        raise TruncationError("every start left the truncation; increase dim or lower the gain")
    argmin = PureState(amps, trunc)
    alpha, fid = coherent_fit(argmin)
    violations = [v for r in runs for v in r[2].violations]
    if not any(r.converged for r in records):
        log.warning("no start reached the gradient tolerance %.1e", config.conv_tol)
    return SearchResult(
        min_entropy_nats=float(val),
        argmin=argmin,
        coherent_fidelity=float(fid),
        fitted_alpha=complex(alpha),
        start_index=idx,
        iterations=it,
        converged=conv,
        bound_nats=bound,
        min_evaluated_nats=float(min(r[2].lowest for r in runs)),
        evaluations=sum(r[2].count for r in runs),
        failed_evaluations=sum(r[2].failed for r in runs),
        violations=violations,
        starts=records,
    )

