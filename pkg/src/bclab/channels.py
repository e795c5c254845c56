"""Phase-insensitive amplifier, pure loss and their cascades.

Each single-mode channel is realized by a two-mode unitary dilation: the
input is joined with a vacuum ancilla, a two-mode squeezer (amplifier) or
beam splitter (loss) acts on the pair, and the ancilla is traced out.

The two generators conserve ``n_sys - n_anc`` and ``n_sys + n_anc``
respectively, so the D**2-dimensional generator splits into small blocks.
Only the blocks reachable from ``|n>|0>`` are exponentiated, which gives
the same matrix elements as exponentiating the whole truncated generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import DomainError, TruncationError
from .fock import DensityMatrix, PureState, Truncation, displacement_operator, ladder_operators


@dataclass(frozen=True)
class Amplifier:
    """Quantum-limited phase-insensitive amplifier with power gain ``gain``."""

    gain: float

    def __post_init__(self):
        if not self.gain >= 1:
            raise DomainError(f"amplifier gain must be >= 1, got {self.gain}")


@dataclass(frozen=True)
class Loss:
    """Pure-loss channel with transmissivity ``eta``."""

    eta: float

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise DomainError(f"transmissivity must be in (0, 1], got {self.eta}")


@dataclass(frozen=True)
class Cascade:
    """Stages applied first-element-first."""

    stages: tuple

    def __post_init__(self):
        stages = tuple(self.stages)
        if not stages:
            raise DomainError("a cascade needs at least one stage")
        for s in stages:
            if not isinstance(s, (Amplifier, Loss, Cascade)):
                raise DomainError(f"not a channel spec: {s!r}")
        object.__setattr__(self, "stages", stages)


ChannelSpec = Union[Amplifier, Loss, Cascade]


@dataclass(frozen=True, eq=False)
class ChannelApplication:
    output: DensityMatrix
    leakage: float
    spec: ChannelSpec


def flatten(spec: ChannelSpec) -> list:
    """Elementary stages of ``spec`` in application order."""
    if isinstance(spec, Cascade):
        return [s for stage in spec.stages for s in flatten(stage)]
    return [spec]


def vacuum_output_photons(spec: ChannelSpec) -> float:
    """Mean photon number of the (thermal) output for vacuum input."""
    n = 0.0
    for s in flatten(spec):
        n = s.gain * n + s.gain - 1 if isinstance(s, Amplifier) else s.eta * n
    return n


def overall_gain(spec: ChannelSpec) -> float:
    g = 1.0
    for s in flatten(spec):
        g *= s.gain if isinstance(s, Amplifier) else s.eta
    return g


def amplifier_adequate(mean_n: float, gain: float, trunc: Truncation) -> bool:
    """Heuristic cutoff check ``G (<n> + 1) <= D / 6``; the measured leakage is authoritative."""
    return gain * (mean_n + 1) <= trunc.dim / 6


def _two_mode_generator(kind: str, param: float, dim: int) -> sp.csr_matrix:
    a = sp.csr_matrix(ladder_operators(Truncation(dim))[0])
    eye = sp.identity(dim, format="csr")
    A = sp.kron(a, eye, format="csr")
    B = sp.kron(eye, a, format="csr")
    if kind == "amplifier":
        r = np.arccosh(np.sqrt(param))
        return r * (A.T @ B.T - A @ B)
    theta = np.arccos(np.sqrt(param))
    return theta * (A.T @ B - A @ B.T)


@lru_cache(maxsize=64)
def _dilation_isometry(kind: str, param: float, dim: int) -> np.ndarray:
    """``V[m, k, n] = <m, k| U |n, 0>`` for the truncated two-mode unitary U."""
    herm = (1j * _two_mode_generator(kind, param, dim)).tocsr()
    _, labels = connected_components(herm != 0, directed=False)
    iso = np.zeros((dim * dim, dim), dtype=complex)
    for n in range(dim):
        col = n * dim
        idx = np.flatnonzero(labels == labels[col])
        block = herm[idx][:, idx].toarray()
        w, v = np.linalg.eigh(block)
        src = int(np.searchsorted(idx, col))
        iso[idx, n] = (v * np.exp(-1j * w)) @ v[src].conj()
    iso = iso.reshape(dim, dim, dim)
    iso.setflags(write=False)
    return iso


_BOUNDARY_CACHE: dict[int, np.ndarray] = {}


def _boundary_mask(dim: int) -> np.ndarray:
    if dim not in _BOUNDARY_CACHE:
        m = np.zeros((dim, dim), dtype=bool)
        m[-1, :] = True
        m[:, -1] = True
        _BOUNDARY_CACHE[dim] = m.ravel()
    return _BOUNDARY_CACHE[dim]


def _dilate(rho: DensityMatrix, kind: str, param: float, spec: ChannelSpec) -> ChannelApplication:
    if rho.modes != 1:
        raise DomainError("channels act on single-mode states")
    d = rho.dim
    iso = _dilation_isometry(kind, float(param), d)
    half = iso @ rho.matrix
    joint_diag = np.sum(half * iso.conj(), axis=2).real.ravel()
    boundary = float(joint_diag[_boundary_mask(d)].sum())
    if boundary > rho.trunc.leakage_tol:
        raise TruncationError(
            f"{kind} dilation puts {boundary:.3e} on the cutoff level (tol {rho.trunc.leakage_tol:.1e})")
    out = np.tensordot(half, iso.conj(), axes=([1, 2], [1, 2]))
    out = 0.5 * (out + out.conj().T)
    leak = rho.leakage + boundary
    return ChannelApplication(DensityMatrix(out, rho.trunc, leakage=leak), leak, spec)


def apply_amplifier(rho: DensityMatrix, gain: float) -> ChannelApplication:
    """Quantum-limited amplifier: two-mode squeeze with ``r = arccosh(sqrt(G))`` against vacuum."""
    spec = Amplifier(gain)
    if gain == 1:
        return ChannelApplication(rho, rho.leakage, spec)
    return _dilate(rho, "amplifier", gain, spec)


def apply_loss(rho: DensityMatrix, eta: float) -> ChannelApplication:
    """Pure loss: beam splitter with ``eta = cos(theta)**2`` against vacuum."""
    spec = Loss(eta)
    if eta == 1:
        return ChannelApplication(rho, rho.leakage, spec)
    return _dilate(rho, "loss", eta, spec)


def apply_channel(rho: DensityMatrix | PureState, spec: ChannelSpec) -> ChannelApplication:
    if isinstance(rho, PureState):
        rho = rho.density()
    state = rho
    for stage in flatten(spec):
        if isinstance(stage, Amplifier):
            state = apply_amplifier(state, stage.gain).output
        else:
            state = apply_loss(state, stage.eta).output
    return ChannelApplication(state, state.leakage, spec)


def amplifier_output_for_coherent(alpha: complex, gain: float, trunc: Truncation) -> DensityMatrix:
    """Closed form ``D(sqrt(G) alpha) rho_ASE(G) D^dagger(sqrt(G) alpha)``.

    ``rho_ASE(G)`` is thermal with ``G - 1`` photons. The displacement is
    applied in a doubled working space and the result cropped, so the
    retained levels never see the cut of the operator exponential.
    """
    if gain < 1:
        raise DomainError(f"amplifier gain must be >= 1, got {gain}")
    work = Truncation(2 * trunc.dim)
    n_ase = gain - 1.0
    weights = np.zeros(work.dim)
    if n_ase == 0:
        weights[0] = 1.0
    else:
        weights = (n_ase / gain) ** np.arange(work.dim) / gain
    disp = displacement_operator(np.sqrt(gain) * complex(alpha), work)
    full = (disp * weights) @ disp.conj().T
    kept = full[:trunc.dim, :trunc.dim]
    deficit = float(np.trace(full).real - np.trace(kept).real)
    if deficit > trunc.leakage_tol:
        raise TruncationError(f"displaced ASE state loses {deficit:.3e} above level {trunc.dim - 1}")
    kept = kept / np.trace(kept).real
    kept = 0.5 * (kept + kept.conj().T)
    return DensityMatrix(kept, trunc, leakage=deficit)
