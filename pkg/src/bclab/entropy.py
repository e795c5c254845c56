"""Von Neumann entropy, the Gordon function and Holevo information.

Also hosts the numerical coherent-ensemble construction of the thermal state
and the Gaussian effective-gain formulas used as closed-form predictions of
amplifier output entropies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaincc, gammaln

from .channels import ChannelSpec, apply_channel
from .errors import DomainError, QuadratureError, SpectrumError
from .fock import DensityMatrix, PureState, Truncation

CLIP_TOL = 1e-10
FAIL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class EntropyReport:
    entropy_nats: float
    spectrum: np.ndarray
    clipped_mass: float
    leakage: float

    @property
    def entropy_bits(self) -> float:
        return self.entropy_nats / np.log(2)


def spectrum_entropy(eigenvalues: np.ndarray) -> tuple[float, np.ndarray, float]:
    """Entropy of a Hermitian spectrum with clipping of truncation jitter.

    Returns ``(entropy, clipped descending spectrum, clipped mass)``.
    """
    w = np.asarray(eigenvalues, dtype=float)
    if w.size and w.min() < -FAIL_TOL:
        raise SpectrumError(f"eigenvalue {w.min():.3e} is below -{FAIL_TOL:g}")
    neg = w < 0
    clipped = float(-w[neg].sum())
    w = np.where(neg, 0.0, w)
    pos = w[w > 0]
    s = float(-np.sum(pos * np.log(pos)))
    return (s if s > 0 else 0.0), np.sort(w)[::-1], clipped


def von_neumann_entropy(rho: DensityMatrix) -> EntropyReport:
    """``S(rho) = -Tr rho ln rho`` from the Hermitian eigendecomposition."""
    s, spec, clipped = spectrum_entropy(np.linalg.eigvalsh(rho.matrix))
    return EntropyReport(s, spec, clipped, rho.leakage)


def g_function(x: float) -> float:
    """Thermal-state entropy ``(x+1) ln(x+1) - x ln x`` in nats."""
    if x < 0:
        raise DomainError(f"g is defined for x >= 0, got {x}")
    if x == 0:
        return 0.0
    if x < 1:
        return float((x + 1) * np.log1p(x) - x * np.log(x))
    # Rearranged so large x does not cancel two nearly equal terms.
    return float(np.log1p(x) + x * np.log1p(1.0 / x))


def holevo_chi_general(n_out: float, n_ase: float) -> float:
    """``g(N_out + N_ASE) - g(N_ASE)``."""
    if n_out < 0 or n_ase < 0:
        raise DomainError("photon numbers must be nonnegative")
    return g_function(n_out + n_ase) - g_function(n_ase)


def holevo_chi_amplifier(gain: float, photons: float) -> float:
    """Holevo information of a Gaussian coherent ensemble with ``N`` input photons through gain ``G``."""
    if gain < 1:
        raise DomainError(f"gain must be >= 1, got {gain}")
    if photons < 0:
        raise DomainError(f"photon number must be nonnegative, got {photons}")
    return holevo_chi_general(photons * gain, gain - 1)


@dataclass(frozen=True)
class QuadratureGrid:
    """Radial Gauss-Legendre nodes in ``u = |alpha|^2`` on ``[0, u_max]`` times a uniform angle grid.

    ``u_max=None`` picks the smallest cutoff whose neglected tail is below
    ``tol`` for every retained matrix element.
    """

    radial: int = 64
    angular: int = 64
    u_max: float | None = None
    tol: float = 1e-8


def _radial_tail(u_max: float, n_mean: float, dim: int) -> float:
    # Mass of each diagonal element beyond u_max, weighted by the element size.
    n = np.arange(dim)
    rate = 1.0 + 1.0 / n_mean
    q = n_mean / (1.0 + n_mean)
    return float(np.max(q ** n / (1.0 + n_mean) * gammaincc(n + 1, rate * u_max)))


def thermal_from_coherent_ensemble(n_mean: float, trunc: Truncation,
                                   grid: QuadratureGrid = QuadratureGrid()) -> DensityMatrix:
    """Gaussian mixture of coherent projectors with mean photon number ``n_mean``, by quadrature.

    The coherent amplitudes are the unnormalized closed form on the retained
    levels, so the trace shortfall equals the ensemble mass above the cut.
    """
    if n_mean < 0:
        raise DomainError(f"mean photon number must be nonnegative, got {n_mean}")
    if n_mean > trunc.dim / 8:
        raise QuadratureError(f"n_mean = {n_mean} exceeds dim/8 = {trunc.dim / 8}")
    if grid.angular < trunc.dim:
        raise QuadratureError(
            f"{grid.angular} angular nodes cannot resolve coherences up to order {trunc.dim - 1}")
    d = trunc.dim
    if n_mean == 0:
        m = np.zeros((d, d), dtype=complex)
        m[0, 0] = 1.0
        return DensityMatrix(m, trunc)
    min_cut = n_mean * np.log(1.0 / grid.tol)
    if grid.u_max is None:
        lo, hi = 0.0, max(min_cut, 1.0)
        while _radial_tail(hi, n_mean, d) > grid.tol:
            hi *= 2
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if _radial_tail(mid, n_mean, d) > grid.tol else (lo, mid)
        u_max = max(hi, min_cut)
    else:
        u_max = grid.u_max
        if u_max < min_cut:
            raise QuadratureError(f"radial cutoff u_max={u_max:.4g} is below N ln(1/tol) = {min_cut:.4g}")

    x, w = np.polynomial.legendre.leggauss(grid.radial)
    u = 0.5 * u_max * (x + 1.0)
    wu = 0.5 * u_max * w * np.exp(-u / n_mean) / n_mean
    phi = 2 * np.pi * np.arange(grid.angular) / grid.angular
    wphi = np.full(grid.angular, 1.0 / grid.angular)

    n = np.arange(d)
    # <n|alpha> = exp(-u/2) u^(n/2) e^(i n phi) / sqrt(n!)
    log_mag = -0.5 * u[:, None] + 0.5 * n[None, :] * np.log(u[:, None]) - 0.5 * gammaln(n + 1)[None, :]
    mag = np.exp(log_mag)
    phase = np.exp(1j * np.outer(phi, n))
    amps = (mag[:, None, :] * phase[None, :, :]).reshape(-1, d)
    weights = (wu[:, None] * wphi[None, :]).ravel()
    rho = (amps.T * weights) @ amps.conj()
    rho = 0.5 * (rho + rho.conj().T)
    tr = float(np.trace(rho).real)
    if tr > 1.0 + 1e-10:
        raise QuadratureError(f"quadrature overshoots unit trace: {tr!r}")
    return DensityMatrix(rho, trunc, leakage=max(1.0 - tr, 0.0))


def classical_ensemble_entropy_bound(samples: Sequence[tuple[float, PureState]],
                                     spec: ChannelSpec) -> tuple[float, float]:
    """Both sides of the concavity inequality for a finite coherent-state mixture.

    Returns ``(S(sum_i w_i Phi(rho_i)), sum_i w_i S(Phi(rho_i)))``; the first
    is never smaller than the second.
    """
    weights = np.array([w for w, _ in samples], dtype=float)
    if weights.size == 0 or (weights < 0).any() or abs(weights.sum() - 1) > 1e-12:
        raise DomainError("weights must be nonnegative and sum to one")
    outputs = [apply_channel(psi, spec).output for _, psi in samples]
    mix = sum(w * o.matrix for w, o in zip(weights, outputs))
    trunc = outputs[0].trunc
    leak = float(sum(w * o.leakage for w, o in zip(weights, outputs)))
    lhs = von_neumann_entropy(DensityMatrix(mix, trunc, leakage=leak)).entropy_nats
    rhs = float(sum(w * von_neumann_entropy(o).entropy_nats
                    for w, o in zip(weights, outputs) if w > 0))
    return lhs, rhs


def gaussian_effective_gain(gain: float, r: float) -> float:
    """Gain G' of a vacuum-input amplifier with the same output entropy as squeezed vacuum through G."""
    if gain < 1:
        raise DomainError(f"gain must be >= 1, got {gain}")
    return 0.5 + np.sqrt((gain - 0.5) ** 2 + gain * (gain - 1) * np.sinh(r) ** 2)


def gaussian_effective_gain_from_moments(gain: float, mean_n: float, mean_abs_a_sq: float) -> float:
    """Same as :func:`gaussian_effective_gain` with ``sinh^2 r = <a^dagger a> - |<a>|^2``."""
    if gain < 1:
        raise DomainError(f"gain must be >= 1, got {gain}")
    if mean_abs_a_sq < 0 or mean_n < mean_abs_a_sq - 1e-10:
        raise DomainError("need <a^dagger a> >= |<a>|^2 >= 0")
    var = max(mean_n - mean_abs_a_sq, 0.0)
    h = gain - 0.5
    return 0.5 + h * np.sqrt(1.0 + gain * (gain - 1) / h ** 2 * var)
