"""Single- and two-mode states and operators in a truncated Fock basis.

Every constructor that can lose probability mass above the cutoff reports
that mass as ``leakage`` and raises :class:`TruncationError` when it exceeds
the truncation's budget, rather than silently renormalizing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammainc

from .errors import DomainError, ResourceError, TruncationError

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
NORM_TOL = 1e-12

# Largest dense two-mode dimension D**2 accepted by tensor_with_ancilla.
DENSE_TWO_MODE_CAP = 1600


@dataclass(frozen=True)
class Truncation:
    """Fock cutoff: levels ``0 .. dim-1`` and the tolerated leakage."""

    dim: int
    leakage_tol: float = 1e-10

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise DomainError(f"truncation dim must be an integer >= 2, got {self.dim}")
        if not self.leakage_tol > 0:
            raise DomainError(f"leakage_tol must be positive, got {self.leakage_tol}")
        object.__setattr__(self, "dim", int(self.dim))


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    trunc: Truncation
    leakage: float = 0.0

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.shape != (self.trunc.dim,):
            raise DomainError(f"expected {self.trunc.dim} amplitudes, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state is not normalized: norm = {norm!r}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.trunc.dim

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()),
                             self.trunc, leakage=self.leakage)

    def overlap(self, other: "PureState") -> complex:
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, numerically positive matrix on ``modes`` copies of the truncated mode.

    ``leakage`` is the accumulated truncation budget; the trace may fall
    short of one by at most that much.
    """

    matrix: np.ndarray
    trunc: Truncation
    leakage: float = 0.0
    modes: int = 1
    check_psd: bool = field(default=True, repr=False)

    def __post_init__(self):
        mat = _frozen(self.matrix)
        n = self.trunc.dim ** self.modes
        if mat.shape != (n, n):
            raise DomainError(f"expected a {n}x{n} matrix, got shape {mat.shape}")
        herm = np.abs(mat - mat.conj().T).max()
        if herm > HERMITIAN_TOL:
            raise DomainError(f"matrix is not Hermitian (max |M - M^H| = {herm:.3e})")
        tr = np.trace(mat)
        if abs(tr.real - 1.0) > self.leakage + 1e-10:
            raise DomainError(f"trace {tr.real!r} outside the leakage budget {self.leakage!r}")
        if self.check_psd:
            try:
                np.linalg.cholesky(mat + PSD_TOL * np.eye(n))
            except np.linalg.LinAlgError:
                raise DomainError("matrix has an eigenvalue below -1e-10") from None
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.trunc.dim

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityMatrix":
        return psi.density()


@dataclass(frozen=True)
class Moments:
    """First and second moments <a>, <a^dagger a>, <a^2>."""

    mean_a: complex
    mean_n: float
    mean_a2: complex

    def __post_init__(self):
        if self.mean_n < abs(self.mean_a) ** 2 - 1e-10:
            raise DomainError("<a^dagger a> is below |<a>|^2")

    @property
    def variance(self) -> float:
        """<a^dagger a> - |<a>|^2, zero exactly for coherent states."""
        return max(self.mean_n - abs(self.mean_a) ** 2, 0.0)


def ladder_operators(trunc: Truncation) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation and creation matrices, ``a[m, n] = sqrt(n) delta(m, n-1)``."""
    a = np.diag(np.sqrt(np.arange(1, trunc.dim, dtype=float)), 1).astype(complex)
    return a, a.conj().T.copy()


def number_operator(trunc: Truncation) -> np.ndarray:
    return np.diag(np.arange(trunc.dim, dtype=float)).astype(complex)


def fock_state(n: int, trunc: Truncation) -> PureState:
    if not 0 <= n < trunc.dim:
        raise TruncationError(f"Fock level {n} is outside 0..{trunc.dim - 1}")
    amps = np.zeros(trunc.dim, dtype=complex)
    amps[n] = 1.0
    return PureState(amps, trunc)


def coherent_state(alpha: complex, trunc: Truncation) -> PureState:
    """Coherent state ``|alpha>`` with Poisson tail above the cutoff as leakage."""
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    # P(Poisson(x) >= dim), accurate far below machine epsilon.
    deficit = float(gammainc(trunc.dim, x)) if x > 0 else 0.0
    if deficit > trunc.leakage_tol:
        raise TruncationError(
            f"coherent state |alpha|^2={x:.4g} loses {deficit:.3e} above level {trunc.dim - 1}")
    amps = np.empty(trunc.dim, dtype=complex)
    amps[0] = np.exp(-x / 2)
    for n in range(1, trunc.dim):
        amps[n] = amps[n - 1] * alpha / np.sqrt(n)
    amps /= np.linalg.norm(amps)
    return PureState(amps, trunc, leakage=deficit)


def _expm_antihermitian(gen: np.ndarray) -> np.ndarray:
    """exp(gen) for anti-Hermitian ``gen`` via the eigenbasis of the Hermitian ``i*gen``."""
    w, v = np.linalg.eigh(1j * gen)
    return (v * np.exp(-1j * w)) @ v.conj().T


def displacement_operator(alpha: complex, trunc: Truncation) -> np.ndarray:
    """``D(alpha) = exp(alpha a^dagger - alpha^* a)`` on the truncated space.

    Accurate on the lower half of the basis; the cut breaks unitarity near
    the top levels.
    """
    alpha = complex(alpha)
    if abs(alpha) ** 2 > trunc.dim / 4:
        raise TruncationError(f"|alpha|^2 = {abs(alpha) ** 2:.4g} exceeds dim/4 = {trunc.dim / 4}")
    if alpha == 0:
        return np.eye(trunc.dim, dtype=complex)
    a, ad = ladder_operators(trunc)
    return _expm_antihermitian(alpha * ad - alpha.conjugate() * a)


def squeeze_operator(r: float, trunc: Truncation) -> np.ndarray:
    """``S(r) = exp(r (a^2 - a^dagger^2) / 2)``; squeezed quadrature variance scales by exp(-2r)."""
    r = float(r)
    if np.sinh(r) ** 2 > trunc.dim / 8:
        raise TruncationError(f"sinh^2(r) = {np.sinh(r) ** 2:.4g} exceeds dim/8 = {trunc.dim / 8}")
    if r == 0:
        return np.eye(trunc.dim, dtype=complex)
    a, ad = ladder_operators(trunc)
    return _expm_antihermitian(0.5 * r * (a @ a - ad @ ad))


def squeezed_state(r: float, trunc: Truncation, alpha: complex = 0.0) -> PureState:
    """Displaced squeezed vacuum ``D(alpha) S(r)|0>``.

    Built in a doubled working space so that the cut of the operator
    exponentials stays far from the retained levels; the mass above
    ``trunc.dim`` is the leakage.
    """
    if np.sinh(r) ** 2 > trunc.dim / 8:
        raise TruncationError(f"sinh^2(r) = {np.sinh(r) ** 2:.4g} exceeds dim/8 = {trunc.dim / 8}")
    if abs(alpha) ** 2 > trunc.dim / 4:
        raise TruncationError(f"|alpha|^2 = {abs(alpha) ** 2:.4g} exceeds dim/4 = {trunc.dim / 4}")
    work = Truncation(2 * trunc.dim)
    vac = np.zeros(work.dim, dtype=complex)
    vac[0] = 1.0
    full = displacement_operator(alpha, work) @ (squeeze_operator(r, work) @ vac)
    full /= np.linalg.norm(full)
    deficit = float(np.sum(np.abs(full[trunc.dim:]) ** 2))
    if deficit > trunc.leakage_tol:
        raise TruncationError(f"squeezed state loses {deficit:.3e} above level {trunc.dim - 1}")
    amps = full[:trunc.dim]
    return PureState(amps / np.linalg.norm(amps), trunc, leakage=deficit)


def thermal_state(n_mean: float, trunc: Truncation) -> DensityMatrix:
    """Bose-Einstein state, weights ``N^n / (1+N)^(n+1)`` renormalized over the cut."""
    if n_mean < 0:
        raise DomainError(f"mean photon number must be nonnegative, got {n_mean}")
    if n_mean > trunc.dim / 6:
        raise TruncationError(f"n_mean = {n_mean} exceeds dim/6 = {trunc.dim / 6:.4g}")
    if n_mean == 0:
        weights = np.zeros(trunc.dim)
        weights[0] = 1.0
        return DensityMatrix(np.diag(weights), trunc)
    q = n_mean / (1.0 + n_mean)
    tail = q ** trunc.dim
    if tail > trunc.leakage_tol:
        raise TruncationError(f"thermal tail mass {tail:.3e} exceeds {trunc.leakage_tol:.1e}")
    weights = q ** np.arange(trunc.dim) / (1.0 + n_mean)
    weights /= weights.sum()
    return DensityMatrix(np.diag(weights).astype(complex), trunc, leakage=tail)


def moments(state: PureState | DensityMatrix) -> Moments:
    a, ad = ladder_operators(state.trunc)
    if isinstance(state, PureState):
        psi = state.amplitudes
        a_psi = a @ psi
        return Moments(
            mean_a=complex(np.vdot(psi, a_psi)),
            mean_n=float(np.vdot(a_psi, a_psi).real),
            mean_a2=complex(np.vdot(psi, a @ a_psi)),
        )
    rho = state.matrix
    return Moments(
        mean_a=complex(np.trace(rho @ a)),
        mean_n=float(np.trace(rho @ ad @ a).real),
        mean_a2=complex(np.trace(rho @ a @ a)),
    )


def tensor_with_ancilla(state: DensityMatrix, ancilla: DensityMatrix,
                        cap: int = DENSE_TWO_MODE_CAP) -> DensityMatrix:
    """Two-mode product ``state (x) ancilla``; the system is mode 0."""
    if state.modes != 1 or ancilla.modes != 1:
        raise DomainError("tensor_with_ancilla takes two single-mode states")
    if state.trunc != ancilla.trunc:
        raise DomainError("system and ancilla must share a truncation")
    if state.dim ** 2 > cap:
        raise ResourceError(f"two-mode dimension {state.dim ** 2} exceeds cap {cap}")
    mat = np.kron(state.matrix, ancilla.matrix)
    return DensityMatrix(mat, state.trunc, leakage=state.leakage + ancilla.leakage,
                         modes=2, check_psd=False)


def partial_trace(two_mode: DensityMatrix, keep: int = 0) -> DensityMatrix:
    """Reduced state of mode ``keep`` (0 = system, 1 = ancilla)."""
    d = two_mode.dim
    if two_mode.modes != 2 or two_mode.matrix.shape != (d * d, d * d):
        raise DomainError("partial_trace expects a two-mode density matrix of size D^2")
    if keep not in (0, 1):
        raise DomainError(f"keep must be 0 or 1, got {keep}")
    t = two_mode.matrix.reshape(d, d, d, d)
    red = np.einsum("ikjk->ij", t) if keep == 0 else np.einsum("kikj->ij", t)
    red = 0.5 * (red + red.conj().T)
    return DensityMatrix(red, two_mode.trunc, leakage=two_mode.leakage)


def random_pure_state(trunc: Truncation, rng: np.random.Generator,
                      support: int | None = None) -> PureState:
    """Haar-random pure state on the lowest ``support`` levels (all levels by default)."""
    k = trunc.dim if support is None else int(support)
    if not 1 <= k <= trunc.dim:
        raise DomainError(f"support must be in 1..{trunc.dim}, got {support}")
    amps = np.zeros(trunc.dim, dtype=complex)
    amps[:k] = rng.normal(size=k) + 1j * rng.normal(size=k)
    return PureState(amps / np.linalg.norm(amps), trunc)


def random_density_matrix(trunc: Truncation, rng: np.random.Generator,
                          support: int | None = None, modes: int = 1) -> DensityMatrix:
    """Ginibre-random full-rank state on the lowest ``support`` levels of each mode."""
    k = trunc.dim if support is None else int(support)
    n = trunc.dim ** modes
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    mask = np.ones(n, dtype=bool)
    levels = np.indices((trunc.dim,) * modes).reshape(modes, -1)
    mask &= (levels < k).all(axis=0)
    g[~mask, :] = 0.0
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T) / np.trace(rho).real
    return DensityMatrix(rho, trunc, modes=modes, check_psd=modes == 1)
