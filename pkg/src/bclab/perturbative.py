"""First-order predictions for weak amplification and for an amplifier followed by strong loss.

Two regimes are covered:

* ``InfinitesimalGain``: amplifier with ``G = 1 + eps``. The output has one
  O(eps) eigenvalue ``eps' = (1 + <a^dagger a> - |<a>|^2) eps``.
* ``AmplifierThenLoss(G)``: amplifier of arbitrary gain followed by loss
  with transmissivity ``eps``. The small eigenvalue is
  ``eps ((G - 1) + G (<a^dagger a> - |<a>|^2))``.

Both predictions are checked against the full dilation numerics by
:func:`convergence_study`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .channels import Amplifier, Cascade, ChannelSpec, Loss, apply_channel
from .entropy import von_neumann_entropy
from .errors import DomainError
from .fock import Moments, PureState, moments


@dataclass(frozen=True)
class InfinitesimalGain:
    pass


@dataclass(frozen=True)
class AmplifierThenLoss:
    gain: float

    def __post_init__(self):
        if self.gain < 1:
            raise DomainError(f"gain must be >= 1, got {self.gain}")


Regime = Union[InfinitesimalGain, AmplifierThenLoss]


@dataclass(frozen=True)
class PerturbativePrediction:
    epsilon: float
    lambda_small: float
    entropy_nats: float
    regime: Regime


def _variance(m: Moments) -> float:
    var = m.mean_n - abs(m.mean_a) ** 2
    if var < -1e-10:
        raise DomainError(f"<a^dagger a> - |<a>|^2 = {var:.3e} is negative")
    return max(var, 0.0)


def epsilon_prime(epsilon: float, m: Moments) -> float:
    """Effective first-order gain excess ``(1 + <a^dagger a> - |<a>|^2) eps``."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    return (1.0 + _variance(m)) * epsilon


def binary_entropy(p: float) -> float:
    """``-(1-p) ln(1-p) - p ln p`` with the ``0 ln 0 = 0`` convention."""
    if not 0 <= p <= 1:
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    return float(-sum(x * np.log(x) for x in (p, 1.0 - p) if x > 0))


def first_order_entropy(eps_prime: float) -> float:
    """Entropy of the two-eigenvalue output ``(1 - eps', eps')``."""
    if not 0 < eps_prime < 1:
        raise DomainError(f"eps' must lie in (0, 1), got {eps_prime}")
    return binary_entropy(eps_prime)


def cascade_lambda1(epsilon: float, gain: float, m: Moments) -> float:
    """Small output eigenvalue of amplifier(G) then loss(eps), to first order in eps."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if gain < 1:
        raise DomainError(f"gain must be >= 1, got {gain}")
    return epsilon * ((gain - 1) + gain * _variance(m))


def secular_roots(epsilon: float, gain: float, m: Moments) -> tuple[float, float]:
    """Roots ``(large, small)`` of the two-level secular quadratic

    ``l^2 - (1 - eps G n) l + eps [1 - eps(G-1) - eps G n][(G-1) + G n] - eps G |<a>|^2 = 0``

    solved exactly. Its coefficients are only meaningful to first order in
    eps: the small root agrees with :func:`cascade_lambda1` up to O(eps^2)
    and can dip below zero by that much.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if gain < 1:
        raise DomainError(f"gain must be >= 1, got {gain}")
    n, a2 = m.mean_n, abs(m.mean_a) ** 2
    b = 1.0 - epsilon * gain * n
    c = (epsilon * (1 - epsilon * (gain - 1) - epsilon * gain * n) * ((gain - 1) + gain * n)
         - epsilon * gain * a2)
    disc = b * b - 4 * c
    if disc < 0:
        raise DomainError(f"negative discriminant {disc:.3e}: parameters are outside the perturbative regime")
    root = np.sqrt(disc)
    large = 0.5 * (b + root)
    small = c / large if large != 0 else 0.5 * (b - root)
    return float(large), float(small)


def regime_channel(regime: Regime, epsilon: float) -> ChannelSpec:
    if isinstance(regime, InfinitesimalGain):
        return Amplifier(1.0 + epsilon)
    return Cascade((Amplifier(regime.gain), Loss(epsilon)))


def predict(m: Moments, regime: Regime, epsilon: float) -> PerturbativePrediction:
    """First-order small eigenvalue and the two-level entropy it implies."""
    if isinstance(regime, InfinitesimalGain):
        lam = epsilon_prime(epsilon, m)
    else:
        lam = cascade_lambda1(epsilon, regime.gain, m)
    return PerturbativePrediction(epsilon, lam, binary_entropy(lam), regime)


@dataclass(frozen=True)
class FirstOrderTerm:
    """Numerically extracted ``rho_1 = (rho(eps) - (1 - eps) rho_0) / eps``.

    ``rho_1`` has unit trace but is not positive, so it is kept as a bare
    matrix rather than a :class:`DensityMatrix`.
    """

    epsilon: float
    rho1: np.ndarray
    trace: float
    overlap: float
    predicted_overlap: float


def first_order_density_matrix(psi: PureState, epsilon: float) -> FirstOrderTerm:
    """Extract the first-order output correction for an amplifier with gain ``1 + eps``.

    ``overlap`` is ``Tr(rho_0 rho_1)``; its first-order prediction is
    ``-(<a^dagger a> - |<a>|^2)``.
    """
    if not 0 < epsilon <= 1e-3:
        raise DomainError(f"epsilon must lie in (0, 1e-3], got {epsilon}")
    rho0 = psi.density().matrix
    out = apply_channel(psi, Amplifier(1.0 + epsilon)).output.matrix
    rho1 = (out - (1.0 - epsilon) * rho0) / epsilon
    # Tr(rho_0 rho_1) from <psi|rho(eps)|psi> avoids forming a difference of matrices.
    fidelity = float(np.vdot(psi.amplitudes, out @ psi.amplitudes).real)
    overlap = (fidelity - (1.0 - epsilon)) / epsilon
    return FirstOrderTerm(
        epsilon=epsilon,
        rho1=rho1,
        trace=float(np.trace(rho1).real),
        overlap=overlap,
        predicted_overlap=-_variance(moments(psi)),
    )


@dataclass(frozen=True)
class ConvergenceRow:
    epsilon: float
    predicted: float
    measured: float
    ratio: float

    @property
    def relative_error(self) -> float:
        if self.predicted == 0:
            return float("nan")
        return abs(self.measured - self.predicted) / self.predicted


def convergence_study(psi: PureState, regime: Regime, epsilons: Sequence[float]) -> list[ConvergenceRow]:
    """Predicted vs. measured output entropy over a decreasing list of eps."""
    eps = [float(e) for e in epsilons]
    if not eps or any(e <= 0 or e > 1e-2 for e in eps):
        raise DomainError("epsilons must lie in (0, 1e-2]")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise DomainError("epsilons must be strictly decreasing")
    m = moments(psi)
    rows = []
    for e in eps:
        pred = predict(m, regime, e).entropy_nats
        meas = von_neumann_entropy(apply_channel(psi, regime_channel(regime, e)).output).entropy_nats
        rows.append(ConvergenceRow(e, pred, meas, meas / pred if pred > 0 else float("nan")))
    return rows


def observed_order(rows: Sequence[ConvergenceRow]) -> float:
    """Least-squares slope of log(relative error) against log(eps)."""
    e = np.log([r.epsilon for r in rows])
    err = np.log([r.relative_error for r in rows])
    return float(np.polyfit(e, err, 1)[0])
