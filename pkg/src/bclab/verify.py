"""Named property suites behind ``bcl verify``.

Each suite returns a list of :class:`Check` records; a suite passes iff
every check does.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .channels import Amplifier, Cascade, Loss, amplifier_output_for_coherent, apply_amplifier, apply_channel
from .entropy import (
    classical_ensemble_entropy_bound,
    g_function,
    gaussian_effective_gain,
    gaussian_effective_gain_from_moments,
    holevo_chi_amplifier,
    holevo_chi_general,
    thermal_from_coherent_ensemble,
    von_neumann_entropy,
)
from .errors import BclError
from .fock import (
    Truncation,
    coherent_state,
    fock_state,
    moments,
    random_pure_state,
    squeezed_state,
    thermal_state,
)
from .perturbative import (
    cascade_lambda1,
    epsilon_prime,
    first_order_density_matrix,
    first_order_entropy,
)


# Points of the disc |alpha| <= 1, boundary included.
COHERENT_SAMPLE = (0, 0.5, -0.7j, 0.6 + 0.8j, 1.0)


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    expected: float
    tolerance: float
    passed: bool
    note: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def _abs(suite, name, value, expected, tol, note="") -> Check:
    return Check(suite, name, float(value), float(expected), tol,
                 bool(abs(value - expected) <= tol), note)


def _rel(suite, name, value, expected, tol, note="") -> Check:
    ok = abs(value - expected) <= tol * abs(expected)
    return Check(suite, name, float(value), float(expected), tol, bool(ok), note or "relative")


def _guard(suite: str, name: str, fn) -> list[Check]:
    try:
        return fn()
    except BclError as exc:
        return [Check(suite, name, float("nan"), float("nan"), 0.0, False, f"{type(exc).__name__}: {exc}")]


def suite_thermal(dim: int = 60, **_) -> list[Check]:
    out = []
    for n in (0.1, 0.5, 1.0, 2.0, 5.0):
        def one(n=n):
            # Permissive budget so the truncation error shows up in the entropy check itself.
            rho = thermal_state(n, Truncation(dim, leakage_tol=1e-2))
            s = von_neumann_entropy(rho).entropy_nats
            return [_abs("thermal", f"S(thermal({n:g}))=g({n:g})", s, g_function(n), 1e-8,
                         f"tail={rho.leakage:.3e}")]
        out += _guard("thermal", f"S(thermal({n:g}))", one)
    return out


def suite_ensemble(dim: int = 30, **_) -> list[Check]:
    trunc = Truncation(dim, leakage_tol=1e-8)

    def run():
        rho = thermal_from_coherent_ensemble(1.0, trunc)
        ref = thermal_state(1.0, trunc)
        off = rho.matrix - np.diag(np.diag(rho.matrix))
        return [
            _abs("ensemble", "quadrature=thermal(1) entrywise", np.abs(rho.matrix - ref.matrix).max(), 0, 1e-6),
            _abs("ensemble", "coherences vanish", np.abs(off).max(), 0, 1e-8),
        ]
    return _guard("ensemble", "quadrature", run)


def suite_amplifier(dim: int = 40, **_) -> list[Check]:
    out = []
    for gain in (1.2, 1.5, 2.0):
        def one(gain=gain):
            trunc = Truncation(dim, leakage_tol=1e-6)
            vac = apply_amplifier(fock_state(0, trunc).density(), gain).output
            checks = [_abs("amplifier", f"G={gain:g} vacuum->thermal(G-1)",
                           np.abs(vac.matrix - thermal_state(gain - 1, trunc).matrix).max(), 0, 1e-8)]
            n_in = 0.5
            th = apply_amplifier(thermal_state(n_in, trunc), gain).output
            checks.append(_abs("amplifier", f"G={gain:g} thermal({n_in:g})->thermal(NG+G-1)",
                               np.abs(th.matrix - thermal_state(n_in * gain + gain - 1, trunc).matrix).max(),
                               0, 1e-7))
            ents = [von_neumann_entropy(apply_amplifier(coherent_state(a, trunc).density(), gain).output).entropy_nats
                    for a in COHERENT_SAMPLE]
            checks.append(_abs("amplifier", f"G={gain:g} coherent entropy spread", np.ptp(ents), 0, 1e-8))
            checks.append(_abs("amplifier", f"G={gain:g} coherent entropy=g(G-1)", ents[1], g_function(gain - 1), 1e-8))
            oracle = amplifier_output_for_coherent(0.8, gain, trunc)
            dil = apply_amplifier(coherent_state(0.8, trunc).density(), gain).output
            checks.append(_abs("amplifier", f"G={gain:g} dilation=closed form at alpha=0.8",
                               np.abs(oracle.matrix - dil.matrix).max(), 0, 1e-7))
            return checks
        out += _guard("amplifier", f"G={gain:g}", one)
    for gain, n in ((1.0, 1.0), (2.0, 1.0), (1.7, 2.3)):
        out.append(_abs("amplifier", f"chi({gain:g},{n:g}) two forms agree",
                        holevo_chi_amplifier(gain, n), holevo_chi_general(n * gain, gain - 1), 1e-12))
    return out


def suite_gaussian(dim: int = 60, **_) -> list[Check]:
    out = []
    trunc = Truncation(dim, leakage_tol=1e-8)
    for gain in (1.3, 1.5):
        for r in (0.2, 0.5):
            def one(gain=gain, r=r):
                sq = squeezed_state(r, trunc)
                s = von_neumann_entropy(apply_amplifier(sq.density(), gain).output).entropy_nats
                gp = gaussian_effective_gain(gain, r)
                disp = squeezed_state(r, trunc, alpha=1.0)
                s_disp = von_neumann_entropy(apply_amplifier(disp.density(), gain).output).entropy_nats
                m = moments(disp)
                gp_m = gaussian_effective_gain_from_moments(gain, m.mean_n, abs(m.mean_a) ** 2)
                return [
                    _abs("gaussian", f"G={gain:g} r={r:g} S=g(G'-1)", s, g_function(gp - 1), 1e-5),
                    _abs("gaussian", f"G={gain:g} r={r:g} displaced S unchanged", s_disp, s, 1e-7),
                    _abs("gaussian", f"G={gain:g} r={r:g} G' from moments", gp_m, gp, 1e-8),
                ]
            out += _guard("gaussian", f"G={gain:g} r={r:g}", one)
    return out


def _test_inputs(trunc: Truncation, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    return {
        "coherent(0.5)": coherent_state(0.5, trunc),
        "fock1": fock_state(1, trunc),
        "squeezed(0.3)": squeezed_state(0.3, trunc),
        "random": random_pure_state(trunc, rng, support=4),
    }


def suite_perturbative(dim: int = 40, epsilon: float = 1e-4, seed: int = 0, **_) -> list[Check]:
    trunc = Truncation(dim, leakage_tol=1e-8)
    out = []
    for name, psi in _test_inputs(trunc, seed).items():
        def one(name=name, psi=psi):
            m = moments(psi)
            ep = epsilon_prime(epsilon, m)
            s = von_neumann_entropy(apply_amplifier(psi.density(), 1 + epsilon).output).entropy_nats
            term = first_order_density_matrix(psi, min(epsilon, 1e-3))
            checks = [
                _rel("perturbative", f"{name} S=h(eps')", s, first_order_entropy(ep), 1e-2),
                _abs("perturbative", f"{name} Tr(rho1)=1", term.trace, 1.0, 1e-3),
            ]
            if term.predicted_overlap != 0:
                checks.append(_rel("perturbative", f"{name} Tr(rho0 rho1)", term.overlap, term.predicted_overlap, 2e-2))
            else:
                checks.append(_abs("perturbative", f"{name} Tr(rho0 rho1)", term.overlap, 0.0, 2e-2,
                                   "absolute; scale of Tr(rho1)=1"))
            return checks
        out += _guard("perturbative", name, one)
    return out


def suite_cascade(dim: int = 40, epsilon: float = 1e-3, seed: int = 0, **_) -> list[Check]:
    trunc = Truncation(dim, leakage_tol=1e-8)
    out = []
    for gain in (1.0, 1.5, 2.0):
        for name, psi in _test_inputs(trunc, seed).items():
            def one(gain=gain, name=name, psi=psi):
                o = apply_channel(psi, Cascade((Amplifier(gain), Loss(epsilon)))).output
                lam = np.sort(np.linalg.eigvalsh(o.matrix))[::-1][1]
                pred = cascade_lambda1(epsilon, gain, moments(psi))
                if pred == 0:
                    return [_abs("cascade", f"G={gain:g} {name} pure output entropy",
                                 von_neumann_entropy(o).entropy_nats, 0.0, 1e-9)]
                return [_rel("cascade", f"G={gain:g} {name} lambda1", lam, pred, 2e-2)]
            out += _guard("cascade", f"G={gain:g} {name}", one)
    return out


def suite_classical(dim: int = 40, **_) -> list[Check]:
    trunc = Truncation(dim, leakage_tol=1e-8)

    def run():
        spec = Amplifier(1.3)
        lhs, rhs = classical_ensemble_entropy_bound(
            [(0.5, coherent_state(1, trunc)), (0.5, coherent_state(-1, trunc))], spec)
        return [Check("classical", "concavity lhs >= rhs", lhs, rhs, 1e-9, lhs >= rhs - 1e-9),
                _abs("classical", "rhs = g(G-1)", rhs, g_function(0.3), 1e-8)]
    return _guard("classical", "concavity", run)


SUITES = {
    "thermal": suite_thermal,
    "ensemble": suite_ensemble,
    "amplifier": suite_amplifier,
    "gaussian": suite_gaussian,
    "perturbative": suite_perturbative,
    "cascade": suite_cascade,
    "classical": suite_classical,
}
