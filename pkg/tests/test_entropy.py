import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bclab import (
    Amplifier,
    DensityMatrix,
    DomainError,
    QuadratureError,
    SpectrumError,
    Truncation,
    apply_amplifier,
    coherent_state,
    g_function,
    holevo_chi_amplifier,
    holevo_chi_general,
    moments,
    squeezed_state,
    thermal_state,
    von_neumann_entropy,
)
from bclab.entropy import (
    QuadratureGrid,
    classical_ensemble_entropy_bound,
    gaussian_effective_gain,
    gaussian_effective_gain_from_moments,
    spectrum_entropy,
    thermal_from_coherent_ensemble,
)

mpmath.mp.dps = 40


def g_mp(x):
    x = mpmath.mpf(x)
    return (x + 1) * mpmath.log(x + 1) - (x * mpmath.log(x) if x > 0 else 0)


def test_entropy_of_pure_state():
    rho = coherent_state(0.7 - 0.2j, Truncation(40)).density()
    assert von_neumann_entropy(rho).entropy_nats < 1e-10


def test_entropy_of_thermal():
    rho = thermal_state(1.0, Truncation(60))
    assert abs(von_neumann_entropy(rho).entropy_nats - 2 * np.log(2)) < 1e-8


def test_entropy_two_level_uniform():
    rho = DensityMatrix(np.diag([0.5, 0.5, 0, 0]).astype(complex), Truncation(4))
    rep = von_neumann_entropy(rho)
    assert abs(rep.entropy_nats - np.log(2)) < 1e-12
    assert abs(rep.entropy_bits - 1) < 1e-12
    assert np.all(np.diff(rep.spectrum) <= 0)


def test_spectrum_clipping_and_failure():
    s, spec, clipped = spectrum_entropy(np.array([1.0 + 5e-11, -5e-11, 0.0]))
    assert spec.min() == 0 and abs(clipped - 5e-11) < 1e-20 and s >= 0
    with pytest.raises(SpectrumError):
        spectrum_entropy(np.array([1.0 + 1e-6, -1e-6]))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(1e-6, 1.0), min_size=1, max_size=10))
def test_entropy_of_diagonal_is_shannon(p):
    p = np.array(p) / np.sum(p)
    d = p.size + 2
    rho = DensityMatrix(np.diag(np.concatenate([p, [0, 0]])).astype(complex), Truncation(d))
    assert abs(von_neumann_entropy(rho).entropy_nats + np.sum(p * np.log(p))) < 1e-12


def test_g_values_against_high_precision():
    assert g_function(0) == 0
    assert abs(g_function(1) - float(2 * mpmath.log(2))) < 1e-15
    assert abs(g_function(0.5) - float(g_mp(0.5))) < 1e-15
    assert abs(g_function(0.5) - 0.9547712) < 1e-7
    for x in (5e-324, 1e-300, 1e-12, 1e-6, 0.2, 0.999, 1.0, 3.0, 250.0, 1e6):
        assert abs(g_function(x) - float(g_mp(x))) < 1e-14 * max(1.0, float(g_mp(x)))
    with pytest.raises(DomainError):
        g_function(-1e-3)


def test_g_increasing_and_concave():
    x = np.linspace(0.01, 10, 1000)
    g = np.array([g_function(v) for v in x])
    assert np.all(np.diff(g) > 0)
    assert np.all(np.diff(g, 2) < 0)


def test_chi_special_cases():
    for n in (0.3, 1.0, 4.0):
        assert holevo_chi_amplifier(1.0, n) == g_function(n)
    for gain in (1.0, 1.7, 3.0):
        assert holevo_chi_amplifier(gain, 0.0) == 0.0
    ref = float(g_mp(3) - g_mp(1))
    assert abs(holevo_chi_amplifier(2.0, 1.0) - ref) < 1e-12
    assert abs(ref - float(4 * mpmath.log(4) - 3 * mpmath.log(3) - 2 * mpmath.log(2))) < 1e-30
    assert abs(holevo_chi_amplifier(2.0, 1.0) - 0.8630462173553) < 1e-12


def test_chi_general_forms():
    assert holevo_chi_general(2.5, 0) == g_function(2.5)
    assert holevo_chi_general(0, 1.3) == 0
    assert abs(holevo_chi_amplifier(1.7, 2.3) - holevo_chi_general(1.7 * 2.3, 0.7)) < 1e-12
    with pytest.raises(DomainError):
        holevo_chi_general(-1, 1)
    with pytest.raises(DomainError):
        holevo_chi_amplifier(0.5, 1)


@settings(max_examples=50, deadline=None)
@given(st.floats(1, 10), st.floats(0, 20))
def test_chi_between_zero_and_output_entropy(gain, n):
    chi = holevo_chi_amplifier(gain, n)
    assert -1e-12 <= chi <= g_function(n * gain + gain - 1) + 1e-12


def test_ensemble_matches_thermal():
    t = Truncation(30, leakage_tol=1e-8)
    rho = thermal_from_coherent_ensemble(1.0, t, QuadratureGrid(64, 64))
    assert np.abs(rho.matrix - thermal_state(1.0, t).matrix).max() < 1e-6
    off = rho.matrix - np.diag(np.diag(rho.matrix))
    assert np.abs(off).max() < 1e-8


def test_ensemble_small_n_is_vacuum():
    t = Truncation(30)
    rho = thermal_from_coherent_ensemble(1e-6, t)
    ref = np.zeros((30, 30))
    ref[0, 0] = 1
    assert np.abs(rho.matrix - ref).max() < 1e-5


def test_ensemble_inadequate_grid():
    t = Truncation(30, leakage_tol=1e-8)
    with pytest.raises(QuadratureError):
        thermal_from_coherent_ensemble(1.0, t, QuadratureGrid(64, 16))
    with pytest.raises(QuadratureError):
        thermal_from_coherent_ensemble(1.0, t, QuadratureGrid(64, 64, u_max=5.0))
    with pytest.raises(QuadratureError):
        thermal_from_coherent_ensemble(10.0, t)


def test_concavity_bound():
    t = Truncation(40)
    spec = Amplifier(1.3)
    lhs, rhs = classical_ensemble_entropy_bound([(1.0, coherent_state(0.4, t))], spec)
    assert abs(lhs - rhs) < 1e-12 and abs(rhs - g_function(0.3)) < 1e-8
    lhs, rhs = classical_ensemble_entropy_bound(
        [(0.5, coherent_state(1, t)), (0.5, coherent_state(-1, t))], spec)
    assert lhs > rhs + 1e-3
    assert abs(rhs - g_function(0.3)) < 1e-8
    deg = classical_ensemble_entropy_bound([(1.0, coherent_state(1, t)), (0.0, coherent_state(-1, t))], spec)
    assert abs(deg[0] - deg[1]) < 1e-12
    with pytest.raises(DomainError):
        classical_ensemble_entropy_bound([(0.4, coherent_state(1, t))], spec)


@settings(max_examples=10, deadline=None)
@given(st.lists(st.tuples(st.floats(0.05, 1), st.floats(0, 1), st.floats(0, 2 * np.pi)), min_size=1, max_size=4),
       st.floats(1.05, 1.8))
def test_classical_mixture_output_above_vacuum_bound(items, gain):
    t = Truncation(40, leakage_tol=1e-6)
    w = np.array([i[0] for i in items])
    w = w / w.sum()
    samples = [(float(wi), coherent_state(rad * np.exp(1j * ang), t)) for wi, (_, rad, ang) in zip(w, items)]
    lhs, _ = classical_ensemble_entropy_bound(samples, Amplifier(gain))
    assert lhs >= g_function(gain - 1) - 1e-9


def test_effective_gain_limits():
    assert gaussian_effective_gain(1.7, 0.0) == 1.7
    assert gaussian_effective_gain(1.0, 0.9) == 1.0
    assert gaussian_effective_gain(1.5, 0.5) > 1.5
    with pytest.raises(DomainError):
        gaussian_effective_gain(0.9, 0.1)


def test_effective_gain_forms_agree():
    assert gaussian_effective_gain_from_moments(1.3, 2.0, 2.0) == 1.3
    s2 = np.sinh(0.3) ** 2
    assert abs(gaussian_effective_gain_from_moments(1.4, s2 + 0.25, 0.25) - gaussian_effective_gain(1.4, 0.3)) < 1e-12
    with pytest.raises(DomainError):
        gaussian_effective_gain_from_moments(1.4, 0.1, 0.5)


def test_squeezed_amplifier_entropy():
    t = Truncation(60, leakage_tol=1e-8)
    s = von_neumann_entropy(apply_amplifier(squeezed_state(0.5, t).density(), 1.5).output).entropy_nats
    assert abs(s - g_function(gaussian_effective_gain(1.5, 0.5) - 1)) < 1e-5


def test_displaced_squeezed_amplifier_entropy():
    t = Truncation(60, leakage_tol=1e-8)
    psi = squeezed_state(0.4, t, alpha=1.0)
    m = moments(psi)
    gp = gaussian_effective_gain_from_moments(1.3, m.mean_n, abs(m.mean_a) ** 2)
    s = von_neumann_entropy(apply_amplifier(psi.density(), 1.3).output).entropy_nats
    assert abs(s - g_function(gp - 1)) < 1e-5
