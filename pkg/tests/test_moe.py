import numpy as np
import pytest

from bclab import (
    Amplifier,
    Cascade,
    DomainError,
    Loss,
    PureState,
    Truncation,
    coherent_state,
    fock_state,
    g_function,
)
from bclab.moe import (
    SearchConfig,
    _coords,
    _from_coords,
    _gauge,
    coherent_fit,
    conjectured_bound,
    entropy_gradient,
    initial_states,
    minimize,
    objective,
)
from bclab.perturbative import first_order_entropy

T20 = Truncation(20, leakage_tol=1e-8)


def test_objective_examples():
    assert abs(objective(coherent_state(0.5, T20), Amplifier(1.3)) - g_function(0.3)) < 1e-7
    assert objective(fock_state(1, T20), Amplifier(1.3)) > g_function(0.3)
    assert objective(coherent_state(0.9j, T20), Loss(0.4)) < 1e-10


def test_config_validation():
    for kw in ({"starts": 0}, {"grad_step": 1e-2}, {"grad_step": 1e-9}, {"conv_tol": 0}, {"seed": -1}):
        with pytest.raises(DomainError):
            SearchConfig(**kw)


def test_gauge_chart_round_trip(rng):
    amps = rng.normal(size=9) + 1j * rng.normal(size=9)
    g, p = _gauge(amps)
    assert g[p].imag == 0 and g[p].real > 0
    x = _coords(g, p)
    assert x.size == 2 * 9 - 2
    assert np.abs(_from_coords(x, p, 9) - g).max() < 1e-14
    assert _from_coords(np.full(16, 0.5), p, 9) is None


def test_gradient_length_and_coherent_stationarity():
    grad = entropy_gradient(coherent_state(0.3, T20), Amplifier(1.2), step=1e-5)
    assert grad.size == 2 * 20 - 2
    assert np.linalg.norm(grad) < 1e-4


def test_fock1_is_stationary_but_not_minimal():
    # Phase covariance makes every first-order variation of |1> cancel, so the
    # gradient vanishes; tilting towards the vacuum still lowers the entropy.
    spec = Amplifier(1.2)
    psi = fock_state(1, T20)
    assert np.linalg.norm(entropy_gradient(psi, spec)) < 10 * 1e-5
    amps = np.zeros(20, dtype=complex)
    amps[1], amps[0] = np.cos(0.2), np.sin(0.2)
    assert objective(PureState(amps, T20), spec) < objective(psi, spec) - 1e-3
    assert objective(psi, spec) > g_function(0.2) + 0.1


def test_gradient_step_validation():
    with pytest.raises(DomainError):
        entropy_gradient(fock_state(0, T20), Amplifier(1.2), step=1e-2)


def test_initial_states_layout():
    cfg = SearchConfig(dim=12, starts=3, seed=1)
    labels = [lab for lab, _ in initial_states(cfg)]
    assert labels[:6] == ["vacuum", "fock1", "coherent(+0.5)", "coherent(-0.5)", "coherent(+1)", "coherent(-1)"]
    assert labels[6:] == ["haar[0]", "haar[1]", "haar[2]"]
    haar = initial_states(cfg)[6][1].amplitudes
    assert np.abs(haar[2:]).max() == 0


def test_coherent_fit():
    alpha, fid = coherent_fit(coherent_state(0.4 - 0.3j, T20))
    assert abs(alpha - (0.4 - 0.3j)) < 1e-12 and abs(fid - 1) < 1e-12


def test_minimize_small_amplifier():
    res = minimize(Amplifier(1.2), SearchConfig(dim=12, starts=2, seed=7))
    assert abs(res.min_entropy_nats - g_function(0.2)) < 1e-4
    assert res.coherent_fidelity > 0.999
    assert not res.violations
    assert res.min_evaluated_nats >= res.bound_nats - 1e-6
    assert res.n_converged >= 1 and 0 <= res.start_index < len(res.starts)


def test_minimize_loss_is_pure():
    res = minimize(Loss(0.7), SearchConfig(dim=16, starts=2, seed=7))
    assert res.min_entropy_nats < 1e-6
    assert res.coherent_fidelity > 0.999


def test_minimize_cascade_is_coherent_like():
    spec = Cascade((Amplifier(1.5), Loss(0.01)))
    res = minimize(spec, SearchConfig(dim=20, starts=2, seed=7))
    assert res.variance < 1e-4
    assert abs(res.min_entropy_nats - conjectured_bound(spec)) < 1e-4


def test_minimize_perturbative_anchor():
    res = minimize(Amplifier(1.001), SearchConfig(dim=12, starts=2, seed=7))
    ref = first_order_entropy(1e-3)
    assert abs(res.min_entropy_nats - ref) < 0.05 * ref


def test_minimize_deterministic():
    cfg = SearchConfig(dim=16, starts=3, seed=11, physical_starts=False)
    a, b = minimize(Amplifier(1.3), cfg), minimize(Amplifier(1.3), cfg)
    assert a.min_entropy_nats == b.min_entropy_nats
    assert np.array_equal(a.argmin.amplitudes, b.argmin.amplitudes)
    assert a.starts == b.starts and a.evaluations == b.evaluations


def test_parallel_matches_serial():
    cfg = SearchConfig(dim=16, starts=3, seed=11, physical_starts=False)
    par = SearchConfig(dim=16, starts=3, seed=11, physical_starts=False, workers=3)
    a, b = minimize(Amplifier(1.3), cfg), minimize(Amplifier(1.3), par)
    assert a.starts == b.starts and a.min_entropy_nats == b.min_entropy_nats


def test_best_of_starts_nonincreasing():
    best = [minimize(Amplifier(1.3), SearchConfig(dim=16, starts=k, seed=11, physical_starts=False,
                                                  max_iters=15)).min_entropy_nats
            for k in (1, 2, 3)]
    assert best[0] >= best[1] >= best[2]


def test_every_start_out_of_range_raises():
    from bclab import TruncationError
    with pytest.raises(TruncationError):
        minimize(Amplifier(3.0), SearchConfig(dim=6, starts=1, seed=1, max_iters=2))
