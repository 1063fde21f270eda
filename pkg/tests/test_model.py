import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhlattice import model as m
from nhlattice import numkernel as nk
from nhlattice.errors import (
    DimensionError,
    EpsilonRange,
    InvalidParameter,
    NotPSD,
    UnstableBoson,
)


def commutator_norm(a, b):
    return nk.max_abs(a @ b - b @ a)


def single_mode(kappa, gamma, statistics):
    return m.OpenLatticeModel([[0.0]], [[kappa]], [[2 * gamma]], statistics)


# ---------------------------------------------------------------------------
# drift matrices


def test_closed_system_effective_hamiltonian(rng):
    h = rng.normal(size=(4, 4))
    h = h + h.T
    model = m.OpenLatticeModel(h, np.zeros((4, 4)), np.zeros((4, 4)))
    np.testing.assert_array_equal(model.h_eff, h)
    np.testing.assert_array_equal(m.conditional_hamiltonian(model), h)


def test_single_mode_drifts():
    kappa, gamma = 0.7, 0.1
    fermion = single_mode(kappa, gamma, "fermion")
    boson = single_mode(kappa, gamma, "boson")
    assert fermion.h_eff[0, 0] == pytest.approx(-0.5j * (kappa + 2 * gamma))
    assert boson.h_eff[0, 0] == pytest.approx(-0.5j * (kappa - 2 * gamma))
    assert m.conditional_hamiltonian(fermion)[0, 0] == pytest.approx(-0.5j * (kappa - 2 * gamma))


@pytest.mark.parametrize("stats,sign", [("fermion", 1), ("boson", -1)])
def test_conditional_minus_effective(rng, stats, sign):
    model = m.random_model(rng, 5, stats)
    diff = m.conditional_hamiltonian(model) - model.h_eff
    np.testing.assert_allclose(diff, sign * 1j * model.gain, atol=1e-14)


def test_conditional_equals_effective_without_gain(rng):
    model = m.random_model(rng, 5)
    model = m.OpenLatticeModel(model.coherent_h, model.loss, np.zeros((5, 5)))
    np.testing.assert_array_equal(m.conditional_hamiltonian(model), model.h_eff)


def test_model_validation():
    with pytest.raises(InvalidParameter):
        m.OpenLatticeModel([[0, 1], [0, 0]], np.eye(2), np.eye(2))
    with pytest.raises(NotPSD):
        m.OpenLatticeModel(np.zeros((2, 2)), -np.eye(2), np.eye(2))
    with pytest.raises(DimensionError):
        m.OpenLatticeModel(np.zeros((2, 2)), np.eye(3), np.eye(2))
    with pytest.raises(DimensionError):
        m.OpenLatticeModel([[0.0]], [[1.0]], [[0.0]], boundary="periodic")


def test_model_arrays_are_read_only():
    model = m.build_hatano_nelson(4, 1.0, 0.5, 0.01)
    with pytest.raises(ValueError):
        model.loss[0, 0] = 3.0


# ---------------------------------------------------------------------------
# stabilisation and dissipator construction


def test_stabilize_hermitian(rng):
    h = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    h = h + h.conj().T
    np.testing.assert_allclose(m.stabilize(h, 0.3), h - 0.3j * np.eye(5), atol=1e-14)


def test_stabilize_hatano_nelson_target():
    n, w, kappa, nu = 12, 1.0, 0.4, 1e-6
    target = m.hatano_nelson_target(n, w, kappa, "periodic")
    out = m.stabilize(target, nu)
    lam = 1j * (out - target)[0, 0] - nu
    assert lam.real == pytest.approx(kappa, abs=1e-12)


def test_stabilize_random(rng):
    h = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    nu = 0.05
    out = m.stabilize(h, nu)
    oracle = np.linalg.eigvalsh((-0.5j) * (h - h.conj().T)).max()
    lam = (1j * (out - h)[0, 0]).real - nu
    assert lam == pytest.approx(max(0.0, oracle), abs=1e-12)
    assert np.linalg.eigvals(out).imag.max() <= -nu + 1e-10


def _stable_target(rng, n):
    h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return m.stabilize(h, 0.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.floats(0.0, 1.0), st.integers(0, 2 ** 31 - 1))
def test_method1_round_trip_fermion(n, eps, seed):
    h_eff = _stable_target(np.random.default_rng(seed), n)
    loss, gain = m.method1_dissipators(h_eff, eps, "fermion")
    model = m.OpenLatticeModel(nk.hermitian_part(h_eff), loss, gain, "fermion")
    assert nk.max_abs(model.h_eff - h_eff) <= 1e-12 * max(1.0, nk.max_abs(h_eff))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.floats(1.0, 4.0), st.integers(0, 2 ** 31 - 1))
def test_method1_round_trip_boson(n, eps, seed):
    h_eff = _stable_target(np.random.default_rng(seed), n)
    loss, gain = m.method1_dissipators(h_eff, eps, "boson")
    model = m.OpenLatticeModel(nk.hermitian_part(h_eff), loss, gain, "boson")
    assert nk.max_abs(model.h_eff - h_eff) <= 1e-12 * max(1.0, nk.max_abs(h_eff))


def test_method1_special_points(rng):
    h_eff = _stable_target(rng, 4)
    loss, gain = m.method1_dissipators(h_eff, 0.0, "fermion")
    assert nk.max_abs(gain) == 0.0
    loss, gain = m.method1_dissipators(h_eff, 0.5, "fermion")
    np.testing.assert_allclose(loss, gain)
    loss, gain = m.method1_dissipators(h_eff, 1.0, "boson")
    assert nk.max_abs(gain) == 0.0
    np.testing.assert_allclose(loss, 1j * (h_eff - h_eff.conj().T), atol=1e-14)
    assert np.linalg.eigvalsh(loss).min() >= -1e-12


@pytest.mark.parametrize("stats,eps", [("fermion", -0.01), ("fermion", 1.01), ("boson", 0.99)])
def test_method1_epsilon_range(rng, stats, eps):
    with pytest.raises(EpsilonRange):
        m.method1_dissipators(_stable_target(rng, 3), eps, stats)


@pytest.mark.parametrize("stats", ["fermion", "boson"])
def test_method2_round_trip(rng, stats):
    h_eff = _stable_target(rng, 6)
    loss, gain = m.method2_dissipators(h_eff, 0.1, stats)
    np.testing.assert_allclose(gain, 0.2 * np.eye(6))
    model = m.OpenLatticeModel(nk.hermitian_part(h_eff), loss, gain, stats)
    assert nk.max_abs(model.h_eff - h_eff) <= 1e-12 * nk.max_abs(h_eff)


def test_method2_hatano_nelson_reproduces_builder():
    n, w, kappa, gamma = 8, 1.0, 0.6, 0.05
    model = m.build_hatano_nelson(n, w, kappa, gamma, "open")
    loss, gain = m.method2_dissipators(model.h_eff, gamma, "fermion")
    np.testing.assert_allclose(loss, model.loss, atol=1e-14)
    np.testing.assert_allclose(gain, model.gain, atol=1e-14)


def test_method2_zero_gamma_is_pure_loss(rng):
    loss, gain = m.method2_dissipators(_stable_target(rng, 3), 0.0, "fermion")
    assert nk.max_abs(gain) == 0.0


def test_method2_unstable_boson():
    # periodic chain with kappa(k) < 2 gamma near k = -pi/2
    kappa, gamma = 0.5, 0.2
    h_eff = m.hatano_nelson_target(8, 1.0, kappa, "periodic") - 1j * (kappa - gamma) * np.eye(8)
    with pytest.raises(UnstableBoson):
        m.method2_dissipators(h_eff, gamma, "boson")


def test_method2_fermion_requires_psd_loss(rng):
    h_eff = _stable_target(rng, 3)
    with pytest.raises(NotPSD):
        m.method2_dissipators(h_eff, 100.0, "fermion")


# ---------------------------------------------------------------------------
# builders


@pytest.mark.parametrize("bc", ["open", "periodic"])
@pytest.mark.parametrize("stats", ["fermion", "boson"])
def test_hatano_nelson_effective_hamiltonian(bc, stats):
    n, w, kappa, gamma = 9, 1.0, 0.7, 0.05
    model = m.build_hatano_nelson(n, w, kappa, gamma, bc, stats)
    sign = 1 if stats == "fermion" else -1
    expected = m.hatano_nelson_target(n, w, kappa, bc) - 1j * (kappa + sign * gamma) * np.eye(n)
    np.testing.assert_allclose(model.h_eff, expected, atol=1e-14)


def test_hatano_nelson_three_site_loss_by_hand():
    k = 0.3
    a = np.array([[1, -1j, 0], [0, 1, -1j]], dtype=complex)
    loss = k * sum(np.outer(row.conj(), row) for row in a)
    loss += k * np.diag([1.0, 0.0, 1.0])
    model = m.build_hatano_nelson(3, 1.0, k, 0.1, "open")
    np.testing.assert_allclose(model.loss, loss, atol=1e-15)


def test_hatano_nelson_periodic_momentum_loss():
    n, kappa = 16, 0.8
    model = m.build_hatano_nelson(n, 1.0, kappa, 0.0, "periodic")
    k = 2 * np.pi * np.arange(1, n + 1) / n
    u = np.exp(1j * np.outer(np.arange(1, n + 1), k)) / np.sqrt(n)
    lk = u.conj().T @ model.loss @ u
    assert nk.max_abs(lk - np.diag(np.diag(lk))) < 1e-12
    np.testing.assert_allclose(np.diag(lk).real, 2 * kappa * (1 + np.sin(k)), atol=1e-12)


def test_hatano_nelson_commutators():
    pbc = m.build_hatano_nelson(10, 1.0, 0.5, 0.1, "periodic")
    obc = m.build_hatano_nelson(10, 1.0, 0.5, 0.1, "open")
    for a, b in ((pbc.coherent_h, pbc.loss), (pbc.coherent_h, pbc.gain), (pbc.loss, pbc.gain)):
        assert commutator_norm(a, b) <= 1e-10
    assert commutator_norm(obc.coherent_h, obc.loss) > 1e-3


def test_hatano_nelson_reciprocal_limit():
    model = m.build_hatano_nelson(6, 1.0, 0.0, 0.1, "open")
    assert nk.max_abs(model.loss) == 0.0
    with pytest.raises(UnstableBoson):
        m.require_stable(model.with_statistics("boson"))


def test_hatano_nelson_size_checks():
    with pytest.raises(DimensionError):
        m.build_hatano_nelson(1, 1.0, 0.5, 0.1, "periodic")
    with pytest.raises(InvalidParameter):
        m.build_hatano_nelson(4, 1.0, -0.5, 0.1)
    assert m.build_hatano_nelson(4, 1.0, 1.5, 0.1).notes


def test_ssh_reduces_to_hatano_nelson():
    n_cells, w, kappa, gamma = 5, 1.0, 0.4, 0.03
    ssh = m.build_nh_ssh(n_cells, w, kappa, w, kappa, gamma, "open")
    hn = m.build_hatano_nelson(2 * n_cells, w, kappa, gamma, "open")
    np.testing.assert_allclose(ssh.h_eff, hn.h_eff, atol=1e-14)
    ssh = m.build_nh_ssh(n_cells, w, kappa, w, kappa, gamma, "periodic")
    hn = m.build_hatano_nelson(2 * n_cells, w, kappa, gamma, "periodic")
    np.testing.assert_allclose(ssh.h_eff, hn.h_eff, atol=1e-14)


def test_ssh_hermitian_limit():
    model = m.build_nh_ssh(4, 1.0, 0.0, 0.6, 0.0, 0.0, "open")
    assert nk.is_hermitian(model.h_eff)


def test_ssh_bloch_matrix_at_zero_momentum():
    n_cells, w, kappa, u, g, gp = 6, 1.0, 0.3, 0.8, 0.2, 0.05
    h = m.build_nh_ssh(n_cells, w, kappa, u, g, gp, "periodic").h_eff
    # Fourier transform of the real-space drift at k = 0: sum over cells
    bloch = np.zeros((2, 2), dtype=complex)
    for cell in range(n_cells):
        bloch += h[0:2, 2 * cell:2 * cell + 2]
    shift = -1j * (gp + 0.5 * (kappa + g))
    expected = np.array([
        [shift, 0.5 * (w - kappa) + 0.5 * (u + g)],
        [0.5 * (w + kappa) + 0.5 * (u - g), shift],
    ])
    np.testing.assert_allclose(bloch, expected, atol=1e-14)


def test_nnn_reduces_to_hatano_nelson():
    a = m.build_hn_nnn(7, 1.0, 0.5, 0.0, 0.3, 0.02, "open")
    b = m.build_hatano_nelson(7, 1.0, 0.5, 0.02, "open")
    np.testing.assert_allclose(a.h_eff, b.h_eff, atol=1e-15)
    with pytest.raises(DimensionError):
        m.build_hn_nnn(2, 1.0, 0.5, 1.0, 0.3, 0.02)


def test_nnn_periodic_dispersion():
    n, w, kappa, t, phi, gamma = 24, 1.0, 0.6, 0.7, 0.4, 0.02
    h = m.build_hn_nnn(n, w, kappa, t, phi, gamma, "periodic").h_eff
    k = 2 * np.pi * np.arange(1, n + 1) / n
    u = np.exp(1j * np.outer(np.arange(1, n + 1), k)) / np.sqrt(n)
    hk = np.diag(u.conj().T @ h @ u)
    expected = w * np.cos(k) + t * np.cos(2 * k - phi) - 1j * kappa * (1 + np.sin(k)) - 1j * gamma
    np.testing.assert_allclose(hk, expected, atol=1e-12)


def test_nnn_least_damped_mode_moves_left():
    w, t = 1.0, 1.0
    k = -np.pi / 2
    # E(k) = w cos k + T cos(2k - pi/2); group velocity dE/dk
    velocity = -w * np.sin(k) - 2 * t * np.sin(2 * k - np.pi / 2)
    assert velocity == pytest.approx(-w)


def test_structured_noise_two_sites_by_hand():
    w, k, g = 1.0, 0.5, 0.5
    model = m.build_structured_noise_chain(2, w, k, g)
    bond = np.array([1, -1j])
    loss = k * np.outer(bond.conj(), bond) + k * np.eye(2)
    gain = g * np.outer(bond, bond.conj()) + g * np.eye(2)
    np.testing.assert_allclose(model.loss, loss, atol=1e-15)
    np.testing.assert_allclose(model.gain, gain, atol=1e-15)


def test_structured_noise_properties():
    n, w, g = 12, 1.0, 0.5
    model = m.build_structured_noise_chain(n, w, g, g)
    np.testing.assert_allclose(model.h_eff, model.coherent_h - 2j * g * np.eye(n), atol=1e-14)
    assert commutator_norm(model.coherent_h, model.gain) > 1e-3
    k = np.pi * np.arange(1, n + 1) / (n + 1)
    vecs = np.sqrt(2 / (n + 1)) * np.sin(np.outer(np.arange(1, n + 1), k)) * (1j ** np.arange(1, n + 1))[:, None]
    gk = vecs.conj().T @ model.gain @ vecs
    np.testing.assert_allclose(gk, np.diag(2 * g * (1 - np.cos(k))), atol=1e-12)
    assert m.build_structured_noise_chain(n, w, 0.4, g).notes


@pytest.mark.parametrize(
    "model",
    [
        m.build_hatano_nelson(8, 1.0, 0.9, 0.05, "open"),
        m.build_hatano_nelson(8, 1.0, 0.9, 0.05, "periodic", "boson"),
        m.build_nh_ssh(4, 1.0, 0.2, 0.7, 0.5, 0.01, "open"),
        m.build_hn_nnn(8, 1.0, 0.99, 1.0, np.pi / 2, 0.01, "open"),
        m.build_structured_noise_chain(8, 1.0, 0.5, 0.5),
    ],
    ids=["hn-open", "hn-periodic-boson", "ssh", "nnn", "structured"],
)
def test_builder_outputs_valid(model):
    assert nk.is_hermitian(model.coherent_h)
    assert np.linalg.eigvalsh(model.loss).min() >= -1e-10
    assert np.linalg.eigvalsh(model.gain).min() >= -1e-10
    if model.statistics is m.Statistics.FERMION:
        assert np.linalg.eigvalsh(nk.antihermitian_part(model.h_eff)).max() <= 1e-12


# ---------------------------------------------------------------------------
# jumps, stability, serialisation


def test_extract_jumps_uniform_gain():
    model = m.build_hatano_nelson(6, 1.0, 0.5, 0.1, "open")
    jumps = m.extract_jumps(model)
    np.testing.assert_allclose(jumps.gain_rates, 0.2)
    assert jumps.gain_rates.size == 6
    assert nk.max_abs(jumps.gain_matrix() - model.gain) < 1e-10
    assert nk.max_abs(jumps.loss_matrix() - model.loss) < 1e-10


def test_extract_jumps_open_chain_loss_rank():
    n = 10
    model = m.build_hatano_nelson(n, 1.0, 0.5, 0.1, "open")
    jumps = m.extract_jumps(model)
    rank = np.linalg.matrix_rank(model.loss, tol=1e-10)
    # N-1 bond channels plus two edge baths, but they span at most N modes
    assert jumps.loss_rates.size == rank == n


def test_extract_jumps_empty():
    model = m.OpenLatticeModel(np.zeros((3, 3)), np.zeros((3, 3)), np.zeros((3, 3)))
    jumps = m.extract_jumps(model)
    assert jumps.loss_rates.size == 0 and jumps.gain_rates.size == 0
    assert nk.max_abs(jumps.loss_matrix()) == 0.0


def test_max_growth_rate_bounds_spectrum(rng):
    for shift in (0.0, 0.5, 5.0):
        for _ in range(10):
            h = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)) - 1j * shift * np.eye(6)
            exact = np.linalg.eigvals(h).imag.max()
            got = m.max_growth_rate(h)
            # exact whenever the numerical range reaches the real axis, an
            # upper bound otherwise; either way the sign is right
            assert got >= exact - 1e-10
            assert (got < 0) == (exact < 0)
            if np.linalg.eigvalsh(nk.antihermitian_part(h)).max() >= 0:
                assert got == pytest.approx(exact, abs=1e-10)


def test_random_model_stable(rng):
    for stats in ("fermion", "boson"):
        for n in (1, 5, 20):
            assert m.is_stable(m.random_model(rng, n, stats))


@pytest.mark.parametrize("bc", ["open", "periodic"])
def test_json_round_trip(bc):
    model = m.build_hn_nnn(6, 1.0, 0.3, 0.5, 0.7, 0.01, bc, "boson")
    text = m.model_to_json(model)
    again = m.model_from_json(text)
    for name in ("coherent_h", "loss", "gain"):
        np.testing.assert_array_equal(getattr(again, name), getattr(model, name))
    assert again.statistics is model.statistics and again.boundary is model.boundary
    assert m.model_to_json(again) == text


def test_enum_parsing():
    assert m.Statistics.parse("Boson") is m.Statistics.BOSON
    assert m.Boundary.parse("pbc") is m.Boundary.PERIODIC
    assert m.Boundary.parse("obc") is m.Boundary.OPEN
    with pytest.raises(InvalidParameter):
        m.Statistics.parse("anyon")
