import warnings

import mpmath
import numpy as np
import pytest
from scipy.special import erf, erfi

from nhlattice import greens as g
from nhlattice import numkernel as nk
from nhlattice import steadystate as ss
from nhlattice.errors import BranchAmbiguity, DimensionError, InvalidParameter, RegimeWarning
from nhlattice.model import build_hatano_nelson, build_nh_ssh


def resolvent(model, omega):
    n = model.n_sites
    return np.linalg.solve(omega * np.eye(n) - model.h_eff, np.eye(n))


def fourier_oracle(d, omega, p, points=100_000):
    """Trapezoid rule for the momentum integral of the non-reciprocal chain."""
    k = 2 * np.pi * np.arange(points) / points
    integrand = np.exp(1j * k * d) / (omega + 1j * p.s - p.w * np.cos(k) + 1j * p.kappa * np.sin(k))
    return integrand.mean()


# ---------------------------------------------------------------------------
# parameters and dispersion


def test_params_derived_quantities():
    p = g.HNParams(1.0, 0.5, 0.01, "boson")
    assert p.s == pytest.approx(0.49)
    assert p.j == pytest.approx(np.sqrt(0.75))
    assert p.a == pytest.approx(0.5 * np.log(3))
    with pytest.raises(InvalidParameter):
        g.HNParams(1.0, 1.0, 0.01)
    with pytest.raises(InvalidParameter):
        g.HNParams(1.0, 0.5, -0.1)


def test_params_from_model():
    model = build_hatano_nelson(8, 2.0, 0.5, 0.1, "open", "boson")
    p = g.HNParams.from_model(model)
    assert (p.w, p.kappa, p.gamma) == (2.0, 0.5, 0.1)
    assert p.statistics is model.statistics


def test_dispersion_large_loss_asymptote():
    p = g.HNParams(1.0, 0.5, 20.0)
    q = g.dispersion_q(0.0, p).q
    with mpmath.workdps(30):
        c = mpmath.mpc(0, p.s) / p.j
        cands = [mpmath.acos(c), -mpmath.acos(c)]
        oracle = complex(next(x for x in cands if abs(mpmath.exp(-1j * x)) < 1))
    assert q == pytest.approx(oracle, abs=1e-12)
    assert q == pytest.approx(np.pi / 2 - 1j * np.log(2 * p.s / p.j), abs=1e-3)


def test_dispersion_branch_and_residual():
    p = g.HNParams(1.0, 0.6, 0.05)
    for omega in np.linspace(-3, 3, 100):
        wave = g.dispersion_q(omega, p)
        assert abs(wave.z) < 1
        assert wave.q.imag < 0
        assert abs(p.j * np.cos(wave.q) - (omega + 1j * p.s)) < 1e-10
    wave = g.dispersion_q(1.0, p)
    assert abs(p.j * np.cos(wave.q) - (1.0 + 1j * p.s)) < 1e-10


def test_dispersion_without_damping_is_ambiguous():
    with pytest.raises(BranchAmbiguity):
        g.dispersion_q(0.3, g.HNParams(1.0, 0.0, 0.0))


def test_momentum_decay():
    p = g.HNParams(1.0, 0.5, 0.1)
    for k in (0.3, 1.2, 2.9):
        r = g.momentum_decay(k, p).r
        js = p.j * np.sin(k)
        assert r <= 0
        assert np.exp(r) == pytest.approx((np.sqrt(p.s ** 2 + js ** 2) - p.s) / js, rel=1e-13)
    with pytest.raises(InvalidParameter):
        g.momentum_decay(0.0, p)


# ---------------------------------------------------------------------------
# infinite, periodic and open chains


def test_g_infinite_zero_separation():
    p = g.HNParams(1.0, 0.5, 0.05)
    q = g.dispersion_q(0.0, p).q
    assert g.g_infinite(0, 0.0, p) == pytest.approx(-1j / (p.j * np.sin(q)), rel=1e-14)


@pytest.mark.parametrize("d", [5, -5, 0, 12])
def test_g_infinite_fourier_oracle(d):
    p = g.HNParams(1.0, 0.5, 0.01)
    oracle = fourier_oracle(d, 0.3, p)
    assert abs(g.g_infinite(d, 0.3, p) - oracle) <= 1e-8 * abs(oracle)


def test_gauge_identity():
    # the non-reciprocal integrand equals e^{A d} times the reciprocal one with hop J
    p = g.HNParams(1.0, 0.6, 0.05)
    k = 2 * np.pi * np.arange(100_000) / 100_000
    for d, omega in [(3, 0.2), (-4, -1.1), (7, 2.5)]:
        pre = fourier_oracle(d, omega, p)
        post = np.mean(np.exp(1j * k * d) / (omega + 1j * p.s - p.j * np.cos(k)))
        assert abs(pre - np.exp(p.a * d) * post) <= 1e-8 * abs(pre)


def test_g_infinite_reciprocal_symmetry():
    p = g.HNParams(1.0, 0.0, 0.2)
    for d in (1, 4, 9):
        assert abs(g.g_infinite(d, 0.4, p)) == pytest.approx(abs(g.g_infinite(-d, 0.4, p)), rel=1e-13)


def test_g_infinite_growth_rate():
    p = g.HNParams(1.0, 0.5, 0.05)
    q = g.dispersion_q(0.2, p).q
    ratio = abs(g.g_infinite(11, 0.2, p) / g.g_infinite(10, 0.2, p))
    assert np.log(ratio) == pytest.approx(p.a - abs(q.imag), rel=1e-12)


def test_g_pbc_dense_example():
    n, p = 32, g.HNParams(1.0, 0.5, 0.05)
    model = build_hatano_nelson(n, 1.0, 0.5, 0.05, "periodic")
    dense = resolvent(model, 0.0)
    sites = np.arange(1, n + 1)
    closed = g.g_pbc(sites[:, None], sites[None, :], n, 0.0, p)
    assert np.max(np.abs(closed - dense) / np.abs(dense)) < 1e-8


def test_g_pbc_wraps_and_approaches_infinite_chain():
    p = g.HNParams(1.0, 0.3, 0.4)
    assert g.g_pbc(3 + 16, 5, 16, 0.1, p) == pytest.approx(g.g_pbc(3, 5, 16, 0.1, p), rel=1e-14)
    # round trips die out once |Im Q| N dominates A N
    big = g.g_pbc(50, 47, 400, 0.1, p)
    assert big == pytest.approx(g.g_infinite(3, 0.1, p), rel=1e-12)


def test_g_obc_dense_example():
    n, p = 24, g.HNParams(1.0, 0.9, 0.01)
    model = build_hatano_nelson(n, 1.0, 0.9, 0.01, "open")
    dense = resolvent(model, 0.2)
    sites = np.arange(1, n + 1)
    closed = g.g_obc(sites[:, None], sites[None, :], n, 0.2, p)
    assert np.max(np.abs(closed - dense) / np.abs(dense)) < 1e-8


def test_g_obc_closed_form_and_hard_walls():
    n, p = 10, g.HNParams(1.0, 0.4, 0.1)
    q = g.dispersion_q(0.3, p).q

    def textbook(j, k):
        lo, hi = min(j, k), max(j, k)
        return (np.exp(p.a * (j - k)) * 2 * np.sin(q * lo) * np.sin(q * (n + 1 - hi))
                / (p.j * np.sin(q) * np.sin(q * (n + 1))))

    for j, k in [(1, 1), (3, 7), (9, 2), (10, 10)]:
        assert g.g_obc(j, k, n, 0.3, p) == pytest.approx(textbook(j, k), rel=1e-12)
    # extending the index to 0 or N+1 hits the walls
    assert abs(textbook(0, 4)) < 1e-14 and abs(textbook(n + 1, 4)) < 1e-14
    with pytest.raises(DimensionError):
        g.g_obc(0, 4, n, 0.3, p)


def test_g_obc_no_bounce_limit():
    n, p = 80, g.HNParams(1.0, 0.5, 1.0)
    closed = g.g_obc(41, 39, n, 0.3, p)
    free = g.g_infinite(2, 0.3, p)
    assert abs(closed - free) <= 1e-3 * abs(free)


@pytest.mark.parametrize("seed", range(30))
def test_closed_forms_match_resolvent_random(seed):
    rng = np.random.default_rng(seed)
    kappa = rng.uniform(0.05, 0.95)
    gamma = rng.uniform(0.01, 0.5)
    stats = "fermion" if seed % 2 else "boson"
    if stats == "boson":
        gamma = min(gamma, 0.9 * kappa)
    n = int(rng.integers(2, 65))
    omega = rng.uniform(-3, 3)
    p = g.HNParams(1.0, kappa, gamma, stats)
    sites = np.arange(1, n + 1)
    for bc, fn in (("open", g.g_obc), ("periodic", g.g_pbc)):
        model = build_hatano_nelson(n, 1.0, kappa, gamma, bc, stats)
        dense = resolvent(model, omega)
        closed = fn(sites[:, None], sites[None, :], n, omega, p)
        assert np.max(np.abs(closed - dense) / np.abs(dense)) < 1e-8


# ---------------------------------------------------------------------------
# occupations


def test_occupation_from_greens_matches_lyapunov():
    model = build_hatano_nelson(16, 1.0, 0.9, 0.05, "open")
    exact = ss.steady_state_direct(model).densities()
    got = g.occupation_from_greens(model)
    np.testing.assert_allclose(got, exact, rtol=1e-4)


def test_occupation_from_greens_limits():
    assert np.all(g.occupation_from_greens(build_hatano_nelson(8, 1.0, 0.5, 0.0, "open")) == 0)
    one = build_hatano_nelson(1, 1.0, 0.5, 0.1, "open")
    # a single site loses 2 kappa through its two baths
    assert g.occupation_from_greens(one)[0] == pytest.approx(0.1 / (0.5 + 0.1), rel=1e-6)


@pytest.mark.parametrize("x", [1e-8, 0.01, 0.3, 1.0, 2.5, 4.0, 6.0])
def test_error_functions_against_high_precision(x):
    with mpmath.workdps(40):
        assert erf(x) == pytest.approx(float(mpmath.erf(x)), rel=1e-12)
        assert erfi(x) == pytest.approx(float(mpmath.erfi(x)), rel=1e-12)


def test_xi_obc_values():
    assert g.xi_obc(g.HNParams(1.0, 0.99, 0.01, "fermion")) == pytest.approx(1 / (2 * np.log(1.01)))
    assert g.xi_obc(g.HNParams(1.0, 0.99, 0.01, "fermion")) == pytest.approx(50.25, abs=0.01)
    assert g.xi_obc(g.HNParams(1.0, 0.99, 0.01, "boson")) == pytest.approx(-1 / (2 * np.log(0.99)))
    assert g.xi_obc(g.HNParams(1.0, 0.99, 0.01, "boson")) == pytest.approx(49.75, abs=0.01)
    # both approach w / (2 gamma)
    assert g.xi_obc(g.HNParams(1.0, 0.99, 1e-4)) == pytest.approx(5000, rel=1e-3)
    assert g.xi_obc(g.HNParams(1.0, 0.5, 0.0)) == np.inf


def test_asymptotic_small_site_limit():
    for stats in ("fermion", "boson"):
        p = g.HNParams(1.0, 0.99, 0.001, stats)
        j = np.arange(1, 6)
        small = p.gamma / p.s * (1 + 2 / np.sqrt(np.pi) * (np.sqrt(j) - 1))
        np.testing.assert_allclose(g.occupation_asymptotic(j, p), small, rtol=1e-2)


def test_asymptotic_statistics_agree_near_edge():
    f = g.HNParams(1.0, 0.99, 0.01, "fermion")
    b = g.HNParams(1.0, 0.99, 0.01, "boson")
    j = np.arange(1, 11)
    rel = np.abs(g.occupation_asymptotic(j, f) / g.occupation_asymptotic(j, b) - 1)
    # erf and erfi part ways at relative order j / xi; the prefactors at 2 gamma / kappa
    assert np.all(rel < 2 * f.gamma / f.kappa + j / g.xi_obc(f))


def test_asymptotic_regime_warning():
    with pytest.warns(RegimeWarning):
        g.occupation_asymptotic(5, g.HNParams(1.0, 0.3, 0.01))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        g.occupation_asymptotic(5, g.HNParams(1.0, 0.99, 0.01), n=200)


def test_asymptotic_matches_lyapunov_profile():
    n = 200
    model = build_hatano_nelson(n, 1.0, 0.99, 0.01, "open")
    exact = ss.steady_state_direct(model).densities()
    j = np.arange(20, 181)
    approx = g.occupation_asymptotic(j, g.HNParams.from_model(model), n)
    assert np.max(np.abs(approx / exact[j - 1] - 1)) < 0.05


@pytest.mark.xfail(strict=True, reason="sum and integral forms differ by an O(Gamma/s) offset; see notes")
def test_no_bounce_sum_agrees_with_erf_asymptotic():
    p = g.HNParams(1.0, 0.99, 0.01)
    n = 200
    xi = g.xi_obc(p)
    assert n >= 4 * xi
    j = np.arange(int(np.ceil(xi / 4)), n + 1)
    summed = g.occupation_no_bounce(n, p)[j - 1]
    asym = g.occupation_asymptotic(j, p, n)
    assert np.max(np.abs(summed / asym - 1)) <= 0.02


def test_no_bounce_sum_tracks_lyapunov():
    n = 200
    model = build_hatano_nelson(n, 1.0, 0.99, 0.01, "open")
    exact = ss.steady_state_direct(model).densities()
    summed = g.occupation_no_bounce(n, g.HNParams.from_model(model))
    j = np.arange(20, 181)
    assert np.max(np.abs(summed[j - 1] / exact[j - 1] - 1)) < 0.05


def test_fermion_profile_is_non_decreasing():
    dens = ss.steady_state_direct(build_hatano_nelson(120, 1.0, 0.99, 0.01, "open")).densities()
    assert np.all(np.diff(dens) >= -1e-12)


# ---------------------------------------------------------------------------
# fits


def test_fit_healing_length_recovers_synthetic_profile():
    p = g.HNParams(1.0, 0.99, 0.02)
    j = np.arange(1, 201)
    dens = g.occupation_asymptotic(j, p)
    assert g.fit_healing_length(j, dens, "fermion") == pytest.approx(g.xi_obc(p), rel=1e-6)


def test_log_slope_exact_exponential():
    j = np.arange(1, 50)
    assert g.log_slope(j, 3 * np.exp(0.07 * j), 10, 40) == pytest.approx(0.07, rel=1e-12)


@pytest.mark.parametrize("kappa,expected", [(0.5, 0.5 * np.log(3)), (0.99, 0.5 * np.log(1.99 / 0.01)), (0.0, 0.0)])
def test_skin_localization_length(kappa, expected):
    model = build_hatano_nelson(60, 1.0, kappa, 0.01, "open")
    got = g.skin_localization_length(model)
    if expected == 0:
        assert abs(got) < 1e-3
    else:
        assert got == pytest.approx(expected, rel=0.05)


# ---------------------------------------------------------------------------
# two-site unit cell


def ssh_fourier_oracle(pair, d, omega, sp, points=100_000):
    k = 2 * np.pi * np.arange(points) / points
    h = np.zeros((points, 2, 2), dtype=complex)
    h[:, 0, 0] = h[:, 1, 1] = -1j * sp.s
    h[:, 1, 0] = 0.5 * (sp.w + sp.kappa) + 0.5 * (sp.u - sp.gamma_hop) * np.exp(1j * k)
    h[:, 0, 1] = 0.5 * (sp.w - sp.kappa) + 0.5 * (sp.u + sp.gamma_hop) * np.exp(-1j * k)
    gk = np.linalg.inv(omega * np.eye(2) - h)
    x, y = "AB".index(pair[0]), "AB".index(pair[1])
    return np.mean(np.exp(1j * k * d) * gk[:, x, y])


@pytest.mark.parametrize("pair", ["AA", "AB", "BA", "BB"])
@pytest.mark.parametrize("d,omega", [(0, 0.3), (2, -0.4), (-3, 1.1)])
def test_ssh_fourier_oracle(pair, d, omega):
    sp = g.SSHParams(1.0, 0.3, 0.8, 0.2, 0.05)
    oracle = ssh_fourier_oracle(pair, d, omega, sp)
    assert abs(g.ssh_g_infinite(pair, d, omega, sp) - oracle) <= 1e-7 * abs(oracle)


def test_ssh_single_band_limit():
    w, kappa, gamma = 1.0, 0.4, 0.05
    sp = g.SSHParams(w, kappa, w, kappa, gamma)
    hp = g.HNParams(w, kappa, gamma)
    for d in (-2, 0, 3):
        assert g.ssh_g_infinite("AA", d, 0.3, sp) == pytest.approx(g.g_infinite(2 * d, 0.3, hp), rel=1e-12)
        assert g.ssh_g_infinite("AB", d, 0.3, sp) == pytest.approx(g.g_infinite(2 * d - 1, 0.3, hp), rel=1e-12)
        assert g.ssh_g_infinite("BA", d, 0.3, sp) == pytest.approx(g.g_infinite(2 * d + 1, 0.3, hp), rel=1e-12)


def test_ssh_approx_figure_parameters():
    model = build_nh_ssh(50, 1.0, 0.0, 1.0, 0.99, 0.01, "open")
    exact = ss.steady_state_direct(model).densities()
    approx = g.ssh_occupation_approx(model)
    bulk = slice(2 * 9, 2 * 40)
    assert np.max(np.abs(approx[bulk] / exact[bulk] - 1)) < 0.1


def test_ssh_approx_reciprocal_limit_is_flat():
    # without loss every site fills; the no-bounce sum gets there away from the ends
    model = build_nh_ssh(20, 1.0, 0.0, 0.7, 0.0, 0.5, "open")
    approx = g.ssh_occupation_approx(model)
    exact = ss.steady_state_direct(model).densities()
    np.testing.assert_allclose(exact, 1.0, rtol=1e-12)
    np.testing.assert_allclose(approx[10:30], exact[10:30], rtol=1e-5)


def test_ssh_approx_hatano_nelson_limit():
    n_cells, w, kappa, gamma = 40, 1.0, 0.9, 0.02
    model = build_nh_ssh(n_cells, w, kappa, w, kappa, gamma, "open")
    hn = ss.steady_state_direct(build_hatano_nelson(2 * n_cells, w, kappa, gamma, "open")).densities()
    approx = g.ssh_occupation_approx(model)
    bulk = slice(20, 70)
    assert np.max(np.abs(approx[bulk] / hn[bulk] - 1)) < 0.1
