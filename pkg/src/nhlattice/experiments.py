"""Plot-ready experiments and solver cross-checks as pure data producers.

Each experiment takes a parameter dict and returns an :class:`ExperimentResult`
holding named tables, solver residuals and timings. Nothing here touches the
file system; :mod:`nhlattice.cli` writes the tables out.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import greens, orbitals
from . import numkernel as nk
from . import steadystate as ss
from .errors import InvalidParameter
from .io import orbital_rows
from .model import (
    build_hatano_nelson,
    build_hn_nnn,
    build_nh_ssh,
    build_structured_noise_chain,
    effective_hamiltonian,
    random_model,
)
from .quadrature import QuadratureSpec

__all__ = ["ExperimentResult", "EXPERIMENTS", "DEFAULTS", "resolve_params", "run_experiment"]


@dataclass
class Table:
    header: list
    rows: list


@dataclass
class ExperimentResult:
    experiment: str
    params: dict
    tables: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    plot: str = ""


class _Clock:
    def __init__(self, result):
        self.result = result

    def __call__(self, name):
        clock = self

        class _Span:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                clock.result.timings[name] = time.perf_counter() - self.t0

        return _Span()


DEFAULTS = {
    "fig1_hn_profiles": dict(n=200, w=1.0, kappa=0.99, gamma=0.01),
    "fig3_gamma_sweep": dict(n=200, w=1.0, kappa=0.99, gammas=[0.002, 0.01, 0.05, 0.1]),
    "fig4_orbitals": dict(n=100, w=0.9, kappa=1.0, gamma=0.01),
    "fig5_ssh": dict(n_cells=50, w=1.0, kappa=0.0, u=1.0, gamma_hop=0.99, gamma_pump=0.01),
    "fig6_nnn": dict(n=200, w=1.0, kappa=0.99, t_nnn=1.0, phi=float(np.pi / 2), gamma=0.01,
                     statistics="boson", n_spectrum=70),
    "fig7_structured_noise": dict(n=100, w=1.0, kappa=0.5, gamma=0.5),
    "crosscheck": dict(seed=0, n=12, statistics="fermion", n_points=4096),
    # parameters of every builder, so each model is reachable from the command line
    "spectrum": dict(model="hatano_nelson", n=40, w=1.0, kappa=0.5, gamma=0.01,
                     boundary="open", statistics="fermion", t_nnn=1.0, phi=float(np.pi / 2),
                     n_cells=20, u=1.0, gamma_hop=0.99, gamma_pump=0.01),
    "greens_scan": dict(n=16, w=1.0, kappa=0.5, gamma=0.05, boundary="open",
                        statistics="fermion", n_omega=9, omega_max=2.0),
}

# full-size runs where the quick default is smaller
FULL_SIZES = {"fig4_orbitals": ("n", 200), "fig5_ssh": ("n_cells", 100)}

RATE_KEYS = ("w", "kappa", "gamma", "u", "gamma_hop", "gamma_pump", "t_nnn", "gammas", "omega_max")


def resolve_params(experiment, overrides=None):
    """Defaults merged with overrides, rates rescaled so that ``w = 1``."""
    if experiment not in DEFAULTS:
        raise InvalidParameter(f"unknown experiment {experiment!r}")
    params = dict(DEFAULTS[experiment])
    notes = []
    for key, value in (overrides or {}).items():
        if key not in params:
            raise InvalidParameter(f"experiment {experiment} has no parameter {key!r}")
        params[key] = value
    for key in RATE_KEYS:
        if key in params:
            vals = np.atleast_1d(np.asarray(params[key], dtype=float))
            if np.any(~np.isfinite(vals)) or np.any(vals < 0):
                raise InvalidParameter(f"{key} must be a finite non-negative rate")
    w = params.get("w")
    if w is not None and w != 1.0 and experiment != "fig7_structured_noise":
        if not w > 0:
            raise InvalidParameter("w must be positive")
        for key in RATE_KEYS:
            if key in params:
                v = params[key]
                params[key] = [x / w for x in v] if isinstance(v, list) else v / w
        notes.append(f"rates rescaled by 1/w = {1.0 / w:.17g}")
    if experiment in FULL_SIZES:
        key, size = FULL_SIZES[experiment]
        if params[key] != size:
            notes.append(f"desk scale: {key}={params[key]} instead of {size}")
    return params, notes


def _spectrum_rows(e):
    return [(i + 1, float(z.real), float(z.imag)) for i, z in enumerate(e)]


def _profile(model):
    cov = ss.steady_state_direct(model)
    return cov, ss.lyapunov_residual(model, cov)


def fig1_hn_profiles(p, res, clock):
    n, w, k, g = p["n"], p["w"], p["kappa"], p["gamma"]
    rows = {}
    for label, bc, stats in (("pbc_fermion", "periodic", "fermion"),
                             ("obc_fermion", "open", "fermion"),
                             ("obc_boson", "open", "boson")):
        model = build_hatano_nelson(n, w, k, g, bc, stats)
        with clock(f"lyapunov_{label}"):
            cov, r = _profile(model)
        res.residuals[f"lyapunov_{label}"] = r
        dens = cov.densities()
        if bc == "open":
            hp = greens.HNParams(w, k, g, stats)
            asym = greens.occupation_asymptotic(np.arange(1, n + 1), hp, n)
            rows[f"profile_{label}"] = Table(["site", "occupation", "asymptotic"],
                                [(j + 1, dens[j], asym[j]) for j in range(n)])
        else:
            rows[f"profile_{label}"] = Table(["site", "occupation"], [(j + 1, dens[j]) for j in range(n)])
    for bc in ("periodic", "open"):
        h = effective_hamiltonian(build_hatano_nelson(n, w, k, g, bc, "fermion"))
        with clock(f"spectrum_{bc}"):
            e = nk.eigvals_general(h)
        rows[f"spectrum_{bc}"] = Table(["index", "re", "im"], _spectrum_rows(e))
        if bc == "open":
            res.residuals["obc_decay_deviation"] = float(np.abs(-e.imag - (k + g)).max())
        else:
            res.residuals["pbc_min_decay_deviation"] = float(abs(-e.imag.max() - g))
    res.residuals["xi_pbc"] = ss.xi_pbc(k, g)
    res.residuals["xi_obc_fermion"] = greens.xi_obc(greens.HNParams(w, k, g, "fermion"))
    res.residuals["xi_obc_boson"] = greens.xi_obc(greens.HNParams(w, k, g, "boson"))
    res.tables = rows
    res.plot = PLOT_FIG1


def fig3_gamma_sweep(p, res, clock):
    n, w, k = p["n"], p["w"], p["kappa"]
    out = []
    for stats in ("fermion", "boson"):
        for g in p["gammas"]:
            model = build_hatano_nelson(n, w, k, g, "open", stats)
            with clock(f"lyapunov_{stats}_{g:g}"):
                cov, r = _profile(model)
            res.residuals[f"lyapunov_{stats}_{g:g}"] = r
            dens = cov.densities()
            for j in range(n):
                out.append((stats, g, j + 1, dens[j], dens[j] / dens[-1]))
    res.tables["scaled_profiles"] = Table(["statistics", "gamma", "site", "occupation", "scaled"], out)
    res.plot = PLOT_FIG3


def _pair_by_rank(decomposition, vecs, n0):
    order = np.argsort(-n0, kind="stable")
    pert = vecs[:, order]
    return np.abs(np.sum(decomposition.orbitals.conj() * pert, axis=0)) ** 2


def fig4_orbitals(p, res, clock):
    n, w, k, g = p["n"], p["w"], p["kappa"], p["gamma"]
    model = build_hatano_nelson(n, w, k, g, "open", "fermion")
    with clock("lyapunov"):
        cov, r = _profile(model)
    res.residuals["lyapunov"] = r
    with clock("decompose"):
        d = orbitals.decompose(cov)
    with clock("perturbation"):
        vecs, n0 = orbitals.perturbative_orbitals(model, 2)
    overlap = _pair_by_rank(d, vecs, n0)
    pr = orbitals.participation_ratio(d.orbitals)
    res.residuals["reconstruction"] = nk.max_abs(d.reconstruct() - cov.f)
    res.residuals["min_participation_ratio"] = float(pr.min())
    res.tables["orbitals"] = Table(["orbital", "occupation", "site", "weight"], orbital_rows(d))
    res.tables["overlaps"] = Table(
        ["orbital", "occupation", "overlap_pert", "participation_ratio"],
        [(r_ + 1, d.occupations[r_], overlap[r_], pr[r_]) for r_ in range(n)],
    )
    res.plot = PLOT_FIG4


def fig5_ssh(p, res, clock):
    args = (p["n_cells"], p["w"], p["kappa"], p["u"], p["gamma_hop"], p["gamma_pump"])
    model = build_nh_ssh(*args, "open", "fermion")
    with clock("lyapunov"):
        cov, r = _profile(model)
    res.residuals["lyapunov"] = r
    with clock("no_bounce"):
        approx = greens.ssh_occupation_approx(model)
    exact = cov.densities()
    rows = [(j + 1, j // 2 + 1, "AB"[j % 2], exact[j], approx[j]) for j in range(model.n_sites)]
    res.tables["profile"] = Table(["site", "cell", "sublattice", "exact", "approx"], rows)
    for bc in ("periodic", "open"):
        e = nk.eigvals_general(build_nh_ssh(*args, bc, "fermion").h_eff)
        res.tables[f"spectrum_{bc}"] = Table(["index", "re", "im"], _spectrum_rows(e))
        res.residuals[f"min_decay_{bc}"] = float(-e.imag.max())
    res.plot = PLOT_SPECTRUM_PROFILE.format(profile="profile.csv", cols='"exact", "approx"')


def fig6_nnn(p, res, clock):
    n, w, k, g = p["n"], p["w"], p["kappa"], p["gamma"]
    t, phi, stats = p["t_nnn"], p["phi"], p["statistics"]
    hn = build_hatano_nelson(n, w, k, g, "open", stats)
    nnn = build_hn_nnn(n, w, k, t, phi, g, "open", stats)
    with clock("lyapunov_hn"):
        cov_hn, r1 = _profile(hn)
    with clock("lyapunov_nnn"):
        cov_nnn, r2 = _profile(nnn)
    res.residuals["lyapunov_hn"], res.residuals["lyapunov_nnn"] = r1, r2
    a, b = cov_hn.densities(), cov_nnn.densities()
    res.tables["profile"] = Table(["site", "hn", "nnn"], [(j + 1, a[j], b[j]) for j in range(n)])
    m = p["n_spectrum"]
    for bc in ("periodic", "open"):
        e = nk.eigvals_general(build_hn_nnn(m, w, k, t, phi, g, bc, "fermion").h_eff)
        res.tables[f"spectrum_{bc}"] = Table(["index", "re", "im"], _spectrum_rows(e))
        res.residuals[f"min_decay_{bc}"] = float(-e.imag.max())
    res.plot = PLOT_SPECTRUM_PROFILE.format(profile="profile.csv", cols='"hn", "nnn"')


def fig7_structured_noise(p, res, clock):
    model = build_structured_noise_chain(p["n"], p["w"], p["kappa"], p["gamma"])
    res.notes.extend(model.notes)
    with clock("lyapunov"):
        cov, r = _profile(model)
    res.residuals["lyapunov"] = r
    dens = cov.densities()
    res.residuals["edge_sum_deviation"] = float((dens[0] - 0.5) + (dens[-1] - 0.5))
    res.tables["profile"] = Table(["site", "occupation"], [(j + 1, dens[j]) for j in range(p["n"])])
    res.plot = PLOT_PROFILE


def crosscheck(p, res, clock):
    model = random_model(int(p["seed"]), int(p["n"]), p["statistics"])
    quad = QuadratureSpec(n_points=int(p["n_points"]))
    routes = {}
    with clock("direct"):
        routes["direct"] = ss.steady_state_direct(model).f
    with clock("eigenbasis"):
        routes["eigenbasis"] = ss.steady_state_eigenbasis(model).f
    with clock("frequency"):
        routes["frequency"] = ss.steady_state_frequency(model, quad).f
    h = model.h_eff
    with clock("kronecker"):
        routes["kronecker"] = nk.solve_sylvester_kron(h, h.conj().T, -1j * model.gain)
    scale = nk.max_abs(routes["direct"])
    names = list(routes)
    rows = []
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            dev = nk.max_abs(routes[a] - routes[b]) / scale
            rows.append((a, b, dev))
            res.residuals[f"{a}_vs_{b}"] = dev
    res.residuals["lyapunov_direct"] = ss.lyapunov_residual(model, routes["direct"])
    res.tables["deviations"] = Table(["route_a", "route_b", "relative_deviation"], rows)


_BUILDERS = {
    "hatano_nelson": (build_hatano_nelson, ("n", "w", "kappa", "gamma")),
    "hn_nnn": (build_hn_nnn, ("n", "w", "kappa", "t_nnn", "phi", "gamma")),
    "nh_ssh": (build_nh_ssh, ("n_cells", "w", "kappa", "u", "gamma_hop", "gamma_pump")),
}


def spectrum(p, res, clock):
    kind = p["model"]
    if kind not in _BUILDERS:
        raise InvalidParameter(f"unknown model {kind!r}; choose from {sorted(_BUILDERS)}")
    builder, keys = _BUILDERS[kind]
    missing = [key for key in keys if key not in p]
    if missing:
        raise InvalidParameter(f"model {kind} needs parameters {missing}")
    model = builder(*(p[key] for key in keys), p["boundary"], p["statistics"])
    with clock("eigvals"):
        e = nk.eigvals_general(model.h_eff)
    res.residuals["min_decay"] = float(-e.imag.max())
    res.residuals["max_decay"] = float(-e.imag.min())
    res.tables["spectrum"] = Table(["index", "re", "im"], _spectrum_rows(e))
    res.plot = PLOT_SPECTRUM


def greens_scan(p, res, clock):
    n, bc = int(p["n"]), p["boundary"]
    hp = greens.HNParams(p["w"], p["kappa"], p["gamma"], p["statistics"])
    model = build_hatano_nelson(n, p["w"], p["kappa"], p["gamma"], bc, p["statistics"])
    omegas = np.linspace(-p["omega_max"], p["omega_max"], int(p["n_omega"]))
    fn = greens.g_obc if model.boundary.value == "open" else greens.g_pbc
    sites = np.arange(1, n + 1)
    rows, worst = [], 0.0
    with clock("scan"):
        for om in omegas:
            g = fn(sites[:, None], sites[None, :], n, om, hp)
            dense = np.linalg.inv(om * np.eye(n) - model.h_eff)
            worst = max(worst, nk.max_abs(g - dense) / nk.max_abs(dense))
            for j in range(n):
                for q in range(n):
                    rows.append((j + 1, q + 1, om, g[j, q].real, g[j, q].imag))
    res.residuals["max_relative_deviation_vs_resolvent"] = worst
    res.tables["greens"] = Table(["j", "p", "omega", "re", "im"], rows)


EXPERIMENTS = {
    "fig1_hn_profiles": fig1_hn_profiles,
    "fig3_gamma_sweep": fig3_gamma_sweep,
    "fig4_orbitals": fig4_orbitals,
    "fig5_ssh": fig5_ssh,
    "fig6_nnn": fig6_nnn,
    "fig7_structured_noise": fig7_structured_noise,
    "crosscheck": crosscheck,
    "spectrum": spectrum,
    "greens_scan": greens_scan,
}


def run_experiment(experiment, overrides=None):
    params, notes = resolve_params(experiment, overrides)
    res = ExperimentResult(experiment, params, notes=notes)
    EXPERIMENTS[experiment](params, res, _Clock(res))
    return res


# ---------------------------------------------------------------------------
# plot scripts, emitted verbatim next to the data

_PLOT_HEAD = '''"""Render the CSV tables in this directory. Requires matplotlib."""
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent


def load(name):
    with open(HERE / name, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows


def column(rows, key, cast=float):
    return [cast(r[key]) for r in rows]

'''

PLOT_FIG1 = _PLOT_HEAD + '''
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
for name, label in (("spectrum_periodic.csv", "periodic"), ("spectrum_open.csv", "open")):
    rows = load(name)
    ax1.plot(column(rows, "re"), column(rows, "im"), ".", label=label)
ax1.set_xlabel("Re E")
ax1.set_ylabel("Im E")
ax1.legend()
for name in ("profile_pbc_fermion.csv", "profile_obc_fermion.csv", "profile_obc_boson.csv"):
    rows = load(name)
    ax2.plot(column(rows, "site"), column(rows, "occupation"), label=name[8:-4])
ax2.set_xlabel("site j")
ax2.set_ylabel("occupation")
ax2.legend()
fig.tight_layout()
fig.savefig(HERE / "figure.png", dpi=150)
'''

PLOT_FIG3 = _PLOT_HEAD + '''
rows = load("scaled_profiles.csv")
fig, ax = plt.subplots(figsize=(6, 4))
for stats in ("fermion", "boson"):
    gammas = sorted({float(r["gamma"]) for r in rows if r["statistics"] == stats})
    for g in gammas:
        sel = [r for r in rows if r["statistics"] == stats and float(r["gamma"]) == g]
        ls = "-" if stats == "fermion" else "--"
        ax.plot(column(sel, "site"), column(sel, "scaled"), ls, label=f"{stats} {g:g}")
ax.set_xlabel("site j")
ax.set_ylabel("n_j / n_N")
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(HERE / "figure.png", dpi=150)
'''

PLOT_FIG4 = _PLOT_HEAD + '''
rows = load("orbitals.csv")
top = [r for r in rows if r["orbital"] == "1"]
over = load("overlaps.csv")
fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 6))
ax1.plot(column(top, "site"), column(top, "weight"))
ax1.set_xlabel("site j")
ax1.set_ylabel("|psi_1(j)|^2")
ax2.plot(column(over, "orbital"), column(over, "occupation"), "--", label="n_r")
ax2.plot(column(over, "orbital"), column(over, "overlap_pert"), ":", label="overlap")
ax2.set_xlabel("orbital r")
ax2.legend()
fig.tight_layout()
fig.savefig(HERE / "figure.png", dpi=150)
'''

PLOT_SPECTRUM_PROFILE = _PLOT_HEAD + '''
fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 7))
for name, label in (("spectrum_periodic.csv", "periodic"), ("spectrum_open.csv", "open")):
    rows = load(name)
    ax1.plot(column(rows, "re"), column(rows, "im"), ".", label=label)
ax1.set_xlabel("Re E")
ax1.set_ylabel("Im E")
ax1.legend()
rows = load("{profile}")
for key in ({cols}):
    ax2.plot(column(rows, "site"), column(rows, key), label=key)
ax2.set_xlabel("site j")
ax2.set_ylabel("occupation")
ax2.legend()
fig.tight_layout()
fig.savefig(HERE / "figure.png", dpi=150)
'''

PLOT_PROFILE = _PLOT_HEAD + '''
rows = load("profile.csv")
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(column(rows, "site"), column(rows, "occupation"))
ax.axhline(0.5, color="grey", lw=0.5)
ax.set_xlabel("site j")
ax.set_ylabel("occupation")
fig.tight_layout()
fig.savefig(HERE / "figure.png", dpi=150)
'''

PLOT_SPECTRUM = _PLOT_HEAD + '''
rows = load("spectrum.csv")
fig, ax = plt.subplots(figsize=(5, 4))
ax.plot(column(rows, "re"), column(rows, "im"), ".")
ax.set_xlabel("Re E")
ax.set_ylabel("Im E")
fig.tight_layout()
fig.savefig(HERE / "figure.png", dpi=150)
'''
