"""Acceptance suite.

One test per acceptance criterion, each printing a PASS/FAIL line (run with
``pytest tests/test_acceptance.py -v -s`` to see them).  The statistical
criteria use 5000 trajectories and 3-SEM bands at >= 95% of 50 sample times;
spectral criteria run at their stated tolerances.
"""

import time
from functools import lru_cache

import numpy as np
import pytest

from liouvep import (
    Example1Params,
    Example2Params,
    InefficientDetector,
    QubitStateSpec,
    TrajectoryConfig,
    TwoDetector,
    decompose,
    ensemble_average,
    example1_ep,
    example1_hybrid_spectrum,
    example1_model,
    example2_hybrid_ep,
    example2_model,
    hybrid_liouvillian,
    jordan_block_size,
    jordan_chain,
    liouvillian,
    locate_ep,
    propagate,
    qubit_state,
    run_ensemble,
)
from liouvep.lindblad import SIGMA_X, SIGMA_Y, SIGMA_Z
from liouvep.spectra import nhh_operator
from liouvep.verify import multiset_distance, run_verification
from stat_helpers import agreement_fraction, exact_curves, mutual_agreement_fraction

OBS = {"sx": SIGMA_X, "sy": SIGMA_Y, "sz": SIGMA_Z}
FIG_STATE = qubit_state(QubitStateSpec(theta=np.sqrt(3) * np.pi / 2, phi=np.sqrt(3) * np.pi))
T_MAX = 5.0
N_TRAJ = 5000
SAMPLE_TIMES = np.linspace(0.0, T_MAX, 50)


def _report(num, desc, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    line = f"[criterion {num:2d}] {status} - {desc}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def _cfg(seed, n_traj=N_TRAJ, t_max=T_MAX):
    return TrajectoryConfig(
        t_max=t_max,
        n_traj=n_traj,
        master_seed=seed,
        sample_times=SAMPLE_TIMES if t_max == T_MAX else np.linspace(0, t_max, 50),
    )


@lru_cache(maxsize=None)
def _fig2_two_detector(gamma):
    """Two-detector postselected ensembles for q in {0, 1/4, 1/2, 3/4}."""
    out = {}
    model = example1_model(Example1Params(omega=1.0, gamma_x=gamma))
    for i, q in enumerate((0.0, 0.25, 0.5, 0.75)):
        _, stats = run_ensemble(model, TwoDetector(q=q), _cfg(seed=100 + i), FIG_STATE, OBS)
        exact, _ = exact_curves(hybrid_liouvillian(model, q), FIG_STATE, stats.times, OBS)
        out[q] = (stats, exact)
    return out


def test_criterion_01_example1_closed_form_grid():
    t0 = time.perf_counter()
    gammas = np.linspace(0.11, 2.99, 30)
    qs = (0.0, 0.25, 0.5, 0.75, 1.0, 2.0)
    # grid stays away from exact hybrid EPs (q gamma = omega), where eigenvalues
    # of the then-defective generator are resolvable only to ~sqrt(eps); a
    # margin of 1e-4 keeps the pair gap > 0.02 and the solver error < 1e-12
    assert min(abs(q * g - 1.0) for g in gammas for q in qs if q > 0) > 1e-4
    worst = 0.0
    for q in qs:
        for g in gammas:
            p = Example1Params(omega=1.0, gamma_x=float(g), q=q)
            dec = decompose(hybrid_liouvillian(example1_model(p), q))
            worst = max(worst, multiset_distance(example1_hybrid_spectrum(p).eigenvalues, dec.eigenvalues))
    elapsed = time.perf_counter() - t0
    _report(
        1,
        "example-1 hybrid spectrum matches the closed form on a 30x6 grid",
        worst < 1e-10 and elapsed < 5.0,
        f"max multiset distance {worst:.2e}, {elapsed:.2f}s",
    )


def test_criterion_02_example1_ep_law():
    t0 = time.perf_counter()
    ok = True
    details = []
    for q in (0.25, 0.5, 0.75, 1.0):
        family = lambda g: example1_model(Example1Params(omega=1.0, gamma_x=g, q=q))
        est = locate_ep(family, q, bracket=(0.3, 6.0))
        target = example1_ep(q, omega=1.0)
        rel = abs(est.parameter_value - target) / target
        ok &= est.found and rel < 1e-6
        details.append(f"q={q}: {est.parameter_value:.8f}")
    family0 = lambda g: example1_model(Example1Params(omega=1.0, gamma_x=g, q=0.0))
    est0 = locate_ep(family0, 0.0, bracket=(0.3, 6.0))
    ok &= not est0.found
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 5.0
    _report(2, "example-1 EP law gamma_EP = omega/q (none at q=0)", ok,
            "; ".join(details) + f"; q=0 found={est0.found}; {elapsed:.2f}s")


def test_criterion_03_example2_ep_law_and_orders():
    t0 = time.perf_counter()
    ok = True
    details = []
    for q in (0.1, 0.25, 0.5, 0.75, 1.0):
        family = lambda g: example2_model(Example2Params(omega=1.0, gamma_minus=g, q=q))
        est = locate_ep(family, q, bracket=(1.5, 5.5))
        target = example2_hybrid_ep(q, omega=1.0)
        rel = abs(est.parameter_value - target) / target
        ok &= est.found and rel < 1e-6
        details.append(f"q={q}: {est.parameter_value:.6f} vs {target:.6f}")
    # endpoints: q -> 0 through the effective-Hamiltonian spectrum, q = 1 direct
    family = lambda g: example2_model(Example2Params(omega=1.0, gamma_minus=g))
    est_nhh = locate_ep(family, 0.0, bracket=(1.2, 4.0), build=nhh_operator)
    ok &= est_nhh.found and abs(est_nhh.parameter_value - 2.0) < 1e-6
    est_lep = locate_ep(family, 1.0, bracket=(3.0, 5.0))
    ok &= est_lep.found and abs(est_lep.parameter_value - 4.0) < 1e-6
    # Jordan structure: third order at (q=0, gamma=2), second order at (q=1, gamma=4)
    sup0 = hybrid_liouvillian(example2_model(Example2Params(omega=1.0, gamma_minus=2.0)), 0.0)
    size0 = jordan_block_size(sup0, -1.0)
    sup1 = liouvillian(example2_model(Example2Params(omega=1.0, gamma_minus=4.0)))
    size1 = jordan_block_size(sup1, -3.0)
    ok &= size0 >= 3 and size1 == 2
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 10.0
    _report(3, "example-2 EP law, endpoints 2w/4w, Jordan orders 3 and 2", ok,
            f"block sizes {size0}/{size1}; {elapsed:.2f}s")


def test_criterion_04_jordan_chains_at_both_eps():
    # example 1 at gamma = omega: eigenvalue -omega, eigenmatrix [[0,-i],[1,0]]
    sup1 = liouvillian(example1_model(Example1Params(omega=1.0, gamma_x=1.0)))
    rho1 = np.array([[0.0, -1.0j], [1.0, 0.0]])
    rho1 = rho1 / np.linalg.norm(rho1)
    res1 = jordan_chain(sup1, -1.0, rho1)
    # example 2 at gamma = 4 omega: eigenvalue -3 omega
    sup2 = liouvillian(example2_model(Example2Params(omega=1.0, gamma_minus=4.0)))
    rho2 = np.array([[4.0, -4.0j], [4.0j, -4.0]])
    rho2 = rho2 / np.linalg.norm(rho2)
    res2 = jordan_chain(sup2, -3.0, rho2)
    ok = res1.consistent and res1.residual < 1e-8
    ok &= res2.consistent and res2.residual < 1e-8

    def in_family(res, rho, representative):
        span = np.column_stack([res.generalized_eigenmatrix.ravel(), rho.ravel()])
        coeff, *_ = np.linalg.lstsq(span, representative.ravel(), rcond=None)
        return np.linalg.norm(span @ coeff - representative.ravel())

    r1 = in_family(res1, rho1, np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))
    r2 = in_family(res2, rho2, 4.0 * np.diag([1.0, -1.0]).astype(complex))
    ok &= r1 < 1e-8 and r2 < 1e-8
    _report(4, "Jordan chains at both EPs; tabulated representatives in family", ok,
            f"residuals {res1.residual:.1e}/{res2.residual:.1e}, family fits {r1:.1e}/{r2:.1e}")


def test_criterion_05_fig2_two_detector_agreement():
    t0 = time.perf_counter()
    runs = _fig2_two_detector(0.5)
    ok = True
    details = []
    for q, (stats, exact) in runs.items():
        frac = agreement_fraction(stats, exact)
        worst = min(frac.values())
        ok &= worst >= 0.95
        details.append(f"q={q}: min frac {worst:.2f} (n_acc={stats.n_accepted})")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120.0
    _report(5, "postselected two-detector ensembles match hybrid evolution", ok,
            "; ".join(details) + f"; {elapsed:.1f}s")


def test_criterion_06_fig3_inefficient_detector_agreement():
    runs_td = _fig2_two_detector(0.5)
    model = example1_model(Example1Params(omega=1.0, gamma_x=0.5))
    ok = True
    details = []
    for i, q in enumerate((0.0, 0.25, 0.5, 0.75)):
        eta = 1.0 - q
        _, stats = run_ensemble(
            model, InefficientDetector(eta=eta), _cfg(seed=200 + i), FIG_STATE, OBS
        )
        exact, _ = exact_curves(hybrid_liouvillian(model, q), FIG_STATE, stats.times, OBS)
        frac = agreement_fraction(stats, exact)
        mutual = mutual_agreement_fraction(stats, runs_td[q][0])
        worst = min(min(frac.values()), min(mutual.values()))
        ok &= worst >= 0.95
        details.append(f"eta={eta}: {worst:.2f}")
    _report(6, "inefficient detector (eta = 1-q) matches hybrid and two-detector", ok,
            "; ".join(details))


def test_criterion_07_rare_postselection_regime():
    model = example1_model(Example1Params(omega=1.0, gamma_x=1.5))
    q = 0.25
    _, stats = run_ensemble(model, TwoDetector(q=q), _cfg(seed=321), FIG_STATE, OBS)
    rho0 = np.outer(FIG_STATE, FIG_STATE.conj())
    res = propagate(hybrid_liouvillian(model, q), rho0, [T_MAX])
    p = res.raw_traces[-1]
    n, k = stats.n_total, stats.n_accepted
    sigma = np.sqrt(n * p * (1 - p))
    ok = abs(k - n * p) <= 3 * sigma and 1 <= k <= 100
    _report(7, "rare-postselection count matches the raw-trace weight", ok,
            f"accepted {k} of {n}, predicted {n * p:.1f} +/- {sigma:.1f}")


def test_criterion_08_unconditioned_equivalence():
    ok = True
    details = []
    seed = 400
    # dt four times below the default: the O(dt) jump-timing bias scales with
    # gamma^2 and at gamma = omega it would eat into the 3-SEM band
    cfg_kw = dict(t_max=T_MAX, n_traj=N_TRAJ, sample_times=SAMPLE_TIMES, dt=np.pi * 5e-4)
    for gamma in (0.5, 1.0):
        model = example1_model(Example1Params(omega=1.0, gamma_x=gamma))
        for q in (0.25, 0.75):
            for setup in (TwoDetector(q=q), InefficientDetector(eta=1.0 - q)):
                seed += 1
                cfg = TrajectoryConfig(master_seed=seed, **cfg_kw)
                records, stats = run_ensemble(model, setup, cfg, FIG_STATE, OBS)
                full = ensemble_average(records, OBS, stats.times)
                exact, _ = exact_curves(liouvillian(model), FIG_STATE, stats.times, OBS)
                frac = agreement_fraction(full, exact)
                worst = min(frac.values())
                ok &= worst >= 0.95
                details.append(f"g={gamma},q={q},{type(setup).__name__}: {worst:.2f}")
    _report(8, "unconditioned ensembles match the full Lindblad evolution", ok,
            "; ".join(details))


def test_criterion_09_hybrid_map_physicality():
    rng = np.random.default_rng(77)
    ok = True
    worst_eig = 0.0
    for model in (
        example1_model(Example1Params(omega=1.0, gamma_x=0.8)),
        example2_model(Example2Params(omega=1.0, gamma_minus=1.3)),
    ):
        for _ in range(50):
            a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            rho = a @ a.conj().T
            rho /= np.trace(rho).real
            for q in (0.0, 0.5, 1.0):
                res = propagate(hybrid_liouvillian(model, q), rho, np.linspace(0.0, 5.0, 11))
                for state in res.states:
                    mineig = float(np.linalg.eigvalsh(state).min())
                    worst_eig = min(worst_eig, mineig)
                    ok &= mineig >= -1e-9
                    ok &= abs(np.trace(state).real - 1.0) < 1e-12
    _report(9, "hybrid map preserves positivity and unit trace", ok,
            f"100 states x q in {{0, 1/2, 1}}, min eigenvalue {worst_eig:.1e}")


def test_criterion_10_appendix_verification():
    report = run_verification("example2", n_samples=50, seed=2024)
    a1 = next(c for c in report.checks if c.name == "example2/hybrid-eigenvalues-tabulated")
    devs = [d for d in report.deviations if d.quantity == "hybrid-eigenvalues-tabulated"]
    # every tabulated-eigenvalue mismatch must be captured with numeric truth
    ok = a1.n_samples == 50 and len(devs) == a1.n_failed
    ok &= all(len(d.numeric) == 4 and len(d.analytic) == 4 for d in devs)
    # the q = 1 and q = 0 reductions (criterion-3 endpoints) pass unconditionally
    hard_names = {
        "example2/liouvillian-eigenvalues",
        "example2/nhh-eigenvalues",
        "example2/hybrid-eigenvalues-cardano",
        "example2/hybrid-lambda1",
    }
    for name in hard_names:
        chk = next(c for c in report.checks if c.name == name)
        ok &= chk.passed
    ok &= report.passed
    _report(10, "tabulated cubic-root eigenvalues verified or logged with ground truth", ok,
            f"{a1.n_samples - a1.n_failed}/{a1.n_samples} matched, {len(devs)} deviations logged")
