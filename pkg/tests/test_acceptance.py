"""End-to-end acceptance checks.

Each test prints exactly one PASS/FAIL line so the run can be audited from
the log alone.  The Monte Carlo checks share the session-scoped desk-scale
run (N = 256, M = 1e5, seed = 1).
"""

import numpy as np
import pytest

from spacingcov import autocov as ac
from spacingcov import montecarlo as mc
from spacingcov.cli import main
from spacingcov.fredholm import sine_kernel_det_auto
from spacingcov.painleve import log_generating_function
from spacingcov.spectral import power_spectrum, spacing_distribution

TWO_PI = 2.0 * np.pi


@pytest.fixture
def report(capsys):
    """One auditable PASS/FAIL line per criterion, bypassing capture."""

    def _report(num, label, ok):
        with capsys.disabled():
            print(f"criterion {num:2d} [{label}]: {'PASS' if ok else 'FAIL'}")
        assert ok, f"criterion {num} ({label}) failed"

    return _report


def test_criterion_1_dual_route_exactness(report):
    worst = 0.0
    for omega in (np.pi / 8, np.pi / 4, np.pi / 2, 3 * np.pi / 4, np.pi):
        zeta = 1.0 - np.exp(1j * omega)
        for lam in (1.0, 5.0, 10.0, 20.0, 30.0):
            lhs = np.exp(log_generating_function(zeta, lam))
            rhs = sine_kernel_det_auto(zeta, lam / TWO_PI)
            worst = max(worst, abs(lhs - rhs))
    report(1, f"dual-route determinant, worst |diff| = {worst:.2e}",
            worst < 1e-8)


def test_criterion_2_spacing_distribution_sanity(report):
    x, w = np.polynomial.legendre.leggauss(60)
    s = 3.0 * (x + 1.0)
    W = 3.0 * w
    P = np.array([spacing_distribution(float(v)) for v in s])
    d0 = abs(W @ P - 1.0)
    d1 = abs(W @ (s * P) - 1.0)
    report(2, f"normalization {d0:.1e}, mean {d1:.1e}",
            d0 < 1e-6 and d1 < 1e-6)


def test_criterion_3_small_omega_law(report):
    def ratio(omega):
        val, _ = power_spectrum(omega)
        return ((val - omega / TWO_PI)
                / (omega ** 3 * np.log(omega / TWO_PI) / (4.0 * np.pi ** 3)))

    r1, r05 = ratio(0.1), ratio(0.05)
    ok = 0.8 < r1 < 1.2 and abs(r05 - 1.0) < abs(r1 - 1.0)
    report(3, f"ratio {r1:.4f} at 0.1, {r05:.4f} at 0.05", ok)


def test_criterion_4_dyson_limit(report, exact_series):
    k = np.arange(10, 41)
    ratios = exact_series[10:41] / (-1.0 / (2.0 * np.pi ** 2 * k ** 2.0))
    dev = np.abs(ratios - 1.0)
    # average deviation over sliding thirds must decrease toward large k
    thirds = [dev[:10].mean(), dev[10:20].mean(), dev[20:].mean()]
    ok = (np.all((ratios > 0.9) & (ratios < 1.1))
          and thirds[0] > thirds[1] > thirds[2])
    report(4, f"ratio range [{ratios.min():.4f}, {ratios.max():.4f}]", ok)


def test_criterion_5_beyond_dyson(report, exact_series):
    ks = np.array([10, 15, 20, 30, 40])
    scaled = np.array([k ** 4.0 * abs(exact_series[k] - ac.autocov_asymptotic(k))
                       for k in ks])
    ok = np.all(np.diff(scaled) < 0) and scaled[-1] < 0.05
    report(5, f"k^4 residual at k=40: {scaled[-1]:.1e}", ok)


def test_criterion_6_sum_rule(report, exact_series):
    # compressibility residual cancels the leading 1/(pi^2 K) Dyson tail
    series = ac.AutocovSeries(50, exact_series, "exact")
    res = ac.sum_rule_residual(50, series)
    corrected = abs(res - 1.0 / (np.pi ** 2 * 50))
    report(6, f"tail-corrected residual {corrected:.2e}", corrected < 1e-4)


def test_criterion_7_monte_carlo_vs_exact(report, mc_acceptance_run, exact_series):
    est = mc_acceptance_run.estimate
    hits = sum(abs(est.values[k] - exact_series[k]) <= est.half_widths[k]
               for k in range(1, 11))
    report(7, f"{hits}/10 lags inside the 99% CI", hits >= 8)


def test_criterion_8_figure_columns(report, mc_acceptance_run):
    est = mc_acceptance_run.estimate
    refined_ok = all(
        abs(est.values[k] - ac.autocov_asymptotic(k)) <= est.half_widths[k]
        for k in range(5, est.values.size))
    dyson_off = all(
        abs(est.values[k] - ac.autocov_dyson(k)) > est.half_widths[k]
        for k in (2, 3, 4))
    report(8, "refined consistent for k >= 5, bare Dyson rejected at k=2..4",
            refined_ok and dyson_off)


def test_criterion_9_variance_identity(report, mc_acceptance_run):
    est = mc_acceptance_run.estimate
    ok = True
    worst = 0.0
    for k in range(2, 11):
        second, half = mc_acceptance_run.second_difference(k)
        combined = np.hypot(half, est.half_widths[k])
        z = abs(second - est.values[k]) / combined
        worst = max(worst, z)
        ok = ok and z <= 1.0
    report(9, f"worst |diff|/CI = {worst:.2f} over k=2..10", ok)


def test_criterion_10_finite_n_identity(report, mc_acceptance_run):
    omegas = np.linspace(0.3, 3.0, 7)
    ok = True
    resid = {}
    for n in (64, 128):
        f = mc.finite_n_power_spectra(mc_acceptance_run.cov, n, omegas)
        rhs = (f.s_sp + f.s_sp0 - 2.0 * f.r_n / f.n) / (
            4.0 * np.sin(omegas / 2.0) ** 2)
        ok = ok and np.max(np.abs(f.s_eig - rhs)) < 1e-12
        resid[n] = np.mean(np.abs(f.r_n / f.n))
    # residual term is O(1/n): halving is the cleanest desk-scale probe
    scale_ok = 0.25 < resid[128] / resid[64] < 1.0
    report(10, f"identity exact; residual ratio n=128/64 = "
                f"{resid[128] / resid[64]:.2f}", ok and scale_ok)


def test_criterion_11_determinism(report, tmp_path):
    argv = ["montecarlo", "--n", "32", "--m", "600", "--seed", "7",
            "--k-max", "4"]
    outs = []
    for tag, threads in (("a", "1"), ("b", "2"), ("c", "1")):
        out = tmp_path / f"{tag}.csv"
        rc = main(argv + ["--threads", threads, "--out", str(out)])
        assert rc == 0
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1] == outs[2]
    report(11, "byte-identical reruns across thread counts", ok)
