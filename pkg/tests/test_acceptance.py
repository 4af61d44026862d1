"""End-to-end quantitative checks, one per verified statement.

Each test prints a single PASS/FAIL line with the measured quantity so a
full run doubles as a summary report.
"""

import math

import numpy as np
import pytest

from fracstable import (
    Grid,
    ModelParams,
    Symbol,
    approx_identity_trace,
    build_measure,
    critical_threshold_scan,
    empirical_vs_z,
    extend_solution,
    fit_decay,
    g_alpha,
    kernel_decay_fit,
    linear_evolution,
    mass_balance,
    ml,
    picard_solve,
    positivity_check,
    profile_error,
    sample_process,
    slope_solution,
    small_data_solve,
    y_field,
    y_from_z_check,
    z_field,
    z_subordination,
)
from fracstable.mittag_leffler import get_evaluator

from ml_oracle import ml_reference


def _report(num, ok, detail):
    line = f"CRITERION {num}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def _triple_setups():
    out = []
    for alpha, beta, d in ((0.5, 1.5, 1), (0.7, 1.2, 1), (0.5, 1.0, 2)):
        if d == 1:
            measure = build_measure({"dimension": 1, "atoms": [[1.0, 0.5], [-1.0, 0.5]]})
            grid = Grid(1, 200.0, 2048)
        else:
            measure = build_measure({"dimension": 2, "density": "uniform"})
            grid = Grid(2, 100.0, 512)
        params = ModelParams(alpha, beta, 2.0, -1.0, d)
        out.append((params, Symbol(measure, beta), grid))
    return out


def test_criterion_1_mass_identities():
    worst = 0.0
    for params, symbol, grid in _triple_setups():
        for t in (0.25, 1.0, 4.0, 16.0):
            zdef = abs(z_field(params, symbol, grid, t, check_tail=False).mass - 1.0)
            ga = float(g_alpha(params.alpha, t))
            ydef = abs(y_field(params, symbol, grid, t, check_tail=False).mass - ga) / ga
            worst = max(worst, zdef, ydef)
    _report(1, worst <= 1e-6, f"worst mass defect {worst:.2e} <= 1e-6")


def test_criterion_2_scaling_law():
    from fracstable import check_scaling

    worst = 0.0
    for params, symbol, grid in _triple_setups():
        for t in (0.25, 1.0, 4.0, 16.0):
            for kind in ("Z", "Y"):
                worst = max(worst, check_scaling(params, symbol, grid, t, kind))
    _report(2, worst <= 1e-8, f"worst scaling deviation {worst:.2e} <= 1e-8")


def test_criterion_3_cross_path_oracle():
    measure = build_measure({"dimension": 1, "atoms": [[1.0, 0.5], [-1.0, 0.5]]})
    symbol = Symbol(measure, 1.0)
    params = ModelParams(0.5, 1.0, 2.0, -1.0, 1)
    grid = Grid(1, 800.0, 1 << 23)
    field = z_field(params, symbol, grid, 1.0, check_tail=False)
    x = grid.axis()
    worst = 0.0
    for xv in (0.5, 1.0, 1.5, 2.0, 3.0):
        i = int(np.argmin(np.abs(x - xv)))
        spectral = field.values[i]
        mixture = z_subordination(params, symbol, 1.0, float(x[i]))
        worst = max(worst, abs(spectral - mixture) / abs(mixture))
    _report(3, worst <= 1e-4, f"worst relative gap {worst:.2e} <= 1e-4")


def test_criterion_4_mittag_leffler_oracle():
    xs = np.geomspace(1e-4, 1e4, 1000)
    worst = 0.0
    for alpha, delta in ((0.5, 1.0), (0.5, 0.5), (0.7, 1.0), (0.7, 0.7)):
        ev = get_evaluator(alpha, delta)
        vals = ev.ml_fast(xs)
        # oracle spot set: every 25th point keeps the runtime in seconds
        for i in range(0, len(xs), 25):
            ref = ml_reference(alpha, delta, float(xs[i]))
            worst = max(worst, abs(vals[i] - ref) / abs(ref))
    from scipy.special import erfc

    closed = max(abs(ml(1.0, 1.0, -1.0) - math.exp(-1.0)),
                 abs(ml(0.5, 1.0, -1.0) - math.e * erfc(1.0)))
    ok = worst <= 1e-10 and closed <= 1e-10
    _report(4, ok, f"worst oracle gap {worst:.2e}, closed-form gap {closed:.2e}")


def test_criterion_5_decay_exponents():
    times = np.geomspace(1.0, 64.0, 7)
    results = []
    for params, symbol, _ in _triple_setups():
        d = params.dimension
        grid = Grid(1, 200.0, 4096) if d == 1 else Grid(2, 60.0, 512)
        z_ps = [1.0, 2.0, math.inf] if d == 1 else [1.0]
        y_ps = [1.0, 2.0, math.inf] if d == 1 else [1.0, 2.0]
        for p in z_ps:
            fit = kernel_decay_fit(params, symbol, "Z", p, times, grid)
            results.append((f"Z p={p} b={params.beta} d={d}", fit))
        for p in y_ps:
            fit = kernel_decay_fit(params, symbol, "Y", p, times, grid)
            results.append((f"Y p={p} b={params.beta} d={d}", fit))
    bad = [(lbl, f.fitted_slope, f.theoretical_slope) for lbl, f in results if not f.passed]
    worst = max(abs(f.fitted_slope - f.theoretical_slope) for _, f in results)
    _report(5, not bad, f"{len(results)} fits, worst slope gap {worst:.3f} <= 0.02; bad={bad}")


def test_criterion_6_critical_thresholds():
    measure = build_measure({"dimension": 2, "density": "uniform"})
    params = ModelParams(0.5, 1.5, 2.0, 0.0, 2)
    symbol = Symbol(measure, 1.5)
    scan = critical_threshold_scan("Z", params, symbol, [2.0, 3.5, 4.0, 5.0],
                                   [64, 256, 1024, 4096], extent=30.0)
    classified = (scan.stabilized == (True, True, False, False)
                  and scan.diverged == (False, False, True, True))
    weak = kernel_decay_fit(params, symbol, "Z", 4.0, np.geomspace(1.0, 64.0, 7),
                            Grid(2, 60.0, 512), slope_tol=0.05, weak=True)
    ok = classified and weak.passed
    _report(6, ok, f"stabilized={scan.stabilized}, diverged={scan.diverged}, "
                   f"weak slope {weak.fitted_slope:.3f} vs {weak.theoretical_slope}")


def test_criterion_7_y_from_z(params_nl, symbol_15):
    e_spec = y_from_z_check(params_nl, symbol_15, x=1.0, t=1.0, h=1e-3)
    # the convergence-order ratio is measured at small t where the central
    # difference error is not yet at the rounding floor
    e1 = y_from_z_check(params_nl, symbol_15, x=0.3, t=0.012, h=1e-3)
    e2 = y_from_z_check(params_nl, symbol_15, x=0.3, t=0.012, h=5e-4)
    ratio = e1 / e2
    ok = e_spec <= 1e-3 and 3.0 <= ratio <= 5.0
    _report(7, ok, f"error {e_spec:.2e} <= 1e-3, halving ratio {ratio:.2f} in [3, 5]")


def test_criterion_8_approximate_identity(params_nl, symbol_15, grid_1d, bump):
    times = [1.0, 0.1, 0.01, 0.001]
    traces = {kind: approx_identity_trace(params_nl, symbol_15, grid_1d, bump,
                                          times, kind)
              for kind in ("Z", "Y")}
    ok = all(np.all(np.diff(tr) < 0) for tr in traces.values())
    _report(8, ok, "both normalized convolution traces strictly decreasing, "
                   f"final Z={traces['Z'][-1]:.2e}, Y={traces['Y'][-1]:.2e}")


def test_criterion_9_solver(params_nl, symbol_15, grid_1d, bump):
    linear_params = ModelParams(0.5, 1.5, 2.0, 0.0, 1)
    lin = picard_solve(bump, linear_params, symbol_15, grid_1d, T=1.0, M=16)
    gap = max(np.max(np.abs(lin.fields[k]
                            - linear_evolution(linear_params, symbol_15, grid_1d,
                                               bump, lin.times[k])))
              for k in (4, 8, 16))
    traj = picard_solve(bump, params_nl, symbol_15, grid_1d, T=1.0, M=64, tol=1e-10)
    defect = abs(mass_balance(traj))
    minval = positivity_check(traj)
    dom = max(np.max(traj.fields[k]
                     - linear_evolution(params_nl, symbol_15, grid_1d, bump,
                                        traj.times[k]))
              for k in range(1, len(traj.times)))
    ok = (gap <= 1e-8 and traj.converged and traj.q <= 0.9
          and defect <= 1e-4 and minval >= -1e-6 and dom <= 1e-6)
    _report(9, ok, f"linear gap {gap:.1e}, q={traj.q:.3f}, mass defect {defect:.1e}, "
                   f"min {minval:.1e}, domination excess {dom:.1e}")


def test_criterion_10_solution_decay(symbol_15):
    params = ModelParams(0.5, 1.5, 5.0, -1.0, 1)
    grid = Grid(1, 100.0, 2048)
    x = grid.axis()
    u0 = 0.5 * np.exp(-((x / 0.25) ** 2))
    base = small_data_solve(u0, params, symbol_15, grid, T=1.0, p=4.0, p_prime=1.0,
                            M=48, tol=1e-10)
    ext = extend_solution(base, 32.0, M=62, tol=1e-10)
    targets = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
    idx = [int(np.argmin(np.abs(ext.times - t))) for t in targets]
    times = ext.times[idx]
    from fracstable.kernels import KernelField

    fields = [KernelField(grid, float(times[i]), "Z",
                          np.ascontiguousarray(ext.fields[k]), params)
              for i, k in enumerate(idx)]
    fit_p = fit_decay("solution", 4.0, times, fields, slope_tol=0.05, p_prime=1.0)
    fit_inf = fit_decay("solution", math.inf, times, fields, slope_tol=0.05, p_prime=1.0)
    prof = profile_error(ext, 4.0, 1.0, t_min=1.0)
    i8 = int(np.argmin(np.abs(prof.times - 8.0)))
    shrinks = prof.normalized[-1] < prof.normalized[i8]
    ok = fit_p.passed and fit_inf.passed and shrinks
    _report(10, ok, f"slope(p=4) {fit_p.fitted_slope:.3f} vs {fit_p.theoretical_slope:.3f}, "
                    f"slope(inf) {fit_inf.fitted_slope:.3f} vs {fit_inf.theoretical_slope:.3f}, "
                    f"profile error {prof.normalized[i8]:.3f} -> {prof.normalized[-1]:.3f}")


def test_criterion_11_monte_carlo():
    measure = build_measure({"dimension": 1, "atoms": [[1.0, 0.5], [-1.0, 0.5]]})
    params = ModelParams(0.5, 1.0, 2.0, -1.0, 1)
    symbol = Symbol(measure, 1.0)
    grid = Grid(1, 4000.0, 1 << 19)
    n = 100_000
    stat = empirical_vs_z(params, symbol, grid, 1.0, n, seed=2026)
    critical = 1.36 / math.sqrt(n)
    a = sample_process(params, measure, 1.0, n, seed=2026)
    b = sample_process(params, measure, 1.0, n, seed=2026)
    ok = stat <= critical and np.array_equal(a.samples, b.samples)
    _report(11, ok, f"KS {stat:.4f} <= {critical:.4f} at the 5% level, "
                    "resampling bit-identical")
