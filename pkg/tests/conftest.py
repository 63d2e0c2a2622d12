import math

import numpy as np

# Systematic rounding in f and in the stored exact integral is a few ulps;
# for C-infinity integrands the true estimator error is far below that,
# so "within 3 SE" alone would test the floating-point format.
ROUNDING_ALLOWANCE = 16 * np.finfo(float).eps


def unbiased_within(estimates, exact, k=3.0):
    """(ok, z) for |mean - exact| <= k SE + rounding allowance."""
    est = np.asarray(estimates, dtype=float)
    mean = math.fsum(est) / len(est)
    se = est.std(ddof=1) / math.sqrt(len(est))
    slack = ROUNDING_ALLOWANCE * abs(exact)
    dev = abs(mean - exact)
    return dev <= k * se + slack, dev / se if se > 0 else math.inf


def composite_gl(fn, d, panels=64, order=20):
    """Tensor composite Gauss-Legendre rule on the unit cube applied to ``fn``."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0, 1, panels + 1)
    nodes = ((edges[:-1, None] + edges[1:, None]) / 2 + (x / (2 * panels))).ravel()
    weights = np.tile(w / (2 * panels), panels)
    grids = np.meshgrid(*([nodes] * d), indexing="ij")
    wgrid = np.prod(np.meshgrid(*([weights] * d), indexing="ij"), axis=0)
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return math.fsum(fn(pts) * wgrid.ravel())


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
