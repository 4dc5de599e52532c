"""Sampling and comparison helpers shared by the test modules."""

import numpy as np

from surfr4.surface_jets import catalog

# (catalog name, parameters) used for randomized sweeps
SWEEP_SURFACES = [
    ("clifford_torus", [1.0]),
    ("holomorphic_graph", []),
    ("generic_graph", []),
    ("graph", [0.7, -0.3, 0.2, 0.1, 0.9, -0.4]),
    ("meridian_cmc", [1.0, 0.5]),
    ("meridian_constant_K", [1.0, 0.0, 1.0]),
    ("meridian_constant_k", [1.0, 1.0]),
]

# surfaces free of minimal points, where the geometric frame exists
FRAMED_SURFACES = [s for s in SWEEP_SURFACES if s[0] != "holomorphic_graph"]


def random_points(model, n, rng, margin=0.05):
    """n parameter points drawn uniformly from the domain shrunk by ``margin`` of its size."""
    (u0, u1), (v0, v1) = model.domain
    du, dv = (u1 - u0) * margin, (v1 - v0) * margin
    return (rng.uniform(u0 + du, u1 - du, n), rng.uniform(v0 + dv, v1 - dv, n))


def sweep_models():
    return [(name, catalog(name, params)) for name, params in SWEEP_SURFACES]


def rel_close(a, b, rtol, floor=1.0):
    """|a - b| <= rtol * max(|a|, |b|, floor) elementwise."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.abs(a - b) <= rtol * np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def observed_orders(errors):
    """log2 ratios of successive errors under step halving."""
    e = np.asarray(errors, dtype=float)
    return np.log2(e[:-1] / e[1:])


# acceptance verdicts, echoed in the terminal summary by conftest
ACCEPTANCE_LINES = []


def verdict(number, title, ok, detail):
    line = f"CRITERION {number:2d} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok
