"""The tangent indicatrix, the ellipse of normal curvature and the class predicates."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .pointwise import PointClass, dot, invariant_record

EQ_TOL = 1e-8
RANK_TOL = 1e-10


def nearly_equal(a, b, tol=EQ_TOL):
    """|a - b| < tol * (|a| + |b| + 1)."""
    return abs(a - b) < tol * (abs(a) + abs(b) + 1)


class IndicatrixKind(Enum):
    CIRCLE = "circle"
    ELLIPSE = "ellipse"
    RECTANGULAR_HYPERBOLA = "rectangular_hyperbola"
    HYPERBOLA = "hyperbola"
    PARALLEL_LINES = "parallel_lines"
    UNDEFINED = "undefined"


@dataclass
class IndicatrixClass:
    """Conic nu' X^2 + nu'' Y^2 = +-1 in principal axes.

    ``semi_axes`` are 1/sqrt|nu'| and 1/sqrt|nu''|; an infinite entry marks
    the direction of the parallel lines.
    """

    kind: IndicatrixKind
    semi_axes: tuple


def classify_indicatrix(nu_prime, nu_doubleprime, flat=False):
    n1, n2 = float(nu_prime), float(nu_doubleprime)
    zero1, zero2 = nearly_equal(n1, 0.0), nearly_equal(n2, 0.0)
    if flat or (zero1 and zero2):
        return IndicatrixClass(IndicatrixKind.UNDEFINED, (np.inf, np.inf))
    axes = tuple(np.inf if z else 1 / np.sqrt(abs(n)) for n, z in ((n1, zero1), (n2, zero2)))
    if nearly_equal(n1, n2):
        kind = IndicatrixKind.CIRCLE
    elif nearly_equal(n1, -n2):
        kind = IndicatrixKind.RECTANGULAR_HYPERBOLA
    elif zero1 or zero2:
        kind = IndicatrixKind.PARALLEL_LINES
    elif n1 * n2 > 0:
        kind = IndicatrixKind.ELLIPSE
    else:
        kind = IndicatrixKind.HYPERBOLA
    return IndicatrixClass(kind, axes)


def indicatrix(record):
    """Classify the tangent indicatrix of a single-point record."""
    return classify_indicatrix(record.nu_prime, record.nu_doubleprime,
                               flat=record.point_class == PointClass.FLAT)


@dataclass
class CurvatureEllipse:
    center: np.ndarray
    half_diameter_1: np.ndarray
    half_diameter_2: np.ndarray
    area: float
    degenerate_segment: bool
    # d = sqrt(|H|^2 - K), the distance from the centre to either endpoint
    segment_length: Optional[float]
    K_zero: bool
    frame: object = None

    def point(self, psi):
        """sigma(v, v) for v = cos(psi) x + sin(psi) y."""
        psi = np.asarray(psi, dtype=float)[..., None]
        return (self.center + np.cos(2 * psi) * self.half_diameter_1
                + np.sin(2 * psi) * self.half_diameter_2)


def _normal_area(a, b, frame):
    return dot(a, frame.e1) * dot(b, frame.e2) - dot(a, frame.e2) * dot(b, frame.e1)


def curvature_ellipse(jet, record=None):
    """Ellipse swept by sigma(v, v) over the unit tangent circle."""
    rec = invariant_record(jet) if record is None else record
    h1 = 0.5 * (rec.sigma11 - rec.sigma22)
    h2 = rec.sigma12.copy()
    oriented = float(_normal_area(h1, h2, rec.frame))
    spread = float(dot(h1, h1) + dot(h2, h2))
    degenerate = abs(oriented) <= RANK_TOL * spread or spread == 0.0
    length = float(np.sqrt(spread)) if degenerate else None
    return CurvatureEllipse(rec.H.copy(), h1, h2, np.pi * abs(oriented), degenerate, length,
                            bool(nearly_equal(float(rec.K), 0.0)), rec.frame)


def segment_collinear_with_H(ellipse):
    """Whether a degenerate ellipse lies along the mean curvature vector."""
    h1, h2 = ellipse.half_diameter_1, ellipse.half_diameter_2
    s = h1 if dot(h1, h1) >= dot(h2, h2) else h2
    H = ellipse.center
    nH, ns = np.linalg.norm(H), np.linalg.norm(s)
    if nH == 0.0 or ns == 0.0:
        return True
    return abs(float(_normal_area(H, s, ellipse.frame))) <= EQ_TOL * nH * ns


@dataclass
class ClassPredicates:
    flat_point: bool
    minimal: bool
    flat_normal_connection: bool
    super_conformal: bool
    wintgen_ideal: bool
    # None when no geometric frame was supplied
    chen_nontrivial: Optional[bool]
    wintgen_slack: float


def class_predicates(record, frame=None, ellipse=None):
    """Pointwise class tests.  ``frame`` (a GeometricFrame) enables the Chen test."""
    flat = record.point_class == PointClass.FLAT
    kappa = float(record.kappa)
    scale = abs(float(record.nu_prime)) + abs(float(record.nu_doubleprime))
    gap = np.sqrt(max(float(record.umbilic_gap), 0.0))
    minimal = nearly_equal(gap, 0.0, EQ_TOL * (1 + scale))
    flat_normal = nearly_equal(kappa, 0.0, EQ_TOL * (1 + scale))
    h1 = 0.5 * (record.sigma11 - record.sigma22)
    h2 = record.sigma12
    n1, n2 = float(np.linalg.norm(h1)), float(np.linalg.norm(h2))
    circle = nearly_equal(n1, n2) and abs(float(dot(h1, h2))) < EQ_TOL * (n1 * n2 + 1)
    slack = float(record.H_norm ** 2 - record.K - abs(kappa))
    wintgen = nearly_equal(slack, 0.0, EQ_TOL * (1 + scale ** 2))
    chen = None
    if frame is not None:
        chen = bool(nearly_equal(frame.lam, 0.0) and not minimal)
    return ClassPredicates(bool(flat), bool(minimal), bool(flat_normal), bool(circle and not flat),
                           bool(wintgen), chen, slack)
