"""Pointwise invariants of a surface in R^4.

Everything here works on a single jet or on a batch of jets (vector fields of
shape ``batch + (4,)``).  Scalars come back as arrays of shape ``batch``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import DegeneratePointError, InputError
from .surface_jets import gram

FLAT_TOL = 1e-10
UMBILIC_TOL = 1e-10


def dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def det4(a, b, c, d):
    return np.linalg.det(np.stack([a, b, c, d], axis=-2))


class PointClass(IntEnum):
    FLAT = 0
    ELLIPTIC = 1
    PARABOLIC = 2
    HYPERBOLIC = 3


@dataclass
class FirstFundamental:
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    W: np.ndarray


@dataclass
class NormalFrame:
    e1: np.ndarray
    e2: np.ndarray


@dataclass
class SecondFundamentalData:
    """c[..., r, n]: rows (uu, uv, vv), columns normal index."""

    c: np.ndarray
    Delta1: np.ndarray
    Delta2: np.ndarray
    Delta3: np.ndarray
    L: np.ndarray
    M: np.ndarray
    N: np.ndarray


@dataclass
class TangentDirection:
    """Tangent X = lam * z_u + mu * z_v (coordinates in the coordinate basis)."""

    lam: float
    mu: float

    def vector(self):
        return np.array([self.lam, self.mu], dtype=float)


ALL_PRINCIPAL = "all-principal"


@dataclass
class InvariantRecord:
    first: FirstFundamental
    second: SecondFundamentalData
    gamma_matrix: np.ndarray
    k: np.ndarray
    kappa: np.ndarray
    K: np.ndarray
    H: np.ndarray
    H_norm: np.ndarray
    nu_prime: np.ndarray
    nu_doubleprime: np.ndarray
    point_class: object
    # supporting geometry in an orthonormal tangent basis (t1, t2)
    t1: np.ndarray = None
    t2: np.ndarray = None
    frame: NormalFrame = None
    sigma11: np.ndarray = None
    sigma12: np.ndarray = None
    sigma22: np.ndarray = None
    shape_matrix: np.ndarray = None
    principal_angle: np.ndarray = None
    scale: np.ndarray = None

    @property
    def umbilic_gap(self):
        """kappa^2 - k, zero exactly at minimal points."""
        return self.kappa ** 2 - self.k


def tangent_basis(jet):
    """Orthonormal tangent basis (t1, t2) with t1 along z_u, same orientation as (z_u, z_v).

    Also returns the coefficients with t1 = a11 z_u, t2 = a21 z_u + a22 z_v.
    """
    E, F, G = gram(jet)
    W = np.sqrt(E * G - F * F)
    sE = np.sqrt(E)
    a11 = 1 / sE
    a21 = -F / (sE * W)
    a22 = sE / W
    t1 = jet.z_u * a11[..., None]
    t2 = jet.z_u * a21[..., None] + jet.z_v * a22[..., None]
    return t1, t2, (a11, a21, a22)


def normal_frame(jet):
    """Deterministic positively oriented orthonormal normal frame.

    The two ambient basis vectors with the smallest tangential component are
    projected onto the normal plane and orthonormalized; e2 is flipped when
    det(z_u, z_v, e1, e2) < 0.
    """
    t1, t2, _ = tangent_basis(jet)
    tangential = t1 ** 2 + t2 ** 2
    order = np.argsort(tangential, axis=-1, kind="stable")
    eye = np.eye(4)
    n = []
    for slot in range(2):
        k = order[..., slot]
        e = eye[k]
        proj = e - t1 * np.take_along_axis(t1, k[..., None], -1) - t2 * np.take_along_axis(t2, k[..., None], -1)
        n.append(proj)
    e1 = n[0] / np.linalg.norm(n[0], axis=-1, keepdims=True)
    e2 = n[1] - e1 * dot(n[1], e1)[..., None]
    e2 = e2 / np.linalg.norm(e2, axis=-1, keepdims=True)
    sign = np.sign(det4(jet.z_u, jet.z_v, e1, e2))
    e2 = e2 * np.where(sign == 0, 1.0, sign)[..., None]
    return NormalFrame(e1, e2)


def _cross2(a, b):
    """Oriented area of two normal vectors given as (..., 2) coordinates."""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def fundamental_data(jet, frame):
    """First fundamental form and the oriented-area second-order data."""
    E, F, G = gram(jet)
    W = np.sqrt(E * G - F * F)
    basis = np.stack([frame.e1, frame.e2], axis=-1)        # (..., 4, 2)
    second = np.stack([jet.z_uu, jet.z_uv, jet.z_vv], axis=-2)  # (..., 3, 4)
    c = np.einsum("...ri,...in->...rn", second, basis)
    d1 = _cross2(c[..., 0, :], c[..., 1, :])
    d2 = _cross2(c[..., 0, :], c[..., 2, :])
    d3 = _cross2(c[..., 1, :], c[..., 2, :])
    return (FirstFundamental(E, F, G, W),
            SecondFundamentalData(c, d1, d2, d3, 2 * d1 / W, d2 / W, 2 * d3 / W))


def _principal_from_shape(S):
    """Eigen-structure of the symmetric 2x2 second form in an orthonormal basis.

    Returns (angle of first principal direction in [0, pi), nu', nu'').  The
    first direction is the one with the smaller angle in [0, pi).
    """
    s11, s12, s22 = S[..., 0, 0], S[..., 0, 1], S[..., 1, 1]
    mean = 0.5 * (s11 + s22)
    r = np.hypot(0.5 * (s11 - s22), s12)
    theta_max = np.mod(0.5 * np.arctan2(2 * s12, s11 - s22), np.pi)
    theta_min = np.mod(theta_max + 0.5 * np.pi, np.pi)
    first_is_max = theta_max <= theta_min
    angle = np.where(first_is_max, theta_max, theta_min)
    nu1 = np.where(first_is_max, mean + r, mean - r)
    nu2 = np.where(first_is_max, mean - r, mean + r)
    return angle, nu1, nu2


def invariant_record(jet, frame=None):
    """All pointwise invariants at the jet's point(s)."""
    if frame is None:
        frame = normal_frame(jet)
    first, second = fundamental_data(jet, frame)
    E, F, G, W = first.E, first.F, first.G, first.W
    L, M, N = second.L, second.M, second.N
    W2 = W * W
    gamma = np.stack([
        np.stack([(F * M - G * L) / W2, (F * L - E * M) / W2], axis=-1),
        np.stack([(F * N - G * M) / W2, (F * M - E * N) / W2], axis=-1),
    ], axis=-2)
    k = (L * N - M * M) / W2
    kappa = (E * N + G * L - 2 * F * M) / (2 * W2)

    t1, t2, (a11, a21, a22) = tangent_basis(jet)
    e = np.stack([frame.e1, frame.e2], axis=-2)               # (..., 2, 4)
    s_uu = np.einsum("...n,...ni->...i", second.c[..., 0, :], e)
    s_uv = np.einsum("...n,...ni->...i", second.c[..., 1, :], e)
    s_vv = np.einsum("...n,...ni->...i", second.c[..., 2, :], e)
    x = lambda a: a[..., None]
    sigma11 = x(a11 ** 2) * s_uu
    sigma12 = x(a11 * a21) * s_uu + x(a11 * a22) * s_uv
    sigma22 = x(a21 ** 2) * s_uu + x(2 * a21 * a22) * s_uv + x(a22 ** 2) * s_vv
    K = dot(sigma11, sigma22) - dot(sigma12, sigma12)
    H = 0.5 * (sigma11 + sigma22)

    S = np.stack([
        np.stack([a11 ** 2 * L, a11 * (a21 * L + a22 * M)], axis=-1),
        np.stack([a11 * (a21 * L + a22 * M), a21 ** 2 * L + 2 * a21 * a22 * M + a22 ** 2 * N], axis=-1),
    ], axis=-2)
    angle, nu1, nu2 = _principal_from_shape(S)

    scale = jet.scale()
    tol = FLAT_TOL * (1 + scale)
    flat = np.maximum(np.maximum(np.abs(L), np.abs(M)), np.abs(N)) < tol
    cls = np.where(flat, PointClass.FLAT,
                   np.where(np.abs(k) < tol, PointClass.PARABOLIC,
                            np.where(k > 0, PointClass.ELLIPTIC, PointClass.HYPERBOLIC)))
    if np.ndim(cls) == 0:
        cls = PointClass(int(cls))

    return InvariantRecord(first, second, gamma, k, kappa, K, H, np.linalg.norm(H, axis=-1),
                           nu1, nu2, cls, t1, t2, frame, sigma11, sigma12, sigma22, S, angle, scale)


# directions ---------------------------------------------------------------

def _forms(jet):
    first, second = fundamental_data(jet, normal_frame(jet))
    return first, second


def _check_direction(g):
    if g.lam == 0 and g.mu == 0:
        raise InputError("zero tangent direction")


def _I(first, g1, g2):
    return (first.E * g1.lam * g2.lam + first.F * (g1.lam * g2.mu + g1.mu * g2.lam)
            + first.G * g1.mu * g2.mu)


def _II(second, g1, g2):
    return (second.L * g1.lam * g2.lam + second.M * (g1.lam * g2.mu + g1.mu * g2.lam)
            + second.N * g1.mu * g2.mu)


def zeta(jet, g1, g2):
    """Conjugacy invariant of two tangents; zero iff they are conjugate."""
    _check_direction(g1)
    _check_direction(g2)
    first, second = _forms(jet)
    return _II(second, g1, g2) / np.sqrt(_I(first, g1, g1) * _I(first, g2, g2))


def normal_curvature(jet, g):
    """nu_g = II / I."""
    _check_direction(g)
    first, second = _forms(jet)
    return _II(second, g, g) / _I(first, g, g)


def geodesic_torsion(jet, g):
    """alpha_g; zero iff g is principal."""
    _check_direction(g)
    first, second = _forms(jet)
    E, F, G, W = first.E, first.F, first.G, first.W
    L, M, N = second.L, second.M, second.N
    lam, mu = g.lam, g.mu
    num = lam ** 2 * (E * M - F * L) + lam * mu * (E * N - G * L) + mu ** 2 * (F * N - G * M)
    return num / (W * _I(first, g, g))


def orthogonal_direction(jet, g):
    """The tangent obtained by turning g through +90 degrees (same I-length)."""
    E, F, G = gram(jet)
    W = np.sqrt(E * G - F * F)
    return TangentDirection(float(-(F * g.lam + G * g.mu) / W), float((E * g.lam + F * g.mu) / W))


def _direction_at_angle(jet, theta):
    _, _, (a11, a21, a22) = tangent_basis(jet)
    c, s = np.cos(theta), np.sin(theta)
    return TangentDirection(float(a11 * c + a21 * s), float(a22 * s))


def _umbilic(record):
    gap = np.sqrt(np.maximum(record.umbilic_gap, 0.0))
    return gap <= UMBILIC_TOL * (np.abs(record.kappa) + gap)


def principal_directions(jet):
    """Unit principal tangents ordered by angle in [0, pi), or ALL_PRINCIPAL."""
    rec = invariant_record(jet)
    if _umbilic(rec):
        return ALL_PRINCIPAL
    theta = rec.principal_angle
    return _direction_at_angle(jet, theta), _direction_at_angle(jet, theta + 0.5 * np.pi)


def principal_normal_curvatures(jet):
    """(nu', nu'') -- normal curvatures of the ordered principal tangents."""
    rec = invariant_record(jet)
    return float(rec.nu_prime), float(rec.nu_doubleprime)


def asymptotic_directions(jet):
    """Asymptotic tangents (nu_g = 0): two at hyperbolic, one at parabolic, none at elliptic points."""
    rec = invariant_record(jet)
    cls = rec.point_class
    if cls == PointClass.FLAT:
        raise DegeneratePointError("every tangent is asymptotic at a flat point")
    if cls == PointClass.ELLIPTIC:
        return []
    theta = float(rec.principal_angle)
    n1, n2 = float(rec.nu_prime), float(rec.nu_doubleprime)
    if cls == PointClass.PARABOLIC:
        angle = theta + 0.5 * np.pi if abs(n2) < abs(n1) else theta
        return [_direction_at_angle(jet, angle)]
    phi = np.arctan(np.sqrt(-n1 / n2))
    angles = sorted(np.mod([theta + phi, theta - phi], np.pi))
    return [_direction_at_angle(jet, a) for a in angles]


def normal_connection_commutator(jet):
    """Curvature of the normal connection from the shape-operator commutator.

    With A_k the shape operators of e1, e2 in an orthonormal tangent basis,
    (A2 A1 - A1 A2) x = kappa y.
    """
    rec = invariant_record(jet)
    ops = []
    for e in (rec.frame.e1, rec.frame.e2):
        a, b, c = dot(rec.sigma11, e), dot(rec.sigma12, e), dot(rec.sigma22, e)
        ops.append(np.stack([np.stack([a, b], -1), np.stack([b, c], -1)], -2))
    A1, A2 = ops
    C = A2 @ A1 - A1 @ A2
    return C[..., 1, 0]
