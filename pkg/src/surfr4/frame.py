"""The geometric frame {x, y, b, l} and its eight invariant functions.

x and y are unit principal tangents, b is the unit normal along sigma(x, x)
and l completes a positively oriented orthonormal quadruple.  In this frame

    sigma(x, x) = nu1 b,   sigma(x, y) = lam b + mu l,   sigma(y, y) = nu2 b,

and the connection coefficients gamma1, gamma2, beta1, beta2 come from
central differences of the frame field along x and y.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegeneratePointError
from .pointwise import PointClass, dot, invariant_record, tangent_basis
from .surface_jets import evaluate_jet

FRAME_STEP = 1e-4
UMBILIC_GUARD = 1e-10
FALLBACK_TOL = 1e-8


@dataclass
class GeometricFrame:
    """Frame vectors (shape ``batch + (4,)``) and invariants (shape ``batch``)."""

    x: np.ndarray
    y: np.ndarray
    b: np.ndarray
    l: np.ndarray
    nu1: np.ndarray
    nu2: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    gamma1: Optional[np.ndarray] = None
    gamma2: Optional[np.ndarray] = None
    beta1: Optional[np.ndarray] = None
    beta2: Optional[np.ndarray] = None
    # parameter-space components of x and y, i.e. x = x_param[0] z_u + x_param[1] z_v
    x_param: Optional[np.ndarray] = None
    y_param: Optional[np.ndarray] = None
    b_fallback: np.ndarray = field(default_factory=lambda: np.array(False))
    position: Optional[np.ndarray] = None

    def matrix(self):
        """Rows x, y, b, l as a ``batch + (4, 4)`` array."""
        return np.stack([self.x, self.y, self.b, self.l], axis=-2)

    def invariants(self):
        return {name: getattr(self, name) for name in INVARIANT_NAMES}

    def flipped(self):
        """Same frame with (b, l) replaced by (-b, -l)."""
        neg = lambda a: None if a is None else -a
        return GeometricFrame(self.x, self.y, -self.b, -self.l, -self.nu1, -self.nu2, -self.lam,
                              -self.mu, self.gamma1, self.gamma2, neg(self.beta1), neg(self.beta2),
                              self.x_param, self.y_param, self.b_fallback, self.position)


INVARIANT_NAMES = ("gamma1", "gamma2", "nu1", "nu2", "lam", "mu", "beta1", "beta2")


def _sigma(rec, X, Y):
    """sigma(X, Y) for tangents given by coordinates in the (t1, t2) basis."""
    e = lambda a: a[..., None]
    return (e(X[0] * Y[0]) * rec.sigma11 + e(X[0] * Y[1] + X[1] * Y[0]) * rec.sigma12
            + e(X[1] * Y[1]) * rec.sigma22)


def _orient(vec, hint):
    if hint is None:
        return np.ones(vec.shape[:-1])
    return np.where(dot(vec, hint) < 0, -1.0, 1.0)


def pointwise_frame(model, p, hints=None):
    """Frame vectors and nu1, nu2, lam, mu at ``p`` without the derivative invariants.

    ``hints`` may hold reference vectors under keys "x", "y", "b"; each frame
    vector is then signed to have a nonnegative dot product with its hint.
    """
    hints = hints or {}
    jet = evaluate_jet(model, p, order=2)
    rec = invariant_record(jet)
    if np.any(rec.point_class == PointClass.FLAT):
        raise DegeneratePointError("geometric frame undefined at a flat point")
    kappa, k = rec.kappa, rec.k
    if np.any(kappa ** 2 - k < UMBILIC_GUARD * (kappa ** 2 + np.abs(k) + 1)):
        raise DegeneratePointError("geometric frame undefined at a minimal (umbilic) point")

    _, _, (a11, a21, a22) = tangent_basis(jet)
    e = lambda a: a[..., None]
    c, s = np.cos(rec.principal_angle), np.sin(rec.principal_angle)
    sx = _orient(e(c) * rec.t1 + e(s) * rec.t2, hints.get("x"))
    X = (sx * c, sx * s)
    x = e(X[0]) * rec.t1 + e(X[1]) * rec.t2
    sy = _orient(e(-X[1]) * rec.t1 + e(X[0]) * rec.t2, hints.get("y"))
    Y = (-sy * X[1], sy * X[0])
    y = e(Y[0]) * rec.t1 + e(Y[1]) * rec.t2

    sxx, syy, sxy = _sigma(rec, X, X), _sigma(rec, Y, Y), _sigma(rec, X, Y)
    nxx = np.linalg.norm(sxx, axis=-1)
    nyy = np.linalg.norm(syy, axis=-1)
    fallback = nxx <= FALLBACK_TOL * (nxx + nyy)
    if np.any(np.maximum(nxx, nyy) == 0):
        raise DegeneratePointError("sigma(x, x) and sigma(y, y) both vanish; b undefined")
    b = np.where(e(fallback), syy / e(np.where(nyy > 0, nyy, 1.0)), sxx / e(np.where(nxx > 0, nxx, 1.0)))
    nu1, nu2 = dot(sxx, b), dot(syy, b)
    if "b" in hints:
        sb = _orient(b, hints["b"])
    else:
        total = nu1 + nu2
        balanced = np.abs(total) <= FALLBACK_TOL * (np.abs(nu1) + np.abs(nu2))
        sb = np.where(balanced, np.where(nu1 >= nu2, 1.0, -1.0), np.sign(total))
    b = e(sb) * b
    nu1, nu2 = sb * nu1, sb * nu2
    e1, e2 = rec.frame.e1, rec.frame.e2
    rot_b = e(-dot(b, e2)) * e1 + e(dot(b, e1)) * e2
    l = e(sy) * rot_b
    return GeometricFrame(
        x, y, b, l, nu1, nu2, dot(sxy, b), dot(sxy, l),
        x_param=np.stack([a11 * X[0] + a21 * X[1], a22 * X[1]], axis=-1),
        y_param=np.stack([a11 * Y[0] + a21 * Y[1], a22 * Y[1]], axis=-1),
        b_fallback=fallback, position=jet.z)


def _neighbour_frames(model, p, centre, direction, step):
    u, v = (np.asarray(c, dtype=float) for c in p)
    hints = {"x": centre.x, "y": centre.y, "b": centre.b}
    d = direction * step
    plus = pointwise_frame(model, (u + d[..., 0], v + d[..., 1]), hints)
    minus = pointwise_frame(model, (u - d[..., 0], v - d[..., 1]), hints)
    return plus, minus


def _derivative_matrix(plus, minus, centre, step):
    """M[i, j] = <d Z_i, Z_j> for the central difference of the frame rows."""
    dZ = (plus.matrix() - minus.matrix()) / (2 * step)
    return np.einsum("...ik,...jk->...ij", dZ, centre.matrix())


def _differentiated(model, p, hints, step):
    centre = pointwise_frame(model, p, hints)
    Dx = _derivative_matrix(*_neighbour_frames(model, p, centre, centre.x_param, step), centre, step)
    Dy = _derivative_matrix(*_neighbour_frames(model, p, centre, centre.y_param, step), centre, step)
    return centre, Dx, Dy


def geometric_frame(model, p, hints=None, step=FRAME_STEP):
    """Geometric frame with all eight invariants at parameter point(s) ``p``.

    ``step`` is the ambient arclength of the central-difference stencil along
    x and along y.
    """
    centre, Dx, Dy = _differentiated(model, p, hints, step)
    _fill(centre, Dx, Dy)
    return centre


def _fill(frame, Dx, Dy):
    frame.gamma1 = Dx[..., 0, 1]
    frame.beta1 = Dx[..., 2, 3]
    frame.gamma2 = Dy[..., 1, 0]
    frame.beta2 = Dy[..., 2, 3]


def connection_matrices(frame):
    """The frame-derivative matrices along x and along y (metric factors stripped).

    Rows of d/dx (x, y, b, l) and d/dy (x, y, b, l) in the frame basis.
    """
    g1, g2, n1, n2 = frame.gamma1, frame.gamma2, frame.nu1, frame.nu2
    lam, mu, b1, b2 = frame.lam, frame.mu, frame.beta1, frame.beta2
    z = np.zeros_like(np.asarray(g1, dtype=float))
    P = np.array([[z, g1, n1, z], [-g1, z, lam, mu], [-n1, -lam, z, b1], [z, -mu, -b1, z]])
    Q = np.array([[z, -g2, lam, mu], [g2, z, n2, z], [-lam, -n2, z, b2], [-mu, z, -b2, z]])
    return np.moveaxis(P, (0, 1), (-2, -1)), np.moveaxis(Q, (0, 1), (-2, -1))


def frenet_residual(model, p, step=FRAME_STEP):
    """Max deviation of the differentiated frame from the Frenet-type system.

    Returns ``(residual_x, residual_y)``; both shrink as O(step^2).
    """
    centre, Dx, Dy = _differentiated(model, p, None, step)
    _fill(centre, Dx, Dy)
    P, Q = connection_matrices(centre)
    return (np.max(np.abs(Dx - P), axis=(-2, -1)), np.max(np.abs(Dy - Q), axis=(-2, -1)))


def allied_mean_curvature(frame):
    """a(H) = (sqrt(kappa^2 - k) / 2) lam l, with kappa^2 - k = (nu1 + nu2)^2 mu^2."""
    root = np.abs(frame.nu1 + frame.nu2) * np.abs(frame.mu)
    return (0.5 * root * frame.lam)[..., None] * frame.l
