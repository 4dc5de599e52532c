"""Parametric surfaces z(u, v) in R^4 and their derivative jets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ImmersionError, InputError
from .taylor import Taylor

_DERIVS2 = [("z", 0, 0), ("z_u", 1, 0), ("z_v", 0, 1),
            ("z_uu", 2, 0), ("z_uv", 1, 1), ("z_vv", 0, 2)]
_DERIVS3 = [("z_uuu", 3, 0), ("z_uuv", 2, 1), ("z_uvv", 1, 2), ("z_vvv", 0, 3)]

IMMERSION_TOL = 1e-12


@dataclass
class SurfaceJet:
    """Position and partial derivatives at one (or a batch of) parameter points.

    Every vector field has shape ``batch + (4,)``.  Third derivatives are
    ``None`` when ``order == 2``.
    """

    z: np.ndarray
    z_u: np.ndarray
    z_v: np.ndarray
    z_uu: np.ndarray
    z_uv: np.ndarray
    z_vv: np.ndarray
    z_uuu: Optional[np.ndarray] = None
    z_uuv: Optional[np.ndarray] = None
    z_uvv: Optional[np.ndarray] = None
    z_vvv: Optional[np.ndarray] = None
    order: int = 2

    @property
    def batch_shape(self):
        return self.z.shape[:-1]

    def take(self, index):
        """Jet at one batch index."""
        kw = {name: (None if getattr(self, name) is None else getattr(self, name)[index])
              for name, _, _ in _DERIVS2 + _DERIVS3}
        return SurfaceJet(order=self.order, **kw)

    def scale(self):
        """Sum of squared norms of the first and second derivative vectors."""
        return sum(np.einsum("...i,...i->...", d, d)
                   for d in (self.z_u, self.z_v, self.z_uu, self.z_uv, self.z_vv))


def gram(jet):
    """First fundamental form coefficients (E, F, G)."""
    E = np.einsum("...i,...i->...", jet.z_u, jet.z_u)
    F = np.einsum("...i,...i->...", jet.z_u, jet.z_v)
    G = np.einsum("...i,...i->...", jet.z_v, jet.z_v)
    return E, F, G


def check_immersion(jet, tol=IMMERSION_TOL):
    E, F, G = gram(jet)
    bad = E * G - F * F <= tol * np.maximum(E, G) ** 2
    if np.any(bad):
        raise ImmersionError(f"degenerate jet at {int(np.sum(bad))} point(s): EG - F^2 too small")


@dataclass
class SurfaceModel:
    """A surface patch with an analytic jet evaluator.

    ``evaluator(u, v, order)`` takes arrays of parameters and returns a
    :class:`SurfaceJet`.  ``periodic`` flags axes whose parameter wraps with
    the domain width; points on periodic axes are reduced before evaluation.
    """

    evaluator: Callable[..., SurfaceJet]
    domain: tuple
    label: str
    periodic: tuple = (False, False)
    position: Optional[Callable] = None
    info: dict = field(default_factory=dict)

    def wrap(self, u, v):
        (u0, u1), (v0, v1) = self.domain
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.periodic[0]:
            u = u0 + np.mod(u - u0, u1 - u0)
        if self.periodic[1]:
            v = v0 + np.mod(v - v0, v1 - v0)
        return u, v

    def contains(self, u, v, margin=0.0):
        (u0, u1), (v0, v1) = self.domain
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        ok_u = True if self.periodic[0] else (u >= u0 + margin) & (u <= u1 - margin)
        ok_v = True if self.periodic[1] else (v >= v0 + margin) & (v <= v1 - margin)
        return np.logical_and(ok_u, ok_v) & np.isfinite(u) & np.isfinite(v)

    def size(self):
        (u0, u1), (v0, v1) = self.domain
        return max(u1 - u0, v1 - v0)

    def point(self, u, v):
        """Surface position only."""
        u, v = self.wrap(u, v)
        if self.position is not None:
            return self.position(u, v)
        return self.evaluator(u, v, 2).z


def from_coordinates(coords, domain, label, periodic=(False, False), info=None):
    """Build a model from a coordinate formula ``coords(u, v) -> 4 expressions``.

    The formula must be written with arithmetic and numpy ufuncs only, so it
    can run on :class:`~surfr4.taylor.Taylor` variables.
    """

    def evaluator(u, v, order):
        U = Taylor.variable(u, 0, degree=order)
        V = Taylor.variable(v, 1, degree=order)
        shape = np.broadcast_shapes(np.shape(u), np.shape(v))
        comps = []
        for c in coords(U, V):
            if not isinstance(c, Taylor):
                c = Taylor.constant(c, degree=order, shape=shape)
            comps.append(c)
        names = _DERIVS2 + (_DERIVS3 if order == 3 else [])
        out = {}
        for name, i, j in names:
            out[name] = np.stack([np.broadcast_to(c.derivative(i, j), shape) for c in comps], axis=-1)
        return SurfaceJet(order=order, **out)

    def position(u, v):
        shape = np.broadcast_shapes(np.shape(u), np.shape(v))
        return np.stack([np.broadcast_to(np.asarray(c, dtype=float), shape) for c in coords(u, v)], axis=-1)

    return SurfaceModel(evaluator, tuple(map(tuple, domain)), label, tuple(periodic), position, dict(info or {}))


def _check_point(model, u, v, margin=0.0):
    if not np.all(model.contains(u, v, margin)):
        raise DomainError(f"parameter point outside the domain of {model.label}: {model.domain}")


def evaluate_jet(model, p, order=2):
    """Analytic jet of ``model`` at parameter point(s) ``p = (u, v)``."""
    if order not in (2, 3):
        raise InputError("jet order must be 2 or 3")
    u, v = p
    _check_point(model, u, v)
    u, v = model.wrap(u, v)
    jet = model.evaluator(u, v, order)
    check_immersion(jet)
    return jet


def default_fd_step(model):
    return np.finfo(float).eps ** 0.25 * model.size()


def finite_difference_jet(model, p, h=None, order=2):
    """Central-difference estimate of the jet; O(h^2) accurate."""
    if h is None:
        h = default_fd_step(model)
    if not h > 0:
        raise InputError("finite-difference step must be positive")
    u, v = (np.asarray(c, dtype=float) for c in p)
    reach = 2 * h if order == 3 else h
    for du in (-reach, reach):
        _check_point(model, u + du, v)
        _check_point(model, u, v + du)
        _check_point(model, u + du, v + du)
        _check_point(model, u + du, v - du)

    def f(a, b):
        return model.point(u + a * h, v + b * h)

    f00 = f(0, 0)
    fp0, fm0, f0p, f0m = f(1, 0), f(-1, 0), f(0, 1), f(0, -1)
    fpp, fpm, fmp, fmm = f(1, 1), f(1, -1), f(-1, 1), f(-1, -1)
    out = dict(
        z=f00,
        z_u=(fp0 - fm0) / (2 * h),
        z_v=(f0p - f0m) / (2 * h),
        z_uu=(fp0 - 2 * f00 + fm0) / h ** 2,
        z_uv=(fpp - fpm - fmp + fmm) / (4 * h ** 2),
        z_vv=(f0p - 2 * f00 + f0m) / h ** 2,
    )
    if order == 3:
        out["z_uuu"] = (f(2, 0) - 2 * fp0 + 2 * fm0 - f(-2, 0)) / (2 * h ** 3)
        out["z_vvv"] = (f(0, 2) - 2 * f0p + 2 * f0m - f(0, -2)) / (2 * h ** 3)
        out["z_uuv"] = ((fpp - 2 * f0p + fmp) - (fpm - 2 * f0m + fmm)) / (2 * h ** 3)
        out["z_uvv"] = ((fpp - 2 * fp0 + fpm) - (fmp - 2 * fm0 + fmm)) / (2 * h ** 3)
    return SurfaceJet(order=order, **out)


# catalog ------------------------------------------------------------------

def graph_surface(phi, psi, domain=((-1.0, 1.0), (-1.0, 1.0)), label="graph"):
    """The graph z = (u, v, phi(u, v), psi(u, v))."""
    return from_coordinates(lambda u, v: (u, v, phi(u, v), psi(u, v)), domain, label)


def clifford_torus(a=1.0):
    two_pi = 2 * np.pi
    return from_coordinates(
        lambda u, v: (a * np.cos(u), a * np.sin(u), a * np.cos(v), a * np.sin(v)),
        ((0.0, two_pi), (0.0, two_pi)), "clifford_torus", periodic=(True, True), info={"a": a})


def holomorphic_graph():
    return graph_surface(lambda u, v: u * u - v * v, lambda u, v: 2 * u * v,
                         label="holomorphic_graph")


def sphere3(r=1.0):
    return from_coordinates(
        lambda u, v: (r * np.cos(u) * np.cos(v), r * np.cos(u) * np.sin(v), r * np.sin(u), 0.0),
        ((-1.4, 1.4), (0.0, 2 * np.pi)), "sphere3", periodic=(False, True), info={"r": r})


def quadratic_graph(a, b, c, d, e, f):
    """Graph with phi = a u^2 + b uv + c v^2, psi = d u^2 + e uv + f v^2."""
    return graph_surface(lambda u, v: a * u * u + b * u * v + c * v * v,
                         lambda u, v: d * u * u + e * u * v + f * v * v, label="graph")


def generic_graph(scale=1.0):
    """A graph with no special structure: kappa != 0, kappa^2 - k > 0, mu_u mu_v != 0."""
    s = scale
    return graph_surface(
        lambda u, v: s * (0.5 * u * u - 0.2 * v * v + 0.2 * u ** 3 + 0.1 * u * v * v),
        lambda u, v: s * (0.8 * u * v + 0.3 * v * v + 0.1 * v ** 3 - 0.15 * u * u * v),
        domain=((-0.5, 0.5), (-0.5, 0.5)), label="generic_graph")


def _meridian(name):
    def build(*params):
        from . import meridian
        return meridian.catalog_entry(name, params)
    return build


_CATALOG = {
    "clifford_torus": (clifford_torus, (1,)),
    "holomorphic_graph": (holomorphic_graph, (0,)),
    "sphere3": (sphere3, (0, 1)),
    "graph": (quadratic_graph, (6,)),
    "generic_graph": (generic_graph, (0, 1)),
    "meridian_sphere": (_meridian("sphere"), (1,)),
    "meridian_constant_K": (_meridian("constant_K"), (3, 4)),
    "meridian_cmc": (_meridian("cmc"), (2, 3)),
    "meridian_constant_k": (_meridian("constant_k"), (2, 3, 4)),
}


def catalog_names():
    return sorted(_CATALOG)


def catalog(name, params=()):
    """Look up a named surface; ``params`` is a list of reals."""
    try:
        builder, counts = _CATALOG[name]
    except KeyError:
        raise InputError(f"unknown surface {name!r}; known: {', '.join(catalog_names())}") from None
    params = [float(x) for x in params]
    if len(params) not in counts:
        raise InputError(f"{name} takes {' or '.join(map(str, counts))} parameter(s), got {len(params)}")
    return builder(*params)


def sampled_surface(u, v, positions, label="sampled"):
    """Surface interpolating gridded samples ``positions[i, j] = z(u[i], v[j])``.

    Each coordinate is a tensor spline, quintic when there are at least 6
    samples per axis and of lower degree (down to cubic, 4 samples) otherwise.
    """
    from scipy.interpolate import RectBivariateSpline

    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    positions = np.asarray(positions, dtype=float)
    if positions.shape != (u.size, v.size, 4):
        raise InputError("positions must have shape (len(u), len(v), 4)")
    k = min(5, u.size - 1, v.size - 1)
    if k < 3:
        raise InputError("need at least 4 samples per axis")
    splines = [RectBivariateSpline(u, v, positions[..., c], kx=k, ky=k) for c in range(4)]

    def evaluator(uu, vv, order):
        uu, vv = np.broadcast_arrays(np.asarray(uu, dtype=float), np.asarray(vv, dtype=float))
        names = _DERIVS2 + (_DERIVS3 if order == 3 else [])
        out = {name: np.stack([s.ev(uu, vv, dx=i, dy=j) for s in splines], axis=-1)
               for name, i, j in names}
        return SurfaceJet(order=order, **out)

    def position(uu, vv):
        uu, vv = np.broadcast_arrays(np.asarray(uu, dtype=float), np.asarray(vv, dtype=float))
        return np.stack([s.ev(uu, vv) for s in splines], axis=-1)

    return SurfaceModel(evaluator, ((u[0], u[-1]), (v[0], v[-1])), label, (False, False), position)
