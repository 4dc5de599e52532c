"""Meridian surfaces z(u, v) = f(u) l(v) + g(u) e4 on a rotational hypersurface.

l(v) is an arclength-parameterized curve on the unit sphere of span{e1, e2, e3}
with spherical curvature kappa(v); (f, g) is a unit-speed meridian profile.
Three profile families are provided: constant Gauss curvature K, constant
mean curvature |H| and constant invariant k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, InputError
from .surface_jets import SurfaceJet, SurfaceModel
from .taylor import univariate_derivatives

E4 = np.array([0.0, 0.0, 0.0, 1.0])
CLIP = 0.02
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


# spherical curve ------------------------------------------------------------

def _frenet_generator(kappa):
    """d/dv (l, t, n) = S (l, t, n) for curvature kappa (broadcast over leading axes)."""
    kappa = np.asarray(kappa, dtype=float)
    S = np.zeros(kappa.shape + (3, 3))
    S[..., 0, 1] = 1.0
    S[..., 1, 0] = -1.0
    S[..., 1, 2] = kappa
    S[..., 2, 1] = -kappa
    return S


def _expm_so3(S):
    """Rodrigues formula for a batch of 3x3 skew matrices."""
    w = np.stack([S[..., 2, 1], S[..., 0, 2], S[..., 1, 0]], axis=-1)
    theta = np.linalg.norm(w, axis=-1)[..., None, None]
    small = theta < 1e-8
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 1 - theta ** 2 / 6, np.sin(safe) / safe)
    b = np.where(small, 0.5 - theta ** 2 / 24, (1 - np.cos(safe)) / safe ** 2)
    return np.eye(3) + a * S + b * (S @ S)


@dataclass
class SphericalCurve:
    """Arclength curve on S^2 with its Frenet frame (l, t, n).

    ``samples`` holds the frame on the grid ``v``; :meth:`frame` evaluates it at
    arbitrary parameters.
    """

    kappa_fn: Callable
    v_range: tuple
    initial: np.ndarray
    constant: Optional[float]
    v: np.ndarray
    samples: np.ndarray  # (len(v), 3, 4): rows l, t, n

    def kappa(self, v):
        """[kappa, kappa'] at v."""
        if self.constant is not None:
            v = np.asarray(v, dtype=float)
            return [np.full(v.shape, self.constant), np.zeros(v.shape)]
        d = univariate_derivatives(self.kappa_fn, np.asarray(v, dtype=float), order=1)
        return d[:2]

    def frame(self, v):
        """(l, t, n) at v; each of shape v.shape + (4,)."""
        v = np.asarray(v, dtype=float)
        if self.constant is not None:
            R = _expm_so3(_frenet_generator(np.full(v.shape, self.constant)) * v[..., None, None])
            F = R @ self.initial
        else:
            h = self.v[1] - self.v[0]
            i = np.clip(np.floor((v - self.v[0]) / h).astype(int), 0, len(self.v) - 1)
            F = _magnus_step(self.kappa_fn, self.v[i], v - self.v[i]) @ self.samples[i]
        return F[..., 0, :], F[..., 1, :], F[..., 2, :]

    def gram_drift(self):
        F = self.samples
        return float(np.max(np.abs(F @ np.swapaxes(F, -1, -2) - np.eye(3))))


def _magnus_step(kappa_fn, v0, h):
    """Fourth-order Magnus propagator over [v0, v0 + h] (batched)."""
    c = np.sqrt(3) / 6
    k1 = np.asarray(kappa_fn(v0 + (0.5 - c) * h), dtype=float) * np.ones_like(v0)
    k2 = np.asarray(kappa_fn(v0 + (0.5 + c) * h), dtype=float) * np.ones_like(v0)
    A1, A2 = _frenet_generator(k1), _frenet_generator(k2)
    hh = np.asarray(h)[..., None, None]
    omega = 0.5 * hh * (A1 + A2) + (np.sqrt(3) / 12) * hh ** 2 * (A2 @ A1 - A1 @ A2)
    return _expm_so3(omega)


def _as_triple(initial):
    if initial is None:
        return np.eye(4)[:3]
    F = np.asarray(initial, dtype=float)
    if F.shape == (3, 3):
        F = np.hstack([F, np.zeros((3, 1))])
    if F.shape != (3, 4) or np.any(np.abs(F[:, 3]) > 1e-12):
        raise InputError("initial triple must be three vectors in span{e1, e2, e3}")
    if np.max(np.abs(F @ F.T - np.eye(3))) > 1e-10:
        raise InputError("initial triple (l, t, n) must be orthonormal")
    return F


def spherical_curve(kappa_c, v_range, initial=None, step=1e-3):
    """Integrate l' = t, t' = kappa n - l, n' = -kappa t.

    ``kappa_c`` is a number or a callable written with numpy operations.
    Constant curvature uses the exact exponential; otherwise a fourth-order
    Magnus method on a grid of spacing about ``step`` is used.
    """
    F0 = _as_triple(initial)
    v0, v1 = map(float, v_range)
    if not v1 > v0:
        raise InputError("empty v range")
    constant = None
    if not callable(kappa_c):
        constant = float(kappa_c)
        fn = lambda v: constant + 0 * v
    else:
        fn = kappa_c
    n = max(int(np.ceil((v1 - v0) / step)), 1)
    grid = np.linspace(v0, v1, n + 1)
    if constant is not None:
        R = _expm_so3(_frenet_generator(np.full(grid.shape, constant)) * (grid - v0)[:, None, None])
        samples = R @ F0
        curve = SphericalCurve(fn, (v0, v1), F0, constant, grid, samples)
        if v0 != 0.0:
            # the closed form is anchored at v = 0; shift so the initial triple sits at v0
            curve.initial = _expm_so3(_frenet_generator(constant) * -v0) @ F0
        return curve
    samples = np.empty((n + 1, 3, 4))
    samples[0] = F0
    steps = _magnus_step(fn, grid[:-1], np.diff(grid))
    for i in range(n):
        samples[i + 1] = steps[i] @ samples[i]
    return SphericalCurve(fn, (v0, v1), F0, None, grid, samples)


# profiles -------------------------------------------------------------------

@dataclass
class Profile:
    """A unit-speed meridian (f(u), g(u)) given through its derivatives."""

    derivs: Callable  # u -> ([f, f', f'', f'''], [g, g', g'', g'''])
    u_range: tuple
    info: dict = field(default_factory=dict)


def _w_derivatives(fd):
    """Derivatives of w = sqrt(1 - f'^2) in u, i.e. of g' when g' >= 0."""
    _, f1, f2, f3 = fd
    w = np.sqrt(1 - f1 * f1)
    w1 = -f1 * f2 / w
    w2 = -(f2 * f2 + f1 * f3) / w - (f1 * f2) ** 2 / w ** 3
    return w, w1, w2


class _Antiderivative:
    """Cumulative integral of a smooth function on [a, b] (panelled Gauss-Legendre)."""

    def __init__(self, fn, a, b, panels=4000):
        self.fn = fn
        self.edges = np.linspace(a, b, panels + 1)
        pieces = self._gl(self.edges[:-1], self.edges[1:])
        self.cumulative = np.concatenate([[0.0], np.cumsum(pieces)])

    def _gl(self, lo, hi):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        nodes = mid[..., None] + half[..., None] * _GL_NODES
        return half * np.sum(self.fn(nodes) * _GL_WEIGHTS, axis=-1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self.edges, x) - 1, 0, len(self.edges) - 2)
        return self.cumulative[i] + self._gl(self.edges[i], x)


def _chain(h_derivs, fd):
    """Derivatives in u of h(f(u)) given h, h', h'' at f and the f-derivatives."""
    h0, h1, h2 = h_derivs[:3]
    _, f1, f2, _ = fd
    return [h0, h1 * f1, h2 * f1 * f1 + h1 * f2]


def _admissible_interval(mask, grid, seed=None):
    """Connected run of True in ``mask`` containing ``seed`` (else the longest run)."""
    if not np.any(mask):
        return None
    edges = np.flatnonzero(np.diff(np.concatenate([[0], mask.astype(int), [0]])))
    runs = list(zip(edges[::2], edges[1::2] - 1))
    if seed is not None:
        nearest = min(runs, key=lambda r: 0 if grid[r[0]] <= seed <= grid[r[1]]
                      else min(abs(grid[r[0]] - seed), abs(grid[r[1]] - seed)))
        lo, hi = nearest
    else:
        lo, hi = max(runs, key=lambda r: grid[r[1]] - grid[r[0]])
    if hi <= lo:
        return None
    return float(grid[lo]), float(grid[hi])


def explicit_profile(f_fn, u_range, g_fn=None, info=None):
    """Profile from a closed-form f (numpy-written); g by quadrature of sqrt(1 - f'^2) unless given."""
    u0, u1 = map(float, u_range)

    if g_fn is None:
        rate = lambda u: np.sqrt(np.maximum(1 - univariate_derivatives(f_fn, u, 1)[1] ** 2, 0.0))
        anti = _Antiderivative(rate, u0, u1, panels=400)
        mid = anti(0.5 * (u0 + u1))
        g_value = lambda u: anti(u) - mid

    def derivs(u):
        u = np.asarray(u, dtype=float)
        fd = univariate_derivatives(f_fn, u, 3)
        if g_fn is not None:
            return fd, univariate_derivatives(g_fn, u, 3)
        w, w1, w2 = _w_derivatives(fd)
        return fd, [g_value(u), w, w1, w2]

    return Profile(derivs, (u0, u1), dict(info or {}))


def quadrature_profile(y_fn, t_range, info=None):
    """Profile solving f' = y(f) on an f-interval where 0 < y < 1.

    u(f) is the integral of 1/y from the left end; f(u) inverts it by Newton
    iteration.  g(f) integrates sqrt(1 - y^2)/y, so g' = sqrt(1 - f'^2) >= 0.
    """
    t0, t1 = map(float, t_range)
    w_fn = lambda t: np.sqrt(1 - y_fn(t) ** 2)
    u_of = _Antiderivative(lambda t: 1 / y_fn(t), t0, t1)
    g_of = _Antiderivative(lambda t: w_fn(t) / y_fn(t), t0, t1)
    total = float(u_of.cumulative[-1])

    def invert(u):
        t = np.interp(u, u_of.cumulative, u_of.edges)
        for _ in range(8):
            t = np.clip(t - (u_of(t) - u) * y_fn(t), t0, t1)
        return t

    def derivs(u):
        u = np.asarray(u, dtype=float)
        t = invert(u)
        y, y1, y2, _ = univariate_derivatives(y_fn, t, 3)
        fd = [t, y, y1 * y, y2 * y * y + y1 * y1 * y]
        wd = univariate_derivatives(w_fn, t, 3)
        gd = [g_of(t)] + _chain(wd, fd)
        return fd, gd

    out = Profile(derivs, (0.0, total), dict(info or {}))
    out.info.update(t_range=(t0, t1))
    out.invert = invert
    return out


def constant_K_profile(K, alpha, beta, seed=0.0, clip=CLIP):
    """Meridian of constant Gauss curvature K (cos/sin branch for K > 0, cosh/sinh for K < 0).

    The u-range is clipped to the component around ``seed`` where f > clip and
    f'^2 < 1 - clip.
    """
    K, alpha, beta = float(K), float(alpha), float(beta)
    if K == 0:
        raise InputError("constant-K profiles need K != 0")
    r = np.sqrt(abs(K))
    if K > 0:
        f_fn = lambda u: alpha * np.cos(r * u) + beta * np.sin(r * u)
    else:
        f_fn = lambda u: alpha * np.cosh(r * u) + beta * np.sinh(r * u)
    span = 2 * np.pi / r
    grid = np.linspace(seed - span, seed + span, 40001)
    f, f1 = univariate_derivatives(f_fn, grid, 1)
    interval = _admissible_interval((f > clip) & (f1 * f1 < 1 - clip), grid, seed)
    if interval is None:
        raise DomainError(f"no admissible u-interval for K={K}, alpha={alpha}, beta={beta}")
    return explicit_profile(f_fn, interval, info={"family": "constant_K", "K": K,
                                                  "alpha": alpha, "beta": beta})


def cmc_y(a, b, C):
    """f' as a function of t = f for the constant mean curvature family."""
    a = abs(a)

    def y(t):
        R = np.sqrt(4 * a * a * t * t - b * b)
        phi = C + 0.5 * t * R - b * b / (4 * a) * np.log(2 * a * t + R)
        return np.sqrt(1 - (phi / t) ** 2)

    return y


def default_cmc_constant(a, b):
    """C placing phi(t) = t/2 at the left end t = |b|/(2|a|) of the admissible range."""
    a, b = abs(a), abs(b)
    t0 = b / (2 * a)
    return 0.5 * t0 + b * b / (4 * a) * np.log(b)


def _scan(y_fn, lo, hi, extra_mask, seed, clip, label):
    grid = np.linspace(lo, hi, 40001)[1:]
    with np.errstate(invalid="ignore", divide="ignore"):
        y = y_fn(grid)
    mask = np.isfinite(y) & (y > clip) & (y < 1 - clip) & extra_mask(grid)
    interval = _admissible_interval(mask, grid, seed)
    if interval is None:
        raise DomainError(f"empty admissible interval for the {label} profile")
    return interval


def cmc_profile(a, b, C=None, seed=None, clip=CLIP):
    """Meridian giving |H| = |a| when paired with a circle of spherical curvature b."""
    a, b = float(a), float(b)
    if a == 0 or b == 0:
        raise InputError("cmc profiles need a != 0 and b != 0")
    C = default_cmc_constant(a, b) if C is None else float(C)
    y_fn = cmc_y(a, b, C)
    t_min = abs(b) / (2 * abs(a))
    hi = t_min + 4 / abs(a) + 4 * abs(C) + 1
    R_floor = clip * abs(b)
    interval = _scan(y_fn, t_min, hi, lambda t: 4 * a * a * t * t - b * b > R_floor ** 2,
                     seed, clip, "cmc")
    return quadrature_profile(y_fn, interval, info={"family": "cmc", "a": a, "b": b, "C": C})


def constant_k_q(a, b, C, sign=1):
    s = 1.0 if sign >= 0 else -1.0
    return lambda t: C + s * (a / b) * 0.5 * t * t


def constant_k_profile(a, b, C=0.5, sign=1, seed=None, clip=CLIP):
    """Meridian giving k = -a^2 when paired with a circle of spherical curvature b.

    ``sign`` selects the branch C +- (a/b) t^2/2.
    """
    a, b, C = float(a), float(b), float(C)
    if a == 0 or b == 0:
        raise InputError("constant-k profiles need a != 0 and b != 0")
    q = constant_k_q(a, b, C, sign)
    y_fn = lambda t: np.sqrt(1 - q(t) ** 2)
    # q must stay positive so that sqrt(1 - y^2) = q
    hi = np.sqrt(2 * (abs(C) + 2) * abs(b / a)) + 1
    interval = _scan(y_fn, 0.0, hi, lambda t: (q(t) > clip) & (t > clip * hi), seed, clip, "constant-k")
    return quadrature_profile(y_fn, interval, info={"family": "constant_k", "a": a, "b": b,
                                                    "C": C, "sign": 1 if sign >= 0 else -1})


# surfaces -------------------------------------------------------------------

@dataclass
class MeridianSpec:
    profile: Profile
    kappa_c: object  # number or numpy-written callable of v
    v_range: tuple
    label: str = "meridian"
    initial: Optional[np.ndarray] = None

    @property
    def u_range(self):
        return self.profile.u_range

    def kappa_m(self, u):
        fd, gd = self.profile.derivs(u)
        return fd[1] * gd[2] - gd[1] * fd[2]

    def closed_forms(self, u, v):
        """k, kappa, K, |H|, M and the H components along n1, n2 from the profile data."""
        fd, gd = self.profile.derivs(u)
        km = fd[1] * gd[2] - gd[1] * fd[2]
        kc = self.curve().kappa(v)[0]
        f, g1 = fd[0], gd[1]
        return {
            "k": -(km * kc) ** 2 / f ** 2,
            "kappa": np.zeros(np.broadcast_shapes(np.shape(u), np.shape(v))),
            "K": km * g1 / f,
            "H_norm": np.sqrt((kc ** 2 + (g1 + f * km) ** 2) / (4 * f * f)),
            "M": -km * kc,
            "H_n1": kc / (2 * f),
            "H_n2": (g1 + f * km) / (2 * f),
        }

    def curve(self):
        cached = getattr(self, "_curve", None)
        if cached is None:
            cached = spherical_curve(self.kappa_c, self.v_range, self.initial)
            self._curve = cached
        return cached

    def normal_frame(self, u, v):
        """(n1, n2) with n1 = n(v), n2 = -g' l + f' e4."""
        fd, gd = self.profile.derivs(u)
        l, _, n = self.curve().frame(v)
        return n, -gd[1][..., None] * l + fd[1][..., None] * E4


def meridian_surface(spec):
    """SurfaceModel with analytic jets up to third order."""
    curve = spec.curve()
    u0, u1 = spec.u_range
    fd, _ = spec.profile.derivs(np.linspace(u0, u1, 201))
    if np.any(fd[0] <= 0):
        raise DomainError("meridian profile must keep f > 0")
    periodic_v = False
    v_range = tuple(map(float, spec.v_range))
    if curve.constant is not None:
        period = 2 * np.pi / np.sqrt(1 + curve.constant ** 2)
        periodic_v = bool(np.isclose(v_range[1] - v_range[0], period, rtol=1e-12, atol=0))

    def evaluator(u, v, order):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        fd, gd = spec.profile.derivs(u)
        l, t, n = curve.frame(v)
        kc, kc1 = curve.kappa(v)
        s = lambda a: np.asarray(a)[..., None]
        lvv = -l + s(kc) * n
        out = dict(
            z=s(fd[0]) * l + s(gd[0]) * E4,
            z_u=s(fd[1]) * l + s(gd[1]) * E4,
            z_v=s(fd[0]) * t,
            z_uu=s(fd[2]) * l + s(gd[2]) * E4,
            z_uv=s(fd[1]) * t,
            z_vv=s(fd[0]) * lvv,
        )
        if order == 3:
            out.update(
                z_uuu=s(fd[3]) * l + s(gd[3]) * E4,
                z_uuv=s(fd[2]) * t,
                z_uvv=s(fd[1]) * lvv,
                z_vvv=s(fd[0]) * (-(1 + s(kc) ** 2) * t + s(kc1) * n),
            )
        return SurfaceJet(order=order, **out)

    def position(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        fd, gd = spec.profile.derivs(u)
        l, _, _ = curve.frame(v)
        return fd[0][..., None] * l + gd[0][..., None] * E4

    info = dict(spec.profile.info)
    info["kappa_c"] = curve.constant
    return SurfaceModel(evaluator, ((float(u0), float(u1)), v_range), spec.label,
                        (False, periodic_v), position, info)


def meridian_class(spec, samples=101, tol=1e-12):
    """'I' (great circle), 'II' (straight meridian) or 'III' (general)."""
    u = np.linspace(*spec.u_range, samples)
    v = np.linspace(*spec.v_range, samples)
    if np.all(np.abs(spec.curve().kappa(v)[0]) < tol):
        return "I"
    if np.all(np.abs(spec.kappa_m(u)) < tol):
        return "II"
    return "III"


def _circle_period(b):
    return 2 * np.pi / np.sqrt(1 + b * b)


def family_spec(profile, b, label, v_range=None):
    v_range = (0.0, _circle_period(b)) if v_range is None else v_range
    return MeridianSpec(profile, float(b), v_range, label)


def sphere_profile():
    """f = sin u, g = -cos u on a clipped part of (0, pi): the unit-speed circle."""
    return explicit_profile(lambda u: np.sin(u), (0.3, np.pi - 0.3), g_fn=lambda u: -np.cos(u),
                            info={"family": "sphere"})


def catalog_spec(name, params):
    """MeridianSpec of a named family; ``params`` as in the surface catalog."""
    p = list(params)
    if name == "sphere":
        return family_spec(sphere_profile(), p[0], "meridian_sphere")
    if name == "constant_K":
        b = p[3] if len(p) > 3 else 1.0
        return family_spec(constant_K_profile(*p[:3]), b, "meridian_constant_K")
    if name == "cmc":
        prof = cmc_profile(p[0], p[1], p[2] if len(p) > 2 else None)
        return family_spec(prof, p[1], "meridian_cmc")
    if name == "constant_k":
        C = p[2] if len(p) > 2 else 0.5
        sign = p[3] if len(p) > 3 else 1
        return family_spec(constant_k_profile(p[0], p[1], C, sign), p[1], "meridian_constant_k")
    raise InputError(f"unknown meridian family {name!r}")


def catalog_entry(name, params):
    return meridian_surface(catalog_spec(name, params))


# ODE oracles and residuals ----------------------------------------------------

def cmc_closed_form_residual(a, b, C, t):
    """(1 - y^2 - t y y')^2 - (1 - y^2)(4 a^2 t^2 - b^2) for the closed-form y(t)."""
    y, y1 = univariate_derivatives(cmc_y(a, b, C), np.asarray(t, dtype=float), 1)[:2]
    return (1 - y * y - t * y * y1) ** 2 - (1 - y * y) * (4 * a * a * t * t - b * b)


def constant_k_closed_form_residual(a, b, C, t, sign=1):
    """y y' / sqrt(1 - y^2) +- (a/b) t for the closed-form y(t)."""
    q = constant_k_q(a, b, C, sign)
    y_fn = lambda s: np.sqrt(1 - q(s) ** 2)
    y, y1 = univariate_derivatives(y_fn, np.asarray(t, dtype=float), 1)[:2]
    s = 1.0 if sign >= 0 else -1.0
    return y * y1 / np.sqrt(1 - y * y) + s * (a / b) * t


def profile_ode_residual(profile, u):
    """Residual of the family's second-order ODE along the profile f(u)."""
    info = profile.info
    fd, _ = profile.derivs(u)
    f, f1, f2 = fd[:3]
    a, b = info["a"], info["b"]
    if info["family"] == "cmc":
        return (1 - f1 * f1 - f * f2) ** 2 - (1 - f1 * f1) * (4 * a * a * f * f - b * b)
    if info["family"] == "constant_k":
        return f2 + info["sign"] * (a / b) * f * np.sqrt(1 - f1 * f1)
    raise InputError("profile has no associated second-order ODE")


def solve_profile_ode(profile, u_eval, u_start=None, rtol=1e-12, atol=1e-13):
    """Integrate the family's second-order ODE directly from the profile's data at ``u_start``.

    Independent of the closed form; the two agree when the closed form solves the ODE.
    """
    info = profile.info
    a, b = info["a"], info["b"]
    u_start = 0.5 * sum(profile.u_range) if u_start is None else u_start
    fd, _ = profile.derivs(np.array(u_start))
    if info["family"] == "cmc":
        def rhs(_, s):
            f, f1 = s
            return [f1, (1 - f1 * f1 - np.sqrt(1 - f1 * f1) * np.sqrt(4 * a * a * f * f - b * b)) / f]
    elif info["family"] == "constant_k":
        def rhs(_, s):
            f, f1 = s
            return [f1, -info["sign"] * (a / b) * f * np.sqrt(1 - f1 * f1)]
    else:
        raise InputError("profile has no associated second-order ODE")
    u_eval = np.asarray(u_eval, dtype=float)
    out = np.empty_like(u_eval)
    y0 = [float(fd[0]), float(fd[1])]
    for side in (u_eval >= u_start, u_eval < u_start):
        if not np.any(side):
            continue
        pts = u_eval[side]
        order = np.argsort(np.abs(pts - u_start))
        sol = solve_ivp(rhs, (u_start, pts[order][-1]), y0, method="DOP853", t_eval=pts[order],
                        rtol=rtol, atol=atol)
        vals = np.empty(pts.size)
        vals[order] = sol.y[0]
        out[side] = vals
    return out

