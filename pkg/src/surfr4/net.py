"""Principal-coordinate nets and the integrability conditions of the invariant fields.

Net construction
----------------
From a seed p0 the x-curve C_0 and the y-curve D_0 (lines of curvature) are
traced by arclength.  Node (i, j) is the intersection of the y-curve D_i
through C_0(i du) with the x-curve C_j through D_0(j dv).  The net parameters
(s, t) are then principal coordinates with sqrt(E) = 1 along C_0 and
sqrt(G) = 1 along D_0.  Away from the spines, sqrt(E) is read off the Jacobi
field J along D_i (dJ/dtau = DY J, J(0) = X), whose x-component is dz/ds,
and sqrt(G) symmetrically along C_j.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DomainError, ThresholdError
from .frame import INVARIANT_NAMES, GeometricFrame, geometric_frame, pointwise_frame
from .pointwise import dot, fundamental_data, normal_frame
from .surface_jets import evaluate_jet

SUBSTEP = 0.02
JACOBI_EPS = 1e-5
HOLONOMY_LIMIT = 1e-3
DOMAIN_MARGIN = 1e-3
FIELD_NAMES = ("sqrtE", "sqrtG") + INVARIANT_NAMES
RESIDUAL_NAMES = ("metric_v", "metric_u", "gauss", "codazzi_1", "codazzi_2", "ricci",
                  "mu_u", "mu_v")


@dataclass
class InvariantFieldGrid:
    """Fields sampled on the nodes (i du, j dv) of a principal-coordinate rectangle."""

    du: float
    dv: float
    sqrtE: Optional[np.ndarray]
    sqrtG: Optional[np.ndarray]
    gamma1: np.ndarray
    gamma2: np.ndarray
    nu1: np.ndarray
    nu2: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    positions: Optional[np.ndarray] = None
    frames: Optional[GeometricFrame] = None
    params: Optional[np.ndarray] = None
    holonomy: float = 0.0
    F_measured: Optional[np.ndarray] = None
    M_measured: Optional[np.ndarray] = None
    label: str = ""

    @property
    def shape(self):
        return self.mu.shape

    @property
    def nu(self):
        return self.shape[0]

    @property
    def nv(self):
        return self.shape[1]

    def fields(self):
        return {name: getattr(self, name) for name in FIELD_NAMES}

    def with_fields(self, **changes):
        return replace(self, **changes)

    @classmethod
    def constant(cls, nu, nv, du, dv, **values):
        """Grid with every field constant, e.g. for hand-authored data."""
        full = {name: np.full((nu, nv), float(values.get(name, 0.0))) for name in FIELD_NAMES}
        if "sqrtE" not in values:
            full["sqrtE"] = np.ones((nu, nv))
        if "sqrtG" not in values:
            full["sqrtG"] = np.ones((nu, nv))
        return cls(du=float(du), dv=float(dv), **full)


# curve tracing ----------------------------------------------------------------

@dataclass
class _Curves:
    """Batched samples of m curves; curve c is sampled at arclength spacing h[c]."""

    h: np.ndarray        # (m,)
    P: np.ndarray        # (n+1, m, 2) parameter points
    dP: np.ndarray       # (n+1, m, 2) unit-speed parameter velocity
    T: np.ndarray        # (n+1, m, 4) ambient unit tangent
    B: np.ndarray        # (n+1, m, 4) frame vector b
    O: np.ndarray        # (n+1, m, 4) the other principal tangent
    J: np.ndarray        # (n+1, m, 2) Jacobi field
    dJ: np.ndarray       # (n+1, m, 2)
    last: np.ndarray     # (m,) index of the last valid sample

    def hermite(self, values, slopes, tau, curve):
        """Cubic Hermite interpolation of sampled ``values`` at arclength ``tau`` on ``curve``."""
        n = self.P.shape[0] - 1
        h = self.h[curve]
        k = np.clip(np.floor(tau / h).astype(int), 0, n - 1)
        s = ((tau - k * h) / h)[..., None]
        h_ = h[..., None]
        y0, y1 = values[k, curve], values[k + 1, curve]
        m0, m1 = slopes[k, curve] * h_, slopes[k + 1, curve] * h_
        h00, h10 = 2 * s ** 3 - 3 * s ** 2 + 1, s ** 3 - 2 * s ** 2 + s
        h01, h11 = -2 * s ** 3 + 3 * s ** 2, s ** 3 - s ** 2
        val = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1
        d00, d10 = 6 * s ** 2 - 6 * s, 3 * s ** 2 - 4 * s + 1
        d01, d11 = -6 * s ** 2 + 6 * s, 3 * s ** 2 - 2 * s
        der = (d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1) / h_
        return val, der

    def point(self, tau, curve):
        return self.hermite(self.P, self.dP, tau, curve)

    def jacobi(self, tau, curve):
        return self.hermite(self.J, self.dJ, tau, curve)[0]

    def reach(self, curve):
        return self.last[curve] * self.h[curve]

    def subset(self, curves):
        pick = lambda a: a[:, curves]
        return _Curves(self.h[curves], pick(self.P), pick(self.dP), pick(self.T), pick(self.B),
                       pick(self.O), pick(self.J), pick(self.dJ), self.last[curves])


def _inside(model, p):
    return model.contains(p[:, 0], p[:, 1], DOMAIN_MARGIN)


def _trace(model, starts, is_x, hints, hints_o, hints_b, h, n, jacobi_start):
    """Classical RK4 along unit principal fields, x for curves with ``is_x`` and y otherwise.

    Each curve also carries the linearized flow dJ/dtau = D(field) J.  The
    central difference for D(field) J is evaluated in the same batch as the
    field itself.  Curves that would leave the domain are frozen at their last
    valid sample.
    """
    m = starts.shape[0]
    P = np.zeros((n + 1, m, 2))
    dP = np.zeros((n + 1, m, 2))
    T = np.zeros((n + 1, m, 4))
    B = np.zeros((n + 1, m, 4))
    O = np.zeros((n + 1, m, 4))
    J = np.zeros((n + 1, m, 2))
    dJ = np.zeros((n + 1, m, 2))
    last = np.zeros(m, dtype=int)
    sel = is_x[:, None]
    col = h[:, None]

    def rhs(p, jv, hint, hint_o, hint_b, ok):
        p = np.where(ok[:, None], p, P[0])
        norm = np.linalg.norm(jv, axis=-1, keepdims=True)
        eps = np.where(norm > 0, JACOBI_EPS / np.where(norm > 0, norm, 1.0), 0.0)
        pts = np.concatenate([p, p + eps * jv, p - eps * jv])
        x_hint = np.concatenate([np.where(sel, hint, hint_o)] * 3)
        y_hint = np.concatenate([np.where(sel, hint_o, hint)] * 3)
        f = pointwise_frame(model, (pts[:, 0], pts[:, 1]),
                            {"x": x_hint, "y": y_hint, "b": np.concatenate([hint_b] * 3)})
        s3 = np.concatenate([sel] * 3)
        d = np.where(s3, f.x_param, f.y_param)
        djv = np.where(eps > 0, (d[m:2 * m] - d[2 * m:]) / (2 * np.where(eps > 0, eps, 1.0)), 0.0)
        return (d[:m], np.where(sel, f.x[:m], f.y[:m]), np.where(sel, f.y[:m], f.x[:m]),
                f.b[:m], djv)

    active = np.ones(m, dtype=bool)
    P[0] = starts
    J[0] = jacobi_start
    dP[0], T[0], O[0], B[0], dJ[0] = rhs(P[0], J[0], hints, hints_o, hints_b, active)
    for k in range(n):
        p, jv = P[k], J[k]
        k1, a1, o1, b1, j1 = dP[k], T[k], O[k], B[k], dJ[k]
        ok = active & _inside(model, p + 0.5 * col * k1)
        k2, a2, o2, b2, j2 = rhs(p + 0.5 * col * k1, jv + 0.5 * col * j1, a1, o1, b1, ok)
        ok &= _inside(model, p + 0.5 * col * k2)
        k3, a3, o3, b3, j3 = rhs(p + 0.5 * col * k2, jv + 0.5 * col * j2, a2, o2, b2, ok)
        ok &= _inside(model, p + col * k3)
        k4, _, _, _, j4 = rhs(p + col * k3, jv + col * j3, a3, o3, b3, ok)
        new_p = p + col / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        new_j = jv + col / 6 * (j1 + 2 * j2 + 2 * j3 + j4)
        active = ok & _inside(model, new_p)
        keep = active[:, None]
        P[k + 1] = np.where(keep, new_p, p)
        J[k + 1] = np.where(keep, new_j, jv)
        d, amb, oth, b, dj = rhs(P[k + 1], J[k + 1], a1, o1, b1, active)
        dP[k + 1] = np.where(keep, d, dP[k])
        T[k + 1] = np.where(keep, amb, T[k])
        O[k + 1] = np.where(keep, oth, O[k])
        B[k + 1] = np.where(keep, b, B[k])
        dJ[k + 1] = np.where(keep, dj, dJ[k])
        last = np.where(active, k + 1, last)
        if not np.any(active):
            break
    return _Curves(h, P, dP, T, B, O, J, dJ, last)


def _intersect(D, C, nu, nv, du, dv):
    """Solve D_i(tau) = C_j(sigma) for all nodes; returns tau, sigma, residual (nu, nv)."""
    tau = np.zeros((nu, nv))
    sigma = np.zeros((nu, nv))
    resid = np.zeros((nu, nv))
    j_idx = np.arange(nv)
    guess_tau = j_idx * dv
    guess_sigma = np.zeros(nv)
    for i in range(nu):
        t = guess_tau.copy()
        s = guess_sigma + (du if i else 0.0)
        di = np.full(nv, i)
        for _ in range(30):
            pd, vd = D.point(t, di)
            pc, vc = C.point(s, j_idx)
            F = pd - pc
            jac = np.stack([vd, -vc], axis=-1)
            step = np.linalg.solve(jac, F[..., None])[..., 0]
            t, s = t - step[:, 0], s - step[:, 1]
            if np.max(np.abs(step)) < 1e-14:
                break
        if np.any(t > D.reach(di) + 1e-12) or np.any(s > C.reach(j_idx) + 1e-12) \
                or np.any(t < -1e-12) or np.any(s < -1e-12):
            raise DomainError("principal net leaves the surface domain")
        pd, _ = D.point(t, di)
        pc, _ = C.point(s, j_idx)
        tau[i], sigma[i] = t, s
        resid[i] = np.linalg.norm(pd - pc, axis=-1)
        guess_tau, guess_sigma = t, s
    return tau, sigma, resid


def build_net(model, seed, nu, nv, du, dv, substep=SUBSTEP, holonomy_limit=HOLONOMY_LIMIT,
              frame_step=None):
    """Principal-coordinate grid with measured sqrt(E), sqrt(G) and the eight invariants."""
    if nu < 2 or nv < 2:
        raise ValueError("net needs at least 2 x 2 nodes")
    seed = np.asarray(seed, dtype=float).reshape(1, 2)
    f0 = pointwise_frame(model, (seed[:, 0], seed[:, 1]))

    # substeps divide du and dv exactly so spine nodes fall on samples
    mu_ = max(int(np.ceil(du / substep - 1e-9)), 1)
    mv_ = max(int(np.ceil(dv / substep - 1e-9)), 1)
    hu, hv = du / mu_, dv / mv_
    both = np.array([True, False])
    spines = _trace(model, np.repeat(seed, 2, axis=0), both, np.stack([f0.x[0], f0.y[0]]),
                    np.stack([f0.y[0], f0.x[0]]), np.repeat(f0.b, 2, axis=0), np.array([hu, hv]),
                    max((nu - 1) * mu_, (nv - 1) * mv_), np.zeros((2, 2)))
    kx, ky = np.arange(nu) * mu_, np.arange(nv) * mv_
    if kx[-1] > spines.last[0] or ky[-1] > spines.last[1]:
        raise DomainError("spine of the net leaves the surface domain")

    # y-curves D_i start on the x-spine with J(0) = X; x-curves C_j on the y-spine with K(0) = Y
    starts = np.concatenate([spines.P[kx, 0], spines.P[ky, 1]])
    is_x = np.concatenate([np.zeros(nu, dtype=bool), np.ones(nv, dtype=bool)])
    hints = np.concatenate([spines.O[kx, 0], spines.O[ky, 1]])
    hints_o = np.concatenate([spines.T[kx, 0], spines.T[ky, 1]])
    hints_b = np.concatenate([spines.B[kx, 0], spines.B[ky, 1]])
    jac0 = np.concatenate([spines.dP[kx, 0], spines.dP[ky, 1]])
    steps = np.concatenate([np.full(nu, hv), np.full(nv, hu)])
    reach = int(np.ceil(1.5 * max(nu * mu_, nv * mv_))) + 2 * max(mu_, mv_)
    curves = _trace(model, starts, is_x, hints, hints_o, hints_b, steps, reach, jac0)
    D = curves.subset(np.arange(nu))
    C = curves.subset(np.arange(nu, nu + nv))

    tau, sigma, resid_param = _intersect(D, C, nu, nv, du, dv)
    ii, jj = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
    nodes, vel_D = D.point(tau, ii)
    _, vel_C = C.point(sigma, jj)
    J = D.jacobi(tau, ii)
    Kf = C.jacobi(sigma, jj)

    # sqrt(E): x-component of J in the (X, Y) parameter basis; sqrt(G) likewise from K
    basis = np.stack([vel_C, vel_D], axis=-1)
    sqrtE = np.linalg.solve(basis, J[..., None])[..., 0, 0]
    sqrtG = np.linalg.solve(basis, Kf[..., None])[..., 1, 0]

    pos_D = model.point(nodes[..., 0], nodes[..., 1])
    pos_C = model.point(*C.point(sigma, jj)[0].transpose(2, 0, 1))
    defect = np.linalg.norm(pos_D - pos_C, axis=-1)
    flat = pos_D.reshape(-1, 4)
    diameter = float(np.linalg.norm(flat.max(axis=0) - flat.min(axis=0)))
    holonomy = float(np.max(defect))
    if holonomy > holonomy_limit * max(diameter, 1e-300):
        raise ThresholdError(f"net holonomy defect {holonomy:.3e} exceeds {holonomy_limit:g} x diameter")

    jet = evaluate_jet(model, (nodes[..., 0], nodes[..., 1]))
    tan_C = np.einsum("...a,...ai->...i", vel_C, np.stack([jet.z_u, jet.z_v], axis=-2))
    tan_D = np.einsum("...a,...ai->...i", vel_D, np.stack([jet.z_u, jet.z_v], axis=-2))
    k_hint = np.rint(tau / D.h[:, None]).astype(int)
    hints = {"x": tan_C, "y": tan_D, "b": D.B[k_hint, ii]}
    kwargs = {} if frame_step is None else {"step": frame_step}
    frames = geometric_frame(model, (nodes[..., 0], nodes[..., 1]), hints, **kwargs)

    first, second = fundamental_data(jet, normal_frame(jet))
    F_meas = dot(tan_C, tan_D) / (np.linalg.norm(tan_C, axis=-1) * np.linalg.norm(tan_D, axis=-1))
    M_meas = (second.L * vel_C[..., 0] * vel_D[..., 0]
              + second.M * (vel_C[..., 0] * vel_D[..., 1] + vel_C[..., 1] * vel_D[..., 0])
              + second.N * vel_C[..., 1] * vel_D[..., 1])

    return InvariantFieldGrid(
        du=float(du), dv=float(dv), sqrtE=sqrtE, sqrtG=sqrtG,
        positions=pos_D, frames=frames, params=nodes, holonomy=holonomy,
        F_measured=F_meas, M_measured=M_meas, label=model.label,
        **{name: getattr(frames, name) for name in INVARIANT_NAMES})


# integrability ----------------------------------------------------------------

@dataclass
class IntegrabilityReport:
    residuals: dict
    max_abs: dict
    rms: dict
    general_class: bool
    metric_quotients_positive: bool
    worst: dict = field(default_factory=dict)

    @property
    def max_residual(self):
        return max(self.max_abs.values())


def _derivatives(field_, du, dv):
    fu = np.gradient(field_, du, axis=0, edge_order=2)
    fv = np.gradient(field_, dv, axis=1, edge_order=2)
    return fu, fv


def metric_quotients(grid):
    """The two quotients expressing sqrt(E), sqrt(G) through mu and its derivatives."""
    g = grid
    mu_u, mu_v = _derivatives(g.mu, g.du, g.dv)
    den_u = 2 * g.mu * g.gamma2 + g.nu1 * g.beta2 - g.lam * g.beta1
    den_v = 2 * g.mu * g.gamma1 - g.lam * g.beta2 + g.nu2 * g.beta1
    return mu_u, mu_v, den_u, den_v


def integrability_residuals(grid):
    g = grid
    sE, sG = g.sqrtE, g.sqrtG
    d = lambda f: _derivatives(f, g.du, g.dv)
    sE_u, sE_v = d(sE)
    sG_u, sG_v = d(sG)
    g1_u, g1_v = d(g.gamma1)
    g2_u, g2_v = d(g.gamma2)
    lam_u, lam_v = d(g.lam)
    n1_u, n1_v = d(g.nu1)
    n2_u, n2_v = d(g.nu2)
    b1_u, b1_v = d(g.beta1)
    b2_u, b2_v = d(g.beta2)
    mu_u, mu_v = d(g.mu)
    g1, g2, n1, n2, lam, mu, b1, b2 = (g.gamma1, g.gamma2, g.nu1, g.nu2, g.lam, g.mu,
                                       g.beta1, g.beta2)
    return {
        "metric_v": -g1 * sE * sG - sE_v,
        "metric_u": -g2 * sE * sG - sG_u,
        "gauss": n1 * n2 - (lam ** 2 + mu ** 2) - (g2_u / sE + g1_v / sG - (g1 ** 2 + g2 ** 2)),
        "codazzi_1": 2 * lam * g2 + mu * b1 - (n1 - n2) * g1 - (lam_u / sE - n1_v / sG),
        "codazzi_2": 2 * lam * g1 + mu * b2 + (n1 - n2) * g2 - (-n2_u / sE + lam_v / sG),
        "ricci": g1 * b1 - g2 * b2 + (n1 - n2) * mu - (-b2_u / sE + b1_v / sG),
        "mu_u": 2 * mu * g2 + n1 * b2 - lam * b1 - mu_u / sE,
        "mu_v": 2 * mu * g1 - lam * b2 + n2 * b1 - mu_v / sG,
    }


def check_integrability(grid, tol=1e-8):
    """Residuals of the compatibility system; never raises on bad data."""
    with np.errstate(all="ignore"):
        res = integrability_residuals(grid)
        mu_u, mu_v, den_u, den_v = metric_quotients(grid)
    max_abs, rms, worst = {}, {}, {}
    for name, r in res.items():
        a = np.abs(np.where(np.isfinite(r), r, np.inf))
        max_abs[name] = float(np.max(a))
        rms[name] = float(np.sqrt(np.mean(np.where(np.isfinite(r), r, np.inf) ** 2)))
        worst[name] = tuple(int(k) for k in np.unravel_index(np.argmax(a), a.shape))
    scale = tol * (1 + float(np.max(np.abs(grid.mu))))
    general = bool(np.all(np.abs(mu_u) > scale) and np.all(np.abs(mu_v) > scale))
    with np.errstate(all="ignore"):
        qE, qG = mu_u / den_u, mu_v / den_v
    defined = (np.abs(den_u) > 0) & (np.abs(den_v) > 0)
    positive = bool(general and np.all((qE > 0) & (qG > 0) | ~defined))
    return IntegrabilityReport(res, max_abs, rms, general, positive, worst)
