"""Patch-level sweeps: sample a surface on a grid, classify every point, summarize."""

from __future__ import annotations

from collections import Counter
from dataclasses import fields as dc_fields

import numpy as np

from .figures import EQ_TOL, RANK_TOL, class_predicates, curvature_ellipse, indicatrix
from .frame import UMBILIC_GUARD, GeometricFrame, pointwise_frame
from .pointwise import FLAT_TOL, UMBILIC_TOL, PointClass, invariant_record
from .surface_jets import evaluate_jet, finite_difference_jet

TOLERANCES = {
    "flat": FLAT_TOL,
    "umbilic": UMBILIC_TOL,
    "equality": EQ_TOL,
    "ellipse_rank": RANK_TOL,
    "frame_umbilic_guard": UMBILIC_GUARD,
}


def sample_params(model, nu, nv):
    """Cell-centred parameter samples ``(u, v)`` covering the model domain."""
    (u0, u1), (v0, v1) = model.domain
    u = u0 + (np.arange(nu) + 0.5) * (u1 - u0) / nu
    v = v0 + (np.arange(nv) + 0.5) * (v1 - v0) / nv
    return u, v


def grid_jet(model, nu, nv, order=2, h=None):
    u, v = sample_params(model, nu, nv)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    if h is None:
        jet = evaluate_jet(model, (uu, vv), order=order)
    else:
        jet = finite_difference_jet(model, (uu, vv), h=h, order=order)
    return u, v, jet


def _frame_at(frames, k):
    values = {}
    for f in dc_fields(GeometricFrame):
        a = getattr(frames, f.name)
        values[f.name] = a[k] if isinstance(a, np.ndarray) and a.ndim > 0 else a
    return GeometricFrame(**values)


def point_report(jet, record, frame=None):
    ind = indicatrix(record)
    ell = curvature_ellipse(jet, record)
    pred = class_predicates(record, frame, ell)
    return {
        "class": PointClass(int(record.point_class)).name.lower(),
        "k": float(record.k), "kappa": float(record.kappa), "K": float(record.K),
        "H_norm": float(record.H_norm),
        "nu_prime": float(record.nu_prime), "nu_doubleprime": float(record.nu_doubleprime),
        "indicatrix": {"kind": ind.kind.value, "semi_axes": list(ind.semi_axes)},
        "ellipse": {"area": ell.area, "degenerate_segment": ell.degenerate_segment,
                    "segment_length": ell.segment_length, "K_zero": ell.K_zero},
        "predicates": {"minimal": pred.minimal,
                       "flat_normal_connection": pred.flat_normal_connection,
                       "super_conformal": pred.super_conformal,
                       "wintgen_ideal": pred.wintgen_ideal,
                       "chen_nontrivial": pred.chen_nontrivial,
                       "wintgen_slack": pred.wintgen_slack},
    }


def analyze_surface(model, nu, nv, order=2, h=None):
    """Per-point records plus class counts and predicate tallies on an nu x nv sample grid."""
    u, v, jet = grid_jet(model, nu, nv, order, h)
    record = invariant_record(jet)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    flat_class = record.point_class.reshape(-1)
    kappa, k = record.kappa.reshape(-1), record.k.reshape(-1)
    framed = (flat_class != PointClass.FLAT) & (
        kappa ** 2 - k >= 10 * UMBILIC_GUARD * (kappa ** 2 + np.abs(k) + 1))
    frames, where = None, {}
    if np.any(framed):
        idx = np.flatnonzero(framed)
        frames = pointwise_frame(model, (uu.reshape(-1)[idx], vv.reshape(-1)[idx]))
        where = {int(n): m for m, n in enumerate(idx)}

    records = []
    for n, (i, j) in enumerate(np.ndindex(nu, nv)):
        rec_n = invariant_record(jet.take((i, j)))
        frame = _frame_at(frames, where[n]) if n in where else None
        entry = point_report(jet.take((i, j)), rec_n, frame)
        entry.update({"u": float(u[i]), "v": float(v[j]), "i": i, "j": j})
        records.append(entry)

    classes = Counter(r["class"] for r in records)
    tallies = {name: sum(bool(r["predicates"][name]) for r in records)
               for name in ("minimal", "flat_normal_connection", "super_conformal",
                            "wintgen_ideal", "chen_nontrivial")}
    gap = kappa ** 2 - k
    summary = {
        "points": len(records),
        "class_counts": {c.name.lower(): classes.get(c.name.lower(), 0) for c in PointClass},
        "predicate_counts": tallies,
        "k_range": [float(np.min(k)), float(np.max(k))],
        "kappa_range": [float(np.min(kappa)), float(np.max(kappa))],
        "min_kappa2_minus_k": float(np.min(gap)),
        "chen_unavailable": int(np.count_nonzero(~framed)),
    }
    return {"surface": model.label, "grid": [nu, nv], "jet": "analytic" if h is None else f"fd h={h}",
            "tolerances": TOLERANCES, "summary": summary, "records": records}


# defining constancy of each meridian family: (invariant, expected value, tolerance)
def family_target(info):
    family = info.get("family")
    if family == "constant_K":
        return "K", info["K"], 1e-6
    if family == "cmc":
        return "H_norm", info["a"], 1e-5
    if family == "constant_k":
        return "k", -info["a"] ** 2, 1e-5
    if family == "sphere":
        return "K", 1.0, 1e-6
    return None


KAPPA_ZERO_TOL = 1e-9


def meridian_report(spec, model, nu, nv):
    """Measured invariants of a meridian surface against its family's constancy claim."""
    from .meridian import meridian_class

    u, v, jet = grid_jet(model, nu, nv)
    rec = invariant_record(jet)
    measured = {"k": rec.k, "kappa": rec.kappa, "K": rec.K, "H_norm": rec.H_norm}
    ranges = {name: [float(np.min(a)), float(np.max(a))] for name, a in measured.items()}
    cls = meridian_class(spec)
    checks = {}
    if cls == "III":
        dev = float(np.max(np.abs(rec.kappa)))
        checks["kappa_zero"] = {"max_abs": dev, "tolerance": KAPPA_ZERO_TOL,
                                "pass": dev < KAPPA_ZERO_TOL}
    target = family_target(spec.profile.info)
    if target is not None:
        name, value, tol = target
        dev = float(np.max(np.abs(measured[name] - value)))
        checks[f"{name}_constant"] = {"expected": value, "max_deviation": dev, "tolerance": tol,
                                     "pass": dev < tol}
    return {"surface": model.label, "family": spec.profile.info.get("family", "custom"),
            "meridian_class": cls, "grid": [nu, nv], "u_range": list(spec.u_range),
            "v_range": list(spec.v_range), "ranges": ranges, "checks": checks,
            "pass": all(c["pass"] for c in checks.values())}
