"""Verification mode: certify candidate configurations given as points.

Each candidate is re-gauged (center of mass to the origin, furthest body
rotated onto the positive x axis and moved to slot n-2), seeded as a box
of half-width delta and certified with the operator iteration, doubling
delta on failure.  Certified solutions are contracted to tight enclosures
before the scalars and the symmetry verdict are computed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import classify, krawczyk, model
from . import reduced as reduced_mod
from .classify import SymmetryResult
from .model import Masses
from .search import SolutionBox, make_solution


@dataclass
class VerifyResult:
    index: int
    certified: bool
    delta_used: float | None
    solution: SolutionBox | None
    symmetry: SymmetryResult | None
    collinear: bool | None
    masses: Masses | None = None
    message: str = ""


def parse_candidates(text: str) -> list[list[tuple[float, float]]]:
    """Point configurations: one body per line "x y", blank line separated."""
    configs: list[list[tuple[float, float]]] = []
    current: list[tuple[float, float]] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            if current:
                configs.append(current)
                current = []
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ValueError(f"candidate line needs two coordinates: {raw!r}")
        current.append((float(parts[0]), float(parts[1])))
    if current:
        configs.append(current)
    return configs


def gauge_candidate(points: list[tuple[float, float]], masses: Masses) -> np.ndarray:
    """Reduced-coordinate seed: center of mass out, furthest body on +x at
    slot n-2 (plain float preprocessing; rigor comes from certification)."""
    n = len(points)
    if masses.n != n:
        raise ValueError("candidate body count does not match the masses")
    pts = np.array(points, dtype=float)
    w = np.array([v.mid for v in masses.values])
    com = (w[:, None] * pts).sum(axis=0) / w.sum()
    pts -= com
    far = int(np.argmax((pts**2).sum(axis=1)))
    rho = float(np.hypot(*pts[far]))
    if rho == 0.0:
        raise ValueError("degenerate candidate: furthest body at the origin")
    c, s = pts[far, 0] / rho, pts[far, 1] / rho
    rot = np.empty_like(pts)
    rot[:, 0] = pts[:, 0] * c + pts[:, 1] * s
    rot[:, 1] = -pts[:, 0] * s + pts[:, 1] * c
    order = [i for i in range(n) if i != far]
    order.insert(n - 2, far)
    rot = rot[order]
    z = np.empty(2 * (n - 1) - 1)
    z[0 : 2 * (n - 2) : 2] = rot[: n - 2, 0]
    z[1 : 2 * (n - 2) : 2] = rot[: n - 2, 1]
    z[-1] = rot[n - 2, 0]
    return z


def verify_candidate(
    index: int,
    points: list[tuple[float, float]],
    masses: Masses,
    delta: float = 1e-6,
    delta_max: float = 1e-3,
) -> VerifyResult:
    rctx = reduced_mod.reduced_ctx(masses)
    try:
        z = gauge_candidate(points, masses)
    except ValueError as exc:
        return VerifyResult(index, False, None, None, None, None, masses, message=str(exc))
    d = delta
    while d <= delta_max * (1 + 1e-12):
        outcome = krawczyk.iterate_arrays(rctx, z - d, z + d)
        if outcome.tag == "unique_zero":
            tight = krawczyk.contract(rctx, outcome.lo, outcome.hi)
            sol = make_solution(rctx, tight[0], tight[1], masses)
            sym = classify.symmetry_check(sol, masses)
            col = classify.detect_collinear(sol, masses)
            return VerifyResult(index, True, d, sol, sym, col, masses)
        d *= 2.0
    return VerifyResult(
        index, False, None, None, None, None, masses, message="no certification up to delta_max"
    )


def verify_candidates(points_list, masses_for=None, delta: float = 1e-6):
    """Verify a list of candidate configurations (equal masses by default)."""
    results = []
    for k, pts in enumerate(points_list):
        masses = masses_for(len(pts)) if masses_for else Masses.equal(len(pts))
        results.append(verify_candidate(k, pts, masses, delta=delta))
    return results
