"""Exclusion battery: sound procedures proving a box holds no central
configuration, or shrinking it.

Execution order matches the search driver: a priori bounds, potential vs
moment of inertia, cluster tests, body-order (domain normalization) test,
then the residual zero check with refinement.  The battery is vectorized
over a batch of boxes (leading axis B) so the driver can amortize array
overhead across the tree; only the rare near-collision cluster analysis
falls back to per-box evaluation.  Every test stays collision tolerant
where documented; a verdict of Excluded is a proof.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import boxops as bxo
from . import bounds as bounds_mod
from . import model
from .errors import RefusedUnequalMasses
from .interval import _add_down
from .model import ConfigurationBox, Masses

TEST_NAMES = ("checkAprioriBounds", "checkUEqI", "clusterTest", "distanceTest", "checkZero")
SURVIVED = len(TEST_NAMES)

_U = 2.0**-52


@dataclass(frozen=True)
class Cluster:
    """Epsilon-linked set of body indices (transitive closure)."""

    members: frozenset[int]
    epsilon: float


@dataclass
class ExclusionVerdict:
    outcome: str  # "Excluded" | "Refined" | "Unknown"
    test: str | None = None
    refined: ConfigurationBox | None = None


class _BatchFrame:
    """Derived interval arrays for a batch of boxes, leading axis B."""

    __slots__ = (
        "n",
        "xlo",
        "xhi",
        "ylo",
        "yhi",
        "bxlo",
        "bxhi",
        "bylo",
        "byhi",
        "dxlo",
        "dxhi",
        "dylo",
        "dyhi",
        "r2lo",
        "r2hi",
        "rlo",
        "rhi",
        "q2lo",
        "q2hi",
        "pair_ok",
        "_cluster_pairs",
    )

    def __init__(self, ctx, xlo, xhi, ylo, yhi):
        n = ctx.n
        self.n = n
        self.xlo, self.xhi, self.ylo, self.yhi = xlo, xhi, ylo, yhi
        self.bxlo, self.bxhi, self.bylo, self.byhi = model.all_body_arrays(
            ctx, self.xlo, self.xhi, self.ylo, self.yhi
        )
        self.dxlo, self.dxhi, self.dylo, self.dyhi = model.pair_disp_arrays(
            ctx, self.xlo, self.xhi, self.ylo, self.yhi
        )
        self.r2lo, self.r2hi = model.pair_r2_arrays(self.dxlo, self.dxhi, self.dylo, self.dyhi)
        self.rlo, self.rhi = bxo.isqrt(self.r2lo, self.r2hi)
        self.q2lo, self.q2hi = bxo.iadd(
            *bxo.isqr(self.bxlo, self.bxhi), *bxo.isqr(self.bylo, self.byhi)
        )
        self.pair_ok = self.r2lo > 0.0
        self._cluster_pairs = None

    def cluster_pair_terms(self, ctx):
        """Per-pair cross terms shared by the cluster tests (computed lazily).

        g = (m_i m_j / r^3)(q_i - q_j) oriented i < j, and the dot products
        (q_i - q_j | q_i), (q_j - q_i | q_j) scaled the same way.  Entries
        of colliding pairs are garbage and must stay masked by callers.
        """
        if self._cluster_pairs is None:
            safe_r2lo = np.where(self.pair_ok, self.r2lo, 1.0)
            safe_rlo = np.where(self.pair_ok, self.rlo, 1.0)
            r3 = bxo.imul(safe_r2lo, self.r2hi, safe_rlo, self.rhi)
            mmr3 = bxo.idiv_pos(ctx.mmlo, ctx.mmhi, np.maximum(r3[0], 1e-300), r3[1])
            gx = bxo.imul(*mmr3, self.dxlo, self.dxhi)
            gy = bxo.imul(*mmr3, self.dylo, self.dyhi)
            ii, jj = ctx.ii, ctx.jj
            di = bxo.iadd(
                *bxo.imul(self.dxlo, self.dxhi, self.bxlo[..., ii], self.bxhi[..., ii]),
                *bxo.imul(self.dylo, self.dyhi, self.bylo[..., ii], self.byhi[..., ii]),
            )
            dj = bxo.iadd(
                *bxo.imul(-self.dxhi, -self.dxlo, self.bxlo[..., jj], self.bxhi[..., jj]),
                *bxo.imul(-self.dyhi, -self.dylo, self.bylo[..., jj], self.byhi[..., jj]),
            )
            hi_ = bxo.imul(*mmr3, *di)
            hj_ = bxo.imul(*mmr3, *dj)
            self._cluster_pairs = (gx, gy, hi_, hj_)
        return self._cluster_pairs

    def slice(self, b: int) -> "_BatchFrame":
        out = object.__new__(_BatchFrame)
        out.n = self.n
        for name in self.__slots__[1:-1]:
            val = getattr(self, name)
            setattr(out, name, val[b] if isinstance(val, np.ndarray) else val)
        out._cluster_pairs = None
        return out


# ---------------------------------------------------------------------------
# batched tests


def u_eq_i_excluded_batch(ctx, fr: _BatchFrame) -> np.ndarray:
    """Disjoint U and I enclosures contradict U = I; needs no collisions."""
    ok = np.all(fr.pair_ok, axis=-1)
    safe_rlo = np.where(fr.pair_ok, fr.rlo, 1.0)
    ulo, uhi = bxo.idiv_pos(ctx.mmlo, ctx.mmhi, safe_rlo, np.maximum(fr.rhi, 1e-300))
    Ulo, Uhi = bxo.isum(ulo, uhi, axis=-1)
    ilo, ihi = bxo.imul(ctx.mlo, ctx.mhi, fr.q2lo, fr.q2hi)
    Ilo, Ihi = bxo.isum(ilo, ihi, axis=-1)
    return ok & ((Uhi < Ilo) | (Ihi < Ulo))


def _fullset_fui_excluded_batch(ctx, fr: _BatchFrame) -> np.ndarray:
    """Whole-set moment/potential test, both directions, collision tolerant."""
    with np.errstate(divide="ignore"):
        terms_lo = np.nextafter(ctx.mmlo / fr.rhi, -np.inf)
    k = ctx.P
    U_lo = np.nextafter(np.sum(terms_lo, axis=-1) * (1.0 - k * _U), -np.inf)
    milo, mihi = bxo.imul(ctx.mlo, ctx.mhi, fr.q2lo, fr.q2hi)
    I_lo, I_hi = bxo.isum(milo, mihi, axis=-1)
    fired = I_hi < U_lo
    no_collision = np.all(fr.rlo > 0.0, axis=-1)
    if np.any(no_collision):
        safe_rlo = np.where(fr.rlo > 0.0, fr.rlo, 1.0)
        terms_hi = np.nextafter(ctx.mmhi / safe_rlo, np.inf)
        U_hi = np.nextafter(np.sum(terms_hi, axis=-1) * (1.0 + k * _U), np.inf)
        fired |= no_collision & (I_lo > U_hi)
    return fired


def cluster_candidates_needed(fr: _BatchFrame, max_diam: np.ndarray) -> np.ndarray:
    """Boxes whose epsilon partitions could yield a proper cluster."""
    return np.any(fr.rlo <= max_diam[..., None], axis=-1)


def distance_order_excluded_batch(fr: _BatchFrame, ordering: str) -> np.ndarray:
    """Domain-normalization constraints; valid for equal masses only."""
    n = fr.n
    hi = float(n - 1)
    xlo, xhi, ylo, yhi = fr.bxlo, fr.bxhi, fr.bylo, fr.byhi
    pin = n - 2
    out = (xhi[..., pin] < 0.5) | (xlo[..., pin] > hi)
    out |= (xlo[..., 0] >= 0.0) | (xhi[..., 0] < -hi)
    out |= np.any(xhi < xlo[..., 0:1], axis=-1) | np.any(xlo > xhi[..., pin : pin + 1], axis=-1)
    out |= yhi[..., 0] < 0.0
    if n >= 4:
        out |= (ylo[..., 1] > 0.0) | (yhi[..., 1] < -hi)
        out |= np.any(yhi < ylo[..., 1:2], axis=-1) | np.any(ylo > hi, axis=-1)
    # furthest-body condition |q_i| <= |x_{n-2}|
    apin = np.maximum(np.abs(xlo[..., pin]), np.abs(xhi[..., pin]))
    x2pin_hi = np.nextafter(apin * apin, np.inf)
    out |= np.any(fr.q2lo > x2pin_hi[..., None], axis=-1)
    # index ordering of the middle bodies, ending at the derived body
    chain = list(range(2, n - 2)) + [n - 1]
    if len(chain) >= 2 and n >= 4:
        a = np.array(chain[:-1])
        b = np.array(chain[1:])
        if ordering == "increasing":
            out |= np.any(xhi[..., b] < xlo[..., a], axis=-1)
        else:
            out |= np.any(xhi[..., a] < xlo[..., b], axis=-1)
    return out


def check_zero_batch(ctx, fr: _BatchFrame, zlo, zhi):
    """Vectorized residual zero check with refinement.

    Returns (excluded (B,), new_lo, new_hi, changed (B,)).
    """
    n = fr.n
    body_ok = ~np.any(~fr.pair_ok[..., None, :] & ctx.incidence, axis=-1)
    axlo, axhi, aylo, ayhi = model.accel_arrays(
        ctx, fr.dxlo, fr.dxhi, fr.dylo, fr.dyhi, pair_mask=fr.pair_ok
    )
    miss = (axhi < fr.bxlo) | (axlo > fr.bxhi) | (ayhi < fr.bylo) | (aylo > fr.byhi)
    excluded = np.any(miss & body_ok, axis=-1)
    zb, za = ctx.z_body, ctx.z_axis
    ref_lo = np.where(za == 0, axlo[..., zb], aylo[..., zb])
    ref_hi = np.where(za == 0, axhi[..., zb], ayhi[..., zb])
    coord_ok = body_ok[..., zb]
    new_lo = np.where(coord_ok, np.maximum(zlo, ref_lo), zlo)
    new_hi = np.where(coord_ok, np.minimum(zhi, ref_hi), zhi)
    changed = np.any(new_lo > zlo, axis=-1) | np.any(new_hi < zhi, axis=-1)
    return excluded, new_lo, new_hi, changed


# ---------------------------------------------------------------------------
# per-box cluster analysis (near-collision boxes only)


def cluster_partition_from_frame(ctx, fr: _BatchFrame, epsilon: float) -> list[frozenset[int]]:
    n = fr.n
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    rlo = fr.rlo
    for p in range(ctx.P):
        if rlo[p] <= epsilon:
            ra, rb = find(int(ctx.ii[p])), find(int(ctx.jj[p]))
            if ra != rb:
                parent[ra] = rb
    groups: dict[int, set[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), set()).add(i)
    return [frozenset(g) for g in groups.values()]


def _member_mask(n: int, members: frozenset[int]) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    mask[list(members)] = True
    return mask


def _cluster_zero_excluded(ctx, fr: _BatchFrame, members: frozenset[int]) -> bool:
    """(0,0) must lie in sum_C m_i q_i - sum_{i in C, j out} (m_i m_j/r^3)(q_i - q_j)."""
    n = fr.n
    if len(members) == n:
        return False  # reduces to the center-of-mass identity, true by construction
    mask = _member_mask(n, members)
    in_i = mask[ctx.ii]
    in_j = mask[ctx.jj]
    cross = in_i != in_j
    if np.any(cross & ~fr.pair_ok):
        return False
    mxlo, mxhi = bxo.imul(ctx.mlo, ctx.mhi, fr.bxlo, fr.bxhi)
    mylo, myhi = bxo.imul(ctx.mlo, ctx.mhi, fr.bylo, fr.byhi)
    sxlo, sxhi = bxo.isum(mxlo, mxhi, axis=-1, where=mask)
    sylo, syhi = bxo.isum(mylo, myhi, axis=-1, where=mask)
    gx, gy, _, _ = fr.cluster_pair_terms(ctx)
    # the stored g is oriented i -> j; flip the sign when the j side is inside
    tx_lo = np.where(in_i, gx[0], -gx[1])
    tx_hi = np.where(in_i, gx[1], -gx[0])
    ty_lo = np.where(in_i, gy[0], -gy[1])
    ty_hi = np.where(in_i, gy[1], -gy[0])
    cxlo, cxhi = bxo.isum(tx_lo, tx_hi, axis=-1, where=cross)
    cylo, cyhi = bxo.isum(ty_lo, ty_hi, axis=-1, where=cross)
    exlo, exhi = bxo.isub(sxlo, sxhi, cxlo, cxhi)
    eylo, eyhi = bxo.isub(sylo, syhi, cylo, cyhi)
    return not (exlo <= 0.0 <= exhi and eylo <= 0.0 <= eyhi)


def _cluster_fui_excluded(ctx, fr: _BatchFrame, members: frozenset[int]) -> bool:
    """Moment/potential balance: no CC when sup I_C < inf U_C + inf F_C.

    For the full set (F = 0) the complementary direction inf I > sup U is
    checked as well; both need the cross pairs (if any) collision free.
    """
    n = fr.n
    full = len(members) == n
    mask = _member_mask(n, members)
    in_i = mask[ctx.ii]
    in_j = mask[ctx.jj]
    intra = in_i & in_j
    cross = in_i != in_j
    if np.any(cross & ~fr.pair_ok):
        return False
    if np.any(intra & (fr.rhi <= 0.0)):
        return True  # exact collision of two point bodies cannot be a CC
    # inf U_C stays valid under intra-cluster collisions: zero distance only grows it
    k = int(np.count_nonzero(intra))
    U_lo = 0.0
    U_hi: float | None = 0.0
    if k:
        with np.errstate(divide="ignore"):
            terms_lo = np.nextafter(ctx.mmlo / fr.rhi, -np.inf)
        U_lo = float(np.nextafter(np.sum(terms_lo, where=intra) * (1.0 - k * _U), -np.inf))
        U_lo = max(U_lo, 0.0)
        if np.any(intra & (fr.rlo <= 0.0)):
            U_hi = None
        else:
            safe_rlo = np.where(intra, fr.rlo, 1.0)
            terms_hi = np.nextafter(ctx.mmhi / safe_rlo, np.inf)
            U_hi = float(np.nextafter(np.sum(terms_hi, where=intra) * (1.0 + k * _U), np.inf))
    milo, mihi = bxo.imul(ctx.mlo, ctx.mhi, fr.q2lo, fr.q2hi)
    I_lo, I_hi = map(float, bxo.isum(milo, mihi, axis=-1, where=mask))
    if np.any(cross):
        _, _, hi_, hj_ = fr.cluster_pair_terms(ctx)
        t_lo = np.where(in_i, hi_[0], hj_[0])
        t_hi = np.where(in_i, hi_[1], hj_[1])
        F_lo, _ = map(float, bxo.isum(t_lo, t_hi, axis=-1, where=cross))
    else:
        F_lo = 0.0
    if I_hi < _add_down(U_lo, F_lo):
        return True
    if full and U_hi is not None and I_lo > U_hi:
        return True
    return False


def cluster_test_excluded_single(ctx, fr: _BatchFrame, max_diam: float) -> bool:
    """Proper-cluster tests for one box over the two epsilon partitions."""
    seen: set[frozenset[int]] = set()
    for eps in (0.0, max_diam):
        for grp in cluster_partition_from_frame(ctx, fr, eps):
            if 2 <= len(grp) < fr.n and grp not in seen:
                seen.add(grp)
                if _cluster_zero_excluded(ctx, fr, grp):
                    return True
                if _cluster_fui_excluded(ctx, fr, grp):
                    return True
    return False


# ---------------------------------------------------------------------------
# the battery


def run_battery_batch(ctx, bset: bounds_mod.BoundSet, zlo, zhi, ordering: str):
    """Battery over a batch of boxes in the canonical order.

    zlo, zhi have shape (B, d).  Returns (status, out_lo, out_hi) where
    status[b] is the index into TEST_NAMES of the firing test or SURVIVED,
    and out_lo/out_hi carry the (possibly checkZero-refined) boxes of the
    survivors.
    """
    from . import reduced as reduced_mod

    B = zlo.shape[0]
    fr = _BatchFrame(ctx, *reduced_mod.box_to_free_arrays(zlo, zhi, ctx.n))
    status = np.full(B, SURVIVED, dtype=np.int8)

    fired = bounds_mod.check_apriori_batch(bset, fr.q2lo, fr.q2hi, fr.rlo, fr.rhi)
    status[fired] = 0

    live = status == SURVIVED
    if np.any(live):
        fired = u_eq_i_excluded_batch(ctx, fr)
        status[fired & live] = 1

    live = status == SURVIVED
    if np.any(live):
        fired = _fullset_fui_excluded_batch(ctx, fr)
        max_diam = np.max(zhi - zlo, axis=-1)
        needs = cluster_candidates_needed(fr, max_diam) & live & ~fired
        for b in np.nonzero(needs)[0]:
            if cluster_test_excluded_single(ctx, fr.slice(int(b)), float(max_diam[b])):
                fired[b] = True
        status[fired & live] = 2

    live = status == SURVIVED
    if np.any(live):
        fired = distance_order_excluded_batch(fr, ordering)
        status[fired & live] = 3

    out_lo = zlo
    out_hi = zhi
    live = status == SURVIVED
    if np.any(live):
        idx = np.nonzero(live)[0]
        if np.all(live):
            sub = fr
        else:
            sub = _BatchFrame(ctx, *reduced_mod.box_to_free_arrays(zlo[idx], zhi[idx], ctx.n))
        excluded, new_lo, new_hi, changed = check_zero_batch(ctx, sub, zlo[idx], zhi[idx])
        status[idx[excluded]] = 4
        keep = ~excluded
        if np.any(changed & keep):
            out_lo = zlo.copy()
            out_hi = zhi.copy()
            out_lo[idx] = new_lo
            out_hi[idx] = new_hi
    return status, out_lo, out_hi


def run_battery(ctx, bset: bounds_mod.BoundSet, zlo, zhi, ordering: str):
    """Single-box battery; returns ("excluded", name) | ("refined", (lo, hi)) | ("none", None)."""
    status, out_lo, out_hi = run_battery_batch(
        ctx, bset, zlo[None, :], zhi[None, :], ordering
    )
    if status[0] < SURVIVED:
        return "excluded", TEST_NAMES[status[0]]
    if np.any(out_lo[0] > zlo) or np.any(out_hi[0] < zhi):
        return "refined", (out_lo[0], out_hi[0])
    return "none", None


# ---------------------------------------------------------------------------
# public wrappers on configuration boxes


def _frame_from_config(c: ConfigurationBox, masses: Masses):
    ctx = model.nbody_ctx(masses)
    return ctx, _BatchFrame(ctx, *c.free_arrays())


def check_zero_refine(c: ConfigurationBox, masses: Masses) -> ExclusionVerdict:
    """Residual zero check on a configuration box, refining in body space."""
    from .interval import Interval
    from .model import BodyBox

    ctx, fr = _frame_from_config(c, masses)
    n = fr.n
    body_ok = ~np.any(~fr.pair_ok[..., None, :] & ctx.incidence, axis=-1)
    if not np.any(body_ok):
        return ExclusionVerdict("Unknown")
    axlo, axhi, aylo, ayhi = model.accel_arrays(
        ctx, fr.dxlo, fr.dxhi, fr.dylo, fr.dyhi, pair_mask=fr.pair_ok
    )
    miss = (axhi < fr.bxlo) | (axlo > fr.bxhi) | (ayhi < fr.bylo) | (aylo > fr.byhi)
    if np.any(miss & body_ok):
        return ExclusionVerdict("Excluded", test="checkZero")
    changed = False
    new_bodies = []
    for i in range(n - 1):
        x = c.bodies[i].x
        y = c.bodies[i].y
        if body_ok[i]:
            nx = x.intersect(Interval(float(axlo[i]), float(axhi[i])))
            ny = y.intersect(Interval(float(aylo[i]), float(ayhi[i])))
            if nx.is_empty or ny.is_empty:
                return ExclusionVerdict("Excluded", test="checkZero")
            if nx != x or ny != y:
                changed = True
            new_bodies.append(BodyBox(nx, ny))
        else:
            new_bodies.append(BodyBox(x, y))
    if changed:
        return ExclusionVerdict(
            "Refined", test="checkZero", refined=ConfigurationBox(new_bodies)
        )
    return ExclusionVerdict("Unknown")


def cluster_partition(c: ConfigurationBox, masses: Masses, epsilon: float) -> list[Cluster]:
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    ctx, fr = _frame_from_config(c, masses)
    return [Cluster(g, epsilon) for g in cluster_partition_from_frame(ctx, fr, epsilon)]


def cluster_zero_test(c: ConfigurationBox, cl: Cluster, masses: Masses) -> str:
    ctx, fr = _frame_from_config(c, masses)
    return "Excluded" if _cluster_zero_excluded(ctx, fr, cl.members) else "Unknown"


def cluster_fui_test(c: ConfigurationBox, cl: Cluster, masses: Masses) -> str:
    ctx, fr = _frame_from_config(c, masses)
    return "Excluded" if _cluster_fui_excluded(ctx, fr, cl.members) else "Unknown"


def check_u_eq_i(c: ConfigurationBox, masses: Masses) -> str:
    ctx, fr = _frame_from_config(c, masses)
    return "Excluded" if bool(u_eq_i_excluded_batch(ctx, fr)) else "Unknown"


def distance_order_test(c: ConfigurationBox, n: int, ordering: str, masses: Masses) -> str:
    if not masses.equal_mass:
        raise RefusedUnequalMasses("the body-order normalization requires equal masses")
    if ordering not in ("increasing", "decreasing"):
        raise ValueError(f"unknown ordering {ordering!r}")
    _, fr = _frame_from_config(c, masses)
    return "Excluded" if bool(distance_order_excluded_batch(fr, ordering)) else "Unknown"
