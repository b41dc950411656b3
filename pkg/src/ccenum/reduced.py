"""Gauge-fixed square system whose nondegenerate zeros are the normalized
central configurations.

The last body is eliminated by the center-of-mass identity, the y
coordinate of body n-2 is pinned to 0 (killing the rotational degree of
freedom) and that body's y equation is dropped.  The remaining
2(n-1)-1 equations in as many unknowns are solved by the certification
machinery; a zero with x_{n-2} != x_{n-1} is a genuine central
configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import boxops as bxo
from . import kernels, model
from .errors import CollisionPossible
from .interval import Interval, IntervalMatrix, IntervalVector
from .model import ConfigurationBox, BodyBox, Masses


def dim_for(n: int) -> int:
    return 2 * (n - 1) - 1


def n_for_dim(d: int) -> int:
    n = (d + 3) // 2
    if dim_for(n) != d:
        raise ValueError(f"no body count gives dimension {d}")
    return n


@dataclass(frozen=True)
class ReducedBox:
    """Search-space element (x0, y0, ..., x_{n-3}, y_{n-3}, x_{n-2})."""

    coords: IntervalVector

    def __post_init__(self):
        n_for_dim(len(self.coords))

    @property
    def n(self) -> int:
        return n_for_dim(len(self.coords))

    def arrays(self):
        return bxo.pack(self.coords)

    @classmethod
    def from_arrays(cls, lo, hi) -> "ReducedBox":
        return cls(IntervalVector(bxo.unpack(lo, hi)))

    def to_configuration(self) -> ConfigurationBox:
        n = self.n
        zero = Interval(0.0)
        bodies = [BodyBox(self.coords[2 * i], self.coords[2 * i + 1]) for i in range(n - 2)]
        bodies.append(BodyBox(self.coords[2 * n - 4], zero))
        return ConfigurationBox(bodies)

    @classmethod
    def from_configuration(cls, c: ConfigurationBox) -> "ReducedBox":
        if not c.reduced_gauge:
            raise ValueError("configuration is not in the reduced gauge (y of body n-2 not pinned)")
        entries = []
        for b in c.bodies[:-1]:
            entries += [b.x, b.y]
        entries.append(c.bodies[-1].x)
        return cls(IntervalVector(entries))


# ---------------------------------------------------------------------------
# vectorized core


class _RCtx:
    def __init__(self, mctx: model._Ctx):
        n = mctx.n
        self.m = mctx
        d = dim_for(n)
        self.d = d
        # pair index lookup: free-free matrix and the last-body column
        fpi = np.zeros((n - 1, n - 1), dtype=int)
        lpi = np.zeros(n - 1, dtype=int)
        for p in range(mctx.P):
            i, j = int(mctx.ii[p]), int(mctx.jj[p])
            if j < n - 1:
                fpi[i, j] = p
                fpi[j, i] = p
            else:
                lpi[i] = p
        self.fpi, self.lpi = fpi, lpi
        self.offdiag = ~np.eye(n - 1, dtype=bool)
        # column-mass matrices m_k and the diagonal coefficients m_last + m_i
        self.MKlo = np.tile(mctx.mlo[:-1], (n - 1, 1))
        self.MKhi = np.tile(mctx.mhi[:-1], (n - 1, 1))
        self.mLi_lo, self.mLi_hi = bxo.iadd(
            np.full(n - 1, mctx.mlo[-1]), np.full(n - 1, mctx.mhi[-1]), mctx.mlo[:-1], mctx.mhi[:-1]
        )
        # row/column layout of the reduced system
        body = []
        axis = []
        for i in range(n - 2):
            body += [i, i]
            axis += [0, 1]
        body.append(n - 2)
        axis.append(0)
        self.lay_body = np.array(body)
        self.lay_axis = np.array(axis)
        # merged kernel batch layout for the jacobian: (2,5)x, (2,5)y, (1,3)x, (1,2)y
        P = mctx.P
        self.a_codes = np.concatenate(
            [np.full(P, 2), np.full(P, 2), np.full(P, 1), np.full(P, 1)]
        )
        self.b_codes = np.concatenate(
            [np.full(P, 5), np.full(P, 5), np.full(P, 3), np.full(P, 2)]
        )
        from . import kernels as _k

        s25 = _k._slope(2, 5)
        s13 = _k._slope(1, 3)
        s12 = _k._slope(1, 2)
        self.slope_lo = np.concatenate(
            [np.full(P, s25.lo), np.full(P, s25.lo), np.full(P, s13.lo), np.full(P, s12.lo)]
        )
        self.slope_hi = np.concatenate(
            [np.full(P, s25.hi), np.full(P, s25.hi), np.full(P, s13.hi), np.full(P, s12.hi)]
        )


@lru_cache(maxsize=32)
def _rctx_cached(n: int, mass_key) -> _RCtx:
    return _RCtx(model._ctx_cached(n, mass_key))


def reduced_ctx(masses: Masses) -> _RCtx:
    return _rctx_cached(masses.n, masses.key())


def box_to_free_arrays(zlo, zhi, n: int):
    """Free-body coordinate arrays from reduced boxes of shape (..., d)."""
    zero = np.zeros(zlo.shape[:-1] + (1,))
    xlo = np.concatenate([zlo[..., 0 : 2 * (n - 2) : 2], zlo[..., -1:]], axis=-1)
    xhi = np.concatenate([zhi[..., 0 : 2 * (n - 2) : 2], zhi[..., -1:]], axis=-1)
    ylo = np.concatenate([zlo[..., 1 : 2 * (n - 2) : 2], zero], axis=-1)
    yhi = np.concatenate([zhi[..., 1 : 2 * (n - 2) : 2], zero], axis=-1)
    return xlo, xhi, ylo, yhi


def residual_masked(rctx: _RCtx, zlo, zhi):
    """Reduced residual enclosures for a batch of boxes, shape (..., d).

    Returns (out_lo, out_hi, ok) where ok flags the boxes with no possible
    collision; rows with ok False carry unusable values.
    """
    mctx = rctx.m
    n = mctx.n
    xlo, xhi, ylo, yhi = box_to_free_arrays(zlo, zhi, n)
    d = model.pair_disp_arrays(mctx, xlo, xhi, ylo, yhi)
    r2lo, _ = model.pair_r2_arrays(*d)
    pair_ok = r2lo > 0.0
    ok = np.all(pair_ok, axis=-1)
    axlo, axhi, aylo, ayhi = model.accel_arrays(mctx, *d, pair_mask=pair_ok)
    fxlo, fxhi = bxo.isub(xlo, xhi, axlo[..., : n - 1], axhi[..., : n - 1])
    fylo, fyhi = bxo.isub(ylo, yhi, aylo[..., : n - 1], ayhi[..., : n - 1])
    out_lo = np.empty(zlo.shape)
    out_hi = np.empty(zhi.shape)
    out_lo[..., 0 : 2 * (n - 2) : 2] = fxlo[..., : n - 2]
    out_hi[..., 0 : 2 * (n - 2) : 2] = fxhi[..., : n - 2]
    out_lo[..., 1 : 2 * (n - 2) : 2] = fylo[..., : n - 2]
    out_hi[..., 1 : 2 * (n - 2) : 2] = fyhi[..., : n - 2]
    out_lo[..., -1] = fxlo[..., n - 2]
    out_hi[..., -1] = fxhi[..., n - 2]
    return out_lo, out_hi, ok


def residual_arrays(rctx: _RCtx, zlo, zhi):
    """Enclosure of the reduced residual; raises CollisionPossible."""
    out_lo, out_hi, ok = residual_masked(rctx, zlo, zhi)
    if not np.all(ok):
        raise CollisionPossible("reduced residual undefined: possible collision")
    return out_lo, out_hi


def jacobian_masked(rctx: _RCtx, zlo, zhi):
    """Reduced Jacobian enclosures for a batch of boxes, shape (B, d).

    Returns (Jlo, Jhi, ok) with Jlo/Jhi of shape (B, d, d); boxes with a
    possible collision get ok False and identity placeholders.  The mixed
    x*y/r^5 terms are bounded as the product of x/r^3 and y/r^2.
    """
    mctx = rctx.m
    n = mctx.n
    B = zlo.shape[0]
    dd = rctx.d
    xlo, xhi, ylo, yhi = box_to_free_arrays(zlo, zhi, n)
    dxlo, dxhi, dylo, dyhi = model.pair_disp_arrays(mctx, xlo, xhi, ylo, yhi)
    r2lo, _ = model.pair_r2_arrays(dxlo, dxhi, dylo, dyhi)
    ok = np.all(r2lo > 0.0, axis=-1)
    Jlo = np.broadcast_to(np.eye(dd), (B, dd, dd)).copy()
    Jhi = Jlo.copy()
    if not np.any(ok):
        return Jlo, Jhi, ok
    idx = np.nonzero(ok)[0]
    if len(idx) < B:
        dxlo, dxhi, dylo, dyhi = dxlo[idx], dxhi[idx], dylo[idx], dyhi[idx]
    k = len(idx)

    # per-pair second-derivative kernels: rows are (2,5)x, (2,5)y, (1,3)x, (1,2)y
    P = mctx.P
    qx_lo = np.concatenate([dxlo, dylo, dxlo, dylo], axis=-1).reshape(-1)
    qx_hi = np.concatenate([dxhi, dyhi, dxhi, dyhi], axis=-1).reshape(-1)
    qy_lo = np.concatenate([dylo, dxlo, dylo, dxlo], axis=-1).reshape(-1)
    qy_hi = np.concatenate([dyhi, dxhi, dyhi, dxhi], axis=-1).reshape(-1)
    klo, khi = kernels.bound_kernel_batch(
        qx_lo,
        qx_hi,
        qy_lo,
        qy_hi,
        np.tile(rctx.a_codes, k),
        np.tile(rctx.b_codes, k),
        np.tile(rctx.slope_lo, k),
        np.tile(rctx.slope_hi, k),
    )
    klo = klo.reshape(k, 4 * P)
    khi = khi.reshape(k, 4 * P)
    x25 = (klo[:, :P], khi[:, :P])
    y25 = (klo[:, P : 2 * P], khi[:, P : 2 * P])
    x13 = (klo[:, 2 * P : 3 * P], khi[:, 2 * P : 3 * P])
    y12 = (klo[:, 3 * P :], khi[:, 3 * P :])
    ir3 = kernels.inv_r_pow_batch(dxlo, dxhi, dylo, dyhi, 3)

    A = bxo.isub(*bxo.iscale(*x25, 3.0), *ir3)
    Bk = bxo.isub(*bxo.iscale(*y25, 3.0), *ir3)
    C = bxo.iscale(*bxo.imul(*x13, *y12), 3.0)

    nf = n - 1
    blocks_lo = np.empty((k, 3, nf, nf))
    blocks_hi = np.empty((k, 3, nf, nf))
    di = np.arange(nf)
    for code, (tlo, thi) in enumerate((A, C, Bk)):
        Flo, Fhi = tlo[:, rctx.fpi], thi[:, rctx.fpi]  # junk diagonal, overwritten below
        Llo, Lhi = tlo[:, rctx.lpi], thi[:, rctx.lpi]
        # off-diagonal: m_k * (T(i,last) - T(i,k))
        difflo, diffhi = bxo.isub(Llo[:, :, None], Lhi[:, :, None], Flo, Fhi)
        odlo, odhi = bxo.imul(rctx.MKlo, rctx.MKhi, difflo, diffhi)
        # diagonal: delta + sum_{j != i} m_j T(i,j) + (m_last + m_i) T(i,last)
        plo, phi = bxo.imul(rctx.MKlo, rctx.MKhi, Flo, Fhi)
        slo, shi = bxo.isum(plo, phi, axis=-1, where=rctx.offdiag)
        qlo, qhi = bxo.imul(rctx.mLi_lo, rctx.mLi_hi, Llo, Lhi)
        dglo, dghi = bxo.iadd(slo, shi, qlo, qhi)
        if code != 1:  # XX and YY carry the identity term
            dglo, dghi = bxo.iadd(dglo, dghi, np.ones(nf), np.ones(nf))
        odlo[:, di, di] = dglo
        odhi[:, di, di] = dghi
        blocks_lo[:, code] = odlo
        blocks_hi[:, code] = odhi

    codes = rctx.lay_axis[:, None] + rctx.lay_axis[None, :]
    rb = rctx.lay_body[:, None]
    cb = rctx.lay_body[None, :]
    Jlo[idx] = blocks_lo[:, codes, rb, cb]
    Jhi[idx] = blocks_hi[:, codes, rb, cb]
    return Jlo, Jhi, ok


def jacobian_arrays(rctx: _RCtx, zlo, zhi):
    """Single-box Jacobian enclosure; raises CollisionPossible."""
    Jlo, Jhi, ok = jacobian_masked(rctx, zlo[None, :], zhi[None, :])
    if not ok[0]:
        raise CollisionPossible("jacobian undefined: possible collision")
    return Jlo[0], Jhi[0]


# ---------------------------------------------------------------------------
# public operations


def reduced_residual(r: ReducedBox, masses: Masses) -> IntervalVector:
    """Enclosure of the 2(n-1)-1 residual components on the box."""
    rctx = reduced_ctx(masses)
    lo, hi = residual_arrays(rctx, *r.arrays())
    return IntervalVector(bxo.unpack(lo, hi))


def reduced_jacobian(r: ReducedBox, masses: Masses) -> IntervalMatrix:
    """Enclosure of the derivative of the reduced residual on the box."""
    rctx = reduced_ctx(masses)
    lo, hi = jacobian_arrays(rctx, *r.arrays())
    return IntervalMatrix(
        [[Interval(float(lo[i, j]), float(hi[i, j])) for j in range(rctx.d)] for i in range(rctx.d)]
    )


def jacobian_entry(c: ConfigurationBox, masses: Masses, row: int, col: int) -> Interval:
    """Single entry of the reduced Jacobian for a reduced-gauge configuration."""
    r = ReducedBox.from_configuration(c)
    rctx = reduced_ctx(masses)
    lo, hi = jacobian_arrays(rctx, *r.arrays())
    return Interval(float(lo[row, col]), float(hi[row, col]))


def gauge_validity(c: ConfigurationBox, masses: Masses) -> bool:
    """True iff the x enclosures of body n-2 and the derived body are disjoint."""
    pinned_x = c.bodies[-1].x
    derived = model.derive_last_body(c, masses)
    return pinned_x.disjoint(derived.x)
