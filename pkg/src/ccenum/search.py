"""Branch-and-prune driver over the reduced configuration space.

Each box first runs the exclusion battery; survivors small enough in
every coordinate (the `bias` gate) run the Krawczyk certification, whose
failed attempts still shrink the box.  Remaining boxes bisect along their
longest edge with an overlap margin so every point of the domain is
interior to some descendant, as the certification theorem requires.
Boxes narrower than `eps` everywhere with no verdict count as undecided;
an undecided box makes the run inconclusive, never silently dropped.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import boxops as bxo
from . import bounds as bounds_mod
from . import exclusion, krawczyk, model
from . import reduced as reduced_mod
from .errors import RefusedUnequalMasses
from .interval import Interval
from .model import Masses, ScalarEnclosures
from .reduced import ReducedBox

log = logging.getLogger("ccenum.search")

ORDERINGS = ("increasing", "decreasing")


@dataclass(frozen=True)
class SearchConfig:
    n: int
    eps: float = 1e-5
    bias: float = 1e-2
    overlap: float = 1e-3
    ordering: str = "decreasing"
    threads: int = 1
    parallel_depth: int | None = None
    rigorous: bool = True

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("need at least 3 bodies")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if not (0 <= self.overlap < 0.5):
            raise ValueError("overlap must lie in [0, 0.5)")
        if self.bias <= self.eps:
            raise ValueError("bias must exceed eps")
        if self.ordering not in ORDERINGS:
            raise ValueError(f"ordering must be one of {ORDERINGS}")
        if self.rigorous and self.overlap == 0.0:
            raise ValueError("overlap 0 breaks interior coverage; only allowed non-rigorously")

    def effective_parallel_depth(self) -> int:
        if self.parallel_depth is not None:
            return self.parallel_depth
        return max(1, math.ceil(math.log2(4 * max(1, self.threads))))


@dataclass
class SearchStats:
    calls: int = 0
    zeros_found: int = 0
    undecided: int = 0
    usage: dict = field(default_factory=dict)

    def bump(self, name: str, k: int = 1) -> None:
        self.usage[name] = self.usage.get(name, 0) + k

    def merge(self, other: "SearchStats") -> None:
        self.calls += other.calls
        self.zeros_found += other.zeros_found
        self.undecided += other.undecided
        for k, v in other.usage.items():
            self.bump(k, v)


@dataclass(frozen=True)
class SolutionBox:
    """A Krawczyk-certified box with exactly one central configuration."""

    reduced: ReducedBox
    full: model.ConfigurationBox
    scalars: ScalarEnclosures
    gauge_valid: bool


def initial_domain(cfg: SearchConfig) -> ReducedBox:
    """Normalized search box, padded so admissible points are interior."""
    n = cfg.n
    span = float(n - 1)
    pad = 1e-3 * span
    entries: list[Interval] = [Interval(-span - pad, 0.0 + pad), Interval(0.0 - pad, span + pad)]
    for i in range(1, n - 2):
        entries.append(Interval(-span - pad, span + pad))
        if i == 1:
            entries.append(Interval(-span - pad, 0.0 + pad))
        else:
            entries.append(Interval(-span - pad, span + pad))
    entries.append(Interval(0.5 - pad, span + pad))
    return ReducedBox.from_arrays(*bxo.pack(entries))


def bisect_with_overlap(
    box: ReducedBox, coord: int, overlap: float, allow_zero: bool = False
) -> tuple[ReducedBox, ReducedBox]:
    """Split `coord` at its midpoint with a relative overlap margin."""
    if overlap == 0.0 and not allow_zero:
        raise ValueError("zero overlap is only allowed in non-rigorous benchmarking")
    lo, hi = box.arrays()
    if hi[coord] <= lo[coord]:
        raise ValueError("cannot bisect a zero-width coordinate")
    left_lo, left_hi = lo.copy(), hi.copy()
    right_lo, right_hi = lo.copy(), hi.copy()
    mid = (lo[coord] + hi[coord]) / 2.0
    margin = (hi[coord] - lo[coord]) * overlap
    left_hi[coord] = mid + margin
    right_lo[coord] = mid - margin
    return ReducedBox.from_arrays(left_lo, left_hi), ReducedBox.from_arrays(right_lo, right_hi)


def make_solution(rctx, Klo, Khi, masses: Masses) -> SolutionBox:
    rb = ReducedBox.from_arrays(Klo, Khi)
    full = rb.to_configuration()
    sc = model.scalars(full, masses)
    gv = reduced_mod.gauge_validity(full, masses)
    return SolutionBox(reduced=rb, full=full, scalars=sc, gauge_valid=gv)


BATCH = 128


def _search_loop(
    rctx, bset, cfg: SearchConfig, masses: Masses, roots, depth0: int, frontier_depth: int | None
):
    """Iterative depth-first search, processing the stack in batched chunks.

    With `frontier_depth` set, boxes reaching that depth are returned
    unprocessed (for parallel dispatch) instead of being explored.
    """
    stats = SearchStats()
    solutions: list[SolutionBox] = []
    undecided_boxes: list[tuple[np.ndarray, np.ndarray]] = []
    frontier: list[tuple[np.ndarray, np.ndarray]] = []
    stack = [(lo, hi, depth0) for lo, hi in reversed(roots)]
    report_every = 500000
    next_report = report_every
    while stack:
        take = min(BATCH, len(stack))
        chunk = stack[-take:]
        del stack[-take:]
        if frontier_depth is not None:
            kept = []
            for item in chunk:
                if item[2] >= frontier_depth:
                    frontier.append((item[0], item[1]))
                else:
                    kept.append(item)
            chunk = kept
            if not chunk:
                continue
        zlo = np.stack([c[0] for c in chunk])
        zhi = np.stack([c[1] for c in chunk])
        depths = [c[2] for c in chunk]
        stats.calls += len(chunk)
        if log.isEnabledFor(logging.DEBUG) and stats.calls >= next_report:
            next_report += report_every
            log.debug("search calls=%d stack=%d", stats.calls, len(stack))
        status, out_lo, out_hi = exclusion.run_battery_batch(
            rctx.m, bset, zlo, zhi, cfg.ordering
        )
        # gather the boxes small enough for certification and run them together
        kr_rows = [
            b
            for b in range(len(chunk))
            if status[b] == exclusion.SURVIVED
            and np.all(out_hi[b] - out_lo[b] <= cfg.bias)
        ]
        kr_outcomes = {}
        if kr_rows:
            sel = np.array(kr_rows)
            outs = krawczyk.iterate_batch(rctx, out_lo[sel], out_hi[sel])
            kr_outcomes = dict(zip(kr_rows, outs))
        children = []
        for b in range(len(chunk)):
            st = int(status[b])
            if st < exclusion.SURVIVED:
                stats.bump(exclusion.TEST_NAMES[st])
                continue
            blo = out_lo[b]
            bhi = out_hi[b]
            outcome = kr_outcomes.get(b)
            if outcome is not None:
                if outcome.tag == "unique_zero":
                    stats.bump("krawczyk.zeroInside")
                    stats.zeros_found += 1
                    solutions.append(make_solution(rctx, outcome.lo, outcome.hi, masses))
                    continue
                if outcome.tag == "no_zero":
                    stats.bump("krawczyk.noZeroInSet")
                    continue
                stats.bump("krawczyk.methodFailed")
                blo, bhi = outcome.lo, outcome.hi
            widths = bhi - blo
            if np.max(widths) < cfg.eps:
                stats.undecided += 1
                undecided_boxes.append((blo, bhi))
                continue
            coord = int(np.argmax(widths))
            mid = (blo[coord] + bhi[coord]) / 2.0
            margin = widths[coord] * cfg.overlap
            llo, lhi = blo.copy(), bhi.copy()
            rlo, rhi = blo.copy(), bhi.copy()
            lhi[coord] = mid + margin
            rlo[coord] = mid - margin
            children.append((rlo, rhi, depths[b] + 1))
            children.append((llo, lhi, depths[b] + 1))
        # keep depth-first flavor: the last chunk element's children end on top
        stack.extend(children)
    return solutions, stats, undecided_boxes, frontier


def _subtree_task(args):
    n, mass_key, cfg_kwargs, lo_list, hi_list = args
    masses = Masses([Interval(a, b) for a, b in mass_key])
    cfg = SearchConfig(**cfg_kwargs)
    rctx = reduced_mod.reduced_ctx(masses)
    bset = bounds_mod.compute_bounds(n, masses)
    roots = [(np.array(lo_list), np.array(hi_list))]
    sols, stats, undec, _ = _search_loop(rctx, bset, cfg, masses, roots, 0, None)
    packed = [(s.reduced.arrays()[0].tolist(), s.reduced.arrays()[1].tolist()) for s in sols]
    return packed, stats, [(lo.tolist(), hi.tolist()) for lo, hi in undec]


def search(box: ReducedBox, cfg: SearchConfig, masses: Masses):
    """All certified solutions in the box plus run statistics.

    Returns (solutions, stats, undecided_boxes); a run is a proof only
    when no undecided boxes remain.
    """
    if not masses.equal_mass:
        raise RefusedUnequalMasses("the normalized search domain assumes equal masses")
    rctx = reduced_mod.reduced_ctx(masses)
    bset = bounds_mod.compute_bounds(cfg.n, masses)
    zlo, zhi = box.arrays()
    if cfg.threads <= 1:
        sols, stats, undec, _ = _search_loop(rctx, bset, cfg, masses, [(zlo, zhi)], 0, None)
        return sols, stats, undec
    depth = cfg.effective_parallel_depth()
    sols, stats, undec, frontier = _search_loop(rctx, bset, cfg, masses, [(zlo, zhi)], 0, depth)
    cfg_kwargs = dict(
        n=cfg.n,
        eps=cfg.eps,
        bias=cfg.bias,
        overlap=cfg.overlap,
        ordering=cfg.ordering,
        threads=1,
        rigorous=cfg.rigorous,
    )
    tasks = [
        (cfg.n, masses.key(), cfg_kwargs, lo.tolist(), hi.tolist()) for lo, hi in frontier
    ]
    workers = min(cfg.threads, max(1, os.cpu_count() or 1))
    if tasks:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for packed, sub_stats, sub_undec in pool.map(_subtree_task, tasks):
                stats.merge(sub_stats)
                for lo_list, hi_list in packed:
                    sols.append(
                        make_solution(rctx, np.array(lo_list), np.array(hi_list), masses)
                    )
                undec.extend((np.array(a), np.array(b)) for a, b in sub_undec)
    return sols, stats, undec
