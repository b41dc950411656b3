"""Kernel range bounds: worked examples, the dense-grid oracle, and the
tightness guarantees against the naive evaluation."""

import numpy as np
import pytest

from ccenum.errors import DomainError
from ccenum.interval import Interval
from ccenum.kernels import KernelQuery, SingularBox, bound_kernel, bound_kernel_batch
from oracles import kernel_grid_range


class TestExamples:
    def test_point_evaluation(self):
        out = bound_kernel(KernelQuery(Interval(1), Interval(0), 1, 3))
        assert out.contains(1.0) and out.width < 1e-12

    def test_monotone_edge(self):
        out = bound_kernel(KernelQuery(Interval(3, 4), Interval(0), 1, 3))
        assert out.contains(1 / 16) and out.contains(1 / 9)
        assert out.lo >= 1 / 16 - 1e-12 and out.hi <= 1 / 9 + 1e-12

    def test_square_box(self):
        out = bound_kernel(KernelQuery(Interval(1, 2), Interval(1, 2), 1, 3))
        glo, ghi = kernel_grid_range(1, 2, 1, 2, 1, 3, grid=2000)
        assert out.lo <= glo and ghi <= out.hi
        assert abs(out.lo - glo) < 1e-3 and abs(out.hi - ghi) < 1e-3
        # extrema at the corners (1,1) and (2,2)
        assert abs(out.hi - 1 / (2 * np.sqrt(2))) < 1e-6
        assert abs(out.lo - 2 / (8 * np.sqrt(8))) < 1e-6

    def test_singular_box_rejected(self):
        with pytest.raises(SingularBox):
            bound_kernel(KernelQuery(Interval(-1, 1), Interval(-1, 1), 1, 3))

    def test_bad_exponents(self):
        with pytest.raises(DomainError):
            KernelQuery(Interval(1), Interval(0), 3, 2)

    def test_axis_swap(self):
        qx = bound_kernel(KernelQuery(Interval(1, 2), Interval(3, 4), 1, 3, axis="X"))
        qy = bound_kernel(KernelQuery(Interval(3, 4), Interval(1, 2), 1, 3, axis="Y"))
        assert qx == qy


class TestOracleContainment:
    def test_grid_oracle_and_naive(self):
        rng = np.random.default_rng(2024)
        cases = 0
        while cases < 1000:
            a = int(rng.choice([1, 2]))
            b = int(rng.choice([2, 3, 5]))
            if not a < b:
                continue
            cx = rng.uniform(-3, 3)
            cy = rng.uniform(-3, 3)
            wx = rng.uniform(0.01, 2.0)
            wy = rng.uniform(0.01, 2.0)
            xlo, xhi = cx - wx, cx + wx
            ylo, yhi = cy - wy, cy + wy
            if xlo <= 0 <= xhi and ylo <= 0 <= yhi:
                continue
            cases += 1
            lo, hi = bound_kernel_batch(
                np.array([xlo]), np.array([xhi]), np.array([ylo]), np.array([yhi]), a, b
            )
            glo, ghi = kernel_grid_range(xlo, xhi, ylo, yhi, a, b, grid=64)
            assert lo[0] <= glo and ghi <= hi[0], (a, b, xlo, xhi, ylo, yhi)
            # contained in the naive evaluation
            x = Interval(xlo, xhi)
            y = Interval(ylo, yhi)
            r2 = x.sqr() + y.sqr()
            rb = r2.pow_int(b).sqrt() if b % 2 else r2.pow_int(b // 2)
            naive = x.pow_int(a) / rb
            assert naive.lo <= lo[0] + 1e-14 * max(1.0, abs(naive.lo))
            assert hi[0] <= naive.hi + 1e-14 * max(1.0, abs(naive.hi))
            assert hi[0] - lo[0] <= naive.width * (1 + 1e-12) + 1e-300

    def test_critical_line_candidates_complete(self):
        # [1,2]x[1,2] straddles y = x*sqrt(2); extremes happen to sit at
        # corners there, so also exercise a box whose edge maximum lies on
        # the critical line strictly inside an edge
        lo, hi = bound_kernel_batch(
            np.array([1.0]), np.array([2.0]), np.array([1.0]), np.array([2.0]), 1, 3
        )
        glo, ghi = kernel_grid_range(1.0, 2.0, 1.0, 2.0, 1, 3, grid=800)
        assert lo[0] <= glo and ghi <= hi[0]

        lo2, hi2 = bound_kernel_batch(
            np.array([1.0]), np.array([2.0]), np.array([2.0]), np.array([2.5]), 1, 3
        )
        corner_vals = [x / np.hypot(x, y) ** 3 for x in (1.0, 2.0) for y in (2.0, 2.5)]
        glo2, ghi2 = kernel_grid_range(1.0, 2.0, 2.0, 2.5, 1, 3, grid=800)
        assert lo2[0] <= glo2 and ghi2 <= hi2[0]
        # the edge maximum on y=2 sits at x = 2/sqrt(2); corners alone miss it
        assert ghi2 > max(corner_vals) + 1e-4
        assert hi2[0] >= ghi2


class TestBatchDegenerate:
    def test_degenerate_fast_path(self):
        lo, hi = bound_kernel_batch(
            np.array([1.0, 2.0]),
            np.array([1.0, 2.0]),
            np.array([0.0, 1.0]),
            np.array([0.0, 1.0]),
            1,
            3,
        )
        assert lo[0] <= 1.0 <= hi[0]
        v = 2.0 / np.hypot(2.0, 1.0) ** 3
        assert lo[1] <= v <= hi[1]
