"""Exclusion battery: worked examples per test, partition properties, and
the master soundness property (no test excludes a box around a true
configuration)."""

import numpy as np
import pytest

from ccenum import exclusion
from ccenum import reduced as reduced_mod
from ccenum.bounds import compute_bounds
from ccenum.errors import RefusedUnequalMasses
from ccenum.interval import Interval
from ccenum.model import BodyBox, ConfigurationBox, Masses
from conftest import load_listed
from oracles import polish_listed

D3 = (5.0 / 12.0) ** (1.0 / 3.0)
R3 = 3.0**-0.5


def config_around(bodies, w):
    return ConfigurationBox(
        [BodyBox(Interval(x - w, x + w), Interval(y - w, y + w)) for x, y in bodies[:-1]]
    )


def equilateral_box(w):
    return config_around([(-R3 / 2, -0.5), (R3, 0.0), (-R3 / 2, 0.5)], w)


class TestCheckZero:
    def test_refines_near_cc(self):
        # off-center box (the configuration still inside): the acceleration
        # enclosure clips the box from one side
        w, s = 1e-2, 0.8e-2
        bodies = [
            BodyBox(Interval(-R3 / 2 - w + s, -R3 / 2 + w + s), Interval(-0.5 - w + s, -0.5 + w + s)),
            BodyBox(Interval(R3 - w - s, R3 + w - s), Interval(-w, w)),
        ]
        c = ConfigurationBox(bodies)
        v = exclusion.check_zero_refine(c, Masses.equal(3))
        assert v.outcome == "Refined"
        widths_before = [b.x.width + b.y.width for b in c.bodies]
        widths_after = [b.x.width + b.y.width for b in v.refined.bodies]
        assert sum(widths_after) < sum(widths_before)

    def test_excludes_scaled(self):
        c = config_around([(-R3, -1.0), (2 * R3, 0.0), (-R3, 1.0)], 1e-3)
        v = exclusion.check_zero_refine(c, Masses.equal(3))
        assert v.outcome == "Excluded"

    def test_collision_tolerant(self):
        bodies = [
            BodyBox(Interval(0.4, 0.6), Interval(-0.1, 0.1)),
            BodyBox(Interval(0.45, 0.65), Interval(-0.1, 0.1)),
        ]
        v = exclusion.check_zero_refine(ConfigurationBox(bodies), Masses.equal(3))
        assert v.outcome in ("Refined", "Unknown", "Excluded")


class TestClusterPartition:
    def test_separated_singletons(self):
        c = config_around([(-1.0, 0.0), (1.0, 0.0), (0.0, 0.0)], 1e-3)
        parts = exclusion.cluster_partition(c, Masses.equal(3), 0.1)
        assert sorted(len(p.members) for p in parts) == [1, 1, 1]

    def test_overlapping_pair(self):
        bodies = [
            BodyBox(Interval(0.4, 0.6), Interval(-0.1, 0.1)),
            BodyBox(Interval(0.45, 0.65), Interval(-0.1, 0.1)),
        ]
        parts = exclusion.cluster_partition(ConfigurationBox(bodies), Masses.equal(3), 0.0)
        sizes = sorted(len(p.members) for p in parts)
        assert sizes == [1, 2]

    def test_huge_epsilon_single_cluster(self):
        c = config_around([(-1.0, 0.0), (1.0, 0.0), (0.0, 0.0)], 1e-3)
        parts = exclusion.cluster_partition(c, Masses.equal(3), 100.0)
        assert len(parts) == 1 and len(parts[0].members) == 3

    def test_partition_covers_and_disjoint(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.choice([3, 4, 5]))
            pts = rng.uniform(-1, 1, (n - 1, 2))
            c = config_around(np.vstack([pts, [[0, 0]]]), rng.uniform(0, 0.05))
            eps = float(rng.uniform(0, 1.0))
            parts = exclusion.cluster_partition(c, Masses.equal(n), eps)
            seen = set()
            for p in parts:
                assert not (seen & p.members)
                seen |= p.members
            assert seen == set(range(n))


class TestClusterTests:
    def test_full_cluster_zero_skipped(self):
        # center of mass vanishes by construction, the test never fires
        c = config_around([(0.2, 0.0), (0.5, 0.0), (0.9, 0.0)], 1e-3)
        cl = exclusion.Cluster(frozenset({0, 1, 2}), 0.0)
        assert exclusion.cluster_zero_test(c, cl, Masses.equal(3)) == "Unknown"

    def test_pair_cluster_zero(self):
        # two tight boxes near (0.5, 0) with the third far left; the summed
        # equation for the pair cannot vanish
        bodies = [
            BodyBox(Interval(0.495, 0.505), Interval(-0.005, 0.005)),
            BodyBox(Interval(0.505, 0.515), Interval(-0.005, 0.005)),
        ]
        c = ConfigurationBox(bodies)  # derived body lands near (-1, 0)
        cl = exclusion.Cluster(frozenset({0, 1}), 0.05)
        out = exclusion.cluster_zero_test(c, cl, Masses.equal(3))
        assert out == "Excluded"

    def test_fui_near_collision(self):
        m = Masses.equal(3)
        bodies = [
            BodyBox(Interval(0.4995, 0.5005), Interval(-0.0005, 0.0005)),
            BodyBox(Interval(0.4995, 0.5005), Interval(-0.0005, 0.0005)),
        ]
        c = ConfigurationBox(bodies)
        cl = exclusion.Cluster(frozenset({0, 1}), 0.01)
        assert exclusion.cluster_fui_test(c, cl, m) == "Excluded"

    def test_fui_whole_set_complementary(self):
        c = config_around([(-2.0, 0.0), (2.0, 0.0), (0.0, 0.0)], 1e-4)
        cl = exclusion.Cluster(frozenset({0, 1, 2}), 0.0)
        assert exclusion.cluster_fui_test(c, cl, Masses.equal(3)) == "Excluded"

    def test_true_cc_unknown(self):
        c = equilateral_box(1e-4)
        for members in ({0, 1}, {0, 1, 2}):
            cl = exclusion.Cluster(frozenset(members), 0.0)
            assert exclusion.cluster_zero_test(c, cl, Masses.equal(3)) == "Unknown"
            assert exclusion.cluster_fui_test(c, cl, Masses.equal(3)) == "Unknown"


class TestUEqI:
    def test_disjoint_excludes(self):
        c = config_around([(-2.0, 0.0), (2.0, 0.0), (0.0, 0.0)], 1e-4)
        assert exclusion.check_u_eq_i(c, Masses.equal(3)) == "Excluded"

    def test_true_cc_unknown(self):
        assert exclusion.check_u_eq_i(equilateral_box(1e-4), Masses.equal(3)) == "Unknown"

    def test_collision_skipped(self):
        bodies = [
            BodyBox(Interval(0.4, 0.6), Interval(-0.1, 0.1)),
            BodyBox(Interval(0.45, 0.65), Interval(-0.1, 0.1)),
        ]
        assert exclusion.check_u_eq_i(ConfigurationBox(bodies), Masses.equal(3)) == "Unknown"


class TestDistanceOrder:
    def test_middle_order_violation_n5(self):
        m = Masses.equal(5)
        # derived body lands at (-0.7, 0.1); the n=5 chain is x_2 vs derived x
        bodies = [
            BodyBox(Interval(-0.7), Interval(0.3)),
            BodyBox(Interval(0.0), Interval(-0.5)),
            BodyBox(Interval(0.5), Interval(0.1)),
            BodyBox(Interval(0.9), Interval(0.0)),
        ]
        c = ConfigurationBox(bodies)
        assert exclusion.distance_order_test(c, 5, "increasing", m) == "Excluded"
        assert exclusion.distance_order_test(c, 5, "decreasing", m) == "Unknown"

    def test_negative_y0_excluded_n3(self):
        bodies = [
            BodyBox(Interval(-0.6), Interval(-0.4, -0.2)),
            BodyBox(Interval(0.7), Interval(0.0)),
        ]
        out = exclusion.distance_order_test(ConfigurationBox(bodies), 3, "increasing", Masses.equal(3))
        assert out == "Excluded"

    def test_derived_farther_than_pinned_excluded(self):
        # derived body provably farther from the origin than x_{n-2}
        bodies = [
            BodyBox(Interval(-2.0), Interval(0.5)),
            BodyBox(Interval(-1.5), Interval(-0.5)),
            BodyBox(Interval(0.6), Interval(0.0)),
        ]
        out = exclusion.distance_order_test(ConfigurationBox(bodies), 4, "increasing", Masses.equal(4))
        assert out == "Excluded"

    def test_unequal_masses_refused(self):
        bodies = [BodyBox(Interval(-0.5), Interval(0.1)), BodyBox(Interval(0.7), Interval(0.0))]
        with pytest.raises(RefusedUnequalMasses):
            exclusion.distance_order_test(
                ConfigurationBox(bodies), 3, "increasing", Masses.from_floats([0.2, 0.3, 0.5])
            )


class TestRefinementSoundness:
    def test_refined_box_keeps_the_zero(self):
        """Whatever checkZero discards, the contained solution survives."""
        from oracles import newton_polish

        z = newton_polish(np.array([-D3, 0.0, D3]), 3)
        m = Masses.equal(3)
        rng = np.random.default_rng(17)
        refined_seen = 0
        for _ in range(60):
            w = rng.uniform(1e-3, 2e-2)
            shift = rng.uniform(-0.9, 0.9, 3) * w
            lo = z + shift - w
            hi = z + shift + w
            ctx = reduced_mod.reduced_ctx(m)
            status, out_lo, out_hi = exclusion.run_battery_batch(
                ctx.m, compute_bounds(3, m), lo[None, :], hi[None, :], "decreasing"
            )
            assert status[0] == exclusion.SURVIVED, "box contains a true solution"
            if np.any(out_lo[0] > lo) or np.any(out_hi[0] < hi):
                refined_seen += 1
                assert np.all(out_lo[0] <= z + 1e-12) and np.all(z - 1e-12 <= out_hi[0])
        assert refined_seen > 0


class TestSoundness:
    def test_geometric_tests_never_exclude_listed_ccs(self):
        """The label-independent tests may not fire on a small box around a
        true configuration (the body-order test depends on the labeling and
        is covered on the search's own solutions instead)."""
        for n in (3, 4, 5, 6, 7):
            m = Masses.equal(n)
            bset = compute_bounds(n, m)
            for pts in load_listed(n):
                z, bodies = polish_listed(pts)
                c = config_around([tuple(p) for p in bodies], 1e-6)
                from ccenum.bounds import check_apriori

                assert check_apriori(c, bset, m) == "Possible", (n, pts)
                assert exclusion.check_u_eq_i(c, m) != "Excluded", (n, pts)
                v = exclusion.check_zero_refine(c, m)
                assert v.outcome != "Excluded", (n, pts)
                for eps in (0.0, 2e-6):
                    for cl in exclusion.cluster_partition(c, m, eps):
                        assert exclusion.cluster_zero_test(c, cl, m) != "Excluded"
                        assert exclusion.cluster_fui_test(c, cl, m) != "Excluded"

    def test_full_battery_keeps_oriented_ccs(self, run_n3):
        """On the search's own certified solutions (correctly oriented by
        construction) the whole battery must stay silent."""
        m = run_n3.masses
        ctx = reduced_mod.reduced_ctx(m)
        bset = compute_bounds(3, m)
        for sol in run_n3.solutions:
            lo, hi = sol.reduced.arrays()
            mid = lo + 0.5 * (hi - lo)
            from oracles import newton_polish

            z = newton_polish(mid, 3)
            status, _, _ = exclusion.run_battery_batch(
                ctx.m, bset, z[None, :] - 1e-6, z[None, :] + 1e-6, run_n3.cfg.ordering
            )
            assert status[0] == exclusion.SURVIVED