import dataclasses
import math

import numpy as np
import pytest
from scipy import stats

from scsnet import (
    Dimension,
    LogNormalFading,
    MomentFading,
    NetworkSpec,
    Sector,
    Tier,
    UnsupportedSettingError,
    default_r_max,
    empirical_tail_ci,
    empirical_tail_cin,
    empirical_tail_fewbs,
    realize,
    sample_field,
    substream,
    tail_ci,
)
from scsnet.montecarlo import RngSeed, _arrival_matrix, _draw_marks

D2 = Dimension(2)


def canonical(l=2, eps=4.0, lam=1.0, noise=0.0):
    return NetworkSpec(dim=Dimension(l), epsilon=eps,
                       tiers=(Tier(density=lam, power=1.0),), noise=noise)


class TestSampleField:
    def test_count_is_poisson_mean(self):
        # count within r_max ~ Poisson(lambda b r^l / l); vectorized over rows
        lam, r_max = 1.0, 4.0
        t_max = lam * D2.b * r_max**2 / 2
        rng = substream(1, 0)
        t = _arrival_matrix(rng, 10_000, t_max, t_max)
        counts = (t < t_max).sum(axis=1)
        mean = counts.mean()
        se = counts.std() / math.sqrt(len(counts))
        assert abs(mean - t_max) < 3.0 * se
        # variance should match a Poisson law as well (loose sanity band)
        assert counts.var() == pytest.approx(t_max, rel=0.1)

    def test_increments_are_unit_exponential(self):
        rng = substream(2, 0)
        incs = []
        for _ in range(200):
            r = sample_field(D2, 1.0, 6.0, rng)
            t = D2.b * r**2 / 2
            incs.append(np.diff(t))
        incs = np.concatenate(incs)
        assert stats.kstest(incs, "expon").pvalue > 0.01

    def test_nearest_distance_median(self):
        # median of R1 is sqrt(ln 2 / (pi lambda)) in the plane
        lam = 1.0
        rng = substream(3, 0)
        t1 = rng.exponential(size=100_000)  # first arrival of the radial process
        r1 = np.sqrt(2.0 * t1 / (lam * D2.b))
        want = math.sqrt(math.log(2.0) / (math.pi * lam))
        med = np.median(r1)
        # SE of the sample median: 1 / (2 f(median) sqrt(n))
        f_med = lam * D2.b * want * math.exp(-lam * D2.b * want**2 / 2)
        se = 1.0 / (2.0 * f_med * math.sqrt(len(r1)))
        assert abs(med - want) < 3.0 * se
        # and the library path produces the same law (small-sample check)
        rs = np.array([sample_field(D2, lam, 6.0, rng)[0] for _ in range(500)])
        assert abs(np.median(rs) - want) < 5.0 / (2.0 * f_med * math.sqrt(500))

    def test_ascending_and_bounded(self):
        rng = substream(4, 0)
        r = sample_field(D2, 2.0, 3.0, rng)
        assert np.all(np.diff(r) >= 0)
        assert r.max() < 3.0

    def test_domain(self):
        rng = substream(5, 0)
        with pytest.raises(ValueError):
            sample_field(D2, 0.0, 1.0, rng)
        with pytest.raises(ValueError):
            sample_field(D2, 1.0, 0.0, rng)


class TestRealize:
    def test_serving_is_nearest_for_constant_marks(self):
        spec = canonical()
        rng = substream(6, 0)
        for _ in range(200):
            r = realize(spec, 5.0, rng)
            assert r.serving_index == 0
            assert r.p_s == pytest.approx(r.distances[0] ** -4.0)

    def test_full_beam_sectoring_matches_unsectored_bitwise(self):
        plain = canonical()
        sect = NetworkSpec(
            dim=D2, epsilon=4.0,
            tiers=(Tier(1.0, 1.0, Sector(gain=1.0, beamwidth=2 * math.pi)),),
        )
        r1 = realize(plain, 5.0, substream(42, 0))
        r2 = realize(sect, 5.0, substream(42, 0))
        np.testing.assert_array_equal(r1.distances, r2.distances)
        assert r1.p_s == r2.p_s
        assert r1.p_i == r2.p_i
        assert r1.serving_index == r2.serving_index

    def test_zero_power_fraction_matches_sector_pmf(self):
        theta = 2 * math.pi / 3
        spec = NetworkSpec(
            dim=D2, epsilon=4.0,
            tiers=(Tier(1.0, 1.0, Sector(gain=3.0, beamwidth=theta)),),
        )
        rng = substream(7, 0)
        powers, _ = _draw_marks(spec, rng, (100_000,))
        frac = float((powers == 0.0).mean())
        want = 1.0 - theta / (2 * math.pi)
        se = math.sqrt(want * (1 - want) / 100_000)
        assert abs(frac - want) < 3.0 * se

    def test_moment_fading_cannot_be_sampled(self):
        spec = dataclasses.replace(canonical(), fading=MomentFading(1.3))
        with pytest.raises(UnsupportedSettingError):
            realize(spec, 5.0, substream(8, 0))

    def test_far_field_compensation_positive(self):
        r = realize(canonical(), 5.0, substream(9, 0))
        assert r.p_i > 0


class TestEmpiricalTails:
    def test_eta_zero_tail_is_one(self):
        emp = empirical_tail_ci(canonical(), [0.0, 1.0], 5_000, 10)
        assert emp.tails[0] == 1.0

    def test_reproducible_bitwise(self):
        spec = canonical(noise=0.2)
        a = empirical_tail_cin(spec, [0.5, 1.0, 2.0], 30_000, 123)
        b = empirical_tail_cin(spec, [0.5, 1.0, 2.0], 30_000, 123)
        assert a == b

    def test_substream_isolation(self):
        # realization j is pinned to (block, row), so growing n only appends
        spec = canonical()
        small = empirical_tail_ci(spec, [1.0], 4_096, 9)
        big = empirical_tail_ci(spec, [1.0], 8_192, 9)
        # first block contributes identically: recover its count from totals
        rng_counts = empirical_tail_ci(spec, [1.0], 4_096, 9)
        assert small == rng_counts
        assert abs(big.tails[0] - small.tails[0]) < 0.05

    def test_cin_never_exceeds_ci(self):
        spec = canonical(noise=0.5)
        etas = [0.25, 0.5, 1.0, 2.0, 4.0]
        ci = empirical_tail_ci(spec, etas, 20_000, 11)
        cin = empirical_tail_cin(spec, etas, 20_000, 11)
        for t_ci, t_cin in zip(ci.tails, cin.tails):
            assert t_cin <= t_ci

    def test_brackets_exact_inversion(self):
        emp = empirical_tail_ci(canonical(), [0.5, 1.0, 2.0], 150_000, 12)
        for i, eta in enumerate(emp.etas):
            assert abs(tail_ci(2.0, eta) - emp.tails[i]) <= emp.halfwidths[i]

    def test_truncation_radius_insensitive(self):
        spec = canonical()
        etas = [0.5, 1.0, 2.0]
        r0 = default_r_max(spec)
        base = empirical_tail_ci(spec, etas, 100_000, 13, r_max=r0)
        double = empirical_tail_ci(spec, etas, 100_000, 13, r_max=2 * r0)
        for t1, h1, t2 in zip(base.tails, base.halfwidths, double.tails):
            assert abs(t1 - t2) <= h1

    def test_fading_leaves_ci_unchanged(self):
        # the single-tier C/I law is blind to i.i.d. shadow fading
        etas = [0.5, 1.0, 2.0]
        plain = empirical_tail_ci(canonical(), etas, 100_000, 14)
        faded_spec = dataclasses.replace(canonical(), fading=LogNormalFading(1.0))
        faded = empirical_tail_ci(faded_spec, etas, 100_000, 15)
        for t1, h1, t2, h2 in zip(plain.tails, plain.halfwidths,
                                  faded.tails, faded.halfwidths):
            assert abs(t1 - t2) <= math.hypot(h1, h2)

    def test_two_tier_equals_collapsed_single_tier(self):
        # mixed powers versus the equivalent plain field, both simulated
        two = NetworkSpec(dim=D2, epsilon=4.0,
                          tiers=(Tier(1.0, 10.0), Tier(3.0, 1.0)))
        e_k = 0.25 * 10.0**0.5 + 0.75 * 1.0
        collapsed = canonical(lam=4.0 * e_k)
        etas = [0.5, 1.0, 2.0]
        mc_two = empirical_tail_ci(two, etas, 100_000, 41)
        mc_one = empirical_tail_ci(collapsed, etas, 100_000, 42)
        for t1, h1, t2, h2 in zip(mc_two.tails, mc_two.halfwidths,
                                  mc_one.tails, mc_one.halfwidths):
            assert abs(t1 - t2) <= math.hypot(h1, h2)

    def test_scaled_system_equals_normalized_system(self):
        # (lambda, eps, K, N) and (1, eps, 1, N') share the C/(I+N) law
        lam, kpow, noise = 3.0, 2.0, 4.0
        spec = NetworkSpec(dim=D2, epsilon=4.0, tiers=(Tier(lam, kpow),),
                           noise=noise)
        nprime = noise / (lam**2.0 * kpow)
        unit = canonical(noise=nprime)
        etas = [0.5, 1.0, 2.0]
        mc_full = empirical_tail_cin(spec, etas, 100_000, 43)
        mc_unit = empirical_tail_cin(unit, etas, 100_000, 44)
        for t1, h1, t2, h2 in zip(mc_full.tails, mc_full.halfwidths,
                                  mc_unit.tails, mc_unit.halfwidths):
            assert abs(t1 - t2) <= math.hypot(h1, h2)

    def test_unsorted_etas_rejected(self):
        with pytest.raises(ValueError):
            empirical_tail_ci(canonical(), [2.0, 1.0], 1_000, 0)

    def test_csv_format(self, tmp_path):
        emp = empirical_tail_ci(canonical(), [1.0], 2_000, 3)
        path = tmp_path / "tail.csv"
        emp.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "eta,tail,ci_halfwidth,n,seed,method"
        eta, tail, hw, n, seed, method = lines[1].split(",")
        assert float(tail) == emp.tails[0]
        assert int(n) == 2_000 and method == "mc-ci"


class TestFewBs:
    def test_eta_zero(self):
        emp = empirical_tail_fewbs(canonical(), [0.0, 1.0], 2_000, 1)
        assert emp.tails[0] == 1.0

    def test_requires_plain_single_tier(self):
        two = NetworkSpec(dim=D2, epsilon=4.0,
                          tiers=(Tier(1.0, 1.0), Tier(1.0, 2.0)))
        with pytest.raises(UnsupportedSettingError):
            empirical_tail_fewbs(two, [1.0], 1_000, 0)
        faded = dataclasses.replace(canonical(), fading=LogNormalFading(1.0))
        with pytest.raises(UnsupportedSettingError):
            empirical_tail_fewbs(faded, [1.0], 1_000, 0)
        sect = NetworkSpec(
            dim=D2, epsilon=4.0,
            tiers=(Tier(1.0, 1.0, Sector(gain=2.0, beamwidth=1.0)),),
        )
        with pytest.raises(UnsupportedSettingError):
            empirical_tail_fewbs(sect, [1.0], 1_000, 0)

    def test_stays_close_to_full_field(self):
        # Measured regression bound: the strongest-two tail tracks the full
        # field within 0.016 everywhere on this grid.  Above eta = 1 the
        # exact tail sits strictly higher (the tail ratio K/C is 1.025 at
        # ratio 2), so closeness rather than one-sided dominance is the
        # property that actually holds.
        etas = [0.25, 0.5, 1.0, 2.0]
        full = empirical_tail_ci(canonical(), etas, 100_000, 21)
        few = empirical_tail_fewbs(canonical(), etas, 100_000, 21)
        for t_full, h_full, t_few, h_few in zip(
            full.tails, full.halfwidths, few.tails, few.halfwidths
        ):
            assert abs(t_few - t_full) <= 0.016 + 2.0 * math.hypot(h_full, h_few)

    def test_higher_k_supported(self):
        emp3 = empirical_tail_fewbs(canonical(), [0.5, 1.0], 20_000, 22, k=3)
        emp2 = empirical_tail_fewbs(canonical(), [0.5, 1.0], 20_000, 22, k=2)
        assert all(0 <= t <= 1 for t in emp3.tails)
        # k=3 keeps more randomness than k=2, so the tails differ slightly
        assert emp3 != emp2


class TestSeeding:
    def test_rng_seed_type(self):
        g1 = RngSeed(7, 3).generator()
        g2 = substream(7, 3)
        assert g1.random() == g2.random()

    def test_streams_differ(self):
        assert substream(7, 0).random() != substream(7, 1).random()

    def test_default_r_max_keeps_compensation_small(self):
        from scsnet.montecarlo import _simulate_blocks

        spec = canonical()
        r = default_r_max(spec)
        comp = spec.total_density * D2.b * r**-2.0 / 2.0
        p_i = np.concatenate(
            [pi for _, pi, _ in _simulate_blocks(spec, r, 10_000, 33)]
        )
        # the radius is solved so compensation ~ 1% of typical interference
        assert comp <= 0.02 * float(np.median(p_i))
