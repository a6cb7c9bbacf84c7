import math

import numpy as np
import pytest

from gwsnake.offspring_laws import (
    LawError,
    binary,
    custom,
    geometric,
    normalization_for,
    parse_law,
    poisson,
    sample_offspring,
    stable_tail,
)

ALL_LAWS = [geometric(), poisson(), binary(), stable_tail(1.3), stable_tail(1.7), custom([0.3, 0.4, 0.3])]


@pytest.mark.parametrize("law", ALL_LAWS, ids=lambda l: l.family + str(l.alpha))
def test_mass_and_mean(law):
    total = math.fsum(law.table) + law.tail_mass
    assert abs(total - 1) <= 1e-12
    assert abs(law.mean - 1) <= 1e-12
    assert law.mu0 > 0


def test_geometric_moments():
    g = geometric(0.5)
    assert g.sigma2 == 2.0
    assert g.pmf(0) == 0.5 and g.pmf(3) == 2.0**-4
    # pmf beyond the table comes from the analytic tail
    assert g.pmf(100) == pytest.approx(2.0**-101, rel=1e-12)


def test_empirical_mean_within_four_sigma(rng):
    for law in (geometric(), poisson(), binary()):
        x = law.sample(rng, 10**6)
        assert abs(x.mean() - 1) <= 4 * math.sqrt(law.sigma2) / 1e3


def test_binary_support(rng):
    x = binary().sample(rng, 10**5)
    assert set(np.unique(x).tolist()) == {0, 2}
    assert sample_offspring(binary(), rng) in (0, 2)
    assert binary().period == 2 and geometric().period == 1


def test_stable_tail_frequencies(rng):
    law = stable_tail(1.3)
    N = 10**7
    x = law.sample(rng, N)
    c = law.params["c"]
    for K in (10, 100):
        p = law.sf(K)
        freq = (x >= K).mean()
        assert abs(freq - p) <= 3 * math.sqrt(p * (1 - p) / N)
        # regularly varying tail with the advertised constant
        assert 0.8 < p / (c * K**-1.3) < 1.25


def test_tail_sampler_beyond_table(rng):
    law = stable_tail(1.5, k_max=64)
    x = law.tail_sampler(rng, 200_000)
    assert x.min() >= 65
    for K in (100, 1000):
        p = law.sf(K) / law.tail_mass
        assert abs((x >= K).mean() - p) <= 4 * math.sqrt(p * (1 - p) / x.size)


def test_finite_variance_normalisation():
    assert normalization_for(geometric())(10**4) == pytest.approx(100.0)
    assert normalization_for(binary())(10**4) == pytest.approx(math.sqrt(5000))
    for law in (geometric(), poisson(), binary()):
        B = normalization_for(law)
        assert B.mode == "finite-variance-exact"
        assert B(400) / 20 == pytest.approx(math.sqrt(law.sigma2 / 2))


def test_quantile_normalisation_slope():
    law = stable_tail(1.3)
    B = normalization_for(law)
    assert B.mode == "quantile-calibrated"
    ns = np.array([10**k for k in range(3, 7)])
    slope = np.polyfit(np.log(ns), np.log([B(int(n)) for n in ns]), 1)[0]
    assert abs(slope - 1 / 1.3) <= 0.02


def test_normalisation_monotone():
    for law in (geometric(), stable_tail(1.3)):
        B = normalization_for(law)
        vals = [B(n) for n in range(1, 3000)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_incompatible_normalisation():
    with pytest.raises(LawError):
        normalization_for(stable_tail(1.3), "finite-variance-exact")
    B = normalization_for(geometric(), B=lambda n: 2.0 * n**0.5)
    assert B.mode == "user-supplied" and B(100) == 20.0


def test_parse_law(tmp_path):
    assert parse_law("geometric:0.5").family == "geometric"
    assert parse_law("poisson:1").sigma2 == 1.0
    assert parse_law("binary").table.tolist() == [0.5, 0.0, 0.5]
    s = parse_law("stable:alpha=1.3")
    assert s.alpha == 1.3 and math.isinf(s.sigma2)
    f = tmp_path / "law.csv"
    f.write_text("k,prob\n0,0.25\n1,0.5\n2,0.25\n")
    c = parse_law(f"custom:@{f}")
    assert c.sigma2 == pytest.approx(0.5)
    for bad in ("geometric:0.3", "poisson:2", "stable:c=1", "nope", "stable:alpha=2.5"):
        with pytest.raises(LawError):
            parse_law(bad)


def test_rejects_invalid_tables():
    with pytest.raises(LawError):
        custom([0.0, 1.0])  # mu(0) = 0
    with pytest.raises(LawError):
        custom([0.5, 0.0, 0.0, 0.5])  # mean 1.5
