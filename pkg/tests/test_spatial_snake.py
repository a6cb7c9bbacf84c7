import math

import numpy as np
import pytest

from gwsnake.offspring_laws import geometric
from gwsnake.spatial_snake import (
    RegimePareto,
    Shifted,
    SymmetricPareto,
    Uniform3,
    UniformInterval,
    conditional_moment_check,
    cutoff,
    decorate,
    decorate_with,
    default_cutoff,
    parse_displacement,
    quantize,
)
from gwsnake.tree_codec import PlaneTree, chain
from gwsnake.tree_sampler import sample_tree

WORKED_HSP = [0, -1, -2, 1, 0, 0, -1, -2, -1, 0, 1, 0, -1, -2, 0, -1, 0]


def test_worked_positions(worked_tree):
    # displacement of v is its position minus its parent's
    S = np.array(WORKED_HSP, float)
    par = worked_tree.parent
    Y = np.r_[0.0, S[1:] - S[par[1:]]]
    snake = decorate_with(worked_tree, Y)
    assert snake.Hsp.tolist() == WORKED_HSP
    assert snake.Csp[worked_tree.first_visit].tolist() == WORKED_HSP


def test_trivial_decorations(rng):
    t = sample_tree(geometric(), 200, rng)
    z = decorate_with(t, np.zeros(201))
    assert not z.Hsp.any() and not z.Csp.any()
    c = decorate_with(chain(10), np.ones(10))
    assert c.Hsp.tolist() == list(range(10))


def test_law_moments():
    assert Uniform3().second_moment == pytest.approx(2 / 3)
    assert UniformInterval(-1, 1).second_moment == pytest.approx(1 / 3)
    assert UniformInterval(-0.5, 0.5).variance == pytest.approx(1 / 12)
    p = SymmetricPareto(10)
    assert p.sf_abs(1.0) == pytest.approx(2.0**-10)
    assert p.second_moment == pytest.approx(2 / (9 * 8))
    assert Shifted(Uniform3(), 1.0).mean == 1.0
    assert Shifted(Uniform3(), 1.0).variance == pytest.approx(2 / 3)


def test_pareto_sampling(rng):
    p = SymmetricPareto(3.0)
    y = p.sample(rng, 10**6)
    for q in (0.5, 2.0, 5.0):
        prob = p.sf_abs(q)
        assert abs((np.abs(y) > q).mean() - prob) <= 4 * math.sqrt(prob / 1e6)


@pytest.mark.parametrize("p,ap,am", [(2, 1, 1), (2, 1, 0), (2, 2, 0.5), (0.6, 1, 1), (1, 0, 1)])
def test_regime_calibration(p, ap, am, rng):
    n, B = 10**4, 100.0
    law = RegimePareto(p, ap, am).calibrate(n, B, 2.0)
    t = (n / B) ** (1 / p)
    assert n * law.sf_pos(t) == pytest.approx(ap)
    assert n * law.sf_neg(t) == pytest.approx(am)
    y = law.sample(rng, 2 * 10**6)
    if law.kappa > 1:
        assert law.mean == pytest.approx(0.0, abs=1e-12)
    for q in (0.5 * t, t, 2 * t):
        prob = law.sf_abs(q)
        assert abs((np.abs(y) > q).mean() - prob) <= 4 * math.sqrt(prob / y.size) + 1e-7
    if law.kappa > 2:
        assert abs((y**2).mean() / law.second_moment - 1) < 0.1


def test_uncalibrated_regime_law():
    with pytest.raises(RuntimeError):
        RegimePareto(2).sample(np.random.default_rng(0), 3)


def test_parse_displacement():
    assert isinstance(parse_displacement("uniform3"), Uniform3)
    assert parse_displacement("uniform:-1,1").second_moment == pytest.approx(1 / 3)
    assert parse_displacement("pareto:10").beta == 10
    r = parse_displacement("regime:p=0.6,a+=2,a-=0.5")
    assert (r.p, r.a_plus, r.a_minus) == (0.6, 2.0, 0.5)
    assert parse_displacement("shifted:1:uniform3").mean == 1.0
    with pytest.raises(ValueError):
        parse_displacement("cauchy")


def test_quantize_makes_splits_exact(rng):
    Y = rng.standard_cauchy(10_000)
    Q = quantize(Y)
    assert np.max(np.abs(Q - Y)) < 1e-6 * np.abs(Y).max()
    assert np.array_equal(quantize(np.array([1.0, -1.0, 0.0])), [1.0, -1.0, 0.0])


def test_cutoff_identity_exact(rng):
    for disp in (SymmetricPareto(2.5), RegimePareto(0.6).calibrate(2000, 2000**0.5, 2.0), Uniform3()):
        t = sample_tree(geometric(), 2000, rng)
        s = decorate(t, disp, rng)
        dec = cutoff(s, 3.0)
        assert np.array_equal(dec.Hsp_small + dec.Hsp_big, s.Hsp)


def test_cutoff_hand_built():
    # root -> a -> b and root -> c -> d
    t = PlaneTree([2, 1, 0, 1, 0])
    s = decorate_with(t, [0, 0.5, 10.0, -0.25, 0.5])
    dec = cutoff(s, 1.0)
    assert not dec.E_n
    assert np.abs(dec.Hsp_big).max() == 10.0
    assert dec.n_big == 1
    dec2 = cutoff(decorate_with(chain(3), [0, 5.0, -7.0]), 1.0)
    assert dec2.E_n
    small = cutoff(decorate_with(chain(3), [0, 0.1, 0.2]), 1.0)
    assert not small.Hsp_big.any() and not small.E_n


def test_default_cutoff_value():
    # p = 2 gives exponent (alpha - 1)/(4 alpha) + eps
    assert default_cutoff(10**4, 100.0, 2.0) == pytest.approx((10**6) ** (1 / 8 + 0.01))
    with pytest.raises(ValueError):
        cutoff(decorate_with(chain(2), [0, 1.0]), 0.0)


def test_moment_checks(rng):
    t = sample_tree(geometric(), 300, rng)
    for law in (Uniform3(), UniformInterval(-1, 1), Shifted(Uniform3(), 1.0)):
        rep = conditional_moment_check(t, law, rng, reps=10_000)
        assert rep.max_abs_z < 4.5
        assert np.all(rep.heights > 0)


def test_decorate_deterministic(rng):
    t = sample_tree(geometric(), 100, rng)
    a = decorate(t, SymmetricPareto(3), np.random.default_rng(9))
    b = decorate(t, SymmetricPareto(3), np.random.default_rng(9))
    assert np.array_equal(a.S, b.S)
