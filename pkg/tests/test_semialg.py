# Copyright (C) 2026 合同会社ぼっち (bottiLLC)
# 
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
# 
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
# 
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

import math

import numpy as np
import pytest

from src.core.errors import ApproximationBudgetExceeded, InvalidParameter
from src.core.semialg import (
    build_overapprox,
    build_overapprox_fixed_degree,
    chord_halfplane,
    covered,
    curve_point,
    membership,
    precomputed,
    tail_region,
    trig_to_multipoly,
    uniform_error,
    vertical_gaps,
)


@pytest.fixture(scope="module")
def built():
    return build_overapprox(eps=0.05, T=1.0, theta=1)


def test_grid_and_band(built):
    """[構造] τ_end = −ln ε を T 以下の等間隔で分割し、帯域幅は ε/2"""
    tau_end = -math.log(0.05)
    assert built.n_intervals == math.ceil(tau_end / 1.0)
    assert built.tau_grid[0] == 0.0
    assert built.tau_grid[-1] == pytest.approx(tau_end)
    assert built.t_bar <= 1.0
    assert built.band == pytest.approx(0.025)
    assert len(built.regions) == built.n_intervals + 1
    assert built.regions[-1].label == "tail"


def test_fit_errors_within_band(built):
    """[正確性] 各区間の一様誤差は帯域幅以内"""
    assert all(err <= built.band for err in built.errors)
    for l, psi in enumerate(built.psis):
        lo, hi = built.tau_grid[l], built.tau_grid[l + 1]
        assert uniform_error(psi, 1.0, lo, hi) == pytest.approx(built.errors[l])


def test_curve_is_covered(built):
    """[正確性] 曲線上の点は τ_end の先も含めて必ずどこかの領域に入る"""
    rng = np.random.default_rng(7)
    tau_end = built.tau_grid[-1]
    for tau in rng.uniform(0.0, 2.0 * tau_end, 3000):
        assert membership(built, curve_point(1.0, float(tau))), f"τ = {tau} が覆われていません"


def test_points_off_the_curve_are_excluded(built):
    """[正確性] 円から外れた点や λ が大きく離れた点はどの領域にも入らない"""
    assert not membership(built, (0.5, 0.0, 0.5))
    u, v, lam = curve_point(1.0, 0.5)
    assert not membership(built, (u, v, lam + 0.2))


def test_chord_halfplane_sign():
    """[正確性] 弦の外積は円弧上で非正、反対側で正"""
    E = chord_halfplane(1.0, 0.0, math.pi / 2)
    assert E.eval(curve_point(1.0, math.pi / 4)[:2] + (0.0,)) < 0
    assert E.eval((-1.0, 0.0, 0.0)) > 0


def test_trig_to_multipoly():
    """[正確性] 0.5 + cos θτ + 2 sin θτ → 0.5 + u + 2v"""
    psi = trig_to_multipoly(np.array([0.5, 1.0]), np.array([0.0, 2.0]))
    assert psi.coeff((0, 0, 0)) == pytest.approx(0.5)
    assert psi.coeff((1, 0, 0)) == pytest.approx(1.0)
    assert psi.coeff((0, 1, 0)) == pytest.approx(2.0)


def test_tail_region():
    region = tail_region(0.1)
    assert region.contains((1.0, 0.0, 0.05))
    assert not region.contains((1.0, 0.0, 0.2))


def test_fixed_degree_halves_interval():
    """[構造] 次数を固定すると区間を細かくして帯域幅を満たす"""
    o = build_overapprox_fixed_degree(eps=0.05, K=3)
    assert max(o.degrees) <= 3
    assert all(err <= o.band for err in o.errors)


@pytest.mark.parametrize(
    "eps, T",
    [(0.0, 1.0), (1.0, 1.0), (0.05, 0.0), (0.05, 7.0)],
)
def test_invalid_parameters(eps, T):
    """[異常系] 0 < ε < 1, 0 < T < 2π/θ の範囲外は InvalidParameter"""
    with pytest.raises(InvalidParameter):
        build_overapprox(eps, T)


def test_budget_exceeded():
    """[異常系] 定数（K = 0）では近似できない"""
    with pytest.raises(ApproximationBudgetExceeded):
        build_overapprox(eps=0.05, T=1.0, k_max=0)


def test_precomputed_structure():
    """[構造] 既知の近似は 2 区間・3 次・ε = e^{−1.5π}"""
    o = precomputed()
    assert o.eps == pytest.approx(math.exp(-1.5 * math.pi))
    assert o.n_intervals == 2
    assert o.degrees == (3, 3)
    assert o.tau_grid == pytest.approx((0.0, 0.75 * math.pi, 1.5 * math.pi))
    assert membership(o, curve_point(1.0, 0.0))
    assert membership(o, curve_point(1.0, 6.0)) == {2}


# =============================================================================
# 数値例の ε = e^{−1.5π}, θ = 1
# =============================================================================

EXAMPLE_EPS = math.exp(-1.5 * math.pi)


@pytest.fixture(scope="module")
def example_built():
    return build_overapprox(eps=EXAMPLE_EPS, T=0.75 * math.pi, theta=1)


def test_example_grid_from_construction(example_built):
    """[構造] T = 0.75π では 2 区間、既知の近似と同じ τ 格子になる"""
    assert example_built.n_intervals == 2
    assert example_built.tau_grid == pytest.approx(precomputed().tau_grid)
    assert example_built.degrees == (5, 2)
    assert all(err <= example_built.band for err in example_built.errors)


@pytest.mark.parametrize("source", ["precomputed", "built"])
def test_example_curve_fully_covered(source, example_built):
    """[正確性] τ ∈ [0, −ln ε + 5] の 10⁵ 点はすべていずれかの領域に入る"""
    o = precomputed() if source == "precomputed" else example_built
    taus = np.random.default_rng(11).uniform(0.0, -math.log(EXAMPLE_EPS) + 5.0, 100_000)
    hit = covered(o, taus)
    assert hit.all(), f"覆われない τ: {taus[~hit][:5]}"


def test_vectorized_membership_agrees(example_built):
    taus = np.linspace(0.0, 8.0, 97)
    hit = covered(example_built, taus)
    assert list(hit) == [bool(membership(example_built, curve_point(1.0, float(t)))) for t in taus]


def test_built_regions_are_eps_tight(example_built):
    """[正確性] 構築した各領域の点は曲線から λ 方向に ε 以内"""
    gaps = vertical_gaps(example_built)
    assert len(gaps) == len(example_built.regions)
    assert max(gaps) <= EXAMPLE_EPS


def test_precomputed_regions_gap():
    """[正確性] 既知の近似は帯域幅 ε をそのまま使うので、隙間は ε + 近似誤差で抑えられる"""
    o = precomputed()
    gaps = vertical_gaps(o)
    for gap, err in zip(gaps, o.errors):
        assert gap <= o.band + err + 1e-6
    assert gaps[-1] <= o.eps


def test_precomputed_psi_accuracy():
    """[正確性] 既知の ψ₀, ψ₁ は各区間で e^{−τ} に ε 以内（誤差 0.00105, 0.00042 程度）"""
    o = precomputed()
    assert o.errors[0] == pytest.approx(0.00105, abs=2e-4)
    assert o.errors[1] == pytest.approx(0.00042, abs=1e-4)
    assert all(err < o.eps for err in o.errors)
    psi0 = o.psis[0]
    assert psi0.eval((math.cos(0.3), math.sin(0.3), 0.0)) == pytest.approx(math.exp(-0.3), abs=o.eps)
    tau = np.linspace(0.75 * math.pi, 1.5 * math.pi, 512)
    psi1 = o.psis[1].eval((np.cos(tau), np.sin(tau), np.zeros_like(tau)))
    assert np.max(np.abs(psi1 - np.exp(-tau))) <= o.eps
