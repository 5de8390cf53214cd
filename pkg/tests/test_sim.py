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

import numpy as np
import pytest

from src.core.diophantine import controller
from src.core.errors import ImproperSignal, StepTooCoarse, UnstableLoop
from src.core.polynomial import RatPoly
from src.core.response import time_eval
from src.core.sim import (
    TimeSeries,
    bound_violation,
    default_timing,
    metrics,
    realize,
    rk4,
    simulate,
)
from src.core.transfer import Reference, TransferFunction, closed_loop


@pytest.fixture
def example_loop(example_family, example_q):
    return closed_loop(example_family.plant, controller(example_family, example_q))


def test_realization_matches_transfer_function():
    """[正確性] C(sI − A)⁻¹B = G(s)"""
    G = TransferFunction(RatPoly((2, 1)), RatPoly((6, 11, 6, 1)))
    A, B, C = realize(G)
    for s in (0.5, 1.0, 3.0):
        value = C @ np.linalg.solve(s * np.eye(3) - A, B)
        assert value == pytest.approx(float(G.eval(s)))


def test_realize_requires_strictly_proper():
    with pytest.raises(ImproperSignal):
        realize(TransferFunction(RatPoly((1, 1)), RatPoly((2, 1))))


def test_rk4_scalar_decay():
    """[正確性] ẋ = −x の RK4 解は e^{−t} に一致する"""
    states = rk4(np.array([[-1.0]]), np.array([1.0]), 0.01, 100)
    assert states.shape == (101, 1)
    assert states[-1, 0] == pytest.approx(np.exp(-1.0), abs=1e-9)


def test_default_timing(example_loop, step):
    """[構造] horizon は最も遅い時定数の 10 倍、dt は最速時定数の 1/100"""
    horizon, dt = default_timing(example_loop, step)
    assert horizon == pytest.approx(10.0)
    assert dt == pytest.approx(1.0 / np.sqrt(20.0) / 100.0)


def test_simulation_matches_closed_form(example_loop, step, example_decomposition, example_q):
    """[正確性] 数値積分と閉形式の差は 1e-6 以下"""
    series = simulate(example_loop, step)
    closed = time_eval(example_decomposition, example_q, series.t)
    assert np.max(np.abs(series.y - closed)) < 1e-6


def test_example_metrics(example_loop, step):
    series = simulate(example_loop, step)
    m = metrics(series)
    assert m.steady_state == pytest.approx(1.0, abs=1e-4)
    assert not m.drifting
    assert m.peak >= m.steady_state
    assert m.undershoot == pytest.approx(0.0, abs=1e-9)


def test_unstable_loop_rejected(step):
    """[異常系] 右半平面の極を持つ閉ループは UnstableLoop"""
    T = TransferFunction(RatPoly((1,)), RatPoly((-1, 1)))
    with pytest.raises(UnstableLoop):
        simulate(T, step)


def test_step_too_coarse(example_loop, step):
    """[異常系] 刻みが粗すぎると StepTooCoarse"""
    with pytest.raises(StepTooCoarse):
        simulate(example_loop, step, dt=1.0)


def test_sinusoid_reference_response():
    """[正確性] 1/(s + 1) に sin t を入れると定常振幅 1/√2"""
    T = TransferFunction(RatPoly((1,)), RatPoly((1, 1)))
    series = simulate(T, Reference.sinusoid(1), horizon=40.0, dt=0.01)
    tail = series.y[series.t > 30.0]
    assert np.max(np.abs(tail)) == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-3)


def test_metrics_of_first_order_response():
    t = np.linspace(0.0, 20.0, 2001)
    m = metrics(TimeSeries(t, 1.0 - np.exp(-t)))
    assert m.steady_state == pytest.approx(1.0, abs=1e-6)
    assert m.overshoot == pytest.approx(0.0, abs=1e-6)
    assert m.settling_time == pytest.approx(-np.log(0.02), abs=0.02)


def test_overshoot_is_relative_to_steady_state():
    """[正確性] 行き過ぎ量は peak / 定常値 − 1"""
    t = np.linspace(0.0, 40.0, 4001)
    y = 2.0 - 2.0 * np.exp(-t) + 2.0 * t * np.exp(1.0 - t) * 0.25
    m = metrics(TimeSeries(t, y))
    assert m.steady_state == pytest.approx(2.0, abs=1e-9)
    assert m.peak == pytest.approx(2.1148, abs=1e-3)
    assert m.overshoot == pytest.approx(m.peak / 2.0 - 1.0)
    assert m.overshoot == pytest.approx(0.0574, abs=1e-3)


def test_overshoot_for_non_positive_steady_state():
    """[正確性] 定常値が 0 以下なら行き過ぎ量は peak の絶対値"""
    t = np.linspace(0.0, 30.0, 3001)
    m = metrics(TimeSeries(t, -1.0 + (1.0 + 3.0 * t) * np.exp(-t)))
    assert m.steady_state == pytest.approx(-1.0, abs=1e-9)
    assert m.peak == pytest.approx(3.0 * np.exp(-2.0 / 3.0) - 1.0, abs=1e-3)
    assert m.overshoot == pytest.approx(abs(m.peak))


def test_slow_tail_is_flagged_as_drifting():
    """[異常系] 末尾 5% で 1e-6 を超えて動く応答は drifting"""
    t = np.linspace(0.0, 10.0, 1001)
    m = metrics(TimeSeries(t, 1.0 - np.exp(-t)))
    assert m.drifting
    assert m.settled


def test_response_outside_band_at_horizon_is_unsettled():
    t = np.linspace(0.0, 2.0, 201)
    m = metrics(TimeSeries(t, t.copy()))
    assert not m.settled
    assert m.settling_time == np.inf


def test_bound_violation():
    """[正確性] 上下限からのはみ出し量の最大値"""
    t = np.linspace(0.0, 5.0, 51)
    series = TimeSeries(t, np.ones_like(t))
    assert bound_violation(series, [0.5], None) == pytest.approx(0.5)
    assert bound_violation(series, [2.0], [0.0]) == 0.0
    # g_l(λ) = 2λ は t = 0 で 2 となり 1 だけはみ出す
    assert bound_violation(series, None, [0.0, 2.0]) == pytest.approx(1.0)


def test_control_signal_matches_closed_form(example_family, example_poles, step, example_q):
    """[正確性] 制御入力 u(t) についても閉形式と数値積分が一致する"""
    from src.core.response import decompose
    from src.core.transfer import control_transfer

    dec = decompose(step, example_family, example_poles, signal="control")
    U = control_transfer(example_family.plant, controller(example_family, example_q))
    series = simulate(U, step)
    assert np.max(np.abs(series.y - time_eval(dec, example_q, series.t))) < 1e-6
    # u(0⁺) = lim_{s→∞} U(s) = 3
    assert series.y[0] == pytest.approx(3.0)
