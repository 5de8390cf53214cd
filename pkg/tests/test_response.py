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

"""閉ループ応答のモーダル分解のテスト"""

from fractions import Fraction

import numpy as np
import pytest

from src.core.diophantine import solve_d_minimal
from src.core.errors import PoleCollision, ScalingFailure, UnknownMode
from src.core.polynomial import RatPoly
from src.core.response import (
    ComplexMode,
    RealMode,
    decompose,
    rationalize_exponents,
    residue_system,
    response_at,
    time_eval,
    to_multipoly,
)
from src.core.transfer import PoleSpec, Reference, target_poly


def test_mode_numbering(example_decomposition):
    """[構造] 0 番は定常値モード、1 番・2 番は −1 ± 2j, −2 ± 4j"""
    dec = example_decomposition
    assert isinstance(dec.mode(0), RealMode)
    assert dec.mode(0).p == 0
    assert isinstance(dec.mode(1), ComplexMode)
    assert (dec.mode(1).alpha, dec.mode(1).beta) == (1, 2)
    assert (dec.mode(2).alpha, dec.mode(2).beta) == (2, 4)
    assert dec.steady_state_mode() is dec.mode(0)
    with pytest.raises(UnknownMode):
        dec.mode(3)


def test_residues_at_example_q(example_decomposition, example_q):
    """[正確性] y₀ = 1, a₁ = b₁ = 0, a₂ = −1/2, b₂ = 1/8"""
    dec = example_decomposition
    assert dec.mode(0).y.exact(example_q) == 1
    assert dec.mode(1).a.exact(example_q) == 0
    assert dec.mode(1).b.exact(example_q) == 0
    assert dec.mode(2).a.exact(example_q) == Fraction(-1, 2)
    assert dec.mode(2).b.exact(example_q) == Fraction(1, 8)


def test_steady_state_is_affine_in_q(example_decomposition):
    """[正確性] y₀ = T(0) = (68 − q₀)/100"""
    y0 = example_decomposition.mode(0).y
    assert y0.c0 == Fraction(68, 100)
    assert y0.lin == (Fraction(-1, 100), 0, 0)


def test_residue_system_matches_example(step, example_family, example_poles):
    """[正確性] 係数比較の線形系 A·x = b + B·q"""
    system = residue_system(step, example_family, example_poles)
    assert system.A == (
        (100, 0, 0, 0, 0),
        (60, 40, 80, 20, 40),
        (33, 48, 16, 18, 16),
        (6, 10, 4, 8, 8),
        (1, 2, 0, 2, 0),
    )
    assert system.b == (68, 0, 0, 0, 0)
    assert system.B == ((-1, 0, 0), (-1, -1, 0), (0, -1, -1), (0, 0, -1), (0, 0, 0))


@pytest.mark.parametrize("q", [(-32, -23, -3), (0, 0, 0), (5, Fraction(1, 3), -7)])
def test_residue_system_agrees_with_residues(step, example_family, example_poles, example_decomposition, q):
    """[正確性] 線形系の解と留数公式の値は一致する"""
    x = residue_system(step, example_family, example_poles).solve(q)
    dec = example_decomposition
    expected = (
        dec.mode(0).y.exact(q),
        dec.mode(1).a.exact(q), dec.mode(1).b.exact(q),
        dec.mode(2).a.exact(q), dec.mode(2).b.exact(q),
    )
    assert x == expected


def test_error_signal_vanishes_at_steady_state(step, example_family, example_poles, example_q):
    """[正確性] 誤差信号の定常値は c(0)/z(0) で、数値例の q ではゼロ"""
    dec = decompose(step, example_family, example_poles, signal="error")
    assert dec.steady_state_mode().y.exact(example_q) == 0


def test_rationalized_exponents(example_decomposition):
    """[構造] m = 1, θ = 1 で p̄ = 0, ᾱ = (1, 2), β̄ = (2, 4)"""
    dec = example_decomposition
    assert dec.m == 1 and dec.theta == 1
    assert dec.mode(0).pbar == 0
    assert [(cm.abar, cm.bbar) for cm in dec.complex_modes] == [(1, 2), (2, 4)]


def test_default_theta_is_gcd_of_frequencies(step, example_family, example_poles):
    dec = rationalize_exponents(decompose(step, example_family, example_poles))
    assert dec.theta == 2
    assert [cm.bbar for cm in dec.complex_modes] == [1, 2]


def test_incommensurate_theta_raises(step, example_family, example_poles):
    """[異常系] β̄ が整数にならない θ は ScalingFailure"""
    dec = decompose(step, example_family, example_poles)
    with pytest.raises(ScalingFailure):
        rationalize_exponents(dec, theta=3)
    with pytest.raises(ScalingFailure):
        to_multipoly(dec)


def test_multipoly_matches_closed_form(example_decomposition, example_q):
    """[正確性] u = cos τ, v = sin τ, λ = e^{−τ} で y(u, v, λ) = y(t)"""
    dec = example_decomposition
    t = np.linspace(0.0, 8.0, 161)
    point = (np.cos(t), np.sin(t), np.exp(-t))
    closed = time_eval(dec, example_q, t)
    poly = response_at(dec, example_q)
    assert np.allclose(poly(point), closed, atol=1e-10)
    assert closed[0] == pytest.approx(0.0, abs=1e-12)
    assert closed[-1] == pytest.approx(1.0, abs=1e-3)


def test_pole_collision():
    """[異常系] 参照信号の極と閉ループ極が重なると PoleCollision"""
    poles = PoleSpec.of(real=[1, 2])
    family = solve_d_minimal(RatPoly((3, 1)), RatPoly((1,)), target_poly(poles))
    ref = Reference(RatPoly((1,)), RatPoly((1, 1)), PoleSpec.of(real=[1], strict=False))
    with pytest.raises(PoleCollision):
        decompose(ref, family, poles)
