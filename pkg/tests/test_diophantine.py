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

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.diophantine import controller, instantiate, solve_d_minimal
from src.core.errors import DegreeDeficit, ImproperPlant, NotCoprime, QDegreeViolation
from src.core.polynomial import RatPoly
from src.core.transfer import closed_loop

Z = RatPoly((100, 60, 33, 6, 1))
FAMILY = solve_d_minimal(RatPoly((1, 1)), RatPoly((1,)), Z)


def test_example_particular_solution(example_family):
    """[正確性] a = s + 1, b = 1, z = s⁴ + 6s³ + 33s² + 60s + 100 の最小解"""
    assert example_family.c0 == RatPoly((32, 28, 5, 1))
    assert example_family.d0 == RatPoly((68,))
    assert example_family.dq == 2


def test_example_controller(example_family, example_q):
    """[正確性] q = −32 − 23s − 3s² で c = s³ + 2s² + 5s, d = 3s³ + 26s² + 55s + 100"""
    c, d = instantiate(example_family, example_q)
    assert c == RatPoly((0, 5, 2, 1))
    assert d == RatPoly((100, 55, 26, 3))
    ctrl = controller(example_family, example_q)
    assert ctrl.num == d and ctrl.den == c


q_coeffs = st.lists(st.fractions(min_value=-50, max_value=50, max_denominator=7), min_size=0, max_size=3)


@given(q_coeffs)
@settings(max_examples=50, deadline=None)
def test_closed_loop_poles_do_not_depend_on_q(q):
    """[性質] 任意の q（deg q ≤ d_q）で a·c + b·d = z"""
    c, d = instantiate(FAMILY, q)
    assert FAMILY.a * c + FAMILY.b * d == Z


def test_closed_loop_denominator_is_target(example_family, example_q):
    T = closed_loop(example_family.plant, controller(example_family, example_q))
    assert T.den == Z


def test_second_order_plant():
    """[正確性] 2 次のプラントでも a·c₀ + b·d₀ = z かつ deg d₀ < deg a"""
    a = RatPoly((2, 3, 1))  # (s + 1)(s + 2)
    b = RatPoly((1, Fraction(1, 3)))
    z = RatPoly.from_roots([-1, -2, -3, -4, -5])
    fam = solve_d_minimal(a, b, z)
    assert a * fam.c0 + b * fam.d0 == z
    assert fam.d0.degree() < a.degree()
    assert fam.dq == 1


@pytest.mark.parametrize(
    "a, b, z, error",
    [
        (RatPoly((1, 1)), RatPoly((1, 1)), Z, ImproperPlant),
        (RatPoly((2, 3, 1)), RatPoly((1, 1)), RatPoly.from_roots([-3, -4, -5, -6]), NotCoprime),
        (RatPoly((2, 3, 1)), RatPoly((1,)), RatPoly.from_roots([-3, -4, -5]), DegreeDeficit),
    ],
)
def test_invalid_plants(a, b, z, error):
    """[異常系] プロパーでない・既約でない・次数不足のプラント"""
    with pytest.raises(error):
        solve_d_minimal(a, b, z)


def test_q_degree_violation(example_family):
    """[異常系] deg q > d_q は QDegreeViolation"""
    with pytest.raises(QDegreeViolation):
        instantiate(example_family, [1, 2, 3, 4])
