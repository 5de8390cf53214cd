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

"""
ディオファントス方程式 a·c + b·d = z の求解と Youla-Kučera パラメトリゼーション。

最小次数の解 (c₀, d₀) を求めると、閉ループ極が z(s) の根になる
すべての制御器は d/c = (d₀ − a·q) / (c₀ + b·q) で与えられます。
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import structlog
import sympy

from src.core.errors import (
    DegenerateController,
    DegreeDeficit,
    DistinctnessViolation,
    ImproperPlant,
    NotCoprime,
    NumericalFailure,
    QDegreeViolation,
)
from src.core.polynomial import RatPoly, as_fraction, poly_gcd
from src.core.transfer import TransferFunction

log = structlog.get_logger(__name__)


@dataclass(frozen=True)
class YoulaFamily:
    """閉ループ極を z(s) に固定した制御器の族。"""

    a: RatPoly
    b: RatPoly
    c0: RatPoly
    d0: RatPoly
    z: RatPoly
    dq: int

    @property
    def plant(self) -> TransferFunction:
        return TransferFunction(self.b, self.a)


def _sympy_rational(x: Fraction) -> sympy.Rational:
    return sympy.Rational(x.numerator, x.denominator)


def solve_d_minimal(a: RatPoly, b: RatPoly, z: RatPoly) -> YoulaFamily:
    """
    deg d₀ < deg a となる a·c₀ + b·d₀ = z の一意解を厳密な有理演算で求めます。

    Raises:
        ImproperPlant: deg b ≥ deg a の場合
        NotCoprime: gcd(a, b) ≠ 1 の場合
        DegreeDeficit: deg z < 2·deg a の場合（q の自由度がない）
    """
    if a.is_zero() or b.degree() >= a.degree():
        raise ImproperPlant(f"b/a = ({b.to_text()})/({a.to_text()}) は厳密にプロパーではありません")
    if b.is_zero():
        raise NotCoprime("プラントの分子がゼロ多項式です")
    g = poly_gcd(a, b)
    if g.degree() > 0:
        raise NotCoprime(f"a(s) と b(s) に共通因子 {g.to_text()} があります")

    n = a.degree()
    nz = z.degree()
    if nz < 2 * n:
        raise DegreeDeficit(
            f"deg z = {nz} ですが、少なくとも 2·deg a = {2 * n} が必要です"
        )

    nc = nz - n + 1  # c₀ の係数個数
    nd = n           # d₀ の係数個数
    size = nz + 1
    M = sympy.zeros(size, nc + nd)
    for j in range(nc):
        for i, coef in enumerate(a.coeffs):
            M[i + j, j] += _sympy_rational(coef)
    for j in range(nd):
        for i, coef in enumerate(b.coeffs):
            M[i + j, nc + j] += _sympy_rational(coef)
    rhs = sympy.Matrix([_sympy_rational(z.coeff(k)) for k in range(size)])

    if M.det() == 0:
        raise DistinctnessViolation("シルベスター行列が特異です")
    sol = M.LUsolve(rhs)

    c0 = RatPoly(tuple(as_fraction(sol[j]) for j in range(nc)))
    d0 = RatPoly(tuple(as_fraction(sol[nc + j]) for j in range(nd)))
    if a * c0 + b * d0 != z:
        raise NumericalFailure("a·c₀ + b·d₀ = z が厳密に成立しません")

    dq = nz - 2 * n
    log.info(
        "Diophantine solved",
        c0=c0.to_text(), d0=d0.to_text(), dq=dq,
    )
    return YoulaFamily(a=a, b=b, c0=c0, d0=d0, z=z, dq=dq)


def instantiate(family: YoulaFamily, q: RatPoly | Sequence[object]) -> tuple[RatPoly, RatPoly]:
    """
    q(s) に対する制御器 (c, d) = (c₀ + b·q, d₀ − a·q) を返します。

    Raises:
        QDegreeViolation: deg q > d_q の場合
        DegenerateController: c がゼロ多項式になる場合
    """
    qp = q if isinstance(q, RatPoly) else RatPoly(tuple(q))
    if qp.degree() > family.dq:
        raise QDegreeViolation(f"deg q = {qp.degree()} が d_q = {family.dq} を超えています")
    c = family.c0 + family.b * qp
    d = family.d0 - family.a * qp
    if c.is_zero():
        raise DegenerateController("c₀ + b·q がゼロ多項式です")
    return c, d


def controller(family: YoulaFamily, q: RatPoly | Sequence[object]) -> TransferFunction:
    c, d = instantiate(family, q)
    return TransferFunction(d, c)
