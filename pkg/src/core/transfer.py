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
伝達関数、極指定、参照信号のモジュール。
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable

from src.core.errors import (
    AlgebraicLoop,
    DegenerateDivisor,
    DistinctnessViolation,
    ImproperSignal,
    InvalidPoleSpec,
)
from src.core.polynomial import RatPoly, as_fraction, poly_roots


@dataclass(frozen=True)
class TransferFunction:
    """G(s) = num(s) / den(s)"""

    num: RatPoly
    den: RatPoly

    def __post_init__(self) -> None:
        if self.den.is_zero():
            raise DegenerateDivisor("伝達関数の分母がゼロ多項式です")

    def is_proper(self) -> bool:
        return self.num.degree() <= self.den.degree()

    def is_strictly_proper(self) -> bool:
        return self.num.degree() < self.den.degree()

    def __mul__(self, other: "TransferFunction") -> "TransferFunction":
        return TransferFunction(self.num * other.num, self.den * other.den)

    def eval(self, s: Any) -> Any:
        return self.num.eval(s) / self.den.eval(s)

    def poles(self) -> list[complex]:
        if self.den.degree() < 1:
            return []
        return poly_roots(self.den)

    def to_text(self, var: str = "s") -> str:
        return f"({self.num.to_text(var)}) / ({self.den.to_text(var)})"


def closed_loop(plant: TransferFunction, controller: TransferFunction) -> TransferFunction:
    """
    単一フィードバックの閉ループ伝達関数 T = b·d / (a·c + b·d)。

    plant = b/a, controller = d/c とします。
    """
    a, b = plant.den, plant.num
    c, d = controller.den, controller.num
    den = a * c + b * d
    if den.is_zero():
        raise AlgebraicLoop("a·c + b·d がゼロ多項式です")
    return TransferFunction(b * d, den)


def control_transfer(plant: TransferFunction, controller: TransferFunction) -> TransferFunction:
    """参照信号から制御入力までの伝達関数 a·d / (a·c + b·d)。"""
    a, b = plant.den, plant.num
    c, d = controller.den, controller.num
    den = a * c + b * d
    if den.is_zero():
        raise AlgebraicLoop("a·c + b·d がゼロ多項式です")
    return TransferFunction(a * d, den)


def error_transfer(plant: TransferFunction, controller: TransferFunction) -> TransferFunction:
    """参照信号から追従誤差 e = r − y までの伝達関数 a·c / (a·c + b·d)。"""
    a, b = plant.den, plant.num
    c, d = controller.den, controller.num
    den = a * c + b * d
    if den.is_zero():
        raise AlgebraicLoop("a·c + b·d がゼロ多項式です")
    return TransferFunction(a * c, den)


def signal_transfer(plant: TransferFunction, controller: TransferFunction, signal: str) -> TransferFunction:
    """信号名（output / control / error）に対応する閉ループ伝達関数。"""
    builders = {"output": closed_loop, "control": control_transfer, "error": error_transfer}
    if signal not in builders:
        raise ValueError(f"未知の信号 '{signal}' です")
    return builders[signal](plant, controller)


@dataclass(frozen=True)
class PoleSpec:
    """
    極の指定。実極 s = −p と共役複素極 s = −α ± jβ。

    strict=True（閉ループ極）では p > 0, α > 0 を要求し、
    strict=False（参照信号の極）では虚軸上 (p = 0, α = 0) も許容します。
    """

    real: tuple[Fraction, ...] = ()
    pairs: tuple[tuple[Fraction, Fraction], ...] = ()
    strict: bool = True

    def __post_init__(self) -> None:
        real = tuple(as_fraction(p) for p in self.real)
        pairs = tuple((as_fraction(a), as_fraction(b)) for a, b in self.pairs)
        object.__setattr__(self, "real", real)
        object.__setattr__(self, "pairs", pairs)

        for p in real:
            if p < 0 or (self.strict and p == 0):
                raise InvalidPoleSpec(f"実極 s = {-p} は安定ではありません")
        for alpha, beta in pairs:
            if beta <= 0:
                raise InvalidPoleSpec(f"複素極の虚部 β = {beta} は正である必要があります")
            if alpha < 0 or (self.strict and alpha == 0):
                raise InvalidPoleSpec(f"複素極 −{alpha} ± j{beta} は安定ではありません")

        if len(set(real)) != len(real):
            raise DistinctnessViolation(f"実極が重複しています: {[str(-p) for p in real]}")
        if len(set(pairs)) != len(pairs):
            raise DistinctnessViolation("共役複素極の組が重複しています")

    @classmethod
    def of(cls, real: Iterable[Any] = (), pairs: Iterable[tuple[Any, Any]] = (), strict: bool = True) -> "PoleSpec":
        return cls(tuple(real), tuple((a, b) for a, b in pairs), strict)

    @property
    def degree(self) -> int:
        return len(self.real) + 2 * len(self.pairs)

    def roots(self) -> list[tuple[Fraction, Fraction]]:
        """すべての根を (実部, 虚部) の組で返します（共役も含む）。"""
        out = [(-p, Fraction(0)) for p in self.real]
        for alpha, beta in self.pairs:
            out.append((-alpha, beta))
            out.append((-alpha, -beta))
        return out

    def is_empty(self) -> bool:
        return not self.real and not self.pairs


def target_poly(poles: PoleSpec) -> RatPoly:
    """∏(s + p_i) · ∏(s² + 2α_i s + α_i² + β_i²)"""
    z = RatPoly((1,))
    for p in poles.real:
        z = z * RatPoly((p, 1))
    for alpha, beta in poles.pairs:
        z = z * RatPoly((alpha * alpha + beta * beta, 2 * alpha, 1))
    return z


@dataclass(frozen=True)
class Reference:
    """
    参照信号 r(s) = num(s) / den(s)。

    分母の根は ``poles`` と一致している必要があります（定数倍を除く）。
    """

    num: RatPoly
    den: RatPoly
    poles: PoleSpec
    name: str = "custom"

    def __post_init__(self) -> None:
        if self.poles.strict:
            object.__setattr__(
                self, "poles", PoleSpec(self.poles.real, self.poles.pairs, strict=False)
            )
        if self.den.is_zero():
            raise DegenerateDivisor("参照信号の分母がゼロ多項式です")
        if self.num.degree() >= self.den.degree():
            raise ImproperSignal("参照信号は厳密にプロパーである必要があります")
        if self.den.monic() != target_poly(self.poles):
            raise InvalidPoleSpec(
                f"参照信号の分母 {self.den.to_text()} が宣言された極と一致しません"
            )

    @classmethod
    def step(cls, amplitude: Any = 1) -> "Reference":
        """単位ステップ 1/s"""
        return cls(RatPoly((amplitude,)), RatPoly((0, 1)), PoleSpec.of(real=[0], strict=False), "step")

    @classmethod
    def sinusoid(cls, omega: Any, amplitude: Any = 1) -> "Reference":
        """sin(ωt) のラプラス変換 ω / (s² + ω²)"""
        w = as_fraction(omega)
        if w <= 0:
            raise InvalidPoleSpec("角周波数 ω は正である必要があります")
        return cls(
            RatPoly((as_fraction(amplitude) * w,)),
            RatPoly((w * w, 0, 1)),
            PoleSpec.of(pairs=[(0, w)], strict=False),
            "sinusoid",
        )

    def to_transfer(self) -> TransferFunction:
        return TransferFunction(self.num, self.den)
