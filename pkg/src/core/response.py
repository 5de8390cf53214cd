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
閉ループ応答のモーダル分解（留数計算）と多項式表現。

応答 y(t) を
    y(t) = Σ y_i e^{−p_i t} + Σ e^{−α_i t} (2a_i cos β_i t + 2b_i sin β_i t)
の形に分解します。各係数は Youla パラメータ q の係数についてアフィンです。
留数はすべて sympy と Fraction による厳密演算で求めます。
"""

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Literal, Sequence, Union

import numpy as np
import structlog
import sympy

from src.core.diophantine import YoulaFamily
from src.core.errors import (
    ImproperSignal,
    InvalidPoleSpec,
    PoleCollision,
    ScalingFailure,
    UnknownMode,
)
from src.core.polynomial import (
    LAM,
    AffinePoly,
    MultiPoly,
    RatPoly,
    as_fraction,
    demoivre,
    rational_gcd,
)
from src.core.transfer import PoleSpec, Reference, target_poly

log = structlog.get_logger(__name__)

Signal = Literal["output", "control", "error"]
SIGNALS: tuple[str, ...] = ("output", "control", "error")


@dataclass(frozen=True)
class AffineCoeff:
    """c₀ + Σ_k lin[k]·q_k"""

    c0: Fraction
    lin: tuple[Fraction, ...]

    def at(self, q: Sequence[object]) -> float:
        qs = [float(x) for x in q] + [0.0] * (len(self.lin) - len(q))
        return float(self.c0) + sum(float(l) * x for l, x in zip(self.lin, qs))

    def exact(self, q: Sequence[object]) -> Fraction:
        qs = [as_fraction(x) for x in q] + [Fraction(0)] * (len(self.lin) - len(q))
        return self.c0 + sum((l * x for l, x in zip(self.lin, qs)), Fraction(0))

    def vector(self) -> np.ndarray:
        return np.array([float(self.c0)] + [float(x) for x in self.lin])


@dataclass(frozen=True)
class RealMode:
    """e^{−p t} の項。pbar は整数化後の指数 m·p。"""

    p: Fraction
    y: AffineCoeff
    pbar: int | None = None


@dataclass(frozen=True)
class ComplexMode:
    """e^{−α t}(2a cos βt + 2b sin βt) の項（極 −α − jβ の留数が a + jb）。"""

    alpha: Fraction
    beta: Fraction
    a: AffineCoeff
    b: AffineCoeff
    abar: int | None = None
    bbar: int | None = None


Mode = Union[RealMode, ComplexMode]


@dataclass(frozen=True)
class ModalDecomposition:
    real_modes: tuple[RealMode, ...]
    complex_modes: tuple[ComplexMode, ...]
    dq: int
    signal: str = "output"
    m: Fraction | None = None
    theta: Fraction | None = None

    @property
    def modes(self) -> tuple[Mode, ...]:
        """実モード → 複素モードの順に 0 始まりで番号付けされたモード一覧。"""
        return self.real_modes + self.complex_modes

    @property
    def nq(self) -> int:
        return self.dq + 1

    @property
    def rationalized(self) -> bool:
        return self.m is not None

    def mode(self, index: int) -> Mode:
        if not 0 <= index < len(self.modes):
            raise UnknownMode(f"モード {index} は存在しません（全 {len(self.modes)} 個）")
        return self.modes[index]

    def steady_state_mode(self) -> RealMode:
        for mode in self.real_modes:
            if mode.p == 0:
                return mode
        raise UnknownMode("s = 0 の極（定常値モード）がありません")


@dataclass(frozen=True)
class LinearResidueSystem:
    """
    A·x = b + B·q の形の線形系。

    x は [実モードの y_i..., 複素モードの (a_i, b_i)...] の並びで、
    A の列はそれぞれ部分分数の分子多項式の係数です。
    """

    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    B: tuple[tuple[Fraction, ...], ...]

    def solve(self, q: Sequence[object]) -> tuple[Fraction, ...]:
        A = sympy.Matrix([[_sym(x) for x in row] for row in self.A])
        qs = [as_fraction(x) for x in q]
        rhs = sympy.Matrix([
            _sym(bi + sum((Bij * qj for Bij, qj in zip(Brow, qs)), Fraction(0)))
            for bi, Brow in zip(self.b, self.B)
        ])
        sol = A.LUsolve(rhs)
        return tuple(as_fraction(x) for x in sol)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        def conv(rows: tuple[tuple[Fraction, ...], ...]) -> np.ndarray:
            return np.array([[float(x) for x in row] for row in rows], dtype=float)
        return conv(self.A), np.array([float(x) for x in self.b]), conv(self.B)


def _sym(x: Fraction) -> sympy.Rational:
    return sympy.Rational(x.numerator, x.denominator)


def signal_numerators(
    reference: Reference, family: YoulaFamily, signal: str
) -> tuple[RatPoly, list[RatPoly]]:
    """
    信号のラプラス変換 N(s) / (r_den·z) の分子を (N₀, [N_k]) として返します。

    N = N₀ + Σ_k q_k N_k です。
    """
    rn, a, b = reference.num, family.a, family.b
    if signal == "output":
        n0 = rn * b * family.d0
        nk = [-(rn * a * b * RatPoly.monomial(k)) for k in range(family.dq + 1)]
    elif signal == "control":
        n0 = rn * a * family.d0
        nk = [-(rn * a * a * RatPoly.monomial(k)) for k in range(family.dq + 1)]
    elif signal == "error":
        n0 = rn * a * family.c0
        nk = [rn * a * b * RatPoly.monomial(k) for k in range(family.dq + 1)]
    else:
        raise ValueError(f"未知の信号 '{signal}' です（{', '.join(SIGNALS)} のいずれか）")
    return n0, nk


def _real_residue(num: RatPoly, dden: RatPoly, p: Fraction) -> Fraction:
    return num.eval(-p) / dden.eval(-p)


def _complex_residue(num: RatPoly, dden: RatPoly, alpha: Fraction, beta: Fraction) -> tuple[Fraction, Fraction]:
    """s₀ = −α − jβ における留数 N(s₀)/D'(s₀) の (実部, 虚部)。"""
    s0 = -_sym(alpha) - sympy.I * _sym(beta)
    x = sympy.Symbol("s")
    n_val = sympy.expand(num.to_sympy(x).subs(x, s0))
    d_val = sympy.expand(dden.to_sympy(x).subs(x, s0))
    ratio = sympy.expand(n_val * sympy.conjugate(d_val)) / sympy.expand(d_val * sympy.conjugate(d_val))
    re, im = sympy.expand(ratio).as_real_imag()
    return as_fraction(sympy.Rational(re)), as_fraction(sympy.Rational(im))


def decompose(
    reference: Reference,
    family: YoulaFamily,
    poles: PoleSpec,
    signal: str = "output",
) -> ModalDecomposition:
    """
    参照信号に対する閉ループ信号のモーダル分解。

    Raises:
        InvalidPoleSpec: poles が family.z と一致しない場合
        PoleCollision: 参照信号の極が閉ループ極と重なる場合
        ImproperSignal: 信号のラプラス変換が厳密にプロパーでない場合
    """
    if family.z.monic() != target_poly(poles):
        raise InvalidPoleSpec("極指定が Youla 族の z(s) と一致しません")

    ref_roots = set(reference.poles.roots())
    loop_roots = set(poles.roots())
    common = ref_roots & loop_roots
    if common:
        raise PoleCollision(f"参照信号と閉ループで共通の極があります: {sorted(common)}")

    n0, nks = signal_numerators(reference, family, signal)
    den = reference.den * family.z
    if any(n.degree() >= den.degree() for n in [n0, *nks]):
        raise ImproperSignal(f"{signal} 信号のラプラス変換が厳密にプロパーではありません")
    dden = den.derivative()

    def real_coeff(p: Fraction) -> AffineCoeff:
        return AffineCoeff(
            _real_residue(n0, dden, p),
            tuple(_real_residue(nk, dden, p) for nk in nks),
        )

    def complex_coeffs(alpha: Fraction, beta: Fraction) -> tuple[AffineCoeff, AffineCoeff]:
        r0 = _complex_residue(n0, dden, alpha, beta)
        rk = [_complex_residue(nk, dden, alpha, beta) for nk in nks]
        return (
            AffineCoeff(r0[0], tuple(r[0] for r in rk)),
            AffineCoeff(r0[1], tuple(r[1] for r in rk)),
        )

    real_modes = tuple(
        RealMode(p, real_coeff(p)) for p in (*reference.poles.real, *poles.real)
    )
    complex_modes = []
    for alpha, beta in (*reference.poles.pairs, *poles.pairs):
        a, b = complex_coeffs(alpha, beta)
        complex_modes.append(ComplexMode(alpha, beta, a, b))

    log.info(
        "Modal decomposition",
        signal=signal,
        real_modes=len(real_modes),
        complex_modes=len(complex_modes),
    )
    return ModalDecomposition(tuple(real_modes), tuple(complex_modes), family.dq, signal)


def residue_system(reference: Reference, family: YoulaFamily, poles: PoleSpec, signal: str = "output") -> LinearResidueSystem:
    """
    部分分数展開の係数比較による線形系 A·x = b + B·q を組み立てます。

    ``decompose`` の留数と同じ解を与えます（検算用）。
    """
    n0, nks = signal_numerators(reference, family, signal)
    den = reference.den * family.z
    size = den.degree()
    columns: list[RatPoly] = []
    for p in (*reference.poles.real, *poles.real):
        columns.append(den // RatPoly((p, 1)))
    for alpha, beta in (*reference.poles.pairs, *poles.pairs):
        quad = RatPoly((alpha * alpha + beta * beta, 2 * alpha, 1))
        rest = den // quad
        columns.append(rest * RatPoly((2 * alpha, 2)))
        columns.append(rest * RatPoly((2 * beta,)))

    A = tuple(tuple(col.coeff(i) for col in columns) for i in range(size))
    b = tuple(n0.coeff(i) for i in range(size))
    B = tuple(tuple(nk.coeff(i) for nk in nks) for i in range(size))
    return LinearResidueSystem(A, b, B)


def rationalize_exponents(dec: ModalDecomposition, theta: object | None = None) -> ModalDecomposition:
    """
    時間尺度 m を 1/gcd(非ゼロの減衰率) とし、指数 p̄ = m·p, ᾱ = m·α, β̄ = m·β/θ を整数にします。

    θ を省略した場合は gcd(m·β) を用います。

    Raises:
        ScalingFailure: 指定された θ で β̄ が整数にならない場合
    """
    rates = [mode.p for mode in dec.real_modes] + [mode.alpha for mode in dec.complex_modes]
    nonzero = [r for r in rates if r != 0]
    m = 1 / rational_gcd(nonzero) if nonzero else Fraction(1)

    betas = [mode.beta * m for mode in dec.complex_modes]
    if theta is None:
        th = rational_gcd(betas) if betas else Fraction(1)
    else:
        th = as_fraction(theta)
        if th <= 0:
            raise ScalingFailure(f"θ = {th} は正である必要があります")

    def as_int(x: Fraction, what: str) -> int:
        if x.denominator != 1:
            raise ScalingFailure(f"{what} = {x} が整数になりません (m = {m}, θ = {th})")
        return int(x)

    real_modes = tuple(replace(mode, pbar=as_int(mode.p * m, "p̄")) for mode in dec.real_modes)
    complex_modes = tuple(
        replace(
            mode,
            abar=as_int(mode.alpha * m, "ᾱ"),
            bbar=as_int(mode.beta * m / th, "β̄"),
        )
        for mode in dec.complex_modes
    )
    log.info("Exponents rationalized", m=str(m), theta=str(th))
    return replace(dec, real_modes=real_modes, complex_modes=complex_modes, m=m, theta=th)


def time_eval(dec: ModalDecomposition, q: Sequence[object], t: np.ndarray | float) -> np.ndarray:
    """閉形式 y(t) を評価します。"""
    tt = np.asarray(t, dtype=float)
    y = np.zeros_like(tt)
    for mode in dec.real_modes:
        y = y + mode.y.at(q) * np.exp(-float(mode.p) * tt)
    for cm in dec.complex_modes:
        alpha, beta = float(cm.alpha), float(cm.beta)
        y = y + np.exp(-alpha * tt) * (
            2 * cm.a.at(q) * np.cos(beta * tt) + 2 * cm.b.at(q) * np.sin(beta * tt)
        )
    return y


def affine_term(coeff: AffineCoeff, basis: MultiPoly, nz: int) -> AffinePoly:
    out = AffinePoly.constant(basis * float(coeff.c0), nz)
    for k, lin in enumerate(coeff.lin):
        if lin != 0:
            out = out + AffinePoly.linear(basis * float(lin), k, nz)
    return out


def lam_power(n: int) -> MultiPoly:
    return MultiPoly.var(LAM) ** n


def to_multipoly(dec: ModalDecomposition, nz: int | None = None) -> AffinePoly:
    """
    u = cos θτ, v = sin θτ, λ = e^{−τ} (τ = t/m) とした多項式 y(u, v, λ)。

    係数は q について アフィン で、決定変数の先頭 dq+1 個を q とします。
    """
    if not dec.rationalized:
        raise ScalingFailure("先に rationalize_exponents を適用してください")
    nz = dec.nq if nz is None else nz
    y = AffinePoly(nz, {})
    for mode in dec.real_modes:
        assert mode.pbar is not None
        y = y + affine_term(mode.y, lam_power(mode.pbar), nz)
    for cm in dec.complex_modes:
        assert cm.abar is not None and cm.bbar is not None
        w, r = demoivre(cm.bbar)
        decay = lam_power(cm.abar)
        y = y + affine_term(cm.a, w * decay * 2.0, nz)
        y = y + affine_term(cm.b, r * decay * 2.0, nz)
    return y


def response_at(dec: ModalDecomposition, q: Sequence[object]) -> MultiPoly:
    """q を代入した y(u, v, λ)。"""
    qs = [float(x) for x in q] + [0.0] * (dec.nq - len(q))
    return to_multipoly(dec).evaluate(qs)
