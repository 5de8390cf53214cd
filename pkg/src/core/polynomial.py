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
多項式演算のコアモジュール。

- ``RatPoly``: 有理係数の一変数多項式（s または λ）。係数は昇べきの順。
- ``ComplexPoly``: 複素係数の一変数多項式（根計算用）。
- ``MultiPoly``: 変数 (u, v, λ) の実係数多変数多項式。
- ``AffinePoly``: 係数が決定変数 z について一次（アフィン）な多変数多項式。

正規化済みの値のみを保持するイミュータブルなデータクラスとして実装しています。
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import product
from math import gcd
from typing import Any, Iterable, Mapping, Sequence, Union

import numpy as np
import sympy
import structlog

from src.core.errors import DegenerateDivisor, DegenerateInput, NumericalFailure

log = structlog.get_logger(__name__)

RationalLike = Union[int, Fraction, str, float, sympy.Rational]

# (u, v, λ) の指数
Monomial = tuple[int, int, int]
VARIABLES: tuple[str, str, str] = ("u", "v", "lam")
U, V, LAM = 0, 1, 2
ONE: Monomial = (0, 0, 0)


def as_fraction(x: Any) -> Fraction:
    """int / Fraction / "p/q" 文字列 / float / sympy.Rational を Fraction に変換します。"""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool は係数として使用できません")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        # 10進表記のまま取り込む（0.1 → 1/10）
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip().replace(" ", ""))
    if isinstance(x, sympy.Rational):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, sympy.Basic) and x.is_Rational:
        return Fraction(int(x.p), int(x.q))
    raise TypeError(f"有理数に変換できません: {x!r}")


def _fmt_number(c: Any) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return f"{float(c):.6g}"


# =============================================================================
# 一変数有理多項式
# =============================================================================

@dataclass(frozen=True)
class RatPoly:
    """有理係数の一変数多項式。係数は昇べきの順 (c0, c1, ...) で保持します。"""

    coeffs: tuple[Fraction, ...] = ()

    def __post_init__(self) -> None:
        cs = [as_fraction(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    # --- 生成 ---

    @classmethod
    def constant(cls, c: RationalLike) -> "RatPoly":
        return cls((c,))

    @classmethod
    def monomial(cls, k: int, c: RationalLike = 1) -> "RatPoly":
        return cls((0,) * k + (c,))

    @classmethod
    def from_roots(cls, roots: Iterable[RationalLike]) -> "RatPoly":
        """∏(s − r) を返します。"""
        return reduce(lambda acc, r: acc * cls((-as_fraction(r), 1)), roots, cls((1,)))

    @classmethod
    def parse(cls, text: str, var: str = "s") -> "RatPoly":
        """"3*s^2 - 1/2*s + 4" のようなテキスト表現を解析します。"""
        return parse_univariate(text, var)

    # --- 基本的な性質 ---

    def degree(self) -> int:
        """次数。ゼロ多項式は -1 とします。"""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def monic(self) -> "RatPoly":
        if self.is_zero():
            raise DegenerateDivisor("ゼロ多項式はモニック化できません")
        return self.scale(1 / self.lead)

    # --- 算術 ---

    def __add__(self, other: Any) -> "RatPoly":
        other = _coerce_ratpoly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return RatPoly(tuple(self.coeff(i) + other.coeff(i) for i in range(n)))

    __radd__ = __add__

    def __neg__(self) -> "RatPoly":
        return RatPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: Any) -> "RatPoly":
        return self + (-_coerce_ratpoly(other))

    def __rsub__(self, other: Any) -> "RatPoly":
        return _coerce_ratpoly(other) - self

    def __mul__(self, other: Any) -> "RatPoly":
        other = _coerce_ratpoly(other)
        if self.is_zero() or other.is_zero():
            return RatPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RatPoly(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "RatPoly":
        if n < 0:
            raise ValueError("負のべき乗は定義されていません")
        return reduce(lambda acc, _: acc * self, range(n), RatPoly((1,)))

    def scale(self, c: RationalLike) -> "RatPoly":
        c = as_fraction(c)
        return RatPoly(tuple(c * x for x in self.coeffs))

    def __divmod__(self, other: "RatPoly") -> tuple["RatPoly", "RatPoly"]:
        """多項式の長除法。deg(余り) < deg(除数) を満たします。"""
        other = _coerce_ratpoly(other)
        if other.is_zero():
            raise DegenerateDivisor("ゼロ多項式で除算しようとしました")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return RatPoly(), self
        quot = [Fraction(0)] * (dq + 1)
        lead = other.lead
        for k in range(dq, -1, -1):
            c = rem[k + len(other.coeffs) - 1] / lead
            quot[k] = c
            if c == 0:
                continue
            for j, b in enumerate(other.coeffs):
                rem[k + j] -= c * b
        return RatPoly(tuple(quot)), RatPoly(tuple(rem[: len(other.coeffs) - 1]))

    def __floordiv__(self, other: "RatPoly") -> "RatPoly":
        return divmod(self, other)[0]

    def __mod__(self, other: "RatPoly") -> "RatPoly":
        return divmod(self, other)[1]

    def derivative(self) -> "RatPoly":
        return RatPoly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    # --- 評価・変換 ---

    def eval(self, x: Any) -> Any:
        """ホーナー法で評価します。x は Fraction / float / complex / ndarray を受け付けます。"""
        acc: Any = 0
        for c in reversed(self.coeffs):
            acc = acc * x + (c if isinstance(x, Fraction) or isinstance(x, int) else float(c))
        return acc

    __call__ = eval

    def to_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs], dtype=float)

    def to_sympy(self, x: sympy.Symbol) -> sympy.Expr:
        return sum(
            (sympy.Rational(c.numerator, c.denominator) * x**k for k, c in enumerate(self.coeffs)),
            sympy.Integer(0),
        )

    def to_text(self, var: str = "s") -> str:
        return format_univariate(self.coeffs, var)

    def __str__(self) -> str:
        return self.to_text()


def _coerce_ratpoly(x: Any) -> RatPoly:
    if isinstance(x, RatPoly):
        return x
    return RatPoly((as_fraction(x),))


def poly_gcd(a: RatPoly, b: RatPoly) -> RatPoly:
    """ユークリッドの互除法によるモニックな最大公約多項式。"""
    if a.is_zero() and b.is_zero():
        raise DegenerateInput("gcd(0, 0) は定義されていません")
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


# =============================================================================
# 複素係数多項式と根
# =============================================================================

@dataclass(frozen=True)
class ComplexPoly:
    """複素係数の一変数多項式（昇べきの順）。"""

    coeffs: tuple[complex, ...] = ()

    def __post_init__(self) -> None:
        cs = [complex(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_ratpoly(cls, p: RatPoly) -> "ComplexPoly":
        return cls(tuple(complex(float(c)) for c in p.coeffs))

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def eval(self, x: Any) -> Any:
        acc: Any = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "ComplexPoly":
        return ComplexPoly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))


def poly_roots(p: Union[RatPoly, ComplexPoly], newton_steps: int = 3) -> list[complex]:
    """
    コンパニオン行列の固有値から根を求め、ニュートン法で仕上げます。

    Raises:
        DegenerateInput: 次数が 1 未満の場合
        NumericalFailure: 残差 |p(r)| が 1e-8·‖p‖ を超える場合
    """
    cp = ComplexPoly.from_ratpoly(p) if isinstance(p, RatPoly) else p
    if cp.degree() < 1:
        raise DegenerateInput("次数 1 以上の多項式のみ根を計算できます")

    roots = list(np.roots(np.array(cp.coeffs[::-1])))
    dp = cp.derivative()
    refined = []
    for r in roots:
        for _ in range(newton_steps):
            d = dp.eval(r)
            if d == 0:
                break
            step = cp.eval(r) / d
            r = r - step
            if abs(step) < 1e-16 * max(1.0, abs(r)):
                break
        refined.append(complex(r))

    scale = float(np.linalg.norm(np.array(cp.coeffs)))
    worst = max(abs(cp.eval(r)) for r in refined)
    log.debug("poly_roots", degree=cp.degree(), residual=worst)
    if worst > 1e-8 * scale:
        raise NumericalFailure(f"根の残差が大きすぎます (max |p(r)| = {worst:.3e})")
    return sorted(refined, key=lambda z: (round(z.real, 12), round(z.imag, 12)))


# =============================================================================
# 多変数多項式 (u, v, λ)
# =============================================================================

def mono_key(m: Monomial) -> tuple[int, ...]:
    # 次数付き辞書式順序: 全次数の昇順、同次数内では u の指数が大きいものから
    return (sum(m), -m[0], -m[1], -m[2])


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


@dataclass(frozen=True)
class MultiPoly:
    """(u, v, λ) の実係数多項式。係数ゼロの項は保持しません。"""

    terms: tuple[tuple[Monomial, float], ...] = ()

    def __post_init__(self) -> None:
        acc: dict[Monomial, float] = {}
        for m, c in self.terms:
            m = (int(m[0]), int(m[1]), int(m[2]))
            acc[m] = acc.get(m, 0.0) + float(c)
        ordered = tuple(
            (m, c) for m, c in sorted(acc.items(), key=lambda t: mono_key(t[0])) if c != 0.0
        )
        object.__setattr__(self, "terms", ordered)

    # --- 生成 ---

    @classmethod
    def from_dict(cls, d: Mapping[Monomial, float]) -> "MultiPoly":
        return cls(tuple(d.items()))

    @classmethod
    def constant(cls, c: float) -> "MultiPoly":
        return cls(((ONE, c),))

    @classmethod
    def var(cls, index: int) -> "MultiPoly":
        m = [0, 0, 0]
        m[index] = 1
        return cls(((tuple(m), 1.0),))  # type: ignore[arg-type]

    @classmethod
    def from_univariate(cls, coeffs: Sequence[Any], index: int = LAM) -> "MultiPoly":
        """λ（または u, v）の一変数多項式を埋め込みます。coeffs は昇べきの順。"""
        out = []
        for k, c in enumerate(coeffs):
            m = [0, 0, 0]
            m[index] = k
            out.append((tuple(m), float(c)))
        return cls(tuple(out))  # type: ignore[arg-type]

    @classmethod
    def parse(cls, text: str) -> "MultiPoly":
        return parse_multivariate(text)

    # --- 性質 ---

    def as_dict(self) -> dict[Monomial, float]:
        return dict(self.terms)

    def coeff(self, m: Monomial) -> float:
        return self.as_dict().get(m, 0.0)

    def degree(self) -> int:
        return max((sum(m) for m, _ in self.terms), default=-1)

    def degree_in(self, index: int) -> int:
        return max((m[index] for m, _ in self.terms), default=-1)

    def variables(self) -> set[int]:
        return {i for m, _ in self.terms for i in range(3) if m[i] > 0}

    def is_zero(self) -> bool:
        return not self.terms

    # --- 算術 ---

    def __add__(self, other: Any) -> "MultiPoly":
        other = _coerce_multipoly(other)
        return MultiPoly(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(tuple((m, -c) for m, c in self.terms))

    def __sub__(self, other: Any) -> "MultiPoly":
        return self + (-_coerce_multipoly(other))

    def __rsub__(self, other: Any) -> "MultiPoly":
        return _coerce_multipoly(other) - self

    def __mul__(self, other: Any) -> "MultiPoly":
        other = _coerce_multipoly(other)
        return MultiPoly(tuple(
            (_mono_mul(ma, mb), ca * cb) for ma, ca in self.terms for mb, cb in other.terms
        ))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ValueError("負のべき乗は定義されていません")
        return reduce(lambda acc, _: acc * self, range(n), MultiPoly.constant(1.0))

    # --- 評価 ---

    def eval(self, point: Sequence[Any]) -> Any:
        """point = (u, v, λ)。各成分は float でも ndarray でも構いません。"""
        u, v, lam = point
        total: Any = 0.0
        for (i, j, k), c in self.terms:
            total = total + c * (u**i) * (v**j) * (lam**k)
        return total

    __call__ = eval

    def to_text(self) -> str:
        return format_multivariate(self.terms)

    def __str__(self) -> str:
        return self.to_text()


def _coerce_multipoly(x: Any) -> MultiPoly:
    if isinstance(x, MultiPoly):
        return x
    return MultiPoly.constant(float(x))


def demoivre(n: int) -> tuple[MultiPoly, MultiPoly]:
    """
    (u + jv)^n = w_n(u, v) + j·r_n(u, v) となる実多項式の組 (w_n, r_n) を返します。

    u = cos θτ, v = sin θτ のとき w_n = cos nθτ, r_n = sin nθτ です。
    """
    if n < 0:
        raise ValueError("n は非負である必要があります")
    w, r = MultiPoly.constant(1.0), MultiPoly()
    u, v = MultiPoly.var(U), MultiPoly.var(V)
    for _ in range(n):
        w, r = w * u - r * v, w * v + r * u
    return w, r


def monomials_up_to(variables: Sequence[int], degree: int) -> list[Monomial]:
    """指定変数のみを含む全次数 ≤ degree の単項式（次数付き辞書式順序）。"""
    if degree < 0:
        return []
    out: list[Monomial] = []
    for exps in product(range(degree + 1), repeat=len(variables)):
        if sum(exps) > degree:
            continue
        m = [0, 0, 0]
        for idx, e in zip(variables, exps):
            m[idx] = e
        out.append(tuple(m))  # type: ignore[arg-type]
    return sorted(set(out), key=mono_key)


# =============================================================================
# 決定変数についてアフィンな多項式
# =============================================================================

@dataclass(frozen=True, eq=False)
class AffinePoly:
    """
    Σ_m (c_m + ℓ_mᵀ z) · m(u, v, λ) の形の多項式。

    各単項式に長さ 1 + nz のベクトル [c_m, ℓ_m] を対応付けます。
    """

    nz: int
    terms: Mapping[Monomial, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        cleaned: dict[Monomial, np.ndarray] = {}
        for m, vec in self.terms.items():
            arr = np.asarray(vec, dtype=float).reshape(-1)
            if arr.shape[0] != self.nz + 1:
                raise ValueError(f"係数ベクトルの長さが nz+1={self.nz + 1} と一致しません")
            if np.any(arr != 0.0):
                cleaned[m] = arr.copy()
        object.__setattr__(self, "terms", dict(sorted(cleaned.items(), key=lambda t: mono_key(t[0]))))

    @classmethod
    def constant(cls, p: MultiPoly, nz: int) -> "AffinePoly":
        terms = {}
        for m, c in p.terms:
            vec = np.zeros(nz + 1)
            vec[0] = c
            terms[m] = vec
        return cls(nz, terms)

    @classmethod
    def linear(cls, p: MultiPoly, index: int, nz: int) -> "AffinePoly":
        """p(u, v, λ) · z[index]"""
        if not 0 <= index < nz:
            raise IndexError(f"決定変数の番号 {index} が範囲外です (nz={nz})")
        terms = {}
        for m, c in p.terms:
            vec = np.zeros(nz + 1)
            vec[index + 1] = c
            terms[m] = vec
        return cls(nz, terms)

    def _combine(self, other: "AffinePoly", sign: float) -> "AffinePoly":
        if other.nz != self.nz:
            raise ValueError("決定変数の個数が一致しません")
        out = {m: v.copy() for m, v in self.terms.items()}
        for m, v in other.terms.items():
            out[m] = out.get(m, np.zeros(self.nz + 1)) + sign * v
        return AffinePoly(self.nz, out)

    def __add__(self, other: "AffinePoly") -> "AffinePoly":
        return self._combine(other, 1.0)

    def __sub__(self, other: "AffinePoly") -> "AffinePoly":
        return self._combine(other, -1.0)

    def __neg__(self) -> "AffinePoly":
        return AffinePoly(self.nz, {m: -v for m, v in self.terms.items()})

    def scale(self, c: float) -> "AffinePoly":
        return AffinePoly(self.nz, {m: c * v for m, v in self.terms.items()})

    def mul_poly(self, p: MultiPoly) -> "AffinePoly":
        """固定多項式 p(u, v, λ) との積。"""
        out: dict[Monomial, np.ndarray] = {}
        for m, v in self.terms.items():
            for mp, c in p.terms:
                key = _mono_mul(m, mp)
                out[key] = out.get(key, np.zeros(self.nz + 1)) + c * v
        return AffinePoly(self.nz, out)

    def embed(self, nz_new: int, offset: int = 0) -> "AffinePoly":
        """決定変数ベクトルを長さ nz_new に拡張し、元の変数を offset 番目から配置します。"""
        if offset + self.nz > nz_new:
            raise ValueError("埋め込み先の決定変数が不足しています")
        out = {}
        for m, v in self.terms.items():
            vec = np.zeros(nz_new + 1)
            vec[0] = v[0]
            vec[1 + offset: 1 + offset + self.nz] = v[1:]
            out[m] = vec
        return AffinePoly(nz_new, out)

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def variables(self) -> set[int]:
        return {i for m in self.terms for i in range(3) if m[i] > 0}

    def monomials(self) -> list[Monomial]:
        return list(self.terms)

    def evaluate(self, z: Sequence[float]) -> MultiPoly:
        """決定変数に値を代入した多項式を返します。"""
        zz = np.concatenate(([1.0], np.asarray(z, dtype=float).reshape(-1)))
        if zz.shape[0] != self.nz + 1:
            raise ValueError(f"決定変数の長さ {zz.shape[0] - 1} が nz={self.nz} と一致しません")
        return MultiPoly(tuple((m, float(v @ zz)) for m, v in self.terms.items()))

    def split(self, rows: Sequence[Monomial]) -> tuple[np.ndarray, np.ndarray]:
        """指定した単項式の並びに対する (定数ベクトル, 係数行列) を返します。"""
        const = np.zeros(len(rows))
        lin = np.zeros((len(rows), self.nz))
        for i, m in enumerate(rows):
            v = self.terms.get(m)
            if v is not None:
                const[i] = v[0]
                lin[i, :] = v[1:]
        return const, lin


# =============================================================================
# テキスト表現
# =============================================================================

def format_univariate(coeffs: Sequence[Any], var: str = "s") -> str:
    """降べきの順で "3*s^2 - 1/2*s + 4" の形式に整形します。"""
    parts: list[str] = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        neg = c < 0
        mag = -c if neg else c
        mag_txt = _fmt_number(mag)
        if k == 0:
            body = mag_txt
        else:
            power = var if k == 1 else f"{var}^{k}"
            body = power if mag == 1 else f"{mag_txt}*{power}"
        parts.append(("- " if neg else "+ ") + body)
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else "-" + text[2:]


def format_multivariate(terms: Sequence[tuple[Monomial, float]]) -> str:
    parts: list[str] = []
    for m, c in terms:
        factors = [
            name if e == 1 else f"{name}^{e}"
            for name, e in zip(VARIABLES, m) if e > 0
        ]
        mag = abs(c)
        if factors:
            body = "*".join(factors) if mag == 1 else f"{mag:.6g}*" + "*".join(factors)
        else:
            body = f"{mag:.6g}"
        parts.append(("- " if c < 0 else "+ ") + body)
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else "-" + text[2:]


_TERM_RE = re.compile(r"[+-]?[^+-]+")


def _split_terms(text: str) -> list[str]:
    compact = text.replace(" ", "").replace("**", "^")
    if not compact:
        raise ValueError("空の多項式テキストです")
    # 指数表記 1e-3 の符号を項の区切りと誤認しないよう一時的に置換
    compact = re.sub(r"(\d)[eE]([+-])", lambda mt: f"{mt.group(1)}E{'P' if mt.group(2) == '+' else 'M'}", compact)
    terms = _TERM_RE.findall(compact)
    if "".join(terms) != compact:
        raise ValueError(f"多項式を解析できません: {text!r}")
    return [t.replace("EP", "e+").replace("EM", "e-") for t in terms]


def parse_univariate(text: str, var: str = "s") -> RatPoly:
    acc: dict[int, Fraction] = {}
    for term in _split_terms(text):
        sign = Fraction(-1) if term.startswith("-") else Fraction(1)
        body = term.lstrip("+-")
        coef = Fraction(1)
        power = 0
        for factor in body.split("*"):
            if not factor:
                raise ValueError(f"多項式を解析できません: {text!r}")
            if factor == var or factor.startswith(var + "^"):
                power += int(factor[len(var) + 1:]) if "^" in factor else 1
            else:
                try:
                    coef *= as_fraction(factor)
                except (ValueError, ZeroDivisionError) as e:
                    raise ValueError(f"係数を解析できません: {factor!r} ({text!r})") from e
        acc[power] = acc.get(power, Fraction(0)) + sign * coef
    top = max(acc, default=0)
    return RatPoly(tuple(acc.get(k, Fraction(0)) for k in range(top + 1)))


def parse_multivariate(text: str) -> MultiPoly:
    names = {name: i for i, name in enumerate(VARIABLES)}
    names["λ"] = LAM
    out: list[tuple[Monomial, float]] = []
    for term in _split_terms(text):
        sign = -1.0 if term.startswith("-") else 1.0
        coef = 1.0
        m = [0, 0, 0]
        for factor in term.lstrip("+-").split("*"):
            base, _, exp = factor.partition("^")
            if base in names:
                m[names[base]] += int(exp) if exp else 1
            else:
                try:
                    coef *= float(as_fraction(factor))
                except (ValueError, ZeroDivisionError) as e:
                    raise ValueError(f"係数を解析できません: {factor!r} ({text!r})") from e
        out.append((tuple(m), sign * coef))  # type: ignore[arg-type]
    return MultiPoly(tuple(out))


def rational_gcd(values: Iterable[Fraction]) -> Fraction:
    """正の有理数の最大公約数 gcd(n_i) / lcm(d_i)。"""
    vals = [abs(as_fraction(v)) for v in values if v != 0]
    if not vals:
        raise DegenerateInput("非ゼロの値が必要です")
    num = reduce(gcd, (v.numerator for v in vals))
    den = reduce(lambda a, b: a * b // gcd(a, b), (v.denominator for v in vals))
    return Fraction(num, den)
