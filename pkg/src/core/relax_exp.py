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
指数包絡による緩和。

|2a cos βt + 2b sin βt| ≤ 2(|a| + |b|) を用いて振動成分を λ のみの
多項式で上下から挟みます。|a|, |b| は補助変数 s_a ≥ ±a, s_b ≥ ±b で表します。
"""

from dataclasses import dataclass
from itertools import product

import numpy as np
import structlog

from src.core.errors import InfeasibleBoundSpec, ScalingFailure
from src.core.polynomial import AffinePoly, MultiPoly
from src.core.response import AffineCoeff, ModalDecomposition, affine_term, lam_power
from src.core.sos import (
    Constraint,
    DecisionLayout,
    LinearConstraint,
    UnivariateConstraint,
)

log = structlog.get_logger(__name__)

MAX_ENUMERATED_PAIRS = 6


@dataclass(frozen=True, eq=False)
class ExpBoundPair:
    """y_upper(λ) ≥ y(t) ≥ y_lower(λ) を与える λ の多項式の組。"""

    upper: AffinePoly
    lower: AffinePoly
    layout: DecisionLayout
    lift_constraints: tuple[LinearConstraint, ...]
    lifts: tuple[tuple[str, str], ...]

    def evaluate(self, z: np.ndarray) -> tuple[MultiPoly, MultiPoly]:
        return self.upper.evaluate(z), self.lower.evaluate(z)


def _check(dec: ModalDecomposition) -> None:
    if not dec.rationalized:
        raise ScalingFailure("先に rationalize_exponents を適用してください")


def _real_part(dec: ModalDecomposition, nz: int) -> AffinePoly:
    y = AffinePoly(nz, {})
    for mode in dec.real_modes:
        assert mode.pbar is not None
        y = y + affine_term(mode.y, lam_power(mode.pbar), nz)
    return y


def build_exp_bounds(dec: ModalDecomposition, layout: DecisionLayout | None = None) -> ExpBoundPair:
    """
    y_upper = Σ y_i λ^{p̄_i} + Σ 2(s_a + s_b) λ^{ᾱ_i}
    y_lower = Σ y_i λ^{p̄_i} − Σ 2(s_a + s_b) λ^{ᾱ_i}
    と補助制約 s_a ± a ≥ 0, s_b ± b ≥ 0 を作ります。
    """
    _check(dec)
    base = layout or DecisionLayout.youla(dec.dq)
    lift_names = []
    for i, _ in enumerate(dec.complex_modes):
        index = len(dec.real_modes) + i
        lift_names.append((f"sa{index}", f"sb{index}"))
    full = base.extend(*(n for pair in lift_names for n in pair))
    nz = full.size

    y_real = _real_part(dec, nz)
    envelope = AffinePoly(nz, {})
    lift_constraints: list[LinearConstraint] = []
    one = MultiPoly.constant(1.0)
    for cm, (sa, sb) in zip(dec.complex_modes, lift_names):
        assert cm.abar is not None
        decay = lam_power(cm.abar) * 2.0
        envelope = envelope + AffinePoly.linear(decay, full.index(sa), nz)
        envelope = envelope + AffinePoly.linear(decay, full.index(sb), nz)
        for name, coeff in ((sa, cm.a), (sb, cm.b)):
            s = AffinePoly.linear(one, full.index(name), nz)
            value = affine_term(coeff, one, nz)
            lift_constraints.append(LinearConstraint(s - value, f"{name}_pos"))
            lift_constraints.append(LinearConstraint(s + value, f"{name}_neg"))

    return ExpBoundPair(
        upper=y_real + envelope,
        lower=y_real - envelope,
        layout=full,
        lift_constraints=tuple(lift_constraints),
        lifts=tuple(lift_names),
    )


def build_exp_bounds_enumerated(dec: ModalDecomposition, layout: DecisionLayout | None = None) -> tuple[list[AffinePoly], list[AffinePoly]]:
    """
    補助変数を使わず、符号 (σ_a, σ_b) ∈ {±1}² のすべての組合せで
    y_upper^σ = Σ y_i λ^{p̄_i} + Σ 2(σ_a a + σ_b b) λ^{ᾱ_i} を列挙します。

    すべての σ について g_u − y_upper^σ ≥ 0 を課すことは、補助変数を使う形と同値です。
    """
    _check(dec)
    if len(dec.complex_modes) > MAX_ENUMERATED_PAIRS:
        raise ValueError(
            f"複素モードが {len(dec.complex_modes)} 個あり、符号の列挙数が大きすぎます"
        )
    full = layout or DecisionLayout.youla(dec.dq)
    nz = full.size
    y_real = _real_part(dec, nz)

    def oscillation(coeff: AffineCoeff, decay: MultiPoly, sign: float) -> AffinePoly:
        return affine_term(coeff, decay * (2.0 * sign), nz)

    uppers, lowers = [], []
    for signs in product((1.0, -1.0), repeat=2 * len(dec.complex_modes)):
        up, lo = y_real, y_real
        for i, cm in enumerate(dec.complex_modes):
            assert cm.abar is not None
            decay = lam_power(cm.abar)
            sa, sb = signs[2 * i], signs[2 * i + 1]
            up = up + oscillation(cm.a, decay, sa) + oscillation(cm.b, decay, sb)
            lo = lo - oscillation(cm.a, decay, sa) - oscillation(cm.b, decay, sb)
        uppers.append(up)
        lowers.append(lo)
    log.debug("Sign patterns enumerated", count=len(uppers))
    return uppers, lowers


def check_bound_spec(g_u: list[float] | None, g_l: list[float] | None, points: int = 1001) -> None:
    """λ ∈ [0, 1] の格子上で g_u ≥ g_l を確認します。"""
    if g_u is None or g_l is None:
        return
    lam = np.linspace(0.0, 1.0, points)
    gu = np.polynomial.polynomial.polyval(lam, g_u)
    gl = np.polynomial.polynomial.polyval(lam, g_l)
    worst = float(np.min(gu - gl))
    if worst < -1e-12:
        raise InfeasibleBoundSpec(
            f"g_u(λ) < g_l(λ) となる λ があります (min(g_u − g_l) = {worst:.3e})",
            status="BoundSpec",
        )


def bound_constraints(
    pair: ExpBoundPair,
    g_u: list[float] | None,
    g_l: list[float] | None,
) -> list[Constraint]:
    """
    g_u(λ) − y_upper(λ) ≥ 0 と y_lower(λ) − g_l(λ) ≥ 0（λ ∈ [0, 1]）、
    および補助変数の制約を返します。
    """
    check_bound_spec(g_u, g_l)
    nz = pair.layout.size
    out: list[Constraint] = []
    if g_u is not None:
        gu = AffinePoly.constant(MultiPoly.from_univariate(g_u), nz)
        out.append(UnivariateConstraint(gu - pair.upper, "upper"))
    if g_l is not None:
        gl = AffinePoly.constant(MultiPoly.from_univariate(g_l), nz)
        out.append(UnivariateConstraint(pair.lower - gl, "lower"))
    out.extend(pair.lift_constraints)
    return out


def enumerated_bound_constraints(
    uppers: list[AffinePoly],
    lowers: list[AffinePoly],
    g_u: list[float] | None,
    g_l: list[float] | None,
) -> list[Constraint]:
    check_bound_spec(g_u, g_l)
    out: list[Constraint] = []
    if g_u is not None:
        for i, up in enumerate(uppers):
            gu = AffinePoly.constant(MultiPoly.from_univariate(g_u), up.nz)
            out.append(UnivariateConstraint(gu - up, f"upper{i}"))
    if g_l is not None:
        for i, lo in enumerate(lowers):
            gl = AffinePoly.constant(MultiPoly.from_univariate(g_l), lo.nz)
            out.append(UnivariateConstraint(lo - gl, f"lower{i}"))
    return out
