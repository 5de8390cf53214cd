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
曲線 τ ↦ (cos θτ, sin θτ, e^{−τ}) (τ ≥ 0) の半代数的な外側近似。

τ ∈ [0, τ_N] を N 個の区間に分割し、各区間で e^{−τ} を (u, v) の
三角多項式 ψ_l で近似します。区間 l の領域は
    u² + v² = 1,  |λ − ψ_l(u, v)| ≤ δ,  円弧上にある（弦による半平面）
で、τ ≥ τ_N の尾部は u² + v² = 1, 0 ≤ λ ≤ ε で覆います。
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import structlog
from scipy.integrate import simpson
from scipy.interpolate import BPoly

from src.core.errors import ApproximationBudgetExceeded, InvalidParameter
from src.core.polynomial import LAM, U, V, MultiPoly, as_fraction, demoivre

log = structlog.get_logger(__name__)

QUADRATURE_PANELS = 4096
CHECK_POINTS = 2048
FIT_MARGIN = 0.95
COEFF_FLOOR = 1e-13


@dataclass(frozen=True)
class Region:
    """等式 e_i = 0 と不等式 f_j ≥ 0 で定まる基本半代数集合。"""

    eqs: tuple[MultiPoly, ...]
    ineqs: tuple[MultiPoly, ...]
    label: str = ""

    def contains(self, point: Sequence[float], tol: float = 1e-9) -> bool:
        return all(abs(e.eval(point)) <= tol for e in self.eqs) and all(
            f.eval(point) >= -tol for f in self.ineqs
        )

    def mask(self, u: np.ndarray, v: np.ndarray, lam: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """点列 (u, v, λ) のうち領域に入るものを True とする配列。"""
        ok = np.ones(np.shape(u), dtype=bool)
        for e in self.eqs:
            ok &= np.abs(e.eval((u, v, lam))) <= tol
        for f in self.ineqs:
            ok &= f.eval((u, v, lam)) >= -tol
        return ok

    def degree(self) -> int:
        return max((p.degree() for p in (*self.eqs, *self.ineqs)), default=0)


@dataclass(frozen=True)
class Overapprox:
    regions: tuple[Region, ...]
    eps: float
    theta: Fraction
    t_bar: float
    tau_grid: tuple[float, ...]
    psis: tuple[MultiPoly, ...]
    degrees: tuple[int, ...]
    errors: tuple[float, ...]
    band: float

    @property
    def n_intervals(self) -> int:
        return len(self.psis)


def _circle() -> MultiPoly:
    u, v = MultiPoly.var(U), MultiPoly.var(V)
    return u * u + v * v - 1.0


def chord_halfplane(theta: float, tau_a: float, tau_b: float) -> MultiPoly:
    """
    点 P_a = (cos θτ_a, sin θτ_a) から P_b への弦に対する外積 E(u, v)。

    反時計回りの円弧（長さ 2π 未満）上の点では E ≤ 0 となります。
    """
    ca, sa = math.cos(theta * tau_a), math.sin(theta * tau_a)
    cb, sb = math.cos(theta * tau_b), math.sin(theta * tau_b)
    # (P_b − P_a) × (X − P_a)
    return MultiPoly.from_dict({
        (1, 0, 0): sa - sb,
        (0, 1, 0): cb - ca,
        (0, 0, 0): sb * ca - cb * sa,
    })


def _band_region(psi: MultiPoly, band: float, halfplane: MultiPoly, label: str) -> Region:
    lam = MultiPoly.var(LAM)
    gap = lam - psi
    return Region(
        eqs=(_circle(),),
        ineqs=(band - gap, band + gap, -halfplane),
        label=label,
    )


def tail_region(eps: float) -> Region:
    lam = MultiPoly.var(LAM)
    return Region(eqs=(_circle(),), ineqs=(lam, eps - lam), label="tail")


def trig_to_multipoly(a: np.ndarray, b: np.ndarray) -> MultiPoly:
    """a₀ + Σ a_k cos kθτ + b_k sin kθτ を De Moivre 展開で (u, v) の多項式に変換します。"""
    psi = MultiPoly.constant(float(a[0]))
    for k in range(1, len(a)):
        if a[k] == 0.0 and b[k] == 0.0:
            continue
        w, r = demoivre(k)
        psi = psi + w * float(a[k]) + r * float(b[k])
    return psi


def _bridge(tau_lo: float, tau_hi: float, period: float) -> BPoly:
    """e^{−τ} を τ_hi から τ_lo + period へ C² でつなぐ 5 次エルミート多項式。"""
    e_hi = math.exp(-tau_hi)
    e_lo = math.exp(-tau_lo)
    return BPoly.from_derivatives(
        [tau_hi, tau_lo + period],
        [[e_hi, -e_hi, e_hi], [e_lo, -e_lo, e_lo]],
    )


def _fourier_table(tau_lo: float, tau_hi: float, theta: float, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    period = 2 * math.pi / theta
    grid = np.linspace(tau_lo, tau_lo + period, QUADRATURE_PANELS + 1)
    bridge = _bridge(tau_lo, tau_hi, period)
    phi = np.where(grid <= tau_hi, np.exp(-grid), bridge(grid))

    ks = np.arange(k_max + 1)[:, None]
    cos_t = np.cos(ks * theta * grid[None, :])
    sin_t = np.sin(ks * theta * grid[None, :])
    a = 2.0 / period * simpson(phi[None, :] * cos_t, x=grid, axis=1)
    b = 2.0 / period * simpson(phi[None, :] * sin_t, x=grid, axis=1)
    a[0] /= 2.0
    b[0] = 0.0
    a[np.abs(a) < COEFF_FLOOR] = 0.0
    b[np.abs(b) < COEFF_FLOOR] = 0.0
    return a, b


def _partial_sum(a: np.ndarray, b: np.ndarray, K: int, theta: float, tau: np.ndarray) -> np.ndarray:
    ks = np.arange(K + 1)[:, None]
    return (a[: K + 1, None] * np.cos(ks * theta * tau[None, :])).sum(axis=0) + (
        b[: K + 1, None] * np.sin(ks * theta * tau[None, :])
    ).sum(axis=0)


def uniform_error(psi: MultiPoly, theta: float, tau_lo: float, tau_hi: float, points: int = CHECK_POINTS) -> float:
    """max_{τ∈[τ_lo, τ_hi]} |ψ(cos θτ, sin θτ) − e^{−τ}|（格子上での評価）"""
    tau = np.linspace(tau_lo, tau_hi, points + 1)
    vals = psi.eval((np.cos(theta * tau), np.sin(theta * tau), np.zeros_like(tau)))
    return float(np.max(np.abs(vals - np.exp(-tau))))


def _validate(eps: float, T: float, theta: float) -> None:
    if not 0.0 < eps < 1.0:
        raise InvalidParameter(f"ε = {eps} は 0 < ε < 1 を満たす必要があります")
    if not 0.0 < T < 2 * math.pi / theta:
        raise InvalidParameter(f"T = {T} は 0 < T < 2π/θ = {2 * math.pi / theta:.6g} を満たす必要があります")


def build_overapprox(eps: float, T: float, theta: object = 1, k_max: int = 40) -> Overapprox:
    """
    区間長 T 以下の一様格子で外側近似を構築します。

    各区間では e^{−τ} を帯域幅 ε/2 の 95% 以内で近似できる最小の次数 K_l を選び、
    帯域幅 δ = ε/2 の領域を作ります。

    Raises:
        InvalidParameter: ε, T が範囲外の場合
        ApproximationBudgetExceeded: K_max 以内で近似できない区間がある場合
    """
    th_frac = as_fraction(theta)
    th = float(th_frac)
    _validate(eps, T, th)

    tau_end = -math.log(eps)
    # 浮動小数点誤差で区間数が 1 つ増えないよう丸める
    n = max(1, math.ceil(tau_end / T - 1e-9))
    t_bar = tau_end / n
    grid = tuple(l * t_bar for l in range(n + 1))
    band = eps / 2.0
    target = FIT_MARGIN * band
    period = 2 * math.pi / th

    psis, degrees, errors, regions = [], [], [], []
    for l in range(n):
        lo, hi = grid[l], grid[l + 1]
        a, b = _fourier_table(lo, hi, th, k_max)
        check = np.linspace(lo, hi, CHECK_POINTS + 1)
        exact = np.exp(-check)
        chosen = None
        for K in range(k_max + 1):
            err = float(np.max(np.abs(_partial_sum(a, b, K, th, check) - exact)))
            if err <= target:
                chosen = (K, err)
                break
        if chosen is None:
            raise ApproximationBudgetExceeded(
                f"区間 [{lo:.4g}, {hi:.4g}] を K ≤ {k_max} で ε/2 = {band:.3g} 以内に近似できません"
                f"（周期 {period:.4g}）"
            )
        K, err = chosen
        a_k, b_k = a[: K + 1].copy(), b[: K + 1].copy()
        psi = trig_to_multipoly(a_k, b_k)
        psis.append(psi)
        degrees.append(psi.degree())
        errors.append(uniform_error(psi, th, lo, hi))
        regions.append(_band_region(psi, band, chord_halfplane(th, lo, hi), f"interval-{l}"))
        log.debug("Interval approximated", interval=l, K=K, error=err)

    regions.append(tail_region(eps))
    log.info(
        "Overapproximation built",
        eps=eps, intervals=n, t_bar=t_bar, degrees=degrees,
    )
    return Overapprox(
        regions=tuple(regions),
        eps=eps,
        theta=th_frac,
        t_bar=t_bar,
        tau_grid=grid,
        psis=tuple(psis),
        degrees=tuple(degrees),
        errors=tuple(errors),
        band=band,
    )


def build_overapprox_fixed_degree(eps: float, K: int, theta: object = 1, min_T: float = 1e-3) -> Overapprox:
    """
    フーリエ次数 K を固定し、近似可能になるまで区間長 T を半分にして構築します。
    """
    th = float(as_fraction(theta))
    T = min(-math.log(eps), 2 * math.pi / th * (1 - 1e-9))
    while T >= min_T:
        try:
            return build_overapprox(eps, T, theta, k_max=K)
        except ApproximationBudgetExceeded:
            log.debug("Halving interval length", T=T, K=K)
            T /= 2.0
    raise ApproximationBudgetExceeded(f"次数 K = {K} では T ≥ {min_T} の分割で近似できません")


# 数値例で公表されている近似（ε = e^{−1.5π}, θ = 1, 2 区間, 帯域幅 ε）
_PRECOMPUTED_PSIS = (
    "0.398*u - 0.971*v + 0.616*u^2 - 0.192*u*v + 1.179*v^2 - 0.015*u^3 + 0.184*u^2*v",
    "0.033*u + 0.096*v + 0.0760*u^2 + 0.0534*u*v + 0.094*v^2 + 0.013*u*v^2 - 0.011*v^3",
)


def precomputed() -> Overapprox:
    """ε = e^{−1.5π}, θ = 1, τ 格子 (0, 0.75π, 1.5π) の既知の外側近似。"""
    eps = math.exp(-1.5 * math.pi)
    grid = (0.0, 0.75 * math.pi, 1.5 * math.pi)
    psis = tuple(MultiPoly.parse(text) for text in _PRECOMPUTED_PSIS)
    regions = [
        _band_region(psi, eps, chord_halfplane(1.0, grid[l], grid[l + 1]), f"interval-{l}")
        for l, psi in enumerate(psis)
    ]
    regions.append(tail_region(eps))
    return Overapprox(
        regions=tuple(regions),
        eps=eps,
        theta=Fraction(1),
        t_bar=0.75 * math.pi,
        tau_grid=grid,
        psis=psis,
        degrees=tuple(p.degree() for p in psis),
        errors=tuple(uniform_error(p, 1.0, grid[l], grid[l + 1]) for l, p in enumerate(psis)),
        band=eps,
    )


def membership(o: Overapprox, point: Sequence[float], tol: float = 1e-9) -> set[int]:
    """point を含む領域の番号の集合。"""
    return {i for i, region in enumerate(o.regions) if region.contains(point, tol)}


def covered(o: Overapprox, taus: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """曲線上の点 τ ごとに、いずれかの領域に入るかどうか。"""
    th = float(o.theta)
    u, v, lam = np.cos(th * taus), np.sin(th * taus), np.exp(-taus)
    hit = np.zeros(taus.shape, dtype=bool)
    for region in o.regions:
        hit |= region.mask(u, v, lam, tol)
    return hit


def vertical_gaps(o: Overapprox, arc_samples: int = 512, levels: int = 9) -> tuple[float, ...]:
    """
    各領域から点を取り、その円弧上の τ での e^{−τ} との λ 方向の距離の最大値を返します。

    区間の領域では τ ∈ I_l を arc_samples 点、λ = ψ_l ± δ の帯を levels 段に刻みます。
    尾部では同じ角度で τ ≥ τ_N となる最初の τ の e^{−τ} と、λ ∈ [0, ε] の両端との距離を上界とします。
    """
    th = float(o.theta)
    steps = np.linspace(-1.0, 1.0, levels)
    gaps = []
    for l, psi in enumerate(o.psis):
        tau = np.linspace(o.tau_grid[l], o.tau_grid[l + 1], arc_samples)
        u, v = np.cos(th * tau), np.sin(th * tau)
        center = psi.eval((u, v, np.zeros_like(tau)))
        lam = center[None, :] + o.band * steps[:, None]
        gaps.append(float(np.max(np.abs(lam - np.exp(-tau)[None, :]))))
    tau_end = o.tau_grid[-1]
    angle = np.linspace(0.0, 2 * math.pi, arc_samples, endpoint=False)
    first = tau_end + np.mod(angle - th * tau_end, 2 * math.pi) / th
    nearest = np.exp(-first)
    gaps.append(float(np.max(np.maximum(nearest, o.eps - nearest))))
    return tuple(gaps)


def curve_point(theta: float, tau: float) -> tuple[float, float, float]:
    return (math.cos(theta * tau), math.sin(theta * tau), math.exp(-tau))
