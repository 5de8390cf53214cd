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
時間応答のシミュレーション（検証用の独立したオラクル）。

信号のラプラス変換 G(s) = r(s)·T(s) を可制御正準形で実現し、
インパルス応答（x(0) = B）を固定刻みの 4 次ルンゲ＝クッタ法で積分します。
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import structlog

from src.core.errors import ImproperSignal, StepTooCoarse, UnstableLoop
from src.core.transfer import Reference, TransferFunction

log = structlog.get_logger(__name__)

STABILITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TimeSeries:
    t: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class ResponseMetrics:
    steady_state: float
    peak: float
    peak_time: float
    overshoot: float
    settling_time: float
    undershoot: float
    drifting: bool
    settled: bool = True


def realize(G: TransferFunction) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """厳密にプロパーな G の可制御正準形 (A, B, C)。"""
    if not G.is_strictly_proper():
        raise ImproperSignal("実現には厳密にプロパーな伝達関数が必要です")
    lead = float(G.den.lead)
    den = G.den.to_float() / lead
    num = G.num.to_float() / lead
    n = G.den.degree()
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -den[:n]
    B = np.zeros(n)
    B[-1] = 1.0
    C = np.zeros(n)
    C[: num.shape[0]] = num
    return A, B, C


def _check_stable(T: TransferFunction) -> list[complex]:
    poles = T.poles()
    unstable = [p for p in poles if p.real >= -STABILITY_TOL]
    if unstable:
        raise UnstableLoop(f"閉ループ極が左半平面にありません: {unstable}")
    return poles


def default_timing(T: TransferFunction, reference: Reference) -> tuple[float, float]:
    """
    (horizon, dt) の既定値。

    dt は最速時定数の 1/100、horizon は最も遅い閉ループ時定数の 10 倍です。
    """
    poles = _check_stable(T)
    ref_roots = [complex(float(re), float(im)) for re, im in reference.poles.roots()]
    speeds = [abs(p) for p in poles] + [abs(r) for r in ref_roots if abs(r) > 0]
    fastest = 1.0 / max(speeds)
    slowest = 1.0 / min(abs(p.real) for p in poles)
    return 10.0 * slowest, fastest / 100.0


def rk4(A: np.ndarray, x0: np.ndarray, dt: float, steps: int) -> np.ndarray:
    """ẋ = A x を固定刻みで積分し、各時刻の状態を (steps+1, n) で返します。"""
    out = np.empty((steps + 1, x0.shape[0]))
    x = x0.astype(float).copy()
    out[0] = x
    for i in range(steps):
        k1 = A @ x
        k2 = A @ (x + 0.5 * dt * k1)
        k3 = A @ (x + 0.5 * dt * k2)
        k4 = A @ (x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = x
    return out


def simulate(
    T: TransferFunction,
    reference: Reference,
    horizon: float | None = None,
    dt: float | None = None,
) -> TimeSeries:
    """
    参照信号 r に対する T の応答を求めます。

    Raises:
        UnstableLoop: T に左半平面外の極がある場合
        StepTooCoarse: dt が最速時定数の 1/10 を超える場合
    """
    default_h, default_dt = default_timing(T, reference)
    horizon = default_h if horizon is None else horizon
    if dt is None:
        dt = default_dt
    elif dt > 10.0 * default_dt:
        raise StepTooCoarse(f"dt = {dt} は上限 {10.0 * default_dt:.3g} を超えています")

    G = reference.to_transfer() * T
    A, B, C = realize(G)
    steps = int(math.ceil(horizon / dt))
    states = rk4(A, B, dt, steps)
    t = np.arange(steps + 1) * dt
    log.debug("Simulated", horizon=horizon, dt=dt, steps=steps)
    return TimeSeries(t=t, y=states @ C)


def metrics(
    series: TimeSeries,
    tail_fraction: float = 0.05,
    settle_band: float = 0.02,
    drift_tol: float = 1e-6,
) -> ResponseMetrics:
    """
    定常値は末尾 tail_fraction の平均で、その区間の変動が drift_tol を超えれば drifting。

    行き過ぎ量は定常値が正なら peak/定常値 − 1、そうでなければ peak の絶対値です。
    区間の最後まで ±settle_band に入らなければ settled=False、settling_time=inf。
    """
    y, t = series.y, series.t
    tail = y[int(len(y) * (1.0 - tail_fraction)):]
    ss = float(np.mean(tail))
    drifting = bool(np.ptp(tail) > drift_tol)
    idx = int(np.argmax(y))
    peak = float(y[idx])
    overshoot = max(0.0, peak / ss - 1.0) if ss > 1e-12 else abs(peak)
    scale = abs(ss) if abs(ss) > 1e-12 else 1.0
    outside = np.nonzero(np.abs(y - ss) > settle_band * scale)[0]
    settled = not outside.size or outside[-1] < len(t) - 1
    if not outside.size:
        settling = 0.0
    elif settled:
        settling = float(t[outside[-1] + 1])
    else:
        settling = math.inf
    return ResponseMetrics(
        steady_state=ss,
        peak=peak,
        peak_time=float(t[idx]),
        overshoot=overshoot,
        settling_time=settling,
        undershoot=max(0.0, float(-np.min(y))),
        drifting=drifting,
        settled=bool(settled),
    )


def bound_violation(
    series: TimeSeries,
    upper: Sequence[float] | None,
    lower: Sequence[float] | None,
    m: float = 1.0,
) -> float:
    """
    max_t max(y − g_u(λ), g_l(λ) − y, 0)（λ = e^{−t/m}）。
    """
    lam = np.exp(-series.t / m)
    worst = np.zeros_like(series.y)
    if upper is not None:
        worst = np.maximum(worst, series.y - np.polynomial.polynomial.polyval(lam, upper))
    if lower is not None:
        worst = np.maximum(worst, np.polynomial.polynomial.polyval(lam, lower) - series.y)
    return float(np.max(worst))
