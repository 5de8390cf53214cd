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
合成した制御器の時間領域での検証を担当するUseCaseモジュール。

数値積分（RK4）による応答と、モーダル分解の閉形式 time_eval を突き合わせ、
応答指標と上下限の違反量を求めます。
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
import structlog

from src.application.usecases.synth_usecase import SynthesisPlan
from src.core.diophantine import controller
from src.core.errors import VerificationFailed
from src.core.polynomial import RatPoly, as_fraction
from src.core.response import time_eval
from src.core.sim import (
    ResponseMetrics,
    TimeSeries,
    bound_violation,
    default_timing,
    metrics,
    simulate,
)
from src.core.transfer import control_transfer, signal_transfer

log = structlog.get_logger()

ORACLE_TOL = 1e-6
BOUND_TOL = 1e-6


@dataclass(eq=False)
class SimulationRun:
    """出力と制御入力の応答（同じ時間格子）。"""

    q: tuple[Fraction, ...]
    signal: TimeSeries
    control: TimeSeries
    metrics: ResponseMetrics


@dataclass(eq=False)
class VerificationReport:
    run: SimulationRun
    violation: Optional[float]
    oracle_error: float

    def passed(self, bound_tol: float = BOUND_TOL, oracle_tol: float = ORACLE_TOL) -> bool:
        bounds_ok = self.violation is None or self.violation <= bound_tol
        return bounds_ok and self.oracle_error <= oracle_tol


def simulate_plan(
    plan: SynthesisPlan,
    q: Sequence[object],
    horizon: Optional[float] = None,
    dt: Optional[float] = None,
) -> SimulationRun:
    qs = tuple(as_fraction(x) for x in q)
    ctrl = controller(plan.family, RatPoly(qs))
    sim_cfg = plan.config.simulation
    horizon = horizon if horizon is not None else sim_cfg.horizon
    dt = dt if dt is not None else sim_cfg.dt

    loop = signal_transfer(plan.plant, ctrl, plan.config.signal)
    u_tf = control_transfer(plan.plant, ctrl)
    if horizon is None or dt is None:
        default_h, default_dt = default_timing(loop, plan.reference)
        horizon = default_h if horizon is None else horizon
        dt = default_dt if dt is None else dt

    series = simulate(loop, plan.reference, horizon, dt)
    control = simulate(u_tf, plan.reference, horizon, dt)
    return SimulationRun(q=qs, signal=series, control=control, metrics=metrics(series))


class VerificationUseCase:
    """
    q を固定した閉ループの応答を検証するビジネスロジック層。
    """
    def __init__(self, bound_tol: float = BOUND_TOL, oracle_tol: float = ORACLE_TOL):
        self.bound_tol = bound_tol
        self.oracle_tol = oracle_tol

    def run(
        self,
        plan: SynthesisPlan,
        q: Sequence[object],
        horizon: Optional[float] = None,
        dt: Optional[float] = None,
    ) -> VerificationReport:
        run = simulate_plan(plan, q, horizon, dt)
        bounds = plan.config.bounds
        violation = None
        if bounds.upper is not None or bounds.lower is not None:
            m = float(plan.decomposition.m or 1)
            violation = bound_violation(run.signal, bounds.upper, bounds.lower, m)

        closed_form = time_eval(plan.decomposition, run.q, run.signal.t)
        oracle_error = float(np.max(np.abs(closed_form - run.signal.y)))
        report = VerificationReport(run=run, violation=violation, oracle_error=oracle_error)
        log.info(
            "Verification finished",
            violation=violation,
            oracle_error=oracle_error,
            peak=run.metrics.peak,
            steady_state=run.metrics.steady_state,
        )
        return report

    def check(self, report: VerificationReport) -> None:
        """
        Raises:
            VerificationFailed: 上下限の違反、または閉形式と数値積分の不一致がある場合
        """
        if report.violation is not None and report.violation > self.bound_tol:
            raise VerificationFailed(
                f"応答が上下限を最大 {report.violation:.3e} 超えています"
            )
        if report.oracle_error > self.oracle_tol:
            raise VerificationFailed(
                f"閉形式と数値積分の差が {report.oracle_error:.3e} です（許容 {self.oracle_tol:.1e}）"
            )
