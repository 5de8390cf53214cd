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
同梱の 2 つの数値例（指数包絡・多変数緩和）を通しで実行し、
既知の値と比較するUseCaseモジュール。
"""

from dataclasses import dataclass
from typing import Dict, List, Optional

import structlog

from src.application.usecases.synth_usecase import SynthesisResult, SynthesisUseCase
from src.application.usecases.verify_usecase import VerificationReport, VerificationUseCase
from src.core.report import ReproduceRow
from src.core.response import ComplexMode
from src.core.utils import get_resource_path
from src.infrastructure.sdp_solver import SdpSolver
from src.infrastructure.storage import ConfigManager

log = structlog.get_logger()

EXP_BOUNDS_CONFIG = "configs/exp-bounds.toml"
MULTIVARIATE_CONFIG = "configs/multivariate.toml"


@dataclass(frozen=True)
class Expected:
    value: float
    tolerance: float


# 既知の値（許容幅はソルバーに依存しない範囲で設定）
EXPECTED: Dict[str, Expected] = {
    "exp-bounds q0": Expected(-32.0, 1e-2),
    "exp-bounds q1": Expected(-23.0, 1e-2),
    "exp-bounds q2": Expected(-3.0, 1e-2),
    "exp-bounds y0": Expected(1.0, 1e-4),
    "exp-bounds |a1|+|b1|": Expected(0.0, 1e-4),
    "new bound lambda^0": Expected(1.0, 1e-2),
    "new bound lambda^2": Expected(1.25, 1e-2),
    "multivariate gamma (order 4)": Expected(1.0718, 1e-2),
    "multivariate peak": Expected(1.0714, 5e-4),
}

GAMMA_ORDER = 4


@dataclass(eq=False)
class ReproduceOutcome:
    rows: List[ReproduceRow]
    exp_bounds: SynthesisResult
    multivariate: SynthesisResult
    verification: VerificationReport

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows)


def _row(item: str, obtained: Optional[float]) -> ReproduceRow:
    e = EXPECTED[item]
    return ReproduceRow(item=item, expected=e.value, obtained=obtained, tolerance=e.tolerance)


def _envelope(result: SynthesisResult, index: int) -> float:
    mode = result.plan.decomposition.mode(index)
    assert isinstance(mode, ComplexMode)
    return 2.0 * (abs(mode.a.at(result.q)) + abs(mode.b.at(result.q)))


class ReproduceUseCase:
    """
    数値例の再現を行うビジネスロジック層。
    """
    def __init__(self, solver: Optional[SdpSolver] = None):
        self.synth = SynthesisUseCase(solver)
        self.verify = VerificationUseCase()

    def run(self) -> ReproduceOutcome:
        exp_cfg = ConfigManager.load(get_resource_path(EXP_BOUNDS_CONFIG))
        exp = self.synth.run(exp_cfg)
        dec = exp.plan.decomposition
        y0 = dec.steady_state_mode().y.at(exp.q)
        slow = dec.mode(1)
        assert isinstance(slow, ComplexMode)

        rows = [
            _row("exp-bounds q0", float(exp.q[0])),
            _row("exp-bounds q1", float(exp.q[1])),
            _row("exp-bounds q2", float(exp.q[2])),
            _row("exp-bounds y0", y0),
            _row("exp-bounds |a1|+|b1|", abs(slow.a.at(exp.q)) + abs(slow.b.at(exp.q))),
            _row("new bound lambda^0", y0),
            _row("new bound lambda^2", _envelope(exp, 2)),
        ]

        mv_cfg = ConfigManager.load(get_resource_path(MULTIVARIATE_CONFIG))
        mv = self.synth.run(mv_cfg)
        gamma = next((r.gamma for r in mv.rows if r.order == GAMMA_ORDER), None)
        rows.append(_row("multivariate gamma (order 4)", gamma))

        report = self.verify.run(mv.plan, mv.q)
        rows.append(_row("multivariate peak", report.run.metrics.peak))

        outcome = ReproduceOutcome(rows=rows, exp_bounds=exp, multivariate=mv, verification=report)
        log.info("Reproduction finished", passed=outcome.passed, mismatches=[r.item for r in rows if not r.ok])
        return outcome
