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
cvxpy を介した SDP ソルバーのバックエンド。

ソルバーの状態を Optimal / Infeasible / Unbounded / SlowProgress / Uncertified に正規化し、
最適解では SOS 証明書を検査して、許容値を超えたものは Uncertified に落とします。
"""

from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path
from typing import Any

import cvxpy as cp
import numpy as np
import scipy.sparse as sp
import structlog

from src.core.resilience import solve_with_fallback
from src.core.sos import Certificate, SdpProblem, audit_certificate
from src.models import SolverSettings

log = structlog.get_logger(__name__)


class SolveStatus(StrEnum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    SLOW_PROGRESS = "SlowProgress"
    UNCERTIFIED = "Uncertified"


_STATUS_MAP = {
    cp.OPTIMAL: SolveStatus.OPTIMAL,
    cp.INFEASIBLE: SolveStatus.INFEASIBLE,
    cp.UNBOUNDED: SolveStatus.UNBOUNDED,
    cp.OPTIMAL_INACCURATE: SolveStatus.SLOW_PROGRESS,
    cp.INFEASIBLE_INACCURATE: SolveStatus.INFEASIBLE,
    cp.UNBOUNDED_INACCURATE: SolveStatus.UNBOUNDED,
}


@dataclass(frozen=True, eq=False)
class SdpSolution:
    status: SolveStatus
    z: np.ndarray | None
    objective: float | None
    solver: str
    iterations: int | None
    certificates: tuple[Certificate, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status == SolveStatus.OPTIMAL


class SdpSolver:
    """設定されたソルバーチェーンで SdpProblem を解きます。"""

    def __init__(self, settings: SolverSettings | None = None):
        self.settings = settings or SolverSettings()

    def options(self) -> dict[str, dict[str, Any]]:
        s = self.settings
        return {
            "CLARABEL": {
                "tol_gap_abs": s.tol_gap,
                "tol_gap_rel": s.tol_gap,
                "tol_feas": s.tol_feas,
                "max_iter": s.max_iter,
            },
            "SCS": {
                "eps_abs": s.tol_feas,
                "eps_rel": s.tol_gap,
                "max_iters": s.scs_max_iters,
            },
        }

    def solve(self, sdp: SdpProblem) -> SdpSolution:
        name = solve_with_fallback(sdp.problem, self.settings.chain, self.options())
        status = _STATUS_MAP.get(sdp.problem.status, SolveStatus.SLOW_PROGRESS)
        stats = sdp.problem.solver_stats
        iterations = getattr(stats, "num_iters", None) if stats is not None else None

        z = None if sdp.z.value is None else np.asarray(sdp.z.value, dtype=float).copy()
        value = sdp.problem.value
        objective = float(value) if value is not None and np.isfinite(value) else None

        certificates: tuple[Certificate, ...] = ()
        if status == SolveStatus.OPTIMAL and z is not None:
            certificates = tuple(audit_certificate(enc, z) for enc in sdp.encoded)
            worst = max((c.residual for c in certificates), default=0.0)
            min_eig = min((c.min_eigenvalue for c in certificates), default=0.0)
            log.info("Certificates audited", count=len(certificates), residual=worst, min_eigenvalue=min_eig)
            failed = [c.label for c in certificates if not c.ok(self.settings.cert_residual_tol, self.settings.cert_psd_tol)]
            if failed:
                log.error("Certificate audit failed", solver=name, constraints=failed, residual=worst, min_eigenvalue=min_eig)
                status = SolveStatus.UNCERTIFIED
        if status == SolveStatus.SLOW_PROGRESS:
            log.warning("Solver did not converge cleanly", solver=name, raw_status=sdp.problem.status)
        elif sdp.problem.status in (cp.INFEASIBLE_INACCURATE, cp.UNBOUNDED_INACCURATE):
            log.warning("Inaccurate status", solver=name, raw_status=sdp.problem.status, status=str(status))

        return SdpSolution(
            status=status,
            z=z,
            objective=objective,
            solver=name,
            iterations=iterations,
            certificates=certificates,
        )


def write_sdp(sdp: SdpProblem, path: Path) -> Path:
    """
    SDP を疎なテキスト形式で書き出します。

    形式は SCS の標準形 min cᵀx (+ ½xᵀPx) s.t. Ax + s = b, s ∈ K で、
    錐の次元、c, b の非ゼロ要素、A（と P）の三つ組 (row col value) を並べます。
    """
    data, _, _ = sdp.problem.get_problem_data(cp.SCS)
    dims = data["dims"]
    A = sp.coo_matrix(data["A"])
    lines = [
        "# yk-synth sdp export (SCS standard form)",
        f"variables {A.shape[1]}",
        f"constraints {A.shape[0]}",
        f"cone zero {dims.zero}",
        f"cone nonneg {dims.nonneg}",
        "cone soc " + " ".join(str(n) for n in dims.soc),
        "cone psd " + " ".join(str(n) for n in dims.psd),
        "c",
    ]
    lines += [f"{i} {v:.17g}" for i, v in enumerate(data["c"]) if v != 0.0]
    lines.append("b")
    lines += [f"{i} {v:.17g}" for i, v in enumerate(data["b"]) if v != 0.0]
    lines.append("A")
    lines += [f"{r} {c} {v:.17g}" for r, c, v in zip(A.row, A.col, A.data)]
    if data.get("P") is not None:
        P = sp.coo_matrix(data["P"])
        lines.append("P")
        lines += [f"{r} {c} {v:.17g}" for r, c, v in zip(P.row, P.col, P.data)]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    log.info("SDP exported", path=str(path), rows=A.shape[0], cols=A.shape[1])
    return path
