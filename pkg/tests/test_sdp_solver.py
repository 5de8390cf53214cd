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

from unittest.mock import MagicMock

import cvxpy as cp
import numpy as np
import pytest

from src.core.errors import SolverFailure
from src.core.polynomial import LAM, AffinePoly, MultiPoly
from src.core.resilience import solve_with_fallback
from src.core.sos import Certificate, DecisionLayout, PolyOptProblem, QuadObjective, UnivariateConstraint, assemble
from src.infrastructure.sdp_solver import SdpSolver, SolveStatus, write_sdp
from src.models import SolverSettings


def _small_sdp():
    """min γ s.t. γ − λ² ≥ 0 on [0, 1]"""
    g = AffinePoly.linear(MultiPoly.constant(1.0), 0, 1) - AffinePoly.constant(MultiPoly.var(LAM) ** 2, 1)
    problem = PolyOptProblem(DecisionLayout(("gamma",)), QuadObjective.linear(1, 0), (UnivariateConstraint(g, "cap"),))
    return assemble(problem)


def test_fallback_to_next_solver():
    """[異常系] 最初のソルバーが SolverError なら次のソルバーで解く"""
    problem = MagicMock()
    problem.solve.side_effect = [cp.error.SolverError("CLARABEL crashed"), None]
    problem.status = cp.OPTIMAL

    name = solve_with_fallback(problem, ["CLARABEL", "SCS"], {"SCS": {"eps_abs": 1e-6}})
    assert name == "SCS"
    assert problem.solve.call_count == 2
    assert problem.solve.call_args.kwargs["eps_abs"] == 1e-6


def test_all_solvers_failing():
    """[異常系] すべてのソルバーが失敗すると SolverFailure"""
    problem = MagicMock()
    problem.solve.side_effect = cp.error.SolverError("boom")
    with pytest.raises(SolverFailure):
        solve_with_fallback(problem, ["CLARABEL", "SCS"])
    assert problem.solve.call_count == 2


def test_empty_chain():
    with pytest.raises(SolverFailure):
        solve_with_fallback(MagicMock(), [])


@pytest.mark.parametrize(
    "raw, expected",
    [
        (cp.OPTIMAL_INACCURATE, SolveStatus.SLOW_PROGRESS),
        (cp.INFEASIBLE_INACCURATE, SolveStatus.INFEASIBLE),
        (cp.UNBOUNDED_INACCURATE, SolveStatus.UNBOUNDED),
        ("user_limit", SolveStatus.SLOW_PROGRESS),
    ],
)
def test_inaccurate_statuses_are_normalized(mocker, raw, expected):
    """[構造] 不正確な収束はそれぞれ SlowProgress / Infeasible / Unbounded に対応する"""
    sdp = _small_sdp()

    def fake_solve(**kwargs):
        sdp.z.value = np.array([1.0])
        return None

    mocker.patch.object(sdp.problem, "solve", side_effect=fake_solve)
    mocker.patch.object(type(sdp.problem), "status", new_callable=mocker.PropertyMock, return_value=raw)
    sol = SdpSolver(SolverSettings(chain=["SCS"])).solve(sdp)
    assert sol.status == expected
    assert sol.solver == "SCS"
    assert sol.certificates == ()
    assert not sol.ok


def test_solve_reports_certificates():
    """[正確性] 最適解では各制約の証明書が検査される"""
    sol = SdpSolver().solve(_small_sdp())
    assert sol.ok
    assert sol.objective == pytest.approx(1.0, abs=1e-5)
    assert len(sol.certificates) == 1
    assert sol.certificates[0].ok(residual_tol=1e-5)


def test_solver_options_follow_settings():
    settings = SolverSettings(tol_feas=1e-7, tol_gap=1e-6, max_iter=50)
    options = SdpSolver(settings).options()
    assert options["CLARABEL"]["max_iter"] == 50
    assert options["SCS"]["eps_abs"] == 1e-7


def test_write_sdp(tmp_path):
    """[構造] 書き出した SDP には錐の次元と A の三つ組が含まれる"""
    path = write_sdp(_small_sdp(), tmp_path / "nested" / "sdp.txt")
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    assert lines[0].startswith("# yk-synth sdp export")
    assert any(line.startswith("cone psd ") and line != "cone psd " for line in lines)
    assert "A" in lines
    a_start = lines.index("A")
    assert len(lines[a_start + 1].split()) == 3


def test_failed_audit_downgrades_status(mocker):
    """[異常系] 証明書の残差が許容値を超えた最適解は Uncertified"""
    bad = Certificate("cap", residual=1e-2, min_eigenvalue=0.0, grams=())
    mocker.patch("src.infrastructure.sdp_solver.audit_certificate", return_value=bad)
    sol = SdpSolver().solve(_small_sdp())
    assert sol.status == SolveStatus.UNCERTIFIED
    assert not sol.ok
    assert sol.z is not None


def test_audit_tolerance_follows_settings(mocker):
    loose = Certificate("cap", residual=1e-4, min_eigenvalue=-1e-9, grams=())
    mocker.patch("src.infrastructure.sdp_solver.audit_certificate", return_value=loose)
    assert SdpSolver().solve(_small_sdp()).status == SolveStatus.UNCERTIFIED
    relaxed = SolverSettings(cert_residual_tol=1e-3)
    assert SdpSolver(relaxed).solve(_small_sdp()).status == SolveStatus.OPTIMAL


def test_certificate_tolerance_scales_with_coefficients():
    c = Certificate("big", residual=5e-5, min_eigenvalue=-1e-6, grams=(), scale=100.0)
    assert c.ok()
    assert not Certificate("small", residual=5e-5, min_eigenvalue=0.0, grams=()).ok()
