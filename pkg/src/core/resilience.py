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
SDP ソルバー呼び出しのリトライ（フォールバック）処理を提供するリジリエンス（回復性）モジュール。

設定されたソルバーチェーン（既定は CLARABEL → SCS）を順に試し、
cvxpy の SolverError が発生した場合は次のソルバーに切り替えます。
"""

import logging
from typing import Any, Mapping, Sequence

import cvxpy as cp
import structlog
from tenacity import (
    RetryError,
    Retrying,
    before_sleep_log,
    retry_if_exception_type,
    stop_after_attempt,
    wait_none,
)

from src.core.errors import SolverFailure

log = structlog.get_logger(__name__)


def solve_with_fallback(
    problem: cp.Problem,
    chain: Sequence[str],
    options: Mapping[str, Mapping[str, Any]] | None = None,
) -> str:
    """
    problem をソルバーチェーンの順に解き、成功したソルバー名を返します。

    Raises:
        SolverFailure: すべてのソルバーが SolverError で失敗した場合
    """
    if not chain:
        raise SolverFailure("ソルバーチェーンが空です")
    options = options or {}
    backends = iter(chain)

    def attempt() -> str:
        name = next(backends)
        log.info("Solver attempt", solver=name)
        problem.solve(solver=name, verbose=False, **dict(options.get(name, {})))
        log.info("Solver finished", solver=name, status=problem.status)
        return name

    retrying = Retrying(
        retry=retry_if_exception_type(cp.error.SolverError),
        wait=wait_none(),
        stop=stop_after_attempt(len(chain)),
        before_sleep=before_sleep_log(log, logging.WARNING),  # type: ignore[arg-type]
        reraise=False,
    )
    try:
        return retrying(attempt)
    except RetryError as e:
        last = e.last_attempt.exception()
        raise SolverFailure(
            f"すべてのソルバー ({', '.join(chain)}) が失敗しました: {last}"
        ) from last
