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

import pytest
from tenacity import RetryError

from src.core.errors import (
    ConfigError,
    InfeasibleBoundSpec,
    InfeasibleProblem,
    NotCoprime,
    SolverFailure,
    VerificationFailed,
    error_category,
    exit_code_for,
    translate_error,
)


@pytest.mark.parametrize(
    "error, code",
    [
        (ConfigError("bad"), 2),
        (InfeasibleProblem("no"), 3),
        (InfeasibleBoundSpec("crossing", status="BoundSpec"), 3),
        (VerificationFailed("peak"), 4),
        (NotCoprime("common factor"), 1),
        (RuntimeError("boom"), 1),
    ],
)
def test_exit_codes(error, code):
    """[構造] 設定エラー 2 / 実行不能 3 / 検証失敗 4 / その他 1"""
    assert exit_code_for(error) == code


def test_categories():
    assert error_category(NotCoprime("x")) == "NotCoprime"
    assert error_category(InfeasibleBoundSpec("x")) == "InfeasibleBoundSpec"
    assert error_category(KeyError("x")) == "KeyError"


def test_config_error_lists_diagnostics():
    """[正確性] 設定エラーのメッセージには行番号付きの指摘がすべて含まれる"""
    err = ConfigError("設定ファイルを読み込めません", ["a.toml:3: poles.complex: 不正な値", "a.toml:7: bounds.upper: 不正な値"])
    msg = translate_error(err)
    assert "設定ファイルのエラー" in msg
    assert "a.toml:3" in msg and "a.toml:7" in msg


def test_infeasible_message_contains_status():
    msg = translate_error(InfeasibleProblem("SDP が実行不能", status="Infeasible"))
    assert "ソルバーの状態: Infeasible" in msg
    assert "(InfeasibleProblem)" in msg


def test_retry_error_is_unwrapped():
    """[正確性] tenacity の RetryError は最後の試行の例外として扱う"""
    last_attempt = MagicMock()
    last_attempt.exception.return_value = SolverFailure("all solvers failed")
    err = RetryError(last_attempt)
    assert error_category(err) == "SolverFailure"
    assert "SDP ソルバーの失敗" in translate_error(err)


def test_unknown_errors_fall_back_to_system_message():
    assert "予期せぬエラー" in translate_error(RuntimeError("boom"))
    assert "ファイルが見つかりません" in translate_error(FileNotFoundError("x.toml"))
