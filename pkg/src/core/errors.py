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
合成パイプライン全体で使用する例外階層と、ユーザー向けメッセージへの変換。

各例外は機械可読な ``category`` を持ち、CLI はこれを終了コードと
エラー出力 (``error_category=...``) に利用します。
"""

from typing import ClassVar

from pydantic import ValidationError


class SynthesisError(Exception):
    """本パッケージが送出するすべての例外の基底クラス。"""

    category: ClassVar[str] = "SynthesisError"
    title: ClassVar[str] = "合成エラー"
    hint: ClassVar[str] = "入力データと設定内容を確認してください。"


# --- poly-core ---

class DegenerateDivisor(SynthesisError):
    category = "DegenerateDivisor"
    title = "ゼロ多項式による除算"
    hint = "除数（または伝達関数の分母）にゼロ多項式が指定されていないか確認してください。"


class DegenerateInput(SynthesisError):
    category = "DegenerateInput"
    title = "退化した入力"
    hint = "少なくとも一方の多項式は非ゼロである必要があります。"


class NumericalFailure(SynthesisError):
    category = "NumericalFailure"
    title = "数値計算の失敗"
    hint = "係数のスケールを見直すか、条件の良い問題に書き換えてください。"


# --- transfer / diophantine ---

class AlgebraicLoop(SynthesisError):
    category = "AlgebraicLoop"
    title = "代数ループ"
    hint = "閉ループの特性多項式 a·c + b·d がゼロになっています。制御器を見直してください。"


class InvalidPoleSpec(SynthesisError):
    category = "InvalidPoleSpec"
    title = "極指定の不備"
    hint = "閉ループ極は厳密に安定 (p > 0, α > 0, β > 0) な有理数で指定してください。"


class DistinctnessViolation(SynthesisError):
    category = "DistinctnessViolation"
    title = "重複した極"
    hint = "すべての極は互いに異なる必要があります（重根は扱えません）。"


class ImproperPlant(SynthesisError):
    category = "ImproperPlant"
    title = "プラントが厳密にプロパーではありません"
    hint = "deg b(s) < deg a(s) を満たすプラントを指定してください。"


class NotCoprime(SynthesisError):
    category = "NotCoprime"
    title = "分子・分母が互いに素ではありません"
    hint = "プラントの共通因子（極零相殺）を取り除いてから再実行してください。"


class DegreeDeficit(SynthesisError):
    category = "DegreeDeficit"
    title = "閉ループ極の個数不足"
    hint = "Youla-Kučera パラメータの自由度を得るには deg z(s) ≥ 2·deg a(s) が必要です。"


class QDegreeViolation(SynthesisError):
    category = "QDegreeViolation"
    title = "q(s) の次数超過"
    hint = "プロパーな制御器を得るため deg q(s) ≤ d_q としてください。"


class DegenerateController(SynthesisError):
    category = "DegenerateController"
    title = "制御器の分母がゼロ"
    hint = "c₀(s) + b(s)q(s) がゼロ多項式にならない q(s) を選んでください。"


# --- response ---

class PoleCollision(SynthesisError):
    category = "PoleCollision"
    title = "参照信号と閉ループの極が衝突"
    hint = "参照信号の極は閉ループ極と異なる位置にある必要があります。"


class ImproperSignal(SynthesisError):
    category = "ImproperSignal"
    title = "信号のラプラス変換がプロパーではありません"
    hint = "参照信号は厳密にプロパーな伝達関数で指定してください。"


class ScalingFailure(SynthesisError):
    category = "ScalingFailure"
    title = "指数の整数化に失敗"
    hint = "θ は すべての β_i·m/θ が整数になるように選んでください。"


class UnknownMode(SynthesisError):
    category = "UnknownMode"
    title = "存在しないモード"
    hint = "モード番号はモーダル分解の一覧（0 始まり）から指定してください。"


# --- relaxations / semialgebraic approximation ---

class InvalidParameter(SynthesisError):
    category = "InvalidParameter"
    title = "パラメータ範囲外"
    hint = "0 < ε < 1 および 0 < T < 2π/θ を満たす値を指定してください。"


class ApproximationBudgetExceeded(SynthesisError):
    category = "ApproximationBudgetExceeded"
    title = "フーリエ近似の次数上限超過"
    hint = "区間長 T を短くするか、K_max を大きくしてください。"


class OrderDeficit(SynthesisError):
    category = "OrderDeficit"
    title = "緩和次数の不足"
    hint = "制約多項式と領域の次数に見合う緩和次数を指定してください。"


class InvalidObjective(SynthesisError):
    category = "InvalidObjective"
    title = "目的関数が凸ではありません"
    hint = "二次形式の行列は半正定値である必要があります（重みは非負にしてください）。"


class InfeasibleProblem(SynthesisError):
    category = "InfeasibleProblem"
    title = "実行不可能な問題"
    hint = "時間領域制約を緩めるか、閉ループ極の配置を見直してください。"

    def __init__(self, message: str, status: str = "Infeasible"):
        super().__init__(message)
        self.status = status


class InfeasibleBoundSpec(InfeasibleProblem):
    category = "InfeasibleBoundSpec"
    title = "上下限の指定が矛盾しています"
    hint = "g_u(λ) ≥ g_l(λ) を満たし、かつ到達可能な範囲の上下限を指定してください。"


class SolverFailure(SynthesisError):
    category = "SolverFailure"
    title = "SDP ソルバーの失敗"
    hint = "ソルバーチェーン（CLARABEL, SCS）と許容誤差の設定を確認してください。"


# --- sim ---

class UnstableLoop(SynthesisError):
    category = "UnstableLoop"
    title = "不安定な閉ループ"
    hint = "閉ループ極がすべて左半平面にあることを確認してください。"


class StepTooCoarse(SynthesisError):
    category = "StepTooCoarse"
    title = "刻み幅が粗すぎます"
    hint = "dt を最速時定数の 1/10 以下にしてください（省略時は自動設定されます）。"


class VerificationFailed(SynthesisError):
    category = "VerificationFailed"
    title = "検証に失敗"
    hint = "設計結果が指定した上下限または期待値を満たしていません。"


# --- configuration ---

class ConfigError(SynthesisError):
    category = "ConfigError"
    title = "設定ファイルのエラー"
    hint = "指摘された行のキーと値を修正してください。"

    def __init__(self, message: str, diagnostics: list[str] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


def _unwrap(e: BaseException) -> BaseException:
    # Tenacity の RetryError の場合は最後の試行で発生した元の例外を取り出す
    last_attempt = getattr(e, "last_attempt", None)
    if last_attempt is not None:
        try:
            exc = last_attempt.exception()
            if exc:
                return exc
        except Exception:
            pass
    return e


def error_category(e: BaseException) -> str:
    e = _unwrap(e)
    if isinstance(e, SynthesisError):
        return e.category
    if isinstance(e, ValidationError):
        return ConfigError.category
    return type(e).__name__


def exit_code_for(e: BaseException) -> int:
    """例外を CLI の終了コードに対応付けます。"""
    e = _unwrap(e)
    if isinstance(e, (ConfigError, ValidationError)):
        return 2
    if isinstance(e, InfeasibleProblem):
        return 3
    if isinstance(e, VerificationFailed):
        return 4
    return 1


def translate_error(e: BaseException) -> str:
    """
    合成パイプラインの例外を、原因と対処法を含む分かりやすいメッセージに変換します。
    """
    e = _unwrap(e)
    err_str = str(e)

    if isinstance(e, ConfigError):
        lines = "\n".join(e.diagnostics)
        detail = f"\n{lines}" if lines else ""
        return (
            f"【{e.title}】 ({e.category})\n"
            f"{err_str}{detail}\n"
            f"{e.hint}"
        )

    if isinstance(e, ValidationError):
        return (
            "【設定ファイルのエラー】 (ConfigError)\n"
            "設定値の検証に失敗しました。\n"
            f"詳細: {err_str}"
        )

    if isinstance(e, InfeasibleProblem):
        return (
            f"【{e.title}】 ({e.category})\n"
            f"ソルバーの状態: {e.status}\n"
            f"詳細: {err_str}\n"
            f"{e.hint}"
        )

    if isinstance(e, SynthesisError):
        return (
            f"【{e.title}】 ({e.category})\n"
            f"詳細: {err_str}\n"
            f"{e.hint}"
        )

    if isinstance(e, FileNotFoundError):
        return (
            "【ファイルが見つかりません】 (FileNotFoundError)\n"
            f"指定されたファイルが存在しません: {err_str}"
        )

    if isinstance(e, PermissionError):
        return (
            "【書き込み権限エラー】 (PermissionError)\n"
            "出力ディレクトリに書き込めません。出力先 (--out) を変更してください。\n"
            f"詳細: {err_str}"
        )

    return f"【システムエラー】 予期せぬエラーが発生しました:\n{err_str}"
