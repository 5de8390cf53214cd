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
yk-synth のエントリーポイント。

サブコマンド synth / simulate / verify / approx / reproduce-example を
pydantic-settings の CliApp で解釈し、各UseCaseに委譲します。
レポートは標準出力へ、ログは標準エラー出力へ書き出します。
"""

import sys
from fractions import Fraction
from pathlib import Path

# uv run src/app.py 等で直接起動した場合でも 'src' モジュールが解決できるように
# sys.path にプロジェクトのルートディレクトリを動的に追加します。
project_root = str(Path(__file__).resolve().parent.parent)
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from typing import Any, List, Literal, Optional, Sequence

import structlog
from pydantic import BaseModel, Field, ValidationError
from pydantic_settings import (
    CliApp,
    CliSubCommand,
    SettingsConfigDict,
    SettingsError,
    get_subcommand,
)

from src.application.usecases.approx_usecase import coverage, obtain_overapprox
from src.application.usecases.reproduce_usecase import ReproduceUseCase
from src.application.usecases.synth_usecase import (
    SynthesisPlan,
    SynthesisResult,
    SynthesisUseCase,
    build_plan,
)
from src.application.usecases.verify_usecase import VerificationUseCase, simulate_plan
from src.core.errors import (
    ConfigError,
    VerificationFailed,
    error_category,
    exit_code_for,
    translate_error,
)
from src.core.logger import setup_logging
from src.core.polynomial import as_fraction
from src.core.report import ReportFormatter
from src.core.transfer import closed_loop
from src.infrastructure.storage import ConfigManager, ReportWriter
from src.models import ApproxConfig, AppSettings, SynthesisConfig

log = structlog.get_logger()


def _load(path: Path, updates: Optional[dict[str, Any]] = None) -> SynthesisConfig:
    config = ConfigManager.load(path)
    return ConfigManager.with_overrides(config, updates or {})


def _out_dir(flag: Optional[Path], settings: AppSettings, config: SynthesisConfig) -> Path:
    return flag or settings.out_dir or config.output.directory


def _q_or_synthesize(plan: SynthesisPlan, q: Optional[List[str]]) -> tuple[Fraction, ...]:
    if q:
        return tuple(as_fraction(x) for x in q)
    if plan.config.q:
        return tuple(plan.config.q)
    log.info("No q given; synthesizing first", name=plan.config.name)
    return SynthesisUseCase().run(plan.config).q


def _emit(writer: ReportWriter, name: str, text: str) -> None:
    print(text)
    writer.write_text(name, text)


def synthesis_report(result: SynthesisResult) -> str:
    plan = result.plan
    cfg = plan.config
    parts = [
        ReportFormatter.modal_table(plan.decomposition, result.q),
        "",
        f"relaxation: {cfg.relaxation.kind}",
        f"bounds: upper={cfg.bounds.upper} lower={cfg.bounds.lower}",
        "",
        ReportFormatter.hierarchy(result.rows),
        "",
        f"solver: {result.solution.solver} status={result.solution.status}",
        f"lmi blocks: {result.sdp.block_sizes}",
        ReportFormatter.certificates(result.solution.certificates),
    ]
    return "\n".join(parts)


class SynthCommand(BaseModel):
    """設定ファイルから制御器を合成します。"""

    config: Path = Field(description="合成設定（TOML）")
    order: Optional[List[int]] = Field(default=None, description="緩和次数（複数可）")
    out: Optional[Path] = None
    relaxation: Optional[Literal["exp-bounds", "multivariate"]] = None
    theta: Optional[str] = None
    eps: Optional[float] = Field(default=None, description="外側近似を ε で構築します")
    interval: Optional[float] = None
    precomputed: bool = Field(default=False, description="既知の外側近似を使います")
    dump_sdp: bool = Field(default=False, description="SDP を sdp.txt に書き出します")

    def overrides(self) -> dict[str, Any]:
        rel: dict[str, Any] = {}
        if self.relaxation:
            rel["kind"] = self.relaxation
        if self.theta:
            rel["theta"] = self.theta
        if self.order:
            rel["orders"] = self.order
        if self.precomputed:
            rel["approx"] = {"source": "precomputed"}
        elif self.eps is not None:
            approx: dict[str, Any] = {"source": "build", "eps": self.eps}
            if self.interval is not None:
                approx["interval"] = self.interval
            rel["approx"] = approx
        out: dict[str, Any] = {"relaxation": rel} if rel else {}
        if self.dump_sdp:
            out["output"] = {"dump_sdp": True}
        return out

    def run(self, settings: AppSettings) -> None:
        config = _load(self.config, self.overrides())
        writer = ReportWriter(_out_dir(self.out, settings, config))
        dump = writer.directory / "sdp.txt" if config.output.dump_sdp else None
        result = SynthesisUseCase().run(config, dump_sdp=dump)

        ctrl_text = ReportFormatter.controller(
            config.name, result.q, result.controller, closed_loop(result.plan.plant, result.controller), "T(s)"
        )
        _emit(writer, "controller.txt", ctrl_text)
        _emit(writer, "report.txt", synthesis_report(result))


class SimulateCommand(BaseModel):
    """q を固定した閉ループ応答を数値積分し、response.csv に書き出します。"""

    config: Path
    q: Optional[List[str]] = Field(default=None, description="Youla パラメータの係数（昇べき）")
    horizon: Optional[float] = None
    dt: Optional[float] = None
    out: Optional[Path] = None

    def run(self, settings: AppSettings) -> None:
        config = _load(self.config)
        plan = build_plan(config)
        q = _q_or_synthesize(plan, self.q)
        run = simulate_plan(plan, q, self.horizon, self.dt)
        writer = ReportWriter(_out_dir(self.out, settings, config))
        writer.write_csv("response.csv", {"t": run.signal.t, "y": run.signal.y, "u": run.control.y})
        _emit(writer, "report.txt", ReportFormatter.metrics(run.metrics))


class VerifyCommand(BaseModel):
    """応答を上下限および閉形式と照合します。失敗時は終了コード 4。"""

    config: Path
    q: Optional[List[str]] = None
    tolerance: float = Field(default=1e-6, gt=0.0)
    horizon: Optional[float] = None
    dt: Optional[float] = None
    out: Optional[Path] = None

    def run(self, settings: AppSettings) -> None:
        config = _load(self.config)
        plan = build_plan(config)
        q = _q_or_synthesize(plan, self.q)
        usecase = VerificationUseCase(bound_tol=self.tolerance)
        report = usecase.run(plan, q, self.horizon, self.dt)
        writer = ReportWriter(_out_dir(self.out, settings, config))
        text = "\n".join([
            ReportFormatter.modal_table(plan.decomposition, report.run.q),
            "",
            ReportFormatter.metrics(report.run.metrics, report.violation, report.oracle_error),
        ])
        _emit(writer, "report.txt", text)
        usecase.check(report)


class ApproxCommand(BaseModel):
    """曲線 (cos θτ, sin θτ, e^{−τ}) の外側近似を構築・表示します。"""

    eps: Optional[float] = None
    interval: Optional[float] = None
    theta: str = "1"
    k_max: int = 40
    fixed_degree: Optional[int] = None
    precomputed: bool = False
    cache: Optional[Path] = None
    samples: int = Field(default=100_000, ge=1)
    out: Optional[Path] = None

    def approx_config(self) -> ApproxConfig:
        try:
            if self.precomputed:
                return ApproxConfig(source="precomputed")
            if self.cache is not None:
                return ApproxConfig(
                    source="cache", cache=self.cache, eps=self.eps,
                    interval=self.interval, k_max=self.k_max, fixed_degree=self.fixed_degree,
                )
            return ApproxConfig(
                source="build", eps=self.eps, interval=self.interval,
                k_max=self.k_max, fixed_degree=self.fixed_degree,
            )
        except ValidationError as e:
            raise ConfigError("approx の引数が不正です", [str(err.get("msg")) for err in e.errors()]) from e

    def run(self, settings: AppSettings) -> None:
        theta = as_fraction(self.theta)
        o = obtain_overapprox(self.approx_config(), theta)
        stats = coverage(o, self.samples)
        text = "\n".join([
            ReportFormatter.overapprox(o),
            "",
            f"coverage: {stats.covered}/{stats.samples} curve samples inside "
            f"({stats.tail_samples} beyond tau_end)",
            f"worst vertical gap: {stats.worst_gap:.6g}",
        ])
        print(text)
        out = self.out or settings.out_dir
        if out is not None:
            ReportWriter(out).write_text("approx.txt", text)


class ReproduceExampleCommand(BaseModel):
    """同梱の数値例を実行し、既知の値との比較表を出力します。"""

    out: Optional[Path] = None

    def run(self, settings: AppSettings) -> None:
        outcome = ReproduceUseCase().run()
        text = ReportFormatter.reproduce(outcome.rows)
        print(text)
        out = self.out or settings.out_dir
        if out is not None:
            ReportWriter(out).write_text("reproduce.txt", text)
        if not outcome.passed:
            mismatches = ", ".join(r.item for r in outcome.rows if not r.ok)
            raise VerificationFailed(f"既知の値と一致しない項目があります: {mismatches}")


class Cli(AppSettings):
    model_config = SettingsConfigDict(
        env_prefix="YKSYN_",
        extra="ignore",
        cli_prog_name="yk-synth",
        cli_kebab_case=True,
        cli_implicit_flags=True,
        cli_exit_on_error=False,
    )

    synth: CliSubCommand[SynthCommand]
    simulate: CliSubCommand[SimulateCommand]
    verify: CliSubCommand[VerifyCommand]
    approx: CliSubCommand[ApproxCommand]
    reproduce_example: CliSubCommand[ReproduceExampleCommand]

    def cli_cmd(self) -> None:
        setup_logging(self.log_level, self.log_json)
        command = get_subcommand(self, is_required=True)
        log.info("Command started", command=type(command).__name__)
        command.run(self)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    CLI を実行し、終了コードを返します。

    0: 成功 / 2: 設定エラー / 3: 実行不能 / 4: 検証失敗 / 1: その他
    """
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        defaults = AppSettings()
        setup_logging(defaults.log_level, defaults.log_json)
        CliApp.run(Cli, cli_args=args)
    except SettingsError as e:
        print(f"【引数のエラー】 (ConfigError)\n{e}", file=sys.stderr)
        print("error_category=ConfigError", file=sys.stderr)
        return 2
    except Exception as e:
        log.error("Command failed", category=error_category(e), error=str(e))
        print(translate_error(e), file=sys.stderr)
        print(f"error_category={error_category(e)}", file=sys.stderr)
        return exit_code_for(e)
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
