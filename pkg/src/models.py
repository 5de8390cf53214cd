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
データモデルとスキーマの定義。

このモジュールはアプリケーション全体で使用されるPydantic V2モデルを集約します。
合成設定（SynthesisConfig）、プロセス全体の既定値（AppSettings）、
およびレポート・キャッシュ用の文書モデル（HierarchyRow, OverapproxDocument 等）を含みます。
"""

from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, List, Literal, Optional, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    field_validator,
    model_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.core.polynomial import RatPoly, as_fraction
from src.core.transfer import PoleSpec, Reference


def _to_fraction(v: Any) -> Fraction:
    try:
        return as_fraction(v)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ValueError(f"有理数として解釈できません: {v!r}") from e


def _to_poly(v: Any) -> RatPoly:
    if isinstance(v, RatPoly):
        return v
    if isinstance(v, str):
        try:
            return RatPoly.parse(v)
        except ValueError as e:
            raise ValueError(str(e)) from e
    if isinstance(v, (list, tuple)):
        return RatPoly(tuple(_to_fraction(c) for c in v))
    if isinstance(v, (int, float)):
        return RatPoly((_to_fraction(v),))
    raise ValueError(f"多項式として解釈できません: {v!r}")


def _fraction_text(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


Rational = Annotated[Fraction, PlainValidator(_to_fraction), PlainSerializer(_fraction_text)]
Polynomial = Annotated[RatPoly, PlainValidator(_to_poly), PlainSerializer(lambda p: p.to_text())]


# --- Constants / App Config Defaults ---
class AppConfigDefaults:
    SOLVER_CHAIN: List[str] = ["CLARABEL", "SCS"]
    OUTPUT_DIR: str = "out"
    DEFAULT_ORDER: int = 4


# --- Synthesis Configuration Models ---

class PlantConfig(BaseModel):
    """プラント P(s) = num(s) / den(s)。係数リスト（昇べき）またはテキストで指定。"""
    model_config = ConfigDict(extra='forbid', arbitrary_types_allowed=True)

    num: Polynomial
    den: Polynomial


class PoleConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', arbitrary_types_allowed=True)

    real: List[Rational] = Field(default_factory=list, description="実極 s = −p の p。")
    complex: List[Tuple[Rational, Rational]] = Field(
        default_factory=list, description="共役複素極 s = −α ± jβ の (α, β)。"
    )

    def to_spec(self) -> PoleSpec:
        return PoleSpec.of(self.real, self.complex)


class ReferenceConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', arbitrary_types_allowed=True)

    kind: Literal["step", "sinusoid", "custom"] = "step"
    amplitude: Rational = Fraction(1)
    omega: Optional[Rational] = None
    num: Optional[Polynomial] = None
    den: Optional[Polynomial] = None
    real: List[Rational] = Field(default_factory=list)
    complex: List[Tuple[Rational, Rational]] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_kind(self) -> "ReferenceConfig":
        if self.kind == "sinusoid" and self.omega is None:
            raise ValueError("sinusoid には omega が必要です")
        if self.kind == "custom" and (self.num is None or self.den is None):
            raise ValueError("custom には num と den が必要です")
        return self

    def build(self) -> Reference:
        if self.kind == "step":
            return Reference.step(self.amplitude)
        if self.kind == "sinusoid":
            assert self.omega is not None
            return Reference.sinusoid(self.omega, self.amplitude)
        assert self.num is not None and self.den is not None
        return Reference(self.num, self.den, PoleSpec.of(self.real, self.complex, strict=False))


class BoundsConfig(BaseModel):
    """時間変化する上下限 g(λ)（λ の係数を昇べきで）。定数 1 つでも可。"""
    model_config = ConfigDict(extra='forbid')

    upper: Optional[List[float]] = None
    lower: Optional[List[float]] = None

    @field_validator("upper", "lower", mode="before")
    @classmethod
    def allow_constant(cls, v: Any) -> Any:
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return [float(v)]
        return v


class ObjectiveTerm(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal["steady_state", "mode_energy", "overshoot"]
    weight: float = Field(default=1.0, ge=0.0)
    target: float = 1.0
    mode: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def check_mode(self) -> "ObjectiveTerm":
        if self.kind == "mode_energy" and self.mode is None:
            raise ValueError("mode_energy には mode（0 始まりのモード番号）が必要です")
        return self


class ApproxConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    source: Literal["precomputed", "build", "cache"] = "precomputed"
    eps: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    interval: Optional[float] = Field(default=None, gt=0.0, description="区間長 T の上限。")
    k_max: int = Field(default=40, ge=0)
    fixed_degree: Optional[int] = Field(default=None, ge=1)
    cache: Optional[Path] = None

    @model_validator(mode="after")
    def check_source(self) -> "ApproxConfig":
        if self.source == "build" and self.eps is None:
            raise ValueError("build には eps が必要です")
        if self.source == "build" and self.interval is None and self.fixed_degree is None:
            raise ValueError("build には interval か fixed_degree が必要です")
        if self.source == "cache" and self.cache is None:
            raise ValueError("cache には cache（JSON のパス）が必要です")
        return self


class RelaxationConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', arbitrary_types_allowed=True)

    kind: Literal["exp-bounds", "multivariate"] = "exp-bounds"
    theta: Optional[Rational] = None
    orders: List[Annotated[int, Field(ge=1)]] = Field(
        default_factory=lambda: [AppConfigDefaults.DEFAULT_ORDER]
    )
    enumerate_signs: bool = False
    approx: ApproxConfig = Field(default_factory=ApproxConfig)

    @field_validator("orders")
    @classmethod
    def increasing(cls, v: List[int]) -> List[int]:
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("orders は狭義単調増加で指定してください")
        return v


class SolverSettings(BaseModel):
    model_config = ConfigDict(extra='forbid')

    chain: List[Literal["CLARABEL", "SCS"]] = Field(
        default_factory=lambda: list(AppConfigDefaults.SOLVER_CHAIN)
    )
    tol_feas: float = Field(default=1e-8, gt=0.0)
    tol_gap: float = Field(default=1e-8, gt=0.0)
    max_iter: int = Field(default=200, ge=1)
    scs_max_iters: int = Field(default=100_000, ge=1)
    cert_residual_tol: float = Field(default=1e-6, gt=0.0, description="SOS 証明書の係数残差の許容値（g(z) の係数の大きさに比例）。")
    cert_psd_tol: float = Field(default=1e-7, ge=0.0, description="グラム行列の最小固有値の許容値。")
    objective_form: Literal["quadratic", "schur"] = "quadratic"


class SimulationConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    horizon: Optional[float] = Field(default=None, gt=0.0)
    dt: Optional[float] = Field(default=None, gt=0.0)


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    directory: Path = Path(AppConfigDefaults.OUTPUT_DIR)
    dump_sdp: bool = False


class SynthesisConfig(BaseModel):
    """
    合成の実行設定（TOML 文書 1 つに対応）。
    """
    model_config = ConfigDict(extra='forbid', arbitrary_types_allowed=True)

    name: str = "synthesis"
    signal: Literal["output", "control", "error"] = "output"
    plant: PlantConfig
    poles: PoleConfig
    reference: ReferenceConfig = Field(default_factory=ReferenceConfig)
    relaxation: RelaxationConfig = Field(default_factory=RelaxationConfig)
    bounds: BoundsConfig = Field(default_factory=BoundsConfig)
    objective: List[ObjectiveTerm] = Field(default_factory=list)
    steady_state: Optional[float] = Field(
        default=None, description="指定すると定常値 y₀(q) をこの値に固定する等式制約を課します。"
    )
    q: Optional[List[Rational]] = Field(
        default=None, description="simulate / verify で用いる固定の Youla パラメータ（昇べき）。"
    )
    solver: SolverSettings = Field(default_factory=SolverSettings)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def check_relaxation(self) -> "SynthesisConfig":
        if self.relaxation.kind == "exp-bounds" and any(t.kind == "overshoot" for t in self.objective):
            raise ValueError("overshoot 目的は multivariate 緩和でのみ使用できます")
        return self


# --- Process-level settings ---

class AppSettings(BaseSettings):
    """環境変数（接頭辞 YKSYN_）で上書きできるプロセス全体の既定値。"""
    model_config = SettingsConfigDict(env_prefix="YKSYN_", extra="ignore")

    log_level: Literal["debug", "info", "warning", "error"] = "info"
    log_json: bool = False
    out_dir: Optional[Path] = None


# --- Report / cache documents ---

class HierarchyRow(BaseModel):
    model_config = ConfigDict(extra='forbid')

    order: int
    largest_block: int = 0
    status: str
    objective: Optional[float] = None
    gamma: Optional[float] = None
    q: List[float] = Field(default_factory=list)


class PolyDocument(BaseModel):
    model_config = ConfigDict(extra='forbid')

    text: str
    terms: List[Tuple[int, int, int, float]]


class RegionDocument(BaseModel):
    model_config = ConfigDict(extra='forbid')

    label: str
    eqs: List[PolyDocument]
    ineqs: List[PolyDocument]


class OverapproxDocument(BaseModel):
    """外側近似の JSON キャッシュ。"""
    model_config = ConfigDict(extra='forbid')

    eps: float
    theta: str
    t_bar: float
    band: float
    tau_grid: List[float]
    psis: List[PolyDocument]
    degrees: List[int]
    errors: List[float]
    regions: List[RegionDocument]
