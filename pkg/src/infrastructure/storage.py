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
データ永続化モジュール。

合成設定（TOML）の読み込みと検証、レポート・CSV の書き出し、
外側近似の JSON キャッシュの読み書きを処理します。
"""

import re
import tomllib
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import structlog
from pydantic import ValidationError

from src.core.errors import ConfigError
from src.core.polynomial import MultiPoly
from src.core.semialg import Overapprox, Region
from src.models import (
    OverapproxDocument,
    PolyDocument,
    RegionDocument,
    SynthesisConfig,
)

log = structlog.get_logger()

_HEADER_RE = re.compile(r"^\s*(\[\[?)\s*([^\]]+?)\s*\]\]?\s*(#.*)?$")
_KEY_RE = re.compile(r"^\s*([A-Za-z0-9_\-\"']+)\s*=")


def locate_key(text: str, loc: Sequence[str | int]) -> int | None:
    """
    pydantic のエラー位置 (例: ("objective", 0, "kind")) に対応する TOML の行番号（1 始まり）。

    見つからない場合は最も近いテーブル見出しの行を返します。
    """
    table_path: list[str | int] = []
    array_counts: dict[str, int] = {}
    best: int | None = None
    target = [p for p in loc]
    for lineno, line in enumerate(text.splitlines(), start=1):
        header = _HEADER_RE.match(line)
        if header:
            name = header.group(2).strip()
            if header.group(1) == "[[":
                idx = array_counts.get(name, -1) + 1
                array_counts[name] = idx
                table_path = [*name.split("."), idx]
            else:
                table_path = list(name.split("."))
            if table_path == target[: len(table_path)]:
                best = lineno
            continue
        key = _KEY_RE.match(line)
        if key:
            path = [*table_path, key.group(1).strip("\"'")]
            if path == target[: len(path)]:
                return lineno
    return best


class ConfigManager:
    @staticmethod
    def load(path: Path) -> SynthesisConfig:
        """
        TOML の合成設定を読み込み、検証します。

        Raises:
            ConfigError: 構文エラー、未知のキー、値の不正（行番号付きの診断を含む）
        """
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"設定ファイルが見つかりません: {path}")
        text = path.read_text(encoding="utf-8")
        try:
            raw = tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            log.error("設定ファイルの構文エラー", path=str(path), error=str(e))
            raise ConfigError(f"{path}: TOML の構文エラー: {e}") from e

        try:
            config = SynthesisConfig.model_validate(raw)
        except ValidationError as e:
            diagnostics = []
            for err in e.errors():
                loc = err.get("loc", ())
                line = locate_key(text, loc)
                where = ".".join(str(p) for p in loc) or "<root>"
                prefix = f"{path}:{line}" if line is not None else f"{path}"
                diagnostics.append(f"{prefix}: {where}: {err.get('msg')}")
            log.error("設定ファイルの検証に失敗しました", path=str(path), errors=len(diagnostics))
            raise ConfigError(f"{path}: 設定値の検証に失敗しました", diagnostics) from e

        log.info("Config loaded", path=str(path), name=config.name, relaxation=config.relaxation.kind)
        return config

    @staticmethod
    def with_overrides(config: SynthesisConfig, updates: dict[str, Any]) -> SynthesisConfig:
        """
        コマンドライン引数などによる上書きを適用し、再検証します。

        updates は入れ子の dict で、既存の値に再帰的にマージされます。
        """
        if not updates:
            return config
        data = _merge(config.model_dump(), updates)
        try:
            return SynthesisConfig.model_validate(data)
        except ValidationError as e:
            diagnostics = [
                f"<override>: {'.'.join(str(p) for p in err.get('loc', ()))}: {err.get('msg')}"
                for err in e.errors()
            ]
            raise ConfigError("コマンドライン引数による上書きが不正です", diagnostics) from e


def _merge(base: dict[str, Any], updates: dict[str, Any]) -> dict[str, Any]:
    out = dict(base)
    for key, value in updates.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


class ReportWriter:
    """出力ディレクトリへのレポート書き出し。"""

    def __init__(self, directory: Path):
        self.directory = Path(directory)

    def _target(self, name: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        return self.directory / name

    def write_text(self, name: str, text: str) -> Path:
        target = self._target(name)
        target.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        log.info("Report written", path=str(target))
        return target

    def write_csv(self, name: str, columns: dict[str, np.ndarray]) -> Path:
        target = self._target(name)
        data = np.column_stack([np.asarray(v, dtype=float) for v in columns.values()])
        np.savetxt(target, data, delimiter=",", header=",".join(columns), comments="", fmt="%.17g")
        log.info("CSV written", path=str(target), rows=data.shape[0])
        return target


# --- 外側近似のキャッシュ ---

def _poly_doc(p: MultiPoly) -> PolyDocument:
    return PolyDocument(text=p.to_text(), terms=[(m[0], m[1], m[2], c) for m, c in p.terms])


def _poly_from_doc(doc: PolyDocument) -> MultiPoly:
    return MultiPoly(tuple(((i, j, k), c) for i, j, k, c in doc.terms))


def overapprox_to_document(o: Overapprox) -> OverapproxDocument:
    return OverapproxDocument(
        eps=o.eps,
        theta=f"{o.theta.numerator}/{o.theta.denominator}",
        t_bar=o.t_bar,
        band=o.band,
        tau_grid=list(o.tau_grid),
        psis=[_poly_doc(p) for p in o.psis],
        degrees=list(o.degrees),
        errors=list(o.errors),
        regions=[
            RegionDocument(
                label=r.label,
                eqs=[_poly_doc(p) for p in r.eqs],
                ineqs=[_poly_doc(p) for p in r.ineqs],
            )
            for r in o.regions
        ],
    )


def save_overapprox(o: Overapprox, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(overapprox_to_document(o).model_dump_json(indent=2), encoding="utf-8")
    log.info("Overapproximation cached", path=str(path), regions=len(o.regions))
    return path


def load_overapprox(path: Path) -> Overapprox:
    path = Path(path)
    try:
        doc = OverapproxDocument.model_validate_json(path.read_text(encoding="utf-8"))
    except (OSError, ValidationError) as e:
        raise ConfigError(f"外側近似のキャッシュを読み込めません: {path}: {e}") from e
    return Overapprox(
        regions=tuple(
            Region(
                eqs=tuple(_poly_from_doc(p) for p in r.eqs),
                ineqs=tuple(_poly_from_doc(p) for p in r.ineqs),
                label=r.label,
            )
            for r in doc.regions
        ),
        eps=doc.eps,
        theta=Fraction(doc.theta),
        t_bar=doc.t_bar,
        tau_grid=tuple(doc.tau_grid),
        psis=tuple(_poly_from_doc(p) for p in doc.psis),
        degrees=tuple(doc.degrees),
        errors=tuple(doc.errors),
        band=doc.band,
    )
