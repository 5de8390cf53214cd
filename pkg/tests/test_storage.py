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

import numpy as np
import pytest

from src.core.errors import ConfigError
from src.core.semialg import curve_point, membership, precomputed
from src.infrastructure.storage import (
    ConfigManager,
    ReportWriter,
    load_overapprox,
    locate_key,
    save_overapprox,
)

VALID = """\
name = "tiny"

[plant]
num = [1]
den = "s + 1"

[poles]
complex = [["1", "2"], ["2", "4"]]

[[objective]]
kind = "steady_state"
weight = 10
"""


def _write(tmp_path, text, name="config.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_shipped_example(config_dir):
    config = ConfigManager.load(config_dir / "exp-bounds.toml")
    assert config.relaxation.kind == "exp-bounds"
    assert config.bounds.upper == [1.01, 1.58, 0.38]
    assert [t.kind for t in config.objective] == ["steady_state", "mode_energy"]


def test_load_valid(tmp_path):
    config = ConfigManager.load(_write(tmp_path, VALID))
    assert config.name == "tiny"
    assert config.objective[0].weight == 10


def test_diagnostic_points_at_offending_line(tmp_path):
    """[正確性] 検証エラーは「パス:行番号: キー: 理由」で報告される"""
    text = VALID + '\n[[objective]]\nkind = "bogus"\n'
    path = _write(tmp_path, text)
    with pytest.raises(ConfigError) as exc:
        ConfigManager.load(path)
    diagnostics = exc.value.diagnostics
    assert len(diagnostics) == 1
    assert diagnostics[0].startswith(f"{path}:15: objective.1.kind:")


def test_unknown_key_is_reported(tmp_path):
    text = VALID.replace('den = "s + 1"', 'den = "s + 1"\ncolour = "blue"')
    with pytest.raises(ConfigError) as exc:
        ConfigManager.load(_write(tmp_path, text))
    assert ":6: plant.colour:" in exc.value.diagnostics[0]


def test_syntax_error_and_missing_file(tmp_path):
    """[異常系] TOML の構文エラーや存在しないファイルも ConfigError"""
    with pytest.raises(ConfigError):
        ConfigManager.load(_write(tmp_path, "[plant\nnum = 1"))
    with pytest.raises(ConfigError):
        ConfigManager.load(tmp_path / "missing.toml")


def test_locate_key_falls_back_to_table_header():
    text = "[plant]\nnum = [1]\n\n[poles]\nreal = [1]\n"
    assert locate_key(text, ("poles", "complex")) == 4
    assert locate_key(text, ("plant", "num")) == 2
    assert locate_key(text, ("solver",)) is None


def test_overrides_are_merged_and_validated(tmp_path):
    """[構造] 上書きは入れ子で既存の値にマージされ、再検証される"""
    config = ConfigManager.load(_write(tmp_path, VALID))
    updated = ConfigManager.with_overrides(config, {"relaxation": {"kind": "multivariate", "orders": [3, 4]}})
    assert updated.relaxation.kind == "multivariate"
    assert updated.relaxation.orders == [3, 4]
    assert updated.poles == config.poles
    assert ConfigManager.with_overrides(config, {}) is config

    with pytest.raises(ConfigError) as exc:
        ConfigManager.with_overrides(config, {"relaxation": {"orders": [4, 3]}})
    assert exc.value.diagnostics[0].startswith("<override>: relaxation.orders")


def test_csv_writer(tmp_path):
    writer = ReportWriter(tmp_path / "out")
    t = np.linspace(0.0, 1.0, 5)
    path = writer.write_csv("response.csv", {"t": t, "y": t**2})
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,y"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 1], t**2)


def test_overapprox_cache(tmp_path):
    """[正確性] キャッシュから読み戻した外側近似は同じ点を含む"""
    original = precomputed()
    path = save_overapprox(original, tmp_path / "cache" / "approx.json")
    restored = load_overapprox(path)
    assert restored.theta == original.theta
    assert restored.tau_grid == original.tau_grid
    assert [r.label for r in restored.regions] == [r.label for r in original.regions]
    for tau in (0.0, 1.0, 3.0, 6.0):
        point = curve_point(1.0, tau)
        assert membership(restored, point) == membership(original, point)


def test_broken_cache(tmp_path):
    with pytest.raises(ConfigError):
        load_overapprox(_write(tmp_path, "{not json", "approx.json"))
