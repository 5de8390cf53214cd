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

import os
from pathlib import Path


def get_resource_path(relative_path: str) -> Path:
    """
    同梱リソースの絶対パスを取得します。

    環境変数 YKSYN_RESOURCE_DIR が設定されていればそれを基準にし、
    無ければプロジェクトルートを基準にします。

    Args:
        relative_path: 基準ディレクトリからの相対パス (例: "configs/exp-bounds.toml")

    Returns:
        Path: 解決された絶対パス
    """
    override = os.environ.get("YKSYN_RESOURCE_DIR")
    if override:
        base_path = Path(override)
    else:
        # src/core/utils.py から見てプロジェクトルートは親の親の親ディレクトリ
        base_path = Path(__file__).resolve().parent.parent.parent

    return (base_path / relative_path).resolve()
