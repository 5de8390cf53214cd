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

import sys
import os
from pathlib import Path

import pytest

# プロジェクトのルートディレクトリを sys.path に追加
# これにより、tests ディレクトリから 'src' モジュールをインポートできるようになります
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core.diophantine import YoulaFamily, solve_d_minimal  # noqa: E402
from src.core.polynomial import RatPoly  # noqa: E402
from src.core.response import ModalDecomposition, decompose, rationalize_exponents  # noqa: E402
from src.core.transfer import PoleSpec, Reference, target_poly  # noqa: E402

PROJECT_ROOT = Path(__file__).resolve().parent.parent
CONFIG_DIR = PROJECT_ROOT / "configs"

# 数値例で得られる Youla パラメータ q = −32 − 23s − 3s²
EXAMPLE_Q = (-32, -23, -3)


@pytest.fixture
def plant_den() -> RatPoly:
    return RatPoly((1, 1))


@pytest.fixture
def plant_num() -> RatPoly:
    return RatPoly((1,))


@pytest.fixture
def example_poles() -> PoleSpec:
    """閉ループ極 −1 ± 2j, −2 ± 4j"""
    return PoleSpec.of(pairs=[(1, 2), (2, 4)])


@pytest.fixture
def example_family(plant_den, plant_num, example_poles) -> YoulaFamily:
    return solve_d_minimal(plant_den, plant_num, target_poly(example_poles))


@pytest.fixture
def step() -> Reference:
    return Reference.step()


@pytest.fixture
def example_decomposition(step, example_family, example_poles) -> ModalDecomposition:
    return rationalize_exponents(decompose(step, example_family, example_poles), theta=1)


@pytest.fixture
def config_dir() -> Path:
    return CONFIG_DIR


@pytest.fixture
def example_q() -> tuple[int, int, int]:
    return EXAMPLE_Q
