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

from fractions import Fraction

import pytest
from pydantic import ValidationError

from src.core.polynomial import RatPoly
from src.models import (
    ApproxConfig,
    AppSettings,
    BoundsConfig,
    ObjectiveTerm,
    RelaxationConfig,
    SynthesisConfig,
)

BASE = {
    "plant": {"num": [1], "den": "s + 1"},
    "poles": {"complex": [["1", "2"], ["2", "4"]]},
}


def test_synthesis_config_defaults():
    config = SynthesisConfig.model_validate(BASE)
    assert config.plant.den == RatPoly((1, 1))
    assert config.poles.complex == [(Fraction(1), Fraction(2)), (Fraction(2), Fraction(4))]
    assert config.relaxation.kind == "exp-bounds"
    assert config.relaxation.orders == [4]
    assert config.solver.chain == ["CLARABEL", "SCS"]
    assert config.reference.build().poles.real == (Fraction(0),)


def test_rationals_accept_text_and_decimals():
    """[正確性] "1/3" や 0.1 は厳密な有理数として取り込まれる"""
    config = SynthesisConfig.model_validate({**BASE, "poles": {"real": ["1/3", 0.1]}})
    assert config.poles.real == [Fraction(1, 3), Fraction(1, 10)]


def test_forbid_extra_fields():
    with pytest.raises(ValidationError):
        SynthesisConfig.model_validate({**BASE, "unknown": 1})


def test_constant_bound_is_promoted_to_list():
    assert BoundsConfig(upper=1.2).upper == [1.2]


def test_orders_must_increase():
    with pytest.raises(ValidationError):
        RelaxationConfig(orders=[4, 3])


def test_mode_energy_needs_mode():
    with pytest.raises(ValidationError):
        ObjectiveTerm(kind="mode_energy")


def test_overshoot_requires_multivariate():
    """[異常系] 指数包絡の緩和では overshoot 目的は使えない"""
    with pytest.raises(ValidationError):
        SynthesisConfig.model_validate({**BASE, "objective": [{"kind": "overshoot"}]})


@pytest.mark.parametrize(
    "fields",
    [
        {"source": "build"},
        {"source": "build", "eps": 0.01},
        {"source": "cache"},
        {"source": "build", "eps": 1.5, "interval": 1.0},
    ],
)
def test_approx_config_requirements(fields):
    with pytest.raises(ValidationError):
        ApproxConfig(**fields)


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("YKSYN_LOG_LEVEL", "debug")
    monkeypatch.setenv("YKSYN_OUT_DIR", "/tmp/yk")
    settings = AppSettings()
    assert settings.log_level == "debug"
    assert str(settings.out_dir) == "/tmp/yk"
