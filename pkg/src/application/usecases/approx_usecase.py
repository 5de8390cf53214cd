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
外側近似の取得（既知の表・構築・キャッシュ）と被覆統計を担当するUseCaseモジュール。
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import structlog

from src.core.errors import ConfigError
from src.core.semialg import (
    Overapprox,
    build_overapprox,
    build_overapprox_fixed_degree,
    covered,
    precomputed,
    vertical_gaps,
)
from src.infrastructure.storage import load_overapprox, save_overapprox
from src.models import ApproxConfig

log = structlog.get_logger()

COVERAGE_SAMPLES = 100_000
TAIL_MARGIN = 5.0


@dataclass(frozen=True)
class CoverageStats:
    samples: int
    covered: int
    tail_samples: int
    worst_gap: float

    @property
    def fraction(self) -> float:
        return self.covered / self.samples if self.samples else 1.0


def _build(cfg: ApproxConfig, theta: Fraction) -> Overapprox:
    assert cfg.eps is not None
    if cfg.fixed_degree is not None:
        return build_overapprox_fixed_degree(cfg.eps, cfg.fixed_degree, theta)
    if cfg.interval is None:
        raise ConfigError("外側近似の構築には interval か fixed_degree が必要です")
    return build_overapprox(cfg.eps, cfg.interval, theta, k_max=cfg.k_max)


def obtain_overapprox(cfg: ApproxConfig, theta: Fraction) -> Overapprox:
    """
    設定に従って外側近似を用意します。

    source = "cache" でファイルが無い場合は eps から構築して保存します。
    """
    if cfg.source == "precomputed":
        o = precomputed()
    elif cfg.source == "build":
        o = _build(cfg, theta)
    else:
        assert cfg.cache is not None
        if cfg.cache.exists():
            o = load_overapprox(cfg.cache)
        elif cfg.eps is not None:
            o = _build(cfg, theta)
            save_overapprox(o, cfg.cache)
        else:
            raise ConfigError(f"キャッシュ {cfg.cache} が無く、構築用の eps も指定されていません")

    if o.theta != theta:
        raise ConfigError(
            f"外側近似の θ = {o.theta} が応答の θ = {theta} と一致しません"
        )
    log.info("Overapproximation ready", source=cfg.source, regions=len(o.regions), eps=o.eps)
    return o


def coverage(o: Overapprox, samples: int = COVERAGE_SAMPLES, seed: int = 0) -> CoverageStats:
    """
    曲線 (cos θτ, sin θτ, e^{−τ}) 上の乱択点が外側近似に含まれるかを調べます。

    τ は [0, τ_end + 5] から一様に取り、末尾の領域に落ちる点も数えます。
    worst_gap は各領域から取った点と曲線との λ 方向の距離の最大値です。
    """
    rng = np.random.default_rng(seed)
    tau_end = -math.log(o.eps)
    taus = rng.uniform(0.0, tau_end + TAIL_MARGIN, samples)
    hit = covered(o, taus)
    tail = int(np.count_nonzero(taus >= tau_end))
    worst_gap = max(vertical_gaps(o))
    stats = CoverageStats(samples=samples, covered=int(np.count_nonzero(hit)), tail_samples=tail, worst_gap=worst_gap)
    if stats.covered < samples:
        log.warning("Curve points outside the overapproximation", missed=[float(t) for t in taus[~hit][:10]])
    log.info("Coverage measured", samples=samples, covered=stats.covered, worst_gap=worst_gap)
    return stats
