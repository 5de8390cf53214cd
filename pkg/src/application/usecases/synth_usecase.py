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
制御器合成のパイプラインを担当するUseCaseモジュール。

設定 → Youla 族 → モーダル分解 → 多項式最適化問題 → SDP 緩和の階層 → 制御器
の順に処理します。
"""

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

import structlog

from src.application.usecases.approx_usecase import obtain_overapprox
from src.core.diophantine import YoulaFamily, controller, solve_d_minimal
from src.core.errors import InfeasibleProblem, SolverFailure
from src.core.polynomial import RatPoly, as_fraction
from src.core.relax_exp import (
    ExpBoundPair,
    bound_constraints,
    build_exp_bounds,
    build_exp_bounds_enumerated,
    check_bound_spec,
    enumerated_bound_constraints,
)
from src.core.response import (
    LinearResidueSystem,
    ModalDecomposition,
    decompose,
    rationalize_exponents,
    residue_system,
    to_multipoly,
)
from src.core.semialg import Overapprox
from src.core.sos import (
    Constraint,
    DecisionLayout,
    PolyOptProblem,
    QuadObjective,
    SdpProblem,
    assemble,
    mode_energy_objective,
    overshoot_epigraph,
    region_bound_constraints,
    steady_state_constraint,
    steady_state_objective,
)
from src.core.transfer import PoleSpec, Reference, TransferFunction, signal_transfer, target_poly
from src.infrastructure.sdp_solver import SdpSolution, SdpSolver, SolveStatus, write_sdp
from src.models import HierarchyRow, SynthesisConfig

log = structlog.get_logger()

MONOTONE_TOL = 1e-4


@dataclass(eq=False)
class SynthesisPlan:
    """最適化に入る前までの中間結果。"""

    config: SynthesisConfig
    plant: TransferFunction
    poles: PoleSpec
    reference: Reference
    family: YoulaFamily
    decomposition: ModalDecomposition
    residues: LinearResidueSystem
    problem: PolyOptProblem
    overapprox: Optional[Overapprox] = None
    exp_bounds: Optional[ExpBoundPair] = None


@dataclass(eq=False)
class SynthesisResult:
    plan: SynthesisPlan
    rows: List[HierarchyRow]
    q: tuple[Fraction, ...]
    controller: TransferFunction
    loop: TransferFunction
    solution: SdpSolution
    sdp: SdpProblem

    @property
    def gamma(self) -> Optional[float]:
        return self.rows[-1].gamma if self.rows else None


def _theta(config: SynthesisConfig) -> Optional[Fraction]:
    rel = config.relaxation
    if rel.theta is not None:
        return rel.theta
    # 既知の外側近似は θ = 1 で作られている
    if rel.kind == "multivariate" and rel.approx.source == "precomputed":
        return Fraction(1)
    return None


def build_plan(config: SynthesisConfig) -> SynthesisPlan:
    """
    設定から多項式最適化問題を組み立てます。

    Raises:
        SynthesisError の各サブクラス（極指定・互いに素・次数・尺度変換など）
    """
    plant = TransferFunction(config.plant.num, config.plant.den)
    poles = config.poles.to_spec()
    reference = config.reference.build()
    family = solve_d_minimal(plant.den, plant.num, target_poly(poles))
    raw = decompose(reference, family, poles, config.signal)
    residues = residue_system(reference, family, poles, config.signal)
    dec = rationalize_exponents(raw, _theta(config))

    upper, lower = config.bounds.upper, config.bounds.lower
    check_bound_spec(upper, lower)

    layout = DecisionLayout.youla(family.dq)
    constraints: list[Constraint] = []
    overapprox: Optional[Overapprox] = None
    exp_pair: Optional[ExpBoundPair] = None
    extra = QuadObjective.zero(layout.size)

    if config.relaxation.kind == "exp-bounds":
        if config.relaxation.enumerate_signs:
            uppers, lowers = build_exp_bounds_enumerated(dec, layout)
            constraints.extend(enumerated_bound_constraints(uppers, lowers, upper, lower))
        else:
            exp_pair = build_exp_bounds(dec, layout)
            layout = exp_pair.layout
            constraints.extend(bound_constraints(exp_pair, upper, lower))
    else:
        assert dec.theta is not None
        overapprox = obtain_overapprox(config.relaxation.approx, dec.theta)
        overshoot = [t for t in config.objective if t.kind == "overshoot"]
        if overshoot:
            layout = layout.extend("gamma")
        y = to_multipoly(dec, layout.size)
        constraints.extend(region_bound_constraints(y, overapprox, layout, upper, lower))
        if overshoot:
            weight = sum(t.weight for t in overshoot)
            layout, extra, epigraph = overshoot_epigraph(y, overapprox, layout, weight)
            constraints.append(epigraph)

    objective = extra.resized(layout.size)
    for term in config.objective:
        if term.kind == "steady_state":
            objective = objective + steady_state_objective(dec, layout, term.target, term.weight)
        elif term.kind == "mode_energy":
            assert term.mode is not None
            objective = objective + mode_energy_objective(dec, layout, term.mode, term.weight)
    if config.steady_state is not None:
        constraints.append(steady_state_constraint(dec, layout, config.steady_state))

    problem = PolyOptProblem(layout, objective.resized(layout.size), tuple(constraints))
    log.info(
        "Synthesis plan built",
        name=config.name,
        relaxation=config.relaxation.kind,
        decisions=layout.size,
        constraints=len(constraints),
        dq=family.dq,
    )
    return SynthesisPlan(
        config=config,
        plant=plant,
        poles=poles,
        reference=reference,
        family=family,
        decomposition=dec,
        residues=residues,
        problem=problem,
        overapprox=overapprox,
        exp_bounds=exp_pair,
    )


def _row(order: int, sdp: SdpProblem, sol: SdpSolution, layout: DecisionLayout) -> HierarchyRow:
    q: list[float] = []
    gamma = None
    if sol.z is not None:
        q = [float(sol.z[i]) for i in layout.q_indices]
        if "gamma" in layout.names:
            gamma = float(sol.z[layout.index("gamma")])
    return HierarchyRow(
        order=order,
        largest_block=max(sdp.block_sizes, default=0),
        status=str(sol.status),
        objective=sol.objective,
        gamma=gamma,
        q=q,
    )


def hierarchy(
    problem: PolyOptProblem,
    orders: Sequence[int],
    solver: SdpSolver,
    objective_form: str = "quadratic",
) -> list[tuple[HierarchyRow, SdpProblem, SdpSolution]]:
    """
    緩和次数の列について SDP を解きます。

    次数ごとにそのまま解き、実行不能な次数も行として残します。
    次数を上げると乗数の集合が広がるので、最適値は非増加になるはずです。
    """
    if any(b <= a for a, b in zip(orders, orders[1:])):
        raise ValueError("緩和次数は狭義単調増加で指定してください")
    out = []
    for k in orders:
        sdp = assemble(problem.with_order(k), objective_form)  # type: ignore[arg-type]
        sol = solver.solve(sdp)
        row = _row(k, sdp, sol, problem.layout)
        log.info("Hierarchy row", order=k, block=row.largest_block, status=row.status, objective=row.objective, gamma=row.gamma)
        out.append((row, sdp, sol))

    values = [r.gamma if r.gamma is not None else r.objective for r, _, _ in out]
    for (prev, cur), k in zip(zip(values, values[1:]), orders[1:]):
        if prev is not None and cur is not None and cur > prev + MONOTONE_TOL:
            log.warning("Relaxation bound increased", order=k, previous=prev, current=cur)
    return out


def _exact_q(values: Sequence[float], dq: int) -> tuple[Fraction, ...]:
    q = tuple(as_fraction(float(v)) for v in values)
    return q + (Fraction(0),) * (dq + 1 - len(q))


class SynthesisUseCase:
    """
    合成パイプライン全体のビジネスロジック層。
    """
    def __init__(self, solver: Optional[SdpSolver] = None):
        self.solver = solver

    def run(
        self,
        config: SynthesisConfig,
        orders: Optional[Sequence[int]] = None,
        dump_sdp: Optional[Path] = None,
    ) -> SynthesisResult:
        """
        Raises:
            InfeasibleProblem: 最終の緩和次数で実行不能と判定された場合
            SolverFailure: 解が得られなかった場合
        """
        plan = build_plan(config)
        solver = self.solver or SdpSolver(config.solver)
        if config.relaxation.kind == "multivariate":
            ks = list(orders or config.relaxation.orders)
        else:
            ks = [0]

        results = hierarchy(plan.problem, ks, solver, config.solver.objective_form)
        rows = [r for r, _, _ in results]
        _, sdp, sol = results[-1]

        if dump_sdp is not None:
            export = sdp if sdp.objective_form == "schur" else assemble(
                plan.problem.with_order(sdp.relax_order), "schur"
            )
            write_sdp(export, dump_sdp)

        if sol.status == SolveStatus.INFEASIBLE:
            raise InfeasibleProblem(
                f"緩和次数 {sdp.relax_order} の SDP は実行不能です（{sol.solver}）",
                status=str(sol.status),
            )
        if sol.status == SolveStatus.UNCERTIFIED:
            failed = [c.label for c in sol.certificates if not c.ok(config.solver.cert_residual_tol, config.solver.cert_psd_tol)]
            raise SolverFailure(f"SOS 証明書の検査に失敗しました（{sol.solver}）: {', '.join(failed)}")
        if sol.status == SolveStatus.UNBOUNDED:
            raise SolverFailure(f"SDP が非有界です（{sol.solver}）。目的関数の重みを確認してください")
        if sol.z is None:
            raise SolverFailure(f"ソルバー {sol.solver} が解を返しませんでした (status={sol.status})")
        if sol.status == SolveStatus.SLOW_PROGRESS:
            log.warning("Using best iterate", solver=sol.solver, iterations=sol.iterations)

        q = _exact_q(rows[-1].q, plan.family.dq)
        ctrl = controller(plan.family, RatPoly(q))
        loop = signal_transfer(plan.plant, ctrl, config.signal)
        log.info("Controller synthesized", q=[float(x) for x in q], objective=sol.objective, gamma=rows[-1].gamma)
        return SynthesisResult(
            plan=plan,
            rows=rows,
            q=q,
            controller=ctrl,
            loop=loop,
            solution=sol,
            sdp=sdp,
        )
