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
多項式最適化問題の SOS（二乗和）による SDP 符号化。

- λ ∈ [0, 1] 上の一変数非負制約: Markov–Lukács 表現（厳密）
- 半代数集合上の多変数非負制約: Putinar 型の表現（次数 k の緩和）

各恒等式はグラム行列（半正定値）と自由乗数の係数を単項式ごとに
突き合わせる線形等式として cvxpy に渡します。
"""

from dataclasses import dataclass, field, replace
from math import ceil
from typing import Literal, Sequence, Union

import cvxpy as cp
import numpy as np
import scipy.sparse as sp
import structlog

from src.core.errors import InvalidObjective, OrderDeficit, UnknownMode
from src.core.polynomial import (
    LAM,
    ONE,
    AffinePoly,
    Monomial,
    MultiPoly,
    mono_key,
    monomials_up_to,
)
from src.core.response import ComplexMode, ModalDecomposition, RealMode
from src.core.semialg import Overapprox, Region

log = structlog.get_logger(__name__)

ObjectiveForm = Literal["quadratic", "schur"]


# =============================================================================
# 決定変数と目的関数
# =============================================================================

@dataclass(frozen=True)
class DecisionLayout:
    """決定変数ベクトル z の並び。先頭 dq+1 個は Youla パラメータ q の係数です。"""

    names: tuple[str, ...]

    @classmethod
    def youla(cls, dq: int) -> "DecisionLayout":
        return cls(tuple(f"q{k}" for k in range(dq + 1)))

    def extend(self, *names: str) -> "DecisionLayout":
        dup = set(names) & set(self.names)
        if dup:
            raise ValueError(f"決定変数名が重複しています: {sorted(dup)}")
        return DecisionLayout(self.names + tuple(names))

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"決定変数 '{name}' は存在しません") from None

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def q_indices(self) -> list[int]:
        return [i for i, n in enumerate(self.names) if n.startswith("q")]


@dataclass(frozen=True, eq=False)
class QuadObjective:
    """zᵀQz + cᵀz + r（Q は半正定値）"""

    Q: np.ndarray
    c: np.ndarray
    r: float = 0.0

    @classmethod
    def zero(cls, nz: int) -> "QuadObjective":
        return cls(np.zeros((nz, nz)), np.zeros(nz), 0.0)

    @classmethod
    def linear(cls, nz: int, index: int, weight: float = 1.0) -> "QuadObjective":
        c = np.zeros(nz)
        c[index] = weight
        return cls(np.zeros((nz, nz)), c, 0.0)

    @classmethod
    def squared_affine(cls, g: np.ndarray, e: float, weight: float = 1.0) -> "QuadObjective":
        """weight·(gᵀz + e)²"""
        return cls(weight * np.outer(g, g), 2.0 * weight * e * g, weight * e * e)

    @property
    def size(self) -> int:
        return self.c.shape[0]

    def resized(self, nz: int) -> "QuadObjective":
        if nz < self.size:
            raise ValueError("決定変数を減らすことはできません")
        Q = np.zeros((nz, nz))
        Q[: self.size, : self.size] = self.Q
        c = np.zeros(nz)
        c[: self.size] = self.c
        return QuadObjective(Q, c, self.r)

    def __add__(self, other: "QuadObjective") -> "QuadObjective":
        n = max(self.size, other.size)
        a, b = self.resized(n), other.resized(n)
        return QuadObjective(a.Q + b.Q, a.c + b.c, a.r + b.r)

    def value(self, z: Sequence[float]) -> float:
        zz = np.asarray(z, dtype=float)
        return float(zz @ self.Q @ zz + self.c @ zz + self.r)

    def factor(self) -> np.ndarray:
        """Q = LᵀL となる L（ゼロ固有値の行は除く）。

        Raises:
            InvalidObjective: Q が半正定値でない場合
        """
        Qs = 0.5 * (self.Q + self.Q.T)
        w, V = np.linalg.eigh(Qs)
        scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
        if w.size and w.min() < -1e-9 * scale:
            raise InvalidObjective(f"Q の最小固有値が負です ({w.min():.3e})")
        keep = w > 1e-12 * scale
        return (np.sqrt(w[keep])[:, None] * V[:, keep].T) if np.any(keep) else np.zeros((0, self.size))


def _q_vector(coeff_lin: Sequence[object], layout: DecisionLayout) -> np.ndarray:
    g = np.zeros(layout.size)
    for k, idx in enumerate(layout.q_indices[: len(coeff_lin)]):
        g[idx] = float(coeff_lin[k])  # type: ignore[arg-type]
    return g


def steady_state_objective(dec: ModalDecomposition, layout: DecisionLayout, target: float = 1.0, weight: float = 1.0) -> QuadObjective:
    """weight·(y₀(q) − target)²。y₀ は s = 0 の極に対応するモードの係数です。"""
    mode = dec.steady_state_mode()
    return QuadObjective.squared_affine(
        _q_vector(mode.y.lin, layout), float(mode.y.c0) - target, weight
    )


def steady_state_constraint(dec: ModalDecomposition, layout: DecisionLayout, target: float = 1.0) -> "LinearConstraint":
    """y₀(q) = target を等式として課します。"""
    mode = dec.steady_state_mode()
    nz = layout.size
    g = AffinePoly.constant(MultiPoly.constant(float(mode.y.c0) - target), nz)
    for k, idx in enumerate(layout.q_indices[: len(mode.y.lin)]):
        if mode.y.lin[k] != 0:
            g = g + AffinePoly.linear(MultiPoly.constant(float(mode.y.lin[k])), idx, nz)
    return LinearConstraint(g, "steady_state", equality=True)


def mode_energy_objective(dec: ModalDecomposition, layout: DecisionLayout, index: int, weight: float = 1.0) -> QuadObjective:
    """実モードは y_i²、複素モードは a_i² + b_i² に重みを掛けたもの。"""
    mode = dec.mode(index)
    if isinstance(mode, RealMode):
        return QuadObjective.squared_affine(_q_vector(mode.y.lin, layout), float(mode.y.c0), weight)
    if isinstance(mode, ComplexMode):
        return QuadObjective.squared_affine(
            _q_vector(mode.a.lin, layout), float(mode.a.c0), weight
        ) + QuadObjective.squared_affine(_q_vector(mode.b.lin, layout), float(mode.b.c0), weight)
    raise UnknownMode(f"モード {index} の種類を判別できません")


# =============================================================================
# 制約
# =============================================================================

@dataclass(frozen=True, eq=False)
class UnivariateConstraint:
    """g(λ) ≥ 0 for λ ∈ [0, 1]"""

    g: AffinePoly
    label: str = ""


@dataclass(frozen=True, eq=False)
class RegionConstraint:
    """g(u, v, λ) ≥ 0 on every region"""

    g: AffinePoly
    regions: tuple[Region, ...]
    label: str = ""


@dataclass(frozen=True, eq=False)
class LinearConstraint:
    """次数 0 の g(z) ≥ 0（equality=True なら g(z) = 0）"""

    g: AffinePoly
    label: str = ""
    equality: bool = False


Constraint = Union[UnivariateConstraint, RegionConstraint, LinearConstraint]


@dataclass(frozen=True, eq=False)
class PolyOptProblem:
    layout: DecisionLayout
    objective: QuadObjective
    constraints: tuple[Constraint, ...]
    relax_order: int = 0

    def with_order(self, k: int) -> "PolyOptProblem":
        return replace(self, relax_order=k)

    def minimal_order(self) -> int:
        """relax_order = 0 のときに使う次数（制約と領域の次数の半分の最大値）。"""
        orders = [
            required_order(c.g, region)
            for c in self.constraints if isinstance(c, RegionConstraint)
            for region in c.regions
        ]
        return max(orders, default=0)


def epigraph_constraint(y: AffinePoly, overapprox: Overapprox, layout: DecisionLayout, gamma: str = "gamma") -> RegionConstraint:
    """γ − y(u, v, λ) ≥ 0 をすべての領域で課します。"""
    nz = layout.size
    g = AffinePoly.linear(MultiPoly.constant(1.0), layout.index(gamma), nz) - y.embed(nz)
    return RegionConstraint(g, overapprox.regions, label="overshoot")


def overshoot_epigraph(
    y: AffinePoly,
    overapprox: Overapprox,
    layout: DecisionLayout,
    weight: float = 1.0,
    gamma: str = "gamma",
) -> tuple[DecisionLayout, QuadObjective, RegionConstraint]:
    """
    決定変数 γ を追加し、目的関数の項 weight·γ と制約 γ − y ≥ 0 を返します。

    layout に γ が既にあればそれを使います。
    """
    full = layout if gamma in layout.names else layout.extend(gamma)
    objective = QuadObjective.linear(full.size, full.index(gamma), weight)
    return full, objective, epigraph_constraint(y, overapprox, full, gamma)


def region_bound_constraints(
    y: AffinePoly,
    overapprox: Overapprox,
    layout: DecisionLayout,
    upper: Sequence[float] | None,
    lower: Sequence[float] | None,
) -> list[RegionConstraint]:
    """g_l(λ) ≤ y(u, v, λ) ≤ g_u(λ) を外側近似のすべての領域で課します。"""
    nz = layout.size
    out = []
    if upper is not None:
        gu = AffinePoly.constant(MultiPoly.from_univariate(upper, LAM), nz)
        out.append(RegionConstraint(gu - y.embed(nz), overapprox.regions, label="upper"))
    if lower is not None:
        gl = AffinePoly.constant(MultiPoly.from_univariate(lower, LAM), nz)
        out.append(RegionConstraint(y.embed(nz) - gl, overapprox.regions, label="lower"))
    return out


def required_order(g: AffinePoly, region: Region) -> int:
    degs = [g.degree()] + [p.degree() for p in (*region.eqs, *region.ineqs)]
    return max(ceil(max(d, 0) / 2) for d in degs)


# =============================================================================
# SOS 符号化
# =============================================================================

@dataclass(eq=False)
class Multiplier:
    """重み多項式 × (グラム行列による SOS または自由係数の多項式)"""

    kind: Literal["sos", "free"]
    weight: MultiPoly
    basis: list[Monomial]
    var: cp.Variable

    def polynomial(self, value: np.ndarray) -> MultiPoly:
        acc: dict[Monomial, float] = {}
        if self.kind == "sos":
            G = 0.5 * (value + value.T)
            for i, bi in enumerate(self.basis):
                for j, bj in enumerate(self.basis):
                    m = (bi[0] + bj[0], bi[1] + bj[1], bi[2] + bj[2])
                    acc[m] = acc.get(m, 0.0) + float(G[i, j])
        else:
            for k, bk in enumerate(self.basis):
                acc[bk] = acc.get(bk, 0.0) + float(value[k])
        return self.weight * MultiPoly.from_dict(acc)


@dataclass(eq=False)
class EncodedConstraint:
    """1 つの非負性制約に対する LMI ブロックと係数一致の等式。"""

    label: str
    g: AffinePoly
    multipliers: list[Multiplier]
    constraints: list[cp.Constraint] = field(default_factory=list)

    @property
    def block_sizes(self) -> list[int]:
        return [len(m.basis) for m in self.multipliers if m.kind == "sos"]


def _sos(weight: MultiPoly, variables: Sequence[int], half_degree: int, name: str) -> Multiplier:
    basis = monomials_up_to(variables, half_degree)
    n = len(basis)
    return Multiplier("sos", weight, basis, cp.Variable((n, n), PSD=True, name=name))


def _free(weight: MultiPoly, variables: Sequence[int], degree: int, name: str) -> Multiplier:
    basis = monomials_up_to(variables, degree)
    return Multiplier("free", weight, basis, cp.Variable(len(basis), name=name))


def _identity(label: str, g: AffinePoly, z: cp.Variable, multipliers: list[Multiplier]) -> EncodedConstraint:
    """Σ weight·multiplier = g(z) を単項式ごとの線形等式として組み立てます。"""
    triplets: list[list[tuple[Monomial, int, float]]] = []
    rows: set[Monomial] = set(g.monomials())
    for mult in multipliers:
        entries = []
        n = len(mult.basis)
        if mult.kind == "sos":
            for i, bi in enumerate(mult.basis):
                for j, bj in enumerate(mult.basis):
                    col = i + j * n
                    for t, c in mult.weight.terms:
                        m = (bi[0] + bj[0] + t[0], bi[1] + bj[1] + t[1], bi[2] + bj[2] + t[2])
                        entries.append((m, col, c))
        else:
            for k, bk in enumerate(mult.basis):
                for t, c in mult.weight.terms:
                    entries.append(((bk[0] + t[0], bk[1] + t[1], bk[2] + t[2]), k, c))
        rows.update(e[0] for e in entries)
        triplets.append(entries)

    order = sorted(rows, key=mono_key)
    row_of = {m: i for i, m in enumerate(order)}
    lhs: cp.Expression | float = 0.0
    for mult, entries in zip(multipliers, triplets):
        n = len(mult.basis)
        ncols = n * n if mult.kind == "sos" else n
        M = sp.coo_matrix(
            ([e[2] for e in entries], ([row_of[e[0]] for e in entries], [e[1] for e in entries])),
            shape=(len(order), ncols),
        ).tocsr()
        vec = cp.reshape(mult.var, (n * n,), order="F") if mult.kind == "sos" else mult.var
        lhs = lhs + M @ vec

    const, lin = g.split(order)
    return EncodedConstraint(label, g, multipliers, [lhs == const + lin @ z])


def encode_univariate(g: AffinePoly, z: cp.Variable, label: str = "") -> EncodedConstraint:
    """
    λ ∈ [0, 1] 上の非負性を Markov–Lukács 表現で符号化します。

    次数 2k:   g = σ₀ + λ(1 − λ)σ₁   (deg σ₀ ≤ 2k, deg σ₁ ≤ 2k − 2)
    次数 2k+1: g = λσ₀ + (1 − λ)σ₁   (deg σ_i ≤ 2k)
    """
    if g.variables() - {LAM}:
        raise ValueError("一変数制約に u, v が含まれています")
    d = max(g.degree(), 0)
    lam = MultiPoly.var(LAM)
    one = MultiPoly.constant(1.0)
    if d % 2 == 0:
        k = d // 2
        mults = [_sos(one, [LAM], k, f"{label}_s0")]
        if k >= 1:
            mults.append(_sos(lam - lam * lam, [LAM], k - 1, f"{label}_s1"))
    else:
        k = (d - 1) // 2
        mults = [_sos(lam, [LAM], k, f"{label}_s0"), _sos(one - lam, [LAM], k, f"{label}_s1")]
    return _identity(label, g, z, mults)


def encode_putinar(g: AffinePoly, region: Region, order: int, z: cp.Variable, label: str = "") -> EncodedConstraint:
    """
    g = σ₀ + Σ σ_i f_i + Σ μ_j e_j（f_i ≥ 0, e_j = 0）を符号化します。

    order は不等式の乗数の次数を決めます: deg σ_i = 2·order。
    σ₀ と等式の乗数 μ_j は恒等式に必要な次数まで取るので、order を上げるほど
    許される乗数の集合は広がり、得られる上界は単調に狭まります。

    Raises:
        OrderDeficit: order < 1 の場合
    """
    if order < 1:
        raise OrderDeficit(f"緩和次数 {order} は 1 以上で指定してください ({label})")
    degs = [g.degree(), 2 * order]
    degs += [2 * order + f.degree() for f in region.ineqs]
    degs += [e.degree() for e in region.eqs]
    top = ceil(max(degs) / 2)
    variables = sorted(
        g.variables().union(*(p.variables() for p in (*region.eqs, *region.ineqs)))
    ) or [LAM]

    mults = [_sos(MultiPoly.constant(1.0), variables, top, f"{label}_s0")]
    for i, f in enumerate(region.ineqs):
        mults.append(_sos(f, variables, order, f"{label}_s{i + 1}"))
    for j, e in enumerate(region.eqs):
        mults.append(_free(e, variables, 2 * top - e.degree(), f"{label}_m{j}"))
    return _identity(label, g, z, mults)


def encode_linear(g: AffinePoly, z: cp.Variable, label: str = "", equality: bool = False) -> cp.Constraint:
    if g.degree() > 0:
        raise ValueError("線形制約に多項式項が含まれています")
    const, lin = g.split([ONE])
    expr = const[0] + lin[0] @ z
    return expr == 0 if equality else expr >= 0


# =============================================================================
# SDP の組み立て
# =============================================================================

@dataclass(eq=False)
class SdpProblem:
    problem: cp.Problem
    z: cp.Variable
    layout: DecisionLayout
    encoded: list[EncodedConstraint]
    objective_form: str
    relax_order: int

    @property
    def block_sizes(self) -> list[int]:
        return [n for e in self.encoded for n in e.block_sizes]


def assemble(p: PolyOptProblem, objective_form: ObjectiveForm = "quadratic") -> SdpProblem:
    """
    多項式最適化問題を cvxpy の SDP に変換します。

    objective_form="schur" の場合は二次の目的関数をシューア補元による LMI
    [[t − cᵀz − r, (Lz)ᵀ], [Lz, I]] ⪰ 0 で表し、t を最小化します。
    """
    nz = p.layout.size
    z = cp.Variable(nz, name="z")
    order = p.relax_order if p.relax_order > 0 else p.minimal_order()

    encoded: list[EncodedConstraint] = []
    constraints: list[cp.Constraint] = []
    for idx, c in enumerate(p.constraints):
        tag = c.label or f"c{idx}"
        if isinstance(c, UnivariateConstraint):
            enc = encode_univariate(c.g, z, f"{tag}{idx}")
            encoded.append(enc)
            constraints.extend(enc.constraints)
        elif isinstance(c, RegionConstraint):
            for r_idx, region in enumerate(c.regions):
                enc = encode_putinar(c.g, region, order, z, f"{tag}{idx}_{region.label or r_idx}")
                encoded.append(enc)
                constraints.extend(enc.constraints)
        else:
            constraints.append(encode_linear(c.g, z, tag, c.equality))

    obj = p.objective.resized(nz)
    L = obj.factor()
    if objective_form == "schur":
        t = cp.Variable(name="t")
        k = L.shape[0]
        if k:
            Lz = L @ z
            lmi = cp.bmat([
                [cp.reshape(t - obj.c @ z - obj.r, (1, 1), order="F"), cp.reshape(Lz, (1, k), order="F")],
                [cp.reshape(Lz, (k, 1), order="F"), np.eye(k)],
            ])
            constraints.append(lmi >> 0)
        else:
            constraints.append(t >= obj.c @ z + obj.r)
        objective = cp.Minimize(t)
    else:
        expr = obj.c @ z + obj.r
        if L.shape[0]:
            expr = cp.sum_squares(L @ z) + expr
        objective = cp.Minimize(expr)

    problem = cp.Problem(objective, constraints)
    sdp = SdpProblem(problem, z, p.layout, encoded, objective_form, order)
    log.info(
        "SDP assembled",
        decisions=nz,
        relax_order=order,
        lmi_blocks=len(sdp.block_sizes),
        largest_block=max(sdp.block_sizes, default=0),
        objective_form=objective_form,
    )
    return sdp


# =============================================================================
# 証明書の検査
# =============================================================================

@dataclass(frozen=True, eq=False)
class Certificate:
    label: str
    residual: float
    min_eigenvalue: float
    grams: tuple[np.ndarray, ...]
    scale: float = 1.0

    def ok(self, residual_tol: float = 1e-6, psd_tol: float = 1e-7) -> bool:
        """許容値は g(z) の係数の大きさ（1 未満なら 1）に比例させます。"""
        return self.residual <= residual_tol * self.scale and self.min_eigenvalue >= -psd_tol * self.scale


def audit_certificate(enc: EncodedConstraint, z_value: np.ndarray) -> Certificate:
    """
    求まったグラム行列と乗数から多項式を再構成し、g(z) との係数の差と
    グラム行列の最小固有値を返します。
    """
    total = MultiPoly()
    grams = []
    min_eig = np.inf
    for mult in enc.multipliers:
        value = mult.var.value
        if value is None:
            raise ValueError(f"制約 {enc.label} の乗数に値がありません（未求解）")
        value = np.asarray(value, dtype=float)
        total = total + mult.polynomial(value)
        if mult.kind == "sos":
            G = 0.5 * (value + value.T)
            grams.append(G)
            min_eig = min(min_eig, float(np.linalg.eigvalsh(G).min()))
    target = enc.g.evaluate(z_value)
    diff = total - target
    residual = max((abs(c) for _, c in diff.terms), default=0.0)
    scale = max([1.0] + [abs(c) for _, c in target.terms])
    return Certificate(enc.label, residual, float(min_eig), tuple(grams), scale)
