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
テキストレポートの整形。

数値はすべて有効数字 6 桁で出力します（CSV は別途全精度）。
時刻などの実行ごとに変わる値は含めないため、同じ入力からは同じ文字列になります。
"""

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from src.core.polynomial import RatPoly, format_univariate
from src.core.response import ComplexMode, ModalDecomposition, RealMode
from src.core.semialg import Overapprox
from src.core.sim import ResponseMetrics
from src.core.sos import Certificate
from src.core.transfer import TransferFunction
from src.models import HierarchyRow


def num(x: Optional[float]) -> str:
    return "-" if x is None else f"{float(x):.6g}"


def poly_text(p: RatPoly, var: str = "s") -> str:
    return format_univariate([float(c) for c in p.coeffs], var)


def tf_text(tf: TransferFunction) -> str:
    return f"({poly_text(tf.num)}) / ({poly_text(tf.den)})"


def _table(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    body = [list(header)] + [list(r) for r in rows]
    widths = [max(len(r[i]) for r in body) for i in range(len(header))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in body]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


@dataclass(frozen=True)
class ReproduceRow:
    item: str
    expected: float
    obtained: Optional[float]
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.obtained is not None and abs(self.obtained - self.expected) <= self.tolerance


class ReportFormatter:
    """各サブコマンドのレポート文字列を組み立てます。"""

    @staticmethod
    def controller(
        name: str,
        q: Sequence[object],
        controller: TransferFunction,
        loop: TransferFunction,
        signal: str,
    ) -> str:
        q_poly = RatPoly(tuple(q))  # type: ignore[arg-type]
        return "\n".join([
            f"# {name}",
            f"q(s) = {poly_text(q_poly)}",
            "q = [" + ", ".join(num(float(x)) for x in q) + "]",  # type: ignore[arg-type]
            f"C(s) = d/c = {tf_text(controller)}",
            f"{signal} transfer = {tf_text(loop)}",
        ])

    @staticmethod
    def modal_table(dec: ModalDecomposition, q: Sequence[object]) -> str:
        rows = []
        for i, mode in enumerate(dec.modes):
            if isinstance(mode, RealMode):
                rows.append([str(i), "real", f"-{num(float(mode.p))}", num(mode.y.at(q)), "-"])
            elif isinstance(mode, ComplexMode):
                pole = f"-{num(float(mode.alpha))}±{num(float(mode.beta))}j"
                rows.append([str(i), "complex", pole, num(mode.a.at(q)), num(mode.b.at(q))])
        header = f"modes (signal={dec.signal}, m={dec.m}, theta={dec.theta})"
        return header + "\n" + _table(["mode", "kind", "pole", "y/a", "b"], rows)

    @staticmethod
    def hierarchy(rows: Sequence[HierarchyRow]) -> str:
        body = [
            [
                str(r.order),
                str(r.largest_block),
                r.status,
                num(r.objective),
                num(r.gamma),
                "[" + ", ".join(num(x) for x in r.q) + "]",
            ]
            for r in rows
        ]
        return _table(["order", "block", "status", "objective", "gamma", "q"], body)

    @staticmethod
    def certificates(certs: Sequence[Certificate]) -> str:
        if not certs:
            return "certificates: none"
        worst = max(c.residual for c in certs)
        min_eig = min(c.min_eigenvalue for c in certs)
        failing = [c.label for c in certs if not c.ok()]
        lines = [
            f"certificates: {len(certs)}",
            f"max residual: {num(worst)}",
            f"min gram eigenvalue: {num(min_eig)}",
        ]
        if failing:
            lines.append("failing: " + ", ".join(failing))
        return "\n".join(lines)

    @staticmethod
    def metrics(m: ResponseMetrics, violation: Optional[float] = None, oracle_error: Optional[float] = None) -> str:
        lines = [
            f"steady state: {num(m.steady_state)}",
            f"peak: {num(m.peak)} at t = {num(m.peak_time)}",
            f"overshoot: {num(m.overshoot)}",
            f"undershoot: {num(m.undershoot)}",
            f"settling time (2%): {num(m.settling_time)}",
        ]
        if m.drifting:
            lines.append("warning: steady state is still drifting at the end of the horizon")
        if not m.settled:
            lines.append("warning: response has not settled within the horizon")
        if violation is not None:
            lines.append(f"max bound violation: {num(violation)}")
        if oracle_error is not None:
            lines.append(f"closed form vs simulation: {num(oracle_error)}")
        return "\n".join(lines)

    @staticmethod
    def overapprox(o: Overapprox) -> str:
        header = (
            f"overapproximation: eps={num(o.eps)} theta={o.theta} "
            f"intervals={o.n_intervals} t_bar={num(o.t_bar)} band={num(o.band)}"
        )
        rows = [
            [str(i), num(o.tau_grid[i]), num(o.tau_grid[i + 1]), str(o.degrees[i]), num(o.errors[i])]
            for i in range(o.n_intervals)
        ]
        lines = [header, _table(["interval", "tau_lo", "tau_hi", "degree", "error"], rows)]
        for i, region in enumerate(o.regions):
            lines.append(f"region {i} ({region.label}):")
            lines += [f"  {p.to_text()} = 0" for p in region.eqs]
            lines += [f"  {p.to_text()} >= 0" for p in region.ineqs]
        return "\n".join(lines)

    @staticmethod
    def reproduce(rows: Sequence[ReproduceRow]) -> str:
        body = [
            [r.item, num(r.expected), num(r.obtained), num(r.tolerance), "ok" if r.ok else "MISMATCH"]
            for r in rows
        ]
        return _table(["item", "expected", "obtained", "tolerance", "result"], body)
