"""Grid scans over floor inputs, Monte-Carlo clouds and table output."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import floors, multipartite
from .errors import ConvergenceError, InfeasibleError
from .floors import FloorResult
from .qstate import (
    connected_czz,
    entropy,
    log_negativity,
    mutual_information,
    purity,
    purity_P,
    sample_batch,
)

__all__ = [
    "FloorKind",
    "FLOOR_KINDS",
    "evaluate_floor",
    "Table",
    "ScanSpec",
    "PRESETS",
    "grid_scan",
    "montecarlo_cloud",
    "CHECKS",
    "check_violations",
    "format_number",
]


def format_number(x) -> str:
    """12 significant digits; non-numbers pass through unchanged."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, float, np.integer, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


@dataclass(frozen=True)
class FloorKind:
    params: tuple[str, ...]
    func: Callable[..., FloorResult]
    domain: tuple[tuple[float, float], ...]
    optional: tuple[tuple[str, float], ...] = ()


FLOOR_KINDS: dict[str, FloorKind] = {
    "xxzz": FloorKind(("cxx", "czz"), floors.floor_xx_zz, ((-1, 1), (-1, 1))),
    "xyz": FloorKind(("cxx", "cyy", "czz"), floors.floor_xx_yy_zz, ((-1, 1),) * 3),
    "purity-czz": FloorKind(("p", "czz"), floors.floor_purity_czz, ((0, 1), (-1, 1))),
    "mutual-info": FloorKind(("i", "s"), floors.floor_mutual_info, ((0, 2), (0, 2))),
    "local": FloorKind(("czz", "cxx", "z1", "z2"), floors.floor_local_stats, ((-1, 1),) * 4),
    "tri-robustness": FloorKind(
        ("cxxx", "c1zz", "czz1"),
        lambda cxxx, c1zz, czz1: multipartite.min_random_robustness((cxxx, c1zz, czz1)),
        ((-1, 1),) * 3,
    ),
    "tri-relent": FloorKind(
        ("cxxx", "c1zz", "czz1"),
        lambda cxxx, c1zz, czz1, tol=1e-6: multipartite.min_e3((cxxx, c1zz, czz1), tol=tol),
        ((-1, 1),) * 3,
        optional=(("tol", 1e-6),),
    ),
}


def evaluate_floor(kind: str, **values) -> FloorResult:
    if kind not in FLOOR_KINDS:
        raise ValueError(f"unknown floor kind {kind!r}; choose from {', '.join(FLOOR_KINDS)}")
    spec = FLOOR_KINDS[kind]
    missing = [p for p in spec.params if p not in values]
    if missing:
        raise ValueError(f"floor {kind} needs {', '.join(missing)}")
    allowed = set(spec.params) | {name for name, _ in spec.optional}
    extra = set(values) - allowed
    if extra:
        raise ValueError(f"floor {kind} does not take {', '.join(sorted(extra))}")
    args = [float(values[p]) for p in spec.params]
    options = {k: float(values[k]) for k, _ in spec.optional if k in values}
    return spec.func(*args, **options)


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_number(v) for v in row])
        return buf.getvalue()

    def to_json_obj(self) -> list[dict]:
        def plain(v):
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        return [{k: plain(v) for k, v in rec.items()} for rec in self.records()]


# --- grid scans ---------------------------------------------------------------


@dataclass(frozen=True)
class ScanSpec:
    """Sweep of one or two floor inputs with the rest held fixed.

    ``axes`` holds ``(name, start, stop, steps)`` tuples; each entry of
    ``kinds`` is evaluated at every grid point.
    """

    kinds: tuple[str, ...]
    axes: tuple[tuple[str, float, float, int], ...]
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kinds", tuple(self.kinds))
        object.__setattr__(self, "axes", tuple(tuple(a) for a in self.axes))
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("a scan sweeps one or two axes")
        for kind in self.kinds:
            if kind not in FLOOR_KINDS:
                raise ValueError(f"unknown floor kind {kind!r}")
        names = [a[0] for a in self.axes]
        for name, start, stop, steps in self.axes:
            if int(steps) < 1:
                raise ValueError(f"axis {name} needs at least one step")
            if int(steps) == 1 and start != stop:
                raise ValueError(f"axis {name}: a single step needs start == stop")
        for kind in self.kinds:
            spec = FLOOR_KINDS[kind]
            for p, (lo, hi) in zip(spec.params, spec.domain):
                if p in names:
                    name, start, stop, _ = self.axes[names.index(p)]
                    if min(start, stop) < lo or max(start, stop) > hi:
                        raise ValueError(f"axis {p} range outside [{lo}, {hi}]")
                elif p not in self.fixed:
                    raise ValueError(f"floor {kind} needs {p} as an axis or fixed value")

    @classmethod
    def from_dict(cls, data: dict) -> "ScanSpec":
        kinds = data.get("kinds") or [data["kind"]]
        axes = [(a["name"], a["start"], a["stop"], a["steps"]) for a in data["axes"]]
        return cls(tuple(kinds), tuple(axes), dict(data.get("fixed", {})))

    @classmethod
    def load(cls, path) -> "ScanSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def grid(self) -> list[dict]:
        values = [np.linspace(s, e, int(n)) for _, s, e, n in self.axes]
        names = [a[0] for a in self.axes]
        points = []
        for combo in np.array(np.meshgrid(*values, indexing="ij")).reshape(len(names), -1).T:
            # round away linspace noise so 0.2 prints as 0.2
            points.append({n: float(np.round(v, 12)) for n, v in zip(names, combo)})
        return points


def _kind_columns(kind: str) -> list[str]:
    cols = [kind, f"{kind}_status"]
    if kind == "purity-czz":
        cols += [f"{kind}_region", f"{kind}_lower_bound"]
    return cols


def _kind_cells(kind: str, inputs: dict) -> list:
    spec = FLOOR_KINDS[kind]
    args = {p: inputs[p] for p in spec.params}
    args.update({k: inputs[k] for k, _ in spec.optional if k in inputs})
    extra = 2 if kind == "purity-czz" else 0
    try:
        res = evaluate_floor(kind, **args)
    except InfeasibleError as exc:
        return ["infeasible", exc.region or "infeasible"] + [""] * extra
    except ConvergenceError:
        return ["nonconverged", "nonconverged"] + [""] * extra
    cells = [res.value, res.status]
    if kind == "purity-czz":
        cells += [res.region or "", res.lower_bound if res.lower_bound is not None else ""]
    return cells


def grid_scan(spec: ScanSpec) -> Table:
    """Evaluate every floor of ``spec`` on its grid, one row per point.

    Infeasible points carry the literal ``infeasible`` in the value column.
    """
    axis_names = [a[0] for a in spec.axes]
    columns = axis_names + [c for kind in spec.kinds for c in _kind_columns(kind)]
    table = Table(columns)
    for point in spec.grid():
        inputs = {**spec.fixed, **point}
        row = [point[n] for n in axis_names]
        for kind in spec.kinds:
            row += _kind_cells(kind, inputs)
        table.rows.append(row)
    return table


PRESETS: dict[str, ScanSpec] = {
    "fig1": ScanSpec(("mutual-info",), (("i", 0.0, 2.0, 21), ("s", 0.0, 2.0, 21))),
    "fig2": ScanSpec(("purity-czz",), (("p", 0.0, 1.0, 21), ("czz", 0.0, 1.0, 21))),
    "fig3": ScanSpec(("tri-relent",), (("c1zz", -1.0, 1.0, 11), ("czz1", -1.0, 1.0, 11)), {"cxxx": 1.0}),
    "fig4": ScanSpec(("local", "xxzz"), (("cxx", 0.0, 1.0, 51),), {"czz": 0.9, "z1": 0.3, "z2": 0.2}),
}


# --- Monte-Carlo ----------------------------------------------------------------

MC_COLUMNS = ["P", "Q", "connected_czz", "E_N", "I", "S"]


def montecarlo_cloud(family, n: int, seed, chunk: int = 20000) -> Table:
    """Sample ``n`` states and tabulate their functionals (deterministic per seed).

    Columns: rescaled purity ``P``, purity ``Q``, connected ``<zz>``,
    log-negativity, mutual information and entropy (bits).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    states = sample_batch(family, n, seed)
    cols = {c: np.empty(n) for c in MC_COLUMNS}
    for lo in range(0, n, chunk):
        r = states[lo : lo + chunk]
        cols["P"][lo : lo + len(r)] = purity_P(r)
        cols["Q"][lo : lo + len(r)] = purity(r)
        cols["connected_czz"][lo : lo + len(r)] = connected_czz(r)
        cols["E_N"][lo : lo + len(r)] = log_negativity(r)
        cols["I"][lo : lo + len(r)] = mutual_information(r)
        cols["S"][lo : lo + len(r)] = entropy(r)
    table = Table(list(MC_COLUMNS))
    table.rows = np.column_stack([cols[c] for c in MC_COLUMNS]).tolist()
    return table


def _th1(t):
    q, c = np.array(t.column("Q")), np.array(t.column("connected_czz"))
    return q + c / 2 > 1 + 1e-12


def _boundary_i(t):
    p, c = np.array(t.column("P")), np.array(t.column("connected_czz"))
    return p < c**2 / 3 - 1e-12


def _elower(t):
    q, c, e = (np.array(t.column(k)) for k in ("Q", "connected_czz", "E_N"))
    with np.errstate(divide="ignore"):
        bound = np.where(q + c / 2 > 1, np.log2(np.maximum(q + c / 2, 1e-300)), 0.0)
    return e < bound - 1e-9


# check name -> per-record violation mask
CHECKS: dict[str, Callable[[Table], np.ndarray]] = {
    "th1": _th1,
    "boundary-I": _boundary_i,
    "elower": _elower,
}


def check_violations(table: Table, check: str) -> int:
    if check not in CHECKS:
        raise ValueError(f"unknown check {check!r}; choose from {', '.join(CHECKS)}")
    return int(np.count_nonzero(CHECKS[check](table)))

