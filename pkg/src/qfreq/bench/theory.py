"""Order-of-growth curves for overlaying on measured resources.

All formulas use unit constants; hidden constants and polylog factors are
unknowable, so only slopes are ever compared against measurements.  Lower
bounds carry role=lower so a plot cannot mistake them for data.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable

from ..qsim.emulators import kdist_exponent


class UnknownCurve(KeyError):
    pass


@dataclass(frozen=True)
class TheoryCurve:
    label: str
    role: str  # "upper" | "lower"
    params: tuple[str, ...]
    formula: Callable[..., float]


def fk_query_exponent(k: int) -> float:
    """(1 - 1/k)(1 - 2^(k-2)/(2^k - 1))."""
    return (1 - 1 / k) * kdist_exponent(k)


CATALOGUE: dict[str, TheoryCurve] = {
    # query model
    "f0_query_upper": TheoryCurve("sqrt(n)/eps", "upper", ("n", "eps"), lambda n, eps: math.sqrt(n) / eps),
    "f0_query_lower": TheoryCurve("sqrt(n/eps)", "lower", ("n", "eps"), lambda n, eps: math.sqrt(n / eps)),
    "fk_query_exponent": TheoryCurve("(1-1/k)(1-2^(k-2)/(2^k-1))", "upper", ("k",), fk_query_exponent),
    "fk_query_upper": TheoryCurve(
        "n^((1-1/k)(1-2^(k-2)/(2^k-1)))/eps^2",
        "upper",
        ("n", "k", "eps"),
        lambda n, k, eps: n ** fk_query_exponent(k) / eps**2,
    ),
    "fk_query_lower": TheoryCurve(
        "n^(1/2-1/(2k))/eps", "lower", ("n", "k", "eps"), lambda n, k, eps: n ** (0.5 - 0.5 / k) / eps
    ),
    "fk_query_lower_collision": TheoryCurve("n^(1/3)", "lower", ("n",), lambda n: n ** (1 / 3)),
    "finf_query_lower": TheoryCurve("n^(2/3)", "lower", ("n",), lambda n: n ** (2 / 3)),
    "finf_query_lower_eps": TheoryCurve("1/eps", "lower", ("eps",), lambda eps: 1 / eps),
    # streaming model
    "f0_stream_passes": TheoryCurve("1/eps", "upper", ("eps",), lambda eps: 1 / eps),
    "f0_stream_space": TheoryCurve(
        "log(m) log(1/eps) + log(n)",
        "upper",
        ("n", "m", "eps"),
        lambda n, m, eps: math.log2(m) * math.log2(1 / eps) + math.log2(n),
    ),
    "f2_stream_passes": TheoryCurve("1/eps", "upper", ("eps",), lambda eps: 1 / eps),
    "fk_stream_passes": TheoryCurve(
        "m^(1-1/k)/eps", "upper", ("m", "k", "eps"), lambda m, k, eps: m ** (1 - 1 / k) / eps
    ),
    "finf_stream_passes": TheoryCurve("sqrt(n)", "upper", ("n",), lambda n: math.sqrt(n)),
    "finf_stream_space": TheoryCurve("log(m)^2", "upper", ("m",), lambda m: math.log2(m) ** 2),
    "stream_ts_lower": TheoryCurve("log(n)", "lower", ("n",), lambda n: math.log2(n)),
    "finf_stream_ts_lower": TheoryCurve("sqrt(n)", "lower", ("n",), lambda n: math.sqrt(n)),
    "exact_stream_ts_lower": TheoryCurve("n", "lower", ("n",), lambda n: float(n)),
    "approx_stream_ts_lower": TheoryCurve("1/eps", "lower", ("eps",), lambda eps: 1 / eps),
}

GRID_KEYS = ("n", "m", "k", "eps")


def evaluate(curve_id: str, **params: float) -> float:
    curve = lookup(curve_id)
    missing = [p for p in curve.params if p not in params]
    if missing:
        raise ValueError(f"{curve_id} needs {', '.join(missing)}")
    return float(curve.formula(*(params[p] for p in curve.params)))


def lookup(curve_id: str) -> TheoryCurve:
    try:
        return CATALOGUE[curve_id]
    except KeyError:
        raise UnknownCurve(
            f"unknown curve {curve_id!r}; known: {', '.join(sorted(CATALOGUE))}"
        ) from None


def parse_grid(specs: Iterable[str]) -> dict[str, list[float]]:
    """['n=256,1024', 'eps=0.1'] -> {'n': [256, 1024], 'eps': [0.1]}."""
    grid: dict[str, list[float]] = {}
    for spec in specs:
        key, sep, values = spec.partition("=")
        key = key.strip()
        if not sep or key not in GRID_KEYS:
            raise ValueError(f"bad grid entry {spec!r}; use key=v1,v2 with key in {GRID_KEYS}")
        grid[key] = [float(v) for v in values.split(",") if v.strip()]
    return grid


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() and abs(x) < 2**53 else format(x, ".10g")


def theory_table(curve_ids: Iterable[str], grid: dict[str, list[float]]) -> str:
    """CSV with one row per (curve, grid point); unused grid keys are left blank."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["curve", "label", "role", *GRID_KEYS, "value"])
    for cid in curve_ids:
        curve = lookup(cid)
        axes = [grid.get(p) for p in curve.params]
        if any(a is None for a in axes):
            missing = [p for p, a in zip(curve.params, axes) if a is None]
            raise ValueError(f"grid lacks {', '.join(missing)} for {cid}")
        for point in itertools.product(*axes):
            values = dict(zip(curve.params, point))
            row = [cid, curve.label, curve.role]
            row += [_fmt(values[k]) if k in values else "" for k in GRID_KEYS]
            row.append(_fmt(evaluate(cid, **values)))
            writer.writerow(row)
    return out.getvalue()
