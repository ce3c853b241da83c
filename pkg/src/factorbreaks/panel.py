"""Panel ingestion: CSV loading, per-series transformation, balancing.

The CSV layout follows the FRED-QD convention: first column holds period
labels, an optional second header row carries integer transformation codes
(1..7).  Transformed series are trimmed to a common balanced sample and,
by default, standardized to mean zero and unit sample variance.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateSeries,
    DomainError,
    InsufficientData,
    InvalidTransformCode,
    ParseError,
    ShapeError,
    UnbalancedPanel,
)

#: observations lost at the head of a series, per transformation code
_TRIM = {1: 0, 2: 1, 3: 2, 4: 0, 5: 1, 6: 2, 7: 2}

VALID_TCODES = frozenset(_TRIM)


@dataclass(frozen=True)
class RawPanel:
    """Untransformed panel as read from disk; may contain missing entries."""

    values: np.ndarray  # T0 x N, np.nan for missing
    series_ids: list[str]
    tcodes: list[int]
    time_index: list[str]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise ShapeError("panel values must be a 2-d array")
        T0, N = values.shape
        if not (len(self.series_ids) == len(self.tcodes) == N):
            raise ShapeError(
                f"got {N} columns, {len(self.series_ids)} ids, {len(self.tcodes)} tcodes"
            )
        if len(self.time_index) != T0:
            raise ShapeError("time index length does not match rows")
        for code in self.tcodes:
            if code not in VALID_TCODES:
                raise InvalidTransformCode(f"unknown transformation code {code}")


@dataclass(frozen=True)
class Panel:
    """Balanced, transformed panel ready for estimation.

    All entries are finite.  When ``standardized`` each column has mean
    zero and unit sample variance.
    """

    values: np.ndarray  # T x N
    series_ids: list[str]
    time_index: list[str]
    standardized: bool = False

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise ShapeError("panel values must be a 2-d array")
        T, N = values.shape
        if len(self.series_ids) != N:
            raise ShapeError("series_ids length does not match columns")
        if len(self.time_index) != T:
            raise ShapeError("time_index length does not match rows")
        if not np.isfinite(values).all():
            raise UnbalancedPanel("panel contains missing or non-finite entries")
        if self.standardized and T > 1:
            means = values.mean(axis=0)
            variances = values.var(axis=0, ddof=1)
            if np.abs(means).max() > 1e-10 or np.abs(variances - 1.0).max() > 1e-8:
                raise ShapeError("panel flagged standardized but is not")

    @property
    def n_periods(self) -> int:
        return self.values.shape[0]

    @property
    def n_series(self) -> int:
        return self.values.shape[1]

    def to_csv(self, path) -> None:
        """Write a snapshot of the (transformed) panel for inspection."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["period", *self.series_ids])
            for label, row in zip(self.time_index, self.values):
                writer.writerow([label, *(f"{x:.10g}" for x in row)])


@dataclass(frozen=True)
class BreakSpec:
    """Candidate break point: k is the 1-based index of the LAST pre-break period."""

    k: int
    T: int
    label: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.T - 1:
            raise DomainError(
                f"break index k={self.k} must satisfy 1 <= k <= T-1 with T={self.T}"
            )

    @property
    def pi(self) -> float:
        """Break fraction k/T, strictly inside (0, 1)."""
        return self.k / self.T

    @property
    def len_pre(self) -> int:
        return self.k

    @property
    def len_post(self) -> int:
        return self.T - self.k


def resolve_break(panel: Panel, break_point: int | str | BreakSpec) -> BreakSpec:
    """Turn a period label or 1-based index into a BreakSpec for this panel."""
    if isinstance(break_point, BreakSpec):
        if break_point.T != panel.n_periods:
            raise ShapeError("BreakSpec was built for a different sample length")
        return break_point
    if isinstance(break_point, str):
        try:
            k = panel.time_index.index(break_point) + 1
        except ValueError:
            raise DomainError(
                f"break label {break_point!r} not found in the panel index"
            ) from None
        return BreakSpec(k=k, T=panel.n_periods, label=break_point)
    return BreakSpec(k=int(break_point), T=panel.n_periods)


def load_csv(path, header_rows: int = 2) -> RawPanel:
    """Read a panel CSV.

    Row 1 must hold series names (first cell is the time column label).
    With ``header_rows=2`` row 2 holds the integer transformation codes;
    with ``header_rows=1`` every code defaults to 1 (no transformation).
    Empty cells and the usual NA spellings become missing values.
    """
    if header_rows not in (1, 2):
        raise ParseError(f"header_rows must be 1 or 2, got {header_rows}")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if len(rows) < header_rows + 3:
        raise InsufficientData(
            f"need at least 3 data rows, file has {max(0, len(rows) - header_rows)}"
        )
    width = len(rows[0])
    if width < 2:
        raise ParseError("expected a time column plus at least one series")
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"row {i + 1} has {len(row)} cells, expected {width}")

    series_ids = [c.strip() for c in rows[0][1:]]
    if header_rows == 2:
        tcodes = []
        for cell in rows[1][1:]:
            try:
                code = int(float(cell))
            except ValueError:
                raise InvalidTransformCode(
                    f"transformation code {cell!r} is not an integer"
                ) from None
            tcodes.append(code)
    else:
        tcodes = [1] * len(series_ids)

    data_rows = rows[header_rows:]
    time_index = [r[0].strip() for r in data_rows]
    values = np.empty((len(data_rows), len(series_ids)))
    missing = {"", "na", "nan", "n/a", ".", "null"}
    for t, row in enumerate(data_rows):
        for j, cell in enumerate(row[1:]):
            cell = cell.strip()
            if cell.lower() in missing:
                values[t, j] = np.nan
            else:
                try:
                    values[t, j] = float(cell)
                except ValueError:
                    raise ParseError(
                        f"cell ({t + header_rows + 1}, {j + 2}) is not numeric: {cell!r}"
                    ) from None
    return RawPanel(values=values, series_ids=series_ids, tcodes=tcodes,
                    time_index=time_index)


def apply_transform(series: np.ndarray, code: int) -> np.ndarray:
    """Apply one FRED-style transformation code to a single series.

    1: x            4: log x
    2: diff x       5: diff log x
    3: diff^2 x     6: diff^2 log x
                    7: diff(x_t / x_{t-1} - 1)

    The output is shorter than the input by the differencing order
    (0, 1, 2, 0, 1, 2, 2 respectively).
    """
    if code not in VALID_TCODES:
        raise InvalidTransformCode(f"unknown transformation code {code}")
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ShapeError("apply_transform expects a 1-d series")
    trim = _TRIM[code]
    if x.shape[0] <= trim:
        raise InsufficientData(
            f"code {code} needs more than {trim} observations, got {x.shape[0]}"
        )
    finite = x[np.isfinite(x)]
    if code in (4, 5, 6) and finite.size and finite.min() <= 0:
        raise DomainError(f"code {code} requires strictly positive values")
    if code == 7 and finite.size and finite.min() <= 0:
        raise DomainError("code 7 requires strictly positive values")

    if code == 1:
        return x.copy()
    if code == 2:
        return np.diff(x)
    if code == 3:
        return np.diff(x, n=2)
    if code == 4:
        return np.log(x)
    if code == 5:
        return np.diff(np.log(x))
    if code == 6:
        return np.diff(np.log(x), n=2)
    # code 7: first difference of the period-on-period growth rate
    return np.diff(x[1:] / x[:-1] - 1.0)


def finalize(raw: RawPanel, standardize: bool = True) -> Panel:
    """Transform every series, balance the sample, optionally standardize.

    All series are aligned on their final observation: the first
    ``max(differencing order)`` rows of the panel are dropped so the
    result is rectangular.  Series with interior missing values are
    rejected rather than imputed.
    """
    T0, N = raw.values.shape
    max_trim = max(_TRIM[c] for c in raw.tcodes) if N else 0
    T = T0 - max_trim
    if T < 4:
        raise InsufficientData(
            f"only {T} rows would remain after trimming {max_trim}; need >= 4"
        )
    out = np.empty((T, N))
    for j in range(N):
        transformed = apply_transform(raw.values[:, j], raw.tcodes[j])
        out[:, j] = transformed[len(transformed) - T:]
    if not np.isfinite(out).all():
        bad = [raw.series_ids[j] for j in np.where(~np.isfinite(out).all(axis=0))[0]]
        raise UnbalancedPanel(f"missing values remain in series: {bad[:10]}")

    if standardize:
        means = out.mean(axis=0)
        sds = out.std(axis=0, ddof=1)
        degenerate = np.where(sds <= 1e-14 * np.maximum(1.0, np.abs(means)))[0]
        if degenerate.size:
            bad = [raw.series_ids[j] for j in degenerate]
            raise DegenerateSeries(f"zero-variance series cannot be standardized: {bad}")
        out = (out - means) / sds

    return Panel(
        values=out,
        series_ids=list(raw.series_ids),
        time_index=list(raw.time_index[max_trim:]),
        standardized=standardize,
    )
