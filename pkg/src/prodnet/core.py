"""Domain model, ingestion, and validation for production-network analytics.

The economy is a directed network of industries. Row i of the technical-
coefficient matrix A holds industry i's spending shares on each input good,
so A is substochastic by rows: a_ij >= 0 and sum_j a_ij + labor_share_i = 1
with a strictly positive labor share. Consumption shares describe how
household spending splits across goods. All downstream algebra (Leontief
inverses, Domar weights, price propagation) commits to this row convention;
transposes elsewhere derive from it.

Two file formats are accepted for an economy: a JSON document with explicit
coefficient data, or a delimited grid whose first row carries labor shares,
middle block the coefficient matrix, and last row consumption shares. Raw
monetary input-output tables (an n x n flow matrix plus labor-payment and
final-sale columns) are normalized into coefficient form by
:func:`from_io_table`.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """Malformed, missing, or dimensionally inconsistent input file."""


class ValidationError(ValueError):
    """Input data violates a model invariant (reported with location and size)."""


class InternalConsistencyError(RuntimeError):
    """Two routes that must agree algebraically disagreed: a bug trap, not user error."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances for the accounting identities.

    The identities are exact in the model; real tables violate them, so each
    check carries a configurable tolerance.
    """

    row_sum: float = 1e-9        # |sum_j a_ij + labor_i - 1| per row
    share_sum: float = 1e-9      # |sum shares - 1| for consumption/preference vectors
    labor_floor: float = 1e-9    # minimum admissible labor share
    balance_rel: float = 1e-6    # relative tolerance for monetary-table balances
    labor_consistency: float = 1e-9  # explicit vs inferred labor shares

    def replace(self, **kwargs) -> "Tolerances":
        current = {f.name: getattr(self, f.name) for f in fields(self)}
        unknown = set(kwargs) - set(current)
        if unknown:
            raise SchemaError(f"unknown tolerance name(s): {sorted(unknown)}")
        current.update(kwargs)
        return Tolerances(**current)


def _as_vector(x, n: int | None, what: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise SchemaError(f"{what} must be a 1-d vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise SchemaError(f"{what} has length {v.shape[0]}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise SchemaError(f"{what} contains non-finite entries")
    return v


def _as_square(x, n: int | None, what: str) -> np.ndarray:
    m = np.asarray(x, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SchemaError(f"{what} must be a square matrix, got shape {m.shape}")
    if n is not None and m.shape[0] != n:
        raise SchemaError(f"{what} is {m.shape[0]}x{m.shape[1]}, expected {n}x{n}")
    if not np.all(np.isfinite(m)):
        raise SchemaError(f"{what} contains non-finite entries")
    return m


def _freeze(*arrays: np.ndarray) -> None:
    for a in arrays:
        a.flags.writeable = False


@dataclass(frozen=True)
class Economy:
    """Coefficient form of the industry network.

    Immutable after construction (arrays are marked read-only); shape and
    finiteness are enforced here, while the accounting invariants are checked
    by :func:`validate` so that defective economies can still be constructed
    and reported on.
    """

    A: np.ndarray
    labor_shares: np.ndarray
    consumption_shares: np.ndarray
    preferences: np.ndarray | None = None
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        A = _as_square(self.A, None, "coefficient matrix A")
        n = A.shape[0]
        labor = _as_vector(self.labor_shares, n, "labor_shares")
        cons = _as_vector(self.consumption_shares, n, "consumption_shares")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "labor_shares", labor)
        object.__setattr__(self, "consumption_shares", cons)
        _freeze(A, labor, cons)
        if self.preferences is not None:
            pref = _as_vector(self.preferences, n, "preferences")
            object.__setattr__(self, "preferences", pref)
            _freeze(pref)
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            if len(names) != n:
                raise SchemaError(f"names has length {len(names)}, expected {n}")
            object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def to_dict(self) -> dict:
        doc = {
            "n": self.n,
            "A": self.A.tolist(),
            "labor_shares": self.labor_shares.tolist(),
            "consumption_shares": self.consumption_shares.tolist(),
        }
        if self.preferences is not None:
            doc["preferences"] = self.preferences.tolist()
        if self.names is not None:
            doc["names"] = list(self.names)
        return doc


@dataclass(frozen=True)
class IOTable:
    """Monetary input-output table: flows[i, j] is the payment from industry i
    to industry j, alongside labor payments and final (household) sales."""

    flows: np.ndarray
    labor_payments: np.ndarray
    final_sales: np.ndarray

    def __post_init__(self):
        flows = _as_square(self.flows, None, "flow matrix")
        n = flows.shape[0]
        labor = _as_vector(self.labor_payments, n, "labor_payments")
        sales = _as_vector(self.final_sales, n, "final_sales")
        object.__setattr__(self, "flows", flows)
        object.__setattr__(self, "labor_payments", labor)
        object.__setattr__(self, "final_sales", sales)
        _freeze(flows, labor, sales)

    @property
    def n(self) -> int:
        return self.flows.shape[0]

    @property
    def expenditures(self) -> np.ndarray:
        """Total spending per industry: intermediate purchases plus labor."""
        return self.flows.sum(axis=1) + self.labor_payments

    @property
    def revenues(self) -> np.ndarray:
        """Total sales per industry: intermediate sales plus household sales."""
        return self.flows.sum(axis=0) + self.final_sales

    @property
    def total_output(self) -> float:
        """Sum of industry revenues (gross monetary output)."""
        return float(self.revenues.sum())

    @property
    def total_consumption(self) -> float:
        """Total household spending (final consumption)."""
        return float(self.final_sales.sum())

    def to_dict(self) -> dict:
        return {
            "flows": self.flows.tolist(),
            "labor_payments": self.labor_payments.tolist(),
            "final_sales": self.final_sales.tolist(),
        }


@dataclass(frozen=True)
class TFPConfig:
    """Parameters of the knowledge production process.

    alpha scales returns to exogenous endowments, beta the strength of
    spillovers across the network; lam holds the endowment growth rates,
    chi the innate per-industry productivity factors (time-constant),
    endowments the initial endowment levels, and stocks0 the initial
    productivity stocks.
    """

    alpha: float
    beta: float
    lam: np.ndarray
    chi: np.ndarray
    endowments: np.ndarray
    stocks0: np.ndarray

    def __post_init__(self):
        lam = _as_vector(self.lam, None, "lambda")
        n = lam.shape[0]
        chi = _as_vector(self.chi, n, "chi")
        endow = _as_vector(self.endowments, n, "endowments")
        z0 = _as_vector(self.stocks0, n, "stocks0")
        if not (0.0 < self.alpha <= 1.0):
            raise ValidationError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not (0.0 <= self.beta < 1.0):
            raise ValidationError(f"beta must lie in [0, 1), got {self.beta}")
        if np.any(z0 <= 0):
            raise ValidationError("stocks0 must be strictly positive componentwise")
        if np.any(chi <= 0):
            raise ValidationError("chi must be strictly positive componentwise")
        if np.any(endow <= 0):
            raise ValidationError("endowments must be strictly positive componentwise")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "endowments", endow)
        object.__setattr__(self, "stocks0", z0)
        _freeze(lam, chi, endow, z0)

    @property
    def n(self) -> int:
        return self.lam.shape[0]

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "lambda": self.lam.tolist(),
            "chi": self.chi.tolist(),
            "endowments": self.endowments.tolist(),
            "stocks0": self.stocks0.tolist(),
        }


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "residual": self.residual,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> tuple[CheckResult, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            line = f"{status}  {c.name:<24s} residual={c.residual:.3e}"
            if c.detail:
                line += f"  ({c.detail})"
            lines.append(line)
        lines.append(("ALL CHECKS PASS" if self.passed else "VALIDATION FAILED"))
        return "\n".join(lines)


def validate(economy: Economy, tolerances: Tolerances = Tolerances()) -> ValidationReport:
    """Check every accounting invariant of an economy and report residuals.

    Never raises: defective economies produce a failing report. ``load_economy``
    turns a failing report into a :class:`ValidationError`.
    """
    tol = tolerances
    A = economy.A
    labor = economy.labor_shares
    cons = economy.consumption_shares
    checks: list[CheckResult] = []

    neg = float(max(0.0, -A.min()))
    detail = ""
    if neg > 0:
        i, j = np.unravel_index(np.argmin(A), A.shape)
        detail = f"a[{i},{j}] = {A[i, j]:.6g}"
    checks.append(CheckResult("nonnegative_coefficients", neg == 0.0, neg, detail))

    row_excess = A.sum(axis=1) + labor - 1.0
    worst = int(np.argmax(np.abs(row_excess)))
    residual = float(np.abs(row_excess).max())
    checks.append(
        CheckResult(
            "row_sums",
            residual <= tol.row_sum,
            residual,
            f"row {worst} sums to {A[worst].sum() + labor[worst]:.10g} "
            f"(excess {row_excess[worst]:+.6g})",
        )
    )

    lmin = float(labor.min())
    checks.append(
        CheckResult(
            "labor_floor",
            lmin >= tol.labor_floor,
            max(0.0, tol.labor_floor - lmin),
            f"min labor share {lmin:.6g} at row {int(np.argmin(labor))}",
        )
    )

    cneg = float(max(0.0, -cons.min()))
    csum = float(abs(cons.sum() - 1.0))
    checks.append(
        CheckResult(
            "consumption_shares",
            cneg == 0.0 and csum <= tol.share_sum,
            max(cneg, csum),
            f"sum {cons.sum():.10g}, min {cons.min():.6g}",
        )
    )

    if economy.preferences is not None:
        pref = economy.preferences
        pneg = float(max(0.0, -pref.min()))
        psum = float(abs(pref.sum() - 1.0))
        checks.append(
            CheckResult(
                "preference_shares",
                pneg == 0.0 and psum <= tol.share_sum,
                max(pneg, psum),
                f"sum {pref.sum():.10g}, min {pref.min():.6g}",
            )
        )

    # Substochasticity ensures rho(A) < 1; measured directly as corroboration.
    from . import network  # deferred: network depends on core

    rho = network.spectral_radius(A)
    checks.append(
        CheckResult("spectral_radius", rho < 1.0, rho, f"rho(A) = {rho:.10g}")
    )

    return ValidationReport(tuple(checks))


# ---------------------------------------------------------------------------
# Monetary-table normalization
# ---------------------------------------------------------------------------

def _check_io_table(table: IOTable, tol: Tolerances) -> None:
    if table.flows.min() < 0 or table.labor_payments.min() < 0 or table.final_sales.min() < 0:
        raise ValidationError("monetary table has negative entries")
    inflow = table.revenues
    outflow = table.expenditures
    scale = np.maximum(np.maximum(np.abs(inflow), np.abs(outflow)), 1e-300)
    rel = np.abs(inflow - outflow) / scale
    worst = int(np.argmax(rel))
    if rel[worst] > tol.balance_rel:
        raise ValidationError(
            f"industry balance violated at row {worst}: inflow {inflow[worst]:.10g} "
            f"vs outflow {outflow[worst]:.10g} (relative residual {rel[worst]:.3e})"
        )
    wages = float(table.labor_payments.sum())
    spend = float(table.final_sales.sum())
    hh_rel = abs(wages - spend) / max(abs(wages), abs(spend), 1e-300)
    if hh_rel > tol.balance_rel:
        raise ValidationError(
            f"household balance violated: wages {wages:.10g} vs consumption "
            f"{spend:.10g} (relative residual {hh_rel:.3e})"
        )


def from_io_table(table: IOTable, tolerances: Tolerances = Tolerances()) -> Economy:
    """Normalize a monetary table into coefficient form.

    Each flow row is divided by the industry's total expenditure, so the
    result is scale-invariant; consumption shares come from final sales.
    """
    _check_io_table(table, tolerances)
    expenditure = table.expenditures
    if np.any(expenditure <= 0):
        row = int(np.argmin(expenditure))
        raise ValidationError(f"zero total expenditure in row {row}")
    A = table.flows / expenditure[:, None]
    labor = table.labor_payments / expenditure
    total_sales = table.final_sales.sum()
    if total_sales <= 0:
        raise ValidationError("total final sales must be positive")
    cons = table.final_sales / total_sales
    return Economy(A=A, labor_shares=labor, consumption_shares=cons)


def synthesize_io_table(economy: Economy, total_consumption: float = 1.0) -> IOTable:
    """Build a monetary table consistent with an economy at a chosen scale.

    Revenues solve m = A' m + final_sales, so both balance identities hold by
    construction; normalizing back recovers the economy exactly.
    """
    if total_consumption <= 0:
        raise ValueError("total_consumption must be positive")
    n = economy.n
    sales = economy.consumption_shares * total_consumption
    m = np.linalg.solve(np.eye(n) - economy.A.T, sales)
    flows = economy.A * m[:, None]
    labor = economy.labor_shares * m
    return IOTable(flows=flows, labor_payments=labor, final_sales=sales)


# ---------------------------------------------------------------------------
# File ingestion
# ---------------------------------------------------------------------------

def _read_text(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc


def _read_json(path: Path) -> dict:
    text = _read_text(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top-level JSON value must be an object")
    return doc


def _read_delimited(path: Path) -> list[list[float]]:
    text = _read_text(path)
    sample = text[:4096]
    try:
        dialect = csv.Sniffer().sniff(sample, delimiters=",;\t ")
    except csv.Error:
        dialect = csv.excel
    rows: list[list[float]] = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text), dialect), start=1):
        cells = [c for c in (cell.strip() for cell in row) if c]
        if not cells or cells[0].startswith("#"):
            continue
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise SchemaError(f"{path}: non-numeric value on line {lineno}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: no numeric rows found")
    width = len(rows[0])
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != width:
            raise SchemaError(
                f"{path}: ragged rows (row 1 has {width} columns, row {lineno} has {len(r)})"
            )
    return rows


def economy_from_dict(
    doc: dict, tolerances: Tolerances = Tolerances(), strict: bool = True
) -> Economy:
    """Build an Economy from a parsed JSON document.

    With ``strict`` (the default) a failing validation report raises; the
    lenient mode returns the defective economy so callers can print the full
    per-check report instead.
    """
    if "flows" in doc:
        table = io_table_from_dict(doc)
        return from_io_table(table, tolerances)
    if "A" not in doc:
        raise SchemaError("economy document must contain 'A' (or 'flows' for a monetary table)")
    A = _as_square(doc["A"], None, "A")
    n = A.shape[0]
    if "n" in doc and int(doc["n"]) != n:
        raise SchemaError(f"declared n={doc['n']} but A is {n}x{n}")
    if "labor_shares" in doc and doc["labor_shares"] is not None:
        labor = _as_vector(doc["labor_shares"], n, "labor_shares")
        inferred = 1.0 - A.sum(axis=1)
        gap = float(np.abs(labor - inferred).max())
        if strict and gap > tolerances.labor_consistency:
            row = int(np.argmax(np.abs(labor - inferred)))
            raise ValidationError(
                f"explicit labor share disagrees with 1 - row sum at row {row} "
                f"by {gap:.6g} (tolerance {tolerances.labor_consistency:g})"
            )
    else:
        labor = 1.0 - A.sum(axis=1)
    if "consumption_shares" not in doc:
        raise SchemaError("economy document must contain 'consumption_shares'")
    cons = _as_vector(doc["consumption_shares"], n, "consumption_shares")
    pref = doc.get("preferences")
    names = doc.get("names")
    economy = Economy(
        A=A,
        labor_shares=labor,
        consumption_shares=cons,
        preferences=None if pref is None else _as_vector(pref, n, "preferences"),
        names=None if names is None else tuple(names),
    )
    if strict:
        report = validate(economy, tolerances)
        if not report.passed:
            raise ValidationError(
                "economy fails validation:\n"
                + "\n".join(f"  {c.name}: {c.detail}" for c in report.failures)
            )
    return economy


def io_table_from_dict(doc: dict) -> IOTable:
    for key in ("flows", "labor_payments", "final_sales"):
        if key not in doc:
            raise SchemaError(f"monetary-table document missing '{key}'")
    flows = _as_square(doc["flows"], None, "flows")
    n = flows.shape[0]
    return IOTable(
        flows=flows,
        labor_payments=_as_vector(doc["labor_payments"], n, "labor_payments"),
        final_sales=_as_vector(doc["final_sales"], n, "final_sales"),
    )


def _economy_from_grid(
    rows: list[list[float]], tolerances: Tolerances, strict: bool = True
) -> Economy:
    # Grid layout: labor-share header row, n coefficient rows, consumption footer row.
    n = len(rows[0])
    if len(rows) != n + 2:
        raise SchemaError(
            f"delimited economy grid must have n+2 rows of width n, got {len(rows)}x{n}"
        )
    labor = np.asarray(rows[0], dtype=float)
    A = np.asarray(rows[1 : n + 1], dtype=float)
    cons = np.asarray(rows[n + 1], dtype=float)
    return economy_from_dict(
        {"A": A, "labor_shares": labor, "consumption_shares": cons}, tolerances, strict
    )


def _io_table_from_grid(rows: list[list[float]]) -> IOTable:
    # Grid layout: n rows of n flow columns, then labor-payments and final-sales columns.
    n = len(rows)
    if len(rows[0]) != n + 2:
        raise SchemaError(
            f"delimited monetary table must be n x (n+2), got {n}x{len(rows[0])}"
        )
    block = np.asarray(rows, dtype=float)
    return IOTable(
        flows=block[:, :n], labor_payments=block[:, n], final_sales=block[:, n + 1]
    )


def load_io_table(path: str | Path) -> IOTable:
    """Read a monetary table from JSON or a delimited n x (n+2) block."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return io_table_from_dict(_read_json(path))
    return _io_table_from_grid(_read_delimited(path))


def load_economy(
    path: str | Path, tolerances: Tolerances = Tolerances(), strict: bool = True
) -> Economy:
    """Read and validate an economy file.

    JSON documents may carry either coefficient data or a raw monetary table
    (detected by a 'flows' field); delimited files are disambiguated by shape,
    since the coefficient grid is (n+2) x n and the monetary block n x (n+2).
    With ``strict=False`` a defective coefficient economy is returned instead
    of raising, so callers can report every check.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        return economy_from_dict(_read_json(path), tolerances, strict)
    rows = _read_delimited(path)
    n_rows, n_cols = len(rows), len(rows[0])
    if n_rows == n_cols + 2:
        return _economy_from_grid(rows, tolerances, strict)
    if n_cols == n_rows + 2:
        return from_io_table(_io_table_from_grid(rows), tolerances)
    raise SchemaError(
        f"{path}: cannot interpret a {n_rows}x{n_cols} grid as an economy "
        "((n+2) x n) or monetary table (n x (n+2))"
    )


def tfp_config_from_dict(doc: dict) -> TFPConfig:
    """Build a TFPConfig from a parsed JSON document.

    'alpha', 'beta', and 'lambda' are required; 'chi', 'endowments', and
    'stocks0' default to unit vectors, which leaves steady-state rates
    unaffected (they enter levels only).
    """
    for key in ("alpha", "beta", "lambda"):
        if key not in doc:
            raise SchemaError(f"TFP config missing '{key}'")
    lam = _as_vector(doc["lambda"], None, "lambda")
    n = lam.shape[0]
    ones = np.ones(n)
    return TFPConfig(
        alpha=float(doc["alpha"]),
        beta=float(doc["beta"]),
        lam=lam,
        chi=_as_vector(doc["chi"], n, "chi") if "chi" in doc else ones,
        endowments=_as_vector(doc["endowments"], n, "endowments") if "endowments" in doc else ones,
        stocks0=_as_vector(doc["stocks0"], n, "stocks0") if "stocks0" in doc else ones,
    )


def load_tfp_config(path: str | Path) -> TFPConfig:
    return tfp_config_from_dict(_read_json(Path(path)))
