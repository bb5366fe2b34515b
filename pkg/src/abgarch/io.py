"""Data ingestion, run configuration, and artifact emission.

Price files are CSV with a header row, ISO dates and positive closing
prices; returns are 100 times the log price change.  Run configuration is a
plain-text key-value file (``key = value`` lines, ``#`` comments,
space-separated lists); every key is schema-checked before any computation.
Artifacts are CSV or JSON with a metadata header carrying the package
version, the seed and a hash of the semantically meaningful configuration.

CSV numbers are written with 12 significant digits; re-ingesting an emitted
file and emitting it again reproduces it byte for byte.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, SpecError

__all__ = ["PriceSeries", "ingest", "RunConfig", "parse_config", "config_hash",
           "emit_csv", "read_csv_artifact", "emit_json", "format_number",
           "read_dates_file"]

_FMT = "%.12g"


def format_number(x: float) -> str:
    """Canonical 12-significant-digit rendering used in all CSV artifacts."""
    return _FMT % float(x)


@dataclass(frozen=True)
class PriceSeries:
    """Closing prices with strictly increasing dates and derived log returns."""

    dates: tuple
    prices: np.ndarray
    returns: np.ndarray

    @classmethod
    def from_prices(cls, dates, prices) -> "PriceSeries":
        dates = tuple(dates)
        prices = np.asarray(prices, dtype=float)
        if len(dates) != prices.shape[0]:
            raise DataError("dates and prices must have equal length")
        if prices.shape[0] < 2:
            raise DataError("need at least two prices")
        if np.any(prices <= 0):
            raise DataError("prices must be positive")
        for a, b in zip(dates, dates[1:]):
            if b == a:
                raise DataError(f"duplicate date {a.isoformat()}")
            if b < a:
                raise DataError(f"dates not increasing at {b.isoformat()}")
        returns = 100.0 * np.diff(np.log(prices))
        return cls(dates=dates, prices=prices, returns=returns)

    def index_of_date(self, date: _dt.date) -> int:
        """Index of the first observation on or after the given date."""
        for i, d in enumerate(self.dates):
            if d >= date:
                return i
        raise DataError(f"date {date.isoformat()} beyond the sample")


def _parse_date(text: str, where: str) -> _dt.date:
    try:
        return _dt.date.fromisoformat(text.strip())
    except ValueError as exc:
        raise DataError(f"{where}: bad date {text!r}") from exc


def ingest(path, date_col: str = "date", price_col: str = "price") -> PriceSeries:
    """Read a price CSV; malformed rows are reported with line numbers."""
    dates, prices = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = None
        for lineno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if row[0].lstrip().startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in row]
                for col in (date_col, price_col):
                    if col not in header:
                        raise DataError(f"line {lineno}: missing column {col!r}")
                di, pi = header.index(date_col), header.index(price_col)
                continue
            if len(row) != len(header):
                raise DataError(f"line {lineno}: expected {len(header)} fields, "
                                f"got {len(row)}")
            date = _parse_date(row[di], f"line {lineno}")
            try:
                price = float(row[pi])
            except ValueError as exc:
                raise DataError(f"line {lineno}: bad price {row[pi]!r}") from exc
            if not math.isfinite(price) or price <= 0:
                raise DataError(f"line {lineno}: non-positive price {row[pi]!r}")
            dates.append(date)
            prices.append(price)
    if header is None:
        raise DataError("empty file")
    try:
        return PriceSeries.from_prices(dates, prices)
    except DataError:
        raise


def read_dates_file(path) -> tuple:
    """One ISO date per line; blank lines and # comments allowed."""
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            out.append(_parse_date(text, f"line {lineno}"))
    if not out:
        raise DataError("no dates in file")
    return tuple(out)


# ---------------------------------------------------------------------------
# run configuration

_SCHEMA = {
    "seed": int,
    "horizon": int,
    "ar.breaks": (int,),
    "ar.drift": (float,),
    "ar.phi1": (float,),
    "ar.phi2": (float,),
    "ar.sigma2": float,
    "garch.breaks": (int,),
    "garch.omega": (float,),
    "garch.alpha": (float,),
    "garch.gamma": (float,),
    "garch.beta": (float,),
    "shock.dist": str,
    "shock.df": float,
    "sim.paths": int,
    "sim.length": int,
    "sim.burnin": int,
    "solve.count": int,
    "forecast.horizon": int,
    "forecast.h-start": float,
    "forecast.y-start": (float,),
    "acf.lag": int,
    "acf.offsets": (int,),
    "uncond.offsets": (int,),
    "input.date-col": str,
    "input.price-col": str,
    "input.price-col2": str,
    "fit.mean-lags": int,
    "fit.asymmetry": bool,
    "fit.breaks": (str,),
    "fit.free": (str,),
    "fit.prune": bool,
    "fit.restarts": int,
    "fitbiv.spillovers": bool,
    "fitbiv.asymmetry": bool,
    "fitbiv.shifts": (str,),
    "fitbiv.sign-entries": (str,),
    "breaks.min-segment": int,
    "breaks.level": float,
}

# keys that do not change computed results
_NON_SEMANTIC = {"input.date-col", "input.price-col", "input.price-col2"}

_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False}


@dataclass(frozen=True)
class RunConfig:
    """Validated key-value configuration for a CLI run."""

    values: dict

    def get(self, key, default=None):
        return self.values.get(key, default)

    def require(self, key):
        if key not in self.values:
            raise SpecError(f"config key {key!r} is required for this command")
        return self.values[key]


def _convert(key: str, raw: str):
    kind = _SCHEMA[key]
    if isinstance(kind, tuple):
        elem = kind[0]
        parts = raw.split()
        if elem is int:
            return tuple(int(p) for p in parts)
        if elem is float:
            return tuple(float(p) for p in parts)
        return tuple(parts)
    if kind is bool:
        low = raw.strip().lower()
        if low not in _BOOL:
            raise SpecError(f"config key {key!r}: bad boolean {raw!r}")
        return _BOOL[low]
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw.strip()


def parse_config(text: str) -> RunConfig:
    """Parse and schema-validate a key-value configuration."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise SpecError(f"config line {lineno}: expected key = value")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _SCHEMA:
            raise SpecError(f"config line {lineno}: unknown key {key!r}")
        if key in values:
            raise SpecError(f"config line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _convert(key, raw)
        except (ValueError, SpecError) as exc:
            raise SpecError(f"config line {lineno}: {exc}") from exc
    return RunConfig(values=values)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise SpecError(f"cannot read config {path!r}: {exc}") from exc


def config_hash(config: RunConfig) -> str:
    """Short hash over the semantically meaningful configuration."""
    items = sorted((k, v) for k, v in config.values.items()
                   if k not in _NON_SEMANTIC)
    blob = json.dumps(items, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# artifact emission

def _meta_lines(meta: dict):
    return [f"# {k}: {v}" for k, v in meta.items()]


def emit_csv(path, columns: dict, meta: dict) -> None:
    """Write a CSV artifact: '#' metadata header, column header, 12-digit numbers."""
    names = list(columns)
    arrays = [np.atleast_1d(np.asarray(columns[n])) for n in names]
    length = arrays[0].shape[0]
    if any(a.shape[0] != length for a in arrays):
        raise SpecError("columns must have equal length")
    with open(path, "w", newline="") as fh:
        for line in _meta_lines(meta):
            fh.write(line + "\n")
        fh.write(",".join(names) + "\n")
        for i in range(length):
            fields = []
            for a in arrays:
                v = a[i]
                fields.append(str(v) if isinstance(v, (str, np.str_))
                              else format_number(v))
            fh.write(",".join(fields) + "\n")


def read_csv_artifact(path):
    """Read back an emitted CSV; returns (meta, columns dict of float arrays)."""
    meta = {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body_start = 0
    for i, line in enumerate(lines):
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = val
            body_start = i + 1
        else:
            break
    if body_start >= len(lines):
        raise DataError("artifact has no header row")
    names = lines[body_start].split(",")
    cols = {n: [] for n in names}
    for line in lines[body_start + 1:]:
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(names):
            raise DataError("ragged artifact row")
        for n, p in zip(names, parts):
            cols[n].append(float(p))
    return meta, {n: np.asarray(v) for n, v in cols.items()}


def emit_json(path, payload: dict, meta: dict) -> None:
    """Write a JSON artifact with the metadata block under 'meta'."""
    with open(path, "w") as fh:
        json.dump({"meta": meta, "result": payload}, fh, indent=2,
                  sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, _dt.date):
        return obj.isoformat()
    raise TypeError(f"cannot serialise {type(obj)!r}")
