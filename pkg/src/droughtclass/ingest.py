"""Reading, validating and merging per-district daily weather CSV files.

The accepted format is the point-export CSV of the POWER satellite weather
service: an optional metadata block that ends with a ``-END HEADER-`` line,
then a column-header row and one row per day.  Plain CSV files that start
directly with the column-header row are accepted as well.
"""

from __future__ import annotations

import calendar
import io
import logging
import re
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
import pandas as pd

from .errors import ConflictError, EmptyInputError, ParseError, RangeError, SchemaError

log = logging.getLogger(__name__)

WEATHER_PARAMETERS = (
    "ALLSKY_SFC_SW_DWN",
    "T2M",
    "T2MDEW",
    "TS",
    "QV2M",
    "RH2M",
    "PS",
    "WS2M",
    "GWETTOP",
    "GWETROOT",
    "GWETPROF",
)
IDENTIFIERS = ("LAT", "LON", "YEAR", "DOY")
KEY_COLUMNS = IDENTIFIERS
DISTRICT = "DISTRICT"
CANONICAL_COLUMNS = (DISTRICT,) + IDENTIFIERS + WEATHER_PARAMETERS

DEFAULT_FILL_VALUE = -999.0
YEAR_WINDOW = (2012, 2024)
# (lat_min, lat_max, lon_min, lon_max)
BOUNDING_BOX = (20.5, 26.7, 88.0, 92.7)

END_HEADER = "-END HEADER-"

_ALIASES = {
    "LATITUDE": "LAT",
    "LONGITUDE": "LON",
    "MO": "MO",
    "MONTH": "MO",
    "DY": "DY",
    "DAY": "DY",
}
_LOCATION_RE = re.compile(
    r"latitude\s*[:=]?\s*(-?\d+(?:\.\d*)?).*?longitude\s*[:=]?\s*(-?\d+(?:\.\d*)?)",
    re.IGNORECASE,
)


@dataclass(frozen=True)
class WeatherRecord:
    """One district-day observation."""

    district: str
    latitude: float
    longitude: float
    year: int
    doy: int
    allsky_sfc_sw_dwn: float
    t2m: float
    t2mdew: float
    ts: float
    qv2m: float
    rh2m: float
    ps: float
    ws2m: float
    gwettop: float
    gwetroot: float
    gwetprof: float


@dataclass(frozen=True)
class CleaningReport:
    rows_in: int
    dropped_missing: int
    dropped_invalid: int
    rows_out: int
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "rows_in": self.rows_in,
            "dropped_missing": self.dropped_missing,
            "dropped_invalid": self.dropped_invalid,
            "rows_out": self.rows_out,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of district-day records backed by a DataFrame.

    ``frame`` holds :data:`CANONICAL_COLUMNS`.  A dataset returned by
    :func:`merge_and_clean` is sorted by (LAT, LON, YEAR, DOY), has no missing
    cells and no duplicate keys.  Treat the frame as read-only.
    """

    frame: pd.DataFrame
    cleaning: CleaningReport | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def district_count(self) -> int:
        return len(self.frame[["LAT", "LON"]].drop_duplicates())

    @property
    def source_labels(self) -> np.ndarray:
        return self.frame[DISTRICT].to_numpy()

    @property
    def records(self) -> Iterator[WeatherRecord]:
        for row in self.frame.itertuples(index=False):
            yield WeatherRecord(
                str(row.DISTRICT), float(row.LAT), float(row.LON), int(row.YEAR), int(row.DOY),
                *(float(getattr(row, p)) for p in WEATHER_PARAMETERS),
            )

    def column(self, name: str) -> np.ndarray:
        return self.frame[name].to_numpy(dtype=float)


def _split_header(text: str) -> tuple[list[str], str]:
    lines = text.splitlines()
    for i, line in enumerate(lines):
        if line.strip().upper() == END_HEADER:
            return lines[:i], "\n".join(lines[i + 1:])
    return [], text


def _location_from_header(meta: Sequence[str]) -> tuple[float, float] | None:
    for line in meta:
        m = _LOCATION_RE.search(line)
        if m:
            return float(m.group(1)), float(m.group(2))
    return None


def parse_power_csv(
    path: str | Path,
    fill_value: float = DEFAULT_FILL_VALUE,
    district: str | None = None,
) -> Dataset:
    """Parse one district file into an unsorted, uncleaned partial dataset.

    Cells equal to ``fill_value`` and empty cells become NaN.  Columns that are
    not model parameters are dropped with a warning.  When the file carries no
    LAT/LON columns the coordinates are read from the metadata block's
    ``Location`` line.  Dates may be given as YEAR/DOY or YEAR/MO/DY.
    """
    path = Path(path)
    district = district if district is not None else path.stem
    meta, body = _split_header(path.read_text())
    if not body.strip():
        raise EmptyInputError(f"{path}: no data section")
    raw = pd.read_csv(io.StringIO(body), dtype=str, keep_default_na=False, skipinitialspace=True)
    raw.columns = [_ALIASES.get(c.strip().upper(), c.strip().upper()) for c in raw.columns]
    if raw.empty:
        raise EmptyInputError(f"{path}: data section has a header but no rows")

    if "LAT" not in raw.columns or "LON" not in raw.columns:
        loc = _location_from_header(meta)
        if loc is None:
            missing = "LAT" if "LAT" not in raw.columns else "LON"
            raise SchemaError(f"{path}: missing mandatory column {missing}")
        raw["LAT"], raw["LON"] = str(loc[0]), str(loc[1])
    if "DOY" not in raw.columns:
        if "MO" not in raw.columns or "DY" not in raw.columns:
            raise SchemaError(f"{path}: missing mandatory column DOY")
    for name in ("YEAR",) + WEATHER_PARAMETERS:
        if name not in raw.columns:
            raise SchemaError(f"{path}: missing mandatory column {name}")

    wanted = set(IDENTIFIERS) | set(WEATHER_PARAMETERS) | {"MO", "DY"}
    extra = [c for c in raw.columns if c not in wanted]
    if extra:
        warnings.warn(f"{path}: ignoring columns {', '.join(extra)}", stacklevel=2)

    numeric = {}
    for name in [c for c in raw.columns if c in wanted]:
        text = raw[name].str.strip()
        values = pd.to_numeric(text, errors="coerce")
        bad = values.isna() & (text != "") & (text.str.upper() != "NAN")
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise ParseError(
                f"{path}: unparseable value {text.iloc[row]!r} at data row {row + 1}, column {name}"
            )
        values = values.astype(float)
        if name in WEATHER_PARAMETERS:
            values = values.mask(np.isclose(values, fill_value))
        numeric[name] = values

    frame = pd.DataFrame(numeric)
    if "DOY" not in frame.columns:
        frame["DOY"] = _day_of_year(frame["YEAR"], frame["MO"], frame["DY"])
    frame.insert(0, DISTRICT, district)
    return Dataset(frame[list(CANONICAL_COLUMNS)].reset_index(drop=True))


def _day_of_year(year: pd.Series, month: pd.Series, day: pd.Series) -> pd.Series:
    ok = year.notna() & month.notna() & day.notna()
    out = pd.Series(np.nan, index=year.index)
    dates = pd.to_datetime(
        pd.DataFrame({"year": year[ok], "month": month[ok], "day": day[ok]}).astype(int),
        errors="coerce",
    )
    out[ok] = dates.dt.dayofyear.astype(float)
    return out


def _invalid_rows(frame: pd.DataFrame) -> pd.Series:
    year, doy = frame["YEAR"], frame["DOY"]
    leap = year.astype(int).map(calendar.isleap)
    bad = (year != np.floor(year)) | (doy != np.floor(doy))
    bad |= (doy < 1) | (doy > 366) | ((doy == 366) & ~leap)
    bad |= (frame["RH2M"] < 0) | (frame["RH2M"] > 100)
    for name in ("GWETTOP", "GWETROOT", "GWETPROF"):
        bad |= (frame[name] < 0) | (frame[name] > 1)
    bad |= (frame["LAT"].abs() > 90) | (frame["LON"].abs() > 180)
    return bad


def merge_and_clean(parts: Iterable[Dataset], strict: bool = False) -> Dataset:
    """Merge partial datasets into one sorted, complete dataset.

    Rows with any missing cell are dropped, then rows that break a physical
    range rule (day-of-year, leap day, humidity and wetness bounds).  Rows
    outside the 2012-2024 window or the Bangladesh bounding box only warn,
    unless ``strict`` is set, in which case they raise :class:`RangeError`.
    """
    frames = [p.frame for p in parts]
    if not frames:
        raise EmptyInputError("no input parts")
    frame = pd.concat(frames, ignore_index=True)
    rows_in = len(frame)

    complete = frame[list(IDENTIFIERS + WEATHER_PARAMETERS)].notna().all(axis=1) & frame[DISTRICT].notna()
    frame = frame[complete]
    dropped_missing = rows_in - len(frame)

    invalid = _invalid_rows(frame) if len(frame) else pd.Series(dtype=bool)
    frame = frame[~invalid]
    dropped_invalid = int(invalid.sum())
    if frame.empty:
        raise EmptyInputError(f"no rows survive cleaning ({rows_in} read)")

    notes = []
    if dropped_missing:
        notes.append(f"dropped {dropped_missing} rows with missing values")
    if dropped_invalid:
        notes.append(f"dropped {dropped_invalid} rows violating range rules")
    lat_lo, lat_hi, lon_lo, lon_hi = BOUNDING_BOX
    checks = {
        "year outside 2012-2024": (frame["YEAR"] < YEAR_WINDOW[0]) | (frame["YEAR"] > YEAR_WINDOW[1]),
        "location outside the Bangladesh bounding box": (frame["LAT"] < lat_lo)
        | (frame["LAT"] > lat_hi)
        | (frame["LON"] < lon_lo)
        | (frame["LON"] > lon_hi),
    }
    for what, mask in checks.items():
        count = int(mask.sum())
        if count:
            msg = f"{count} rows with {what}"
            if strict:
                raise RangeError(msg)
            warnings.warn(msg, stacklevel=2)
            notes.append(msg)

    dup = frame.duplicated(list(KEY_COLUMNS), keep=False)
    if dup.any():
        first = frame[dup].iloc[0]
        raise ConflictError(
            "duplicate key (lat={}, lon={}, year={}, doy={}) in districts {}".format(
                first["LAT"], first["LON"], int(first["YEAR"]), int(first["DOY"]),
                sorted(set(frame[dup & (frame[list(KEY_COLUMNS)] == first[list(KEY_COLUMNS)]).all(axis=1)][DISTRICT])),
            )
        )

    frame = frame.astype({"YEAR": int, "DOY": int, DISTRICT: str})
    frame = frame.sort_values(list(KEY_COLUMNS), kind="mergesort").reset_index(drop=True)
    report = CleaningReport(rows_in, dropped_missing, dropped_invalid, len(frame), tuple(notes))
    for note in notes:
        log.info(note)
    return Dataset(frame[list(CANONICAL_COLUMNS)], report)


def ingest_files(
    paths: Sequence[str | Path],
    fill_value: float = DEFAULT_FILL_VALUE,
    strict: bool = False,
    n_jobs: int = 1,
) -> Dataset:
    """Parse every file (optionally in threads) and merge them."""
    if not paths:
        raise EmptyInputError("no input files given")
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            parts = list(pool.map(lambda p: parse_power_csv(p, fill_value), paths))
    else:
        parts = [parse_power_csv(p, fill_value) for p in paths]
    return merge_and_clean(parts, strict=strict)


def write_dataset(dataset: Dataset, path: str | Path) -> Path:
    """Write the canonical cleaned CSV (fixed column order, round-trip floats)."""
    path = Path(path)
    dataset.frame[list(CANONICAL_COLUMNS)].to_csv(path, index=False, lineterminator="\n")
    return path


def read_dataset(path: str | Path) -> Dataset:
    """Read a canonical cleaned CSV written by :func:`write_dataset`."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype={DISTRICT: str})
    except pd.errors.EmptyDataError:
        raise EmptyInputError(f"{path}: empty file") from None
    for name in CANONICAL_COLUMNS:
        if name not in frame.columns:
            raise SchemaError(f"{path}: missing mandatory column {name}")
    if frame.empty:
        raise EmptyInputError(f"{path}: no rows")
    return merge_and_clean([Dataset(frame[list(CANONICAL_COLUMNS)])])


def write_power_csv(frame: pd.DataFrame, path: str | Path, fill_value: float = DEFAULT_FILL_VALUE) -> Path:
    """Write one district's rows in the satellite-export layout (metadata block + table).

    Missing values are written as ``fill_value``.
    """
    path = Path(path)
    lat, lon = float(frame["LAT"].iloc[0]), float(frame["LON"].iloc[0])
    years = frame["YEAR"]
    header = [
        "-BEGIN HEADER-",
        "POWER daily point export (synthetic)",
        f"Dates: {int(years.min())} through {int(years.max())}",
        f"Location: Latitude  {lat}   Longitude {lon}",
        f"Value for missing model data cannot be computed or out of model availability range: {fill_value}",
        "Parameter(s):",
        *(f"{p}" for p in WEATHER_PARAMETERS),
        END_HEADER,
    ]
    table = frame[list(IDENTIFIERS + WEATHER_PARAMETERS)].copy()
    table[list(WEATHER_PARAMETERS)] = table[list(WEATHER_PARAMETERS)].fillna(fill_value)
    buf = io.StringIO()
    table.to_csv(buf, index=False, lineterminator="\n")
    path.write_text("\n".join(header) + "\n" + buf.getvalue())
    return path
