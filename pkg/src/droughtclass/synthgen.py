"""Seeded synthetic district-day weather with known seasonal regimes.

Each day of the year belongs to one regime; a district-day record is drawn
from that regime's independent Gaussian per parameter, shifted by a small
per-district offset and clamped to the physical ranges.  The three default
regimes follow the qualitative contrasts of the reference cluster summary:
a wet monsoon (days 150-249), a cool dry winter (days 1-49 and 250-366) and
a hot transitional dry season (days 50-149).
"""

from __future__ import annotations

import calendar
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .errors import ConfigError
from .ingest import BOUNDING_BOX, DISTRICT, KEY_COLUMNS, WEATHER_PARAMETERS, Dataset, merge_and_clean

_BOUNDS = {"RH2M": (0.0, 100.0), "GWETTOP": (0.0, 1.0), "GWETROOT": (0.0, 1.0), "GWETPROF": (0.0, 1.0)}


@dataclass(frozen=True)
class RegimeSpec:
    name: str
    day_ranges: tuple[tuple[int, int], ...]
    means: dict[str, float]
    spreads: dict[str, float]
    moisture_band: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        for lo, hi in self.day_ranges:
            if not 1 <= lo <= hi <= 366:
                raise ConfigError(f"regime {self.name}: day range ({lo}, {hi}) outside [1, 366]")
        for p in WEATHER_PARAMETERS:
            if p not in self.means or p not in self.spreads:
                raise ConfigError(f"regime {self.name}: missing parameter {p}")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["day_ranges"] = [list(r) for r in self.day_ranges]
        out["moisture_band"] = list(self.moisture_band)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RegimeSpec":
        try:
            return cls(
                name=data["name"],
                day_ranges=tuple(tuple(int(v) for v in r) for r in data["day_ranges"]),
                means={k: float(v) for k, v in data["means"].items()},
                spreads={k: float(v) for k, v in data["spreads"].items()},
                moisture_band=tuple(data.get("moisture_band", (0.0, 1.0))),
            )
        except KeyError as exc:
            raise ConfigError(f"regime spec missing key {exc.args[0]}") from None


def _spec(name, days, band, **params):
    means = {p: v[0] for p, v in params.items()}
    spreads = {p: v[1] for p, v in params.items()}
    return RegimeSpec(name, days, means, spreads, band)


# (mean, spread) per parameter
DEFAULT_REGIMES = (
    _spec(
        "monsoon", ((150, 249),), (0.8, 0.9),
        ALLSKY_SFC_SW_DWN=(14.5, 0.9), T2M=(29.0, 0.5), T2MDEW=(25.5, 0.5), TS=(29.5, 0.6),
        QV2M=(20.8, 0.6), RH2M=(86.0, 1.8), PS=(99.9, 0.08), WS2M=(2.6, 0.15),
        GWETTOP=(0.85, 0.015), GWETROOT=(0.86, 0.015), GWETPROF=(0.84, 0.015),
    ),
    _spec(
        "winter", ((1, 49), (250, 366)), (0.6, 0.7),
        ALLSKY_SFC_SW_DWN=(13.0, 0.9), T2M=(20.0, 0.7), T2MDEW=(13.0, 0.8), TS=(19.5, 0.8),
        QV2M=(9.5, 0.5), RH2M=(69.0, 2.0), PS=(101.5, 0.08), WS2M=(0.9, 0.12),
        GWETTOP=(0.65, 0.015), GWETROOT=(0.67, 0.015), GWETPROF=(0.66, 0.015),
    ),
    _spec(
        "transitional", ((50, 149),), (0.4, 0.5),
        ALLSKY_SFC_SW_DWN=(21.5, 0.9), T2M=(27.0, 0.7), T2MDEW=(16.0, 0.8), TS=(29.0, 0.8),
        QV2M=(11.5, 0.5), RH2M=(55.0, 2.0), PS=(100.7, 0.08), WS2M=(2.3, 0.15),
        GWETTOP=(0.45, 0.015), GWETROOT=(0.50, 0.015), GWETPROF=(0.49, 0.015),
    ),
)

PRESETS = {
    "default": {"districts": 5, "years": (2012, 2013), "last_doy": None},
    # 38 districts, 2012-01-01 through 2024-06-30: ~173k rows
    "full": {"districts": 38, "years": (2012, 2024), "last_doy": 182},
}


@dataclass(frozen=True)
class SyntheticData:
    dataset: Dataset
    regime: np.ndarray  # regime index per dataset row
    regime_names: tuple[str, ...]
    regimes: tuple[RegimeSpec, ...] = field(repr=False, default=())


def day_table(regimes: Sequence[RegimeSpec]) -> np.ndarray:
    """Regime index for days 1..366 (position 0 unused); day 366 falls back to day 365's regime."""
    owner = np.full(367, -1)
    for i, reg in enumerate(regimes):
        for lo, hi in reg.day_ranges:
            span = owner[lo:hi + 1]
            if (span >= 0).any():
                clash = regimes[int(span[span >= 0][0])].name
                raise ConfigError(f"regimes {clash} and {reg.name} overlap in days {lo}-{hi}")
            owner[lo:hi + 1] = i
    gaps = np.flatnonzero(owner[1:366] < 0) + 1
    if len(gaps):
        raise ConfigError(f"regimes leave days uncovered, first {int(gaps[0])}")
    if owner[366] < 0:
        owner[366] = owner[365]
    return owner


def district_locations(count: int, seed: int) -> list[tuple[float, float]]:
    lat_lo, lat_hi, lon_lo, lon_hi = BOUNDING_BOX
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7]))
    seen, out = set(), []
    while len(out) < count:
        lat = round(float(rng.uniform(lat_lo + 0.2, lat_hi - 0.2)), 2)
        lon = round(float(rng.uniform(lon_lo + 0.2, lon_hi - 0.2)), 2)
        if (lat, lon) not in seen:
            seen.add((lat, lon))
            out.append((lat, lon))
    return out


def _district_frame(index, location, days, owner, regimes, seq) -> pd.DataFrame:
    rng = np.random.default_rng(seq)
    n = len(days)
    tags = owner[days["DOY"].to_numpy()]
    offsets = {p: rng.normal(0.0, 0.15, len(regimes)) for p in WEATHER_PARAMETERS}
    data = {DISTRICT: f"district_{index + 1:02d}", "LAT": location[0], "LON": location[1]}
    data["YEAR"] = days["YEAR"].to_numpy()
    data["DOY"] = days["DOY"].to_numpy()
    for p in WEATHER_PARAMETERS:
        mean = np.array([r.means[p] for r in regimes])
        spread = np.array([r.spreads[p] for r in regimes])
        values = mean[tags] + spread[tags] * (offsets[p][tags] + rng.standard_normal(n))
        lo, hi = _BOUNDS.get(p, (-np.inf, np.inf))
        data[p] = np.round(np.clip(values, lo, hi), 4)
    frame = pd.DataFrame(data)
    frame["REGIME"] = tags
    return frame


def generate(
    districts: int = 5,
    years: tuple[int, int] = (2012, 2013),
    regimes: Sequence[RegimeSpec] | None = None,
    seed: int = 42,
    last_doy: int | None = None,
) -> SyntheticData:
    """Generate one record per district per day over ``years`` (inclusive).

    ``last_doy`` truncates the final year.  Each district draws from its own
    child seed, so the output does not depend on generation order.
    """
    regimes = tuple(regimes) if regimes is not None else DEFAULT_REGIMES
    if districts < 1:
        raise ConfigError("districts must be at least 1")
    first, last = years
    if first > last:
        raise ConfigError(f"empty year range {years}")
    owner = day_table(regimes)
    rows = []
    for year in range(first, last + 1):
        n_days = 366 if calendar.isleap(year) else 365
        if year == last and last_doy is not None:
            n_days = min(n_days, last_doy)
        rows.append(pd.DataFrame({"YEAR": year, "DOY": np.arange(1, n_days + 1)}))
    days = pd.concat(rows, ignore_index=True)

    seqs = np.random.SeedSequence(seed).spawn(districts)
    locations = district_locations(districts, seed)
    frame = pd.concat(
        [_district_frame(i, locations[i], days, owner, regimes, seqs[i]) for i in range(districts)],
        ignore_index=True,
    )
    frame = frame.sort_values(list(KEY_COLUMNS), kind="mergesort").reset_index(drop=True)
    regime = frame.pop("REGIME").to_numpy()
    dataset = merge_and_clean([Dataset(frame)])
    return SyntheticData(dataset, regime, tuple(r.name for r in regimes), regimes)


def generate_preset(name: str = "default", seed: int = 42, regimes=None) -> SyntheticData:
    if name not in PRESETS:
        raise ConfigError(f"unknown synthetic preset {name!r}; choose from {sorted(PRESETS)}")
    return generate(regimes=regimes, seed=seed, **PRESETS[name])


def load_regimes(path: str | Path) -> tuple[RegimeSpec, ...]:
    data = json.loads(Path(path).read_text())
    items = data["regimes"] if isinstance(data, dict) else data
    return tuple(RegimeSpec.from_dict(d) for d in items)


def save_regimes(regimes: Sequence[RegimeSpec], path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps({"regimes": [r.to_dict() for r in regimes]}, indent=2) + "\n")
    return path
