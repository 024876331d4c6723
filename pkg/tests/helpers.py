from pathlib import Path

HEADER = """-BEGIN HEADER-
NASA/POWER CERES/MERRA2 Native Resolution Daily Data
Dates (month/day/year): 01/01/2012 through 01/03/2012
Location: Latitude  23.81   Longitude 90.41
Value for missing model data cannot be computed or out of model availability range: -999
-END HEADER-
"""

COLUMNS = "LAT,LON,YEAR,DOY,ALLSKY_SFC_SW_DWN,T2M,T2MDEW,TS,QV2M,RH2M,PS,WS2M,GWETTOP,GWETROOT,GWETPROF"


def row(lat=23.81, lon=90.41, year=2012, doy=1, gwettop=0.7, t2m=20.0, rh2m=70.0):
    return f"{lat},{lon},{year},{doy},14.1,{t2m},12.5,19.8,9.4,{rh2m},101.4,1.1,{gwettop},0.68,0.66"


def write(tmp_path: Path, name: str, rows, header=True, columns=COLUMNS) -> Path:
    path = tmp_path / name
    text = (HEADER if header else "") + columns + "\n" + "".join(r + "\n" for r in rows)
    path.write_text(text)
    return path
