"""Core grid and tile types shared by every stage of the pipeline.

A pixel is treated as a signal indexed by (location, time, band).  The
containers here are thin, immutable wrappers around float32 numpy arrays:

* ``ObservationSeries`` -- irregular per-date band planes with a cloud mask,
* ``TimeSeriesStack``   -- exactly 12 month-of-year slots (1..12),
* ``CompositeStack``    -- one static plane per band,
* ``TileRecord``        -- everything known about one tile plus its target.

Missing data is encoded as NaN inside the planes; only ``ObservationSeries``
carries an explicit validity mask because cloud flags are per-observation
metadata rather than a property of the stored value.

All containers freeze their arrays (``writeable=False``) on construction and
are safe to share across threads.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

# Canonical band order for the optical composite stack.
LANDSAT_BANDS = ("red", "green", "blue", "nir", "swir1", "swir2", "thermal")
NL_BAND = "nl"
NDVI_BAND = "ndvi"

# Physical range per band kind: (low, high); None means unbounded on that side.
# Thermal is treated as a generic non-negative band and is deliberately not
# range-checked against [0, 1].
BAND_RANGES = {
    "red": (0.0, 1.0),
    "green": (0.0, 1.0),
    "blue": (0.0, 1.0),
    "nir": (0.0, 1.0),
    "swir1": (0.0, 1.0),
    "swir2": (0.0, 1.0),
    "thermal": (0.0, None),
    "nl": (0.0, None),
    "ndvi": (-1.0, 1.0),
}

BAND_UNITS = {
    "red": "reflectance",
    "green": "reflectance",
    "blue": "reflectance",
    "nir": "reflectance",
    "swir1": "reflectance",
    "swir2": "reflectance",
    "thermal": "radiance",
    "nl": "radiance",
    "ndvi": "index",
}

MONTH_LABELS = tuple(f"m{m:02d}" for m in range(1, 13))


def _freeze(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GeoRef:
    """Tile placement: center coordinates plus pixel geometry.

    Defaults follow the common tile convention of 224 x 224 pixels at 30 m,
    i.e. a 6.72 km ground span.  ``urban`` selects the displacement radius
    used by location jitter.
    """

    center_lon: float
    center_lat: float
    pixel_size_m: float = 30.0
    width_px: int = 224
    height_px: int = 224
    urban: bool = False

    def __post_init__(self):
        if self.pixel_size_m <= 0:
            raise ValueError(f"pixel_size_m must be > 0, got {self.pixel_size_m}")
        if self.width_px < 1 or self.height_px < 1:
            raise ValueError(
                f"tile must be at least 1x1 px, got {self.width_px}x{self.height_px}"
            )

    @property
    def ground_span_m(self) -> tuple[float, float]:
        return (self.width_px * self.pixel_size_m, self.height_px * self.pixel_size_m)


@dataclass(frozen=True)
class ObservationSeries:
    """Irregular dated observations of one tile.

    ``planes`` has shape (T, B, H, W); ``valid_mask`` has shape (T, H, W) and
    flags cloud-free pixels per visit.  Timestamps are day-resolution dates,
    strictly increasing in a well-formed series (aggregations sort
    defensively so shuffled input yields identical output).
    """

    timestamps: tuple[_dt.date, ...]
    bands: tuple[str, ...]
    planes: np.ndarray
    valid_mask: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        object.__setattr__(self, "bands", tuple(self.bands))
        planes = _freeze(self.planes, np.float32)
        mask = _freeze(self.valid_mask, bool)
        if planes.ndim != 4:
            raise ValueError(f"planes must be (T, B, H, W), got shape {planes.shape}")
        t, b, h, w = planes.shape
        if t != len(self.timestamps):
            raise ValueError(f"{t} plane slots for {len(self.timestamps)} timestamps")
        if b != len(self.bands):
            raise ValueError(f"{b} band planes for {len(self.bands)} band names")
        if mask.shape != (t, h, w):
            raise ValueError(f"valid_mask shape {mask.shape} != {(t, h, w)}")
        object.__setattr__(self, "planes", planes)
        object.__setattr__(self, "valid_mask", mask)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.planes.shape

    def band_index(self, band: str) -> int:
        try:
            return self.bands.index(band)
        except ValueError:
            raise KeyError(f"band {band!r} not in series (have {self.bands})") from None


@dataclass(frozen=True)
class TimeSeriesStack:
    """Exactly 12 month-of-year slots (1..12) of band planes, (12, B, H, W).

    Multi-year windows are collapsed to month-of-year before they reach this
    container, so slot j always means calendar month j.  The 12-slot rule is
    checked by :func:`validate_tile` (violations are data, not failures), so
    a malformed stack is constructible but will not validate.
    """

    bands: tuple[str, ...]
    planes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bands", tuple(self.bands))
        planes = _freeze(self.planes, np.float32)
        if planes.ndim != 4:
            raise ValueError(f"planes must be (12, B, H, W), got shape {planes.shape}")
        if planes.shape[1] != len(self.bands):
            raise ValueError(
                f"{planes.shape[1]} band planes for {len(self.bands)} band names"
            )
        object.__setattr__(self, "planes", planes)

    @property
    def height(self) -> int:
        return self.planes.shape[2]

    @property
    def width(self) -> int:
        return self.planes.shape[3]

    def band_index(self, band: str) -> int:
        try:
            return self.bands.index(band)
        except ValueError:
            raise KeyError(f"band {band!r} not in stack (have {self.bands})") from None

    def band_planes(self, band: str) -> np.ndarray:
        """(12, H, W) view of one band's monthly planes."""
        return self.planes[:, self.band_index(band), :, :]


@dataclass(frozen=True)
class CompositeStack:
    """Static per-band planes, (B, H, W), e.g. an annual median composite."""

    bands: tuple[str, ...]
    planes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bands", tuple(self.bands))
        planes = _freeze(self.planes, np.float32)
        if planes.ndim != 3:
            raise ValueError(f"planes must be (B, H, W), got shape {planes.shape}")
        if planes.shape[0] != len(self.bands):
            raise ValueError(
                f"{planes.shape[0]} band planes for {len(self.bands)} band names"
            )
        object.__setattr__(self, "planes", planes)

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    def band_index(self, band: str) -> int:
        try:
            return self.bands.index(band)
        except ValueError:
            raise KeyError(f"band {band!r} not in stack (have {self.bands})") from None

    def band_plane(self, band: str) -> np.ndarray:
        return self.planes[self.band_index(band)]


@dataclass(frozen=True)
class TileRecord:
    """One tile: composite bands, monthly NDVI, optional monthly Landsat,
    and the scalar regression target (nighttime-light proxy or wealth index).
    """

    tile_id: str
    georef: GeoRef
    composite: CompositeStack
    ndvi_monthly: TimeSeriesStack
    target: float
    landsat_monthly: Optional[TimeSeriesStack] = None


def _plane_range_violations(name: str, plane: np.ndarray, band: str) -> list[str]:
    lo, hi = BAND_RANGES.get(band, (None, None))
    finite = np.isfinite(plane)
    bad = np.zeros(plane.shape, dtype=bool)
    if lo is not None:
        bad |= finite & (plane < lo)
    if hi is not None:
        bad |= finite & (plane > hi)
    if not bad.any():
        return []
    r, c = np.argwhere(bad)[0][-2:]
    rng = f"[{lo},{hi}]" if hi is not None else f"[{lo},inf)"
    return [f"{name}: {int(bad.sum())} value(s) out of {rng}, first at ({r},{c})"]


def validate_tile(tile: TileRecord) -> list[str]:
    """Check every structural and physical-range invariant of a tile.

    Returns a list of human-readable violations; an empty list means the tile
    is well-formed.  Pure: never mutates the tile, and two calls return
    identical lists.
    """
    v: list[str] = []
    g = tile.georef

    shapes = {tile.composite.planes.shape[-2:], tile.ndvi_monthly.planes.shape[-2:]}
    if tile.landsat_monthly is not None:
        shapes.add(tile.landsat_monthly.planes.shape[-2:])
    if len(shapes) != 1:
        v.append(f"plane dimensions differ across stacks: {sorted(shapes)}")
    expected = (g.height_px, g.width_px)
    for shape in shapes:
        if shape != expected:
            v.append(f"plane shape {shape} != georef {expected}")

    for stack_name, stack in (
        ("ndvi_monthly", tile.ndvi_monthly),
        ("landsat_monthly", tile.landsat_monthly),
    ):
        if stack is not None and stack.planes.shape[0] != 12:
            v.append(f"{stack_name}: month count {stack.planes.shape[0]} != 12")

    if len(set(tile.composite.bands)) != len(tile.composite.bands):
        v.append(f"duplicate composite band names: {tile.composite.bands}")
    for i, band in enumerate(tile.composite.bands):
        v.extend(
            _plane_range_violations(f"composite[{band}]", tile.composite.planes[i], band)
        )

    if tile.ndvi_monthly.bands != (NDVI_BAND,):
        v.append(f"ndvi_monthly bands {tile.ndvi_monthly.bands} != ('ndvi',)")
    else:
        v.extend(
            _plane_range_violations(
                "ndvi_monthly", tile.ndvi_monthly.planes[:, 0], NDVI_BAND
            )
        )

    if tile.landsat_monthly is not None:
        if tile.landsat_monthly.bands != LANDSAT_BANDS:
            v.append(
                f"landsat_monthly bands {tile.landsat_monthly.bands} != {LANDSAT_BANDS}"
            )
        else:
            for i, band in enumerate(LANDSAT_BANDS):
                v.extend(
                    _plane_range_violations(
                        f"landsat_monthly[{band}]",
                        tile.landsat_monthly.planes[:, i],
                        band,
                    )
                )

    if not np.isfinite(tile.target):
        v.append(f"target not finite: {tile.target}")
    return v
