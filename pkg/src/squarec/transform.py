"""Chebyshev (chessboard) distance transform, scale normalization, level sets."""

from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi

from .grid import BinaryShape, ShapeError, ParseError
from .ioutil import atomic_write_bytes, atomic_write_text


@dataclass(frozen=True)
class ScalarField:
    """Dense real field over a shape's canvas; zero outside the occupied set."""

    values: np.ndarray
    support: BinaryShape

    def __post_init__(self):
        if self.values.shape != self.support.mask.shape:
            raise ShapeError("field/support shape mismatch")
        self.values.setflags(write=False)


@dataclass(frozen=True)
class LevelSet:
    """All cells sharing one raw Chebyshev distance k; t_value = k / rho_max."""

    level_index: int
    t_value: float
    cells: np.ndarray        # (n, ndim) canvas indices


def chebyshev_dt(shape: BinaryShape) -> ScalarField:
    """Raw chessboard distance to the nearest unoccupied cell (two-pass chamfer).

    Interior cells adjacent to the exterior get 1; exterior cells get 0.
    """
    dt = ndi.distance_transform_cdt(shape.mask, metric="chessboard")
    return ScalarField(dt.astype(np.float64), shape)


def normalize_dt(raw: ScalarField):
    """Scale the raw transform by its maximum; returns (t, rho_max)."""
    rho_max = int(raw.values.max())
    if rho_max < 1:
        raise ShapeError("normalize_dt expects a nonempty raw distance transform")
    return ScalarField(raw.values / rho_max, raw.support), rho_max


def _raw_levels(t: ScalarField):
    vals = np.unique(t.values[t.support.mask])
    rho_max = len(vals)
    k = np.rint(t.values * rho_max).astype(int)
    expected = np.arange(1, rho_max + 1) / rho_max
    if not np.allclose(vals, expected):
        raise ShapeError("field is not a normalized Chebyshev distance transform")
    return k, rho_max


def level_sets(t: ScalarField):
    """All discrete level sets of a normalized transform, ascending in t."""
    k, rho_max = _raw_levels(t)
    out = []
    for lvl in range(1, rho_max + 1):
        cells = np.argwhere(k == lvl)
        if cells.size == 0:
            raise ShapeError(f"level {lvl} is unexpectedly empty")
        out.append(LevelSet(lvl, lvl / rho_max, cells))
    return out


def nearest_level(t: ScalarField, t_star: float) -> LevelSet:
    """The level set whose t is closest to t_star; ties break toward the smaller level."""
    if not 0.0 < t_star <= 1.0:
        raise ShapeError("t_star must lie in (0, 1]")
    k, rho_max = _raw_levels(t)
    lvl = int(np.ceil(t_star * rho_max - 0.5))
    lvl = min(max(lvl, 1), rho_max)
    return LevelSet(lvl, lvl / rho_max, np.argwhere(k == lvl))


# --------------------------------------------------------------------------
# field files

def save_field(field: ScalarField, path) -> None:
    """FLD format: ASCII header `FLD <ndims> <dims...>` + little-endian float64, C order."""
    dims = " ".join(str(d) for d in field.values.shape)
    header = f"FLD {field.values.ndim} {dims}\n".encode("ascii")
    atomic_write_bytes(path, header + field.values.astype("<f8").tobytes())


def load_field(path, support: BinaryShape = None) -> ScalarField:
    with open(path, "rb") as fh:
        data = fh.read()
    nl = data.find(b"\n")
    parts = data[:nl].split() if nl > 0 else []
    if len(parts) < 2 or parts[0] != b"FLD":
        raise ParseError(f"{path}: malformed FLD header")
    try:
        ndims = int(parts[1])
        dims = tuple(int(p) for p in parts[2:2 + ndims])
    except ValueError as exc:
        raise ParseError(f"{path}: malformed FLD header") from exc
    if len(dims) != ndims:
        raise ParseError(f"{path}: malformed FLD header")
    n = int(np.prod(dims))
    payload = data[nl + 1:]
    if len(payload) < 8 * n:
        raise ParseError(f"{path}: truncated FLD payload")
    values = np.frombuffer(payload[:8 * n], dtype="<f8").reshape(dims).copy()
    if support is None:
        support = BinaryShape.from_mask(values != 0.0)
    return ScalarField(values, support)


def field_to_csv(field: ScalarField, path) -> None:
    """Debug dump of the occupied cells: absolute coordinates + value, 12 significant digits."""
    axes = "x,y" if field.values.ndim == 2 else "x,y,z"
    lines = [f"{axes},value"]
    origin = np.array(field.support.origin)
    for idx in np.argwhere(field.support.mask):
        coords = (idx + origin)[::-1]          # array order is (y,x)/(z,y,x); emit x first
        v = field.values[tuple(idx)]
        lines.append(",".join(str(int(c)) for c in coords) + f",{v:.12g}")
    atomic_write_text(path, "\n".join(lines) + "\n")
