"""Binary shapes on 2-D/3-D grids: representation, file formats, generators.

Conventions
-----------
* 2-D masks are indexed ``[y, x]`` (row, column); 3-D masks ``[z, y, x]``.
* Every shape carries a one-cell empty margin, so each occupied cell has a
  full 3x3 (3x3x3) neighbourhood inside the array.
* ``origin`` is the absolute coordinate of array cell ``(0, 0[, 0])``; it
  lets shapes built from a common ancestor be compared cell-by-cell even
  after their canvases grew in different directions.

File formats
------------
* PBM (``P1`` ASCII and ``P4`` packed) for 2-D; bit 1 = occupied.
* ``VOX3``: header line ``VOX3 <w> <h> <d>`` followed by w*h*d raw bytes
  (0/1), x fastest; stored as an array of shape ``(d, h, w)``.
* Floor plans: a small declarative text format, see :func:`parse_plan`.
"""

from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi

from .ioutil import atomic_write_bytes


class ShapeError(ValueError):
    """Invalid shape or shape-construction request."""


class ParseError(ShapeError):
    """Malformed shape or plan file."""


# --------------------------------------------------------------------------
# core type

@dataclass(frozen=True)
class BinaryShape:
    """An n-dimensional (n in {2, 3}) boolean occupancy grid with empty margin."""

    mask: np.ndarray
    origin: tuple = None

    def __post_init__(self):
        m = self.mask
        if not isinstance(m, np.ndarray) or m.dtype != bool:
            raise ShapeError("mask must be a boolean ndarray")
        if m.ndim not in (2, 3):
            raise ShapeError(f"dimensionality must be 2 or 3, got {m.ndim}")
        if not m.any():
            raise ShapeError("empty mask")
        for ax in range(m.ndim):
            first = np.take(m, 0, axis=ax)
            last = np.take(m, m.shape[ax] - 1, axis=ax)
            if first.any() or last.any():
                raise ShapeError("occupied cell on the array border (missing margin)")
        if self.origin is None:
            object.__setattr__(self, "origin", (0,) * m.ndim)
        elif len(self.origin) != m.ndim:
            raise ShapeError("origin length does not match dimensionality")
        else:
            object.__setattr__(self, "origin", tuple(int(v) for v in self.origin))
        self.mask.setflags(write=False)

    @classmethod
    def from_mask(cls, mask, origin=None) -> "BinaryShape":
        """Build a shape from any array-like mask, padding a margin where needed."""
        m = np.asarray(mask).astype(bool)
        if m.ndim not in (2, 3):
            raise ShapeError(f"dimensionality must be 2 or 3, got {m.ndim}")
        if not m.any():
            raise ShapeError("empty mask")
        if origin is None:
            origin = (0,) * m.ndim
        pad = []
        for ax in range(m.ndim):
            lo = 1 if np.take(m, 0, axis=ax).any() else 0
            hi = 1 if np.take(m, m.shape[ax] - 1, axis=ax).any() else 0
            pad.append((lo, hi))
        if any(lo or hi for lo, hi in pad):
            m = np.pad(m, pad)
            origin = tuple(o - lo for o, (lo, _) in zip(origin, pad))
        return cls(m, tuple(origin))

    @property
    def dims(self) -> tuple:
        return self.mask.shape

    @property
    def ndim(self) -> int:
        return self.mask.ndim

    @property
    def count(self) -> int:
        """Number of occupied cells."""
        return int(self.mask.sum())

    def cells(self) -> np.ndarray:
        """Occupied cells as absolute coordinates, lexicographic order."""
        return np.argwhere(self.mask) + np.array(self.origin)

    def canonical(self) -> "BinaryShape":
        """Crop to the occupied bounding box plus a one-cell margin."""
        idx = np.argwhere(self.mask)
        lo = idx.min(axis=0)
        hi = idx.max(axis=0)
        sl = tuple(slice(l, h + 1) for l, h in zip(lo, hi))
        cropped = np.pad(self.mask[sl], 1)
        origin = tuple(o + int(l) - 1 for o, l in zip(self.origin, lo))
        return BinaryShape(cropped, origin)


def same_occupancy(a: BinaryShape, b: BinaryShape) -> bool:
    """True when the occupied sets agree up to margin normalization (translation ignored)."""
    return np.array_equal(a.canonical().mask, b.canonical().mask)


def covers(a: BinaryShape, b: BinaryShape) -> bool:
    """True when every occupied cell of `b` (absolute coords) is occupied in `a`."""
    cb = b.cells()
    ca = a.cells()
    sa = {tuple(c) for c in ca}
    return all(tuple(c) in sa for c in cb)


def _paint(rects, ndim) -> BinaryShape:
    """Union of absolute half-open boxes [(lo, hi), ...] as a shape with margin."""
    lo = np.min([r[0] for r in rects], axis=0)
    hi = np.max([r[1] for r in rects], axis=0)
    shape = tuple(int(h - l) + 2 for l, h in zip(lo, hi))
    m = np.zeros(shape, dtype=bool)
    for rlo, rhi in rects:
        sl = tuple(slice(int(a - o) + 1, int(b - o) + 1) for a, b, o in zip(rlo, rhi, lo))
        m[sl] = True
    return BinaryShape(m, tuple(int(v) - 1 for v in lo))


def _union_cells_rect(cells: np.ndarray, rect) -> BinaryShape:
    """Union of explicit absolute cells with one absolute half-open box."""
    rlo, rhi = (np.array(r) for r in rect)
    lo = np.minimum(cells.min(axis=0), rlo) - 1
    hi = np.maximum(cells.max(axis=0) + 1, rhi) + 1
    m = np.zeros(tuple(int(h - l) for l, h in zip(lo, hi)), dtype=bool)
    m[tuple((cells - lo).T)] = True
    sl = tuple(slice(int(a - o), int(b - o)) for a, b, o in zip(rlo, rhi, lo))
    m[sl] = True
    return BinaryShape(m, tuple(int(v) for v in lo))


# --------------------------------------------------------------------------
# generators

def make_rect(w: int, h: int) -> BinaryShape:
    """Filled axis-aligned rectangle, w pixels wide (x) by h tall (y)."""
    if w < 1 or h < 1:
        raise ShapeError("rectangle sides must be >= 1")
    return _paint([((0, 0), (h, w))], 2)


def make_square(side: int) -> BinaryShape:
    return make_rect(side, side)


def make_disk(radius: int) -> BinaryShape:
    """Digital disk: all lattice points within Euclidean distance `radius` of the center cell."""
    if radius < 0:
        raise ShapeError("radius must be >= 0")
    n = 2 * radius + 3
    yy, xx = np.mgrid[0:n, 0:n]
    c = radius + 1
    m = (yy - c) ** 2 + (xx - c) ** 2 <= radius * radius
    return BinaryShape(m, (-c, -c))


def make_cube(side: int) -> BinaryShape:
    if side < 1:
        raise ShapeError("cube side must be >= 1")
    return _paint([((0, 0, 0), (side, side, side))], 3)


_SIDES_2D = ("top", "bottom", "left", "right")


def append_rect(base: BinaryShape, side: str, contact_width: int, height: int,
                offset="center") -> BinaryShape:
    """Union of `base` with a rectangle flush against one bounding-box side.

    `contact_width` spans along the chosen side, `height` sticks outward.
    `offset` places the appendage along the side: "center", "corner"
    (low coordinate), or an integer offset in pixels from the low corner.
    """
    if base.ndim != 2:
        raise ShapeError("append_rect expects a 2-D shape")
    if side not in _SIDES_2D:
        raise ShapeError(f"side must be one of {_SIDES_2D}")
    if contact_width < 1 or height < 1:
        raise ShapeError("appendage dimensions must be >= 1")
    idx = base.cells()
    lo = idx.min(axis=0)
    hi = idx.max(axis=0) + 1
    along = 1 if side in ("top", "bottom") else 0
    extent = int(hi[along] - lo[along])
    if contact_width > extent:
        raise ShapeError("contact width exceeds base extent along that side")
    if offset == "center":
        off = (extent - contact_width) // 2
    elif offset == "corner":
        off = 0
    else:
        off = int(offset)
    if not 0 <= off <= extent - contact_width:
        raise ShapeError("appendage offset out of range (not touching base)")

    a0 = int(lo[along]) + off
    a1 = a0 + contact_width
    if side == "top":
        rect = ((int(lo[0]) - height, a0), (int(lo[0]), a1))
        contact = [(int(lo[0]), a) for a in range(a0, a1)]
    elif side == "bottom":
        rect = ((int(hi[0]), a0), (int(hi[0]) + height, a1))
        contact = [(int(hi[0]) - 1, a) for a in range(a0, a1)]
    elif side == "left":
        rect = ((a0, int(lo[1]) - height), (a1, int(lo[1])))
        contact = [(a, int(lo[1])) for a in range(a0, a1)]
    else:
        rect = ((a0, int(hi[1])), (a1, int(hi[1]) + height))
        contact = [(a, int(hi[1]) - 1) for a in range(a0, a1)]

    occupied = {tuple(c) for c in idx}
    if not all(c in occupied for c in contact):
        raise ShapeError("appendage not flush against base")
    return _union_cells_rect(idx, rect)


_FACES_3D = {"+x": (2, +1), "-x": (2, -1), "+y": (1, +1), "-y": (1, -1),
             "+z": (0, +1), "-z": (0, -1)}


def append_cube(base: BinaryShape, face: str, side: int, placement="center") -> BinaryShape:
    """Union of a 3-D base with a cube flush at the center of one bounding-box face."""
    if base.ndim != 3:
        raise ShapeError("append_cube expects a 3-D shape")
    if face not in _FACES_3D:
        raise ShapeError(f"face must be one of {sorted(_FACES_3D)}")
    if side < 1:
        raise ShapeError("appendage side must be >= 1")
    if placement != "center":
        raise ShapeError("only center placement is supported")
    idx = base.cells()
    lo = idx.min(axis=0)
    hi = idx.max(axis=0) + 1
    ax, sign = _FACES_3D[face]
    tang = [a for a in range(3) if a != ax]
    for a in tang:
        if side > hi[a] - lo[a]:
            raise ShapeError("appendage does not fit the face (placement overflow)")
    rlo = [0, 0, 0]
    rhi = [0, 0, 0]
    for a in tang:
        rlo[a] = int(lo[a]) + (int(hi[a] - lo[a]) - side) // 2
        rhi[a] = rlo[a] + side
    if sign > 0:
        rlo[ax], rhi[ax] = int(hi[ax]), int(hi[ax]) + side
        contact_plane = int(hi[ax]) - 1
    else:
        rlo[ax], rhi[ax] = int(lo[ax]) - side, int(lo[ax])
        contact_plane = int(lo[ax])
    occupied = {tuple(c) for c in idx}
    for u in range(rlo[tang[0]], rhi[tang[0]]):
        for v in range(rlo[tang[1]], rhi[tang[1]]):
            c = [0, 0, 0]
            c[ax] = contact_plane
            c[tang[0]] = u
            c[tang[1]] = v
            if tuple(c) not in occupied:
                raise ShapeError("appendage not flush against base")
    return _union_cells_rect(idx, (tuple(rlo), tuple(rhi)))


def translate_union(base: BinaryShape, delta) -> BinaryShape:
    """Union of `base` with its translate by `delta`; the result must be 8(26)-connected."""
    delta = tuple(int(d) for d in delta)
    if len(delta) != base.ndim:
        raise ShapeError("delta length does not match dimensionality")
    cells = base.cells()
    shifted = cells + np.array(delta)
    lo = np.minimum(cells.min(axis=0), shifted.min(axis=0)) - 1
    hi = np.maximum(cells.max(axis=0), shifted.max(axis=0)) + 2
    m = np.zeros(tuple(int(h - l) for l, h in zip(lo, hi)), dtype=bool)
    m[tuple((cells - lo).T)] = True
    m[tuple((shifted - lo).T)] = True
    structure = np.ones((3,) * base.ndim, dtype=int)
    _, ncomp = ndi.label(m, structure=structure)
    if ncomp != 1:
        raise ShapeError("translate_union produced a disconnected shape")
    return BinaryShape(m, tuple(int(v) for v in lo))


def appendage_family(base_side: int, widths, heights=None, sides=None):
    """Square plus successively added flush appendages: [S0, S1, ..., Sk].

    Appendage i attaches centered on the i-th side of the cycle
    top, right, bottom, left.  Heights default to 32 pixels each.
    """
    widths = list(widths)
    if heights is None:
        heights = [32] * len(widths)
    if sides is None:
        sides = ["top", "right", "bottom", "left"] * ((len(widths) + 3) // 4)
    shapes = [make_square(base_side)]
    for w, h, s in zip(widths, heights, sides):
        shapes.append(append_rect(shapes[-1], s, w, h, offset="center"))
    return shapes


_CUBE_FACE_ORDER = {"a": ("+x", "-x", "+y", "-y", "+z", "-z"),
                    "b": ("+x", "+y", "+z", "-x", "-y", "-z")}


def cube_family(side: int = 64, appendage: int = 16):
    """The ten cube shapes: 0..6 appendages at face centers, with the 2..4
    counts in both the opposite-face (a) and adjacent-face (b) preference.

    Returns a list of (name, shape) pairs: S0, S1, S2a, S2b, ..., S5, S6.
    """
    out = [("S0", make_cube(side))]
    built = {}
    for pref in ("a", "b"):
        faces = _CUBE_FACE_ORDER[pref]
        m = make_cube(side)
        for k, face in enumerate(faces, start=1):
            m = append_cube(m, face, appendage)
            built[(k, pref)] = m
    out.append(("S1", built[(1, "a")]))
    for k in (2, 3, 4):
        out.append((f"S{k}a", built[(k, "a")]))
        out.append((f"S{k}b", built[(k, "b")]))
    out.append(("S5", built[(5, "a")]))
    out.append(("S6", built[(6, "a")]))
    return out


# --------------------------------------------------------------------------
# floor plans

@dataclass(frozen=True)
class PlanSpec:
    """Declarative floor plan: free space = union(rooms + apertures) minus obstacles."""

    canvas: tuple                  # (width, height) in pixels
    rooms: tuple = ()
    apertures: tuple = ()
    obstacles: tuple = ()          # rects are (x, y, w, h)

    def text(self) -> str:
        lines = [f"canvas {self.canvas[0]} {self.canvas[1]}"]
        for kind, rects in (("room", self.rooms), ("aperture", self.apertures),
                            ("obstacle", self.obstacles)):
            for x, y, w, h in rects:
                lines.append(f"{kind} {x} {y} {w} {h}")
        return "\n".join(lines) + "\n"


def parse_plan(text: str) -> PlanSpec:
    """Parse the plan text format: `canvas W H` then `room|aperture|obstacle X Y W H` lines."""
    canvas = None
    rects = {"room": [], "aperture": [], "obstacle": []}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "canvas":
                canvas = (int(parts[1]), int(parts[2]))
            elif parts[0] in rects:
                x, y, w, h = (int(v) for v in parts[1:5])
                rects[parts[0]].append((x, y, w, h))
            else:
                raise ParseError(f"plan line {ln}: unknown directive {parts[0]!r}")
        except (IndexError, ValueError) as exc:
            raise ParseError(f"plan line {ln}: {raw!r}") from exc
    if canvas is None:
        raise ParseError("plan is missing a canvas line")
    return PlanSpec(canvas, tuple(rects["room"]), tuple(rects["aperture"]),
                    tuple(rects["obstacle"]))


def make_frame_plan(spec) -> BinaryShape:
    """Rasterize a floor plan; the frame/walls are exterior, free space is the shape."""
    if isinstance(spec, str):
        spec = parse_plan(spec)
    w, h = spec.canvas
    if w < 3 or h < 3:
        raise ShapeError("plan canvas too small")
    free = np.zeros((h, w), dtype=bool)
    for kind, rects, value in (("room", spec.rooms, True),
                               ("aperture", spec.apertures, True),
                               ("obstacle", spec.obstacles, False)):
        for x, y, rw, rh in rects:
            if rw < 1 or rh < 1 or x < 0 or y < 0 or x + rw > w or y + rh > h:
                raise ShapeError(f"inconsistent plan: {kind} ({x},{y},{rw},{rh}) "
                                 f"outside the {w}x{h} canvas")
            if kind == "obstacle":
                free[y:y + rh, x:x + rw] = False
            else:
                free[y:y + rh, x:x + rw] = True
    if not free.any():
        raise ShapeError("inconsistent plan: no free space")
    return BinaryShape.from_mask(free)


def standard_plan(name: str) -> PlanSpec:
    """Canonical four-room plans P0..P4 (128-pixel rooms, 4-pixel walls).

    P0 four disconnected rooms; P1 adds centered 32-pixel apertures; P2 adds
    a 4x32 obstacle pad in the upper-right room flush against the shared
    wall, plugging most of the vertical aperture; P3 widens every aperture
    to 80 pixels (the widened opening sweeps over and absorbs the pad).
    P4 is a denser plan used only for qualitative comparisons.
    """
    wall, room = 4, 128
    r1 = wall
    r2 = wall + room + wall
    canvas = (wall * 3 + room * 2, wall * 3 + room * 2)
    rooms = ((r1, r1, room, room), (r2, r1, room, room),
             (r1, r2, room, room), (r2, r2, room, room))

    def apertures(opening):
        cap = (room - opening) // 2
        return (
            (r1 + room, r1 + cap, wall, opening),      # TL-TR wall (vertical)
            (r1 + room, r2 + cap, wall, opening),      # BL-BR wall (vertical)
            (r1 + cap, r1 + room, opening, wall),      # TL-BL wall (horizontal)
            (r2 + cap, r1 + room, opening, wall),      # TR-BR wall (horizontal)
        )

    obstacle = (r2, r1 + 60, wall, 32)                 # pad on TR side of the shared wall
    name = name.upper()
    if name == "P0":
        return PlanSpec(canvas, rooms)
    if name == "P1":
        return PlanSpec(canvas, rooms, apertures(32))
    if name == "P2":
        return PlanSpec(canvas, rooms, apertures(32), (obstacle,))
    if name == "P3":
        return PlanSpec(canvas, rooms, apertures(80))
    if name == "P4":
        extra = (
            (r1 + 40, r1 + 56, 56, wall),              # partition stub in TL room
            (r1 + 92, r1, wall, 36),                   # hanging wall in TL room
            (r2 + 24, r2 + 88, 40, wall),              # shelf in BR room
            (r1 + 20, r2 + 48, wall, 44),              # post wall in BL room
        )
        aps = (
            (r1 + room, r1 + 16, wall, 24),
            (r1 + room, r2 + 72, wall, 40),
            (r1 + 84, r1 + room, 28, wall),
            (r2 + 12, r1 + room, 48, wall),
        )
        return PlanSpec(canvas, rooms, aps, extra)
    raise ShapeError(f"unknown standard plan {name!r}")


# --------------------------------------------------------------------------
# noise specification (used by the noise generator and the CLI)

@dataclass(frozen=True)
class NoiseSpec:
    """Noise run parameters: factor nf, number of applications, PRNG seed."""

    nf: int
    count: int
    seed: int

    def __post_init__(self):
        if self.nf < 1:
            raise ShapeError("noise factor must be >= 1")
        if self.count < 1:
            raise ShapeError("noise application count must be >= 1")


# --------------------------------------------------------------------------
# file I/O

def _tokenize_pnm_header(data: bytes, ntokens: int):
    """Yield header tokens, skipping whitespace and # comments; return (tokens, offset)."""
    tokens = []
    i = 0
    while len(tokens) < ntokens:
        if i >= len(data):
            raise ParseError("truncated PBM header")
        c = data[i:i + 1]
        if c == b"#":
            while i < len(data) and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            tokens.append(data[i:j])
            i = j
    return tokens, i


def _load_pbm(data: bytes) -> BinaryShape:
    magic = data[:2]
    if magic not in (b"P1", b"P4"):
        raise ParseError("not a PBM file (expected P1 or P4 magic)")
    tokens, off = _tokenize_pnm_header(data, 3)
    try:
        w, h = int(tokens[1]), int(tokens[2])
    except ValueError as exc:
        raise ParseError("malformed PBM header") from exc
    if w < 1 or h < 1:
        raise ParseError("malformed PBM header (non-positive dimensions)")
    if magic == b"P1":
        bits = []
        for ch in data[off:]:
            c = chr(ch)
            if c in "01":
                bits.append(c == "1")
            elif not c.isspace():
                raise ParseError(f"unexpected character {c!r} in P1 raster")
        if len(bits) < w * h:
            raise ParseError("truncated P1 raster")
        m = np.array(bits[:w * h], dtype=bool).reshape(h, w)
    else:
        off += 1  # single whitespace byte after the header
        rowbytes = (w + 7) // 8
        raster = data[off:off + rowbytes * h]
        if len(raster) < rowbytes * h:
            raise ParseError("truncated P4 raster")
        rows = np.frombuffer(raster, dtype=np.uint8).reshape(h, rowbytes)
        m = np.unpackbits(rows, axis=1)[:, :w].astype(bool)
    return BinaryShape.from_mask(m)


def _dump_pbm(shape: BinaryShape, ascii_format: bool) -> bytes:
    h, w = shape.dims
    if ascii_format:
        out = [f"P1\n{w} {h}\n"]
        for row in shape.mask:
            digits = "".join("1" if v else "0" for v in row)
            out.extend(digits[i:i + 64] + "\n" for i in range(0, len(digits), 64))
        return "".join(out).encode("ascii")
    header = f"P4\n{w} {h}\n".encode("ascii")
    packed = np.packbits(shape.mask.astype(np.uint8), axis=1)
    return header + packed.tobytes()


def _load_vox3(data: bytes) -> BinaryShape:
    nl = data.find(b"\n")
    if nl < 0:
        raise ParseError("truncated VOX3 header")
    parts = data[:nl].split()
    if len(parts) != 4 or parts[0] != b"VOX3":
        raise ParseError("malformed VOX3 header")
    try:
        w, h, d = (int(p) for p in parts[1:])
    except ValueError as exc:
        raise ParseError("malformed VOX3 header") from exc
    if min(w, h, d) < 1:
        raise ParseError("malformed VOX3 header (non-positive dimensions)")
    payload = data[nl + 1:]
    if len(payload) < w * h * d:
        raise ParseError("truncated VOX3 payload")
    arr = np.frombuffer(payload[:w * h * d], dtype=np.uint8)
    if not np.isin(arr, (0, 1)).all():
        raise ParseError("VOX3 payload bytes must be 0 or 1")
    return BinaryShape.from_mask(arr.reshape(d, h, w).astype(bool))


def _dump_vox3(shape: BinaryShape) -> bytes:
    d, h, w = shape.dims
    return f"VOX3 {w} {h} {d}\n".encode("ascii") + shape.mask.astype(np.uint8).tobytes()


def load_shape(path, fmt: str = None) -> BinaryShape:
    """Load a PBM (2-D) or VOX3 (3-D) shape; the format is sniffed unless given."""
    with open(path, "rb") as fh:
        data = fh.read()
    if fmt is None:
        if data[:4] == b"VOX3":
            fmt = "vox3"
        elif data[:2] in (b"P1", b"P4"):
            fmt = "pbm"
        else:
            raise ParseError(f"{path}: unrecognized shape format")
    fmt = fmt.lower()
    try:
        if fmt == "pbm":
            return _load_pbm(data)
        if fmt == "vox3":
            return _load_vox3(data)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None
    raise ParseError(f"{path}: unknown format {fmt!r}")


def save_shape(shape: BinaryShape, path, fmt: str = None, ascii_format: bool = False) -> None:
    """Write PBM for 2-D shapes and VOX3 for 3-D shapes (round-trips the occupied set)."""
    if fmt is None:
        fmt = "pbm" if shape.ndim == 2 else "vox3"
    fmt = fmt.lower()
    if fmt == "pbm":
        if shape.ndim != 2:
            raise ShapeError("PBM stores 2-D shapes only")
        atomic_write_bytes(path, _dump_pbm(shape, ascii_format))
    elif fmt == "vox3":
        if shape.ndim != 3:
            raise ShapeError("VOX3 stores 3-D shapes only")
        atomic_write_bytes(path, _dump_vox3(shape))
    else:
        raise ShapeError(f"unknown format {fmt!r}")
