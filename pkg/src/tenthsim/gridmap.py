"""Occupancy-grid maps: loading from image + metadata, world/grid conversions.

Maps follow the common robotics convention: an 8-bit grayscale image (PGM or
PNG) where darker pixels are more occupied, plus a plain-text metadata file
with `resolution`, `origin`, `occupied_thresh`, `free_thresh` and `negate`
keys. The image is flipped vertically on load so that grid row 0 is the
bottom of the image (the cell at the map origin).
"""

from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MapFormatError, OutOfBoundsError
from .geometry import Pose2D

FREE = 0
OCCUPIED = 1
UNKNOWN = 2

DEFAULT_OCCUPIED_THRESH = 0.65
DEFAULT_FREE_THRESH = 0.196


@dataclass(frozen=True)
class OccupancyGridMap:
    """Rasterized world. `cells[iy, ix]` holds FREE / OCCUPIED / UNKNOWN.

    `origin` is the world pose of the corner of cell (0, 0); cell centers sit
    half a resolution inside. UNKNOWN cells are treated as walls by raycasting
    and collision checks.
    """

    resolution: float
    origin: Pose2D
    cells: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.resolution <= 0:
            raise MapFormatError(f"resolution must be positive, got {self.resolution}")
        cells = np.ascontiguousarray(self.cells, dtype=np.uint8)
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def occupancy_hash(self) -> bytes:
        """SHA-256 over cells and geometry; identifies the map in snapshots."""
        h = hashlib.sha256()
        h.update(np.array([self.resolution, self.origin.x, self.origin.y,
                           self.origin.theta]).tobytes())
        h.update(np.array(self.cells.shape, dtype=np.int64).tobytes())
        h.update(self.cells.tobytes())
        return h.digest()

    @property
    def blocked(self) -> np.ndarray:
        """Boolean grid, True where the cell stops rays (OCCUPIED or UNKNOWN)."""
        if "blocked" not in self.__dict__:
            b = self.cells != FREE
            b.setflags(write=False)
            self.__dict__["blocked"] = b
        return self.__dict__["blocked"]

    @property
    def sealed(self) -> bool:
        """True when the outermost ring of cells is fully blocked (a closed
        world that rays and vehicles cannot leave)."""
        if "sealed" not in self.__dict__:
            b = self.blocked
            self.__dict__["sealed"] = bool(b[0, :].all() and b[-1, :].all()
                                           and b[:, 0].all() and b[:, -1].all())
        return self.__dict__["sealed"]

    @property
    def distance_field(self) -> np.ndarray:
        """Per-cell Euclidean distance (meters) to the nearest blocked cell."""
        if "distance_field" not in self.__dict__:
            from scipy.ndimage import distance_transform_edt

            d = distance_transform_edt(~self.blocked).astype(np.float64)
            d *= self.resolution
            d.setflags(write=False)
            self.__dict__["distance_field"] = d
        return self.__dict__["distance_field"]

    def world_to_grid_raw(self, x: float, y: float) -> tuple[int, int]:
        """Cell index (ix, iy) without bounds checking."""
        dx = x - self.origin.x
        dy = y - self.origin.y
        c, s = math.cos(self.origin.theta), math.sin(self.origin.theta)
        lx = c * dx + s * dy
        ly = -s * dx + c * dy
        return int(math.floor(lx / self.resolution)), int(math.floor(ly / self.resolution))

    def world_to_grid(self, point) -> tuple[int, int]:
        """Cell index (ix, iy) containing a world point.

        Raises OutOfBoundsError for points outside the grid.
        """
        p = np.asarray(point, dtype=float)
        ix, iy = self.world_to_grid_raw(float(p[0]), float(p[1]))
        if not self.in_bounds(ix, iy):
            raise OutOfBoundsError(f"point {p.tolist()} maps to cell ({ix}, {iy}) "
                                   f"outside {self.width}x{self.height} grid")
        return ix, iy

    def grid_to_world(self, ix: int, iy: int) -> np.ndarray:
        """World coordinates of the center of cell (ix, iy)."""
        lx = (ix + 0.5) * self.resolution
        ly = (iy + 0.5) * self.resolution
        return self.origin.transform_point((lx, ly))

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def cell_state(self, ix: int, iy: int) -> int:
        return int(self.cells[iy, ix])

    def is_blocked_world(self, x: float, y: float) -> bool:
        """True if the point lies in a blocked cell or outside the map."""
        ix, iy = self.world_to_grid_raw(x, y)
        if not self.in_bounds(ix, iy):
            return True
        return self.cells[iy, ix] != FREE

    def free_cell_indices(self) -> np.ndarray:
        """(K, 2) array of (ix, iy) for all FREE cells."""
        iy, ix = np.nonzero(self.cells == FREE)
        return np.column_stack([ix, iy])


def parse_map_metadata(text: str) -> dict:
    """Parse `key: value` metadata lines; origin may be `[x, y, theta]`."""
    meta: dict = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise MapFormatError(f"metadata line not key: value: {raw!r}")
        key, value = line.split(":", 1)
        key = key.strip()
        value = value.strip()
        if key == "origin":
            nums = value.strip("[]")
            parts = [p for p in nums.replace(",", " ").split() if p]
            if len(parts) < 2:
                raise MapFormatError(f"origin needs at least x and y: {value!r}")
            vals = [float(p) for p in parts]
            while len(vals) < 3:
                vals.append(0.0)
            meta["origin"] = Pose2D(vals[0], vals[1], vals[2])
        elif key in ("resolution", "occupied_thresh", "free_thresh"):
            meta[key] = float(value)
        elif key == "negate":
            meta[key] = int(value)
        elif key == "image":
            meta[key] = value
    return meta


def load_map(image_bytes: bytes, metadata_text: str) -> OccupancyGridMap:
    """Build an occupancy grid from an 8-bit grayscale image and metadata.

    A pixel's occupancy is (1 - pixel/255) unless `negate` is set. Cells with
    occupancy >= occupied_thresh become OCCUPIED, <= free_thresh become FREE,
    anything between is UNKNOWN.
    """
    from PIL import Image, UnidentifiedImageError

    meta = parse_map_metadata(metadata_text)
    if "resolution" not in meta:
        raise MapFormatError("metadata missing required key 'resolution'")
    resolution = meta["resolution"]
    if resolution <= 0:
        raise MapFormatError(f"resolution must be positive, got {resolution}")
    origin = meta.get("origin", Pose2D(0.0, 0.0, 0.0))
    occupied_thresh = meta.get("occupied_thresh", DEFAULT_OCCUPIED_THRESH)
    free_thresh = meta.get("free_thresh", DEFAULT_FREE_THRESH)
    negate = meta.get("negate", 0)

    try:
        img = Image.open(io.BytesIO(image_bytes))
        img.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise MapFormatError(f"cannot decode map image: {exc}") from exc
    if img.mode not in ("L", "P", "I;16", "1"):
        if img.mode in ("RGB", "RGBA"):
            raise MapFormatError(f"map image must be 8-bit grayscale, got mode {img.mode}")
    gray = np.asarray(img.convert("L"), dtype=np.float64)

    occ = gray / 255.0 if negate else 1.0 - gray / 255.0
    cells = np.full(gray.shape, UNKNOWN, dtype=np.uint8)
    cells[occ >= occupied_thresh] = OCCUPIED
    cells[occ <= free_thresh] = FREE
    # Image row 0 is the top; grid row 0 is the bottom.
    cells = cells[::-1, :]
    return OccupancyGridMap(resolution=resolution, origin=origin, cells=cells)


def load_map_files(image_path, metadata_path) -> OccupancyGridMap:
    with open(image_path, "rb") as f:
        image_bytes = f.read()
    with open(metadata_path, "r") as f:
        metadata_text = f.read()
    return load_map(image_bytes, metadata_text)


def save_map_files(grid: OccupancyGridMap, image_path, metadata_path) -> None:
    """Write a grid back out as PNG + metadata (used by the asset generator)."""
    from PIL import Image

    gray = np.full(grid.cells.shape, 205, dtype=np.uint8)
    gray[grid.cells == FREE] = 254
    gray[grid.cells == OCCUPIED] = 0
    img = Image.fromarray(gray[::-1, :], mode="L")
    img.save(image_path)
    import os
    with open(metadata_path, "w") as f:
        f.write(f"image: {os.path.basename(image_path)}\n")
        f.write(f"resolution: {grid.resolution}\n")
        f.write(f"origin: [{grid.origin.x}, {grid.origin.y}, {grid.origin.theta}]\n")
        f.write(f"occupied_thresh: {DEFAULT_OCCUPIED_THRESH}\n")
        f.write(f"free_thresh: {DEFAULT_FREE_THRESH}\n")
        f.write("negate: 0\n")
