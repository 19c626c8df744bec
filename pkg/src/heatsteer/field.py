"""Grid representation, 5-point Jacobi sweep, and strip partitioning.

The global grid is a dense row-major array of float64 temperatures whose
outermost ring is a fixed Dirichlet boundary.  Work is split into
horizontal strips of interior rows; each strip carries one halo row above
and one below so the stencil can be applied at its edges.

Everything here is pure computation over owned data.  All concurrency
lives in the engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numba
import numpy as np

from .errors import NonFiniteFieldError, PartitionError

Edge = str  # "north" | "south" | "east" | "west"

EDGES = ("north", "south", "east", "west")

_NO_PINS_IDX = np.empty(0, dtype=np.int64)
_NO_PINS_VAL = np.empty(0, dtype=np.float64)


@numba.njit(cache=True, nogil=True)
def _sweep_kernel(old, new, pins_r, pins_c, pins_v):
    """One Jacobi sweep over a strip: old is (rows+2, w) with halo rows.

    Writes the updated owned rows back into old, returns the squared L2 of
    the change.  Compiled once and runs without the GIL, so eight workers
    sweeping small strips do not serialize on interpreter handoffs.  The
    per-cell expression (up + down + left + right) * 0.25 evaluated
    left-to-right is the single definition of the stencil; the sequential
    reference uses this same kernel, which is what makes partitioned and
    undivided sweeps bit-identical.
    """
    rows = old.shape[0] - 2
    w = old.shape[1]
    for i in range(rows):
        for j in range(w):
            new[i, j] = old[i + 1, j]
    for i in range(rows):
        for j in range(1, w - 1):
            new[i, j] = (
                old[i, j] + old[i + 2, j] + old[i + 1, j - 1] + old[i + 1, j + 1]
            ) * 0.25
    for k in range(pins_r.shape[0]):
        new[pins_r[k], pins_c[k]] = pins_v[k]
    acc = 0.0
    for i in range(rows):
        for j in range(w):
            d = new[i, j] - old[i + 1, j]
            acc += d * d
    for i in range(rows):
        for j in range(w):
            old[i + 1, j] = new[i, j]
    return acc


@dataclass
class SourceTerm:
    """Interior cells pinned to a constant temperature.

    Each entry is (x, y, value) with x the column and y the row in global
    grid coordinates.  Pinned cells are restored after every sweep.
    """

    cells: list[tuple[int, int, float]] = dc_field(default_factory=list)

    def validate(self, width: int, height: int) -> None:
        for x, y, _v in self.cells:
            if not (1 <= x <= width - 2 and 1 <= y <= height - 2):
                raise ValueError(
                    f"source cell ({x}, {y}) must lie strictly inside the "
                    f"boundary ring of a {width}x{height} grid"
                )

    def set(self, x: int, y: int, value: float) -> None:
        self.clear(x, y)
        self.cells.append((x, y, float(value)))

    def clear(self, x: int, y: int) -> None:
        self.cells = [c for c in self.cells if not (c[0] == x and c[1] == y)]


class ScalarField2D:
    """Dense 2D temperature grid with a fixed Dirichlet boundary ring."""

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("field values must be a 2D array")
        h, w = values.shape
        if h < 3 or w < 3:
            raise ValueError(f"grid must be at least 3x3, got {w}x{h}")
        self.values = values

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def interior_rows(self) -> int:
        return self.height - 2

    @classmethod
    def uniform(
        cls,
        width: int,
        height: int,
        north: float = 0.0,
        south: float = 0.0,
        east: float = 0.0,
        west: float = 0.0,
        interior: float = 0.0,
    ) -> "ScalarField2D":
        """Build a grid with constant edge values and a constant interior.

        Columns are written first, rows second, so the north/south rows own
        the corner cells.  Corners are never read by the stencil.
        """
        v = np.full((height, width), float(interior), dtype=np.float64)
        v[:, 0] = west
        v[:, -1] = east
        v[0, :] = north
        v[-1, :] = south
        return cls(v)

    def set_edge(self, edge: Edge, value: float) -> None:
        if edge == "north":
            self.values[0, :] = value
        elif edge == "south":
            self.values[-1, :] = value
        elif edge == "west":
            self.values[:, 0] = value
        elif edge == "east":
            self.values[:, -1] = value
        else:
            raise ValueError(f"unknown edge {edge!r}")

    def boundary_ring(self) -> np.ndarray:
        """All boundary cell values as a flat array (for invariant checks)."""
        v = self.values
        return np.concatenate([v[0, :], v[-1, :], v[1:-1, 0], v[1:-1, -1]])

    def copy(self) -> "ScalarField2D":
        return ScalarField2D(self.values.copy())


def partition(height: int, workers: int, skew=None) -> list[tuple[int, int]]:
    """Split the interior rows of a grid into contiguous worker strips.

    Returns half-open (start, end) global row ranges, one per worker, in
    order.  ``skew=None`` (or the string "equal") gives an even split whose
    sizes differ by at most one row; a list of positive weights gives a
    proportional split where every worker still gets at least one row.
    """
    if workers < 1:
        raise PartitionError(f"need at least 1 worker, got {workers}")
    interior = height - 2
    if interior < workers:
        raise PartitionError(
            f"cannot split {interior} interior rows (grid height {height}) "
            f"across {workers} workers; need at least one row per worker"
        )
    if skew is None or skew == "equal":
        weights = [1.0] * workers
    else:
        weights = [float(s) for s in skew]
        if len(weights) != workers:
            raise PartitionError(
                f"skew list has {len(weights)} entries for {workers} workers"
            )
        if any(w <= 0 for w in weights):
            raise PartitionError("skew entries must be positive")

    total = sum(weights)
    shares = [interior * w / total for w in weights]
    sizes = [int(math.floor(s)) for s in shares]
    # Largest-remainder rounding keeps the sum exact.
    leftover = interior - sum(sizes)
    order = sorted(range(workers), key=lambda i: (-(shares[i] - sizes[i]), i))
    for i in order[:leftover]:
        sizes[i] += 1
    # Every worker owns at least one row; steal from the largest strips.
    for i in range(workers):
        while sizes[i] == 0:
            j = max(range(workers), key=lambda k: sizes[k])
            sizes[j] -= 1
            sizes[i] += 1

    ranges = []
    start = 1
    for size in sizes:
        ranges.append((start, start + size))
        start += size
    assert start == height - 1
    return ranges


class Subdomain:
    """One worker's owned interior rows plus halo rows above and below.

    ``local`` has shape (rows + 2, width): row 0 is the north halo, row -1
    the south halo.  For the first/last worker the corresponding halo row
    is the fixed global boundary row and is never overwritten by messages.
    """

    def __init__(
        self,
        owner_id: int,
        row_range: tuple[int, int],
        local: np.ndarray,
        has_north_neighbor: bool,
        has_south_neighbor: bool,
    ):
        self.owner_id = owner_id
        self.row_start, self.row_end = row_range
        self.local = np.asarray(local, dtype=np.float64)
        self.has_north_neighbor = has_north_neighbor
        self.has_south_neighbor = has_south_neighbor
        self.iteration = 0
        # Source-iteration tag of the most recently received strip.
        self.north_tag = 0
        self.south_tag = 0
        self._pins_r = _NO_PINS_IDX
        self._pins_c = _NO_PINS_IDX
        self._pins_v = _NO_PINS_VAL
        if self.local.shape[0] != self.rows + 2:
            raise ValueError("local block must have rows + 2 halo rows")
        if not self.local.flags["C_CONTIGUOUS"]:
            self.local = np.ascontiguousarray(self.local)
        self._new_buf = np.empty((self.rows, self.width), dtype=np.float64)

    @property
    def rows(self) -> int:
        return self.row_end - self.row_start

    @property
    def width(self) -> int:
        return self.local.shape[1]

    def set_sources(self, sources: SourceTerm) -> None:
        """Cache the pins that fall inside this strip, in local coordinates.

        Values are enforced by the next sweep; the caller decides whether
        the current state already includes them (see apply_sources).
        """
        mine = [
            (y - self.row_start, x, float(v))
            for (x, y, v) in sources.cells
            if self.row_start <= y < self.row_end
        ]
        self._pins_r = np.array([p[0] for p in mine], dtype=np.int64)
        self._pins_c = np.array([p[1] for p in mine], dtype=np.int64)
        self._pins_v = np.array([p[2] for p in mine], dtype=np.float64)

    def owned(self) -> np.ndarray:
        """View of the owned rows (no halos)."""
        return self.local[1:-1]

    def north_edge_row(self) -> np.ndarray:
        """First owned row; what the north neighbor wants as its south halo."""
        return self.local[1]

    def south_edge_row(self) -> np.ndarray:
        """Last owned row; what the south neighbor wants as its north halo."""
        return self.local[-2]

    def accept_north(self, strip: np.ndarray, tag: int) -> None:
        assert tag >= self.north_tag, "halo tags must never decrease"
        self.local[0] = strip
        self.north_tag = tag

    def accept_south(self, strip: np.ndarray, tag: int) -> None:
        assert tag >= self.south_tag, "halo tags must never decrease"
        self.local[-1] = strip
        self.south_tag = tag

    def sweep(self) -> float:
        """One Jacobi relaxation over the owned rows.

        Every interior, non-pinned cell becomes the mean of its four
        neighbors' previous values; pinned cells are restored; the boundary
        columns are untouched.  Returns the L2 norm of the change over the
        owned rows.  Reads use old values only, so the result is identical
        to the matching rows of a sequential sweep of the full grid.
        """
        acc = _sweep_kernel(
            self.local, self._new_buf, self._pins_r, self._pins_c, self._pins_v
        )
        residual = math.sqrt(acc)
        if not math.isfinite(residual):
            raise NonFiniteFieldError(
                f"worker {self.owner_id}: non-finite values at iteration "
                f"{self.iteration + 1}"
            )
        self.iteration += 1
        return residual


def apply_sources(field: ScalarField2D, sources: SourceTerm) -> None:
    """Write source pins into a field so the initial state honors them."""
    for x, y, v in sources.cells:
        field.values[y, x] = v


def split_field(
    field: ScalarField2D,
    ranges: list[tuple[int, int]],
    sources: SourceTerm | None = None,
) -> list[Subdomain]:
    """Cut a global field into per-worker subdomains (worker ids are 1-based).

    Halo rows start out as copies of the initial condition.
    """
    subs = []
    n = len(ranges)
    for i, (start, end) in enumerate(ranges):
        local = field.values[start - 1 : end + 1].copy()
        sub = Subdomain(
            owner_id=i + 1,
            row_range=(start, end),
            local=local,
            has_north_neighbor=i > 0,
            has_south_neighbor=i < n - 1,
        )
        if sources is not None:
            sub.set_sources(sources)
        subs.append(sub)
    return subs


def assemble_field(template: ScalarField2D, subs: list[Subdomain]) -> ScalarField2D:
    """Stitch owned rows back into a full grid.

    The boundary ring comes from ``template``; every interior row comes
    from exactly one subdomain.
    """
    values = template.values.copy()
    for sub in subs:
        values[sub.row_start : sub.row_end] = sub.owned()
    return ScalarField2D(values)


def sequential_sweep(
    values: np.ndarray, sources: SourceTerm | None = None
) -> tuple[np.ndarray, float]:
    """One Jacobi sweep over an undivided grid.

    Runs the exact same kernel as Subdomain.sweep with the whole interior
    as a single strip; used as the single-process reference and for exact
    residual checks on assembled fields.  Does not modify its input.
    """
    new = np.array(values, dtype=np.float64)  # kernel updates in place
    if sources is not None:
        pins_r = np.array([y - 1 for _x, y, _v in sources.cells], dtype=np.int64)
        pins_c = np.array([x for x, _y, _v in sources.cells], dtype=np.int64)
        pins_v = np.array([v for _x, _y, v in sources.cells], dtype=np.float64)
    else:
        pins_r, pins_c, pins_v = _NO_PINS_IDX, _NO_PINS_IDX, _NO_PINS_VAL
    buf = np.empty((new.shape[0] - 2, new.shape[1]), dtype=np.float64)
    acc = _sweep_kernel(new, buf, pins_r, pins_c, pins_v)
    residual = math.sqrt(acc)
    if not math.isfinite(residual):
        raise NonFiniteFieldError("non-finite values in sequential sweep")
    return new, residual


def global_residual(local_residuals) -> float:
    """Combine per-worker update norms into the global L2 norm."""
    vals = list(local_residuals)
    if not vals:
        raise ValueError("global_residual needs at least one local residual")
    return float(math.sqrt(math.fsum(float(r) * float(r) for r in vals)))
