"""Static grid world: sites, rooms, corners, islands, and validation.

A site is a rectangular grid of Wall/Free cells surrounded by a wall ring
with a single entrance opening. Rooms are walled regions with door cells;
free cells belonging to no room interior are "blank" space that robots may
cross but that does not count toward coverage.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np
from scipy import ndimage

# Physical edge length of one cell. Metadata only: all logic is in cells.
CELL_SIZE_M = Fraction(4, 15)

FREE = 0
WALL = 1

HEADINGS = (0, 45, 90, 135, 180, 225, 270, 315)

# Azimuth convention: 0 deg points along +x, counterclockwise positive,
# with +y at 90 deg. (x, y) indexes cells with x the column, y the row.
DIR_VECS = {
    0: (1, 0),
    45: (1, 1),
    90: (0, 1),
    135: (-1, 1),
    180: (-1, 0),
    225: (-1, -1),
    270: (0, -1),
    315: (1, -1),
}

_CARDINALS = (0, 90, 180, 270)


def quantize_heading(azimuth: float) -> int:
    """Round an azimuth in degrees to the nearest of the 8 grid headings.

    Ties round up (22.5 -> 45), and the result is always in [0, 360).
    """
    return int(math.floor((azimuth % 360.0) / 45.0 + 0.5)) % 8 * 45


def rotate(heading: int, delta: int) -> int:
    return (heading + delta) % 360


@dataclass(frozen=True, slots=True)
class Pose:
    """A robot's cell plus its quantized heading."""

    x: int
    y: int
    heading: int

    @property
    def cell(self) -> tuple[int, int]:
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class Room:
    id: int
    interior: frozenset[tuple[int, int]]
    doors: frozenset[tuple[int, int]]
    parent: Optional[int] = None


@dataclass(frozen=True, slots=True)
class Victim:
    position: tuple[int, int]
    found_at: Optional[int] = None


@dataclass(frozen=True)
class GridSite:
    """Immutable world model; safe to share across concurrent simulations.

    ``cells`` is a row-major bytes buffer (FREE/WALL per cell). ``entrance``
    lists the boundary cells of the single entrance opening.
    """

    width: int
    height: int
    cells: bytes
    entrance: tuple[tuple[int, int], ...]
    rooms: tuple[Room, ...] = ()
    victims: tuple[Victim, ...] = ()
    seed: int = 0

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def is_wall(self, x: int, y: int) -> bool:
        """Out-of-bounds counts as wall so the boundary is impenetrable."""
        if not self.in_bounds(x, y):
            return True
        return self.cells[y * self.width + x] == WALL

    def is_free(self, x: int, y: int) -> bool:
        return self.in_bounds(x, y) and self.cells[y * self.width + x] == FREE

    def cells_array(self) -> np.ndarray:
        """(height, width) uint8 view of the cell grid."""
        return np.frombuffer(self.cells, dtype=np.uint8).reshape(self.height, self.width)

    def wall_cells(self) -> Iterator[tuple[int, int]]:
        for y in range(self.height):
            row = y * self.width
            for x in range(self.width):
                if self.cells[row + x] == WALL:
                    yield (x, y)

    def area_m2(self) -> float:
        return float(self.width * self.height * CELL_SIZE_M * CELL_SIZE_M)

    def room_id_grid(self) -> list[int]:
        """Flat row-major grid of room ids, -1 for blank and wall cells."""
        grid = [-1] * (self.width * self.height)
        for room in self.rooms:
            for (x, y) in room.interior:
                grid[y * self.width + x] = room.id
        return grid


class CornerKind(Enum):
    INNER = "inner"
    OUTER = "outer"
    NOT_A_CORNER = "not_a_corner"


def classify_corner(site: GridSite, wall_vertex: tuple[int, int]) -> CornerKind:
    """Classify a wall cell as an inner corner, outer corner, or neither.

    A corner is a wall cell where exactly two perpendicular wall runs meet.
    It is Outer when free space occupies the reflex (larger-angle) side and
    Inner when free space occupies only the acute side between the arms.
    Straight runs, endpoints, and junctions of 3+ runs are not corners.
    """
    x, y = wall_vertex
    if not site.in_bounds(x, y):
        raise ValueError(f"coordinate out of bounds: {wall_vertex}")
    if not site.is_wall(x, y):
        raise ValueError(f"not a wall cell: {wall_vertex}")

    arms = []
    for h in _CARDINALS:
        dx, dy = DIR_VECS[h]
        if site.in_bounds(x + dx, y + dy) and site.is_wall(x + dx, y + dy):
            arms.append((dx, dy))
    if len(arms) != 2:
        return CornerKind.NOT_A_CORNER
    (ax, ay), (bx, by) = arms
    if ax + bx == 0 and ay + by == 0:  # collinear: straight run
        return CornerKind.NOT_A_CORNER

    acute = (x + ax + bx, y + ay + by)
    reflex_probes = [(x - ax, y - ay), (x - bx, y - by), (x - ax - bx, y - ay - by)]
    if any(site.is_free(px, py) for px, py in reflex_probes):
        return CornerKind.OUTER
    if site.is_free(*acute):
        return CornerKind.INNER
    return CornerKind.NOT_A_CORNER


def _wall_components(site: GridSite) -> tuple[np.ndarray, set[int]]:
    """8-connected wall component labels plus the labels touching the boundary ring."""
    walls = site.cells_array() == WALL
    labels, _ = ndimage.label(walls, structure=np.ones((3, 3), dtype=bool))
    boundary = set(np.unique(labels[0, :])) | set(np.unique(labels[-1, :]))
    boundary |= set(np.unique(labels[:, 0])) | set(np.unique(labels[:, -1]))
    boundary.discard(0)
    return labels, {int(b) for b in boundary}


def _room_wall_labels(site: GridSite, labels: np.ndarray, room: Room) -> set[int]:
    found: set[int] = set()
    for (x, y) in room.interior:
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                nx, ny = x + dx, y + dy
                if site.in_bounds(nx, ny) and labels[ny, nx]:
                    found.add(int(labels[ny, nx]))
    return found


def find_islands(site: GridSite) -> list[set[int]]:
    """Groups of rooms whose walls never connect to the boundary walls.

    Rooms are grouped by shared wall components (walls that touch are one
    component under 8-connectivity); a group is an island when none of its
    wall components reaches the site's surrounding walls.
    """
    labels, boundary_labels = _wall_components(site)
    room_labels = {room.id: _room_wall_labels(site, labels, room) for room in site.rooms}

    # Union rooms that share a wall component.
    parent = {room.id: room.id for room in site.rooms}

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    by_label: dict[int, int] = {}
    for room in site.rooms:
        for lab in room_labels[room.id]:
            if lab in by_label:
                ra, rb = find(by_label[lab]), find(room.id)
                if ra != rb:
                    parent[rb] = ra
            else:
                by_label[lab] = room.id

    groups: dict[int, set[int]] = {}
    for room in site.rooms:
        groups.setdefault(find(room.id), set()).add(room.id)

    islands = []
    for members in groups.values():
        labs = set().union(*(room_labels[rid] for rid in members)) if members else set()
        if labs and not (labs & boundary_labels):
            islands.append(members)
    islands.sort(key=min)
    return islands


def room_of(site: GridSite, cell: tuple[int, int]) -> Optional[int]:
    """Innermost room id whose interior contains the cell, or None for blank."""
    x, y = cell
    if site.is_wall(x, y):
        raise ValueError(f"cell is a wall: {cell}")
    for room in site.rooms:
        if cell in room.interior:
            return room.id
    return None


@dataclass(frozen=True, slots=True)
class Violation:
    code: str
    message: str
    cells: tuple[tuple[int, int], ...] = ()


def _boundary_ring(site: GridSite) -> list[tuple[int, int]]:
    """Boundary cells in cyclic order (counterclockwise from the origin)."""
    w, h = site.width, site.height
    ring = [(x, 0) for x in range(w)]
    ring += [(w - 1, y) for y in range(1, h)]
    ring += [(x, h - 1) for x in range(w - 2, -1, -1)]
    ring += [(0, y) for y in range(h - 2, 0, -1)]
    return ring


def validate_site(site: GridSite) -> list[Violation]:
    """Check the structural invariants of a site; an empty list means valid."""
    violations: list[Violation] = []
    w, h = site.width, site.height
    if w < 3 or h < 3 or len(site.cells) != w * h:
        violations.append(Violation("BadDimensions", f"unusable dimensions {w}x{h}"))
        return violations

    # Closure: boundary all wall except one contiguous opening of width 1-3.
    ring = _boundary_ring(site)
    free_flags = [site.is_free(x, y) for (x, y) in ring]
    n = len(ring)
    runs: list[list[tuple[int, int]]] = []
    if all(free_flags):
        runs.append(list(ring))
    else:
        # Rotate so the ring starts on a wall cell, then runs never wrap.
        start = free_flags.index(False)
        current: list[tuple[int, int]] = []
        for k in range(n):
            cell = ring[(start + k) % n]
            if free_flags[(start + k) % n]:
                current.append(cell)
            elif current:
                runs.append(current)
                current = []
        if current:
            runs.append(current)

    if not runs:
        violations.append(Violation("NoEntrance", "boundary is fully closed"))
    else:
        if len(runs) > 1:
            extras = tuple(c for run in runs[1:] for c in run)
            violations.append(
                Violation("MultipleEntrances", f"{len(runs)} boundary openings", extras)
            )
        if len(runs[0]) > 3:
            violations.append(
                Violation("EntranceTooWide", f"opening is {len(runs[0])} cells", tuple(runs[0]))
            )
        actual = {c for run in runs for c in run}
        if set(site.entrance) != actual:
            violations.append(
                Violation("EntranceMismatch", "entrance field disagrees with boundary gaps")
            )

    # Reachability: every free cell 4-connected to the entrance.
    free = site.cells_array() == FREE
    labels, _ = ndimage.label(free)  # default structure is 4-connectivity
    entrance_labels = {int(labels[y, x]) for (x, y) in site.entrance if site.is_free(x, y)}
    if entrance_labels:
        reachable = np.isin(labels, sorted(entrance_labels))
        stranded = free & ~reachable
        if stranded.any():
            ys, xs = np.nonzero(stranded)
            cells = tuple((int(x), int(y)) for x, y in zip(xs[:8], ys[:8]))
            violations.append(
                Violation("UnreachableCell", f"{int(stranded.sum())} free cells unreachable", cells)
            )

    # Rooms: interiors on free cells, pairwise disjoint, 4-connected; doors valid.
    raw = site.cells
    seen: dict[tuple[int, int], int] = {}
    room_mask = np.zeros((h, w), dtype=bool)
    for room in site.rooms:
        for cell in room.interior:
            x, y = cell
            if not (0 <= x < w and 0 <= y < h) or raw[y * w + x] == WALL:
                violations.append(
                    Violation("RoomOnWall", f"room {room.id} interior includes a wall", (cell,))
                )
            elif cell in seen:
                violations.append(
                    Violation(
                        "RoomOverlap",
                        f"rooms {seen[cell]} and {room.id} share a cell",
                        (cell,),
                    )
                )
            else:
                seen[cell] = room.id
                room_mask[y, x] = True
        for door in room.doors:
            if not _door_ok(site, door, room):
                violations.append(
                    Violation("InvalidDoor", f"room {room.id} door is malformed", (door,))
                )

    # Interior connectivity: label all room cells at once. A room that
    # exactly fills one component is connected; anything else (rooms that
    # touch or span components) gets an individual flood fill.
    if site.rooms:
        comp, n_comp = ndimage.label(room_mask)
        sizes = np.bincount(comp.ravel(), minlength=n_comp + 1)
        by_comp: dict[int, list[Room]] = {}
        for room in site.rooms:
            if not room.interior:
                continue
            x, y = next(iter(room.interior))
            if 0 <= x < w and 0 <= y < h and room_mask[y, x]:
                by_comp.setdefault(int(comp[y, x]), []).append(room)
        for label, members in by_comp.items():
            if len(members) == 1 and sizes[label] == len(members[0].interior):
                continue
            for room in members:
                if not _connected_4(room.interior):
                    violations.append(
                        Violation(
                            "DisconnectedRoomInterior", f"room {room.id} interior is split"
                        )
                    )

    for idx, victim in enumerate(site.victims):
        if not site.is_free(*victim.position):
            violations.append(
                Violation("InvalidVictim", f"victim {idx} not on a free cell", (victim.position,))
            )

    return violations


def _connected_4(cells: frozenset[tuple[int, int]]) -> bool:
    start = next(iter(cells))
    seen = {start}
    stack = [start]
    while stack:
        x, y = stack.pop()
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nxt = (x + dx, y + dy)
            if nxt in cells and nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == len(cells)


def _door_ok(site: GridSite, door: tuple[int, int], room: Room) -> bool:
    x, y = door
    if not site.is_free(x, y):
        return False
    touches_interior = False
    touches_exterior = False
    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nxt = (x + dx, y + dy)
        if nxt in room.interior:
            touches_interior = True
        elif site.is_free(*nxt):
            touches_exterior = True
    return touches_interior and touches_exterior


# --- serialization ---------------------------------------------------------

def _rle_encode(cells: bytes) -> str:
    out = []
    i = 0
    n = len(cells)
    while i < n:
        j = i
        while j < n and cells[j] == cells[i]:
            j += 1
        out.append(f"{j - i}{'W' if cells[i] == WALL else 'F'}")
        i = j
    return "".join(out)


def _rle_decode(text: str, expected: int) -> bytes:
    out = bytearray()
    count = 0
    for ch in text:
        if ch.isdigit():
            count = count * 10 + int(ch)
        elif ch in "WF":
            if count == 0:
                raise ValueError("run with no length in RLE string")
            out.extend((WALL if ch == "W" else FREE) for _ in range(count))
            count = 0
        else:
            raise ValueError(f"bad RLE character: {ch!r}")
    if count != 0 or len(out) != expected:
        raise ValueError("RLE string does not match grid size")
    return bytes(out)


def site_to_dict(site: GridSite) -> dict:
    return {
        "width": site.width,
        "height": site.height,
        "seed": site.seed,
        "cells": _rle_encode(site.cells),
        "entrance": [list(c) for c in site.entrance],
        "rooms": [
            {
                "id": room.id,
                "interior": sorted([list(c) for c in room.interior]),
                "doors": sorted([list(c) for c in room.doors]),
                "parent": room.parent,
            }
            for room in site.rooms
        ],
        "victims": [{"x": v.position[0], "y": v.position[1]} for v in site.victims],
    }


def site_to_json(site: GridSite) -> str:
    return json.dumps(site_to_dict(site), separators=(",", ":"))


def site_from_dict(data: dict) -> GridSite:
    width = int(data["width"])
    height = int(data["height"])
    rooms = tuple(
        Room(
            id=int(r["id"]),
            interior=frozenset(tuple(c) for c in r["interior"]),
            doors=frozenset(tuple(c) for c in r["doors"]),
            parent=(None if r.get("parent") is None else int(r["parent"])),
        )
        for r in data.get("rooms", [])
    )
    victims = tuple(Victim(position=(int(v["x"]), int(v["y"]))) for v in data.get("victims", []))
    return GridSite(
        width=width,
        height=height,
        cells=_rle_decode(data["cells"], width * height),
        entrance=tuple(tuple(c) for c in data["entrance"]),
        rooms=rooms,
        victims=victims,
        seed=int(data.get("seed", 0)),
    )


def site_from_json(text: str) -> GridSite:
    return site_from_dict(json.loads(text))
