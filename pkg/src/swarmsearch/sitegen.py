"""Random generation of valid sites: corridors, room blocks, nesting, islands.

The layout follows common floor plans: corridor bands divide the interior
into rectangular blocks attached to the boundary walls, each block is
partitioned into rooms by binary splits, doors are carved along a spanning
tree so every room is reachable, and occasional free-standing island
structures are placed in open yards. All randomness comes from the seeded
generator in :mod:`swarmsearch.rng`, so generation is a pure function of
(params, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .rng import Rng, derive_subseed, mix_parts
from .world import FREE, WALL, GridSite, Room, Victim, validate_site

_ATTEMPTS = 32
_MIN_LEAF = 2  # smallest room interior side, in cells
_MIN_BANK = 4
_EXTRA_DOOR_P = 0.15

_OUTSIDE = -1  # owner id for corridor / blank space
_WALL_OWNER = -2


class InfeasibleParams(Exception):
    """The requested site cannot be built within the attempt budget."""


@dataclass(frozen=True)
class SiteGenParams:
    width_cells: int
    height_cells: int
    n_rooms: int
    n_victims: int = 0
    island_probability: float = 0.2
    nesting_probability: float = 0.2
    corridor_min_width: int = 2
    entrance_width: int = 2
    seed: int = 0


def _validate_params(p: SiteGenParams) -> None:
    if p.width_cells < 4 or p.height_cells < 4:
        raise InfeasibleParams(f"site {p.width_cells}x{p.height_cells} is too small")
    if p.n_rooms < 0 or p.n_victims < 0:
        raise InfeasibleParams("room and victim counts must be nonnegative")
    if p.n_victims > p.n_rooms:
        raise InfeasibleParams(
            f"{p.n_victims} victims cannot be placed in {p.n_rooms} rooms"
        )
    if not 0.0 <= p.island_probability <= 1.0 or not 0.0 <= p.nesting_probability <= 1.0:
        raise InfeasibleParams("probabilities must lie in [0, 1]")
    if p.corridor_min_width < 1:
        raise InfeasibleParams("corridors must be at least one cell wide")
    if not 1 <= p.entrance_width <= 3:
        raise InfeasibleParams("entrance width must be 1-3 cells")


@dataclass
class _Leaf:
    x0: int
    y0: int
    x1: int
    y1: int
    child: Optional[tuple[int, int, int, int]] = None  # nested room gross rect

    @property
    def w(self) -> int:
        return self.x1 - self.x0 + 1

    @property
    def h(self) -> int:
        return self.y1 - self.y0 + 1

    def splittable_axes(self) -> list[str]:
        axes = []
        if self.w >= 2 * _MIN_LEAF + 1:
            axes.append("x")
        if self.h >= 2 * _MIN_LEAF + 1:
            axes.append("y")
        return axes


@dataclass
class _Block:
    x0: int
    y0: int
    x1: int
    y1: int
    frame_left: bool
    frame_right: bool
    frame_bottom: bool
    frame_top: bool
    full_frame: bool = False  # island structures are framed on all sides

    def interior(self) -> tuple[int, int, int, int]:
        return (
            self.x0 + (1 if self.frame_left else 0),
            self.y0 + (1 if self.frame_bottom else 0),
            self.x1 - (1 if self.frame_right else 0),
            self.y1 - (1 if self.frame_top else 0),
        )

    def capacity(self) -> int:
        ix0, iy0, ix1, iy1 = self.interior()
        iw, ih = ix1 - ix0 + 1, iy1 - iy0 + 1
        if iw < _MIN_LEAF or ih < _MIN_LEAF:
            return 0
        pitch = _MIN_LEAF + 1
        return ((iw + 1) // pitch) * ((ih + 1) // pitch)


def _split_segment(
    lo: int, hi: int, min_seg: int, max_seg: int, cw: int, rng: Rng,
    corridors: list[tuple[int, int]],
) -> list[tuple[int, int]]:
    """Recursively cut [lo, hi] into segments separated by cw-wide corridors."""
    if hi - lo + 1 <= max_seg:
        return [(lo, hi)]
    a = lo + min_seg
    b = hi - cw + 1 - min_seg
    if a > b:
        return [(lo, hi)]
    c = a + rng.below(b - a + 1)
    corridors.append((c, c + cw - 1))
    left = _split_segment(lo, c - 1, min_seg, max_seg, cw, rng, corridors)
    right = _split_segment(c + cw, hi, min_seg, max_seg, cw, rng, corridors)
    return left + right


def _allocate(total: int, caps: list[int]) -> Optional[list[int]]:
    """Largest-remainder allocation of ``total`` across capped slots."""
    if total == 0:
        return [0] * len(caps)
    weight = sum(caps)
    if weight < total:
        return None
    quotas = [min(cap, total * cap // weight) for cap in caps]
    remainders = sorted(
        range(len(caps)),
        key=lambda i: (-(total * caps[i] % weight), i),
    )
    left = total - sum(quotas)
    while left > 0:
        progressed = False
        for i in remainders:
            if left == 0:
                break
            if quotas[i] < caps[i]:
                quotas[i] += 1
                left -= 1
                progressed = True
        if not progressed:
            return None
    return quotas


class _Builder:
    def __init__(self, params: SiteGenParams, rng: Rng):
        self.p = params
        self.rng = rng
        self.w = params.width_cells
        self.h = params.height_cells
        self.grid = np.full((self.h, self.w), WALL, dtype=np.uint8)
        self.owner = np.full((self.h, self.w), _WALL_OWNER, dtype=np.int32)
        self.leaves: list[_Leaf] = []
        self.children: list[tuple[int, tuple[int, int, int, int]]] = []  # (parent leaf, gross)
        self.doors: list[tuple[tuple[int, int], int, int]] = []  # (cell, owner a, owner b)
        self.entrance: list[tuple[int, int]] = []
        self.hcorrs: list[tuple[int, int]] = []
        self.island_rooms: set[int] = set()

    # -- carving helpers ----------------------------------------------------

    def _free_rect(self, x0: int, y0: int, x1: int, y1: int) -> None:
        self.grid[y0 : y1 + 1, x0 : x1 + 1] = FREE
        self.owner[y0 : y1 + 1, x0 : x1 + 1] = _OUTSIDE

    def _wall_cells(self, cells: list[tuple[int, int]]) -> None:
        for x, y in cells:
            self.grid[y, x] = WALL
            self.owner[y, x] = _WALL_OWNER

    # -- layout -------------------------------------------------------------

    def build(self) -> Optional[GridSite]:
        p, rng = self.p, self.rng
        if p.n_rooms == 0:
            self._free_rect(1, 1, self.w - 2, self.h - 2)
            self._carve_entrance_anywhere()
            return self._assemble()

        cw = p.corridor_min_width
        max_block = rng.randint(16, 24)
        rows_lo, rows_hi = 1, self.h - 2
        cols_lo, cols_hi = 1, self.w - 2

        # One horizontal corridor with a bank on each side. Every bank touches
        # a boundary row, so block walls always connect to the site walls and
        # only the explicit island mechanism can produce isolated rooms.
        banks = self._forced_rows(rows_lo, rows_hi, cw)
        if banks is None:
            return None
        for (c0, c1) in self.hcorrs:
            self._free_rect(cols_lo, c0, cols_hi, c1)

        blocks: list[_Block] = []
        for (by0, by1) in banks:
            vcorrs: list[tuple[int, int]] = []
            segs = _split_segment(cols_lo, cols_hi, _MIN_BANK, max_block, cw, rng, vcorrs)
            for (c0, c1) in vcorrs:
                self._free_rect(c0, by0, c1, by1)
            for (bx0, bx1) in segs:
                blocks.append(
                    _Block(
                        bx0, by0, bx1, by1,
                        frame_left=bx0 != cols_lo,
                        frame_right=bx1 != cols_hi,
                        frame_bottom=by0 != rows_lo,
                        frame_top=by1 != rows_hi,
                    )
                )

        # Island plan: reserve the smallest block that can host the structure
        # as an open yard; the structure's walls must stay clear of all others.
        ni = 0
        yard_idx: Optional[int] = None
        island_block: Optional[_Block] = None
        if p.island_probability > 0 and rng.random() < p.island_probability:
            ni = 1 + rng.below(min(3, p.n_rooms))
            iw = rng.randint(2, 6)
            ih = rng.randint(2, 5)
            pitch = _MIN_LEAF + 1
            while ((iw + 1) // pitch) * ((ih + 1) // pitch) < ni:
                if iw <= ih:
                    iw += 1
                else:
                    ih += 1
            gw, gh = iw + 2, ih + 2
            eligible = [
                i for i, b in enumerate(blocks)
                if (b.x1 - b.x0 + 1) >= gw + 2 and (b.y1 - b.y0 + 1) >= gh + 2
            ]
            if eligible:
                eligible.sort(
                    key=lambda i: (
                        (blocks[i].x1 - blocks[i].x0 + 1) * (blocks[i].y1 - blocks[i].y0 + 1),
                        i,
                    )
                )
                yard_idx = eligible[rng.below(min(2, len(eligible)))]
                yard = blocks[yard_idx]
                self._free_rect(yard.x0, yard.y0, yard.x1, yard.y1)
                x0 = yard.x0 + 1 + rng.below(yard.x1 - yard.x0 + 1 - gw - 1)
                y0 = yard.y0 + 1 + rng.below(yard.y1 - yard.y0 + 1 - gh - 1)
                island_block = _Block(
                    x0, y0, x0 + gw - 1, y0 + gh - 1,
                    frame_left=True, frame_right=True,
                    frame_bottom=True, frame_top=True,
                    full_frame=True,
                )
            else:
                ni = 0

        remaining = p.n_rooms - ni
        room_blocks = [b for i, b in enumerate(blocks) if i != yard_idx]
        caps = [b.capacity() for b in room_blocks]
        # Nested rooms live inside leaves, at most one per leaf.
        dn = sum(1 for _ in range(remaining) if rng.random() < p.nesting_probability)
        dn = min(dn, remaining // 2)
        leaves_target = remaining - dn
        if leaves_target > 0 and sum(caps) == 0:
            return None
        quotas = _allocate(leaves_target, caps)
        if quotas is None:
            return None

        for block, quota in zip(room_blocks, quotas):
            if quota == 0:
                self._free_rect(block.x0, block.y0, block.x1, block.y1)  # open plaza
                continue
            if not self._build_block(block, quota):
                return None
        if island_block is not None:
            island_start = len(self.leaves)
            ib = island_block
            frame = [(x, ib.y0) for x in range(ib.x0, ib.x1 + 1)]
            frame += [(x, ib.y1) for x in range(ib.x0, ib.x1 + 1)]
            frame += [(ib.x0, y) for y in range(ib.y0 + 1, ib.y1)]
            frame += [(ib.x1, y) for y in range(ib.y0 + 1, ib.y1)]
            self._wall_cells(frame)
            ix0, iy0, ix1, iy1 = island_block.interior()
            self._free_rect(ix0, iy0, ix1, iy1)
            if not self._bsp(len(self.leaves), _Leaf(ix0, iy0, ix1, iy1), ni):
                return None
            self.island_rooms = set(range(island_start, len(self.leaves)))

        if not self._place_nested(dn):
            return None

        self._fill_owners()
        if not self._carve_doors():
            return None
        if not self._carve_entrance():
            return None
        return self._assemble()

    def _forced_rows(self, lo: int, hi: int, cw: int) -> Optional[list[tuple[int, int]]]:
        """Degenerate layouts: exactly one horizontal corridor."""
        length = hi - lo + 1
        rng = self.rng
        if length >= 2 * _MIN_BANK + cw:
            c = lo + _MIN_BANK + rng.below(length - 2 * _MIN_BANK - cw + 1)
            self.hcorrs.append((c, c + cw - 1))
            return [(lo, c - 1), (c + cw, hi)]
        if length >= _MIN_BANK + cw:
            if rng.below(2) == 0:
                self.hcorrs.append((lo, lo + cw - 1))
                return [(lo + cw, hi)]
            self.hcorrs.append((hi - cw + 1, hi))
            return [(lo, hi - cw)]
        return None

    def _build_block(self, block: _Block, quota: int) -> bool:
        ix0, iy0, ix1, iy1 = block.interior()
        if ix1 - ix0 + 1 < _MIN_LEAF or iy1 - iy0 + 1 < _MIN_LEAF:
            return False
        self._free_rect(ix0, iy0, ix1, iy1)
        return self._bsp(len(self.leaves), _Leaf(ix0, iy0, ix1, iy1), quota)

    def _bsp(self, base: int, root: _Leaf, quota: int) -> bool:
        rng = self.rng
        self.leaves.append(root)
        while len(self.leaves) - base < quota:
            splittable = [
                i for i in range(base, len(self.leaves))
                if self.leaves[i].splittable_axes()
            ]
            if not splittable:
                return False
            idx = splittable[rng.below(len(splittable))]
            self._split_leaf(idx)
        return True

    def _split_leaf(self, idx: int) -> None:
        rng = self.rng
        leaf = self.leaves[idx]
        axes = leaf.splittable_axes()
        if len(axes) == 2:
            axis = "x" if leaf.w > leaf.h else ("y" if leaf.h > leaf.w else axes[rng.below(2)])
        else:
            axis = axes[0]
        if axis == "x":
            lo, hi = leaf.x0 + _MIN_LEAF, leaf.x1 - _MIN_LEAF
            # Half the time pack tightly from the low side; this keeps dense
            # quotas reachable while preserving variety.
            xs = lo if rng.below(2) == 0 else lo + rng.below(hi - lo + 1)
            self._wall_cells([(xs, y) for y in range(leaf.y0, leaf.y1 + 1)])
            self.leaves[idx] = _Leaf(leaf.x0, leaf.y0, xs - 1, leaf.y1)
            self.leaves.append(_Leaf(xs + 1, leaf.y0, leaf.x1, leaf.y1))
        else:
            lo, hi = leaf.y0 + _MIN_LEAF, leaf.y1 - _MIN_LEAF
            ys = lo if rng.below(2) == 0 else lo + rng.below(hi - lo + 1)
            self._wall_cells([(x, ys) for x in range(leaf.x0, leaf.x1 + 1)])
            self.leaves[idx] = _Leaf(leaf.x0, leaf.y0, leaf.x1, ys - 1)
            self.leaves.append(_Leaf(leaf.x0, ys + 1, leaf.x1, leaf.y1))

    def _place_nested(self, dn: int) -> bool:
        """Carve dn nested rooms into the largest leaves, splitting to cover shortfall."""
        if dn == 0:
            return True
        rng = self.rng
        candidates = [
            i for i in range(len(self.leaves))
            if i not in self.island_rooms
            and self.leaves[i].w >= _MIN_LEAF + 2 and self.leaves[i].h >= _MIN_LEAF + 2
        ]
        candidates.sort(key=lambda i: (-(self.leaves[i].w * self.leaves[i].h), i))
        chosen = candidates[:dn]
        shortfall = dn - len(chosen)
        for _ in range(shortfall):
            splittable = [
                i for i in range(len(self.leaves))
                if i not in chosen and self.leaves[i].splittable_axes()
            ]
            if not splittable:
                return False
            self._split_leaf(splittable[rng.below(len(splittable))])

        for idx in chosen:
            leaf = self.leaves[idx]
            ci = rng.randint(_MIN_LEAF, min(4, leaf.w - 2))
            cj = rng.randint(_MIN_LEAF, min(4, leaf.h - 2))
            corner = rng.below(4)
            if corner in (0, 2):  # west side
                gx0, gx1 = leaf.x0, leaf.x0 + ci  # gross includes one frame column
                fx = gx1
            else:
                gx0, gx1 = leaf.x1 - ci, leaf.x1
                fx = gx0
            if corner in (0, 1):  # south side
                gy0, gy1 = leaf.y0, leaf.y0 + cj
                fy = gy1
            else:
                gy0, gy1 = leaf.y1 - cj, leaf.y1
                fy = gy0
            self._wall_cells([(fx, y) for y in range(gy0, gy1 + 1)])
            self._wall_cells([(x, fy) for x in range(gx0, gx1 + 1)])
            leaf.child = (gx0, gy0, gx1, gy1)
            self.children.append((idx, (gx0, gy0, gx1, gy1)))
        return True

    # -- owner grid and doors -------------------------------------------------

    def _child_interior(self, parent: _Leaf, gross: tuple[int, int, int, int]):
        gx0, gy0, gx1, gy1 = gross
        ix0 = gx0 + (1 if gx0 != parent.x0 else 0)
        ix1 = gx1 - (1 if gx1 != parent.x1 else 0)
        iy0 = gy0 + (1 if gy0 != parent.y0 else 0)
        iy1 = gy1 - (1 if gy1 != parent.y1 else 0)
        return ix0, iy0, ix1, iy1

    def _fill_owners(self) -> None:
        for i, leaf in enumerate(self.leaves):
            self.owner[leaf.y0 : leaf.y1 + 1, leaf.x0 : leaf.x1 + 1] = i
        n = len(self.leaves)
        for k, (parent_idx, gross) in enumerate(self.children):
            gx0, gy0, gx1, gy1 = gross
            self.owner[gy0 : gy1 + 1, gx0 : gx1 + 1] = _WALL_OWNER
            ix0, iy0, ix1, iy1 = self._child_interior(self.leaves[parent_idx], gross)
            self.owner[iy0 : iy1 + 1, ix0 : ix1 + 1] = n + k
        # Walls always override interior fills.
        self.owner[self.grid == WALL] = _WALL_OWNER

    def _door_candidates(self) -> dict[tuple[int, int], list[tuple[int, int]]]:
        """Candidate door cells per (owner a, owner b) pair, a < b.

        A candidate is a straight-run wall cell with free cells of the two
        owners on opposite sides; junction and corner cells never qualify.
        """
        owner = self.owner
        wall = self.grid == WALL
        mid = wall[1:-1, 1:-1]
        west, east = wall[1:-1, :-2], wall[1:-1, 2:]
        south, north = wall[:-2, 1:-1], wall[2:, 1:-1]
        across_y = mid & west & east & ~south & ~north  # run along x, free above/below
        across_x = mid & south & north & ~west & ~east

        found: dict[tuple[int, int], list[tuple[int, int]]] = {}

        def collect(mask: np.ndarray, dx: int, dy: int) -> None:
            ys, xs = np.nonzero(mask)
            if not len(ys):
                return
            gys, gxs = ys + 1, xs + 1
            a = owner[gys - dy, gxs - dx]
            b = owner[gys + dy, gxs + dx]
            ok = (a != _WALL_OWNER) & (b != _WALL_OWNER) & (a != b)
            lo = np.minimum(a, b)[ok].tolist()
            hi = np.maximum(a, b)[ok].tolist()
            for x, y, l, h in zip(gxs[ok].tolist(), gys[ok].tolist(), lo, hi):
                found.setdefault((l, h), []).append((x, y))

        collect(across_y, 0, 1)
        collect(across_x, 1, 0)
        for cells in found.values():
            cells.sort()
        return found

    def _carve_doors(self) -> bool:
        rng = self.rng
        candidates = self._door_candidates()
        n_leaves = len(self.leaves)
        child_ids = set(range(n_leaves, n_leaves + len(self.children)))

        # Leaf graph edges exclude nested children; children connect only to
        # their parent leaf through a dedicated door.
        edges = {
            key: cells
            for key, cells in candidates.items()
            if key[0] not in child_ids and key[1] not in child_ids
        }
        by_node: dict[int, list[tuple[int, int]]] = {}
        for key in sorted(edges):
            by_node.setdefault(key[0], []).append(key)
            by_node.setdefault(key[1], []).append(key)

        visited = {_OUTSIDE}
        used: set[tuple[int, int]] = set()
        frontier = list(by_node.get(_OUTSIDE, ()))
        while len(visited) < n_leaves + 1:
            key = None
            while frontier:
                pick = rng.below(len(frontier))
                cand = frontier[pick]
                frontier[pick] = frontier[-1]
                frontier.pop()
                if (cand[0] in visited) != (cand[1] in visited):
                    key = cand
                    break
            if key is None:
                return False
            cells = edges[key]
            self._open_door(cells[rng.below(len(cells))], key)
            used.add(key)
            new_node = key[0] if key[1] in visited else key[1]
            visited.add(new_node)
            frontier.extend(by_node.get(new_node, ()))
        for key in sorted(edges):
            if key not in used and rng.random() < _EXTRA_DOOR_P:
                cells = edges[key]
                self._open_door(cells[rng.below(len(cells))], key)

        # One door per nested room, opening into its parent.
        for k, (parent_idx, _) in enumerate(self.children):
            key = (min(parent_idx, n_leaves + k), max(parent_idx, n_leaves + k))
            cells = candidates.get(key)
            if not cells:
                return False
            self._open_door(cells[rng.below(len(cells))], key)
        return True

    def _open_door(self, cell: tuple[int, int], owners: tuple[int, int]) -> None:
        x, y = cell
        self.grid[y, x] = FREE
        self.owner[y, x] = _OUTSIDE
        self.doors.append((cell, owners[0], owners[1]))

    # -- entrance -------------------------------------------------------------

    def _carve_entrance_anywhere(self) -> None:
        rng = self.rng
        ew = self.p.entrance_width
        side = rng.below(4)
        if side in (0, 1):  # bottom (y=0) or top (y=h-1)
            start = 1 + rng.below(self.w - 2 - ew + 1)
            yy = 0 if side == 0 else self.h - 1
            cells = [(x, yy) for x in range(start, start + ew)]
        else:
            start = 1 + rng.below(self.h - 2 - ew + 1)
            xx = 0 if side == 2 else self.w - 1
            cells = [(xx, y) for y in range(start, start + ew)]
        for (x, y) in cells:
            self.grid[y, x] = FREE
            self.owner[y, x] = _OUTSIDE
        self.entrance = sorted(cells)

    def _carve_entrance(self) -> bool:
        """Open the boundary into a corridor so the site is enterable."""
        rng = self.rng
        ew = self.p.entrance_width
        options: list[tuple[str, int, int]] = []
        for (c0, c1) in self.hcorrs:
            options.append(("left", c0, c1))
            options.append(("right", c0, c1))
        # Runs of open columns where free space touches the top/bottom boundary.
        for side, yy in (("bottom", 1), ("top", self.h - 2)):
            run_start = None
            for x in range(1, self.w - 1):
                open_col = self.grid[yy, x] == FREE and self.owner[yy, x] == _OUTSIDE
                if open_col and run_start is None:
                    run_start = x
                elif not open_col and run_start is not None:
                    if x - run_start >= 1:
                        options.append((side, run_start, x - 1))
                    run_start = None
            if run_start is not None:
                options.append((side, run_start, self.w - 2))
        if not options:
            return False
        side, c0, c1 = options[rng.below(len(options))]
        span = c1 - c0 + 1
        if ew <= span:
            start = c0 + rng.below(span - ew + 1)
        else:
            start = max(1, c0 - (ew - span) // 2)
        if side in ("left", "right"):
            start = min(start, self.h - 1 - ew)
            xx = 0 if side == "left" else self.w - 1
            cells = [(xx, y) for y in range(start, start + ew)]
        else:
            start = min(start, self.w - 1 - ew)
            yy = 0 if side == "bottom" else self.h - 1
            cells = [(x, yy) for x in range(start, start + ew)]
        for (x, y) in cells:
            self.grid[y, x] = FREE
            self.owner[y, x] = _OUTSIDE
        self.entrance = sorted(cells)
        return True

    # -- assembly -------------------------------------------------------------

    def _assemble(self) -> Optional[GridSite]:
        p = self.p
        doors_by_room: dict[int, set[tuple[int, int]]] = {}
        for cell, a, b in self.doors:
            for room_id in (a, b):
                if room_id >= 0:
                    doors_by_room.setdefault(room_id, set()).add(cell)

        rooms: list[Room] = []
        for i, leaf in enumerate(self.leaves):
            cells = {
                (x, y)
                for x in range(leaf.x0, leaf.x1 + 1)
                for y in range(leaf.y0, leaf.y1 + 1)
            }
            if leaf.child is not None:
                gx0, gy0, gx1, gy1 = leaf.child
                cells -= {
                    (x, y)
                    for x in range(gx0, gx1 + 1)
                    for y in range(gy0, gy1 + 1)
                }
            rooms.append(
                Room(
                    id=i,
                    interior=frozenset(cells),
                    doors=frozenset(doors_by_room.get(i, ())),
                )
            )
        n = len(self.leaves)
        for k, (parent_idx, gross) in enumerate(self.children):
            ix0, iy0, ix1, iy1 = self._child_interior(self.leaves[parent_idx], gross)
            cells = {(x, y) for x in range(ix0, ix1 + 1) for y in range(iy0, iy1 + 1)}
            rooms.append(
                Room(
                    id=n + k,
                    interior=frozenset(cells),
                    doors=frozenset(doors_by_room.get(n + k, ())),
                    parent=parent_idx,
                )
            )

        victims: list[Victim] = []
        if p.n_victims:
            order = list(range(len(rooms)))
            self.rng.shuffle(order)
            for room_id in order[: p.n_victims]:
                cells = sorted(rooms[room_id].interior)
                victims.append(Victim(position=cells[self.rng.below(len(cells))]))

        site = GridSite(
            width=self.w,
            height=self.h,
            cells=self.grid.tobytes(),
            entrance=tuple(self.entrance),
            rooms=tuple(rooms),
            victims=tuple(victims),
            seed=p.seed,
        )
        if len(rooms) != p.n_rooms:
            return None
        if validate_site(site):
            return None
        return site


def generate(params: SiteGenParams) -> GridSite:
    """Generate one valid site; identical (params, seed) gives identical sites."""
    _validate_params(params)
    for attempt in range(_ATTEMPTS):
        rng = Rng(mix_parts(params.seed, "attempt", attempt))
        site = _Builder(params, rng).build()
        if site is not None:
            return site
    raise InfeasibleParams(
        f"could not build a valid site for {params} within {_ATTEMPTS} attempts"
    )


def generate_batch(params: SiteGenParams, count: int, base_seed: int) -> list[GridSite]:
    """Generate ``count`` sites from sub-seeds mix64(base_seed + index)."""
    if count < 1:
        raise ValueError("count must be at least 1")
    sites = []
    for index in range(count):
        sub = derive_subseed(base_seed, index)
        try:
            sites.append(generate(replace(params, seed=sub)))
        except InfeasibleParams as exc:
            raise InfeasibleParams(f"site index {index}: {exc}") from exc
    return sites
