"""Wildfire spread: 8-neighbor cellular automaton plus fire-aware escape routing.

Per step, every burning cell tries to ignite each 8-neighbor with
p = clamp(p0 * fuel_target * exp(k_w * w * cos(wind_dir - spread_dir))
          * exp(k_s * (z_target - z_source) / dist), 0, 1).
Deterministic mode ignites iff p >= 0.5; stochastic mode compares p against
seeded uniforms drawn in fixed row-major cell order.  Cells burn for
burn_duration steps, then stay burned; fuel <= 0 cells are nonflammable.

Wind and spread directions are compass degrees (0 = north, 90 = east) and
name the direction the wind/fire moves toward.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels import BURNED, BURNING, NONFLAMMABLE, UNBURNED
from .errors import ValidationError
from .grid import GridSpec, RasterLayer
from .roads import RoadNetwork

STATE_NAMES = {UNBURNED: "unburned", BURNING: "burning",
               BURNED: "burned", NONFLAMMABLE: "nonflammable"}


@dataclass(frozen=True)
class FireParams:
    p0: float = 0.6
    wind_speed: float = 0.0        # m/s
    wind_dir_deg: float = 0.0      # direction the wind blows toward
    wind_coeff: float = 0.0        # k_w
    slope_coeff: float = 0.0       # k_s
    burn_duration: int = 2         # steps a cell stays burning
    minutes_per_step: float = 10.0
    mode: str = "deterministic"    # "deterministic" | "stochastic"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p0 <= 1.0:
            raise ValidationError(f"p0 must be in [0, 1], got {self.p0}")
        if self.wind_coeff < 0 or self.slope_coeff < 0:
            raise ValidationError("wind/slope coefficients must be >= 0")
        if self.burn_duration < 1:
            raise ValidationError("burn_duration must be >= 1")
        if not self.minutes_per_step > 0:
            raise ValidationError("minutes_per_step must be > 0")
        if self.mode not in ("deterministic", "stochastic"):
            raise ValidationError(f"unknown fire mode {self.mode!r}")


@dataclass(frozen=True)
class FireState:
    grid: np.ndarray        # int8 state codes
    step: int
    minutes_per_step: float

    @property
    def minutes(self) -> float:
        return self.step * self.minutes_per_step


class FireSimulation:
    """State sequence of one run; states[t] is the grid after t steps."""

    def __init__(self, spec: GridSpec, states: list[FireState],
                 params: FireParams):
        self.spec = spec
        self.states = states
        self.params = params

    @property
    def num_steps(self) -> int:
        return self.states[-1].step

    @property
    def horizon_minutes(self) -> float:
        return self.num_steps * self.params.minutes_per_step

    def state_layer(self, step: int) -> RasterLayer:
        return RasterLayer(self.spec, self.states[step].grid.astype(np.float64),
                           f"fire_step_{step}", "state code")


def ignition_probabilities(fuel: np.ndarray, elevation: np.ndarray | None,
                           params: FireParams, cellsize: float) -> np.ndarray:
    """(8, nrows, ncols) chance that a burning neighbor at offset k ignites
    the cell.  Computed once per run: the factors are static."""
    nrows, ncols = fuel.shape
    p8 = np.empty((8, nrows, ncols), dtype=np.float64)
    for k, (di, dj) in enumerate(_kernels.NEIGHBOR_OFFSETS):
        # spread vector from source (target + offset) to target, in xy
        spread_deg = math.degrees(math.atan2(-dj, di))
        wind_factor = math.exp(
            params.wind_coeff * params.wind_speed
            * math.cos(math.radians(params.wind_dir_deg - spread_deg)))
        if elevation is not None and params.slope_coeff > 0:
            dist = cellsize * math.sqrt(di * di + dj * dj)
            z_src = np.empty_like(elevation)
            z_src[:] = elevation
            rs_dst = slice(max(0, -di), nrows - max(0, di))
            cs_dst = slice(max(0, -dj), ncols - max(0, dj))
            rs_src = slice(max(0, di), nrows + min(0, di))
            cs_src = slice(max(0, dj), ncols + min(0, dj))
            z_src[rs_dst, cs_dst] = elevation[rs_src, cs_src]
            slope_factor = np.exp(params.slope_coeff
                                  * (elevation - z_src) / dist)
        else:
            slope_factor = 1.0
        p8[k] = np.clip(params.p0 * fuel * wind_factor * slope_factor,
                        0.0, 1.0)
    return p8


def simulate_fire(fuel: RasterLayer, ignition, params: FireParams,
                  max_steps: int = 100,
                  elevation: RasterLayer | None = None) -> FireSimulation:
    """Run the automaton from the given ignition cells (row, col pairs)."""
    spec = fuel.spec
    if elevation is not None and elevation.spec != spec:
        raise ValidationError("elevation not aligned with fuel")
    if max_steps < 1:
        raise ValidationError("max_steps must be >= 1")
    fuel_vals = fuel.values
    state = np.where(fuel_vals <= 0.0, NONFLAMMABLE, UNBURNED).astype(np.int8)
    ignite_step = np.full(spec.shape, -1, dtype=np.int32)
    for (i, j) in ignition:
        if not (0 <= i < spec.nrows and 0 <= j < spec.ncols):
            raise ValidationError(f"ignition cell ({i}, {j}) outside grid")
        if state[i, j] == NONFLAMMABLE:
            raise ValidationError(f"ignition cell ({i}, {j}) is nonflammable")
        state[i, j] = BURNING
        ignite_step[i, j] = 0
    if not (state == BURNING).any():
        raise ValidationError("no ignition cells")

    p8 = ignition_probabilities(
        fuel_vals, elevation.values if elevation is not None else None,
        params, spec.cellsize)
    stochastic = params.mode == "stochastic"
    rng = np.random.default_rng(params.seed)
    u_dummy = np.zeros((spec.nrows, spec.ncols, 8), dtype=np.float64)

    states = [FireState(state.copy(), 0, params.minutes_per_step)]
    prev = state
    nxt = np.empty_like(state)
    for step in range(1, max_steps + 1):
        u = rng.random((spec.nrows, spec.ncols, 8)) if stochastic else u_dummy
        n_burning = _kernels.fire_step(prev, ignite_step, p8, u,
                                       not stochastic, step,
                                       params.burn_duration, nxt)
        states.append(FireState(nxt.copy(), step, params.minutes_per_step))
        prev, nxt = nxt, prev
        if n_burning == 0:
            break
    return FireSimulation(spec, states, params)


def burn_envelope(sim: FireSimulation, t_minutes: float) -> set[tuple[int, int]]:
    """Cells burning or burned at the last step with step*minutes <= t."""
    if t_minutes < 0:
        raise ValidationError("t_minutes must be >= 0")
    if t_minutes > sim.horizon_minutes:
        raise ValidationError(
            f"t={t_minutes} min beyond the simulated horizon "
            f"({sim.horizon_minutes} min)")
    step = min(int(t_minutes // sim.params.minutes_per_step), sim.num_steps)
    grid = sim.states[step].grid
    cells = np.nonzero((grid == BURNING) | (grid == BURNED))
    return {(int(i), int(j)) for i, j in zip(*cells)}


@dataclass
class EscapeRoute:
    path: list[int]
    minutes: float
    feasible: bool


def _envelope_masks(sim: FireSimulation) -> np.ndarray:
    masks = np.zeros((sim.num_steps + 1, *sim.spec.shape), dtype=bool)
    for s, st in enumerate(sim.states):
        masks[s] = (st.grid == BURNING) | (st.grid == BURNED)
    return masks


def escape_route(net: RoadNetwork, start: int, sim: FireSimulation,
                 walk_speed_mps: float = 1.4) -> EscapeRoute:
    """Earliest-arrival path to any node whose cell never burns.

    An edge may be entered at time t only if neither endpoint's cell is in
    the burn envelope at t + edge time.  The envelope is monotone, so plain
    earliest-arrival Dijkstra over (time, node) is exact.  A start inside
    the current envelope is infeasible, not an error.
    """
    net.require_node(start)
    if not walk_speed_mps > 0:
        raise ValidationError("walk speed must be > 0")
    masks = _envelope_masks(sim)
    mps = sim.params.minutes_per_step

    def cell_of(node: int):
        x, y = net.nodes[node]
        if not sim.spec.contains(x, y):
            return None
        return sim.spec.cell_of(x, y)

    def in_envelope(node: int, t: float) -> bool:
        cell = cell_of(node)
        if cell is None:
            return False
        step = min(int(t // mps), sim.num_steps)
        return bool(masks[step][cell])

    def is_safe(node: int) -> bool:
        cell = cell_of(node)
        return cell is None or not masks[sim.num_steps][cell]

    if in_envelope(start, 0.0):
        return EscapeRoute([], math.inf, False)

    meters_per_min = walk_speed_mps * 60.0
    best = {start: 0.0}
    parent: dict[int, int] = {}
    heap = [(0.0, start)]
    visited: set[int] = set()
    while heap:
        t, node = heapq.heappop(heap)
        if node in visited:
            continue
        visited.add(node)
        if is_safe(node):
            path = [node]
            while node in parent:
                node = parent[node]
                path.append(node)
            return EscapeRoute(list(reversed(path)), t, True)
        for other, edge in net.neighbors(node):
            te = edge.length / meters_per_min
            arrival = t + te
            if in_envelope(node, arrival) or in_envelope(other, arrival):
                continue
            if arrival < best.get(other, math.inf):
                best[other] = arrival
                parent[other] = node
                heapq.heappush(heap, (arrival, other))
    return EscapeRoute([], math.inf, False)
