"""Domain types for accelerator architectures, tensor workloads and mappings.

An architecture is a compute array plus an ordered memory hierarchy
(L1 closest to the array, Ln outermost).  A workload is a perfectly
nested loop over named dimensions, where each operand declares the
subset of dimensions its index depends on.  A mapping assigns loop
dimensions spatially (array axes, cores) and temporally (per-level
tiled trip counts).

All types are immutable after construction.  Constructors do not raise
on semantic problems; ``validate`` returns the full list of violations
so a caller (or the CLI) can report them in one pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

INPUT = "input"
OUTPUT = "output"

OVERLAPPED = "overlapped"
SERIALIZED = "serialized"

# Accumulators default to 4x the declared element width, capped at 32 bits:
# partial sums need the extra headroom, full words rarely more.
ACCUM_WIDTH_FACTOR = 4
ACCUM_WIDTH_CAP = 32


def _bytes_per_element(bits: int) -> float:
    """Whole-byte storage footprint of one element (sub-byte rounds up)."""
    return float(math.ceil(bits / 8))


@dataclass(frozen=True)
class MemoryLevel:
    """One level of the memory hierarchy.

    ``bandwidth`` is in bytes/cycle, ``energy_per_byte`` in pJ/byte.
    ``capacity`` is in bytes; ``None`` means unbounded (e.g. DRAM).
    ``level_index`` starts at 1 for the level closest to the array.
    """

    name: str
    bandwidth: float
    energy_per_byte: float
    capacity: int | None = None
    level_index: int = 1


@dataclass(frozen=True)
class ComputeArray:
    """A rectangular array of MAC units.

    ``dims`` are (axis label, size) pairs; one MAC per lattice point,
    one MAC per cycle.  A MAC counts as ``ops_per_mac`` = 2 operations
    (multiply + accumulate), so the peak operator count is
    ``a_op = 2 * prod(sizes)`` ops/cycle.  ``throughput_scale`` folds
    in precision effects (narrower operands packing more MACs into the
    same datapath, or bit-serial operation slowing it down) without
    touching the physical lattice.
    """

    dims: tuple[tuple[str, int], ...]
    energy_per_op: float  # pJ per operation
    ops_per_mac: int = 2
    throughput_scale: float = 1.0

    @property
    def a_op(self) -> float:
        n = 1
        for _, size in self.dims:
            n *= size
        return self.ops_per_mac * n * self.throughput_scale

    def axis_size(self, axis: str) -> int:
        for name, size in self.dims:
            if name == axis:
                return size
        raise KeyError(f"no array axis named {axis!r}")


@dataclass(frozen=True)
class ArchSpec:
    """Compute array + memory hierarchy + clock.

    ``latency_overlap`` selects whether transfers and compute proceed
    concurrently ("overlapped", the default for double-buffered
    designs) or back to back ("serialized").
    ``base_precision_bits`` records the native datapath width used as
    the reference point by the quantization transform.
    """

    array: ComputeArray
    levels: tuple[MemoryLevel, ...]
    clock: float  # Hz
    latency_overlap: str = OVERLAPPED
    base_precision_bits: int = 8

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def level(self, index: int) -> MemoryLevel:
        """Level by 1-based index (1 = closest to the array)."""
        return self.levels[index - 1]


@dataclass(frozen=True)
class LoopDim:
    name: str
    size: int


@dataclass(frozen=True)
class OperandSpec:
    """A tensor operand and its index signature.

    ``relevant_dims`` lists the loop dimensions the operand's index
    depends on; iterating any other dimension leaves the same element
    (or tile) in place, which is exactly what the reuse analysis
    exploits.  ``accum_bits`` is the partial-sum width for output-like
    operands (defaulted in __post_init__); ``bytes_per_element`` can
    be overridden with a fractional value by the quantization pass
    (block metadata amortized per element), otherwise it is the
    whole-byte footprint of ``precision_bits``.
    """

    name: str
    role: str  # INPUT or OUTPUT
    relevant_dims: tuple[str, ...]
    precision_bits: int = 8
    density: float = 1.0
    accum_bits: int | None = None
    bytes_per_element: float | None = None

    def __post_init__(self):
        if self.role == OUTPUT and self.accum_bits is None:
            object.__setattr__(
                self,
                "accum_bits",
                min(ACCUM_WIDTH_FACTOR * self.precision_bits, ACCUM_WIDTH_CAP),
            )
        if self.bytes_per_element is None:
            object.__setattr__(
                self, "bytes_per_element", _bytes_per_element(self.precision_bits)
            )

    @property
    def relevant(self) -> frozenset[str]:
        return frozenset(self.relevant_dims)

    @property
    def accum_bytes_per_element(self) -> float:
        if self.accum_bits is None:
            return self.bytes_per_element  # type: ignore[return-value]
        return _bytes_per_element(self.accum_bits)


@dataclass(frozen=True)
class WorkloadSpec:
    """A named loop nest with operand dependency signatures.

    Each full index tuple is one MAC, so the task operation count is
    ``n_op = 2 * prod(dim sizes)``.
    """

    name: str
    dims: tuple[LoopDim, ...]
    operands: tuple[OperandSpec, ...]

    @property
    def n_op(self) -> int:
        n = 1
        for d in self.dims:
            n *= d.size
        return 2 * n

    @property
    def dim_sizes(self) -> dict[str, int]:
        return {d.name: d.size for d in self.dims}

    def operand(self, name: str) -> OperandSpec:
        for op in self.operands:
            if op.name == name:
                return op
        raise KeyError(f"no operand named {name!r}")

    @property
    def output(self) -> OperandSpec:
        for op in self.operands:
            if op.role == OUTPUT:
                return op
        raise KeyError("workload has no output-like operand")


@dataclass(frozen=True)
class SpatialUnroll:
    """One parallel (parfor) assignment: dim unrolled on an array axis."""

    axis: str
    dim: str
    factor: int


@dataclass(frozen=True)
class MappingSpec:
    """Spatial and temporal allocation of a workload onto an architecture.

    ``temporal`` holds one loop list per memory level, level 1 first;
    within each level loops are listed innermost first, so the global
    nest read inner to outer is the concatenation of the per-level
    lists.  ``core_split`` optionally splits one dimension across
    replicated cores (each core owns a private array + L1; levels >= 2
    are shared).

    ``pinned_operand`` marks an operand held inside the compute array
    itself (in-memory-compute weights): it moves no bytes across the
    L1 boundary, and if ``reload_cycles_per_tile`` is set each tile of
    it costs that many serialized (non-overlapped) stall cycles to
    load into the array.  ``None`` reload cycles means reloads are
    double buffered and free.
    """

    spatial: tuple[SpatialUnroll, ...]
    temporal: tuple[tuple[tuple[str, int], ...], ...]
    cores: int = 1
    core_split: tuple[str, int] | None = None
    pinned_operand: str | None = None
    reload_cycles_per_tile: int | None = None

    def temporal_at(self, level_index: int) -> tuple[tuple[str, int], ...]:
        """Loops tiled at a level (1-based); empty past the declared lists."""
        if level_index - 1 < len(self.temporal):
            return self.temporal[level_index - 1]
        return ()

    def nest(self, n_levels: int) -> tuple[tuple[int, str, int], ...]:
        """The full temporal nest as (level, dim, trip), innermost first."""
        out: list[tuple[int, str, int]] = []
        for li in range(1, n_levels + 1):
            for dim, trip in self.temporal_at(li):
                out.append((li, dim, trip))
        return tuple(out)

    def spatial_factor(self, dim: str) -> int:
        """Product of array-axis unroll factors applied to ``dim``."""
        f = 1
        for u in self.spatial:
            if u.dim == dim:
                f *= u.factor
        return f

    def parallel_factor(self, dim: str) -> int:
        """Spatial unrolls times the core split, i.e. everything that
        widens a dim within one cycle."""
        f = self.spatial_factor(dim)
        if self.core_split is not None and self.core_split[0] == dim:
            f *= self.core_split[1]
        return f


class InvalidMappingError(ValueError):
    """Raised by analyses that require a valid (arch, workload, mapping)."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


def tile_extent(mapping: MappingSpec, dim: str, up_to_level: int) -> int:
    """Elements of ``dim`` covered by one tile at ``up_to_level``.

    Counts all parallel factors plus temporal trips at levels <=
    ``up_to_level``; this is the per-dim footprint of the tile a level
    serves to the levels below it.
    """
    extent = mapping.parallel_factor(dim)
    for li in range(1, up_to_level + 1):
        for d, trip in mapping.temporal_at(li):
            if d == dim:
                extent *= trip
    return extent


def operand_footprint_bytes(
    wl: WorkloadSpec, mapping: MappingSpec, operand: OperandSpec, level_index: int
) -> int:
    """Tile footprint of one operand at a level, in whole bytes."""
    elements = 1
    for dim in operand.relevant_dims:
        elements *= tile_extent(mapping, dim, level_index)
    return elements * math.ceil(operand.precision_bits / 8)


def validate(arch: ArchSpec, wl: WorkloadSpec, mapping: MappingSpec) -> list[str]:
    """Check every structural invariant; an empty list means valid.

    Violations are data, not exceptions: the list carries one message
    per broken invariant, including capacity overflows (tile footprint
    summed over operands exceeding a bounded level).
    """
    v: list[str] = []

    # -- architecture field invariants
    for lvl in arch.levels:
        if lvl.bandwidth <= 0:
            v.append(f"level {lvl.name}: bandwidth must be > 0 (got {lvl.bandwidth})")
        if lvl.energy_per_byte < 0:
            v.append(f"level {lvl.name}: energy_per_byte must be >= 0")
        if lvl.capacity is not None and lvl.capacity <= 0:
            v.append(f"level {lvl.name}: capacity must be > 0 when bounded")
    if not arch.levels:
        v.append("architecture needs at least one memory level")
    indices = [lvl.level_index for lvl in arch.levels]
    if indices != list(range(1, len(indices) + 1)):
        v.append(f"level indices must run 1..{len(indices)} contiguously (got {indices})")
    if arch.clock <= 0:
        v.append(f"clock must be > 0 (got {arch.clock})")
    if arch.array.energy_per_op < 0:
        v.append("array energy_per_op must be >= 0")
    for axis, size in arch.array.dims:
        if size < 1:
            v.append(f"array axis {axis}: size must be >= 1")

    # -- workload invariants
    names = [d.name for d in wl.dims]
    if len(set(names)) != len(names):
        v.append(f"duplicate loop dim names in workload: {names}")
    dimset = set(names)
    for op in wl.operands:
        extra = set(op.relevant_dims) - dimset
        if extra:
            v.append(f"operand {op.name}: relevant dims {sorted(extra)} not in workload")
        if op.precision_bits < 1:
            v.append(f"operand {op.name}: precision_bits must be >= 1")
        if not (0 < op.density <= 1):
            v.append(f"operand {op.name}: density must be in (0, 1]")
    n_outputs = sum(1 for op in wl.operands if op.role == OUTPUT)
    if n_outputs != 1:
        v.append(f"workload must have exactly one output-like operand (got {n_outputs})")
    for d in wl.dims:
        if d.size < 1:
            v.append(f"dim {d.name}: size must be >= 1")
        if not any(d.name in op.relevant_dims for op in wl.operands):
            v.append(f"dim {d.name} is relevant to no operand")

    # -- mapping invariants
    seen_axes: set[str] = set()
    seen_pairs: set[tuple[str, str]] = set()
    axis_names = {a for a, _ in arch.array.dims}
    for u in mapping.spatial:
        if u.axis not in axis_names:
            v.append(f"spatial unroll targets unknown array axis {u.axis!r}")
        if u.dim not in dimset:
            v.append(f"spatial unroll of unknown dim {u.dim!r}")
        if u.axis in seen_axes:
            v.append(f"array axis {u.axis} mapped by more than one spatial entry")
        seen_axes.add(u.axis)
        if (u.axis, u.dim) in seen_pairs:
            v.append(f"duplicate spatial unroll for (axis {u.axis}, dim {u.dim})")
        seen_pairs.add((u.axis, u.dim))
        if u.dim in dimset and u.factor > wl.dim_sizes[u.dim]:
            v.append(
                f"spatial unroll of {u.dim} by {u.factor} exceeds dim size "
                f"{wl.dim_sizes[u.dim]}"
            )
    if mapping.cores < 1:
        v.append(f"cores must be >= 1 (got {mapping.cores})")
    if len(mapping.temporal) > len(arch.levels):
        v.append(
            f"mapping tiles {len(mapping.temporal)} levels but the "
            f"architecture has {len(arch.levels)}"
        )
    for li in range(1, len(mapping.temporal) + 1):
        for dim, trip in mapping.temporal_at(li):
            if dim not in dimset:
                v.append(f"temporal loop over unknown dim {dim!r} at L{li}")
            if trip < 1:
                v.append(f"temporal trip count for {dim} at L{li} must be >= 1")
    if mapping.core_split is not None:
        cd, cf = mapping.core_split
        if cd not in dimset:
            v.append(f"core split names unknown dim {cd!r}")
        if cf < 1:
            v.append(f"core split factor must be >= 1 (got {cf})")
    if mapping.pinned_operand is not None:
        if not any(op.name == mapping.pinned_operand for op in wl.operands):
            v.append(f"pinned operand {mapping.pinned_operand!r} not in workload")
    if mapping.reload_cycles_per_tile is not None and mapping.pinned_operand is None:
        v.append("reload_cycles_per_tile requires a pinned operand")

    # -- factorization closure: spatial x temporal x core == dim size, per dim
    for d in wl.dims:
        product = mapping.parallel_factor(d.name)
        for li in range(1, len(mapping.temporal) + 1):
            for dim, trip in mapping.temporal_at(li):
                if dim == d.name:
                    product *= trip
        if product != d.size:
            v.append(
                f"dim {d.name}: spatial x temporal x core product {product} "
                f"!= size {d.size}"
            )

    # -- capacity: per-level tile footprints summed over operands
    for lvl in arch.levels:
        if lvl.capacity is None:
            continue
        total = sum(
            operand_footprint_bytes(wl, mapping, op, lvl.level_index)
            for op in wl.operands
        )
        if total > lvl.capacity:
            v.append(
                f"level {lvl.name}: tile footprint {total} B exceeds capacity "
                f"{lvl.capacity} B"
            )

    return v
