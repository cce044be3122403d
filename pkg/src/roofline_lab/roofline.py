"""Dual roofline models: task energy, task latency, attainable
throughput and attainable energy efficiency as functions of
arithmetic intensity.

Task cost from an access profile:

    E_task = N_op * E_op + sum_i N_Li * E_Li                  (pJ)
    L_task = (1/f) * max(N_Ln/B_Ln, ..., N_L1/B_L1, N_op/A_op)

in overlapped mode; serialized hardware adds the terms instead of
overlapping them.

Both ceilings are plotted against the AI at one designated reference
level (default L2); the other levels enter through fixed ratios
r_i = AI_Li / AI_ref:

    throughput  P_TP(ai) = min_i(r_i * ai * B_Li, A_op)       ops/cycle
    efficiency  P_E(ai)  = 1 / (E_op + sum_i E_Li / (r_i*ai)) ops/pJ

The throughput roof has a sharp knee where the slowest memory slope
meets the compute plateau; the energy roof bends smoothly and
asymptotes at 1/E_op (ops/pJ, numerically equal to TOPS/W).  Curves
are kept in ops/cycle and ops/pJ internally; seconds appear only at
the reporting boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mapping import (
    AccessProfile,
    count_accesses,
    reload_stall_cycles,
    temporal_steps,
    utilization,
)
from .model import (
    SERIALIZED,
    ArchSpec,
    MappingSpec,
    WorkloadSpec,
)

REL_TOL = 1e-9
DEFAULT_REF_LEVEL = 2
SAMPLES_PER_DECADE = 64

COMPUTE = "compute"


@dataclass(frozen=True)
class LatencyResult:
    seconds: float
    cycles: float
    limiter: str  # level name or "compute"


@dataclass(frozen=True)
class RooflineCurve:
    """A sampled ceiling with its break points.

    ``kind`` is "throughput" (ops/cycle) or "energy" (ops/pJ).
    ``knees`` carries (ai_ref, label): for the throughput roof the
    single memory-to-compute transition labelled with the limiting
    level; for the energy roof the per-level AI where that level's
    energy share drops to the compute share.
    """

    kind: str
    samples: tuple[tuple[float, float], ...]
    knees: tuple[tuple[float, str], ...]
    asymptote: float  # plateau ops/cycle, or 1/E_op ops/pJ


@dataclass(frozen=True)
class ThroughputRoofline(RooflineCurve):
    slopes: dict[int, float] = None  # type: ignore[assignment]  # r_i * B_Li
    level_names: dict[int, str] = None  # type: ignore[assignment]

    def value_at(self, ai_ref: float) -> float:
        if not self.slopes:
            return self.asymptote
        return min(min(s * ai_ref for s in self.slopes.values()), self.asymptote)

    def bound_at(self, ai_ref: float) -> str:
        if not self.slopes:
            return "compute-bound"
        level, slope = min(self.slopes.items(), key=lambda kv: kv[1])
        if slope * ai_ref < self.asymptote:
            return f"memory-bound({self.level_names[level]})"
        return "compute-bound"


@dataclass(frozen=True)
class EnergyRoofline(RooflineCurve):
    e_op: float = 0.0
    terms: dict[int, float] = None  # type: ignore[assignment]  # E_Li / r_i
    level_names: dict[int, str] = None  # type: ignore[assignment]

    def value_at(self, ai_ref: float) -> float:
        return 1.0 / (self.e_op + sum(t / ai_ref for t in self.terms.values()))

    def memory_share(self, ai_ref: float) -> float:
        """Summed per-level energy terms at this AI, in pJ/op."""
        return sum(t / ai_ref for t in self.terms.values())

    def bound_at(self, ai_ref: float) -> str:
        if self.memory_share(ai_ref) > self.e_op:
            level = max(self.terms.items(), key=lambda kv: (kv[1], -kv[0]))[0]
            return f"memory-bound({self.level_names[level]})"
        return "compute-bound"


@dataclass(frozen=True)
class OperatingPoint:
    """Where a concrete mapped workload lands under the two roofs."""

    ai_ref: float
    ref_level: int
    ops_per_cycle: float
    attained_throughput: float  # ops/second
    attained_efficiency: float  # ops/pJ
    throughput_ceiling: float  # ops/cycle at ai_ref
    efficiency_ceiling: float  # ops/pJ at ai_ref
    throughput_bound: str
    energy_bound: str
    utilization_total: float


def task_energy(arch: ArchSpec, wl: WorkloadSpec, profile: AccessProfile) -> float:
    """Total task energy in pJ: compute term plus per-level traffic."""
    energy = wl.n_op * arch.array.energy_per_op
    n_bytes = profile.n_bytes
    for lvl in arch.levels:
        energy += n_bytes[lvl.level_index] * lvl.energy_per_byte
    return energy


def task_latency(
    arch: ArchSpec,
    wl: WorkloadSpec,
    profile: AccessProfile,
    overlap: str | None = None,
) -> LatencyResult:
    """Idealized task latency from the profile alone (full utilization).

    Overlapped: the slowest resource hides the rest; the limiter label
    names it.  Serialized: resources take turns and the terms add.
    """
    mode = overlap if overlap is not None else arch.latency_overlap
    n_bytes = profile.n_bytes
    terms: list[tuple[str, float]] = [
        (lvl.name, n_bytes[lvl.level_index] / lvl.bandwidth) for lvl in arch.levels
    ]
    terms.append((COMPUTE, wl.n_op / arch.array.a_op))
    if mode == SERIALIZED:
        cycles = sum(c for _, c in terms)
        limiter, _ = max(terms, key=lambda kv: kv[1])
    else:
        limiter, cycles = max(terms, key=lambda kv: kv[1])
    return LatencyResult(seconds=cycles / arch.clock, cycles=cycles, limiter=limiter)


def ai_ratios_from_profile(
    profile: AccessProfile,
    wl: WorkloadSpec,
    ref_level: int,
    effective_ops: float | None = None,
) -> tuple[float, dict[int, float]]:
    """(ai_ref, per-level ratios r_i) for roofline placement.

    The ratios depend only on the byte counts; the reference AI uses
    the effective operation count when one is given (sparsity), since
    only surviving MACs count toward intensity.
    """
    n_ops = float(effective_ops if effective_ops is not None else wl.n_op)
    n_bytes = profile.n_bytes
    ref_bytes = n_bytes[ref_level]
    ai_ref = n_ops / ref_bytes if ref_bytes > 0 else math.inf
    ratios = {
        li: (ref_bytes / b if b > 0 else math.inf) for li, b in n_bytes.items()
    }
    return ai_ref, ratios


def _sample_grid(lo: float, hi: float, knees: list[float]) -> np.ndarray:
    lo_dec = math.floor(math.log10(lo))
    hi_dec = math.ceil(math.log10(hi))
    n = (hi_dec - lo_dec) * SAMPLES_PER_DECADE + 1
    grid = np.logspace(lo_dec, hi_dec, n)
    return np.unique(np.concatenate([grid, np.asarray(knees, dtype=float)]))


def throughput_roofline(arch: ArchSpec, ai_ratios: dict[int, float]) -> ThroughputRoofline:
    """Attainable ops/cycle over reference AI; knee where the limiting
    memory slope meets the compute plateau."""
    a_op = float(arch.array.a_op)
    slopes = {
        lvl.level_index: ai_ratios[lvl.level_index] * lvl.bandwidth
        for lvl in arch.levels
        if math.isfinite(ai_ratios[lvl.level_index])
    }
    if slopes:
        limit_level, limit_slope = min(slopes.items(), key=lambda kv: kv[1])
        knee_ai = a_op / limit_slope
        knees = [(knee_ai, arch.level(limit_level).name)]
    else:
        knee_ai = 1.0
        knees = []
    grid = _sample_grid(knee_ai / 100.0, knee_ai * 100.0, [knee_ai])
    samples = tuple(
        (float(ai), min(min(s * ai for s in slopes.values()), a_op) if slopes else a_op)
        for ai in grid
    )
    return ThroughputRoofline(
        kind="throughput",
        samples=samples,
        knees=tuple(knees),
        asymptote=a_op,
        slopes=slopes,
        level_names={lvl.level_index: lvl.name for lvl in arch.levels},
    )


def energy_roofline(arch: ArchSpec, ai_ratios: dict[int, float]) -> EnergyRoofline:
    """Attainable ops/pJ over reference AI; smooth, asymptote 1/E_op.

    The reported bends are the per-level AIs where that level's energy
    term equals the compute term, i.e. AI_Li = E_Li/E_op.
    """
    e_op = arch.array.energy_per_op
    terms = {
        lvl.level_index: lvl.energy_per_byte / ai_ratios[lvl.level_index]
        for lvl in arch.levels
        if math.isfinite(ai_ratios[lvl.level_index]) and lvl.energy_per_byte > 0
    }
    knees = []
    if e_op > 0:
        for li, term in sorted(terms.items()):
            knees.append((term / e_op, arch.level(li).name))
    ais = [k for k, _ in knees] or [1.0]
    grid = _sample_grid(min(ais) / 100.0, max(ais) * 100.0, list(ais))
    samples = tuple(
        (float(ai), 1.0 / (e_op + sum(t / ai for t in terms.values())))
        for ai in grid
    )
    return EnergyRoofline(
        kind="energy",
        samples=samples,
        knees=tuple(sorted(knees)),
        asymptote=(1.0 / e_op if e_op > 0 else math.inf),
        e_op=e_op,
        terms=terms,
        level_names={lvl.level_index: lvl.name for lvl in arch.levels},
    )


def effective_latency_cycles(
    arch: ArchSpec,
    wl: WorkloadSpec,
    mapping: MappingSpec,
    profile: AccessProfile,
    bandwidth_penalty: float = 1.0,
    overlap: str | None = None,
) -> tuple[float, str]:
    """Latency of the mapped workload including utilization losses.

    Compute takes one cycle per temporal step per active core (spatial
    under-fill and array folds included in the step count); serialized
    weight reloads stall everything; a serialized architecture adds
    transfer time instead of hiding it.  Level 1 is replicated per
    core, so active cores drain its aggregate traffic in parallel;
    levels above it are shared.
    """
    mode = overlap if overlap is not None else arch.latency_overlap
    n_bytes = profile.n_bytes
    if mapping.core_split is not None:
        active_cores = min(mapping.core_split[1], mapping.cores)
    else:
        active_cores = 1
    mem_terms = [
        (
            lvl.name,
            n_bytes[lvl.level_index]
            / (lvl.bandwidth * bandwidth_penalty
               * (active_cores if lvl.level_index == 1 else 1)),
        )
        for lvl in arch.levels
    ]
    steps = float(temporal_steps(arch, mapping))
    terms = mem_terms + [(COMPUTE, steps)]
    if mode == SERIALIZED:
        cycles = sum(c for _, c in terms)
        limiter = max(terms, key=lambda kv: kv[1])[0]
    else:
        limiter, cycles = max(terms, key=lambda kv: kv[1])
    cycles += reload_stall_cycles(profile, mapping)
    return cycles, limiter


def operating_point(
    arch: ArchSpec,
    wl: WorkloadSpec,
    mapping: MappingSpec,
    ref_level: int | None = None,
    profile: AccessProfile | None = None,
    effective_ops: float | None = None,
    bandwidth_penalty: float = 1.0,
    overlap: str | None = None,
) -> OperatingPoint:
    """Attained (AI, throughput, efficiency) of a mapped workload and
    its position against both ceilings.

    The attained point can only fall below the roofs; equality holds
    for a perfectly utilized mapping.  ``effective_ops`` (sparsity)
    replaces N_op in the attained numerators without changing the
    schedule.
    """
    if profile is None:
        profile = count_accesses(arch, wl, mapping)
    ref = ref_level if ref_level is not None else min(DEFAULT_REF_LEVEL, arch.n_levels)
    ai_ref, ratios = ai_ratios_from_profile(profile, wl, ref, effective_ops)

    tp_curve = throughput_roofline(arch, ratios)
    e_curve = energy_roofline(arch, ratios)

    n_ops = float(effective_ops if effective_ops is not None else wl.n_op)
    cycles, _ = effective_latency_cycles(
        arch, wl, mapping, profile, bandwidth_penalty, overlap
    )
    # replicated cores run their splits in parallel against a peak of
    # cores * A_op; the core-utilization term accounts for idle ones
    ops_per_cycle = n_ops / cycles
    e_task = task_energy(arch, wl, profile)
    efficiency = n_ops / e_task

    ceiling_tp = min(
        min(s * ai_ref for s in tp_curve.slopes.values()) if tp_curve.slopes else math.inf,
        float(arch.array.a_op) * mapping.cores,
    )
    ceiling_e = e_curve.value_at(ai_ref)
    util = utilization(arch, wl, mapping, profile)

    if ops_per_cycle > ceiling_tp * (1.0 + REL_TOL):
        raise AssertionError(
            f"attained {ops_per_cycle} ops/cycle exceeds ceiling {ceiling_tp}"
        )

    slopes = tp_curve.slopes
    limit_level, limit_slope = min(slopes.items(), key=lambda kv: kv[1]) if slopes else (0, math.inf)
    if slopes and limit_slope * ai_ref < arch.array.a_op * mapping.cores:
        tp_bound = f"memory-bound({arch.level(limit_level).name})"
    else:
        tp_bound = "compute-bound"

    return OperatingPoint(
        ai_ref=ai_ref,
        ref_level=ref,
        ops_per_cycle=ops_per_cycle,
        attained_throughput=ops_per_cycle * arch.clock,
        attained_efficiency=efficiency,
        throughput_ceiling=ceiling_tp,
        efficiency_ceiling=ceiling_e,
        throughput_bound=tp_bound,
        energy_bound=e_curve.bound_at(ai_ref),
        utilization_total=util.total,
    )
