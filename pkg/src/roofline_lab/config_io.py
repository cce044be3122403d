"""Strict JSON ingestion and emission for arch / workload / mapping /
scenario files.

One format for everything: JSON, fixed field names, fixed units
(bytes/cycle, pJ/byte, pJ/op, Hz - values carry no unit suffixes).
Unknown keys are errors, missing required keys are errors, and scalar
sanity (positive bandwidth, nonzero sizes, densities in (0,1]) is
checked at parse time so a bad file is reported with the offending
field, not three calls later.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .model import (
    ArchSpec,
    ComputeArray,
    LoopDim,
    MappingSpec,
    MemoryLevel,
    OperandSpec,
    SpatialUnroll,
    WorkloadSpec,
    OVERLAPPED,
    SERIALIZED,
)
from .transforms import ImcMacro, QuantConfig, SparsityConfig


class ParseError(ValueError):
    """A malformed or schema-violating input file; carries the file and
    field path of the offence."""

    def __init__(self, path: str | Path, where: str, message: str):
        self.path = str(path)
        self.where = where
        super().__init__(f"{path}: {where}: {message}")


class _Obj:
    """A JSON object being consumed field by field."""

    def __init__(self, path: str | Path, where: str, data: Any):
        if not isinstance(data, dict):
            raise ParseError(path, where, f"expected an object, got {type(data).__name__}")
        self.path = path
        self.where = where
        self.data = dict(data)

    def take(self, key: str, required: bool = True, default: Any = None) -> Any:
        if key in self.data:
            return self.data.pop(key)
        if required:
            raise ParseError(self.path, self.where, f"missing required field {key!r}")
        return default

    def number(self, key: str, required: bool = True, default: Any = None,
               minimum: float | None = None, strict: bool = False) -> Any:
        val = self.take(key, required, default)
        if val is None and not required:
            return default
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise ParseError(self.path, f"{self.where}.{key}", "expected a number")
        if minimum is not None and (val <= minimum if strict else val < minimum):
            op = ">" if strict else ">="
            raise ParseError(
                self.path, f"{self.where}.{key}", f"must be {op} {minimum} (got {val})"
            )
        return val

    def finish(self) -> None:
        if self.data:
            raise ParseError(
                self.path, self.where, f"unknown keys: {sorted(self.data)}"
            )


def _load_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(path, "<file>", str(exc)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(path, f"line {exc.lineno}", exc.msg) from exc


# ---------------------------------------------------------------------------
# architecture


def parse_arch(path: str | Path) -> ArchSpec:
    root = _Obj(path, "arch", _load_json(path))
    arr = _Obj(path, "arch.array", root.take("array"))
    dims_raw = arr.take("dims")
    if not isinstance(dims_raw, list) or not dims_raw:
        raise ParseError(path, "arch.array.dims", "expected a non-empty list")
    dims = []
    for i, pair in enumerate(dims_raw):
        if (not isinstance(pair, list) or len(pair) != 2
                or not isinstance(pair[0], str) or not isinstance(pair[1], int)):
            raise ParseError(path, f"arch.array.dims[{i}]", "expected [label, size]")
        if pair[1] < 1:
            raise ParseError(path, f"arch.array.dims[{i}]", "size must be >= 1")
        dims.append((pair[0], pair[1]))
    array = ComputeArray(
        dims=tuple(dims),
        energy_per_op=arr.number("energy_per_op", minimum=0.0),
        ops_per_mac=int(arr.number("ops_per_mac", required=False, default=2, minimum=1)),
        throughput_scale=arr.number("throughput_scale", required=False, default=1.0,
                                    minimum=0.0, strict=True),
    )
    arr.finish()

    levels_raw = root.take("levels")
    if not isinstance(levels_raw, list) or not levels_raw:
        raise ParseError(path, "arch.levels", "expected a non-empty list")
    levels = []
    for i, lr in enumerate(levels_raw):
        lo = _Obj(path, f"arch.levels[{i}]", lr)
        name = lo.take("name")
        cap = lo.take("capacity", required=False)
        if cap is not None and (not isinstance(cap, int) or cap <= 0):
            raise ParseError(path, f"arch.levels[{i}].capacity",
                             "must be a positive integer or null")
        levels.append(MemoryLevel(
            name=str(name),
            bandwidth=lo.number("bandwidth", minimum=0.0, strict=True),
            energy_per_byte=lo.number("energy_per_byte", minimum=0.0),
            capacity=cap,
            level_index=int(lo.number("level_index", required=False, default=i + 1,
                                      minimum=1)),
        ))
        lo.finish()

    overlap = root.take("latency_overlap", required=False, default=OVERLAPPED)
    if overlap not in (OVERLAPPED, SERIALIZED):
        raise ParseError(path, "arch.latency_overlap",
                         f"must be {OVERLAPPED!r} or {SERIALIZED!r}")
    arch = ArchSpec(
        array=array,
        levels=tuple(levels),
        clock=root.number("clock", minimum=0.0, strict=True),
        latency_overlap=overlap,
        base_precision_bits=int(root.number("base_precision_bits", required=False,
                                            default=8, minimum=1)),
    )
    root.finish()
    return arch


def arch_to_dict(arch: ArchSpec) -> dict:
    return {
        "array": {
            "dims": [[a, s] for a, s in arch.array.dims],
            "energy_per_op": arch.array.energy_per_op,
            "ops_per_mac": arch.array.ops_per_mac,
            "throughput_scale": arch.array.throughput_scale,
        },
        "levels": [
            {
                "name": l.name,
                "bandwidth": l.bandwidth,
                "energy_per_byte": l.energy_per_byte,
                "capacity": l.capacity,
                "level_index": l.level_index,
            }
            for l in arch.levels
        ],
        "clock": arch.clock,
        "latency_overlap": arch.latency_overlap,
        "base_precision_bits": arch.base_precision_bits,
    }


# ---------------------------------------------------------------------------
# workload


def parse_workload(path: str | Path) -> WorkloadSpec:
    root = _Obj(path, "workload", _load_json(path))
    name = str(root.take("name"))
    dims_raw = root.take("dims")
    if not isinstance(dims_raw, list) or not dims_raw:
        raise ParseError(path, "workload.dims", "expected a non-empty list")
    dims = []
    for i, pair in enumerate(dims_raw):
        if (not isinstance(pair, list) or len(pair) != 2
                or not isinstance(pair[0], str) or not isinstance(pair[1], int)):
            raise ParseError(path, f"workload.dims[{i}]", "expected [name, size]")
        if pair[1] < 1:
            raise ParseError(path, f"workload.dims[{i}]", "size must be >= 1")
        dims.append(LoopDim(pair[0], pair[1]))

    ops_raw = root.take("operands")
    if not isinstance(ops_raw, list) or not ops_raw:
        raise ParseError(path, "workload.operands", "expected a non-empty list")
    operands = []
    for i, orx in enumerate(ops_raw):
        oo = _Obj(path, f"workload.operands[{i}]", orx)
        role = oo.take("role")
        if role not in ("input", "output"):
            raise ParseError(path, f"workload.operands[{i}].role",
                             "must be 'input' or 'output'")
        rel = oo.take("relevant_dims")
        if not isinstance(rel, list) or not all(isinstance(r, str) for r in rel):
            raise ParseError(path, f"workload.operands[{i}].relevant_dims",
                             "expected a list of dim names")
        density = oo.number("density", required=False, default=1.0,
                            minimum=0.0, strict=True)
        if density > 1.0:
            raise ParseError(path, f"workload.operands[{i}].density",
                             "must be <= 1")
        accum = oo.take("accum_bits", required=False)
        bpe = oo.take("bytes_per_element", required=False)
        operands.append(OperandSpec(
            name=str(oo.take("name")),
            role=role,
            relevant_dims=tuple(rel),
            precision_bits=int(oo.number("precision_bits", required=False, default=8,
                                         minimum=1)),
            density=density,
            accum_bits=accum,
            bytes_per_element=bpe,
        ))
        oo.finish()
    wl = WorkloadSpec(name=name, dims=tuple(dims), operands=tuple(operands))
    root.finish()
    return wl


def workload_to_dict(wl: WorkloadSpec) -> dict:
    return {
        "name": wl.name,
        "dims": [[d.name, d.size] for d in wl.dims],
        "operands": [
            {
                "name": o.name,
                "role": o.role,
                "relevant_dims": list(o.relevant_dims),
                "precision_bits": o.precision_bits,
                "density": o.density,
                "accum_bits": o.accum_bits,
                "bytes_per_element": o.bytes_per_element,
            }
            for o in wl.operands
        ],
    }


# ---------------------------------------------------------------------------
# mapping


def parse_mapping(path: str | Path) -> MappingSpec:
    root = _Obj(path, "mapping", _load_json(path))
    spatial_raw = root.take("spatial", required=False, default=[])
    spatial = []
    for i, sr in enumerate(spatial_raw):
        so = _Obj(path, f"mapping.spatial[{i}]", sr)
        spatial.append(SpatialUnroll(
            axis=str(so.take("axis")),
            dim=str(so.take("dim")),
            factor=int(so.number("factor", minimum=1)),
        ))
        so.finish()

    temp_raw = root.take("temporal", required=False, default=[])
    if not isinstance(temp_raw, list):
        raise ParseError(path, "mapping.temporal", "expected a list per level")
    temporal = []
    for li, level_loops in enumerate(temp_raw):
        if not isinstance(level_loops, list):
            raise ParseError(path, f"mapping.temporal[{li}]", "expected a loop list")
        loops = []
        for j, pair in enumerate(level_loops):
            if (not isinstance(pair, list) or len(pair) != 2
                    or not isinstance(pair[0], str) or not isinstance(pair[1], int)):
                raise ParseError(path, f"mapping.temporal[{li}][{j}]",
                                 "expected [dim, trip]")
            if pair[1] < 1:
                raise ParseError(path, f"mapping.temporal[{li}][{j}]",
                                 "trip count must be >= 1")
            loops.append((pair[0], pair[1]))
        temporal.append(tuple(loops))

    core_split_raw = root.take("core_split", required=False)
    core_split = None
    if core_split_raw is not None:
        if (not isinstance(core_split_raw, list) or len(core_split_raw) != 2
                or not isinstance(core_split_raw[0], str)
                or not isinstance(core_split_raw[1], int)):
            raise ParseError(path, "mapping.core_split", "expected [dim, factor]")
        core_split = (core_split_raw[0], core_split_raw[1])

    reload_raw = root.take("reload_cycles_per_tile", required=False)
    if reload_raw is not None and (not isinstance(reload_raw, int) or reload_raw < 0):
        raise ParseError(path, "mapping.reload_cycles_per_tile",
                         "must be a non-negative integer or null")
    pinned = root.take("pinned_operand", required=False)

    mapping = MappingSpec(
        spatial=tuple(spatial),
        temporal=tuple(temporal),
        cores=int(root.number("cores", required=False, default=1, minimum=1)),
        core_split=core_split,
        pinned_operand=pinned,
        reload_cycles_per_tile=reload_raw,
    )
    root.finish()
    return mapping


def mapping_to_dict(mapping: MappingSpec) -> dict:
    return {
        "spatial": [
            {"axis": u.axis, "dim": u.dim, "factor": u.factor}
            for u in mapping.spatial
        ],
        "temporal": [[[d, t] for d, t in level] for level in mapping.temporal],
        "cores": mapping.cores,
        "core_split": list(mapping.core_split) if mapping.core_split else None,
        "pinned_operand": mapping.pinned_operand,
        "reload_cycles_per_tile": mapping.reload_cycles_per_tile,
    }


# ---------------------------------------------------------------------------
# scenarios


@dataclass(frozen=True)
class Scenario:
    """A labelled (arch, workload, mapping-or-AI, transform chain)."""

    label: str
    arch_path: Path
    workload_path: Path
    mapping_path: Path | None
    ai_profile: dict[int, float] | None
    ref_level: int | None
    transforms: tuple[object, ...]  # QuantConfig | SparsityConfig | ImcMacro


def _parse_transform(path: str | Path, i: int, raw: Any) -> object:
    to = _Obj(path, f"scenario.transforms[{i}]", raw)
    kind = to.take("kind")
    if kind == "quantization":
        bits_raw = to.take("precision_bits")
        if not isinstance(bits_raw, dict):
            raise ParseError(path, f"scenario.transforms[{i}].precision_bits",
                             "expected an object of operand -> bits")
        cfg = QuantConfig(
            precision_bits={k: int(v) for k, v in bits_raw.items()},
            block_size=int(to.number("block_size", required=False, default=1, minimum=1)),
            block_metadata_bits=int(to.number("block_metadata_bits", required=False,
                                              default=0, minimum=0)),
            compute_scaling_exponent=to.number("alpha", required=False, default=1.0,
                                               minimum=1.0),
            throughput_scaling_mode=str(to.take("mode", required=False,
                                                default="linear")),
            weight_operand=str(to.take("weight_operand", required=False, default="W")),
            bit_serial_fixed_overhead=to.number("fixed_overhead", required=False,
                                                default=0.0, minimum=0.0),
        )
        to.finish()
        return cfg
    if kind == "sparsity":
        dens_raw = to.take("density", required=False, default={})
        if not isinstance(dens_raw, dict):
            raise ParseError(path, f"scenario.transforms[{i}].density",
                             "expected an object of operand -> density")
        n = to.take("n", required=False)
        m = to.take("m", required=False)
        cfg = SparsityConfig(
            mode=str(to.take("mode", required=False, default="dense")),
            density={k: float(v) for k, v in dens_raw.items()},
            n=None if n is None else int(n),
            m=None if m is None else int(m),
            index_bits=int(to.number("index_bits", required=False, default=32,
                                     minimum=0)),
            utilization_penalty=to.number("utilization_penalty", required=False,
                                          default=1.0, minimum=0.0, strict=True),
        )
        to.finish()
        return cfg
    if kind == "imc":
        macro = ImcMacro(
            rows=int(to.number("rows", minimum=1)),
            cols=int(to.number("cols", minimum=1)),
            input_bits=int(to.number("input_bits", required=False, default=1, minimum=1)),
            weight_bits=int(to.number("weight_bits", required=False, default=1,
                                      minimum=1)),
            energy_per_op=to.number("energy_per_op", required=False, default=0.01,
                                    minimum=0.0),
            adc_overhead=to.number("adc_overhead", required=False, default=0.25,
                                   minimum=0.0),
            weight_write_rows_per_cycle=int(to.number("weight_write_rows_per_cycle",
                                                      required=False, default=1,
                                                      minimum=1)),
            reload_overlapped=bool(to.take("reload_overlapped", required=False,
                                           default=False)),
        )
        to.finish()
        return macro
    raise ParseError(path, f"scenario.transforms[{i}].kind",
                     f"unknown transform kind {kind!r}")


def parse_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    root = _Obj(p, "scenario", _load_json(p))
    base = p.parent

    def resolve(key: str, required: bool) -> Path | None:
        val = root.take(key, required=required)
        if val is None:
            return None
        return (base / val).resolve() if not Path(val).is_absolute() else Path(val)

    label = str(root.take("label"))
    arch_path = resolve("arch", required=True)
    workload_path = resolve("workload", required=True)
    mapping_path = resolve("mapping", required=False)

    ai_raw = root.take("ai_profile", required=False)
    ai_profile = None
    if ai_raw is not None:
        if not isinstance(ai_raw, dict):
            raise ParseError(p, "scenario.ai_profile",
                             "expected an object of level index -> AI")
        try:
            ai_profile = {int(k): float(v) for k, v in ai_raw.items()}
        except (TypeError, ValueError) as exc:
            raise ParseError(p, "scenario.ai_profile", str(exc)) from exc
        for k, v in ai_profile.items():
            if v <= 0 or not math.isfinite(v):
                raise ParseError(p, f"scenario.ai_profile.{k}",
                                 "AI must be positive and finite")
    if mapping_path is None and ai_profile is None:
        raise ParseError(p, "scenario", "needs either 'mapping' or 'ai_profile'")

    ref_raw = root.take("ref_level", required=False)
    transforms_raw = root.take("transforms", required=False, default=[])
    if not isinstance(transforms_raw, list):
        raise ParseError(p, "scenario.transforms", "expected a list")
    transforms = tuple(
        _parse_transform(p, i, raw) for i, raw in enumerate(transforms_raw)
    )
    scenario = Scenario(
        label=label,
        arch_path=arch_path,
        workload_path=workload_path,
        mapping_path=mapping_path,
        ai_profile=ai_profile,
        ref_level=None if ref_raw is None else int(ref_raw),
        transforms=transforms,
    )
    root.finish()
    return scenario


# ---------------------------------------------------------------------------
# emission


def emit_json(data: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def fixture_path(name: str) -> Path:
    """Path of a fixture shipped with the package."""
    return Path(__file__).parent / "fixtures" / name
