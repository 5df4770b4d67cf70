"""End-to-end flow: parse, partition, decode, decompose, swap, emit.

One run_level() call covers a single obfuscation target and produces all
artifacts for it; sweep() fans levels out over a thread pool and merges
the per-level rows into one table.  CP and sumCP in those rows are the
partitioning loop's own timing view, i.e. the numbers the conversion
decisions were based on, which keeps them comparable across levels and
monotone by construction.  The post-decomposition netlist delay shows up
separately (final_cp), since pin swapping targets that one.

Determinism is not optional: no step consults wall clock, process ids or
unseeded randomness, so rerunning a config yields byte-identical files
at any thread count.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import decompose as dc
from .attacks import pattern_histogram
from .netlist_io import emit_verilog, load_paths, parse_json, parse_verilog
from .obfuscate import (
    AreaModel,
    AreaReport,
    Partition,
    decode_netlist,
    dump_bitstream,
    estimate_area,
    gen_bitstream,
    gen_case_constraints,
    obfuscate,
    static_target,
    verify_equivalence,
)
from .pinswap import swap_sweep
from .timing import DelayModel, TimedPath, TimingState, enumerate_paths

RUN_FORMAT = "lutobf-run-1"


@dataclass(frozen=True)
class RunConfig:
    netlist: str
    obf: tuple
    out_dir: str
    paths: str | None = None
    models: str | None = None
    decompose: bool = False
    pinswap_freq: float | None = None
    swap_cap: int = 200
    vectors: int = 10000
    path_cap: int = 64
    jobs: int = 1
    deterministic: bool = True

    def __post_init__(self):
        object.__setattr__(self, "obf", tuple(float(p) for p in self.obf))
        if not self.obf:
            raise ValueError("at least one obfuscation level is required")
        for p in self.obf:
            if not 0.0 <= p <= 100.0:
                raise ValueError("obfuscation %% must be in [0, 100], got %r" % p)
        if self.pinswap_freq is not None and self.pinswap_freq <= 0:
            raise ValueError("pin swap frequency target must be positive")
        if self.swap_cap < 0 or self.vectors < 0 or self.path_cap < 1 or self.jobs < 1:
            raise ValueError("bad budget field")
        if self.deterministic is not True:
            raise ValueError("deterministic mode cannot be switched off")

    def to_json(self):
        doc = {
            "format": RUN_FORMAT,
            "netlist": self.netlist,
            "obf": list(self.obf),
            "out_dir": self.out_dir,
            "paths": self.paths,
            "models": self.models,
            "decompose": self.decompose,
            "pinswap_freq": self.pinswap_freq,
            "swap_cap": self.swap_cap,
            "vectors": self.vectors,
            "path_cap": self.path_cap,
            "jobs": self.jobs,
            "deterministic": self.deterministic,
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValueError("bad run config: %s" % e) from None
        if not isinstance(doc, dict) or doc.get("format") != RUN_FORMAT:
            raise ValueError("expected a %r document" % RUN_FORMAT)
        doc = {k: v for k, v in doc.items() if k != "format"}
        known = {f for f in cls.__dataclass_fields__}
        bad = set(doc) - known
        if bad:
            raise ValueError("unknown run config keys: %s" % ", ".join(sorted(bad)))
        missing = {"netlist", "obf", "out_dir"} - set(doc)
        if missing:
            raise ValueError("run config lacks: %s" % ", ".join(sorted(missing)))
        doc["obf"] = tuple(doc["obf"])
        return cls(**doc)


def load_models(path):
    """Combined model file: {"delay": {...}, "area": {...}}, both optional."""
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("model file must hold a JSON object")
    bad = set(doc) - {"delay", "area"}
    if bad:
        raise ValueError("unknown model sections: %s" % ", ".join(sorted(bad)))
    delay = DelayModel.from_dict(doc.get("delay", {}))
    area = AreaModel.from_dict(doc.get("area", {}))
    return delay, area


def load_netlist(path):
    with open(path) as fh:
        text = fh.read()
    if str(path).endswith(".json"):
        return parse_json(text)
    return parse_verilog(text)


@dataclass
class LevelResult:
    """Everything one obfuscation level produced, before files are written."""

    pct: float
    netlist: object
    partition: Partition
    bitstream: object | None
    case_text: str
    cp: float
    sumcp: float
    final_cp: float
    area: AreaReport
    luts_re: int
    luts_st: int
    trajectory: list
    verify: object
    hybrid_text: str = ""
    exposed: object | None = None

    def row(self):
        return (self.pct, self.cp, self.sumcp, self.area.reconf_um2,
                self.area.static_um2, self.area.total_um2,
                self.luts_re, self.luts_st)


SWEEP_COLUMNS = ("obf_pct", "cp_ns", "sumcp_ns", "area_re_um2",
                 "area_st_um2", "area_um2", "luts_re", "luts_st")


def _tag(pct):
    text = ("%.2f" % pct).rstrip("0").rstrip(".")
    return "obf" + text


def run_level(source, paths, pct, delay_model, area_model, config,
              tables=None, _memo=None):
    """Run one obfuscation level on (already preprocessed) source.

    source is never modified; paths delays must match delay_model.
    """
    nl = source.copy()
    target = static_target(nl, pct)
    # the conversion loop rewrites path delays in place, so each level
    # works on its own copies
    level_paths = [TimedPath(list(p.elements), p.total) for p in paths]
    partition = obfuscate(nl, level_paths, delay_model, target)
    state = TimingState(level_paths)
    cp, sumcp = state.cp, state.sum_delay
    luts_st = len(partition.static_ids)
    # decoding turns static LUTs into plain gates, so the exposure
    # histogram has to be taken before it runs
    exposed = pattern_histogram(nl, scope="static_only")

    decode_netlist(nl, partition)
    if config.decompose and partition.reconf_ids:
        if tables is None:
            tables = dc.impl_table(4, cache_dir=dc.default_cache_dir())
        nl = dc.decompose_netlist(nl, partition, tables, _memo=_memo)
        partition = Partition.of_netlist(nl)

    fresh = enumerate_paths(nl, delay_model, cap=config.path_cap)
    final_cp = max(p.total for p in fresh) if fresh else 0.0
    trajectory = []
    if config.pinswap_freq is not None and fresh:
        nl, trajectory = swap_sweep(nl, TimingState(fresh), delay_model,
                                    config.pinswap_freq, max_swaps=config.swap_cap)
        final_cp = max(p.total for p in enumerate_paths(nl, delay_model,
                                                        cap=config.path_cap))

    bitstream = gen_bitstream(partition, nl) if partition.reconf_ids else None
    case_text = gen_case_constraints(partition, nl) if partition.reconf_ids else ""
    area = estimate_area(partition, nl, area_model)
    hybrid_text = emit_verilog(nl, partition)

    if bitstream is not None:
        check = parse_verilog(hybrid_text)
        verify = verify_equivalence(source, check, bitstream, vectors=config.vectors)
    else:
        verify = verify_equivalence(source, nl, None, vectors=config.vectors)

    return LevelResult(pct, nl, partition, bitstream, case_text, cp, sumcp,
                       final_cp, area, len(partition.reconf_ids),
                       luts_st, trajectory, verify, hybrid_text, exposed)


def prepare(config):
    """Load inputs and preprocess once; returns (netlist, paths, models)."""
    from .netlist_io import preprocess

    nl = load_netlist(config.netlist)
    if config.models is not None:
        delay_model, area_model = load_models(config.models)
    else:
        delay_model, area_model = DelayModel(), AreaModel()
    raw = None
    if config.paths is not None:
        with open(config.paths) as fh:
            raw = load_paths(fh.read())
    nl, paths = preprocess(nl, raw, model=delay_model, cap=config.path_cap)
    return nl, paths, (delay_model, area_model)


def run(config, progress=None):
    """Full flow over every level in the config; returns LevelResults.

    Levels are handed to a thread pool in the configured order; results
    come back in that same order regardless of completion order.
    """
    source, paths, (delay_model, area_model) = prepare(config)
    tables = None
    if config.decompose:
        tables = dc.impl_table(4, cache_dir=dc.default_cache_dir())
    memo = {}

    def one(pct):
        res = run_level(source, paths, pct, delay_model, area_model, config,
                        tables=tables, _memo=memo)
        if progress is not None:
            progress(res)
        return res

    if config.jobs == 1 or len(config.obf) == 1:
        return [one(p) for p in config.obf]
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        return list(pool.map(one, config.obf))


def write_level(result, out_dir):
    """Persist one level's artifact files; returns the directory used."""
    level_dir = os.path.join(out_dir, _tag(result.pct))
    os.makedirs(level_dir, exist_ok=True)
    with open(os.path.join(level_dir, "hybrid.v"), "w") as fh:
        fh.write(result.hybrid_text)
    if result.bitstream is not None:
        with open(os.path.join(level_dir, "bitstream.json"), "w") as fh:
            fh.write(dump_bitstream(result.bitstream, result.netlist))
        with open(os.path.join(level_dir, "constraints.case"), "w") as fh:
            fh.write(result.case_text)
    return level_dir
