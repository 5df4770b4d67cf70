"""Command line front end.

Subcommands mirror the flow stages: obfuscate (one level), sweep (many
levels), attack (struct / compose / bench), decompose-table, verify, and
corpus for materializing the bundled benchmark set.  Every error leaves
through _fail(), which prints a single machine-parsable line to stderr
and exits 2; a verify mismatch exits 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import corpus as corpus_mod
from . import decompose as dc
from . import report
from .attacks import (
    PatternDatabase,
    composition_attack,
    export_bench,
    pattern_histogram,
    predict_distribution,
    sat_ratio_report,
    search_space_bits,
)
from .netlist import NetlistError
from .netlist_io import emit_verilog
from .obfuscate import (
    Partition,
    decode_netlist,
    gen_bitstream,
    load_bitstream,
    obfuscate,
    static_target,
    verify_equivalence,
    verify_exhaustive,
)
from .pipeline import RunConfig, load_netlist, prepare, run, write_level
from .timing import TimingState

PROG = "lutobf"


def _fail(kind, message, code=2):
    sys.stderr.write("%s: error: %s: %s\n" % (PROG, kind, message))
    sys.exit(code)


def _write(path, text):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def _pct_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if part:
            out.append(float(part))
    if not out:
        raise ValueError("empty obfuscation list")
    return out


def _build_config(args, many):
    if args.config is not None:
        with open(args.config) as fh:
            cfg = RunConfig.from_json(fh.read())
        overrides = {}
        if args.netlist is not None:
            overrides["netlist"] = args.netlist
        if args.out is not None:
            overrides["out_dir"] = args.out
        if args.obf is not None:
            overrides["obf"] = tuple(args.obf)
        if overrides:
            doc = json.loads(cfg.to_json())
            doc.pop("format")
            doc.update(overrides)
            doc["obf"] = tuple(doc["obf"])
            cfg = RunConfig(**doc)
        return cfg
    if args.netlist is None or args.out is None or args.obf is None:
        raise ValueError("either --config or all of -i/--obf/-o are required")
    return RunConfig(
        netlist=args.netlist,
        obf=tuple(args.obf),
        out_dir=args.out,
        paths=args.paths,
        models=args.models,
        decompose=args.decompose,
        pinswap_freq=args.pinswap_freq,
        swap_cap=args.swap_cap,
        vectors=args.vectors,
        path_cap=args.path_cap,
        jobs=args.jobs if many else 1,
    )


def _write_run(config, results):
    out = config.out_dir
    _write(os.path.join(out, "run_config.json"), config.to_json())
    _write(os.path.join(out, "sweep.csv"), report.sweep_csv(results))
    _write(os.path.join(out, "sweep.txt"), report.sweep_table(results))
    report.sweep_figure(results, os.path.join(out, "sweep.png"))
    for res in results:
        level_dir = write_level(res, out)
        _write(os.path.join(level_dir, "summary.txt"), report.level_summary(res))
        if res.exposed is not None and res.exposed.total:
            _write(os.path.join(level_dir, "exposed_patterns.csv"),
                   report.histogram_csv(res.exposed))
        if res.trajectory:
            _write(os.path.join(level_dir, "swap_trajectory.csv"),
                   report.trajectory_csv(res.trajectory))
            report.trajectory_figure(res.trajectory,
                                     os.path.join(level_dir, "swap_trajectory.png"))


def cmd_run(args, many):
    config = _build_config(args, many)
    if config.paths is None:
        sys.stderr.write("%s: notice: no timing report given, "
                         "enumerating paths from the netlist\n" % PROG)
    results = run(config)
    _write_run(config, results)
    sys.stdout.write(report.sweep_table(results))
    bad = [r for r in results if not r.verify.ok]
    for r in results:
        sys.stdout.write("verify %s%%: %s\n" % (report.fmt_pct(r.pct), r.verify))
    if bad:
        _fail("verify", "programmed hybrid differs from the original", code=1)


def _scoped_histogram(path, scope, obf=None, path_cap=64):
    """Histogram of one design file, optionally partitioned first.

    With --obf the mapped netlist is split at that level before counting,
    so the exposure of a planned level can be measured without writing a
    flow run's artifacts.  Without it the file's own LUT states decide
    what is visible; emitted hybrids carry their static logic as plain
    gates, so those report zero static patterns by construction.
    """
    if obf is None:
        return pattern_histogram(load_netlist(path), scope=scope)
    config = RunConfig(netlist=path, obf=(obf,), out_dir=".",
                       vectors=0, path_cap=path_cap)
    nl, paths, (delay_model, _area) = prepare(config)
    obfuscate(nl, paths, delay_model, static_target(nl, obf))
    return pattern_histogram(nl, scope=scope)


def cmd_attack_struct(args):
    names = [os.path.splitext(os.path.basename(p))[0] for p in args.netlist]
    if len(set(names)) != len(names):
        raise ValueError("design base names must be unique for a database build")
    if args.jobs > 1 and len(args.netlist) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            hists = list(pool.map(
                lambda p: _scoped_histogram(p, args.scope, args.obf),
                args.netlist))
    else:
        hists = [_scoped_histogram(p, args.scope, args.obf)
                 for p in args.netlist]
    lines = []
    for name, hist in zip(names, hists):
        if hist.unique == 0:
            lines.append("%s: 0 patterns exposed" % name)
        else:
            lines.append("%s: %d patterns exposed (%d unique), search space %.2f bits"
                         % (name, hist.total, hist.unique, search_space_bits(hist)))
        if args.out is not None:
            _write(os.path.join(args.out, "%s_patterns.csv" % name),
                   report.histogram_csv(hist))
            fit = None
            if hist.unique >= args.fit_degree + 1:
                fit = predict_distribution(hist, degree=args.fit_degree)
                if fit.outlier_patterns:
                    pats = ", ".join("%d:%x" % p for p in fit.outlier_patterns)
                    lines.append("%s: distribution outliers at %s" % (name, pats))
            report.histogram_figure(hist, os.path.join(args.out, "%s_patterns.png" % name),
                                    fit=fit)
    if args.save_db is not None:
        db = PatternDatabase.build(dict(zip(names, hists)))
        _write(args.save_db, db.to_json())
        lines.append("database: %d designs, %d unique patterns -> %s"
                     % (len(names), db.merged.unique, args.save_db))
    sys.stdout.write("".join(line + "\n" for line in lines))


def cmd_attack_compose(args):
    with open(args.db) as fh:
        db = PatternDatabase.from_json(fh.read())
    exposed = _scoped_histogram(args.netlist[0], args.scope, args.obf)
    result = composition_attack(exposed, db)
    if args.out is not None:
        _write(os.path.join(args.out, "ranking.csv"), report.ranking_csv(result))
    if result.best() is None:
        sys.stdout.write("no usable designs in the database\n")
    else:
        name, r = result.best()
        sys.stdout.write("best match: %s (r=%.6f), regime: %s\n"
                         % (name, r, result.regime))
    for name, reason in result.skipped:
        sys.stdout.write("skipped %s: %s\n" % (name, reason))


def cmd_attack_bench(args):
    if args.sat_log is not None:
        with open(args.sat_log) as fh:
            rep = sat_ratio_report(solver_log=fh.read())
        sys.stdout.write(_sat_lines(rep))
        if args.out is not None:
            _write(os.path.join(args.out, "sat_report.json"),
                   json.dumps(rep.to_dict(), indent=2) + "\n")
        return
    if args.netlist[0] is None:
        raise ValueError("either -i or --sat-log is required")
    config = RunConfig(netlist=args.netlist[0], obf=(args.obf,), out_dir=".",
                       vectors=0, path_cap=args.path_cap)
    source, paths, (delay_model, _area) = prepare(config)
    nl = source.copy()
    partition = obfuscate(nl, paths, delay_model, static_target(nl, args.obf))
    decode_netlist(nl, partition)
    bench = export_bench(nl, partition, name=nl.name)
    key = gen_bitstream(partition, nl) if partition.reconf_ids else None
    rep = sat_ratio_report(bench)
    out_lines = ["bench: %d inputs (%d key), %d outputs, %d gates\n"
                 % (len(bench.inputs), bench.key_length, len(bench.outputs),
                    len(bench.gates)),
                 _sat_lines(rep)]
    if args.out is not None:
        _write(os.path.join(args.out, "%s.bench" % nl.name), bench.to_text())
        if key is not None:
            from .obfuscate import dump_bitstream
            _write(os.path.join(args.out, "key.json"), dump_bitstream(key, nl))
        _write(os.path.join(args.out, "sat_report.json"),
               json.dumps(rep.to_dict(), indent=2) + "\n")
    if key is not None and bench.key_length != key.length:
        _fail("key-accounting", "bench key length %d != bitstream length %d"
              % (bench.key_length, key.length))
    sys.stdout.write("".join(out_lines))


def _sat_lines(rep):
    lines = ["sat encoding: %d variables, %d clauses, ratio %.3f (%s)"
             % (rep.variables, rep.clauses, rep.ratio,
                "in ideal band" if rep.ideal else "outside ideal band")]
    if rep.reported_ratio is not None:
        lines.append("solver-reported ratio: %.3f" % rep.reported_ratio)
    if rep.iterations is not None:
        lines.append("solver iterations: %d" % rep.iterations)
    return "".join(line + "\n" for line in lines)


def _render_tree(tree, names=None):
    if tree.kind == "var":
        return names[tree.index] if names else "x%d" % tree.index
    if tree.kind == "const":
        return str(tree.index)
    inner = ", ".join(_render_tree(c, names) for c in tree.children)
    return "LUT%d[%0*x](%s)" % (tree.k, (1 << tree.k) // 4 or 1, tree.mask, inner)


def cmd_decompose_table(args):
    cache_dir = args.cache_dir if args.cache_dir is not None else dc.default_cache_dir()
    tables = dc.impl_table(args.order, cache_dir=cache_dir, rebuild=args.rebuild_cache)
    improved = sum(len(v) for v in tables.store.values())
    sys.stdout.write("order %d table ready: %d stored trees beat their naive LUT\n"
                     % (tables.n, improved))
    if args.show is not None:
        k_text, _, mask_text = args.show.partition(":")
        from .boolfn import TruthTable

        tt = TruthTable(int(k_text), int(mask_text, 16))
        tree = tables.lookup(tt)
        cost = dc.tree_cost(tree, tables.config)
        sys.stdout.write("%s\narea %.2f um2, delay %.3f ns\n"
                         % (_render_tree(tree), cost[0] / 100.0, cost[1] / 1000.0))


def cmd_verify(args):
    original = load_netlist(args.netlist[0])
    hybrid = load_netlist(args.hybrid)
    bitstream = None
    if args.bitstream is not None:
        with open(args.bitstream) as fh:
            bitstream = load_bitstream(fh.read())
    if args.exhaustive:
        rep = verify_exhaustive(original, hybrid, bitstream)
    else:
        rep = verify_equivalence(original, hybrid, bitstream, vectors=args.vectors)
    sys.stdout.write(str(rep) + "\n")
    if not rep.ok:
        sys.exit(1)


def cmd_corpus(args):
    os.makedirs(args.out, exist_ok=True)
    written = []
    if not args.no_fixtures:
        for name in corpus_mod.fixture_names():
            written.append(_write(os.path.join(args.out, name + ".v"),
                                  corpus_mod.fixture_text(name)))
    for nl in corpus_mod.generated_corpus(count=args.count, lo=args.lo, hi=args.hi,
                                          seed=args.seed):
        written.append(_write(os.path.join(args.out, nl.name + ".v"),
                              emit_verilog(nl)))
    sys.stdout.write("wrote %d designs to %s\n" % (len(written), args.out))


def _parser():
    p = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add_flow(name, many, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("-i", "--netlist", help="input netlist (.v or .json)")
        sp.add_argument("-o", "--out", help="output directory")
        if many:
            sp.add_argument("--obf", type=_pct_list,
                            help="comma-separated obfuscation %% list")
        else:
            sp.add_argument("--obf", type=lambda t: [float(t)],
                            help="obfuscation %% (single level)")
        sp.add_argument("--config", help="run config JSON (flags override it)")
        sp.add_argument("--paths", help="timing path report JSON")
        sp.add_argument("--models", help="delay/area model JSON")
        sp.add_argument("--decompose", action="store_true",
                        help="decompose reconfigurable LUTs")
        sp.add_argument("--pinswap-freq", type=float, default=None, metavar="MHZ",
                        help="pin swap frequency target")
        sp.add_argument("--swap-cap", type=int, default=200)
        sp.add_argument("--vectors", type=int, default=10000,
                        help="random vectors for the equivalence check")
        sp.add_argument("--path-cap", type=int, default=64,
                        help="timed paths kept per endpoint")
        if many:
            sp.add_argument("--jobs", type=int, default=1)
        sp.set_defaults(func=lambda a, m=many: cmd_run(a, m))
        return sp

    add_flow("obfuscate", False, "run one obfuscation level end to end")
    add_flow("sweep", True, "run several obfuscation levels and tabulate")

    ap = sub.add_parser("attack", help="attacker-side analyses")
    asub = ap.add_subparsers(dest="attack_command", required=True)

    st = asub.add_parser("struct", help="pattern histogram and search space")
    st.add_argument("-i", "--netlist", nargs="+", required=True)
    st.add_argument("-o", "--out", default=None)
    st.add_argument("--scope", choices=("static_only", "all"), default="static_only")
    st.add_argument("--obf", type=float, default=None,
                    help="partition each design at this %% before counting")
    st.add_argument("--save-db", default=None, help="write a pattern database JSON")
    st.add_argument("--fit-degree", type=int, default=3)
    st.add_argument("--jobs", type=int, default=1)
    st.set_defaults(func=cmd_attack_struct)

    co = asub.add_parser("compose", help="rank database designs by correlation")
    co.add_argument("-i", "--netlist", nargs=1, required=True)
    co.add_argument("--db", required=True)
    co.add_argument("-o", "--out", default=None)
    co.add_argument("--scope", choices=("static_only", "all"), default="static_only")
    co.add_argument("--obf", type=float, default=None,
                    help="partition the design at this %% before measuring")
    co.set_defaults(func=cmd_attack_compose)

    be = asub.add_parser("bench", help="export an attack-tool circuit with key inputs")
    be.add_argument("-i", "--netlist", nargs=1, default=[None])
    be.add_argument("-o", "--out", default=None)
    be.add_argument("--obf", type=float, default=100.0)
    be.add_argument("--path-cap", type=int, default=64)
    be.add_argument("--sat-log", default=None,
                    help="parse a solver log instead of encoding a netlist")
    be.set_defaults(func=cmd_attack_bench)

    dt = sub.add_parser("decompose-table", help="build or refresh the tree table")
    dt.add_argument("-n", "--order", type=int, default=4)
    dt.add_argument("--cache-dir", default=None)
    dt.add_argument("--rebuild-cache", action="store_true")
    dt.add_argument("--show", metavar="K:HEXMASK",
                    help="print the stored tree for one function")
    dt.set_defaults(func=cmd_decompose_table)

    ve = sub.add_parser("verify", help="equivalence check of a programmed hybrid")
    ve.add_argument("-i", "--netlist", nargs=1, required=True)
    ve.add_argument("--hybrid", required=True)
    ve.add_argument("--bitstream", default=None)
    ve.add_argument("--vectors", type=int, default=10000)
    ve.add_argument("--exhaustive", action="store_true")
    ve.set_defaults(func=cmd_verify)

    cp = sub.add_parser("corpus", help="materialize the bundled benchmark set")
    cp.add_argument("-o", "--out", required=True)
    cp.add_argument("--count", type=int, default=50)
    cp.add_argument("--lo", type=int, default=20)
    cp.add_argument("--hi", type=int, default=500)
    cp.add_argument("--seed", type=int, default=0xC0DE)
    cp.add_argument("--no-fixtures", action="store_true")
    cp.set_defaults(func=cmd_corpus)

    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        args.func(args)
    except NetlistError as e:
        _fail(e.kind, str(e))
    except (ValueError, KeyError) as e:
        _fail("invalid", str(e))
    except OSError as e:
        _fail("io", str(e))
    return 0


if __name__ == "__main__":
    sys.exit(main())
