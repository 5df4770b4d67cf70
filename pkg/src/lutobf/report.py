"""Tables and figures for flow and attack results.

All delimited output goes through the csv module with a fixed line
terminator, and every float is printed at a fixed precision (delays ns
to 3 decimals, areas um^2 to 2), so golden files stay byte-stable. The
figure helpers render through the Agg backend straight to a file; no
display is ever needed.
"""

from __future__ import annotations

import csv
import io
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .attacks import search_space_bits
from .pipeline import SWEEP_COLUMNS


def fmt_delay(x):
    return "%.3f" % x


def fmt_area(x):
    return "%.2f" % x


def fmt_pct(x):
    return "%.2f" % x


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def sweep_rows(results):
    rows = []
    for r in results:
        pct, cp, sumcp, a_re, a_st, a, n_re, n_st = r.row()
        rows.append((fmt_pct(pct), fmt_delay(cp), fmt_delay(sumcp),
                     fmt_area(a_re), fmt_area(a_st), fmt_area(a), n_re, n_st))
    return rows


def sweep_csv(results):
    return _csv_text(SWEEP_COLUMNS, sweep_rows(results))


def sweep_table(results):
    """The same rows as sweep_csv, aligned for reading."""
    header = SWEEP_COLUMNS
    rows = [tuple(str(c) for c in row) for row in sweep_rows(results)]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    for row in rows:
        lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
    return "\n".join(lines) + "\n"


def level_summary(result):
    lines = [
        "obfuscation:      %s%%  (%d reconfigurable / %d static LUTs)"
        % (fmt_pct(result.pct), result.luts_re, result.luts_st),
        "model CP:         %s ns" % fmt_delay(result.cp),
        "model sumCP:      %s ns" % fmt_delay(result.sumcp),
        "netlist CP:       %s ns" % fmt_delay(result.final_cp),
        "area reconf:      %s um2" % fmt_area(result.area.reconf_um2),
        "area static:      %s um2" % fmt_area(result.area.static_um2),
        "area total:       %s um2" % fmt_area(result.area.total_um2),
        "bitstream bits:   %d" % (result.bitstream.length if result.bitstream else 0),
        "verify:           %s" % result.verify,
    ]
    if result.exposed is not None:
        if result.exposed.total:
            lines.insert(1, "exposed patterns: %d (%d unique), search space %.2f bits"
                         % (result.exposed.total, result.exposed.unique,
                            search_space_bits(result.exposed)))
        else:
            lines.insert(1, "exposed patterns: 0")
    if result.trajectory:
        w0 = result.trajectory[0][1]
        w1 = result.trajectory[-1][1]
        lines.append("pin swaps:        %d attempts, WNS %s -> %s ns"
                     % (len(result.trajectory), fmt_delay(w0), fmt_delay(w1)))
    return "\n".join(lines) + "\n"


def trajectory_csv(trajectory):
    rows = [(a, fmt_delay(w), fmt_delay(t)) for a, w, t in trajectory]
    return _csv_text(("attempt", "wns_ns", "tns_ns"), rows)


def histogram_csv(hist):
    total = hist.total
    rows = []
    ranked = sorted(hist.entries.items(), key=lambda kv: (-kv[1], kv[0]))
    for rank, ((k, mask), count) in enumerate(ranked, 1):
        rows.append((rank, k, "%0*x" % ((1 << k) // 4 or 1, mask), count,
                     "%.6f" % (count / total)))
    return _csv_text(("rank", "width", "mask_hex", "count", "share"), rows)


def ranking_csv(report):
    rows = [(rank, name, "%.6f" % r)
            for rank, (name, r) in enumerate(report.ranking, 1)]
    return _csv_text(("rank", "design", "pearson_r"), rows)


def _new_axes(n=1):
    fig, axes = plt.subplots(1, n, figsize=(4.8 * n, 3.4))
    return fig, (axes if n > 1 else (axes,))


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def sweep_figure(results, path):
    """Delay and area against obfuscation level, two panels."""
    pts = sorted((r.row() for r in results), key=lambda t: t[0])
    pct = [p[0] for p in pts]
    fig, (ax1, ax2) = _new_axes(2)
    ax1.plot(pct, [p[2] for p in pts], "o-", label="sumCP")
    ax1.plot(pct, [p[1] for p in pts], "s--", label="CP")
    ax1.set_xlabel("obfuscation [%]")
    ax1.set_ylabel("delay [ns]")
    ax1.legend()
    ax1.grid(True, alpha=0.3)
    ax2.plot(pct, [p[3] for p in pts], "o-", label="reconf")
    ax2.plot(pct, [p[4] for p in pts], "s--", label="static")
    ax2.plot(pct, [p[5] for p in pts], "^:", label="total")
    ax2.set_xlabel("obfuscation [%]")
    ax2.set_ylabel("area [um2]")
    ax2.legend()
    ax2.grid(True, alpha=0.3)
    return _finish(fig, path)


def trajectory_figure(trajectory, path):
    fig, (ax,) = _new_axes()
    xs = [t[0] for t in trajectory]
    ax.step(xs, [t[1] for t in trajectory], where="post", label="WNS")
    ax.step(xs, [t[2] for t in trajectory], where="post", label="TNS",
            linestyle="--")
    ax.set_xlabel("swap attempt")
    ax.set_ylabel("slack [ns]")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def histogram_figure(hist, path, fit=None):
    """Rank/frequency view of exposed patterns, log2 counts."""
    counts = sorted(hist.entries.values(), reverse=True)
    ranks = range(1, len(counts) + 1)
    fig, (ax,) = _new_axes()
    ax.plot(list(ranks), [math.log2(c) for c in counts], ".", label="observed")
    if fit is not None:
        ax.plot([r for r in ranks], [math.log2(f) for f in fit.fitted],
                "-", label="degree-%d fit" % fit.degree)
        for r in fit.outlier_ranks:
            ax.axvline(r, color="tab:red", alpha=0.25)
    ax.set_xlabel("pattern rank")
    ax.set_ylabel("log2 count")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)
