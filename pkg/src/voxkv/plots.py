"""Report figures rendered alongside the delimited outputs.

matplotlib is imported lazily with the Agg backend so headless runs and
non-report commands stay lightweight; figures carry no timestamps and are
byte-stable for identical inputs.
"""

from __future__ import annotations

_DPI = 120


def _plt():
    import matplotlib
    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path):
    fig.savefig(path, dpi=_DPI)
    import matplotlib.pyplot as plt
    plt.close(fig)


def plot_gap_histogram(hist, path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    labels = [f"2^{i}" for i in range(len(hist.counts) - 1)] + ["ovf"]
    ax.bar(range(len(hist.counts)), hist.counts, color="#4878d0")
    ax.set_xticks(range(len(hist.counts)))
    ax.set_xticklabels(labels, rotation=60, fontsize=7)
    ax.set_xlabel("reuse gap bucket (accesses)")
    ax.set_ylabel("count")
    ax.set_title("Gaps between consecutive accesses to the same block")
    fig.tight_layout()
    _save(fig, path)


def plot_distinct_blocks(rows, path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    frames = [r[0] for r in rows]
    counts = [r[1] for r in rows]
    ax.plot(frames, counts, marker="o", color="#d65f5f")
    ax.set_xlabel("frame")
    ax.set_ylabel("distinct blocks")
    ax.set_title("Distinct blocks accessed per map update")
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    _save(fig, path)


def plot_hit_rate_curve(rows, mechanism_hit_rate, path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    caps = [r[0] for r in rows]
    rates = [r[1] for r in rows]
    ax.semilogx(caps, rates, marker="o", base=2, color="#4878d0",
                label="fully associative LRU buffer")
    if mechanism_hit_rate is not None:
        ax.axhline(mechanism_hit_rate, color="#d65f5f", linestyle="--",
                   label="reserved-way hierarchy")
    ax.set_xlabel("buffer capacity (pairs)")
    ax.set_ylabel("hit rate")
    ax.set_ylim(0, 1.02)
    ax.set_title("Hit rate vs buffer capacity")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_sweep(rows, path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    sizes = [r["voxel_size"] for r in rows]
    ax.plot(sizes, [r["updates"] for r in rows], marker="o", color="#4878d0",
            label="voxels updated per run")
    ax.plot(sizes, [r["accesses"] for r in rows], marker="s", color="#6acc65",
            label="block accesses")
    ax.set_yscale("log")
    ax.invert_xaxis()
    ax.set_xlabel("voxel size (m)")
    ax.set_ylabel("count")
    ax.set_title("Work vs map resolution")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_footprint(rows, path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    kinds = sorted({r["store_kind"] for r in rows})
    lfs = sorted({r["load_factor"] for r in rows})
    width = 0.8 / len(kinds)
    colors = {"hash": "#4878d0", "flat_hta": "#d65f5f"}
    for ki, kind in enumerate(kinds):
        xs = [i + ki * width for i in range(len(lfs))]
        ys = [next(r["model_bytes_index"] for r in rows
                   if r["store_kind"] == kind and r["load_factor"] == lf) / 1024.0
              for lf in lfs]
        ax.bar(xs, ys, width=width, label=kind, color=colors.get(kind))
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(lfs))])
    ax.set_xticklabels([f"{lf:g}" for lf in lfs])
    ax.set_xlabel("load factor")
    ax.set_ylabel("index KiB")
    ax.set_title("Modeled index footprint by store kind")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
