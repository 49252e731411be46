"""Figure output for the per-spin gain sweep."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_information_per_spin(rows: Sequence, path, title: str | None = None):
    """Write the method-A / method-B per-spin gain curves to ``path``.

    ``rows`` are :class:`relparam.inference.SweepRow` objects.  The format is
    taken from the file suffix (png, pdf, svg, ...).
    """
    j = [float(r.j) for r in rows]
    i_a = [r.a.i for r in rows]
    i_b = [r.b.i for r in rows]
    err_a = [2 * r.a.i_stderr for r in rows]
    err_b = [2 * r.b.i_stderr for r in rows]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.errorbar(j, i_a, yerr=err_a, fmt="o-", ms=4, lw=1.5, capsize=2, label="(a) method A, 3 spins")
    ax.errorbar(j, i_b, yerr=err_b, fmt="s--", ms=4, lw=1.5, capsize=2, label="(b) method B, 6 spins")
    ax.set_xscale("log")
    ax.set_xlabel("spin $j$")
    ax.set_ylabel("average information gain per spin (bits)")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", color="lightgray", ls="-", alpha=0.7)
    ax.legend(loc="lower right")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def gnuplot_script(csv_path, output="fig2.png") -> str:
    """gnuplot commands plotting the ``*`` rows of a sweep CSV."""
    csv_path = str(csv_path)
    return "\n".join([
        "set datafile separator ','",
        "set terminal pngcairo size 900,600",
        f"set output '{output}'",
        "set logscale x",
        "set xlabel 'spin j'",
        "set ylabel 'information gain per spin (bits)'",
        "set key bottom right",
        f"plot '< grep \"^a-spinj\" {csv_path}' using 2:7 with linespoints title '(a) method A', \\",
        f"     '< grep \"^b-spinj\" {csv_path}' using 2:7 with linespoints title '(b) method B'",
        "",
    ])
