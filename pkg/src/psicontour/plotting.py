"""Plot tables (gnuplot layout) and rendered figures of values on a complex grid."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_gnuplot_table(path, re_axis, im_axis, field, label):
    """Write ``re im field`` rows, one block per ``re`` value, blank line between blocks."""
    path = Path(path)
    lines = [f"# re im {label}"]
    for i, a in enumerate(re_axis):
        for j, b in enumerate(im_axis):
            lines.append(f"{float(a)!r} {float(b)!r} {float(field[i, j])!r}")
        lines.append("")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_plot_tables(out_dir, prefix, re_axis, im_axis, values):
    """``|F|`` and ``arg F`` tables for values of shape ``(len(re_axis), len(im_axis))``."""
    out_dir = Path(out_dir)
    F = np.asarray(values, dtype=complex)
    return [
        write_gnuplot_table(out_dir / f"{prefix}_abs.dat", re_axis, im_axis, np.abs(F), "abs"),
        write_gnuplot_table(out_dir / f"{prefix}_arg.dat", re_axis, im_axis, np.angle(F), "arg"),
    ]


def render_figure(path, re_axis, im_axis, values, title=""):
    """Side-by-side colour maps of ``|F|`` and ``arg F`` saved as PNG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    F = np.asarray(values, dtype=complex)
    extent = [float(re_axis[0]), float(re_axis[-1]), float(im_axis[0]), float(im_axis[-1])]
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6), constrained_layout=True)
    panels = [(np.abs(F), "|F|", "viridis"), (np.angle(F), "arg F", "twilight")]
    for ax, (field, label, cmap) in zip(axes, panels):
        im = ax.imshow(field.T, origin="lower", extent=extent, aspect="auto", cmap=cmap)
        ax.set_xlabel("Re z")
        ax.set_ylabel("Im z")
        ax.set_title(label)
        fig.colorbar(im, ax=ax)
    if title:
        fig.suptitle(title)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
