"""Figure assembly: one column per environment, final penalty on top and
cumulative penalty below, with one-standard-error bands."""
from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .spec import PlotSpec, load_summary, style_for  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "doeplots"


def _series(stats: dict) -> dict:
    rows = stats["per_step"]
    return {
        "t": np.array([r["t"] for r in rows]),
        "final_mean": np.array([r["final_mean"] for r in rows]),
        "final_stderr": np.array([r["final_stderr"] for r in rows]),
        "cum_mean": np.array([r["cum_mean"] for r in rows]),
        "cum_stderr": np.array([r["cum_stderr"] for r in rows]),
    }


def render(spec: PlotSpec) -> list[str]:
    """Write the figure; return a list of problems (missing policies etc.).

    Problems are skipped rather than fatal so one bad policy id does not
    block the remaining panels; the CLI turns a non-empty list into a
    non-zero exit code.
    """
    problems: list[str] = []
    summaries = []
    for path in spec.summary_paths:
        try:
            summaries.append((path, load_summary(path)))
        except (OSError, ValueError) as exc:
            problems.append(f"{path}: {exc}")
    if not summaries:
        problems.append("no readable summaries; nothing to render")
        return problems

    ncols = len(summaries)
    fig, axes = plt.subplots(2, ncols, figsize=(4.2 * ncols, 6.4), squeeze=False)
    for col, (path, summary) in enumerate(summaries):
        wanted = spec.policies or summary["policies"]
        ax_final, ax_cum = axes[0][col], axes[1][col]
        for i, pid in enumerate(wanted):
            stats = summary["per_policy"].get(pid)
            if stats is None or stats.get("incomplete"):
                problems.append(f"{path}: policy {pid!r} missing from summary")
                continue
            s = _series(stats)
            style = style_for(pid, spec.styles, i)
            for ax, mean, err in (
                (ax_final, s["final_mean"], s["final_stderr"]),
                (ax_cum, s["cum_mean"], s["cum_stderr"]),
            ):
                ax.plot(s["t"], mean, label=pid, color=style["color"], marker=style["marker"],
                        markersize=3, markevery=max(1, len(s["t"]) // 12), linewidth=1.4)
                if np.any(err > 0):
                    ax.fill_between(s["t"], mean - err, mean + err, color=style["color"], alpha=0.2, linewidth=0)
        ax_final.set_title(summary["environment"])
        ax_final.set_ylabel("final penalty $\\lambda(\\theta^*, D_n)$")
        ax_cum.set_ylabel("cumulative penalty $\\Lambda(\\theta^*, D_n)$")
        ax_cum.set_xlabel("number of experiments $n$")
        ax_final.legend(fontsize=8)
    fig.tight_layout()

    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format=spec.fmt, dpi=150, metadata=_stable_metadata(spec.fmt))
    plt.close(fig)
    return problems


def _stable_metadata(fmt: str) -> dict:
    # strip timestamps so re-rendering identical inputs gives identical bytes
    if fmt == "svg":
        return {"Date": None}
    return {"Software": "doeplots"}
