"""Plot specification: which summaries, which policies, where the image goes."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

DEFAULT_STYLES = {
    "mps": {"color": "#1f77b4", "marker": "o"},
    "rand": {"color": "#7f7f7f", "marker": "s"},
    "myopic_oracle": {"color": "#2ca02c", "marker": "^"},
    "global_oracle": {"color": "#d62728", "marker": "v"},
}
_FALLBACK_COLORS = ["#9467bd", "#8c564b", "#e377c2", "#bcbd22", "#17becf"]


@dataclass
class PlotSpec:
    summary_paths: list[str]
    out_path: str
    fmt: str = "png"  # png | svg
    policies: list[str] | None = None  # None: every policy found in each summary
    styles: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.fmt not in ("png", "svg"):
            raise ValueError(f"format must be png or svg, got {self.fmt!r}")


def style_for(policy: str, overrides: dict, index: int) -> dict:
    if policy in overrides:
        return overrides[policy]
    if policy in DEFAULT_STYLES:
        return DEFAULT_STYLES[policy]
    return {"color": _FALLBACK_COLORS[index % len(_FALLBACK_COLORS)], "marker": "x"}


def load_summary(path: str | Path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("environment", "policies", "per_policy"):
        if key not in doc:
            raise ValueError(f"{path}: not a campaign summary (missing {key!r})")
    return doc
