"""Figure specification files: the same flat key-value format as the CLI configs.

Example::

    figure.kind = heatmap        # lines | heatmap | bars
    input.csv   = vismap.csv
    output.path = vismap.png
    heatmap.x   = h_z
    heatmap.y   = h_x
    heatmap.value = visibility
    heatmap.mask  = in_regime    # rows with 0 here are grayed out
"""

from __future__ import annotations

from dataclasses import dataclass, field

_KINDS = ("lines", "heatmap", "bars")

_DEFAULTS = {
    "axes.xlabel": "",
    "axes.ylabel": "",
    "axes.title": "",
    "axes.xscale": "linear",
    "axes.yscale": "linear",
    "lines.x": "",
    "lines.y": "",
    "heatmap.x": "",
    "heatmap.y": "",
    "heatmap.value": "",
    "heatmap.mask": "",
    "heatmap.cmap": "viridis",
    "bars.label": "channel",
    "bars.value": "rate_per_s",
    "bars.log": "true",
}


@dataclass
class FigureSpec:
    kind: str
    input_csv: str
    output_path: str
    options: dict = field(default_factory=dict)

    def get(self, key: str) -> str:
        return self.options.get(key, _DEFAULTS.get(key, ""))


def parse_spec_text(text: str, source: str = "<spec>") -> FigureSpec:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        entries[key] = value

    kind = entries.pop("figure.kind", "")
    if kind not in _KINDS:
        raise ValueError(f"{source}: figure.kind must be one of {_KINDS}, got {kind!r}")
    try:
        input_csv = entries.pop("input.csv")
        output_path = entries.pop("output.path")
    except KeyError as exc:
        raise ValueError(f"{source}: missing required key {exc.args[0]!r}") from None
    unknown = set(entries) - set(_DEFAULTS)
    if unknown:
        raise ValueError(f"{source}: unknown keys {sorted(unknown)}")
    return FigureSpec(kind=kind, input_csv=input_csv, output_path=output_path,
                      options=entries)


def parse_spec_file(path: str) -> FigureSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec_text(fh.read(), source=path)
