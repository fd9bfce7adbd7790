"""rotorfigs CLI: render one figure from a spec, or batch-render the standard set."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figspec import FigureSpec, parse_spec_file
from .render import render

# standard figure set for `batch`: (csv name, figure kind, options, output name)
BATCH_SET = [
    ("spectrum.csv", "lines",
     {"lines.x": "v0", "axes.xlabel": "v0", "axes.ylabel": "energy (E_k)",
      "axes.title": "rotor spectrum vs barrier height"},
     "spectrum.png"),
    ("trace.csv", "lines",
     {"lines.x": "time_s", "lines.y": "p_plus", "axes.xlabel": "time (s)",
      "axes.ylabel": "p_+", "axes.title": "right-well population"},
     "trace.png"),
    ("vismap.csv", "heatmap",
     {"heatmap.x": "", "heatmap.value": "visibility", "heatmap.mask": "in_regime",
      "axes.title": "tunneling visibility"},
     "vismap.png"),
    ("budget.csv", "bars",
     {"axes.ylabel": "rate (1/s)", "axes.title": "decoherence budget"},
     "budget.png"),
]


def run_batch(csv_dir: str, out_dir: str) -> list[dict]:
    src = Path(csv_dir)
    dst = Path(out_dir)
    dst.mkdir(parents=True, exist_ok=True)
    metas = []
    for csv_name, kind, options, out_name in BATCH_SET:
        csv_path = src / csv_name
        if not csv_path.exists():
            raise FileNotFoundError(f"batch rendering expects {csv_path}")
        opts = dict(options)
        if kind == "heatmap":
            # take the first two columns as the grid axes
            from .render import read_csv
            header, _ = read_csv(str(csv_path))
            opts["heatmap.x"], opts["heatmap.y"] = header[0], header[1]
        spec = FigureSpec(kind=kind, input_csv=str(csv_path),
                          output_path=str(dst / out_name), options=opts)
        metas.append(render(spec))
    return metas


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rotorfigs",
                                     description="Render figures from nanorotor CSVs.")
    sub = parser.add_subparsers(dest="command", required=True)
    one = sub.add_parser("render", help="render a single figure from a spec file")
    one.add_argument("--spec", required=True, help="figure spec (key-value file)")
    batch = sub.add_parser("batch", help="render the standard four-figure set")
    batch.add_argument("--csv-dir", required=True,
                       help="directory containing spectrum/trace/vismap/budget CSVs")
    batch.add_argument("--out-dir", required=True, help="directory for the images")

    args = parser.parse_args(argv)
    try:
        if args.command == "render":
            meta = render(parse_spec_file(args.spec))
            print(f"wrote {meta['output']} ({meta['size_px'][0]}x{meta['size_px'][1]} px)")
        else:
            for meta in run_batch(args.csv_dir, args.out_dir):
                print(f"wrote {meta['output']}")
        return 0
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
