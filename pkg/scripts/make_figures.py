"""Render figures from previously generated output directories.

Expects the outputs of run_operating_point.py / run_trotter_amplification.py
and turns them into a level-vs-cycle plot and Wigner panels via plotkit.

Usage: python scripts/make_figures.py OUT_DIR [FIG_DIR]
"""

import json
import pathlib
import subprocess
import sys


def main(out_dir: str, fig_dir: str) -> None:
    out = pathlib.Path(out_dir)
    figs = pathlib.Path(fig_dir)
    figs.mkdir(parents=True, exist_ok=True)

    jobs = []
    if (out / "fits.json").exists():
        spec = {"kind": "level_vs_cycle",
                "inputs": {"fits_json": str(out / "fits.json")}}
        jobs.append(("levels.png", spec))
    panels = sorted(str(p) for p in out.glob("wigner_*.csv"))
    if panels:
        spec = {"kind": "wigner_panel", "inputs": {"wigner_csvs": panels[:4]}}
        jobs.append(("wigner_panels.png", spec))
    if not jobs:
        raise SystemExit(f"nothing to plot in {out}")

    for name, spec in jobs:
        spec_path = figs / (name + ".spec.json")
        spec_path.write_text(json.dumps(spec))
        subprocess.run(["plotkit", "render", "--spec", str(spec_path),
                        "--out", str(figs / name)], check=True)
        print("wrote", figs / name)


if __name__ == "__main__":
    if len(sys.argv) < 2:
        raise SystemExit(__doc__)
    main(sys.argv[1], sys.argv[2] if len(sys.argv) > 2 else "out/figures")
