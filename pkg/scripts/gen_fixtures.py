#!/usr/bin/env python3
"""Write the canonical fixture fields and trajectories to disk.

Produces the assets the CLI examples in the README use:
    fixtures/
      flat.mhdf, ramp.mhdf, dome.mhdf, sine.mhdf, holed.mhdf, relief800.mhdf
      free_space.csv, descend_hold.csv, curved_slide.csv, contact_heavy.csv
"""

import argparse
from pathlib import Path

from hapticfield.fixtures import (
    contact_heavy_trajectory,
    curved_slide_trajectory,
    descend_hold_trajectory,
    dome_field,
    flat_field,
    free_space_trajectory,
    holed_field,
    ramp_field,
    relief_field,
    sine_field,
)
from hapticfield.io import save_depth_grid, save_trajectory


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out-dir", default="fixtures")
    parser.add_argument("--benchmark-size", type=int, default=800)
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    fields = {
        "flat": flat_field(10.0, size=65),
        "ramp": ramp_field(slope=1.0, size=65),
        "dome": dome_field(size=65, spacing=1.0, curvature=0.01),
        "sine": sine_field(size=65),
        "holed": holed_field(size=65),
        f"relief{args.benchmark_size}": relief_field(args.benchmark_size),
    }
    for name, field in fields.items():
        save_depth_grid(field, out / f"{name}.mhdf")
        print(f"{name}: {field.width}x{field.height} @ {field.spacing} mm")

    flat = fields["flat"]
    dome = fields["dome"]
    save_trajectory(free_space_trajectory(flat), out / "free_space.csv")
    save_trajectory(descend_hold_trajectory(flat, depth=1.0), out / "descend_hold.csv")
    save_trajectory(curved_slide_trajectory(dome, depth=0.5), out / "curved_slide.csv")
    relief = fields[f"relief{args.benchmark_size}"]
    save_trajectory(contact_heavy_trajectory(relief, ticks=12_000), out / "contact_heavy.csv")
    print(f"trajectories written to {out}/")


if __name__ == "__main__":
    main()
