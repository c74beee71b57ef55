#!/usr/bin/env python3
"""Geometry table for the windowed-helix family, reach normalized to sqrt(d).

Prints one CSV row per ambient dimension with the same header as
`svr curve-info`.  Length should grow roughly like d^1.5 and the 5% stable
rank like d, which is what makes this family a hard high-dimensional target.
"""

import argparse

from svreg.curves import (CurveSpec, build_curve, geometry_report,
                          normalize_to_reach)

HEADER = "kind,d,len,reach,max_curvature,srank_sum,srank_count,complexity"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d-min", type=int, default=3)
    ap.add_argument("--d-max", type=int, default=9)
    ap.add_argument("--grid", type=int, default=1000)
    args = ap.parse_args()

    print(HEADER)
    for d in range(args.d_min, args.d_max + 1):
        curve = build_curve(CurveSpec(kind="meyer_helix", d=d),
                            grid_size=args.grid)
        curve = normalize_to_reach(curve, d ** 0.5)
        r = geometry_report(curve)
        print(f"{r.kind},{r.d},{r.length:.4g},{r.reach:.4g},"
              f"{r.max_curvature:.4g},{r.stable_rank_sum:.4g},"
              f"{r.stable_rank_count},{r.complexity:.4g}")


if __name__ == "__main__":
    main()
