"""Render G+ for the real Hénon slice and write PGM and CSV files."""

import argparse
from fractions import Fraction

from henon_sibony import GreenOptions, SliceSpec, henon, raster_slice
from henon_sibony.green import write_csv, write_pgm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c", type=Fraction, default=Fraction(1, 2))
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--max-iter", type=int, default=200)
    ap.add_argument("--out", default="henon_slice")
    args = ap.parse_args()

    spec = SliceSpec((0, 0), (1, 0), (0, 1), (-2, 2, -2, 2), (args.size, args.size))
    grid = raster_slice(henon(args.c), 2, spec, GreenOptions(max_iter=args.max_iter))
    write_pgm(grid, args.out + ".pgm", 1.0)
    write_csv(grid, args.out + ".csv")
    print(f"bounded pixels: {int((~grid.escaped).sum())} of {args.size**2}")


if __name__ == "__main__":
    main()
