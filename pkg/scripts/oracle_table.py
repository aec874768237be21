"""Compare the double-precision G+ estimate with a 200-bit reference at random points."""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from oracles import green_oracle  # noqa: E402

from henon_sibony import GreenOptions, cubic_cycle, green_plus, henon  # noqa: E402


def main(count=10, seed=8):
    rng = np.random.default_rng(seed)
    opts = GreenOptions(radius=1e100)
    print(f"{'map':6} {'estimate':>22} {'reference':>22} {'error':>10}")
    for name, F in (("cubic", cubic_cycle()), ("henon", henon(1))):
        for _ in range(count):
            z = rng.uniform(-2, 2, F.k) + 1j * rng.uniform(-2, 2, F.k)
            est = green_plus(F, 2, z, opts).value
            ref = green_oracle(F, 2, z)
            print(f"{name:6} {est:22.15e} {ref:22.15e} {abs(est - ref):10.2e}")


if __name__ == "__main__":
    main()
