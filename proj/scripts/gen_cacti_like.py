#!/usr/bin/env python3
"""Generate a synthetic CACTI-like access-time table.

Sizes run from 4 KB to 16 MB in powers of two. Latency follows
tau0 * (size / 4 KB) ** beta with bounded multiplicative noise.
"""
import argparse
import csv
import sys

import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", type=float, default=0.45)
    ap.add_argument("--tau0", type=float, default=0.62, help="latency of the 4 KB cache (ns)")
    ap.add_argument("--noise", type=float, default=0.02, help="max relative noise")
    ap.add_argument("--seed", type=int, default=20131)
    ap.add_argument("-o", "--output", default="-")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    sizes = [4096 * 2**k for k in range(13)]
    out = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["size_bytes", "latency_ns"])
    for s in sizes:
        lat = args.tau0 * (s / 4096) ** args.beta * (1 + rng.uniform(-args.noise, args.noise))
        w.writerow([s, f"{lat:.6f}"])


if __name__ == "__main__":
    main()
