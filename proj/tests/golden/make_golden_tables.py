#!/usr/bin/env python3
"""Independent oracle for the index-map golden tables.

Enumerations below the cutoff are derived directly from the case formulas,
with exact fractions, independent of the C++ generator representation:

  * X-ray map, refined:   {(2z+1+2p, l) : p >= 0}, naive: {(q+2z, p) : q >= 1}
  * Backprojection of tau^gamma log^k tau: N0 x {0} union E_{gamma,k}, where
    the log cap of E_{gamma,k} = {((gamma+1)/2 + p, j)} is k-1 / k+1 / k in
    the even / odd / non-integer cases (empty cap when k=0 in the even case)
  * Normal-operator iterates: E_k = {(z,p) : z in N0, 0 <= p <= min(z,k)}

Rows are (re_z, im_z, k) sorted by (re_z, im_z, k), cutoff Re z <= 5.
"""

from fractions import Fraction
import os

CUTOFF = Fraction(5)
OUT = os.path.dirname(os.path.abspath(__file__))


def write_table(name, cols):
    """cols: dict exponent(Fraction) -> max log cap (int, >= 0)."""
    pts = []
    for z, cap in cols.items():
        if z <= CUTOFF:
            for j in range(cap + 1):
                pts.append((z, j))
    pts.sort()
    path = os.path.join(OUT, name + ".csv")
    with open(path, "w", newline="") as fh:
        fh.write("re_z,im_z,k\r\n")
        for z, j in pts:
            fh.write("%.17g,0,%d\r\n" % (float(z), j))
    print("wrote", path, len(pts), "rows")


def add(cols, z, cap):
    cols[z] = max(cols.get(z, -1), cap)


def ladder(cols, base, step, cap, cutoff=CUTOFF):
    z = base
    while z <= cutoff:
        add(cols, z, cap)
        z += step


def xray_refined(base):
    cols = {}
    ladder(cols, 2 * base + 1, Fraction(2), 0)
    return cols


def xray_refined_of_n0():
    cols = {}
    for n in range(0, 6):
        ladder(cols, 2 * Fraction(n) + 1, Fraction(2), 0)
    return cols


def xray_naive_of_n0():
    cols = {}
    for n in range(0, 6):
        ladder(cols, Fraction(n), Fraction(1), 0, CUTOFF)
    # q >= 1 shifts everything up by at least one
    return {z + 1: cap for z, cap in cols.items() if z + 1 <= CUTOFF}


def backprojection(gamma, k):
    cols = {}
    ladder(cols, Fraction(0), Fraction(1), 0)  # N0 x {0}
    if gamma.denominator == 1 and gamma >= 0:
        cap = (k - 1) if gamma % 2 == 0 else (k + 1)
    else:
        cap = k
    if cap >= 0:
        ladder(cols, (gamma + 1) / 2, Fraction(1), cap)
    return cols


def normal_iterate(k):
    cols = {}
    n = Fraction(0)
    while n <= CUTOFF:
        add(cols, n, min(int(n), k))
        n += 1
    return cols


def tag(fr):
    return str(fr.numerator) if fr.denominator == 1 else "%do%d" % (fr.numerator, fr.denominator)


def main():
    write_table("xray_refined_N0", xray_refined_of_n0())
    write_table("xray_naive_N0", xray_naive_of_n0())
    gammas = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3, 2)]
    for g in gammas:
        write_table("xray_refined_g%s" % tag(g), xray_refined(g))
    for g in gammas:
        for k in range(3):
            write_table("backproj_g%s_k%d" % (tag(g), k), backprojection(g, k))
    for k in range(4):
        write_table("normal_iter_k%d" % k, normal_iterate(k))


if __name__ == "__main__":
    main()
