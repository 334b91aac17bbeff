#!/usr/bin/env python3
"""Build a Cremona allcurves-format table from PARI's elldata package.

PARI/GP ships Cremona's curve tables as the `elldata` package. A copy is
available as a Python wheel (passagemath-pari-elldata); this script reads the
`ell<k>` files from an unpacked package directory (or downloads the wheel with
pip) and writes lines of the form

    conductor class number [a1,a2,a3,a4,a6] rank torsion

Rank is the number of Mordell-Weil generators stored in elldata. Torsion
order is recomputed here from rational roots of division polynomials.
"""

import argparse
import glob
import io
import json
import os
import re
import subprocess
import sys
import tempfile
import zipfile
from fractions import Fraction
from math import gcd, isqrt

import sympy


def load_elldata(directory, max_conductor):
    records = []
    for k in range(0, max_conductor // 1000 + 1):
        path = os.path.join(directory, f"ell{k}")
        if not os.path.exists(path):
            continue
        text = open(path).read()
        text = re.sub(r"(-?\d+/\d+)", r'"\1"', text)
        for block in json.loads(text):
            conductor = block[0]
            if conductor > max_conductor:
                continue
            for label, ainvs, gens in block[1:]:
                m = re.fullmatch(r"(\d+)([a-z]+)(\d+)", label)
                records.append((conductor, m.group(2), int(m.group(3)), ainvs, len(gens)))
    records.sort(key=lambda r: (r[0], len(r[1]), r[1], r[2]))
    return records


def b_invariants(a):
    a1, a2, a3, a4, a6 = a
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def count_mod(a, l):
    a1, a2, a3, a4, a6 = a
    squares = {}
    for y in range(l):
        squares.setdefault(y * y % l, []).append(y)
    n = 1
    for x in range(l):
        bb = (a1 * x + a3) % l
        cc = -(x ** 3 + a2 * x * x + a4 * x + a6) % l
        # y^2 + bb y + cc = 0
        for y in range(l):
            if (y * y + bb * y + cc) % l == 0:
                n += 1
    return n


def division_polys(a, upto):
    x = sympy.Symbol("x")
    b2, b4, b6, b8 = b_invariants(a)
    F = 4 * x ** 3 + b2 * x ** 2 + 2 * b4 * x + b6
    h = {0: sympy.Integer(0), 1: sympy.Integer(1), 2: sympy.Integer(1),
         3: 3 * x ** 4 + b2 * x ** 3 + 3 * b4 * x ** 2 + 3 * b6 * x + b8,
         4: 2 * x ** 6 + b2 * x ** 5 + 5 * b4 * x ** 4 + 10 * b6 * x ** 3 + 10 * b8 * x ** 2
         + (b2 * b8 - b4 * b6) * x + (b4 * b8 - b6 * b6)}

    def get(m):
        if m in h:
            return h[m]
        k = m // 2
        if m % 2:
            if k % 2 == 0:
                v = F ** 2 * get(k + 2) * get(k) ** 3 - get(k - 1) * get(k + 1) ** 3
            else:
                v = get(k + 2) * get(k) ** 3 - F ** 2 * get(k - 1) * get(k + 1) ** 3
        else:
            v = get(k) * (get(k + 2) * get(k - 1) ** 2 - get(k - 2) * get(k + 1) ** 2)
        h[m] = sympy.expand(v)
        return h[m]

    out = {}
    for m in range(2, upto + 1):
        out[m] = sympy.Poly(get(m) * (F if m % 2 == 0 else 1), x)
    return out


def rational_sqrt(q):
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def torsion_order(a, conductor):
    bound = 0
    for l in sympy.primerange(3, 200):
        if conductor % l == 0:
            continue
        bound = gcd(bound, count_mod(a, l))
        if bound == 1:
            return 1
    a1, a2, a3, a4, a6 = a
    polys = division_polys(a, bound)
    xs = set()
    for m in range(2, bound + 1):
        if bound % m:
            continue
        for r in polys[m].ground_roots().keys():
            xs.add(Fraction(int(sympy.numer(r)), int(sympy.denom(r))))
    points = 1
    for x0 in xs:
        bb = a1 * x0 + a3
        disc = bb * bb + 4 * (x0 ** 3 + a2 * x0 * x0 + a4 * x0 + a6)
        if disc == 0:
            points += 1
        elif rational_sqrt(disc) is not None:
            points += 2
    return points


def fetch_wheel(dest):
    subprocess.check_call([sys.executable, "-m", "pip", "download", "--no-deps",
                           "-d", dest, "passagemath-pari-elldata"])
    wheel = glob.glob(os.path.join(dest, "*.whl"))[0]
    zipfile.ZipFile(wheel).extractall(dest)
    return glob.glob(os.path.join(dest, "**", "elldata"), recursive=True)[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--elldata", help="directory holding ell0, ell1, ... (downloaded if omitted)")
    ap.add_argument("--max-conductor", type=int, default=1999)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        directory = args.elldata or fetch_wheel(tmp)
        records = load_elldata(directory, args.max_conductor)

    with open(args.out, "w") as fh:
        for conductor, cls, number, ainvs, rank in records:
            tors = torsion_order(ainvs, conductor)
            fh.write(f"{conductor} {cls} {number} [{','.join(str(v) for v in ainvs)}] {rank} {tors}\n")
    print(f"wrote {len(records)} curves to {args.out}")


if __name__ == "__main__":
    main()
