"""Batch command line driver.

Subcommands: grid, project, homology, slice, glue, verify, certify,
probe, rescale.  Input is a flat key=value config file plus scene files;
output is CSV/text reports (and an SVG for planar scenes) in --out.
Exit codes: 0 pass, 1 checked failure, 2 input error.
"""

from __future__ import annotations

import argparse
import math
import os
import random
import sys
from fractions import Fraction

from .competitor import (GlueParams, attach_certificates,
                         competitor_certificate, glue_competitor,
                         grid_vanishing_probe, measure_audit, select_slice,
                         verify_topological_competitor)
from .dyadic import DyadicCube, build_complex, build_domain, \
    neighborhood_complexes
from .exact import frac
from .ffproj import ff_project, ff_project_local
from .geomset import Ball, Box, PolySet, load_scene, rescale, save_scene
from .homology import DyadicComplex, ChainComplexZ, FgAbelianGroup, \
    homology_group


def parse_config(path) -> dict:
    cfg = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError("%s:%d: expected key=value" % (path, lineno))
            key, _, value = line.partition("=")
            cfg[key.strip()] = value.strip()
    cfg["_dir"] = os.path.dirname(os.path.abspath(path))
    return cfg


def _path(cfg, key):
    p = cfg[key]
    if not os.path.isabs(p):
        p = os.path.join(cfg["_dir"], p)
    return p


def _fracs(text):
    return tuple(Fraction(v) for v in text.split(","))


def fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, Fraction)):
        return "%.12g" % float(v)
    if v is None:
        return ""
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_svg(path, layers, size=640):
    """Deterministic planar rendering: one polyline element per segment,
    segments sorted, one layer per (name, color, set)."""
    pts = [v for _n, _c, E in layers for s in E.simplices for v in s]
    if not pts:
        xmin = ymin = 0.0
        xmax = ymax = 1.0
    else:
        xmin = min(float(p[0]) for p in pts)
        xmax = max(float(p[0]) for p in pts)
        ymin = min(float(p[1]) for p in pts)
        ymax = max(float(p[1]) for p in pts)
    span = max(xmax - xmin, ymax - ymin, 1e-9)
    pad = 0.05 * span

    def sx(x):
        return (float(x) - xmin + pad) / (span + 2 * pad) * size

    def sy(y):
        return size - (float(y) - ymin + pad) / (span + 2 * pad) * size

    lines = ['<svg xmlns="http://www.w3.org/2000/svg" width="%d" '
             'height="%d">' % (size, size)]
    for name, color, E in layers:
        lines.append('<g id="%s" stroke="%s" fill="none">' % (name, color))
        for p, q in sorted(E.simplices):
            lines.append('<line x1="%.12g" y1="%.12g" x2="%.12g" '
                         'y2="%.12g"/>' % (sx(p[0]), sy(p[1]),
                                           sx(q[0]), sy(q[1])))
        lines.append("</g>")
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def ledger_rows(audit):
    for r in audit["rows"]:
        yield (r["term"], r["check"], r["value"], r["budget"], r["pass"])


def _glue_inputs(cfg, rng):
    E = load_scene(_path(cfg, "scene_E"))
    F = load_scene(_path(cfg, "scene_F"))
    seq = [load_scene(os.path.join(cfg["_dir"], p) if not os.path.isabs(p)
                      else p) for p in cfg["scenes_seq"].split(",")]
    params = GlueParams(
        r1=Fraction(cfg["r1"]), r2=Fraction(cfg["r2"]),
        m0=int(cfg["m0"]), m2=int(cfg["m2"]), m3=int(cfg["m3"]),
        eps1=Fraction(cfg["eps1"]), eps2=Fraction(cfg["eps2"]),
        t1=Fraction(cfg["t1"]), tau=Fraction(cfg["tau"]),
        ks=tuple(int(k) for k in cfg["ks"].split(",")),
        budget=int(cfg.get("budget", 64)))
    B1 = Ball(_fracs(cfg["B1_center"]), Fraction(cfg["B1_radius"]))
    return E, F, seq, params, B1


def cmd_grid(cfg, out, rng, tol):
    E = load_scene(_path(cfg, "scene"))
    D = build_domain(Fraction(cfg["r1"]), Fraction(cfg["r2"]),
                     int(cfg["m0"]), n=E.n)
    nb = neighborhood_complexes(D, E, int(cfg["m"]), Fraction(cfg["t"]))
    with open(os.path.join(out, "domain.txt"), "w") as fh:
        fh.write(D.serialize())
    for name, K in (("S_prime", nb.S_prime), ("S_prime_d", nb.S_prime_d),
                    ("T_prime", nb.T_prime), ("T_prime_d", nb.T_prime_d)):
        with open(os.path.join(out, name + ".txt"), "w") as fh:
            fh.write(K.serialize())
    write_csv(os.path.join(out, "grid.csv"), ["complex", "cells"],
              [(name, len(K)) for name, K in
               (("S", nb.S), ("S_prime", nb.S_prime),
                ("S_prime_d", nb.S_prime_d), ("T", nb.T),
                ("T_prime", nb.T_prime), ("T_prime_d", nb.T_prime_d))])
    return 0


def cmd_project(cfg, out, rng, tol):
    E = load_scene(_path(cfg, "scene"))
    m = int(cfg["m"])
    corners = set()
    for s in E.simplices:
        for v in s:
            corners.add(tuple(int(math.floor(c * 2 ** m)) for c in v))
    lo = tuple(min(c[i] for c in corners) for i in range(E.n))
    hi = tuple(max(c[i] for c in corners) for i in range(E.n))
    cells = []
    stack = [()]
    for i in range(E.n):
        stack = [t + (v,) for t in stack for v in range(lo[i], hi[i] + 2)]
    for c in stack:
        cells.append(DyadicCube(m, c))
    K = build_complex(cells)
    if int(cfg.get("local", 0)):
        out_set, rec = ff_project_local(K, E, int(cfg.get("d", 1)), rng=rng)
    else:
        out_set, rec = ff_project(K, E, int(cfg.get("d", 1)), rng=rng)
    save_scene(out_set, os.path.join(out, "projected.scene"))
    with open(os.path.join(out, "projection.csv"), "w") as fh:
        fh.write("\n".join(rec.csv_rows()) + "\n")
    if E.n == 2:
        write_svg(os.path.join(out, "projection.svg"),
                  [("input", "#888888", E), ("output", "#cc0000", out_set)])
    return 0


def cmd_homology(cfg, out, rng, tol):
    with open(_path(cfg, "complex")) as fh:
        K = DyadicComplex.deserialize(fh.read())
    X = ChainComplexZ.from_complex(K)
    G = FgAbelianGroup.parse(cfg.get("G", "rank 1"))
    k = int(cfg["degree"])
    H = homology_group(X, k, G)
    lines = ["degree %d" % k]
    for f in H.factors:
        lines.append("coeff %d rank %d torsion %s"
                     % (f.coeff, f.rank,
                        ",".join(str(t) for t in f.torsion) or "-"))
    with open(os.path.join(out, "homology.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0


def cmd_slice(cfg, out, rng, tol):
    E = load_scene(_path(cfg, "scene"))
    D = build_domain(Fraction(cfg["r1"]), Fraction(cfg["r2"]),
                     int(cfg["m0"]), n=E.n)
    r0 = select_slice(E, D, Fraction(cfg["eps1"]),
                      int(cfg.get("samples", 9)), rng)
    with open(os.path.join(out, "slice.txt"), "w") as fh:
        fh.write("r0 = %s\n" % r0)
    return 0


def cmd_glue(cfg, out, rng, tol):
    E, F, seq, params, B1 = _glue_inputs(cfg, rng)
    Fks, ledger = glue_competitor(seq, E, F, B1, params, rng)
    audit = measure_audit(ledger, tol)
    write_csv(os.path.join(out, "ledger.csv"),
              ["term", "check", "value", "budget", "pass"],
              ledger_rows(audit))
    for k, Fk in sorted(Fks.items()):
        save_scene(Fk, os.path.join(out, "F_%d.scene" % k))
        if Fk.n == 2:
            write_svg(os.path.join(out, "F_%d.svg" % k),
                      [("glued", "#0044cc", Fk)])
    return 0 if audit["passed"] else 1


def cmd_certify(cfg, out, rng, tol):
    E, F, seq, params, B1 = _glue_inputs(cfg, rng)
    Fks, ledger = glue_competitor(seq, E, F, B1, params, rng)
    U = Box(_fracs(cfg["U_lo"]), _fracs(cfg["U_hi"]))
    certs = {}
    for (k, Fk), Ek in zip(sorted(Fks.items()), seq):
        certs[k] = competitor_certificate(
            Ek, Fk, ledger.domain, ledger.neighborhood, params.eps2, U, E=E)
        with open(os.path.join(out, "certificate_%d.txt" % k), "w") as fh:
            fh.write(certs[k].serialize())
    attach_certificates(ledger, certs)
    ok = bool(certs) and all(c.passed for c in certs.values())
    return 0 if ok else 1


def cmd_verify(cfg, out, rng, tol):
    E = load_scene(_path(cfg, "scene_E"))
    F = load_scene(_path(cfg, "scene_F"))
    B = Ball(_fracs(cfg["B_center"]), Fraction(cfg["B_radius"]))
    U = Box(_fracs(cfg["U_lo"]), _fracs(cfg["U_hi"]))
    report = verify_topological_competitor(
        E, F, B, U, int(cfg.get("d", 1)), mprime=int(cfg.get("mprime", 5)))
    lines = ["components_E %d" % report["components_E"],
             "components_F %d" % report["components_F"]]
    for c in report["cycles"]:
        lines.append("generator p=(%s) q=(%s) %s"
                     % (",".join(str(v) for v in c["p"]),
                        ",".join(str(v) for v in c["q"]),
                        "pass" if c["preserved"] else "fail"))
    lines.append("result %s" % ("pass" if report["passed"] else "fail"))
    with open(os.path.join(out, "verify.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0 if report["passed"] else 1


def cmd_probe(cfg, out, rng, tol):
    E = load_scene(_path(cfg, "scene"))
    D = build_domain(Fraction(cfg["r1"]), Fraction(cfg["r2"]),
                     int(cfg["m0"]), n=E.n)
    res = grid_vanishing_probe(E, D, _fracs(cfg["t_list"]),
                               [int(m) for m in cfg["m_list"].split(",")])
    header = ["t\\m"] + [str(m) for m in res["m_list"]]
    rows = [[fmt(t)] + [res["table"][(t, m)] for m in res["m_list"]]
            for t in res["t_list"]]
    write_csv(os.path.join(out, "probe.csv"), header, rows)
    return 0 if res["columns_decreasing"] else 1


def cmd_rescale(cfg, out, rng, tol):
    E = load_scene(_path(cfg, "scene"))
    out_set = rescale(E, _fracs(cfg["x"]), Fraction(cfg["r"]))
    save_scene(out_set, os.path.join(out, "rescaled.scene"))
    return 0


COMMANDS = {"grid": cmd_grid, "project": cmd_project,
            "homology": cmd_homology, "slice": cmd_slice,
            "glue": cmd_glue, "verify": cmd_verify,
            "certify": cmd_certify, "probe": cmd_probe,
            "rescale": cmd_rescale}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="topomin",
        description="dyadic-grid surgery on polyhedral sets")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=".")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1,
                        help="reserved; runs are sequential")
    parser.add_argument("--tol", type=float, default=1e-9)
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        rng = random.Random(args.seed)
        return COMMANDS[args.command](cfg, args.out, rng, args.tol)
    except (ValueError, KeyError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
