#!/usr/bin/env python3
"""Regenerates the corpus: complexes, gluing specs, theory configs, targets, manifest.

Usage: python3 corpus/generate.py [path-to-bvbfv-binary]

Top simplices are written in a coherently oriented vertex order. Targets are exported
from the binary's builtins, so build it first (cargo build).
"""

import itertools
import json
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent


def parity(seq):
    s = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


def induced(top, i):
    """Orientation sign, relative to sorted order, that the ordered top induces on the
    face obtained by deleting position i."""
    face = top[:i] + top[i + 1:]
    return (-1) ** i * parity(face)


def orient(tops):
    """Reorders vertices so that faces shared by two tops receive opposite orientations."""
    tops = [list(t) for t in tops]
    faces = {}
    for ti, t in enumerate(tops):
        for i in range(len(t)):
            faces.setdefault(tuple(sorted(t[:i] + t[i + 1:])), []).append(ti)
    fixed = [False] * len(tops)
    for start in range(len(tops)):
        if fixed[start]:
            continue
        fixed[start] = True
        stack = [start]
        while stack:
            ti = stack.pop()
            t = tops[ti]
            for i in range(len(t)):
                key = tuple(sorted(t[:i] + t[i + 1:]))
                for other in faces[key]:
                    if other == ti:
                        continue
                    u = tops[other]
                    j = next(k for k in range(len(u)) if u[k] not in key)
                    want = -induced(t, i)
                    if fixed[other]:
                        if induced(u, j) != want:
                            raise ValueError(f"non-orientable around {key}")
                        continue
                    if induced(u, j) != want:
                        u[0], u[1] = u[1], u[0]
                    fixed[other] = True
                    stack.append(other)
    return tops


def counts(tops):
    n = len(tops[0]) - 1
    out = []
    for k in range(n + 1):
        faces = set()
        for t in tops:
            faces.update(itertools.combinations(sorted(t), k + 1))
        out.append(len(faces))
    return out


def is_closed(tops):
    n = len(tops[0]) - 1
    if n == 0:
        return True
    seen = {}
    for t in tops:
        for f in itertools.combinations(sorted(t), n):
            seen[f] = seen.get(f, 0) + 1
    return all(c == 2 for c in seen.values())


def path(edges):
    return [[i, i + 1] for i in range(edges)]


def torus_grid(a, b):
    v = lambda i, j: (i % a) * b + (j % b)
    tops = []
    for i in range(a):
        for j in range(b):
            tops.append([v(i, j), v(i + 1, j), v(i + 1, j + 1)])
            tops.append([v(i, j), v(i + 1, j + 1), v(i, j + 1)])
    return tops


def cylinder():
    tops = []
    for lev in range(2):
        for i in range(3):
            a, b = lev * 3 + i, lev * 3 + (i + 1) % 3
            c, d = (lev + 1) * 3 + i, (lev + 1) * 3 + (i + 1) % 3
            tops += [[a, b, d], [a, d, c]]
    return tops


def solid_torus(offset, core):
    """Triangle × circle with a core vertex per level; boundary vertex (t, i) is
    offset + 3t + i on a 3×3 torus grid, core vertices core..core+2."""
    b = lambda t, i: offset + 3 * (t % 3) + (i % 3)
    o = lambda i: core + i % 3
    tops = []
    for t in range(3):
        for i in range(3):
            tops.append([o(i), b(t, i), b(t + 1, i), b(t + 1, i + 1)])
            tops.append([o(i), b(t, i), b(t, i + 1), b(t + 1, i + 1)])
            tops.append([o(i), o(i + 1), b(t, i + 1), b(t + 1, i + 1)])
    return tops


# name -> (top simplices, Betti numbers known from the topology of the space)
COMPLEXES = {
    "point": ([[0]], [1]),
    "interval": (path(3), [1, 0]),
    "circle": ([[0, 1], [1, 2], [2, 0]], [1, 1]),
    "triangle": ([[0, 1, 2]], [1, 0, 0]),
    "disk": ([[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]], [1, 0, 0]),
    "cylinder": (cylinder(), [1, 1, 0]),
    "torus": (torus_grid(3, 3), [1, 2, 1]),
    "tetrahedron": ([[0, 1, 2, 3]], [1, 0, 0, 0]),
    "solid_torus": (solid_torus(0, 9), [1, 1, 0, 0]),
    "solid_torus_b": (solid_torus(12, 21), [1, 1, 0, 0]),
}


def complex_file(tops):
    tops = orient(tops)
    verts = sorted({v for t in tops for v in t})
    return {"dimension": len(tops[0]) - 1, "vertices": verts, "top_simplices": tops}


def b2(t, i):
    return 12 + 3 * (t % 3) + (i % 3)


GLUINGS = {
    # meridian of the first solid torus onto the longitude of the second
    "s3": ("solid_torus", "solid_torus_b", [[3 * t + i, b2(i, t)] for t in range(3) for i in range(3)]),
    # meridian onto meridian
    "s2xs1": ("solid_torus", "solid_torus_b", [[3 * t + i, b2(t - i, -i)] for t in range(3) for i in range(3)]),
    "cylinders": ("cylinder", "cylinder", [[6, 0], [7, 1], [8, 2]]),
    "intervals": ("interval", "interval", [[3, 0]]),
    "cap": ("triangle", "cylinder", [[0, 0], [1, 2], [2, 1]]),
}

THEORIES = {
    "cs": {"kind": "abelian_cs"},
    "bf": {"kind": "abelian_bf"},
    "scalar": {"kind": "scalar", "mass": "0"},
    "scalar_massive": {"kind": "scalar", "mass": "1"},
    "ed": {"kind": "electrodynamics"},
}

TARGETS = ["cs_so3", "bf_gl2_n4", "psm_kk_so3", "psm_non_poisson", "cs_cubic_plus_so3", "cs_cubic_minus_so3", "example5_so3"]


def dims(pairs):
    return {str(g): d for g, d in pairs}


RUNS = [
    {"args": ["moduli", "solid_torus", "--theory", "cs"], "exit": 0,
     "dims": {"moduli": dims([(1, 1), (0, 1), (-1, 0), (-2, 0)]),
              "boundary_moduli": dims([(1, 1), (0, 2), (-1, 1)]),
              "vacua": dims([(1, 0), (0, 0), (-1, 0), (-2, 0)])}},
    {"args": ["moduli", "circle", "--theory", "scalar"], "exit": 0, "dims": {"vacua": dims([(0, 1), (-1, 1)])}},
    {"args": ["moduli", "interval", "--theory", "scalar"], "exit": 0, "dims": {"vacua": dims([(0, 0), (-1, 0)])}},
    {"args": ["moduli", "circle", "--theory", "scalar_massive"], "exit": 0, "dims": {"vacua": dims([(0, 0), (-1, 0)])}},
    {"args": ["moduli", "torus", "--theory", "bf"], "exit": 0,
     "dims": {"moduli": dims([(1, 1), (0, 3), (-1, 3), (-2, 1)])}},
    {"args": ["moduli", "torus", "--theory", "ed"], "exit": 0, "dims": {}},
    {"args": ["moduli", "cylinder", "--theory", "bf"], "exit": 0, "dims": {}},
    {"args": ["moduli", "disk", "--theory", "bf"], "exit": 0, "dims": {}},
    {"args": ["cme", "interval", "--theory", "bf"], "exit": 0, "dims": {}},
    {"args": ["cme", "cylinder", "--theory", "bf"], "exit": 0, "dims": {}},
    {"args": ["cme", "disk", "--theory", "bf"], "exit": 0, "dims": {}},
    {"args": ["glue", "s3", "--theory", "cs"], "exit": 0,
     "dims": {"glued_moduli": dims([(1, 1), (0, 0), (-1, 0), (-2, 1)])}},
    {"args": ["glue", "s2xs1", "--theory", "cs"], "exit": 0,
     "dims": {"glued_moduli": dims([(1, 1), (0, 1), (-1, 1), (-2, 1)])}},
    {"args": ["glue", "cylinders", "--theory", "bf"], "exit": 0, "dims": {}},
    {"args": ["glue", "cap", "--theory", "bf"], "exit": 0, "dims": {}},
    # Cotangent model: interface antifields make restriction ill-defined on classes and
    # break the short exact interface sequence, so this run reports verdict failures.
    {"args": ["glue", "intervals", "--theory", "scalar"], "exit": 2,
     "dims": {"glued_moduli": dims([(0, 2), (-1, 2)]), "intrinsic_moduli": dims([(0, 2), (-1, 2)])}},
    {"args": ["slice-gh0", "solid_torus", "--theory", "cs"], "exit": 0, "dims": {}},
    {"args": ["complex", "check", "invalid/orientation_broken.json"], "exit": 1, "error": "IncoherentOrientation"},
    {"args": ["moduli", "circle", "--theory", "scalar", "--mass", "-1"], "exit": 1},
    {"args": ["moduli", "circle", "--theory", "no_such_theory"], "exit": 1},
] + [
    {"args": ["target", "check", name], "exit": 2 if name == "psm_non_poisson" else 0, "dims": {}}
    for name in TARGETS
]


def write(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n")


def main():
    binary = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT.parent / "target" / "debug" / "bvbfv"
    manifest = {"complexes": {}, "runs": []}
    for name, (tops, betti) in COMPLEXES.items():
        write(ROOT / "complexes" / f"{name}.json", complex_file(tops))
        manifest["complexes"][name] = {
            "file": f"complexes/{name}.json",
            "counts": counts(tops),
            "betti": betti,
            "closed": is_closed(tops),
        }
        manifest["runs"].append({"args": ["complex", "check", f"complexes/{name}.json"], "exit": 0, "dims": {}})
    # Two triangles sharing edge {0,1} listed with the same orientation on it.
    write(ROOT / "invalid" / "orientation_broken.json",
          {"dimension": 2, "vertices": [0, 1, 2, 3], "top_simplices": [[0, 1, 2], [0, 1, 3]]})
    for name, (left, right, pairs) in GLUINGS.items():
        write(ROOT / "gluing" / f"{name}.json",
              {"left": f"../complexes/{left}.json", "right": f"../complexes/{right}.json", "interface_map": pairs})
    for name, cfg in THEORIES.items():
        write(ROOT / "theories" / f"{name}.json", cfg)
    for name in TARGETS:
        out = subprocess.run([str(binary), "target", "export", name], check=True, capture_output=True, text=True).stdout
        (ROOT / "targets").mkdir(exist_ok=True)
        (ROOT / "targets" / f"{name}.json").write_text(out)
    manifest["runs"] += RUNS
    write(ROOT / "manifest.json", manifest)


if __name__ == "__main__":
    main()
