#!/usr/bin/env python3
"""Generates the built-in semantic sets and the canonical landmark fixture.

Inputs (tools/dev/data):
  face_mesh_uv.json     468 canonical UV coordinates + contour annotations
                        (from the Apache-2.0 tfjs facemesh package).
  face_mesh_edges.json  undirected tessellation edges of the 468-point mesh
                        (from the Apache-2.0 mediapipe face_mesh_connections).

Outputs:
  core/data/sets/set{0,1,2}.json
  tests/fixtures/landmarks/canonical_256.json
  core/data/mesh/canonical_unit.json

Every mesh triangle (plus triangulated eye and mouth openings) is assigned to
one anatomical atom; each set maps atoms onto its regions, and every region is
emitted as the boundary loops of its triangles.  Regions therefore partition
the face oval exactly under the even-odd pixel-center rule.

Usage: python3 tools/dev/gen_semantic_sets.py [--preview out.png]
"""
import argparse
import collections
import json
import pathlib

import numpy as np

ROOT = pathlib.Path(__file__).resolve().parents[2]
DATA = pathlib.Path(__file__).resolve().parent / "data"

mesh = json.loads((DATA / "face_mesh_uv.json").read_text())
UV = np.array(mesh["uv"], dtype=float)
ANN = mesh["annotations"]
EDGES = [tuple(e) for e in json.loads((DATA / "face_mesh_edges.json").read_text())["tesselation"]]

RIGHT_EYE = [33, 7, 163, 144, 145, 153, 154, 155, 133, 173, 157, 158, 159, 160, 161, 246]
LEFT_EYE = [263, 249, 390, 373, 374, 380, 381, 382, 362, 398, 384, 385, 386, 387, 388, 466]
MOUTH_RIGHT = [13, 82, 81, 80, 191, 78, 95, 88, 178, 87, 14]
MOUTH_LEFT = [14, 317, 402, 318, 324, 308, 415, 310, 311, 312, 13]
# K4 cliques in the edge graph whose outer triangle is not a mesh face.
NOT_FACES = {(49, 64, 129), (279, 294, 358)}


def signed_area(poly):
    p = UV[poly]
    x, y = p[:, 0], p[:, 1]
    return 0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def point_in_poly(pt, poly):
    p = UV[poly]
    inside = False
    for i in range(len(p)):
        a, b = p[i], p[i - 1]
        if (a[1] > pt[1]) != (b[1] > pt[1]):
            x = a[0] + (pt[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if pt[0] < x:
                inside = not inside
    return inside


def ear_clip(poly):
    poly = list(poly)
    if signed_area(poly) < 0:
        poly.reverse()
    tris = []
    while len(poly) > 3:
        for i in range(len(poly)):
            a, b, c = poly[i - 1], poly[i], poly[(i + 1) % len(poly)]
            pa, pb, pc = UV[a], UV[b], UV[c]
            cross = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0])
            if cross < 0:
                continue
            if any(point_in_poly(UV[q], [a, b, c]) for q in poly if q not in (a, b, c)):
                continue
            tris.append(tuple(sorted((a, b, c))))
            poly.pop(i)
            break
        else:
            raise RuntimeError("ear clipping failed")
    tris.append(tuple(sorted(poly)))
    return tris


def mesh_triangles():
    adj = collections.defaultdict(set)
    for a, b in EDGES:
        adj[a].add(b)
        adj[b].add(a)
    tris = set()
    for a, b in EDGES:
        for c in adj[a] & adj[b]:
            tris.add(tuple(sorted((a, b, c))))
    tris -= NOT_FACES
    for hole in (RIGHT_EYE, LEFT_EYE, MOUTH_RIGHT, MOUTH_LEFT):
        tris.update(ear_clip(hole))
    return sorted(tris)


def poly_from(upper, lower):
    return list(upper) + list(reversed(lower))


MID = 0.5
BROW_R = poly_from(ANN["rightEyebrowUpper"], ANN["rightEyebrowLower"])
BROW_L = poly_from(ANN["leftEyebrowUpper"], ANN["leftEyebrowLower"])
EYE_R = poly_from(ANN["rightEyeLower1"], ANN["rightEyeUpper1"])
EYE_L = poly_from(ANN["leftEyeLower1"], ANN["leftEyeUpper1"])
LIPS = [61, 146, 91, 181, 84, 17, 314, 405, 321, 375, 291, 409, 270, 269, 267, 0, 37, 39, 40, 185]
NOSE_WING = abs(UV[327][0] - UV[98][0]) / 2
NOSE_BOTTOM = UV[2][1]
MOUTH_LINE = (UV[13][1] + UV[14][1]) / 2
BROW_TOP = min(UV[BROW_R][:, 1].min(), UV[BROW_L][:, 1].min())
EYE_BOTTOM = UV[ANN["rightEyeLower3"]][:, 1].max()
EYE_OUTER = abs(UV[ANN["rightEyeLower3"][0]][0] - MID)
LIP_BOTTOM = UV[17][1]


def atom_of(c):
    u, v = c
    du = u - MID
    side = "R" if du < 0 else "L"
    a = abs(du)
    if point_in_poly(c, BROW_R) or point_in_poly(c, BROW_L):
        return "brow", side
    if point_in_poly(c, EYE_R) or point_in_poly(c, EYE_L):
        return "eye", side
    if point_in_poly(c, LIPS):
        return ("upper_lip" if v < MOUTH_LINE else "lower_lip"), side
    if v < BROW_TOP + 0.01:
        if a < 0.12:
            return "forehead", "C"
        return "forehead", side
    if v < EYE_BOTTOM + 0.005 and a > EYE_OUTER + 0.005:
        return "temple", side
    if v < 0.335 and a < 0.075:
        return "between_eyes", "C"
    if v < UV[ANN["rightEyeUpper0"]][:, 1].mean() and a >= 0.075:
        return "upper_eye", side
    if v < 0.47 and a < 0.05:
        return "nose_bridge", "C"
    if v <= NOSE_BOTTOM + 0.005 and a < 0.035:
        return "nose_tip", "C"
    if v <= NOSE_BOTTOM + 0.01 and a <= NOSE_WING + 0.01:
        return "nose_side", side
    if v < EYE_BOTTOM + 0.005:
        return "lower_eye", side
    if v < LIP_BOTTOM - 0.03 and a < 0.06:
        return "above_lip", "C"
    if v < LIP_BOTTOM + 0.02 and a < 0.17 and v > NOSE_BOTTOM - 0.02:
        return "nasolabial", side
    if v < 0.66:
        return "cheek", side
    if v < 0.84 and a < 0.10:
        return "below_lip", "C"
    if a < 0.13:
        return "chin", "C"
    return "jaw", side


SET2 = [
    ("Central area of the forehead", [("forehead", "C")]),
    ("Right area of the forehead", [("forehead", "R")]),
    ("Left area of the forehead", [("forehead", "L")]),
    ("Right temple", [("temple", "R")]),
    ("Left temple", [("temple", "L")]),
    ("Right eyebrow", [("brow", "R")]),
    ("Left eyebrow", [("brow", "L")]),
    ("Upper area around the right eye", [("upper_eye", "R")]),
    ("Upper area around the left eye", [("upper_eye", "L")]),
    ("Right eye", [("eye", "R")]),
    ("Left eye", [("eye", "L")]),
    ("Lower area around the right eye", [("lower_eye", "R")]),
    ("Lower area around the left eye", [("lower_eye", "L")]),
    ("Area between the eyes", [("between_eyes", "C")]),
    ("Nose bridge", [("nose_bridge", "C")]),
    ("Nose tip", [("nose_tip", "C")]),
    ("Right side of the nose", [("nose_side", "R")]),
    ("Left side of the nose", [("nose_side", "L")]),
    ("Right Cheek", [("cheek", "R")]),
    ("Left Cheek", [("cheek", "L")]),
    ("Right nasolabial area", [("nasolabial", "R")]),
    ("Left nasolabial area", [("nasolabial", "L")]),
    ("Area above the upper lip", [("above_lip", "C")]),
    ("Upper area of the mouth", [("upper_lip", "R"), ("upper_lip", "L")]),
    ("Lower area of the mouth", [("lower_lip", "R"), ("lower_lip", "L")]),
    ("Area below the lower lip", [("below_lip", "C")]),
    ("Chin", [("chin", "C")]),
    ("Right jaw", [("jaw", "R")]),
    ("Left jaw", [("jaw", "L")]),
]

SET1 = [
    ("Forehead", [("forehead", "C"), ("forehead", "R"), ("forehead", "L"), ("between_eyes", "C")]),
    ("Right eyebrow", [("brow", "R")]),
    ("Left eyebrow", [("brow", "L")]),
    ("Right eye", [("eye", "R"), ("upper_eye", "R"), ("lower_eye", "R")]),
    ("Left eye", [("eye", "L"), ("upper_eye", "L"), ("lower_eye", "L")]),
    ("Nose", [("nose_bridge", "C"), ("nose_tip", "C"), ("nose_side", "R"), ("nose_side", "L")]),
    ("Right cheek", [("cheek", "R"), ("temple", "R"), ("nasolabial", "R")]),
    ("Left cheek", [("cheek", "L"), ("temple", "L"), ("nasolabial", "L")]),
    ("Right side of the lips", [("upper_lip", "R"), ("lower_lip", "R")]),
    ("Left side of the lips", [("upper_lip", "L"), ("lower_lip", "L")]),
    ("Area around the mouth", [("above_lip", "C"), ("below_lip", "C")]),
    ("Chin and jaw", [("chin", "C"), ("jaw", "R"), ("jaw", "L")]),
]

SET0 = [
    ("Forehead", [("forehead", "C"), ("forehead", "R"), ("forehead", "L")]),
    ("Temples", [("temple", "R"), ("temple", "L")]),
    ("Eyebrows", [("brow", "R"), ("brow", "L")]),
    ("Eyes", [("eye", "R"), ("eye", "L")]),
    ("Area around the eyes", [("upper_eye", "R"), ("upper_eye", "L"), ("lower_eye", "R"), ("lower_eye", "L")]),
    ("Area between the eyes", [("between_eyes", "C")]),
    ("Nose", [("nose_bridge", "C"), ("nose_tip", "C"), ("nose_side", "R"), ("nose_side", "L")]),
    ("Cheeks", [("cheek", "R"), ("cheek", "L")]),
    ("Nasolabial area", [("nasolabial", "R"), ("nasolabial", "L")]),
    ("Mouth", [("upper_lip", "R"), ("upper_lip", "L"), ("lower_lip", "R"), ("lower_lip", "L")]),
    ("Area around the mouth", [("above_lip", "C"), ("below_lip", "C")]),
    ("Chin and jaw", [("chin", "C"), ("jaw", "R"), ("jaw", "L")]),
]


def boundary_loops(tris):
    """Boundary loops of a triangle set, or None when they are not simple."""
    count = collections.Counter()
    for t in tris:
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2])):
            count[(a, b)] += 1
    boundary = [e for e, n in count.items() if n == 1]
    nbr = collections.defaultdict(list)
    for a, b in boundary:
        nbr[a].append(b)
        nbr[b].append(a)
    if any(len(v) != 2 for v in nbr.values()):
        return None
    seen, loops = set(), []
    for start in sorted(nbr):
        if start in seen:
            continue
        loop, prev, cur = [start], None, start
        seen.add(start)
        while True:
            nxt = [n for n in nbr[cur] if n != prev]
            nxt = nxt[0] if prev is not None else min(nbr[cur])
            if nxt == start:
                break
            loop.append(nxt)
            seen.add(nxt)
            prev, cur = cur, nxt
        loops.append(loop)
    # Nested loops (holes) cannot be expressed as a union of polygons.
    for i, li in enumerate(loops):
        for j, lj in enumerate(loops):
            if i != j and point_in_poly(UV[lj[0]], li):
                return None
    return loops


def build_set(set_id, spec, tri_atoms):
    regions = [{"name": "Background", "polygons": [], "background": True}]
    used = set()
    for name, atoms in spec:
        tris = [t for t, a in tri_atoms.items() if a in atoms]
        if not tris:
            raise RuntimeError(f"{set_id}: region {name} is empty")
        used.update(atoms)
        loops = boundary_loops(tris)
        polys = loops if loops is not None else [list(t) for t in sorted(tris)]
        regions.append({"name": name, "polygons": polys})
    all_atoms = set(tri_atoms.values())
    if used != all_atoms:
        raise RuntimeError(f"{set_id}: unassigned atoms {all_atoms - used}")
    return {"set_id": set_id, "mesh_size": len(UV), "regions": regions}


def canonical_landmarks(size=256, margin=16):
    pts = []
    span = size - 2 * margin
    lo, hi = UV.min(axis=0), UV.max(axis=0)
    scale = span / (hi - lo).max()
    offset = (size - (hi - lo) * scale) / 2
    for u, v in UV:
        pts.append([round(float((u - lo[0]) * scale + offset[0]), 3),
                    round(float((v - lo[1]) * scale + offset[1]), 3)])
    return {"image_id": "canonical_256", "width": size, "height": size,
            "mesh_size": len(pts), "points": pts}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--preview", type=pathlib.Path)
    args = ap.parse_args()

    tris = mesh_triangles()
    tri_atoms = {t: atom_of(UV[list(t)].mean(axis=0)) for t in tris}

    sets = {"set0": SET0, "set1": SET1, "set2": SET2}
    out_dir = ROOT / "core" / "data" / "sets"
    out_dir.mkdir(parents=True, exist_ok=True)
    for set_id, spec in sets.items():
        doc = build_set(set_id, spec, tri_atoms)
        (out_dir / f"{set_id}.json").write_text(json.dumps(doc, separators=(",", ":")) + "\n")
        print(set_id, len(doc["regions"]), "regions")

    fx = ROOT / "tests" / "fixtures" / "landmarks"
    fx.mkdir(parents=True, exist_ok=True)
    (fx / "canonical_256.json").write_text(json.dumps(canonical_landmarks()) + "\n")

    # Unit-square copy embedded in the library for synthetic datasets.
    unit = canonical_landmarks()
    unit_pts = [[round(x / 256.0, 6), round(y / 256.0, 6)] for x, y in unit["points"]]
    mesh_dir = ROOT / "core" / "data" / "mesh"
    mesh_dir.mkdir(parents=True, exist_ok=True)
    (mesh_dir / "canonical_unit.json").write_text(
        json.dumps({"mesh_size": len(unit_pts), "points": unit_pts}, separators=(",", ":")) + "\n")

    if args.preview:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        from matplotlib.patches import Polygon
        names = sorted(set(tri_atoms.values()))
        cmap = plt.get_cmap("tab20", len(names))
        fig, ax = plt.subplots(figsize=(8, 8))
        for t, a in tri_atoms.items():
            ax.add_patch(Polygon(UV[list(t)], color=cmap(names.index(a)), lw=0))
        for n in names:
            pts = np.array([UV[list(t)].mean(axis=0) for t, a in tri_atoms.items() if a == n])
            c = pts.mean(axis=0)
            ax.text(c[0], c[1], f"{n[0]}{n[1]}", fontsize=6, ha="center")
        ax.set_xlim(0, 1)
        ax.set_ylim(1, 0)
        fig.savefig(args.preview, dpi=90)


if __name__ == "__main__":
    main()
