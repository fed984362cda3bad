"""Regenerate the shipped scenario presets.

Each scenario gets an embedded initial point fitted with the listed seed, so
preset runs are deterministic and skip the fit. Run from the repo root:

    python3 scripts/make_presets.py [name ...]
"""

import argparse
import math
import sys
import time
from pathlib import Path

import tomli_w

from gridvte import scenario as scn
from gridvte.vqte import fit_initial_params

OUT = Path(__file__).resolve().parents[1] / "src" / "gridvte" / "presets"

B0 = 1 / math.sqrt(2)
SNAP_1D = [0.0, 0.45, 0.91, 1.5]
SNAP_MH = [0.0, 0.91, 1.8, 3.0]

# loose tolerances on purpose: tighter ones make the step controller chase
# singular values crossing the rcond cutoff and the run length explodes
EVOLUTION = {"t_total": 1.5, "rtol": 1e-3, "atol": 1e-6, "rcond": 1e-6, "max_rhs_calls": 200000}

SYSTEMS = {
    "fp": ("free particle", {"kind": "free"}, -3.5, 5.0),
    "ho": ("harmonic oscillator", {"kind": "harmonic", "coeffs": [1.0]}, -3.5, 2.0),
    "eb": ("Eckart barrier", {"kind": "eckart", "coeffs": [13.0, 1.5]}, -3.5, 5.0),
}


def one_dim(key, nq, form, depth, wrapper, seed=0, cut=0.0, width=B0, length=14.0, name=None, note="", x0=None):
    title, pot, x0_default, p0 = SYSTEMS[key]
    x0 = x0_default if x0 is None else x0
    space = {"position": "position", "momentum": "momentum", "local_diagonal": "ld"}[wrapper]
    name = name or f"{key}-{nq}q-{form}d{depth}-{space}"
    ansatz = {"form": form, "depth": depth, "wrapper": wrapper}
    if wrapper == "local_diagonal":
        ansatz["cut"] = cut
    doc = {
        "name": name,
        "description": f"{title}, {nq} qubits, {form} depth {depth}, {space} space{note}",
        "mass": 1.0,
        "grid": {"num_dims": 1, "qubits_per_dim": nq, "length": [length]},
        "potential": dict(pot),
        "wavepacket": {"x0": [x0], "p0": [p0], "width": [width]},
        "ansatz": ansatz,
        "evolution": dict(EVOLUTION),
        "initial": {"mode": "fit", "seed": seed},
        "outputs": {"snapshots": SNAP_1D},
    }
    if key == "eb":
        doc["outputs"]["density_cuts"] = [0.0, 0.1, 1.0]
    return doc


def mexican_hat(depth, wrapper, seed=0):
    space = "ld" if wrapper == "local_diagonal" else "position"
    return {
        "name": f"mh-8q-vf1d{depth}-{space}",
        "description": f"2D Mexican hat, 4 qubits per dimension, vf1 depth {depth}, {space} space",
        "mass": 1.0,
        "grid": {"num_dims": 2, "qubits_per_dim": 4, "length": [10.0, 10.0], "origin": [-5.0, -5.0]},
        "potential": {"kind": "mexican_hat", "coeffs": [0.1, 1.0]},
        "wavepacket": {"x0": [-3.0, 0.0], "p0": [0.0, 0.0], "width": [1.0, 1.0]},
        "ansatz": {"form": "vf1", "depth": depth, "wrapper": wrapper},
        "evolution": dict(EVOLUTION, t_total=3.0),
        "initial": {"mode": "fit", "seed": seed},
        "outputs": {"snapshots": SNAP_MH},
    }


def scenarios():
    out = []
    for key in ("fp", "ho", "eb"):
        out.append(one_dim(key, 6, "vf1", 5, "position"))
        out.append(one_dim(key, 6, "vf1", 2, "momentum"))
    out.append(one_dim("ho", 6, "vf2", 5, "local_diagonal", name="ho-6q-vf2d5-ld"))
    for cut, tag in ((0.0, "c0"), (0.1, "c0p1"), (1.0, "c1")):
        out.append(one_dim("eb", 6, "vf2", 5, "local_diagonal", cut=cut, name=f"eb-6q-vf2d5-ld-{tag}", note=f", cut {cut:g}"))
    out.append(
        one_dim("ho", 6, "vf1", 5, "position", seed=7, width=0.6, name="ho-6q-vf1d5-position-b06", note=", width 0.6")
    )
    for i in (1, 2, 3):
        out.append(
            # the numerics study starts the packet at the box centre
            one_dim(
                "fp", 5, "vf2", 3, "position", width=i * B0, x0=0.0, name=f"fp-5q-vf2d3-width{i}", note=f", width {i}/sqrt(2)"
            )
        )
    for nq, depth in ((6, 4), (7, 5), (8, 25)):
        out.append(one_dim("ho", nq, "vf1", depth, "momentum", name=f"ho-{nq}q-vf1d{depth}-momentum-mesh", note=", mesh study"))
    for depth in (20, 25):
        for wrapper in ("position", "local_diagonal"):
            out.append(mexican_hat(depth, wrapper))
    return out


BATCHES = [
    {
        "name": "fp-5q-width-study",
        "description": "free particle width study, B = 1, 2, 3 over sqrt(2)",
        "batch": {"kind": "width", "members": [f"fp-5q-vf2d3-width{i}" for i in (1, 2, 3)]},
    },
    {
        "name": "ho-mesh-study",
        "description": "harmonic oscillator on 6, 7 and 8 qubits, momentum space",
        "batch": {
            "kind": "mesh",
            "members": ["ho-6q-vf1d4-momentum-mesh", "ho-7q-vf1d5-momentum-mesh", "ho-8q-vf1d25-momentum-mesh"],
        },
    },
]


def embed(doc: dict) -> dict:
    sc = scn.scenario_from_dict(doc)
    ansatz, _ = sc.build_ansatz()
    init = sc.initial
    res = fit_initial_params(ansatz, sc.initial_state(), init.threshold, init.restarts, init.seed, init.max_iter)
    doc["initial"] = {
        "mode": "embedded",
        "seed": init.seed,
        "threshold": init.threshold,
        "fit_fidelity": res.fidelity,
        "theta": [float(v) for v in res.theta],
    }
    return doc


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", help="only regenerate these presets")
    args = ap.parse_args(argv)
    OUT.mkdir(parents=True, exist_ok=True)
    for doc in scenarios():
        if args.names and doc["name"] not in args.names:
            continue
        start = time.perf_counter()
        embed(doc)
        (OUT / f"{doc['name']}.toml").write_text(tomli_w.dumps(doc))
        fid = doc["initial"]["fit_fidelity"]
        print(f"{doc['name']}: fit {fid:.5f} in {time.perf_counter() - start:.1f}s", flush=True)
    for doc in BATCHES:
        if not args.names or doc["name"] in args.names:
            (OUT / f"{doc['name']}.toml").write_text(tomli_w.dumps(doc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
