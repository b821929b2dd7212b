#!/usr/bin/env python3
"""Smoke test for the `_pquintic` extension module.

Builds the module with cargo if needed, loads it, and exercises the main
entry points. Run from anywhere:

    python3 python/smoke_test.py
"""

import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "lib_pquintic.so",
        ROOT / "target" / "debug" / "lib_pquintic.so",
    ]
    built = next((c for c in candidates if c.exists()), None)
    if built is None:
        subprocess.run(
            ["cargo", "build", "-p", "pquintic-py", "--features", "extension-module"],
            cwd=ROOT,
            check=True,
        )
        built = candidates[1]
    stage = Path(tempfile.mkdtemp(prefix="pquintic-py-"))
    shutil.copy(built, stage / "_pquintic.so")
    sys.path.insert(0, str(stage))
    import _pquintic

    return _pquintic


def main():
    m = load_module()

    g = m.Group("Q@5")
    assert g.order() == 625, g.order()
    assert g.prime() == 5
    assert g.generators() == ["z", "y", "x", "u"], g.generators()
    assert g.mu() == 125, g.mu()
    print("ok - Group: order, prime, generators, mu")

    e5 = m.Group("named:E5@5")
    assert e5.order() == 3125
    assert e5.element_order([0, 1, 0, 0, 0]) == 25
    assert e5.mu() == 50, e5.mu()
    print("ok - exceptional group has degree below its quotient bound")

    label, canonical, trail = m.canonicalize("params:Q@5:(2,3,1,4)")
    assert label == "P9(3)", label
    assert canonical == "Q@5:(1,0,1,3)", canonical
    assert trail == ["C(2)", "A(3)", "D"], trail
    print("ok - canonicalize")

    assert m.are_isomorphic("named:E5@5", "params:Q@5:(1,0,0,1)")
    assert not m.are_isomorphic("params:Q@5:(1,0,0,1)", "params:Q@5:(1,0,0,2)")
    print("ok - are_isomorphic")

    fp = json.loads(e5.fingerprint_json())
    assert fp["order"] == 3125
    assert fp["psi"] is not None
    print("ok - fingerprint_json")

    report = json.loads(m.classify_json(7))
    assert report["totals"]["overall_count"] == 13, report["totals"]
    assert report["totals"]["overall_count"] == report["totals"]["expected"]["overall"]
    print("ok - classify_json at p = 7 (13 classes)")

    print("all smoke tests passed")


if __name__ == "__main__":
    main()
