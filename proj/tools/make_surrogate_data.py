#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Writes a surrogate 315 GHz AM-AM/AM-PM table sampled from the shipped
polynomial model (-40..0 dBm, 0.5 dB steps, phase relative to -40 dBm)."""
import json
import sys
from pathlib import Path

root = Path(__file__).resolve().parent.parent
model = json.loads((root / "data/models/poly_315ghz.json").read_text())
a, b = model["params"]["a"], model["params"]["b"]
fc = model["fc_hz"]


def horner(c, x):
    acc = 0.0
    for v in reversed(c):
        acc = acc * x + v
    return acc


out = Path(sys.argv[1]) if len(sys.argv) > 1 else root / "data/measurements/surrogate_315ghz.csv"
lines = ["freq_hz,pin_dbm,pout_dbm,phase_deg"]
ref = horner(b, -40.0)
for i in range(81):
    p = -40.0 + 0.5 * i
    lines.append(f"{fc:.17g},{p:.17g},{horner(a, p):.17g},{horner(b, p) - ref:.17g}")
out.write_text("\n".join(lines) + "\n")
