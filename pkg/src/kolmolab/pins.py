"""Pinned constants for the measured ``O(.)`` bounds.

A pin file is JSON of the form::

    {"version": 1, "machine_fingerprint": "...", "pins": {"main-theorem": [a, b], ...}}

Pins are written once (explicitly) and afterwards only compared against.
"""
from __future__ import annotations

import json
from pathlib import Path

from .machine import machine_fingerprint

PIN_VERSION = 1


class PinError(Exception):
    pass


def fit_line(points) -> tuple[float, float]:
    """Tightest upper line ``w <= a*g + b`` with ``a >= 0``.

    Minimizes the total slack over the points.  The optimum sits on a
    vertex, so only ``a = 0`` and slopes through pairs of points are tried;
    ties go to the smaller slope.
    """
    pts = sorted(set((float(g), float(w)) for g, w in points))
    if not pts:
        raise ValueError("no points to fit")
    slopes = {0.0}
    for i, (g1, w1) in enumerate(pts):
        for g2, w2 in pts[i + 1:]:
            if g2 != g1 and (w2 - w1) / (g2 - g1) > 0:
                slopes.add((w2 - w1) / (g2 - g1))
    best = None
    for a in sorted(slopes):
        b = max(w - a * g for g, w in pts)
        slack = sum(a * g + b - w for g, w in pts)
        if best is None or slack < best[0] - 1e-9:
            best = (slack, a, b)
    _, a, b = best
    return round(a, 9), round(b, 9)


def load_pins(path) -> dict:
    path = Path(path)
    if not path.exists():
        return {}
    data = json.loads(path.read_text())
    if data.get("version") != PIN_VERSION:
        raise PinError(f"{path}: unsupported pin file version {data.get('version')}")
    if data.get("machine_fingerprint") != machine_fingerprint():
        raise PinError(f"{path}: pins were measured on a different machine")
    return {k: tuple(v) if isinstance(v, list) else v for k, v in data["pins"].items()}


def save_pins(path, pins: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = {"version": PIN_VERSION, "machine_fingerprint": machine_fingerprint(),
            "pins": {k: list(v) if isinstance(v, tuple) else v
                     for k, v in sorted(pins.items())}}
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
