#!/usr/bin/env python3
"""Regenerate src/cuegen/data/default_codebook.json.

The table is artifact configuration: a simplified, self-consistent cueing
chart over 25 phonemes (14 consonants, 10 vowels, 1 silence). It follows the
structure of French cued speech (8 handshapes for consonants, 5 hand
positions for vowels) but is NOT the official LfPC assignment.

Geometry is built from low-dimensional deformation bases on purpose: hand
shapes are finger-group curls of one base hand and lip templates are a
4-basis deformation of one neutral mouth, so PCA on rendered trajectories
concentrates variance in a handful of components.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from cuegen.domain import (  # noqa: E402
    CueCodebook, Phoneme, PhonemeInventory, dump_codebook,
)

# id order is the shipped convention; a=0 keeps vowel/consonant ids interleaved
PHONEMES = [
    ("a", "vowel"), ("b", "consonant"), ("d", "consonant"), ("p", "consonant"),
    ("e", "vowel"), ("i", "vowel"), ("k", "consonant"), ("t", "consonant"),
    ("g", "consonant"), ("o", "vowel"), ("m", "consonant"), ("n", "consonant"),
    ("u", "vowel"), ("l", "consonant"), ("r", "consonant"), ("y", "vowel"),
    ("s", "consonant"), ("z", "consonant"), ("an", "vowel"), ("f", "consonant"),
    ("v", "consonant"), ("on", "vowel"), ("eu", "vowel"), ("ou", "vowel"),
    ("sil", "silence"),
]

CONSONANT_ORDER = ["b", "d", "p", "k", "t", "g", "m", "n", "l", "r", "s", "z", "f", "v"]
VOWEL_ORDER = ["a", "e", "i", "o", "u", "y", "an", "on", "eu", "ou"]

# round-robin over the 8 shapes / 5 positions in inventory order
HANDSHAPE_OF = {c: i % 8 for i, c in enumerate(CONSONANT_ORDER)}
POSITION_OF = {v: i % 5 for i, v in enumerate(VOWEL_ORDER)}

POSITION_ANCHORS = [  # wrist translation targets, normalized screen units
    (0.62, 0.34),  # side
    (0.50, 0.26),  # cheekbone
    (0.42, 0.46),  # chin
    (0.52, 0.38),  # mouth corner
    (0.38, 0.60),  # throat
]
REST_ANCHOR = (0.68, 0.62)


def build_hand_shapes() -> tuple[np.ndarray, np.ndarray]:
    """8 shape templates + rest template, 21 points in a 0.24 x 0.30 local box.

    Point order: wrist, then 4 joints per finger (thumb, index, middle, ring,
    pinky). Shapes curl the (index), (middle), (ring+pinky) groups; the thumb
    never moves, and rest is the half-curl of every group.
    """
    wrist = np.array([0.115, 0.285])
    thumb = np.array([[0.050, 0.245], [0.035, 0.210], [0.020, 0.175], [0.008, 0.145]])

    knuckles = {
        "index": np.array([0.075, 0.165]),
        "middle": np.array([0.115, 0.160]),
        "ring": np.array([0.155, 0.165]),
        "pinky": np.array([0.190, 0.175]),
    }
    extended_offsets = {
        "index": np.array([[-0.003, -0.050], [-0.005, -0.090], [-0.007, -0.125]]),
        "middle": np.array([[-0.001, -0.055], [-0.002, -0.100], [-0.003, -0.140]]),
        "ring": np.array([[0.001, -0.050], [0.002, -0.090], [0.003, -0.123]]),
        "pinky": np.array([[0.003, -0.040], [0.006, -0.072], [0.008, -0.100]]),
    }
    curled_offsets = np.array([[0.006, 0.032], [0.004, 0.062], [0.000, 0.078]])

    def finger(name: str, curl: float) -> np.ndarray:
        k = knuckles[name]
        ext = k + extended_offsets[name]
        cur = k + curled_offsets
        joints = (1.0 - curl) * ext + curl * cur
        return np.vstack([k, joints])

    def hand(curls: tuple[float, float, float]) -> np.ndarray:
        ci, cm, cr = curls
        return np.vstack([
            wrist, thumb,
            finger("index", ci), finger("middle", cm),
            finger("ring", cr), finger("pinky", cr),
        ])

    shapes = np.stack([hand(((s >> 0) & 1, (s >> 1) & 1, (s >> 2) & 1))
                       for s in range(8)])
    rest = hand((0.5, 0.5, 0.5))
    return shapes, rest


# lip deformation coefficients per phoneme: (open, spread, round, protrude)
LIP_COEFFS = {
    "a": (1.00, 0.15, 0.00, 0.05),
    "e": (0.55, 0.45, 0.00, 0.00),
    "i": (0.22, 1.00, 0.00, 0.00),
    "o": (0.60, -0.20, 0.85, 0.30),
    "u": (0.28, -0.45, 1.00, 0.45),
    "y": (0.45, -0.25, 0.70, 0.70),
    "an": (0.85, 0.00, 0.30, 0.10),
    "on": (0.50, -0.35, 0.90, 0.25),
    "eu": (0.50, 0.10, 0.35, 0.10),
    "ou": (0.05, -0.20, 0.60, 0.90),
    "p": (-0.35, 0.00, 0.00, 0.00),
    "b": (-0.35, 0.10, 0.00, 0.10),
    "m": (-0.30, 0.20, 0.00, 0.05),
    "t": (0.25, 0.35, 0.00, 0.00),
    "d": (0.25, 0.20, 0.00, 0.05),
    "k": (0.40, 0.10, 0.00, 0.00),
    "g": (0.42, 0.00, 0.05, 0.05),
    "n": (0.28, 0.25, 0.00, 0.00),
    "l": (0.35, 0.15, 0.00, 0.20),
    "r": (0.30, -0.25, 0.30, 0.00),
    "s": (0.15, 0.50, 0.00, 0.00),
    "z": (0.12, 0.55, 0.00, 0.10),
    "f": (-0.10, 0.30, 0.00, 0.15),
    "v": (-0.08, 0.20, 0.00, 0.20),
    "sil": (0.00, 0.00, 0.00, 0.00),
}


def build_lips() -> dict[str, np.ndarray]:
    """Per-phoneme 42-point lip templates from one neutral mouth + 4 bases."""
    center = np.array([0.31, 0.38])
    n_outer, n_inner = 22, 20
    th_o = np.linspace(0.0, 2 * np.pi, n_outer, endpoint=False)
    th_i = np.linspace(0.0, 2 * np.pi, n_inner, endpoint=False)

    def ring(theta, rx, ry):
        return np.stack([rx * np.cos(theta), ry * np.sin(theta)], axis=1)

    neutral = center + np.vstack([ring(th_o, 0.095, 0.040), ring(th_i, 0.060, 0.016)])
    theta = np.concatenate([th_o, th_i])
    inner = np.concatenate([np.zeros(n_outer), np.ones(n_inner)])
    sy = np.sin(theta)
    cx = np.cos(theta)

    b_open = np.stack([np.zeros_like(sy),
                       sy * (0.027 + 0.018 * inner) * np.abs(sy)], axis=1)
    b_spread = np.stack([cx * 0.033 * np.abs(cx),
                         -sy * 0.009 * np.abs(sy)], axis=1)
    b_round = np.stack([-cx * 0.036 * np.abs(cx),
                        sy * 0.018 * np.abs(sy)], axis=1)
    b_pro = 0.22 * (neutral - center)

    bases = np.stack([b_open, b_spread, b_round, b_pro])  # (4, 42, 2)
    out = {}
    for sym, coeff in LIP_COEFFS.items():
        out[sym] = neutral + np.tensordot(np.array(coeff), bases, axes=1)
    return out


def main() -> None:
    inv = PhonemeInventory([Phoneme(i, s, k) for i, (s, k) in enumerate(PHONEMES)])
    shapes, rest = build_hand_shapes()
    lips = build_lips()
    cb = CueCodebook(
        inventory=inv,
        handshape_of=HANDSHAPE_OF,
        position_of=POSITION_OF,
        shape_landmarks=np.round(shapes, 6),
        rest_shape=np.round(rest, 6),
        position_anchors=np.round(np.array(POSITION_ANCHORS, dtype=np.float64), 6),
        rest_anchor=np.round(np.array(REST_ANCHOR, dtype=np.float64), 6),
        lip_targets={k: np.round(v, 6) for k, v in lips.items()},
    )
    out = Path(__file__).resolve().parents[1] / "src" / "cuegen" / "data" / "default_codebook.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    dump_codebook(cb, out, description=(
        "Default cueing chart v1. Artifact-defined stand-in: 8 handshapes for "
        "14 consonants, 5 positions for 10 vowels, per-phoneme lip templates "
        "from a 4-basis mouth model. Deliberately NOT the official LfPC chart. "
        "Regenerate with tools/build_default_codebook.py."))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
