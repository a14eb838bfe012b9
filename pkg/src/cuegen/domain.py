"""Phoneme inventory, cue codebook, and timed-utterance types.

The codebook encodes the structure of French cued speech: each consonant is
assigned one of 8 handshapes and each vowel one of 5 hand positions; lips
carry the remaining contrast. The concrete assignment table and landmark
geometry shipped in data/default_codebook.json are artifact configuration
(a deliberately simplified stand-in, not the official LfPC chart).

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import MissingCodebookEntry, PreconditionError, UnknownSymbol

CONSONANT = "consonant"
VOWEL = "vowel"
SILENCE = "silence"

#: Marker for "no cue of this kind": carried-over slots start from rest.
REST = None

N_HAND_SHAPES = 8
N_HAND_POSITIONS = 5
N_HAND_POINTS = 21
N_LIP_POINTS = 42


@dataclass(frozen=True)
class Phoneme:
    id: int
    symbol: str
    klass: str  # one of CONSONANT / VOWEL / SILENCE


class PhonemeInventory:
    """Dense-id phoneme set with exactly one silence entry."""

    def __init__(self, phonemes: list[Phoneme]):
        ids = sorted(p.id for p in phonemes)
        if ids != list(range(len(phonemes))):
            raise PreconditionError("phoneme ids must be dense 0..V-1")
        symbols = [p.symbol for p in phonemes]
        if len(set(symbols)) != len(symbols):
            raise PreconditionError("phoneme symbols must be unique")
        silences = [p for p in phonemes if p.klass == SILENCE]
        if len(silences) != 1:
            raise PreconditionError("inventory needs exactly one silence phoneme")
        self._by_id = {p.id: p for p in phonemes}
        self._by_symbol = {p.symbol: p for p in phonemes}
        self.silence = silences[0]

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self):
        return (self._by_id[i] for i in range(len(self._by_id)))

    def by_symbol(self, symbol: str) -> Phoneme:
        try:
            return self._by_symbol[symbol]
        except KeyError:
            raise UnknownSymbol(symbol) from None

    def by_id(self, pid: int) -> Phoneme:
        try:
            return self._by_id[pid]
        except KeyError:
            raise PreconditionError(f"phoneme id out of range: {pid}") from None

    def consonants(self) -> list[Phoneme]:
        return [p for p in self if p.klass == CONSONANT]

    def vowels(self) -> list[Phoneme]:
        return [p for p in self if p.klass == VOWEL]

    def labels(self) -> list[Phoneme]:
        """All phonemes that may appear in recognizer targets (no silence)."""
        return [p for p in self if p.klass != SILENCE]


class CueCodebook:
    """Handshape/position assignment plus landmark templates for cue rendering.

    shape_landmarks[s] and rest_shape are 21x2 arrays in a local hand frame;
    a hand pose is the shape template translated by a position anchor, so all
    (template + anchor) combinations must stay inside the unit square.
    """

    def __init__(self, inventory: PhonemeInventory,
                 handshape_of: dict[str, int], position_of: dict[str, int],
                 shape_landmarks: np.ndarray, rest_shape: np.ndarray,
                 position_anchors: np.ndarray, rest_anchor: np.ndarray,
                 lip_targets: dict[str, np.ndarray]):
        self.inventory = inventory
        self.handshape_of = dict(handshape_of)
        self.position_of = dict(position_of)
        self.shape_landmarks = np.asarray(shape_landmarks, dtype=np.float64)
        self.rest_shape = np.asarray(rest_shape, dtype=np.float64)
        self.position_anchors = np.asarray(position_anchors, dtype=np.float64)
        self.rest_anchor = np.asarray(rest_anchor, dtype=np.float64)
        self.lip_targets = {k: np.asarray(v, dtype=np.float64) for k, v in lip_targets.items()}
        self._validate()

    def _validate(self) -> None:
        inv = self.inventory
        for p in inv.consonants():
            s = self.handshape_of.get(p.symbol)
            if s is None or not 0 <= s < N_HAND_SHAPES:
                raise PreconditionError(f"consonant {p.symbol!r} lacks a valid handshape")
        for p in inv.vowels():
            s = self.position_of.get(p.symbol)
            if s is None or not 0 <= s < N_HAND_POSITIONS:
                raise PreconditionError(f"vowel {p.symbol!r} lacks a valid position")
        if self.shape_landmarks.shape != (N_HAND_SHAPES, N_HAND_POINTS, 2):
            raise PreconditionError("shape_landmarks must be 8 x 21 x 2")
        if self.rest_shape.shape != (N_HAND_POINTS, 2):
            raise PreconditionError("rest_shape must be 21 x 2")
        if self.position_anchors.shape != (N_HAND_POSITIONS, 2):
            raise PreconditionError("position_anchors must be 5 x 2")
        if self.rest_anchor.shape != (2,):
            raise PreconditionError("rest_anchor must be a 2-vector")
        for p in inv:
            t = self.lip_targets.get(p.symbol)
            if t is None or t.shape != (N_LIP_POINTS, 2):
                raise PreconditionError(f"phoneme {p.symbol!r} lacks a 42x2 lip template")
        for name, arr in [("shape_landmarks", self.shape_landmarks),
                          ("rest_shape", self.rest_shape),
                          ("position_anchors", self.position_anchors),
                          ("rest_anchor", self.rest_anchor)]:
            if arr.min() < 0.0 or arr.max() > 1.0:
                raise PreconditionError(f"{name} outside the unit square")
        for sym, t in self.lip_targets.items():
            if t.min() < 0.0 or t.max() > 1.0:
                raise PreconditionError(f"lip template {sym!r} outside the unit square")
        # translated hand poses must remain plottable in normalized units
        anchors = np.concatenate([self.position_anchors, self.rest_anchor[None]], axis=0)
        shapes = np.concatenate([self.shape_landmarks, self.rest_shape[None]], axis=0)
        combos = shapes[:, None] + anchors[None, :, None, :]
        if combos.min() < 0.0 or combos.max() > 1.0:
            raise PreconditionError("some shape+anchor combination leaves the unit square")

    def hand_pose(self, shape: int | None, position: int | None) -> np.ndarray:
        """Steady-state hand pose: shape template translated to its anchor."""
        template = self.rest_shape if shape is REST else self.shape_landmarks[shape]
        anchor = self.rest_anchor if position is REST else self.position_anchors[position]
        return template + anchor

    def lip_pose(self, pid: int) -> np.ndarray:
        return self.lip_targets[self.inventory.by_id(pid).symbol]


@dataclass(frozen=True)
class TimedPhonemeSeq:
    """Contiguous phoneme segmentation: onset[i+1] = onset[i] + duration[i]."""

    phonemes: tuple[int, ...]
    onsets_ms: tuple[int, ...]
    durations_ms: tuple[int, ...]

    def __post_init__(self):
        n = len(self.phonemes)
        if len(self.onsets_ms) != n or len(self.durations_ms) != n:
            raise PreconditionError("phonemes/onsets/durations must have equal length")
        for d in self.durations_ms:
            if d <= 0:
                raise PreconditionError("durations must be positive")
        for i in range(n - 1):
            if self.onsets_ms[i + 1] != self.onsets_ms[i] + self.durations_ms[i]:
                raise PreconditionError("segmentation must be contiguous")

    def __len__(self) -> int:
        return len(self.phonemes)

    @property
    def total_ms(self) -> int:
        if not self.phonemes:
            return 0
        return self.onsets_ms[-1] + self.durations_ms[-1]

    @staticmethod
    def from_durations(phonemes, durations_ms) -> "TimedPhonemeSeq":
        onsets = []
        t = 0
        for d in durations_ms:
            onsets.append(t)
            t += int(d)
        return TimedPhonemeSeq(tuple(int(p) for p in phonemes),
                               tuple(onsets), tuple(int(d) for d in durations_ms))


def encode_text(symbols: list[str], inventory: PhonemeInventory) -> list[int]:
    """Map phoneme labels to dense ids; raises UnknownSymbol on any miss."""
    return [inventory.by_symbol(s).id for s in symbols]


def decode_ids(ids: list[int], inventory: PhonemeInventory) -> list[str]:
    return [inventory.by_id(i).symbol for i in ids]


def cue_targets(seq: TimedPhonemeSeq, codebook: CueCodebook) -> list[tuple]:
    """Expand a phoneme sequence into per-phoneme (shape, position, lip) cues.

    Consonants contribute their handshape and carry the most recent position;
    vowels contribute their position and carry the most recent shape; both
    slots start from rest and silence resets them. The third element is the
    phoneme id whose lip template applies.
    """
    inv = codebook.inventory
    out = []
    shape: int | None = REST
    pos: int | None = REST
    for pid in seq.phonemes:
        p = inv.by_id(pid)
        if p.klass == SILENCE:
            shape, pos = REST, REST
            out.append((REST, REST, pid))
            continue
        if p.symbol not in codebook.lip_targets:
            raise MissingCodebookEntry(p.symbol)
        if p.klass == CONSONANT:
            if p.symbol not in codebook.handshape_of:
                raise MissingCodebookEntry(p.symbol)
            shape = codebook.handshape_of[p.symbol]
        else:
            if p.symbol not in codebook.position_of:
                raise MissingCodebookEntry(p.symbol)
            pos = codebook.position_of[p.symbol]
        out.append((shape, pos, pid))
    return out


# ---------------------------------------------------------------------------
# config file I/O
# ---------------------------------------------------------------------------

SCHEMA_VERSION = 1


def load_codebook(path: str | Path | None = None) -> CueCodebook:
    """Load inventory + codebook from JSON; defaults to the packaged table."""
    if path is None:
        with resources.files("cuegen.data").joinpath("default_codebook.json").open("rb") as f:
            doc = json.load(f)
    else:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise PreconditionError(
            f"unsupported codebook schema_version: {doc.get('schema_version')!r}")
    inv = PhonemeInventory([Phoneme(p["id"], p["symbol"], p["class"])
                            for p in doc["phonemes"]])
    return CueCodebook(
        inventory=inv,
        handshape_of={k: int(v) for k, v in doc["handshape_of"].items()},
        position_of={k: int(v) for k, v in doc["position_of"].items()},
        shape_landmarks=np.array(doc["shape_landmarks"], dtype=np.float64),
        rest_shape=np.array(doc["rest_shape"], dtype=np.float64),
        position_anchors=np.array(doc["position_anchors"], dtype=np.float64),
        rest_anchor=np.array(doc["rest_anchor"], dtype=np.float64),
        lip_targets={k: np.array(v, dtype=np.float64)
                     for k, v in doc["lip_targets"].items()},
    )


def dump_codebook(codebook: CueCodebook, path: str | Path,
                  description: str = "") -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "cue-codebook",
        "description": description,
        "phonemes": [{"id": p.id, "symbol": p.symbol, "class": p.klass}
                     for p in codebook.inventory],
        "handshape_of": codebook.handshape_of,
        "position_of": codebook.position_of,
        "shape_landmarks": codebook.shape_landmarks.tolist(),
        "rest_shape": codebook.rest_shape.tolist(),
        "position_anchors": codebook.position_anchors.tolist(),
        "rest_anchor": codebook.rest_anchor.tolist(),
        "lip_targets": {k: v.tolist() for k, v in codebook.lip_targets.items()},
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n",
                          encoding="utf-8")
