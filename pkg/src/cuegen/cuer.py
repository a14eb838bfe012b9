"""Synthetic cuer: renders timed phoneme sequences to audio and landmarks.

This is the corpus oracle the whole pipeline trains and evaluates against.
Audio is additive sine synthesis from a per-phoneme partial table at the
22,050 Hz analysis rate; gestures are minimum-jerk transitions between
codebook poses with a configurable hand lead over the lips, plus optional
Gaussian landmark noise. With zero noise every output is a deterministic
function of (sequence, codebook, profile).

Timing model, for phoneme i with onset o_i and duration d_i (seconds):
  hand   blends toward its target during [o_i - lead, o_i - lead + transition]
  lips   blend toward their template during [o_i, o_i + d_i / 2]
so the hand starts exactly `hand_lead_ms` before the lips for every phoneme,
and lip targets are reached at phoneme midpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import (
    REST, CueCodebook, PhonemeInventory, TimedPhonemeSeq, cue_targets,
)
from .errors import PreconditionError, UnknownSymbol

SAMPLE_RATE = 22050
CROSSFADE_S = 0.010

# vowel (F1, F2) and consonant burst frequencies, Hz; artifact values chosen
# to keep phonemes spectrally distinct inside the 0-8 kHz analysis band
_VOWEL_FORMANTS = {
    "a": (700.0, 1220.0), "e": (420.0, 2050.0), "i": (280.0, 2250.0),
    "o": (450.0, 880.0), "u": (310.0, 780.0), "y": (280.0, 1750.0),
    "an": (650.0, 1000.0), "on": (480.0, 760.0), "eu": (400.0, 1350.0),
    "ou": (300.0, 850.0),
}
_CONSONANT_BURSTS = {
    "p": 900.0, "b": 600.0, "t": 2600.0, "d": 2200.0, "k": 1600.0,
    "g": 1300.0, "m": 250.0, "n": 330.0, "l": 520.0, "r": 1100.0,
    "s": 4200.0, "z": 3600.0, "f": 3100.0, "v": 2700.0,
}


@dataclass(frozen=True)
class CuerProfile:
    """Rendering parameters for one synthetic cuer."""

    formant_table: dict[str, tuple[tuple[float, float], ...]]
    hand_lead_ms: float = 100.0
    transition_ms: float = 60.0
    landmark_noise_std: float = 0.005
    f0_hz: float = 120.0

    def __post_init__(self):
        if not 0.0 <= self.hand_lead_ms <= 120.0:
            raise PreconditionError("hand_lead_ms must lie in [0, 120]")
        if self.transition_ms <= 0.0:
            raise PreconditionError("transition_ms must be positive")
        if self.landmark_noise_std < 0.0:
            raise PreconditionError("landmark_noise_std must be non-negative")

    def to_dict(self) -> dict:
        return {
            "hand_lead_ms": self.hand_lead_ms,
            "transition_ms": self.transition_ms,
            "landmark_noise_std": self.landmark_noise_std,
            "f0_hz": self.f0_hz,
            "formant_table": {k: [list(p) for p in v]
                              for k, v in self.formant_table.items()},
        }

    @staticmethod
    def from_dict(doc: dict) -> "CuerProfile":
        return CuerProfile(
            formant_table={k: tuple((float(f), float(a)) for f, a in v)
                           for k, v in doc["formant_table"].items()},
            hand_lead_ms=float(doc["hand_lead_ms"]),
            transition_ms=float(doc["transition_ms"]),
            landmark_noise_std=float(doc["landmark_noise_std"]),
            f0_hz=float(doc["f0_hz"]),
        )


def default_profile(inventory: PhonemeInventory, **overrides) -> CuerProfile:
    """Profile with the stock formant table for the default inventory."""
    f0 = float(overrides.pop("f0_hz", 120.0))
    table: dict[str, tuple] = {}
    for p in inventory:
        if p.klass == "silence":
            table[p.symbol] = ()
        elif p.klass == "vowel":
            if p.symbol not in _VOWEL_FORMANTS:
                raise UnknownSymbol(p.symbol)
            f1, f2 = _VOWEL_FORMANTS[p.symbol]
            table[p.symbol] = ((f0, 0.30), (f1, 0.22), (f2, 0.14))
        else:
            if p.symbol not in _CONSONANT_BURSTS:
                raise UnknownSymbol(p.symbol)
            fc = _CONSONANT_BURSTS[p.symbol]
            table[p.symbol] = ((fc, 0.18), (min(2.3 * fc, 7600.0), 0.08))
    return CuerProfile(formant_table=table, f0_hz=f0, **overrides)


@dataclass
class RawUtterance:
    """One rendered utterance: audio plus frame-synchronous landmark tracks."""

    utt_id: str
    seq: TimedPhonemeSeq
    audio: np.ndarray            # (n_samples,) float32
    hand_landmarks: np.ndarray   # (T, 21, 2) float64 in [0, 1]
    lip_landmarks: np.ndarray    # (T, 42, 2) float64 in [0, 1]


def synth_audio(seq: TimedPhonemeSeq, profile: CuerProfile,
                inventory: PhonemeInventory) -> np.ndarray:
    """Additive synthesis with raised-cosine crossfades at phoneme boundaries."""
    if len(seq) == 0:
        raise PreconditionError("cannot synthesize an empty sequence")
    n_total = int(seq.total_ms / 1000.0 * SAMPLE_RATE)
    out = np.zeros(n_total, dtype=np.float64)
    xf = int(round(CROSSFADE_S * SAMPLE_RATE))
    bounds = [int(np.floor(o / 1000.0 * SAMPLE_RATE)) for o in seq.onsets_ms]
    bounds.append(n_total)
    for i, pid in enumerate(seq.phonemes):
        partials = profile.formant_table[inventory.by_id(pid).symbol]
        b0, b1 = bounds[i], bounds[i + 1]
        # render into the next segment's head so boundary fades overlap-add to 1
        e1 = min(b1 + xf, n_total) if i + 1 < len(seq) else b1
        if e1 <= b0:
            continue
        t = (np.arange(b0, e1) - b0) / SAMPLE_RATE
        wave = np.zeros_like(t)
        for freq, amp in partials:
            wave += amp * np.sin(2.0 * np.pi * freq * t)
        env = np.ones_like(t)
        if i > 0:
            k = min(xf, e1 - b0)
            env[:k] = 0.5 * (1.0 - np.cos(np.pi * np.arange(k) / xf))
        if e1 > b1:
            k = e1 - b1
            env[-k:] *= 0.5 * (1.0 + np.cos(np.pi * np.arange(k) / xf))
        out[b0:e1] += wave * env
    return out.astype(np.float32)


def minimum_jerk(tau: np.ndarray | float):
    """Quintic ease with zero velocity/acceleration at both ends."""
    tau = np.clip(tau, 0.0, 1.0)
    return tau ** 3 * (10.0 + tau * (-15.0 + 6.0 * tau))


class _PoseTrack:
    """Piecewise minimum-jerk pose schedule over transition windows."""

    def __init__(self, initial_pose: np.ndarray):
        self.starts: list[float] = []
        self.ends: list[float] = []
        self.from_poses: list[np.ndarray] = []
        self.to_poses: list[np.ndarray] = []
        self.initial = initial_pose

    def add(self, start: float, end: float, target: np.ndarray) -> None:
        self.from_poses.append(self.pose_at(start))
        self.starts.append(start)
        self.ends.append(end)
        self.to_poses.append(target)

    def pose_at(self, t: float) -> np.ndarray:
        i = np.searchsorted(np.asarray(self.starts), t, side="right") - 1
        if i < 0:
            return self.initial
        if t >= self.ends[i]:
            return self.to_poses[i]
        tau = (t - self.starts[i]) / (self.ends[i] - self.starts[i])
        s = minimum_jerk(tau)
        return (1.0 - s) * self.from_poses[i] + s * self.to_poses[i]

    def sample(self, times) -> np.ndarray:
        return np.stack([self.pose_at(t) for t in times])


def synth_gestures(seq: TimedPhonemeSeq, codebook: CueCodebook,
                   profile: CuerProfile, frame_times,
                   rng_seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Render hand and lip landmark trajectories at the given frame times."""
    frame_times = np.asarray(frame_times, dtype=np.float64)
    if frame_times.ndim != 1 or np.any(np.diff(frame_times) < 0):
        raise PreconditionError("frame_times must be sorted ascending")
    targets = cue_targets(seq, codebook)
    lead = profile.hand_lead_ms / 1000.0
    trans = profile.transition_ms / 1000.0

    hand = _PoseTrack(codebook.hand_pose(REST, REST))
    lips = _PoseTrack(codebook.lip_pose(codebook.inventory.silence.id))
    for (shape, pos, pid), onset_ms, dur_ms in zip(
            targets, seq.onsets_ms, seq.durations_ms):
        onset = onset_ms / 1000.0
        hand.add(onset - lead, onset - lead + trans, codebook.hand_pose(shape, pos))
        lips.add(onset, onset + dur_ms / 2000.0, codebook.lip_pose(pid))

    hand_traj = hand.sample(frame_times)
    lip_traj = lips.sample(frame_times)
    if profile.landmark_noise_std > 0.0:
        rng = np.random.default_rng(rng_seed)
        hand_traj = hand_traj + rng.normal(0.0, profile.landmark_noise_std,
                                           hand_traj.shape)
        lip_traj = lip_traj + rng.normal(0.0, profile.landmark_noise_std,
                                         lip_traj.shape)
        np.clip(hand_traj, 0.0, 1.0, out=hand_traj)
        np.clip(lip_traj, 0.0, 1.0, out=lip_traj)
    return hand_traj, lip_traj


# ---------------------------------------------------------------------------
# corpus generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusSpec:
    n_utterances: int
    length_range: tuple[int, int] = (3, 8)
    duration_range_ms: tuple[int, int] = (80, 180)

    def __post_init__(self):
        lo, hi = self.length_range
        dlo, dhi = self.duration_range_ms
        if self.n_utterances < 1 or lo < 1 or lo > hi or dlo <= 0 or dlo > dhi:
            raise PreconditionError("invalid corpus spec ranges")


def sample_text(rng: np.random.Generator, length: int,
                inventory: PhonemeInventory) -> list[int]:
    """CV-dominant random phoneme text with ~20% isolated consonants."""
    consonants = [p.id for p in inventory.consonants()]
    vowels = [p.id for p in inventory.vowels()]
    ids: list[int] = []
    while len(ids) < length:
        c = consonants[rng.integers(len(consonants))]
        if length - len(ids) == 1 or rng.random() < 0.2:
            ids.append(c)
        else:
            ids.append(c)
            ids.append(vowels[rng.integers(len(vowels))])
    return ids[:length]


def render_utterance(utt_id: str, seq: TimedPhonemeSeq, codebook: CueCodebook,
                     profile: CuerProfile, gesture_seed: int) -> RawUtterance:
    from .features import MelConfig, frame_times  # local import, no cycle

    audio = synth_audio(seq, profile, codebook.inventory)
    times = frame_times(len(audio), MelConfig())
    hand, lip = synth_gestures(seq, codebook, profile, times, gesture_seed)
    return RawUtterance(utt_id=utt_id, seq=seq, audio=audio,
                        hand_landmarks=hand, lip_landmarks=lip)


def generate_corpus(spec: CorpusSpec, profile: CuerProfile,
                    codebook: CueCodebook, rng_seed: int
                    ) -> tuple[list[RawUtterance], dict]:
    """Sample and render a corpus; deterministic and order-independent.

    Each utterance draws from an RNG stream keyed by (rng_seed, index), so
    parallel rendering cannot change results. The manifest echoes the seed,
    spec, and profile alongside per-utterance text and timing.
    """
    if profile.transition_ms >= spec.duration_range_ms[0]:
        raise PreconditionError(
            "profile.transition_ms must stay below the shortest phoneme duration")
    inv = codebook.inventory
    utts = []
    rows = []
    for idx in range(spec.n_utterances):
        rng = np.random.default_rng((rng_seed, idx))
        length = int(rng.integers(spec.length_range[0], spec.length_range[1] + 1))
        ids = sample_text(rng, length, inv)
        durs = [int(rng.integers(spec.duration_range_ms[0],
                                 spec.duration_range_ms[1] + 1)) for _ in ids]
        seq = TimedPhonemeSeq.from_durations(ids, durs)
        gesture_seed = int(rng.integers(2 ** 63))
        utt_id = f"utt_{idx:05d}"
        utts.append(render_utterance(utt_id, seq, codebook, profile, gesture_seed))
        rows.append({
            "id": utt_id,
            "symbols": [inv.by_id(i).symbol for i in ids],
            "onsets_ms": list(seq.onsets_ms),
            "durations_ms": list(seq.durations_ms),
        })
    manifest = {
        "seed": rng_seed,
        "n_utterances": spec.n_utterances,
        "length_range": list(spec.length_range),
        "duration_range_ms": list(spec.duration_range_ms),
        "profile": profile.to_dict(),
        "utterances": rows,
    }
    return utts, manifest
