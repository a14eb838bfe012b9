"""Audio framing, mel spectrogram extraction, and landmark PCA.

Conventions (declared here because they pin down every downstream number):
no center padding, so T = floor((n - win) / hop) + 1; periodic Hann window;
magnitude STFT; unit-peak triangular filters spaced on the HTK mel scale
between fmin and fmax; natural log with an absolute floor. PCA components
come from the covariance eigendecomposition with the sign of each component
fixed so its largest-magnitude entry is positive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateData, DimensionMismatch, LengthMismatch, TooShort

HAND_DIM = 21 * 2
LIP_DIM = 42 * 2


@dataclass(frozen=True)
class MelConfig:
    sample_rate: int = 22050
    n_fft: int = 1024
    win: int = 1024
    hop: int = 256
    n_mels: int = 80
    fmin: float = 0.0
    fmax: float = 8000.0
    log_floor: float = 1e-5

    def __post_init__(self):
        if not (self.hop <= self.win == self.n_fft):
            raise DimensionMismatch("require hop <= win == n_fft")
        if self.n_mels < 1 or not (self.fmin < self.fmax <= self.sample_rate / 2):
            raise DimensionMismatch("invalid mel band configuration")


def frame_count(n_samples: int, cfg: MelConfig) -> int:
    if n_samples < cfg.win:
        raise TooShort(f"need at least {cfg.win} samples, got {n_samples}")
    return (n_samples - cfg.win) // cfg.hop + 1


def frame_times(n_samples: int, cfg: MelConfig) -> np.ndarray:
    """Center time (seconds) of each analysis frame."""
    t = frame_count(n_samples, cfg)
    return (np.arange(t) * cfg.hop + cfg.win / 2) / cfg.sample_rate


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(cfg: MelConfig) -> tuple[np.ndarray, np.ndarray]:
    """Returns (filters, centers_hz): filters is (n_bins, n_mels)."""
    n_bins = cfg.n_fft // 2 + 1
    freqs = np.arange(n_bins) * cfg.sample_rate / cfg.n_fft
    mels = np.linspace(_hz_to_mel(cfg.fmin), _hz_to_mel(cfg.fmax), cfg.n_mels + 2)
    edges = _mel_to_hz(mels)
    left, center, right = edges[:-2], edges[1:-1], edges[2:]
    up = (freqs[:, None] - left[None, :]) / (center - left)[None, :]
    down = (right[None, :] - freqs[:, None]) / (right - center)[None, :]
    filters = np.maximum(0.0, np.minimum(up, down))
    return filters, center


def stft_magnitude(audio: np.ndarray, cfg: MelConfig) -> np.ndarray:
    t = frame_count(len(audio), cfg)
    idx = np.arange(cfg.win)[None, :] + cfg.hop * np.arange(t)[:, None]
    frames = np.asarray(audio, dtype=np.float64)[idx]
    n = np.arange(cfg.win)
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / cfg.win)  # periodic Hann
    return np.abs(np.fft.rfft(frames * window, n=cfg.n_fft, axis=1))


def mel_spectrogram(audio: np.ndarray, cfg: MelConfig) -> np.ndarray:
    """(T, n_mels) log-compressed mel magnitudes."""
    mag = stft_magnitude(audio, cfg)
    filters, _ = mel_filterbank(cfg)
    return np.log(np.maximum(mag @ filters, cfg.log_floor))


# ---------------------------------------------------------------------------
# PCA
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray                      # (d,)
    components: np.ndarray                # (k, d), orthonormal rows
    explained_variance_ratio: np.ndarray  # (k,), non-increasing

    @property
    def k(self) -> int:
        return self.components.shape[0]

    @property
    def d(self) -> int:
        return self.components.shape[1]


def pca_fit(data: np.ndarray, k: int) -> PcaModel:
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise DimensionMismatch("pca_fit expects an (N, d) matrix")
    n, d = data.shape
    if not n > k >= 1:
        raise DimensionMismatch(f"need N > k >= 1, got N={n}, k={k}")
    mean = data.mean(axis=0)
    centered = data - mean
    cov = centered.T @ centered / n
    if not np.any(cov):
        raise DegenerateData("covariance is identically zero")
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    comps = eigvecs[:, order[:k]].T.copy()
    for row in comps:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    total = eigvals.sum()
    ratios = eigvals[:k] / total
    return PcaModel(mean=mean, components=comps, explained_variance_ratio=ratios)


def pca_transform(model: PcaModel, frames: np.ndarray) -> np.ndarray:
    frames = np.asarray(frames, dtype=np.float64)
    if frames.shape[-1] != model.d:
        raise DimensionMismatch(f"expected dim {model.d}, got {frames.shape[-1]}")
    return (frames - model.mean) @ model.components.T


def pca_inverse(model: PcaModel, coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape[-1] != model.k:
        raise DimensionMismatch(f"expected {model.k} coefficients, got {coeffs.shape[-1]}")
    return coeffs @ model.components + model.mean


def save_pca(model: PcaModel, path: str | Path) -> None:
    doc = {
        "mean": model.mean.tolist(),
        "components": model.components.tolist(),
        "explained_variance_ratio": model.explained_variance_ratio.tolist(),
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_pca(path: str | Path) -> PcaModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return PcaModel(
        mean=np.array(doc["mean"], dtype=np.float64),
        components=np.array(doc["components"], dtype=np.float64),
        explained_variance_ratio=np.array(doc["explained_variance_ratio"],
                                          dtype=np.float64),
    )


# ---------------------------------------------------------------------------
# feature bundles
# ---------------------------------------------------------------------------

@dataclass
class FeatureBundle:
    """Frame-synchronous training targets for one utterance."""

    utt_id: str
    mel: np.ndarray          # (T, 80) float32
    hand: np.ndarray         # (T, 10) float32
    lips: np.ndarray         # (T, 10) float32
    gate_target: np.ndarray  # (T,) float32, one-hot on the final frame

    @property
    def frames(self) -> int:
        return self.mel.shape[0]


def _resample_rows(arr: np.ndarray, t: int) -> np.ndarray:
    """Linear time resampling of (L, ...) to (t, ...)."""
    l = arr.shape[0]
    if l == t:
        return arr
    pos = np.linspace(0.0, l - 1.0, t)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, l - 1)
    frac = (pos - lo).reshape((t,) + (1,) * (arr.ndim - 1))
    return (1.0 - frac) * arr[lo] + frac * arr[hi]


def build_bundle(utt, cfg: MelConfig, pca_hand: PcaModel,
                 pca_lips: PcaModel) -> FeatureBundle:
    """Extract mel + PCA landmark coefficients, all sharing the mel frame count.

    Oracle utterances are frame-synchronous by construction; imported landmark
    tracks with a different length are linearly resampled to the mel rate.
    """
    if pca_hand.d != HAND_DIM or pca_lips.d != LIP_DIM:
        raise DimensionMismatch("PCA models must cover 42-d hand / 84-d lip frames")
    mel = mel_spectrogram(utt.audio, cfg)
    t = mel.shape[0]
    hand = _resample_rows(utt.hand_landmarks, t).reshape(t, HAND_DIM)
    lips = _resample_rows(utt.lip_landmarks, t).reshape(t, LIP_DIM)
    gate = np.zeros(t, dtype=np.float32)
    gate[-1] = 1.0
    return FeatureBundle(
        utt_id=utt.utt_id,
        mel=mel.astype(np.float32),
        hand=pca_transform(pca_hand, hand).astype(np.float32),
        lips=pca_transform(pca_lips, lips).astype(np.float32),
        gate_target=gate,
    )


def fit_landmark_pca(utterances, k: int = 10) -> tuple[PcaModel, PcaModel]:
    """Fit hand/lip PCA on pooled landmark frames of a corpus (training split)."""
    hand = np.concatenate([u.hand_landmarks.reshape(-1, HAND_DIM) for u in utterances])
    lips = np.concatenate([u.lip_landmarks.reshape(-1, LIP_DIM) for u in utterances])
    return pca_fit(hand, k), pca_fit(lips, k)
