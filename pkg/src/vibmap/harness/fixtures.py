"""Synthetic walking recordings for dataset-free testing.

Each material gets a documented spectral signature: two resonant modes
placed on distinct Mel bands (primary band 3 + 3*idx, secondary band
60 - 3*idx on each sensor's Mel axis), excited by an impact train at a
subject-specific gait rate near 1.7 Hz. Accelerometer channels add a
strong sub-20 Hz gait bump per step so the gait-energy path has
structure. Conditions modulate the signature: Wet shifts modes down and
damps them, Noisy swamps the microphone with broadband noise while only
mildly degrading the accelerometer, and sessions without the transmitter
plate are attenuated and noisier.

Generation is fully deterministic: the RNG stream of every
(seed, subject, material, condition, sensor) tuple is independent, so
identical specs produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import signal as sps

from ..dsp.spectrogram import hz_to_mel, mel_to_hz
from ..errors import BadSpec
from ..ingest.manifest import write_sample_file
from ..ingest.sensors import SensorKind
from ..materials import Condition, get_material, material_index

GAIT_RATE_HZ = 1.7

_CONDITION_IDX = {c: i for i, c in enumerate(Condition)}


@dataclass
class FixtureSpec:
    n_subjects: int
    materials: tuple[str, ...]
    seconds_per_session: float = 60.0
    seed: int = 0
    conditions: tuple[str, ...] = ("Dry",)
    plate: bool = True

    def validated(self) -> "FixtureSpec":
        if self.n_subjects < 1:
            raise BadSpec(f"n_subjects must be >= 1, got {self.n_subjects}")
        if not self.materials:
            raise BadSpec("materials must be non-empty")
        if self.seconds_per_session < 4.0:
            raise BadSpec("sessions shorter than 4 s cannot hold one ACC window")
        names = tuple(get_material(m).name for m in self.materials)
        conditions = tuple(Condition(c).value for c in self.conditions)
        return FixtureSpec(
            n_subjects=self.n_subjects,
            materials=names,
            seconds_per_session=self.seconds_per_session,
            seed=self.seed,
            conditions=conditions,
            plate=self.plate,
        )


def _band_center_hz(rate: float, band_idx: int, n_mels: int = 64) -> float:
    points = mel_to_hz(np.linspace(hz_to_mel(20.0), hz_to_mel(rate / 2), n_mels + 2))
    return float(points[band_idx + 1])


def material_signature(material: str, rate: float) -> list[tuple[float, float]]:
    """(frequency Hz, gain) resonant modes for one material on one sensor."""
    idx = material_index(material)
    primary = _band_center_hz(rate, 3 + 3 * idx)
    secondary = _band_center_hz(rate, 60 - 3 * idx)
    return [(primary, 1.0), (secondary, 0.55)]


def _gait_rate(subject_id: int) -> float:
    return GAIT_RATE_HZ + 0.08 * ((subject_id * 7) % 5 - 2)  # 1.54 .. 1.86 Hz


def _impact_train(
    rng: np.random.Generator, n: int, rate: float, step_hz: float
) -> np.ndarray:
    """Unit impulses with amplitude jitter at roughly periodic step times."""
    x = np.zeros(n)
    t = rng.uniform(0.0, 0.3)
    while t * rate < n:
        idx = int(t * rate)
        x[idx] = 1.0 + 0.3 * rng.standard_normal()
        burst = min(int(0.004 * rate), n - idx)
        x[idx : idx + burst] += 0.12 * rng.standard_normal(burst)
        t += 1.0 / step_hz + rng.normal(0.0, 0.02)
    return x


def synth_session(
    subject_id: int,
    material: str,
    condition: str,
    sensor: SensorKind,
    seconds: float,
    seed: int,
    plate: bool = True,
) -> np.ndarray:
    """One deterministic synthetic recording at the sensor's nominal rate."""
    cond = Condition(condition)
    ss = np.random.SeedSequence(
        [seed, subject_id, material_index(material), _CONDITION_IDX[cond],
         list(SensorKind).index(sensor), int(plate)]
    )
    rng = np.random.default_rng(ss)
    rate = sensor.nominal_rate
    n = round(seconds * rate)

    gait = _gait_rate(subject_id)
    # the microphone hears both feet, the shoe-mounted ACC mostly its own
    step_hz = 2.0 * gait if sensor is SensorKind.MIC else gait
    excitation = _impact_train(rng, n, rate, step_hz)

    detune = 1.0 + 0.012 * ((subject_id * 13) % 7 - 3) / 3.0
    freq_scale, q_scale, amp = 1.0, 1.0, 1.0
    if cond is Condition.WET:
        freq_scale, q_scale, amp = 0.75, 0.4, 0.8
    if not plate:
        amp *= 0.45

    out = np.zeros(n)
    for f0, gain in material_signature(material, rate):
        f0 = min(f0 * detune * freq_scale, 0.45 * rate)
        b, a = sps.iirpeak(f0, Q=30.0 * q_scale, fs=rate)
        # x30 lifts the narrow resonances well above the wideband floor
        out += 30.0 * gain * sps.lfilter(b, a, excitation)
    out *= amp

    if sensor.is_acc:
        # sub-20 Hz gait bump per step: the gait-energy path's substance
        width = int(0.16 * rate)
        window = np.hanning(width)
        bumps = np.zeros(n)
        t = 0.15
        while t * rate < n - width:
            idx = int(t * rate)
            bumps[idx : idx + width] += (2.0 + 0.4 * rng.standard_normal()) * window
            t += 1.0 / gait + rng.normal(0.0, 0.02)
        out += bumps

    noise_floor = 5e-4 if plate else 2e-3
    out += noise_floor * rng.standard_normal(n)
    if cond is Condition.NOISY:
        rms = float(np.sqrt(np.mean(out**2)))
        level = 5.0 * rms if sensor is SensorKind.MIC else 0.3 * rms
        out += level * rng.standard_normal(n)
    return out


def make_fixtures(out_dir: str | Path, spec: FixtureSpec) -> Path:
    """Write a complete synthetic dataset; returns the manifest path."""
    spec = spec.validated()
    out_dir = Path(out_dir)
    data_dir = out_dir / "data"
    data_dir.mkdir(parents=True, exist_ok=True)

    sessions = []
    for subject in range(1, spec.n_subjects + 1):
        for material in spec.materials:
            for condition in spec.conditions:
                files = {}
                for sensor in SensorKind:
                    samples = synth_session(
                        subject, material, condition, sensor,
                        spec.seconds_per_session, spec.seed, spec.plate,
                    )
                    rel = (
                        f"data/s{subject:03d}_{material}_{condition}"
                        f"_p{int(spec.plate)}_{sensor.value}.f32"
                    )
                    write_sample_file(out_dir / rel, samples)
                    files[sensor.value] = rel
                sessions.append(
                    {
                        "subject_id": subject,
                        "material": material,
                        "condition": condition,
                        "plate": spec.plate,
                        "duration_s": spec.seconds_per_session,
                        "files": files,
                    }
                )
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(
        json.dumps(
            {"subjects": list(range(1, spec.n_subjects + 1)), "sessions": sessions},
            indent=1,
        )
    )
    return manifest_path
