"""Writes the WAV fixtures used by the test suites.

    python3 scripts/make_fixtures.py crates/core/tests/data

Only numpy and the stdlib `wave` module are used, so the files do not depend
on the Rust reader/writer under test.
"""

import sys
import wave
from pathlib import Path

import numpy as np

FS = 44100


def write(path, samples, fs=FS, width=2):
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(width)
        w.setframerate(fs)
        if width == 2:
            pcm = np.clip(np.round(samples * 32768.0), -32768, 32767).astype("<i2")
        else:
            pcm = np.clip(np.round(samples * 128.0 + 128.0), 0, 255).astype(np.uint8)
        w.writeframes(pcm.tobytes())


def sine(freq, seconds, fs=FS, amp=1.0):
    t = np.arange(int(round(seconds * fs))) / fs
    return amp * np.sin(2 * np.pi * freq * t)


def formant_filter(x, freq, bw, fs=FS):
    r = np.exp(-np.pi * bw / fs)
    a1 = -2 * r * np.cos(2 * np.pi * freq / fs)
    a2 = r * r
    y = np.zeros_like(x)
    y1 = y2 = 0.0
    for i, v in enumerate(x):
        out = v - a1 * y1 - a2 * y2
        y2, y1 = y1, out
        y[i] = out
    return y


def speech_like(seconds=3.0, fs=FS, seed=7):
    """Glottal pulse train through moving formants, syllabic envelope, fricative bursts."""
    rng = np.random.default_rng(seed)
    n = int(seconds * fs)
    t = np.arange(n) / fs
    f0 = 120 + 25 * np.sin(2 * np.pi * 0.7 * t) + 10 * np.sin(2 * np.pi * 2.3 * t)
    phase = np.cumsum(f0 / fs)
    pulses = np.diff(np.floor(phase), prepend=0.0)
    source = np.convolve(pulses, np.hanning(40), mode="same")

    voiced = np.zeros(n)
    seg = fs // 5
    vowels = [(730, 1090, 2440), (300, 2200, 3000), (570, 840, 2410), (440, 1020, 2240), (270, 2290, 3010)]
    for k, start in enumerate(range(0, n, seg)):
        part = source[start:start + seg]
        f1, f2, f3 = vowels[k % len(vowels)]
        y = formant_filter(part, f1, 80) + 0.6 * formant_filter(part, f2, 120) + 0.3 * formant_filter(part, f3, 160)
        voiced[start:start + len(part)] = y
    voiced /= np.max(np.abs(voiced))

    envelope = 0.5 * (1 - np.cos(2 * np.pi * 3.2 * t)) ** 1.5
    noise = rng.standard_normal(n)
    fric = np.diff(noise, prepend=0.0) * (np.sin(2 * np.pi * 3.2 * t + 2.2) > 0.85)
    x = voiced * envelope + 0.15 * fric
    fade = np.minimum(1.0, np.minimum(t, seconds - t) / 0.02)
    x *= fade
    return 0.8 * x / np.max(np.abs(x))


def main():
    out = Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    write(out / "sine440_1s.wav", sine(440, 1.0) * (32767 / 32768))
    write(out / "speech_like_3s.wav", speech_like())
    write(out / "tone_8bit.wav", sine(440, 0.1, amp=0.5), width=1)
    write(out / "tone_8khz.wav", sine(440, 0.5, fs=8000, amp=0.5), fs=8000)
    write(out / "utt_0001.wav", sine(220, 1.5, amp=0.3))
    write(out / "utt_0002.wav", sine(330, 0.75, amp=0.3))


if __name__ == "__main__":
    main()
