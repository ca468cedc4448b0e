"""Converts the RUSLAN metadata file into a `id|path|text` manifest.

    python3 scripts/ruslan_manifest.py ROOT [--metadata FILE] [--audio-dir DIR]

ROOT is the directory later passed as RUSLAN_DATA. The metadata file has one
`000000_RUSLAN|text` line per sample; audio lives in `<audio-dir>/<id>.wav`
relative to ROOT. Writes ROOT/manifest.txt.
"""

import argparse
import sys
from pathlib import Path


def find_metadata(root):
    hits = sorted(root.rglob("metadata*.csv")) + sorted(root.rglob("metadata*.txt"))
    if not hits:
        sys.exit(f"no metadata file under {root}; pass --metadata")
    return hits[0]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("root", type=Path)
    ap.add_argument("--metadata", type=Path)
    ap.add_argument("--audio-dir", default="RUSLAN")
    ap.add_argument("--check-audio", action="store_true")
    args = ap.parse_args()

    root = args.root.resolve()
    meta = args.metadata or find_metadata(root)
    lines = []
    missing = 0
    for n, raw in enumerate(meta.read_text(encoding="utf-8-sig").splitlines(), 1):
        raw = raw.strip()
        if not raw:
            continue
        key, sep, text = raw.partition("|")
        if not sep:
            sys.exit(f"{meta}:{n}: expected 'id|text'")
        key = Path(key.strip()).name
        if key.endswith(".wav"):
            key = key[:-4]
        rel = f"{args.audio_dir}/{key}.wav"
        if args.check_audio and not (root / rel).is_file():
            missing += 1
        lines.append(f"{key.lower()}|{rel}|{text.strip()}")

    out = root / "manifest.txt"
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{len(lines)} samples -> {out}")
    if missing:
        print(f"warning: {missing} audio files missing", file=sys.stderr)


if __name__ == "__main__":
    main()
