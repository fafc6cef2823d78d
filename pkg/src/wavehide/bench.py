"""Threshold sweeps: capacity, overhead and PSNR at maximal payload, as CSV."""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .imageio import Image, XorShift64Star, load_pgm
from .metrics import psnr
from .pipeline import EmbedOptions, embed, extract, max_payload

__all__ = ["CSV_HEADER", "SweepRow", "psnr", "sweep", "write_csv", "load_corpus", "bench_threads"]

CSV_HEADER = [
    "image_id", "T", "capacity_bits", "bpp", "overhead_bits",
    "net_bpp", "psnr_db", "embed_ms", "extract_ms", "roundtrip_ok",
]


@dataclass
class SweepRow:
    image_id: str
    T: int
    capacity_bits: int
    bpp: float
    overhead_bits: int
    net_bpp: float
    psnr_db: float
    embed_ms: float
    extract_ms: float
    roundtrip_ok: bool

    def as_csv(self) -> list[str]:
        return [
            self.image_id,
            str(self.T),
            str(self.capacity_bits),
            f"{self.bpp:.4f}",
            str(self.overhead_bits),
            f"{self.net_bpp:.4f}",
            "inf" if math.isinf(self.psnr_db) else f"{self.psnr_db:.4f}",
            f"{self.embed_ms:.3f}",
            f"{self.extract_ms:.3f}",
            "true" if self.roundtrip_ok else "false",
        ]


def bench_threads() -> int:
    try:
        return max(1, int(os.environ.get("RDH_THREADS", "1")))
    except ValueError:
        return 1


def run_cell(image_id: str, img: Image, T: int, seed: int, base: EmbedOptions) -> SweepRow:
    opts = replace(base, T=T)
    pixels = img.width * img.height
    stream = XorShift64Star(seed).bytes(pixels // 8 + 8)
    payload = max_payload(img, stream, opts)

    t0 = time.perf_counter()
    res = embed(img, payload, opts)
    t1 = time.perf_counter()
    got_payload, got_img = extract(res.marked, res.key)
    t2 = time.perf_counter()
    if got_payload != payload or got_img != img:
        raise RuntimeError(f"round trip failed for image {image_id!r} at T={T}")

    cap = res.stats["capacity_bits"]
    over = res.stats["overhead_bits"]
    return SweepRow(
        image_id=image_id, T=T, capacity_bits=cap, bpp=cap / pixels, overhead_bits=over,
        net_bpp=(cap - over) / pixels, psnr_db=res.stats["psnr_db"],
        embed_ms=1000 * (t1 - t0), extract_ms=1000 * (t2 - t1), roundtrip_ok=True,
    )


def sweep(images, T_set, seed: int = 0, opts: EmbedOptions | None = None, threads: int | None = None) -> list[SweepRow]:
    """One row per (image, T), sorted by image id then T.

    ``images`` maps image ids to images (or is an iterable of pairs). The
    payload at every cell is the longest prefix of a seeded xorshift64*
    byte stream that fits.
    """
    opts = opts or EmbedOptions()
    items = sorted(dict(images).items())
    cells = [(name, img, T) for name, img in items for T in sorted(set(T_set))]
    threads = threads or bench_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda c: run_cell(c[0], c[1], c[2], seed, opts), cells))
    else:
        rows = [run_cell(name, img, T, seed, opts) for name, img, T in cells]
    return sorted(rows, key=lambda r: (r.image_id, r.T))


def write_csv(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.as_csv())


def load_corpus(directory) -> dict[str, Image]:
    paths = sorted(Path(directory).glob("*.pgm"))
    return {p.stem: load_pgm(p) for p in paths}
