"""Command-line front end.

Exit codes: 0 success, 1 I/O or format error, 2 payload exceeds capacity,
3 pixel overflow in strict mode, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

from . import bench
from .errors import CapacityError, CorruptionError, FormatError, PixelOverflowError, VerificationError
from .imageio import SYNTHETIC_KINDS, gen_synthetic, load_pgm, save_pgm
from .keyfile import decode_key
from .overflow import DEFAULT_GUARD
from .pipeline import OVERFLOW_CHOICES, EmbedOptions, capacity, embed, extract, verify

EXIT_OK, EXIT_IO, EXIT_CAPACITY, EXIT_OVERFLOW, EXIT_VERIFY = 0, 1, 2, 3, 4

log = logging.getLogger("wavehide")


class CliError(Exception):
    def __init__(self, message, code=EXIT_IO):
        super().__init__(message)
        self.code = code


def _json(obj) -> str:
    def fix(v):
        return "inf" if isinstance(v, float) and math.isinf(v) else v
    return json.dumps({k: fix(v) for k, v in obj.items()}, sort_keys=False)


def _read(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, data: bytes):
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from None


def _distinct(inputs, outputs):
    ins = {os.path.realpath(p) for p in inputs}
    outs = [os.path.realpath(p) for p in outputs]
    if len(set(outs)) != len(outs) or ins & set(outs):
        raise CliError("output paths must differ from each other and from the inputs")


def _load_key(path):
    try:
        return decode_key(_read(path))
    except FormatError as exc:
        raise CliError(f"invalid key file {path}: {exc}", EXIT_VERIFY) from None


def _options(args, T=None) -> EmbedOptions:
    return EmbedOptions(
        T=args.threshold if T is None else T,
        overflow_mode=args.overflow,
        G=args.guard,
        compress_key=not getattr(args, "no_compress", False),
    )


def cmd_embed(args) -> int:
    _distinct([args.input, args.payload], [args.out, args.key])
    img = load_pgm(args.input)
    payload = _read(args.payload)
    res = embed(img, payload, _options(args))
    save_pgm(res.marked, args.out)
    _write(args.key, res.key_bytes)
    s = dict(res.stats)
    print(_json({k: s[k] for k in ("capacity_bits", "payload_bits", "overhead_bits", "psnr_db", "bpp")}))
    return EXIT_OK


def cmd_extract(args) -> int:
    _distinct([args.input, args.key], [args.out_payload, args.out_image])
    marked = load_pgm(args.input)
    key = _load_key(args.key)
    payload, original = extract(marked, key)
    _write(args.out_payload, payload)
    save_pgm(original, args.out_image)
    print(_json({"payload_bytes": len(payload), "width": original.width, "height": original.height}))
    return EXIT_OK


def cmd_capacity(args) -> int:
    img = load_pgm(args.input)
    rep = capacity(img, args.threshold, _options(args))
    print(_json({
        "T": rep.T, "per_carrier": rep.per_carrier, "capacity_bits": rep.total_bits,
        "bpp": round(rep.bpp, 4), "overhead_bits": rep.overhead_bits,
    }))
    return EXIT_OK


def cmd_verify(args) -> int:
    marked = load_pgm(args.input)
    key = _load_key(args.key)
    rep = verify(marked, key)
    print(_json({"crc_ok": rep.crc_ok, "heuristic_suspect": rep.heuristic_suspect, "errors": rep.errors}))
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_bench(args) -> int:
    images = {}
    if args.images:
        images.update(bench.load_corpus(args.images))
    for kind in args.synthetic or []:
        images[kind] = gen_synthetic(kind, args.size, args.size, args.seed)
    if not images:
        raise CliError("no images: pass --images DIR and/or --synthetic KIND")
    if args.step <= 0 or args.t_max < args.t_min:
        raise CliError("threshold range must satisfy t-min <= t-max and step > 0")
    T_set = range(args.t_min, args.t_max + 1, args.step)
    rows = bench.sweep(images, T_set, seed=args.seed, opts=_options(args, T=0))
    if args.csv == "-":
        bench.write_csv(rows, sys.stdout)
    else:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            bench.write_csv(rows, fh)
        print(_json({"rows": len(rows), "csv": args.csv}))
    return EXIT_OK


def _add_overflow(p):
    p.add_argument("--overflow", choices=OVERFLOW_CHOICES, default="narrow",
                   help="pixel range guard (default: narrow)")
    p.add_argument("--guard", type=int, default=DEFAULT_GUARD, metavar="G",
                   help=f"narrowing width for --overflow narrow (default: {DEFAULT_GUARD})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavehide", description="Reversible data hiding in Haar sub-band difference histograms.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="hide a payload in a PGM image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--payload", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--threshold", type=int, default=0)
    _add_overflow(p)
    p.add_argument("--no-compress", action="store_true", help="write the key file in store mode")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="recover the payload and the original image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--out-payload", required=True)
    p.add_argument("--out-image", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("capacity", help="report embedding capacity at a threshold")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--threshold", type=int, default=0)
    _add_overflow(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("verify", help="check a marked image against its key")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--key", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="threshold sweep to CSV")
    p.add_argument("--images", help="directory of .pgm files")
    p.add_argument("--synthetic", nargs="*", choices=SYNTHETIC_KINDS, help="add synthetic images")
    p.add_argument("--size", type=int, default=128, help="side length of synthetic images")
    p.add_argument("--t-min", type=int, default=0)
    p.add_argument("--t-max", type=int, default=100)
    p.add_argument("--step", type=int, default=10)
    p.add_argument("--csv", default="-", help="output path, '-' for stdout")
    p.add_argument("--seed", type=int, default=0)
    _add_overflow(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except PixelOverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except (VerificationError, CorruptionError) as exc:
        print(f"error: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (FormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
