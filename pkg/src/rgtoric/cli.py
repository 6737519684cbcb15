"""Command-line interface: decode, sweep, validate, bench.

Exit codes: 0 success, 1 validation failure, 2 I/O or usage error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import time

import numpy as np

from .bp import changes_csv
from .cell import derive_cell_basis, tiling_commutation_violations, validate_tiling
from .harness import ExperimentSpec, SpecError, estimate_threshold, run_experiment, summaries_csv
from .lattice import LatticeError, Syndrome, SyndromeError, TorusLattice, syndrome_bits
from .noise import sample_codes, trial_rng
from .pauli import canonical_form, commutation_table
from .rg import DecoderConfig, decode

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    with open(path) as fh:
        parser.read_string("[config]\n" + fh.read())
    return dict(parser["config"])


def _floats(v):
    return [float(x) for x in str(v).replace(",", " ").split()]


def _ints(v):
    return [int(x) for x in str(v).replace(",", " ").split()]


def _decoder_config(opts: dict) -> DecoderConfig:
    return DecoderConfig(
        bp_rounds=int(opts.get("rounds", 3)),
        damping=float(opts.get("damping", 0.0)),
        geometry=str(opts.get("geometry", "staircase")),
        verbosity=int(opts.get("verbosity", 0)),
    )


def _merged(args, keys) -> dict:
    opts = read_config(args.config) if getattr(args, "config", None) else {}
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            opts[k] = " ".join(map(str, v)) if isinstance(v, list) else v
    return opts


def cmd_decode(args) -> int:
    opts = _merged(args, ["ell", "p", "rounds", "damping", "geometry", "verbosity"])
    with open(args.syndrome) as fh:
        syn = Syndrome.from_string(fh.read())
    ell = int(opts.get("ell", syn.ell))
    res = decode(TorusLattice(ell), syn, float(opts["p"]), _decoder_config(opts))
    out = {
        "class": res.class_index,
        "distribution": res.distribution.tolist(),
        "correction": str(res.correction),
        "degenerate_cells": res.diagnostics["degenerate_cells"],
    }
    print(json.dumps(out, indent=2))
    if args.bp_csv:
        with open(args.bp_csv, "w") as fh:
            fh.write(changes_csv(res.diagnostics["bp_changes"]))
    return EXIT_OK


def cmd_sweep(args) -> int:
    opts = _merged(args, ["ell", "p", "trials", "seed", "rounds", "damping", "geometry", "workers", "out", "batch"])
    spec = ExperimentSpec(
        ells=tuple(_ints(opts["ell"])),
        ps=tuple(_floats(opts["p"])),
        trials=int(opts.get("trials", 1000)),
        seed=int(opts.get("seed", 0)),
        config=_decoder_config(opts),
        output=opts.get("out"),
        workers=int(opts.get("workers", 1)),
        batch=int(opts.get("batch", 64)),
    )
    rows = run_experiment(spec)
    sys.stdout.write(summaries_csv(rows))
    est = estimate_threshold(rows)
    if est.found:
        print(f"# threshold estimate {est.mean:.4f} (spread {est.spread:.4f})")
    else:
        print("# no crossing in range")
    return EXIT_OK


def cmd_validate(args) -> int:
    failed = False
    basis = derive_cell_basis()
    table_ok = np.array_equal(commutation_table(basis.operators()), canonical_form(12))
    print(f"cell basis canonical: {'ok' if table_ok else 'FAIL'}")
    failed |= not table_ok
    ell = 4
    while ell <= args.max_ell:
        rep = validate_tiling(ell)
        print(f"tiling ell={ell}: {rep.ncells} cells, {rep.covered} qubits covered, {len(rep.violations)} violations")
        for v in rep.violations:
            print(f"  {v}")
        failed |= not rep.ok
        ell *= 2
    for ell in (4, 8):
        bad = tiling_commutation_violations(basis, ell)
        print(f"cross-cell commutation ell={ell}: {'ok' if not bad else 'FAIL'}")
        for v in bad:
            print(f"  {v}")
        failed |= bool(bad)
    if args.dump:
        print(basis.dump(), end="")
    return EXIT_INVALID if failed else EXIT_OK


def bench_times(ells, p: float, repeats: int, seed: int = 0, config: DecoderConfig = DecoderConfig()) -> dict:
    """Median single-decode wall time per ell."""
    out = {}
    for ell in ells:
        lat = TorusLattice(ell)
        times = []
        for r in range(repeats + 1):
            codes = sample_codes(lat.n, p, trial_rng(seed, r))
            plaq, site = syndrome_bits(lat, codes & 1, codes >> 1)
            t0 = time.perf_counter()
            decode(lat, Syndrome(plaq, site), p, config)
            if r:  # first run warms caches
                times.append(time.perf_counter() - t0)
        out[ell] = float(np.median(times))
    return out


def fitted_exponent(times: dict) -> float:
    """Slope of log(time / log ell) against log ell."""
    ells = np.array(sorted(times), dtype=float)
    t = np.array([times[e] for e in sorted(times)])
    return float(np.polyfit(np.log(ells), np.log(t / np.log(ells)), 1)[0])


def cmd_bench(args) -> int:
    opts = _merged(args, ["rounds", "damping", "geometry"])
    times = bench_times(args.ell, args.p, args.repeats, config=_decoder_config(opts))
    print("ell,seconds")
    for ell, t in times.items():
        print(f"{ell},{t:.6f}")
    if len(times) >= 2:
        print(f"# exponent of time/log(ell): {fitted_exponent(times):.3f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rgtoric", description="Renormalization-group toric code decoder")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decode", help="decode one syndrome read from a file")
    d.add_argument("syndrome", help="file with plaquette bits then site bits, row-major")
    d.add_argument("--ell", type=int)
    d.add_argument("--p", type=float)
    d.add_argument("--rounds", type=int)
    d.add_argument("--damping", type=float)
    d.add_argument("--geometry")
    d.add_argument("--config")
    d.add_argument("--bp-csv", help="write per-round message changes here")
    d.set_defaults(func=cmd_decode)

    s = sub.add_parser("sweep", help="Monte Carlo sweep over ell and p")
    s.add_argument("--config")
    s.add_argument("--ell", type=int, nargs="+")
    s.add_argument("--p", type=float, nargs="+")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--rounds", type=int)
    s.add_argument("--damping", type=float)
    s.add_argument("--geometry")
    s.add_argument("--workers", type=int)
    s.add_argument("--batch", type=int)
    s.add_argument("--out", help="output prefix for .csv and .json")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate", help="tiling and cell-basis self-checks")
    v.add_argument("--max-ell", type=int, default=128)
    v.add_argument("--dump", action="store_true", help="print the cell basis")
    v.set_defaults(func=cmd_validate)

    b = sub.add_parser("bench", help="decode wall time against ell")
    b.add_argument("--ell", type=int, nargs="+", default=[16, 32, 64, 128])
    b.add_argument("--p", type=float, default=0.1)
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--rounds", type=int)
    b.add_argument("--damping", type=float)
    b.add_argument("--geometry")
    b.add_argument("--config")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (KeyError, SpecError, LatticeError, SyndromeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
