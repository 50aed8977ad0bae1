"""Command-line entry point: ``hankelsr <command> [options]``.

Exit status: 0 success, 1 usage or input error, 2 a verification check
failed, 3 a solver did not converge and ``--strict`` was given.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import experiments as ex
from .io import SchemaError, read_json, write_json
from .music_ident import DEFAULT_GRID, PeakCountError, run_music, write_peaks_json
from .recovery_solvers import (
    ANM_OPTIONS,
    RecoveryResult,
    SolverOptions,
    recover_anm,
    recover_hankel_nnm,
    recover_hankel_nnm_noisy,
)
from .signal_model import (
    MeasurementSet,
    SampleMask,
    SpectralSignal,
    add_noise,
    random_instance,
    sample_entries,
    sample_gaussian,
    synthesize,
)

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_NONCONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_int_list(text: str) -> list:
    """``"8:60:4,63"`` -> ``[8, 12, ..., 60, 63]``; ranges are inclusive."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            if len(bits) == 2:
                bits.append(1)
            if len(bits) != 3 or bits[2] <= 0:
                raise argparse.ArgumentTypeError(f"bad range {part!r}")
            out.extend(range(bits[0], bits[1] + 1, bits[2]))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return sorted(set(out))


def parse_float_list(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _out_dir(path) -> Path:
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {p}: {exc}") from None
    return p


def _options(args, base: SolverOptions) -> SolverOptions:
    kw = {}
    if getattr(args, "tol", None) is not None:
        kw["tol"] = args.tol
    if getattr(args, "max_iters", None) is not None:
        kw["max_iters"] = args.max_iters
    try:
        return SolverOptions(**{**base.__dict__, **kw})
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _print_table(rows, header):
    widths = [max(len(str(r[i])) for r in rows + [header]) for i in range(len(header))]
    line = "  ".join(h.ljust(w) for h, w in zip(header, widths))
    print(line)
    print("-" * len(line))
    for r in rows:
        print("  ".join(str(c).ljust(w) for c, w in zip(r, widths)))


# ---------------------------------------------------------------------------
# commands


def cmd_phase(args) -> int:
    n = args.n
    L = 2 * n - 1
    m_values = args.m or sorted(set(list(range(8, L, 8)) + [L]))
    r_values = args.r or list(range(1, min(32, n) + 1))
    opts = _options(args, ex.solver_defaults(args.solver))
    out = _out_dir(args.out)
    t0 = time.perf_counter()

    def progress(done, total):
        if args.verbose:
            print(f"cell {done}/{total}", file=sys.stderr)

    try:
        grid = ex.run_phase(n, m_values, r_values, args.trials, args.solver, args.sampling,
                            args.seed, args.workers, opts, args.threshold, progress)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    stem = f"phase_{args.solver}_{args.sampling}_n{n}"
    grid.write_csv(out / f"{stem}.csv")
    ex.write_trials_csv(grid, out / f"{stem}_trials.csv")
    meta = grid.metadata()
    meta["elapsed_seconds"] = time.perf_counter() - t0
    meta["nonconverged"] = sum(not r[5] for r in grid.records)
    write_json(out / f"{stem}.json", meta)
    print(f"wrote {out / (stem + '.csv')}  ({len(m_values)}x{len(r_values)} cells, "
          f"{args.trials} trials each, {meta['elapsed_seconds']:.1f}s)")
    for i, m in enumerate(m_values):
        print(f"M={m:4d}  " + " ".join(f"{v:4.2f}" for v in grid.rates[i]))
    if args.strict and meta["nonconverged"]:
        return EXIT_NONCONVERGED
    return EXIT_OK


def _opts_or_none(args):
    if args.tol is None and args.max_iters is None:
        return None
    return _options(args, SolverOptions())


def cmd_closefreq(args) -> int:
    if args.fixture != "paper-closefreq":
        raise UsageError(f"unknown fixture {args.fixture!r} for closefreq")
    seps = args.sep or list(ex.CLOSEFREQ_SEPARATIONS)
    for s in seps:
        if not 0 < s < 0.5:
            raise UsageError(f"separation {s} outside (0, 0.5)")
    out = _out_dir(args.out)
    opts = _opts_or_none(args)
    runs, rows, nonconv = [], [], 0
    for s in seps:
        run = ex.run_closefreq(s, mask_seed=args.seed, opts=opts, grid_size=args.grid)
        run.profile.to_csv(out / f"closefreq_profile_sep{s:g}.csv")
        runs.append(run.summary())
        nonconv += not run.converged
        rows.append([f"{s:g}", f"{run.relative_error:.3e}", f"{run.max_frequency_error:.2e}",
                     run.iterations, run.converged,
                     " ".join(f"{f:.4f}" for f in run.music_frequencies)])
    write_json(out / "closefreq.json", {
        "fixture": args.fixture, "n": ex.FIXTURE_N, "m": ex.FIXTURE_M, "mask_seed": args.seed,
        "grid_size": args.grid, "runs": runs,
    })
    _print_table(rows, ["sep", "rel_err", "max_f_err", "iters", "converged", "MUSIC frequencies"])
    return EXIT_NONCONVERGED if (args.strict and nonconv) else EXIT_OK


def cmd_noisy(args) -> int:
    if args.fixture != "paper-noisy":
        raise UsageError(f"unknown fixture {args.fixture!r} for noisy")
    if args.delta <= 0:
        raise UsageError("--delta must be positive")
    out = _out_dir(args.out)
    run = ex.run_noisy(args.delta, mask_seed=args.seed, noise_seed=args.noise_seed,
                       opts=_opts_or_none(args), grid_size=args.grid)
    if run.profile is not None:
        run.profile.to_csv(out / "noisy_profile.csv")
    write_json(out / "noisy.json", {
        "fixture": args.fixture, "delta": args.delta, "mask_seed": args.seed,
        "noise_seed": args.noise_seed, **run.summary(),
    })
    print(f"relative error {run.relative_error:.3e}, converged={run.converged}, "
          f"iterations={run.iterations}")
    if run.flags.get("trivial_zero"):
        print("delta >= ||b||: the zero signal is feasible and was returned")
    else:
        print("MUSIC: " + " ".join(f"{f:.4f}" for f in run.music_frequencies)
              + f"  (max error {run.max_frequency_error:.2e})")
    return EXIT_NONCONVERGED if (args.strict and not run.converged) else EXIT_OK


def cmd_verify(args) -> int:
    names = list(ex.SUITES) if args.suite in (None, "all") else args.suite.split(",")
    unknown = [n for n in names if n not in ex.SUITES]
    if unknown:
        raise UsageError(f"unknown suite(s) {unknown}; choose from {list(ex.SUITES)}")
    out = _out_dir(args.out)
    rows, failed = [], False
    with open(out / "verify.jsonl", "w") as fh:
        for name in names:
            t0 = time.perf_counter()
            res = ex.SUITES[name](seed=args.seed)
            for rep in res.reports:
                fh.write(rep.to_json() + "\n")
            failed |= not res.passed
            rows.append([name, "PASS" if res.passed else "FAIL",
                         f"{time.perf_counter() - t0:.1f}s", res.summary])
    _print_table(rows, ["suite", "result", "time", "summary"])
    return EXIT_VERIFY if failed else EXIT_OK


def _load(path, what):
    try:
        return read_json(path)
    except FileNotFoundError:
        raise UsageError(f"{what} file not found: {path}") from None


def cmd_gen(args) -> int:
    try:
        sig = random_instance(args.seed, args.n, args.r, separation_floor=args.sep)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    payload = {"seed": args.seed, "signal": sig.to_dict(),
               "x": [[v.real, v.imag] for v in synthesize(sig)]}
    write_json(args.out, payload)
    print(f"wrote {args.out}: N={args.n}, R={args.r}, "
          f"min separation {sig.min_separation():.4g}")
    return EXIT_OK


def _signal_from(payload, path) -> SpectralSignal:
    if not isinstance(payload, dict) or "signal" not in payload:
        raise SchemaError(f"{path}: missing field 'signal'")
    return SpectralSignal.from_dict(payload["signal"])


def cmd_sample(args) -> int:
    sig = _signal_from(_load(args.signal, "signal"), args.signal)
    x = synthesize(sig)
    if args.sampling == "entries":
        if not 1 <= args.m <= sig.length:
            raise UsageError(f"--m must lie in 1..{sig.length}")
        meas = sample_entries(x, SampleMask.random(sig.length, args.m, args.seed))
    else:
        meas = sample_gaussian(x, args.m, args.seed)
    if args.delta:
        meas = add_noise(meas, args.delta, args.seed + 1)
    write_json(args.out, {"n": sig.n_half, "measurements": meas.to_dict()})
    print(f"wrote {args.out}: {meas.m} {args.sampling} measurements")
    return EXIT_OK


def cmd_recover(args) -> int:
    payload = _load(args.meas, "measurements")
    if not isinstance(payload, dict) or "measurements" not in payload:
        raise SchemaError(f"{args.meas}: missing field 'measurements'")
    meas = MeasurementSet.from_dict(payload["measurements"])
    n = (meas.n_full + 1) // 2
    if meas.n_full % 2 == 0:
        raise SchemaError(f"{args.meas}: measurements.n_full must be odd")
    if args.solver == "anm":
        res = recover_anm(meas, n, _options(args, ANM_OPTIONS))
    elif meas.noise_level > 0:
        res = recover_hankel_nnm_noisy(meas, n, _options(args, SolverOptions()))
    else:
        res = recover_hankel_nnm(meas, n, _options(args, SolverOptions()))
    write_json(args.out, {"n": n, "result": res.to_dict()})
    print(f"wrote {args.out}: converged={res.converged} iterations={res.iterations} "
          f"objective={res.objective:.6g}")
    return EXIT_NONCONVERGED if (args.strict and not res.converged) else EXIT_OK


def cmd_music(args) -> int:
    payload = _load(args.input, "input")
    if isinstance(payload, dict) and "result" in payload:
        x = RecoveryResult.from_dict(payload["result"]).x_hat
    elif isinstance(payload, dict) and "x" in payload:
        from .io import complex_vector_from_pairs

        x = complex_vector_from_pairs(payload["x"], "x")
    else:
        raise SchemaError(f"{args.input}: expected a 'result' or 'x' field")
    if len(x) % 2 == 0:
        raise SchemaError(f"{args.input}: signal length {len(x)} is not 2N-1")
    n = (len(x) + 1) // 2
    damped = False
    if isinstance(payload, dict) and "signal" in payload:
        damped = _signal_from(payload, args.input).is_damped
    try:
        est, prof = run_music(x, args.r, n, args.grid, damped=damped)
    except (ValueError, PeakCountError) as exc:
        raise UsageError(str(exc)) from None
    out = _out_dir(args.out)
    prof.to_csv(out / "profile.csv")
    write_peaks_json(out / "peaks.json", est, prof, {"n": n, "R": args.r, "grid_size": args.grid})
    print("frequencies: " + " ".join(f"{f:.6f}" for f in est.sorted()))
    print(f"spectral gap sigma_R/sigma_R+1 = {prof.spectral_gap:.3g}")
    if damped:
        print("warning: damped modes; MUSIC is only supported for undamped signals")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hankelsr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(sp):
        sp.add_argument("--tol", type=float)
        sp.add_argument("--max-iters", type=int)
        sp.add_argument("--strict", action="store_true",
                        help="exit with status 3 if any solve fails to converge")

    sp = sub.add_parser("phase", help="phase-transition grid over (M, R)")
    sp.add_argument("--n", type=int, default=64)
    sp.add_argument("--m", type=parse_int_list, help="e.g. 8:60:4,63")
    sp.add_argument("--r", type=parse_int_list, help="e.g. 1:12")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--solver", choices=["hankel", "anm"], default="hankel")
    sp.add_argument("--sampling", choices=["entries", "gaussian"], default="entries")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=None,
                    help=f"worker processes (default ${ex.WORKERS_ENV} or 1)")
    sp.add_argument("--threshold", type=float, default=ex.SUCCESS_THRESHOLD)
    sp.add_argument("--out", default="results")
    sp.add_argument("--verbose", action="store_true")
    solver_flags(sp)
    sp.set_defaults(func=cmd_phase)

    sp = sub.add_parser("closefreq", help="close-frequency fixture")
    sp.add_argument("--fixture", default="paper-closefreq")
    sp.add_argument("--sep", type=parse_float_list)
    sp.add_argument("--seed", type=int, default=0, help="mask seed")
    sp.add_argument("--grid", type=int, default=DEFAULT_GRID)
    sp.add_argument("--out", default="results")
    solver_flags(sp)
    sp.set_defaults(func=cmd_closefreq)

    sp = sub.add_parser("noisy", help="noisy fixture")
    sp.add_argument("--fixture", default="paper-noisy")
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=0, help="mask seed")
    sp.add_argument("--noise-seed", type=int, default=1)
    sp.add_argument("--grid", type=int, default=DEFAULT_GRID)
    sp.add_argument("--out", default="results")
    solver_flags(sp)
    sp.set_defaults(func=cmd_noisy)

    sp = sub.add_parser("verify", help="run theory check suites")
    sp.add_argument("--suite", default="all", help="comma list of: " + ",".join(ex.SUITES))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="results")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("gen", help="draw a random signal")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sep", type=float, default=None, help="minimum wrap-around separation")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("sample", help="measure a signal file")
    sp.add_argument("--signal", required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--sampling", choices=["entries", "gaussian"], default="entries")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--delta", type=float, default=0.0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("recover", help="solve one recovery problem")
    sp.add_argument("--meas", required=True)
    sp.add_argument("--solver", choices=["hankel", "anm"], default="hankel")
    sp.add_argument("--out", required=True)
    solver_flags(sp)
    sp.set_defaults(func=cmd_recover)

    sp = sub.add_parser("music", help="MUSIC on a signal or recovery result")
    sp.add_argument("--input", required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--grid", type=int, default=DEFAULT_GRID)
    sp.add_argument("--out", default="results")
    sp.set_defaults(func=cmd_music)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, SchemaError, ValueError) as exc:
        print(f"hankelsr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"hankelsr {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
