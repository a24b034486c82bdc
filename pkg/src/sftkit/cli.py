"""Command-line interface.

Exit status: 0 = verified/success, 1 = refuted (witness printed),
2 = budget or usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .geometry import cube
from .patterns import Pattern, iter_assignments
from .sft import BudgetExceeded, entropy_estimate
from .mixing import (check_block_gluing, check_g_extension, check_safe_symbol,
                     check_ssf, first_offenders, subshapes_of_cube)
from .conjugacy import transport_forbidden
from .sft import SftSpec
from .factor import (MarkerParams, StageFillError, SurjectivityHarness,
                     run_staged_fill, verify_factor_window)
from . import formats
from .formats import FormatError


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _emit_report(report, out_path=None) -> int:
    text = formats.print_report(report)
    sys.stdout.write(text)
    if out_path:
        _write(out_path, text)
    return 0 if report.ok else 1


def _cmd_props(args) -> int:
    spec = formats.parse_sft_spec(_read(args.spec))
    if args.check == "safe":
        if args.symbol is None:
            raise FormatError("props safe needs --symbol")
        report = check_safe_symbol(spec, args.symbol, args.bound, args.radius)
    elif args.check == "ssf":
        report = check_ssf(spec)
    elif args.check == "offenders":
        offs = first_offenders(spec, args.bound, args.radius)
        print(f"first offenders (diameter <= {args.bound}, radius {args.radius}): {len(offs)}")
        for w in offs:
            print(formats.print_pattern_file(w, spec.alphabet, spec.dim), end="")
        return 0
    elif args.check == "gext":
        shapes = subshapes_of_cube(args.bound, spec.dim)
        report = check_g_extension(spec, args.g, shapes, args.radius)
    elif args.check == "gluing":
        window = args.window or (2 * args.bound + args.g + 3)
        report = check_block_gluing(spec, args.g, args.bound, window, args.radius)
    else:
        raise FormatError(f"unknown property check {args.check!r}")
    return _emit_report(report, args.out)


def _cmd_lang_count(args) -> int:
    spec = formats.parse_sft_spec(_read(args.spec))
    count, h = entropy_estimate(spec, args.side, args.radius)
    print(f"count {count}")
    print(f"h_{args.side} {h:.6f}")
    return 0


def _cmd_transport(args) -> int:
    spec = formats.parse_sft_spec(_read(args.forbidden))
    code = formats.parse_code(_read(args.inverse_code))
    if code.target.symbols != spec.alphabet.symbols:
        raise FormatError("the inverse code must decode onto the forbidden "
                          "list's alphabet")
    transported = transport_forbidden(spec.forbidden, code)
    out_spec = SftSpec(code.source, spec.dim, transported)
    text = formats.print_sft_spec(out_spec)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_factor_run(args) -> int:
    spec = formats.parse_sft_spec(_read(args.target_spec))
    layout = formats.parse_layout(_read(args.layout))
    codec = formats.parse_codec(_read(args.codec)) if args.codec else None
    star = args.star
    if star is None:
        from .sft import fixed_point_symbols
        fixed = fixed_point_symbols(spec)
        if not fixed:
            raise FormatError("target spec has no fixed point; give --star")
        star = fixed[0]
    try:
        output, trace = run_staged_fill(layout, spec, star, codec=codec)
    except StageFillError as e:
        print(f"refuted: {e}", file=sys.stderr)
        return 1
    _write(args.out, formats.print_pattern_file(output, spec.alphabet, spec.dim))
    os.makedirs(args.snapshots, exist_ok=True)
    formats.write_snapshots(trace, args.snapshots)
    _write(os.path.join(args.snapshots, "trace.json"), formats.trace_to_json(trace))
    _write(os.path.join(args.snapshots, "output.pat"),
           formats.print_pattern_file(output, spec.alphabet, spec.dim))
    _write(os.path.join(args.snapshots, "target-spec.sft"), formats.print_sft_spec(spec))
    _write(os.path.join(args.snapshots, "layout.txt"), formats.print_layout(layout))
    print(f"filled {layout.window.sides[0]}x{layout.window.sides[1]} window, "
          f"{len(layout.zones)} zones; snapshots in {args.snapshots}")
    return 0


def _cmd_factor_verify(args) -> int:
    trace = formats.trace_from_json(_read(os.path.join(args.run, "trace.json")))
    output, _, _ = formats.parse_pattern_file(_read(os.path.join(args.run, "output.pat")))
    spec = formats.parse_sft_spec(_read(os.path.join(args.run, "target-spec.sft")))
    layout = formats.parse_layout(_read(os.path.join(args.run, "layout.txt")))
    report = verify_factor_window(output, trace, spec, layout)
    return _emit_report(report, None)


def _cmd_factor_surject(args) -> int:
    spec = formats.parse_sft_spec(_read(args.target_spec))
    codec = formats.parse_codec(_read(args.codec))
    star = args.star
    if star is None:
        from .sft import fixed_point_symbols
        fixed = fixed_point_symbols(spec)
        if not fixed:
            raise FormatError("target spec has no fixed point; give --star")
        star = fixed[0]
    params = MarkerParams.for_synthetic(g=args.g, p=args.p, k=args.k, m=args.m)
    harness = SurjectivityHarness(spec, codec, params, star)
    total = 0
    missed = []
    for target in iter_assignments(cube(args.block_side, 2), spec.alphabet):
        total += 1
        result = harness.attempt(target)
        if not result.achieved:
            missed.append(target)
    print(f"targets achieved: {total - len(missed)}/{total} "
          f"on a {args.block_side}x{args.block_side} block")
    if missed:
        print("first unreachable target:")
        print(formats.print_pattern_file(missed[0], spec.alphabet, 2), end="")
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sftkit")
    sub = ap.add_subparsers(dest="command", required=True)

    props = sub.add_parser("props", help="run a property checker")
    props.add_argument("check", choices=["safe", "ssf", "offenders", "gext", "gluing"])
    props.add_argument("--spec", required=True)
    props.add_argument("--symbol")
    props.add_argument("--g", type=int, default=0)
    props.add_argument("--bound", type=int, default=2)
    props.add_argument("--radius", type=int, default=1)
    props.add_argument("--window", type=int)
    props.add_argument("--out")
    props.set_defaults(fn=_cmd_props)

    lang = sub.add_parser("lang", help="language operations")
    lang_sub = lang.add_subparsers(dest="lang_command", required=True)
    count = lang_sub.add_parser("count")
    count.add_argument("--spec", required=True)
    count.add_argument("--side", type=int, required=True)
    count.add_argument("--radius", type=int, default=0)
    count.set_defaults(fn=_cmd_lang_count)

    tr = sub.add_parser("transport", help="transport a forbidden list through a conjugacy")
    tr.add_argument("--forbidden", required=True)
    tr.add_argument("--inverse-code", required=True)
    tr.add_argument("--out")
    tr.set_defaults(fn=_cmd_transport)

    factor = sub.add_parser("factor", help="staged factor-map operations")
    fsub = factor.add_subparsers(dest="factor_command", required=True)

    run = fsub.add_parser("run")
    run.add_argument("--target-spec", required=True)
    run.add_argument("--layout", required=True)
    run.add_argument("--codec")
    run.add_argument("--out", required=True)
    run.add_argument("--snapshots", required=True)
    run.add_argument("--star")
    run.set_defaults(fn=_cmd_factor_run)

    ver = fsub.add_parser("verify")
    ver.add_argument("--run", required=True)
    ver.set_defaults(fn=_cmd_factor_verify)

    sur = fsub.add_parser("surject")
    sur.add_argument("--target-spec", required=True)
    sur.add_argument("--codec", required=True)
    sur.add_argument("--block-side", type=int, default=3)
    sur.add_argument("--star")
    sur.add_argument("--g", type=int, default=1)
    sur.add_argument("--p", type=int, default=2)
    sur.add_argument("--k", type=int, default=8)
    sur.add_argument("--m", type=int, default=6)
    sur.set_defaults(fn=_cmd_factor_surject)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (FormatError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
