"""Command-line entry point: ``qd-discord run|validate|kernels``."""
from __future__ import annotations

import argparse
import sys

from .quadrature import QuadratureNotConverged
from .scenario import (
    PRESETS,
    ConfigParseError,
    describe,
    load_config,
    run_kernels,
    run_scenario,
    tomllib,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3
EXIT_IO = 4


def parse_override(text: str) -> dict:
    """``section.key=value`` -> nested dict; the value is read as a TOML value."""
    if "=" not in text:
        raise ConfigParseError(f"override {text!r} is not of the form section.key=value", "--set")
    path, value = text.split("=", 1)
    parts = [p.strip() for p in path.split(".") if p.strip()]
    if len(parts) < 2:
        raise ConfigParseError(f"override {text!r} needs a section and a key", "--set")
    try:
        parsed = tomllib.loads(f"v = {value.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        parsed = value.strip()           # bare words such as inf
    out: dict = {}
    node = out
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = parsed
    return out


def _merge(a: dict, b: dict) -> dict:
    for k, v in b.items():
        if isinstance(v, dict) and isinstance(a.get(k), dict):
            _merge(a[k], v)
        else:
            a[k] = v
    return a


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qd-discord",
                                 description="Discord and entanglement of two dephasing quantum-dot qubits.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", nargs="?", help="TOML configuration file")
        p.add_argument("--preset", choices=sorted(PRESETS), help="built-in figure settings")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override one configuration value (repeatable)")

    run = sub.add_parser("run", help="propagate and write trajectory CSVs")
    common(run)
    run.add_argument("--with-oracle", action="store_true", help="add the brute-force D_oracle column")
    run.add_argument("--out", help="output directory (overrides output.dir)")
    run.add_argument("--threads", type=int, default=1)

    val = sub.add_parser("validate", help="resolve and print a configuration")
    common(val)

    ker = sub.add_parser("kernels", help="write kernel-only CSVs")
    common(ker)
    ker.add_argument("--out", help="output directory (overrides output.dir)")
    ker.add_argument("--threads", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides: dict = {}
        for item in args.set:
            _merge(overrides, parse_override(item))
        if args.config is None and args.preset is None and args.command != "validate":
            raise ConfigParseError("give a configuration file or --preset")
        scenarios = load_config(args.config, preset=args.preset, overrides=overrides or None)

        if args.command == "validate":
            for i, cfg in enumerate(scenarios):
                if i:
                    print()
                print("\n".join(describe(cfg)))
            return EXIT_OK

        threads = max(1, args.threads)
        for cfg in scenarios:
            if args.command == "run":
                results = run_scenario(cfg, with_oracle=args.with_oracle, threads=threads, out_dir=args.out)
            else:
                results = run_kernels(cfg, threads=threads, out_dir=args.out)
            for r in results:
                print(r.path)
        return EXIT_OK
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureNotConverged as exc:
        print(f"quadrature did not converge: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
