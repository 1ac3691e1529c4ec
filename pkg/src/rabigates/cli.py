"""``rabigates`` command-line entry point.

Exit codes: 0 success, 1 invariant failure (verify), 2 configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import SCHEMA, build_config, load_config_file, parse_list
from .errors import ConfigError
from .experiments import run_scenario

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG = 0, 1, 2

_COMMANDS = {
    "convergence": ("convergence", "fidelity, purity and success probability versus R"),
    "wigner-cuts": ("wigner_cuts", "ideal vs engineered Wigner cross sections"),
    "region-map": ("region_map", "(alpha, chi) grid of threshold passes for coherent inputs"),
    "quartic-study": ("quartic_study", "quartic gate with optimised squeezing correction"),
    "verify": ("verify", "run the invariant suite; nonzero exit on any failure"),
}

# flag -> config key; list kinds are given comma separated
_OVERRIDES = ("chi", "rounds", "alpha", "dim", "variant", "ratio", "correction", "order", "out", "seed", "zeta",
              "k", "guard", "leak_tol", "cut_x", "trials", "manifest")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="flat TOML file of config keys")
    for key in _OVERRIDES:
        kind, desc = SCHEMA[key]
        metavar = "LIST" if kind.endswith("_list") else kind.upper()
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, metavar=metavar, help=desc)
    conv = p.add_mutually_exclusive_group()
    conv.add_argument("--ground-minus-z", dest="ground_is_plus_z", action="store_false", default=None,
                      help="take the ancilla ground state as the -1 eigenvector of sigma_z")
    conv.add_argument("--ground-plus-z", dest="ground_is_plus_z", action="store_true",
                      help="take the ancilla ground state as the +1 eigenvector of sigma_z (default)")
    p.add_argument("--no-optimize-zeta", dest="optimize_zeta", action="store_false", default=None,
                   help="use --zeta as given instead of searching for it")
    p.add_argument("--allow-strong", dest="allow_strong", action="store_true", default=None,
                   help="permit pulse strengths above 0.5")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rabigates", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in _COMMANDS.items():
        _add_common(sub.add_parser(name, help=help_text, description=help_text))
    return parser


def _convert(key: str, raw: str):
    kind = SCHEMA[key][0]
    if kind.endswith("_list"):
        return parse_list(raw, kind)
    try:
        return {"int": int, "float": float, "str": str}[kind](raw)
    except ValueError:
        raise ConfigError(f"--{key.replace('_', '-')}: cannot parse {raw!r} as {kind}") from None


def config_from_args(args: argparse.Namespace):
    scenario = _COMMANDS[args.command][0]
    values = load_config_file(args.config) if args.config else {}
    for key in _OVERRIDES:
        raw = getattr(args, key)
        if raw is not None:
            values[key] = _convert(key, raw)
    for key in ("ground_is_plus_z", "optimize_zeta", "allow_strong"):
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)
    return build_config(scenario, values)


def _report(result) -> None:
    if result.scenario == "verify":
        for row in result.rows:
            mark = "PASS" if row["passed"] else "FAIL"
            line = f"{mark}  {row['check']:<40s} residual={row['residual']:.3e}  tol={row['tolerance']:.1e}"
            if row["detail"]:
                line += f"  ({row['detail']})"
            print(line)
        print("all invariants pass" if result.ok else "invariant failures present")
    for path in result.files:
        print(f"wrote {path}")
    if result.manifest is not None:
        print(f"wrote {result.manifest}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"rabigates: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = run_scenario(cfg)
    _report(result)
    if result.scenario == "verify" and not result.ok:
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
