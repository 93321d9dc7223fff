"""Command-line front door: ``cliffobs run <preset-or-file> [options]``.

Exit status: 0 when no check reports an obstruction, 2 when at least one does,
1 for unreadable or invalid input.  Search results are evidence and never
change the exit status.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import DimensionError, PresetParseError, RingValidationError, SearchRefused
from .obstructions import CHECKS, full_report
from .presets import parse_preset
from .ring import GradedRing
from .search import SearchConfig, SearchFailure, normalize_mode, search

EXIT_OK, EXIT_INPUT, EXIT_OBSTRUCTION = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    ring: GradedRing
    checks: list | None = None
    search: SearchConfig | None = None
    format: str = "human"
    seed: int = 0


def _load_ring(source) -> GradedRing:
    if isinstance(source, dict):
        return GradedRing.from_dict(source)
    return parse_preset(str(source))


def _read_input(path: str):
    """Return ``(ring, run_config_dict)`` from a ring file or a run-config file."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object")
    if "ring" in data:
        return _load_ring(data["ring"]), data
    return GradedRing.from_dict(data), {}


def build_config(args) -> RunConfig:
    target = args.target
    if args.input and args.preset:
        raise InputError("give either --input or --preset, not both")
    if target and (args.input or args.preset):
        raise InputError("positional input conflicts with --input/--preset")
    file_cfg: dict = {}
    if args.input or (target and Path(target).is_file()):
        ring, file_cfg = _read_input(args.input or target)
    elif args.preset or target:
        ring = parse_preset(args.preset or target)
    else:
        raise InputError("no input: give a preset expression or --input <file>")

    seed = args.seed if args.seed is not None else int(file_cfg.get("seed", 0))
    if not 0 <= seed < 2 ** 64:
        raise InputError("seed must be an unsigned 64-bit integer")

    checks = file_cfg.get("checks")
    if args.checks:
        checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    if checks is not None:
        unknown = [c for c in checks if c not in CHECKS]
        if unknown:
            raise InputError(f"unknown checks {unknown}; available: {', '.join(CHECKS)}")

    search_cfg = None
    block = dict(file_cfg.get("search") or {})
    if args.search:
        block["mode"] = args.search
    if block or args.search:
        for key in ("restarts", "iterations", "workers"):
            value = getattr(args, key)
            if value is not None:
                block[key] = value
        try:
            block["mode"] = normalize_mode(block.get("mode", "wedge+star"))
        except ValueError as exc:
            raise InputError(str(exc)) from None
        search_cfg = SearchConfig.from_dict(block, seed=seed)

    fmt = args.format or file_cfg.get("format", "human")
    if fmt not in ("human", "json"):
        raise InputError(f"unknown format {fmt!r}")
    return RunConfig(ring, checks, search_cfg, fmt, seed)


def _search_block(ring: GradedRing, cfg: SearchConfig) -> dict:
    block = {"config": cfg.to_dict()}
    try:
        result = search(ring, mode=cfg.mode, restarts=cfg.restarts, iterations=cfg.iterations,
                        seed=cfg.seed, residual_threshold=cfg.residual_threshold,
                        margin_threshold=cfg.margin_threshold, local=cfg.local, workers=cfg.workers)
    except SearchRefused as exc:
        block.update(status="refused", certifying=False, reason=str(exc))
        return block
    if isinstance(result, SearchFailure):
        block.update(result.to_dict())
        if block["best_residual"] == float("inf"):
            block["best_residual"] = None
    else:
        block.update(status="certificate", certifying=True, certificate=result.to_dict())
    return block


def execute(cfg: RunConfig) -> tuple[int, dict]:
    """Run the checks (and optional search); returns ``(exit code, report dict)``."""
    report = full_report(cfg.ring, cfg.checks)
    out = report.to_dict()
    out["ring"] = {"name": cfg.ring.name, "n": cfg.ring.n, "betti": list(cfg.ring.betti)}
    del out["n"]
    out["overall"]["obstruction"] = report.any_obstruction
    out["seed"] = cfg.seed
    if cfg.search is not None:
        out["search"] = _search_block(cfg.ring, cfg.search)
    return (EXIT_OBSTRUCTION if report.any_obstruction else EXIT_OK), out


def _summary(witness: dict) -> str:
    parts = []
    for key, value in witness.items():
        if isinstance(value, (list, dict)) and len(json.dumps(value)) > 40:
            parts.append(f"{key}=[{len(value)} entries]")
        else:
            parts.append(f"{key}={json.dumps(value)}")
    return ", ".join(parts)


def format_human(out: dict) -> str:
    ring = out["ring"]
    lines = [f"ring {ring['name']}  n={ring['n']}  betti={tuple(ring['betti'])}", ""]
    width = max([len(c["id"]) for c in out["checks"]] + [5])
    lines.append(f"{'check':<{width}}  {'verdict':<12}  witness")
    lines.append(f"{'-' * width}  {'-' * 12}  {'-' * 7}")
    for c in out["checks"]:
        lines.append(f"{c['id']:<{width}}  {c['verdict']:<12}  {_summary(c['witness'])}")
    lines.append("")
    for key, value in out["overall"].items():
        if key == "obstruction":
            lines.append(f"obstruction: {'yes' if value else 'none found'}")
            continue
        # a clear check is absence of evidence, never a positive claim
        shown = "n/a" if value is None else ("no obstruction found" if value else "ruled out")
        lines.append(f"{key.replace('_', ' ')}: {shown}")
    lines.append(f"seed: {out['seed']}")
    if "search" in out:
        s = out["search"]
        lines.append("")
        lines.append(f"search ({s['config']['mode']}): {s['status']}")
        if s["status"] == "certificate":
            cert = s["certificate"]
            lines.append(f"  residual {cert['residuals']['total']:.3e}, margin {cert['residuals']['margin']:.3e}")
            for k, images in cert["phi"].items():
                for i, text in enumerate(images):
                    lines.append(f"  Phi_{k}[{i}] = {text}")
        elif s["status"] == "no_certificate":
            lines.append(f"  best residual {s['best_residual']} after {s['restarts_run']} restarts (evidence only)")
        else:
            lines.append(f"  {s['reason']}")
    return "\n".join(lines)


def dump_json(out: dict) -> str:
    return json.dumps(out, sort_keys=True, indent=2)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cliffobs", description="Obstructions to Clifford and conformal formality.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="check a ring given as a preset expression or JSON file")
    run.add_argument("target", nargs="?", help="preset expression or path to a ring / run-config JSON file")
    run.add_argument("--input", help="ring JSON or run-config JSON file")
    run.add_argument("--preset", help="preset expression, e.g. 'connsum(prod(S2,S2),prod(S2,S2))'")
    run.add_argument("--checks", help=f"comma-separated subset of: {', '.join(CHECKS)}")
    run.add_argument("--search", metavar="MODE", help="also run embedding search: wedge, wedge+star or clifford")
    run.add_argument("--restarts", type=int)
    run.add_argument("--iterations", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--format", choices=("human", "json"))
    run.add_argument("--seed", type=int)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        code, out = execute(cfg)
    except (InputError, PresetParseError, RingValidationError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(dump_json(out) if cfg.format == "json" else format_human(out))
    return code


if __name__ == "__main__":
    sys.exit(main())
