"""Command line front end: ``dgatlas run <scene.json>``."""

from __future__ import annotations

import argparse
import json
import sys
import time
import zlib
from pathlib import Path

from .checks import BY_NAME, REGISTRY, Context, Failure, Skip, list_checks, run_sample
from .lcg import LCG
from .scene import SceneError, build_context, parse_scene_text, validate_scene

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def check_seed(seed: int, name: str) -> int:
    """Per-check stream seed, so adding or removing checks leaves the others unchanged."""
    return LCG(seed ^ zlib.crc32(name.encode())).fork()


def _run_one(ctx: Context, name: str, seed: int, samples: int, scene: dict) -> dict:
    spec = BY_NAME[name]
    n = 1 if spec.deterministic else samples
    rng = LCG(check_seed(seed, name))
    start = time.perf_counter()
    entry = {"name": name, "module": spec.module, "status": "pass", "samples_run": 0}
    for _ in range(n):
        sample_seed = rng.fork()
        try:
            fail = run_sample(ctx, name, sample_seed)
        except Skip as e:
            entry.update(status="skipped", reason=str(e))
            break
        except Exception as e:  # a crash inside a check is reported as a failing sample
            fail = _crash(e)
        entry["samples_run"] += 1
        if fail is not None:
            entry["status"] = "fail"
            entry["counterexample"] = {"check": name, "sample_seed": sample_seed, "input": fail.input,
                                       "lhs": fail.lhs, "rhs": fail.rhs, "scene": scene}
            break
    entry["seconds"] = round(time.perf_counter() - start, 4)
    return entry


def _crash(e: Exception) -> Failure:
    return Failure("exception during check", f"{type(e).__name__}: {e}", "no exception")


def run_scene(scene: dict, ctx: Context, names: list[str], seed: int, path: str | None) -> dict:
    samples = ctx.bounds.samples
    entries = [_run_one(ctx, n, seed, samples, scene) for n in sorted(names)]
    summary = {k: sum(1 for e in entries if e["status"] == k) for k in ("pass", "fail", "skipped")}
    return {"scene": path, "seed": seed, "samples": samples, "checks": entries, "summary": summary}


def replay(payload: dict) -> dict:
    """Rerun the sample(s) recorded in a counterexample or in a whole report."""
    cexs = [payload] if "sample_seed" in payload else [
        e["counterexample"] for e in payload.get("checks", []) if "counterexample" in e]
    entries = []
    for cex in cexs:
        scene = cex["scene"]
        validate_scene(scene)
        ctx = build_context(scene)
        start = time.perf_counter()
        try:
            fail = run_sample(ctx, cex["check"], cex["sample_seed"])
        except Skip as e:
            entries.append({"name": cex["check"], "module": BY_NAME[cex["check"]].module, "status": "skipped",
                            "samples_run": 0, "reason": str(e), "seconds": 0.0})
            continue
        except Exception as e:
            fail = _crash(e)
        entry = {"name": cex["check"], "module": BY_NAME[cex["check"]].module,
                 "status": "pass" if fail is None else "fail", "samples_run": 1}
        if fail is not None:
            entry["counterexample"] = {"check": cex["check"], "sample_seed": cex["sample_seed"], "input": fail.input,
                                       "lhs": fail.lhs, "rhs": fail.rhs, "scene": scene}
        entry["seconds"] = round(time.perf_counter() - start, 4)
        entries.append(entry)
    entries.sort(key=lambda e: e["name"])
    summary = {k: sum(1 for e in entries if e["status"] == k) for k in ("pass", "fail", "skipped")}
    seed = cexs[0]["scene"].get("seed", 0) if cexs else 0
    return {"scene": None, "seed": seed, "samples": 1, "replay": True, "checks": entries, "summary": summary}


def _emit(report: dict, out: str | None):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dgatlas", description="Exact identity checks on polydifferential operators.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the checks named in a scene file")
    r.add_argument("scene", nargs="?", help="scene JSON file")
    r.add_argument("--out", help="write the JSON report here instead of stdout")
    r.add_argument("--seed", type=int, help="override the scene seed")
    r.add_argument("--replay", metavar="FILE", help="rerun a counterexample (or every counterexample of a report)")
    r.add_argument("--list-checks", action="store_true", help="print the check registry and exit")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_PASS
    if args.list_checks:
        for spec in REGISTRY:
            print(f"{spec.name}\t{spec.module}")
        return EXIT_PASS
    try:
        if args.replay:
            payload = json.loads(Path(args.replay).read_text())
            report = replay(payload)
        else:
            if not args.scene:
                print("error: a scene file is required", file=sys.stderr)
                return EXIT_USAGE
            raw = Path(args.scene).read_text()
            scene = parse_scene_text(raw)
            if args.seed is not None:
                scene = dict(scene, seed=args.seed)
            names = scene.get("checks") or list_checks()
            unknown = [n for n in names if n not in BY_NAME]
            if unknown:
                print(f"error: unknown check(s) {', '.join(unknown)}; available: {', '.join(list_checks())}",
                      file=sys.stderr)
                return EXIT_USAGE
            ctx = build_context(scene, raw)
            report = run_scene(scene, ctx, names, scene.get("seed", 0), args.scene)
    except SceneError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    _emit(report, args.out)
    return EXIT_FAIL if report["summary"]["fail"] else EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
