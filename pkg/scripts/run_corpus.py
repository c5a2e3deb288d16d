"""Run every operation over the corpus and print a verdict table.

    python scripts/run_corpus.py [--corpus DIR]
"""
from __future__ import annotations

import argparse
import itertools
import time
from dataclasses import dataclass
from pathlib import Path

from sociable import Manager, load
from sociable.composition import CompositionError, IncompatibleError, compose
from sociable.parser import parse_expr
from sociable.refinement import RefinementError, refines
from sociable.safety import check_optimistic, check_pessimistic


@dataclass
class Config:
    corpus: Path = Path(__file__).resolve().parent.parent / "corpus"


def rows_for(path: Path):
    mods = load(path.read_text(), path.name)
    for p, q in itertools.permutations(mods.values(), 2):
        t0 = time.perf_counter()
        try:
            c = compose(p, q)
            verdict = f"COMPATIBLE ({c.state_count} states)"
        except IncompatibleError:
            verdict = "INCOMPATIBLE"
        except CompositionError as exc:
            verdict = f"n/a: {exc}"
        yield path.name, "compose", f"{p.name} | {q.name}", verdict, time.perf_counter() - t0
    for p, q in itertools.product(mods.values(), repeat=2):
        t0 = time.perf_counter()
        try:
            v = refines(p, q)
            verdict = "REFINES" if v else f"NO ({v.condition})"
        except RefinementError:
            verdict = "n/a: globals differ"
        yield path.name, "refine", f"{p.name} <= {q.name}", verdict, time.perf_counter() - t0
    for iface in mods.values():
        for v in iface.variables:
            phi = parse_expr(f"{v.name} = {v.domain.format(v.domain.values()[0])}")
            t0 = time.perf_counter()
            m = Manager()
            pess = check_pessimistic(iface, phi, m).safe
            opt = check_optimistic(iface, phi, m).safe
            verdict = f"pess={'SAFE' if pess else 'UNSAFE'} opt={'SAFE' if opt else 'UNSAFE'}"
            yield (path.name, "check", f"{iface.name}: {v.name} stays initial", verdict,
                   time.perf_counter() - t0)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", type=Path, default=Config.corpus)
    cfg = Config(**vars(ap.parse_args(argv)))
    for path in sorted(cfg.corpus.glob("*.si")):
        for file, op, subject, verdict, secs in rows_for(path):
            print(f"{file:20} {op:8} {subject:36} {verdict:32} {secs * 1000:8.1f} ms")


if __name__ == "__main__":
    main()
