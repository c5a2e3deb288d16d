"""Scaling experiment: compose a ring of token-passing stations.

Station ``i`` owns a counter and passes a shared token to station ``i+1``
by emitting ``pass<i>``; the next station listens and accepts only updates
handing the token to itself. Composing the ring left to right and checking
mutual exclusion exercises every symbolic operation; the script reports
BDD sizes, fixpoint iterations and wall time per ring size.

    python scripts/scaling.py --max-stations 5 --counter 3
"""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

from sociable import Manager, compile_interface, validate
from sociable.composition import build_composite, product
from sociable.parser import parse, parse_expr
from sociable.safety import check_optimistic, check_pessimistic


@dataclass
class Config:
    min_stations: int = 2
    max_stations: int = 5
    counter: int = 3


def station(i: int, n: int, counter: int) -> str:
    nxt = (i + 1) % n
    prev = (i - 1) % n
    return f"""
module S{i}:
  var c{i}: [0..{counter}]
  global var tok: [0..{n - 1}]
  output work{i} {{ tok = {i} & c{i} < {counter} ==> c{i}' := c{i} + 1; }}
  output pass{i} {{ tok = {i} ==> tok' := {nxt}, c{i}' := 0; }}
  input pass{prev} {{ tok' = {i} ==> ; }}
  init: c{i} = 0 & tok = 0
"""


def run(n: int, cfg: Config) -> dict:
    mods = [validate(m) for m in parse("".join(station(i, n, cfg.counter) for i in range(n)))]
    m = Manager()
    t0 = time.perf_counter()
    acc = mods[0]
    iterations = 0
    for nxt in mods[1:]:
        prod = product(compile_interface(acc, m), compile_interface(nxt, m))
        acc = build_composite(prod).interface
        iterations += prod.arena.iterations.get("total", 0)
    t_compose = time.perf_counter() - t0
    phi = parse_expr(" | ".join(f"tok = {i}" for i in range(n)))
    t1 = time.perf_counter()
    pess = check_pessimistic(acc, phi, m)
    opt = check_optimistic(acc, phi, m)
    t_check = time.perf_counter() - t1
    return {"stations": n, "states": acc.state_count, "nodes": len(m),
            "iterations": iterations + pess.iterations + opt.iterations,
            "compose_ms": t_compose * 1000, "check_ms": t_check * 1000,
            "safe": pess.safe and opt.safe}


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-stations", type=int, default=Config.min_stations)
    ap.add_argument("--max-stations", type=int, default=Config.max_stations)
    ap.add_argument("--counter", type=int, default=Config.counter)
    cfg = Config(**vars(ap.parse_args(argv)))
    print(f"{'n':>3} {'states':>10} {'nodes':>8} {'iters':>6} {'compose ms':>11} "
          f"{'check ms':>9} safe")
    for n in range(cfg.min_stations, cfg.max_stations + 1):
        r = run(n, cfg)
        print(f"{r['stations']:>3} {r['states']:>10} {r['nodes']:>8} {r['iterations']:>6} "
              f"{r['compose_ms']:>11.1f} {r['check_ms']:>9.1f} {r['safe']}")


if __name__ == "__main__":
    main()
