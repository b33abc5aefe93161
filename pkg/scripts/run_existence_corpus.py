"""Build the random corpus, correct the flat connection on each chart and verify it.

    python3 scripts/run_existence_corpus.py --count 54 --seed 2024
"""

import argparse
import time

from superfedosov.corpus import CorpusConfig
from superfedosov.fedosov import extract_n, fedosov_correct, n_identity_residuals, verify_symplectic
from superfedosov.supergeometry import Connection


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=54)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--degree", type=int, default=2)
    args = ap.parse_args()

    config = CorpusConfig(count=args.count, seed=args.seed, degree=args.degree)
    failed = 0
    start = time.perf_counter()
    for inst in config.instances():
        t0 = time.perf_counter()
        flat = Connection.flat(inst.chart)
        N = extract_n(flat, inst.omega)
        anti, cyclic = n_identity_residuals(N, inst.omega)
        ids_ok = all(r.is_zero() for r in (*anti.values(), *cyclic.values()))
        rep = verify_symplectic(fedosov_correct(flat, inst.omega, N), inst.omega)
        ok = ids_ok and rep.passed
        failed += not ok
        print(f"{'ok  ' if ok else 'FAIL'} {inst.label:32s} {time.perf_counter() - t0:6.2f}s")
    print(f"{config.count} charts, {failed} failed, {time.perf_counter() - start:.1f}s")
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
