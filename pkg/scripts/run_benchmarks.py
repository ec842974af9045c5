"""Solve the five built-in cases and print a comparison table."""
import argparse
import time

from canonical_qcqp.benchmarks import BENCHMARK_IDS, run_all
from canonical_qcqp.recovery import SolveSettings
from canonical_qcqp.sdp import IpmSettings


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("ids", nargs="*", default=list(BENCHMARK_IDS))
    ap.add_argument("--max-iter", type=int, default=200)
    args = ap.parse_args()
    settings = SolveSettings(ipm=IpmSettings(max_iter=args.max_iter))
    t0 = time.perf_counter()
    results = run_all(settings, ids=args.ids)
    print(f"{'id':4} {'path':24} {'objective':>20} {'expected':>14} {'viol':>9} {'gap':>10} ok")
    for res in results:
        r, c = res.report, res.case
        if r is None:
            print(f"{c.id:4} error: {res.error}")
            continue
        print(
            f"{c.id:4} {r.path.value:24} {r.objective:20.10f} {c.expected_objective:14.6g} "
            f"{r.max_violation:9.2e} {r.gap:10.3e} {'yes' if res.objective_ok else 'no'}"
        )
    print(f"total {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
