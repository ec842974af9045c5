"""Write every built-in case to benchmarks/<id>.json in the CLI problem schema."""
import argparse
from pathlib import Path

from canonical_qcqp.benchmarks import BENCHMARK_IDS, load_case
from canonical_qcqp.io import read_problem, write_problem


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=Path(__file__).resolve().parents[1] / "benchmarks", type=Path)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for cid in BENCHMARK_IDS:
        case = load_case(cid)
        path = args.out / f"{cid}.json"
        write_problem(case.problem, path)
        assert read_problem(path) == case.problem, f"{cid} does not round-trip"
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
