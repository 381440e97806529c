"""Run every preset once and print a compact table of bound ratios."""

import argparse

from orthostab.harness.cli import run_suite


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/suite")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()
    reports, ok = run_suite(args.out, args.seed, jobs=args.jobs)
    print(f"{'preset':<12} {'eps_hat':>12} {'worst ratio':>12}  verdict")
    for r in reports:
        c = r.certificate
        ratios = [b["ratio"] for b in c["bounds"] if b["ratio"] is not None]
        print(f"{r.config['preset']:<12} {c['eps_hat']:>12.4g} {max(ratios):>12.4g}  {'pass' if r.passed else 'FAIL'}")
    print(f"reports in {args.out}; overall {'pass' if ok else 'FAIL'}")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
