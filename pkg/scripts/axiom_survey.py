"""Axiom check over a grid of norms: which (relation, norm) pairs form an orthogonality space numerically."""

import argparse

from orthostab.orthogonality import OrthogonalityRelation, check_axioms
from orthostab.spaces import NormedSpace

CASES = [
    ("inner_product", dict(norm_kind="euclidean")),
    ("inner_product", dict(norm_kind="weighted_euclidean", weights=(1.0, 2.0, 5.0))),
    ("birkhoff_james", dict(norm_kind="euclidean")),
    ("birkhoff_james", dict(norm_kind="p_norm", p=1.5)),
    ("birkhoff_james", dict(norm_kind="p_norm", p=3.0)),
    ("birkhoff_james", dict(norm_kind="p_norm", p=4.0)),
    ("trivial", dict(norm_kind="euclidean")),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=300)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    print(f"{'relation':<15} {'norm':<20} O1   O2   O3   O4 rate  max Thales residual")
    for kind, norm in CASES:
        dim = len(norm.get("weights", ())) or 2
        rel = OrthogonalityRelation(kind, NormedSpace(dim, **norm))
        rep = check_axioms(rel, args.seed, args.samples)
        label = norm["norm_kind"] + (f" p={norm['p']}" if "p" in norm else "")
        flags = " ".join("ok  " if v else "FAIL" for v in (rep.o1_pass, rep.o2_pass, rep.o3_pass))
        print(f"{kind:<15} {label:<20} {flags} {rep.o4_pass_rate:7.3f}  {rep.max_thales_residual:.2e}")


if __name__ == "__main__":
    main()
