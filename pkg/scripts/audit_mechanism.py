"""Compare exact and sampled privacy loss for a synthesized mechanism.

    python3 scripts/audit_mechanism.py graphs/categorical_chain.json --samples 200000
"""

import argparse

from profilepriv.io import load_graph
from profilepriv.mechanisms import smooth_categorical, smooth_one_bit
from profilepriv.verifier import verify_exact, verify_monte_carlo


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("graph")
    parser.add_argument("--samples", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    graph = load_graph(args.graph)
    mech = smooth_one_bit(graph) if graph.d == 2 else smooth_categorical(graph)
    exact = verify_exact(graph, mech)
    est = verify_monte_carlo(graph, mech, args.samples, args.seed)
    print(f"epsilon {graph.epsilon:.6g}")
    print(f"{'edge':<16}{'exact':>12}{'estimate':>12}  95% interval")
    for e, m in zip(exact.per_edge, est.per_edge):
        lo, hi = m.interval
        print(f"{'-'.join(e.edge):<16}{e.max_abs_log_ratio:>12.6f}{m.max_abs_log_ratio:>12.6f}  [{lo:.4f}, {hi:.4f}]")
    print(f"overall exact {exact.overall:.6f}, estimate {est.overall:.6f}, exact passes: {exact.passed}")


if __name__ == "__main__":
    main()
