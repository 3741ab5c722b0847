"""Noise-like jammers: Pd|3 versus JNR and classification histograms at 10 dB.

Compares the penalty rules in one- and two-stage form on shared draws.
"""

from _common import detectors, parse_args, run

RULES = [("half_p", None), ("full_p", None), ("gic", 2.0), ("gic", 4.0), ("bic_t", None), ("bic_k", None)]


def main():
    args = parse_args(__doc__, "out/nlj")
    run(args, detectors(RULES, (False, True)), scenario="nlj", sweep="jnr:0:30:2", jnr_db=10.0)


if __name__ == "__main__":
    main()
