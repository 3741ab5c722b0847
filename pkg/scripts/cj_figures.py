"""Coherent jammer in clutter: Pd|3 versus JCNR and the 3 x 3 classification table.

The target SNR is held at 20 dB while the jammer-to-clutter ratio is swept.
"""

from _common import detectors, parse_args, run

RULES = [("half_p", None), ("full_p", None), ("gic", 2.0), ("bic_t", None), ("bic_k", None)]


def main():
    args = parse_args(__doc__, "out/cj")
    run(args, detectors(RULES, (False, True)), scenario="cj", sweep="jcnr:0:30:2", snr_db=20.0, jcnr_db=20.0)


if __name__ == "__main__":
    main()
