"""Range-spread target: Pd of the true window, window histograms and RMSE versus SINR.

The target occupies bins 4 and 5 of a 10-bin window; 55 contiguous windows compete.
"""

from _common import detectors, parse_args, run

RULES = [("half_p", None), ("full_p", None), ("gic", 15.0), ("bic_t", None), ("bic_k", None)]


def main():
    args = parse_args(__doc__, "out/rst")
    run(args, detectors(RULES), scenario="rst", sweep="sinr:0:30:2", sinr_db=20.0)


if __name__ == "__main__":
    main()
