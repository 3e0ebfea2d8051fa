"""Monte-Carlo power and size of the lack-of-fit test.

Data are drawn from the ballistic model MT = a + b*sqrt(D) and fitted with the
ID model; the rejection rate at p < 0.05 is the power. Drawing from the ID
model instead gives the size. The frozen noise level lives in
``fittsbench.stats.simulate.LackOfFitDesign``. Run:

    python scripts/calibrate_lack_of_fit.py [--runs 100]
"""
import argparse
import dataclasses

from fittsbench.stats.simulate import LackOfFitDesign, lack_of_fit_rejections


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=100)
    args = ap.parse_args()
    print("sigma   power(sqrtD data)   size(ID data)")
    for sigma in (0.005, 0.01, 0.02, 0.03, 0.05):
        design = dataclasses.replace(LackOfFitDesign(), sigma=sigma)
        power = lack_of_fit_rejections("ballistic", args.runs, design) / args.runs
        size = lack_of_fit_rejections("fitts", args.runs, design) / args.runs
        print(f"{sigma:<7} {power:<19.2f} {size:.2f}")


if __name__ == "__main__":
    main()
