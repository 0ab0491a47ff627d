"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat N] [--trials N]

Each kernel runs on identical inputs under both backends; outputs are checked
for bitwise equality before timings are reported. The last row times a whole
fuzz run per backend and requires byte-identical reports.
"""

import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from cohconv import feasibility
from cohconv.kernels import backends
from cohconv.oracle import make_rng, random_ensemble


def tails_case(rng):
    x = rng.dirichlet(np.ones(6), size=2000)
    return lambda k: k.sorted_tails(x)


def min_sums_case(rng):
    w = rng.dirichlet(np.ones(64))
    v = rng.random(64)
    ks = np.linspace(1e-3, 1.0, 2000)
    return lambda k: k.weighted_min_sums(w, v, ks)


def simplex_case(rng):
    src, tgt = random_ensemble(5, 4, rng), random_ensemble(5, 4, rng)
    tab, basis, n_enter, _ = feasibility._standard_form(feasibility.transition_program(src, tgt))

    def run(k):
        t, b = tab.copy(), basis.copy()
        status, it = k.phase1_simplex(t, b, n_enter, feasibility.PIVOT_EPS, 10_000)
        return t, b, status, it

    return run


CASES = {
    "sorted_tails (2000 x 6)": tails_case,
    "weighted_min_sums (64 x 2000)": min_sums_case,
    "phase1_simplex (d=5, m=n=4)": simplex_case,
}


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return a.tobytes() == b.tobytes()
    return a == b


def end_to_end(trials):
    """Wall time of a fuzz run per backend, each in a fresh interpreter."""
    cmd = [sys.executable, "-m", "cohconv", "fuzz", "--d", "4", "--m", "3", "--n", "3", "--trials", str(trials)]
    out = {}
    for name, flag in (("cython", "0"), ("python", "1")):
        env = dict(os.environ, COHCONV_PURE_PYTHON=flag)
        t0 = time.perf_counter()
        r = subprocess.run(cmd, env=env, capture_output=True, check=False)
        out[name] = (time.perf_counter() - t0, r.stdout)
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--trials", type=int, default=1000, help="fuzz trials for the end-to-end row")
    args = parser.parse_args()
    mods = backends()
    if "cython" not in mods:
        print("compiled backend not built; only the Python fallback is available")
    print(f"{'kernel':32s}" + "".join(f"{name:>14s}" for name in sorted(mods)) + f"{'speedup':>10s}")
    for label, make in CASES.items():
        fn = make(make_rng(0))
        outputs = {name: fn(mod) for name, mod in mods.items()}
        if len(mods) > 1 and not same(outputs["cython"], outputs["python"]):
            raise SystemExit(f"backends disagree on {label}")
        times = {}
        for name, mod in mods.items():
            number = 3 if name == "python" else 30
            best = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat))
            times[name] = best / number
        speedup = times["python"] / times["cython"] if "cython" in times else float("nan")
        row = "".join(f"{times[name] * 1e3:12.3f}ms" for name in sorted(mods))
        print(f"{label:32s}{row}{speedup:9.1f}x")
    if "cython" in mods:
        runs = end_to_end(args.trials)
        if runs["cython"][1] != runs["python"][1]:
            raise SystemExit("backends produced different fuzz reports")
        row = "".join(f"{runs[name][0]:13.2f}s" for name in sorted(runs))
        label = f"fuzz d=4 m=n=3 ({args.trials} trials)"
        print(f"{label:32s}{row}{runs['python'][0] / runs['cython'][0]:9.1f}x")


if __name__ == "__main__":
    main()
