"""Time the compiled and numpy kernels on the solver's hot paths.

Usage::

    python3 benchmarks/bench_kernels.py [--n 256 1024 4096] [--repeat 5]

Prints one row per (operation, kind, n) with the median time of each
backend and the speed-up, after checking that both backends agree.
"""

import argparse
import statistics
import time

import numpy as np

from hardyeq.discrete import InequalitySpec, LogGrid, OperatorKind, _kernel_args
from hardyeq.kernels import available_backends
from hardyeq.weights import PiecewisePowerWeight as P


def _spec(tag, n):
    dom = (1e-3, 1e3)
    kind = OperatorKind(tag, 1.5, P.power(-1.0, 1.0, dom)) if "_then_" in tag else OperatorKind(tag)
    v = P.power(2.0 if tag.startswith("copson") else 0.0, 1.0, dom)
    return InequalitySpec(kind, 2.0, 2.5, P.power(-2.0, 1.0, dom), v, LogGrid(*dom, n))


def _time(fn, repeat):
    fn()
    out = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return statistics.median(out)


def _cases(backend, pr, h):
    args = pr.args
    return {
        "ratio": lambda: backend.ratio(h, *args, pr.p, pr.Vm),
        "lhs_grad": lambda: backend.lhs_grad(h, *args),
        "sweep": lambda: backend.sweep(h.copy(), np.array([1.25]), *args, pr.p, pr.Vm),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--n", type=int, nargs="+", default=[256, 1024, 4096])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--kinds", nargs="+", default=["hardy", "copson_then_copson"])
    ns = ap.parse_args(argv)
    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; timing the numpy backend only")
    print(f"{'op':<10}{'kind':<20}{'n':>6}" + "".join(f"{b:>12}" for b in backends)
          + ("    speed-up" if len(backends) > 1 else ""))
    rng = np.random.default_rng(0)
    for tag in ns.kinds:
        for n in ns.n:
            pr = _spec(tag, n).problem
            h = rng.exponential(size=n)
            ref = backends["python"].ratio(h, *pr.args, pr.p, pr.Vm)
            for b in backends.values():
                got = b.ratio(h, *pr.args, pr.p, pr.Vm)
                assert abs(got - ref) <= 1e-10 * abs(ref), (b.NAME, got, ref)
            for op in ("ratio", "lhs_grad", "sweep"):
                if op == "sweep" and n > 1024:
                    continue
                times = {name: _time(_cases(b, pr, h)[op], ns.repeat)
                         for name, b in backends.items()}
                row = f"{op:<10}{tag:<20}{n:>6}" + "".join(f"{t * 1e3:>10.3f}ms" for t in times.values())
                if len(times) > 1:
                    row += f"{times['python'] / times['cython']:>11.1f}x"
                print(row)


if __name__ == "__main__":
    main()
