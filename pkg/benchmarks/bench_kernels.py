"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py --repeat 5
"""

import argparse
import timeit

import numpy as np

from lifs import _pykernels, rb
from lifs.interp import InterpolationProblem, build_endpoint_interpolant

try:
    from lifs import _ckernels
except ImportError:
    _ckernels = None


def rb_case(n_g):
    rng = np.random.default_rng(0)
    spec = build_endpoint_interpolant(InterpolationProblem(np.sin, 8, rng.uniform(0.2, 0.8, 4)))
    d = rb.assemble(spec, rb.make_admissible_grid(spec.ifs, n_g))
    return d.lambda_vec, d.src, d.s_vec


def cases(size):
    rng = np.random.default_rng(1)
    lam, src, s = rb_case(size)
    a = rng.uniform(size=(size // 4, 2))
    b = rng.uniform(size=(size // 4, 2))
    depth = int(np.log2(size))
    return {
        # plain zero start, so the iteration count is geometric rather than logarithmic
        "rb_iterate": lambda m: m.rb_iterate(lam, src, s, np.zeros(size), 1e-12, 10_000),
        "directed_hausdorff": lambda m: m.directed_hausdorff(a, b),
        "qtt_eval_grid": lambda m: m.qtt_eval_grid(0.2, -0.3, 0.5, 0.4, 0.4, depth),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1024,16384")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    print(f"{'kernel':<20}{'size':>8}" + "".join(f"{b + ' [ms]':>16}" for b in backends) + f"{'speedup':>10}")
    for size in (int(v) for v in args.sizes.split(",")):
        for name, fn in cases(size).items():
            times = {b: 1e3 * min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat))
                     for b, m in backends.items()}
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{name:<20}{size:>8}" + "".join(f"{t:>16.3f}" for t in times.values()) + f"{speed:>10.1f}")


if __name__ == "__main__":
    main()
