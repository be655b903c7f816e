"""Max-min airtime scheduling versus an even split.

A user with a weak link needs more airtime to keep up.  This demo compares
the even split against the optimized schedule on a spread of link qualities
and checks the two-user case against the closed form.
"""

import numpy as np

from surfplan import allocate_airtime


def min_rate(tau: np.ndarray, snrs: np.ndarray, bandwidth: float) -> float:
    return float((tau * bandwidth * np.log2(1.0 + snrs)).min())


def main() -> None:
    bandwidth = 1.0

    # two users, closed form: equal rates at tau = [0.75, 0.25]
    snrs = np.array([1.0, 7.0])
    tau = allocate_airtime(snrs, bandwidth, tau_min=0.1)
    print(f"snrs {snrs.tolist()} -> tau {np.round(tau, 6).tolist()} "
          f"(closed form [0.75, 0.25])")

    # a wider spread: optimized schedule vs even split
    rng = np.random.default_rng(3)
    for trial in range(3):
        snrs = rng.uniform(0.5, 20.0, size=4)
        even = np.full(4, 0.25)
        tau = allocate_airtime(snrs, bandwidth, tau_min=0.05)
        r_even = min_rate(even, snrs, bandwidth)
        r_opt = min_rate(tau, snrs, bandwidth)
        print(f"\ntrial {trial}: snrs {np.round(snrs, 2).tolist()}")
        print(f"  even split min rate {r_even:.4f}")
        print(f"  optimized min rate  {r_opt:.4f}  (+{(r_opt / r_even - 1):.1%})"
              f"  tau {np.round(tau, 4).tolist()}")
        rates = tau * bandwidth * np.log2(1.0 + snrs)
        print(f"  per-user rates {np.round(rates, 4).tolist()} "
              f"(spread {rates.max() - rates.min():.2e})")


if __name__ == "__main__":
    main()
