"""One-pass maximum likelihood from censored measurements.

The first K observations buy a rough preliminary fit.  After that,
each incoming datum is either kept (its value enters the likelihood)
or censored (only the fact that the innovation was small enters, as
an interval term).  Two stochastic-approximation updates consume the
resulting score: a first-order one with a diminishing step, and a
second-order one that also tracks curvature through a rank-one
update of an inverse information matrix.

The point of the exercise: even with most measurements reduced to
interval terms, the second-order update tracks the full-data
least-squares floor closely.
"""

import itertools

import numpy as np

from cendre import (
    FirstOrderCensoredMLE,
    RLS,
    SecondOrderCensoredMLE,
    StepSize,
    StreamSpec,
    generate,
    nac_decide,
    preliminary_fit,
)


def run_once(seed, p=30, K=50, D=5050, sigma=1.0, tau=1.5, marks=(100, 500, 1000, 5000)):
    spec = StreamSpec(p=p, D=D, sigma=sigma, seed=seed).pinned()
    theta_o = spec.resolved_theta()
    pairs = generate(spec)

    prelim = preliminary_fit(itertools.islice(pairs, K))
    first = FirstOrderCensoredMLE(prelim, sigma, StepSize.diminishing(sigma**2))
    second = SecondOrderCensoredMLE(prelim, sigma)
    full = RLS(p)

    out = {"samle1": {}, "samle2": {}, "rls": {}, "ratio": {}}
    censored = 0
    for n, (y, x) in enumerate(pairs, start=1):
        y_hat = float(x @ prelim.theta)
        decision = nac_decide(y, y_hat, sigma, tau)
        censored += not decision.kept
        first.step(decision, x, tau)
        second.step(decision, x, tau)
        full.step(y, x)
        if n in marks:
            out["samle1"][n] = float(np.sum((first.theta - theta_o) ** 2))
            out["samle2"][n] = float(np.sum((second.theta - theta_o) ** 2))
            out["rls"][n] = float(np.sum((full.theta - theta_o) ** 2))
            out["ratio"][n] = censored / n
    return out


def main():
    reps = 20
    marks = (100, 500, 1000, 5000)
    acc = {m: {n: [] for n in marks} for m in ("samle1", "samle2", "rls", "ratio")}
    for r in range(reps):
        out = run_once(seed=1000 + r)
        for m in acc:
            for n in marks:
                acc[m][n].append(out[m][n])

    print(f"squared-error trajectories, {reps} runs, tau = 1.5 "
          f"(about {np.mean(acc['ratio'][5000]):.0%} of data censored)")
    print(f"{'n':>6} {'first-order':>12} {'second-order':>13} {'full-data rls':>14}")
    for n in marks:
        print(f"{n:>6} {np.mean(acc['samle1'][n]):>12.5f} "
              f"{np.mean(acc['samle2'][n]):>13.5f} {np.mean(acc['rls'][n]):>14.5f}")
    print()
    s2 = np.mean(acc["samle2"][5000])
    fl = np.mean(acc["rls"][5000])
    print(f"second-order at n=5000 sits at {s2 / fl:.2f}x the full-data floor")
    print("while touching the value of only the kept observations.")


if __name__ == "__main__":
    main()
