"""Reduced-complexity recursive least squares.

Plain RLS spends order p^2 multiplications on every observation.
The adaptive variant censors observations whose innovation against
the current estimate is small, skips the quadratic work for them,
and still converges: small innovations carry little information once
the estimate is decent.

Three ways to pick the threshold are compared at the same target
censoring rate:

  constant    one tau for the whole stream, from the stationary formula
  ac-offline  a precomputed schedule that starts permissive and tightens
  ac-online   reads the exact per-datum censoring probability off the
              step matrix (costs p(p+1) extra multiplies per datum)
"""

import numpy as np

from cendre import ACRLS, RLS, StreamSpec, ThresholdPlan, gauss_q_inv, generate


def run(est, spec, theta_o, fixed_tau=None):
    for y, x in generate(spec):
        if fixed_tau is None:
            est.step(y, x)
        else:
            est.step(y, x, fixed_tau)
    err = float(np.sum((est.theta - theta_o) ** 2))
    return err, est.kept_count, est.multiply_count


def main():
    p, D, sigma, pi_star = 40, 8000, 1.0, 0.7
    reps = 10
    # Stationary threshold once the estimate is close: the innovation
    # is roughly N(0, sigma^2), so tau = Q^-1((1 - pi*)/2).
    tau_const = gauss_q_inv(0.5 * (1.0 - pi_star))

    rows = {name: [] for name in ("rls", "constant", "ac-offline", "ac-online")}
    for r in range(reps):
        spec = StreamSpec(p=p, D=D, sigma=sigma, seed=3000 + r).pinned()
        theta_o = spec.resolved_theta()
        rows["rls"].append(run(RLS(p), spec, theta_o))
        rows["constant"].append(
            run(ACRLS(p, sigma), spec, theta_o, fixed_tau=tau_const))
        rows["ac-offline"].append(
            run(ACRLS(p, sigma, plan=ThresholdPlan.ac_offline(p, pi_star)),
                spec, theta_o))
        rows["ac-online"].append(
            run(ACRLS(p, sigma, plan=ThresholdPlan.ac_online(pi_star)),
                spec, theta_o))

    print(f"p={p}, D={D}, target censoring {pi_star:.0%}, {reps} runs")
    print(f"{'variant':>11} {'mse':>9} {'kept':>7} {'multiplies':>12} {'vs rls':>7}")
    base = np.mean([m for _, _, m in rows["rls"]])
    for name, triples in rows.items():
        mse = np.mean([e for e, _, _ in triples])
        kept = np.mean([k for _, k, _ in triples])
        mult = np.mean([m for _, _, m in triples])
        print(f"{name:>11} {mse:>9.5f} {kept:>7.0f} {mult:>12.0f} {mult / base:>6.2f}x")
    print()
    print("all three variants land near the target rate and within a small")
    print("factor of the full-sweep error at a third of its multiplies; the")
    print("online plan's exact calibration shows up as p(p+1) extra work per")
    print("datum in the multiplies column.")


if __name__ == "__main__":
    main()
