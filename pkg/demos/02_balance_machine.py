"""The balance machine: masses, pivot, drilled holes and the ghost stand.

Run with:
    python demos/02_balance_machine.py

Shows how any fit becomes a physical system: each study is a mass at its
effect position whose area is its share of the total weight, the pivot
sits where torques cancel (the pooled estimate), and the stand spans the
confidence interval.  Switching to random effects drills a square hole
out of each mass; excluding an outlier re-tips the machine and leaves
the previous stand behind as a grey ghost.
"""

from meta_balancer import build_balance, fit_model, leave_one_out, simulate


def show(state, title):
    print(f"--- {title}")
    print(f"  pivot {state.pivot:+.4f}   stand [{state.stand[0]:+.4f}, "
          f"{state.stand[1]:+.4f}]   torque residual {state.torque_residual:.2e}")
    print(f"  {'id':>10} {'x':>8} {'height':>8} {'mass %':>8} {'hole':>7}")
    for m in state.studies:
        tag = "  (excluded)" if m.excluded else ""
        print(f"  {m.id:>10} {m.x_position:>8.3f} {m.height:>8.2f} "
              f"{m.mass_pct:>8.2f} {m.hole_len:>7.3f}{tag}")
    print()


def main():
    st = simulate("eq3", 8, seed=21, mu=-0.4, tau2=0.12)

    print("=== 1. Fixed effect: solid masses, no holes\n")
    result, het = fit_model(st, "fixed")
    show(build_balance(st, result, het), "fixed effect")

    print("=== 2. Random effects: the same masses, drilled\n")
    result, het = fit_model(st, "re_additive_pm")
    state = build_balance(st, result, het)
    show(state, f"Paule-Mandel (tau2 = {het.tau2:.4f})")
    print("  Each hole satisfies hole^2 + 1/(se^2 + tau2) = 1/se^2, so the")
    print("  remaining material is exactly the random-effects weight.\n")

    print("=== 3. Sensitivity: which single study moves tau2 the most?\n")
    entries = leave_one_out(st, "re_additive_pm")
    print(f"  {'excluded':>10} {'mu':>8} {'tau2':>8}")
    for e in entries:
        print(f"  {e.excluded_id:>10} {e.result.mu_hat:>8.3f} "
              f"{e.heterogeneity.tau2:>8.4f}")
    biggest = min(entries, key=lambda e: e.heterogeneity.tau2)
    print(f"\n  Excluding {biggest.excluded_id!r} removes the most "
          f"heterogeneity.\n")

    print("=== 4. Exclude it: the machine re-tips, the old stand goes grey\n")
    ghost = state
    reduced = st.excluding({biggest.excluded_id})
    result, het = fit_model(reduced, "re_additive_pm")
    after = build_balance(reduced, result, het, ghost=ghost)
    show(after, f"after excluding {biggest.excluded_id}")
    print(f"  ghost pivot (grey stand) stays at {after.ghost.pivot:+.4f}; "
          f"the live pivot moved to {after.pivot:+.4f}.")


if __name__ == "__main__":
    main()
