"""Compute the affine symmetry family of the cubic cycle map and check each member."""

from henon_sibony import compute_N, cubic_cycle, verify_membership


def main():
    F = cubic_cycle()
    family = compute_N(F)
    for step in family.trace:
        print(step)
    print("residual:", family.to_json()["residual"])
    for m in family.members():
        ok = verify_membership(F, F.inverse, m.beta, 3, m.relations)
        print(m.label, "member" if ok else "REJECTED")


if __name__ == "__main__":
    main()
