"""Walk through the symbol layer: generation, homogeneities, the structure
change, and the nonlinearity lift.

Run as: python3 demos/01_symbol_algebra.py
"""

from gpam2d.symbols import (
    PRIMED,
    RHS,
    SOL,
    UNPRIMED,
    check_iota_intertwines,
    generate,
    homogeneity,
    iota,
    lift_nonlinearity,
    u_expansion,
)


def show(title, items):
    print(f"\n== {title}")
    for line in items:
        print("  ", line)


rhs = sorted(generate(UNPRIMED, RHS), key=str)
show(
    "rough-noise structure, right-hand-side symbols (|tau| < kappa)",
    (f"{s}   |.| = {homogeneity(s)}" for s in rhs),
)

sol = sorted(generate(UNPRIMED, SOL), key=str)
show(
    "solution-sector symbols (|tau| < 3/2 + 2 kappa)",
    (f"{s}   |.| = {homogeneity(s)}" for s in sol),
)

primed = sorted(generate(PRIMED, RHS), key=str)
show(
    "limit structure, right-hand side (|Xi'| = -1 - 2 kappa)",
    (f"{s}   |.| = {homogeneity(s, PRIMED)}" for s in primed),
)

show(
    "the structure change on the rough symbols",
    (f"{s}  ->  {iota(s) if iota(s) is not None else 0}" for s in rhs),
)

print("\n== the lifted right-hand side (eleven coefficient families)")
lifted = lift_nonlinearity(u_expansion(), "g", UNPRIMED)
for sym, coeff in lifted:
    print(f"   ({coeff})  {sym}")

print("\n== the lift on the image side, with the effective nonlinearity g'*g")
image = lift_nonlinearity(u_expansion().apply_iota(), "h", PRIMED)
for sym, coeff in image:
    print(f"   ({coeff})  {sym}")

print("\nstructure change commutes with the lift:", check_iota_intertwines(u_expansion()))
