"""Regenerate the bundled desk-scale CHF grid (7 P x 6 G x 8 x, D = 8 mm).

The published 2006 table is not redistributed here.  The stand-in values come
from the Biasi (1967) correlation evaluated at the 8 mm reference diameter,
taking the larger of its low- and high-quality branches.  Replace the file
with the real table (same CSV layout) for quantitative work.

    python tools/make_lut_grid.py > src/chfbundle/data/lut_desk.csv
"""
import math

P_KPA = [1000, 3000, 5000, 7000, 10000, 12500, 15000]
G_KGM2S = [500, 1000, 2000, 3000, 4000, 6000]
X = [-0.4, -0.2, -0.1, 0.0, 0.1, 0.2, 0.4, 0.6]
D_REF = 0.008


def biasi(p_kpa, g_si, x, d_m=D_REF):
    p = p_kpa / 100.0  # bar
    g = g_si / 10.0  # g/cm2 s
    d = d_m * 100.0  # cm
    n = 0.4 if d >= 1.0 else 0.6
    y = 0.7249 + 0.099 * p * math.exp(-0.032 * p)
    h = -1.159 + 0.149 * p * math.exp(-0.019 * p) + 8.99 * p / (10.0 + p * p)
    q_low = 1883.0 / (d ** n * g ** (1.0 / 6.0)) * (y / g ** (1.0 / 6.0) - x)
    q_high = 3780.0 * h / (d ** n * g ** 0.6) * (1.0 - x)
    return 10.0 * max(q_low, q_high)  # W/cm2 -> kW/m2


def main():
    print("# Desk-scale CHF grid at D = 8 mm; values from Biasi (1967), NOT the 2006 table")
    print("P_kPa,G_kgm2s,x,chf_kWm2")
    for p in P_KPA:
        for g in G_KGM2S:
            for x in X:
                print(f"{p:.1f},{g:.1f},{x:.3f},{biasi(p, g, x):.3f}")


if __name__ == "__main__":
    main()
