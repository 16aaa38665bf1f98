"""Regenerate the bundled saturation table from IAPWS-IF97.

Run once offline; the package itself never imports iapws.

    python tools/make_steam_table.py > src/chfbundle/data/steam_table.csv
"""
from iapws import IAPWS97

PRESSURES_KPA = [
    100, 150, 200, 300, 400, 500, 600, 700, 800, 1000,
    1200, 1400, 1600, 1800, 2000, 2500, 3000, 3500, 4000, 4500,
    5000, 5500, 6000, 6500, 7000, 7500, 8000, 8500, 9000, 9500,
    10000, 10500, 11000, 11500, 12000, 12500, 13000, 13500, 14000, 14500,
    15000, 15500, 16000, 16500, 17000, 17500, 18000, 19000, 20000, 21000,
]


def main():
    print("# Saturated water/steam, IAPWS-IF97 (iapws 1.5.5), one row per knot")
    print("P_kPa,hf_kJkg,hfg_kJkg,rhof_kgm3,rhog_kgm3,Tsat_K")
    for p in PRESSURES_KPA:
        liq = IAPWS97(P=p / 1000.0, x=0.0)
        vap = IAPWS97(P=p / 1000.0, x=1.0)
        print(f"{p:.1f},{liq.h:.4f},{vap.h - liq.h:.4f},{liq.rho:.4f},{vap.rho:.5f},{liq.T:.4f}")


if __name__ == "__main__":
    main()
