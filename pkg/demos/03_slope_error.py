"""How much terrain slope can a height estimate tolerate?

Run with: python demos/03_slope_error.py
"""
from shadowheight import slope_error as sl

print("relative error, positive slope (rows: slope, cols: solar elevation)")
grid = sl.error_table(sl.POSITIVE_GRID_SLOPES, sl.GRID_ELEVATIONS, "positive")
print("       " + "".join(f"{h:>7g}" for h in sl.GRID_ELEVATIONS))
for theta, row in zip(sl.POSITIVE_GRID_SLOPES, grid):
    print(f"{theta:5.1f}  " + "".join(f"{float(sl.round_half_up(v)):7.2f}" for v in row))

# The exact limit for a 5 % error depends on the sun height.
print("\nlargest slope for 5 % error")
for h in (20, 30, 45, 60, 70):
    up = sl.max_admissible_slope(0.05, h, "positive")
    down = sl.max_admissible_slope(0.05, h, "negative")
    print(f"  h={h:2d}  uphill {up:.3f} deg   downhill {down:.3f} deg")

gate = sl.SlopeErrorGate.rule_of_thumb()
print(f"\nfixed gate {gate.max_pos_slope_deg} / {gate.max_neg_slope_deg} deg admits 2.8 deg downhill: "
      f"{gate.admits(sl.SlopeSpec(2.8, 'negative'))}")
