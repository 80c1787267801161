"""Height of a structure from one image: shadow segment, edge displacement and angles.

Run with: python demos/02_height_from_shadow.py
"""
from shadowheight import shadow_geometry as sg
from shadowheight.synth_oracle import forward_measurements

sun_el, sun_az = 52.0, 160.0
sat_az, sat_el = 110.0, 68.0

# Simulate what the image would show for a 24 m tower.
fwd = forward_measurements(24.0, sun_el, sat_el, sun_az, sat_az)
print(f"ground shadow {fwd.ground_shadow_m:.4f} m, edge displacement {fwd.edge_len_m:.4f} m, "
      f"visible shadow {fwd.shadow_len_m:.4f} m")

# Invert from the two image lengths and the azimuths.
est = sg.estimate_height(fwd.measurements, sun_el, sun_az, sat_az)
print(f"estimated height {est.height_m:.6f} m  (R_CS {est.ratio_cs:.4f}, R_HS {est.ratio_hs:.4f})")

# Neighbours in the same image share the ratios.
for shadow in (3.1, 5.8, 9.4):
    print(f"neighbour with {shadow} m visible shadow -> {sg.propagate_by_shadow(est.ratio_cs, shadow):.3f} m")

# Measurements that cannot come from any real geometry are rejected, not guessed.
try:
    sg.estimate_height(sg.ShadowMeasurements(1.0, 9.0), sun_el, sun_az, sat_az)
except sg.InfeasibleMeasurementError as exc:
    print(f"\nrejected: {exc}")
