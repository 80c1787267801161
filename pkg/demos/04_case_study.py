"""Processing the shipped single-image case study and reading its diagnostics.

Run with: python demos/04_case_study.py
"""
from shadowheight import scene_model as sm

obs, neighbors = sm.read_scene_file(sm.case_study_path())
report = sm.process_scene(obs, neighbors)
print(sm.report_to_text(report))

# The printed ratio column is aggregated even though the printed lengths do not solve.
ref = report.reference_aggregate
print(f"printed R_CS column: mean {ref.mean_ratio:.2f}, sample std {ref.std_dev:.4f}")

codes = sorted({d.code for d in report.diagnostics})
print("diagnostic codes:", ", ".join(codes))
