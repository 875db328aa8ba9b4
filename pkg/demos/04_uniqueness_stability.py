# %% [markdown]
# # Experiment E2: how stable is uniqueness across sessions?
#
# Every subject has a capture in session s1 and in s2. Uniqueness is
# computed for both against a fixed, undegraded impostor pool (the other
# subjects of that session plus 80 external faces). Only the s2 probe
# image is degraded. The Pearson correlation between the s1 and s2
# uniqueness vectors drops as the s2 image gets worse.

# %%
import tempfile

from impostorkit import ExperimentConfig, run_e2
from impostorkit.report import emit_report
from impostorkit.synthetic import write_synthetic_dataset

work = tempfile.mkdtemp(prefix="e2_demo_")
manifest = write_synthetic_dataset(work, n_subjects=40, n_external=80,
                                   poses=[("L30", 0.3), ("R30", -0.3)])
cfg = ExperimentConfig(manifest, "e2", conditions=["baseline", "pose:L30", "pose:R30"],
                       blur_lengths=[5, 9, 17, 31], noise_variances=[0.03, 0.07, 0.1, 0.3],
                       reference_session="s1", varied_session="s2", master_seed=7)
report = run_e2(cfg)
for (cond, r), (_, norm) in zip(report.correlations, report.falloff):
    print(f"{cond.tag:12s} r={r:+.3f} normalized={norm:+.3f}")

# %% [markdown]
# Published correlations from other matchers can be replayed through the
# same reporting path; normalization divides by the undegraded value.

# %%
from impostorkit import StabilityReport, parse_condition

published = {
    "FaceVACS": [0.68, 0.65, 0.59, 0.27, 0.13],
    "Verilook": [0.63, 0.63, 0.54, 0.45, 0.27],
    "LRPCA": [0.45, 0.43, 0.16, 0.04, 0.04],
    "cLDA": [0.43, 0.42, 0.40, 0.38, 0.32],
}
tags = ["baseline", "blur:5", "blur:9", "blur:17", "blur:31"]
replay = [StabilityReport(name, tuple(zip(map(parse_condition, tags), rs)))
          for name, rs in published.items()]
paths = emit_report([report, *replay], work + "/out")
print("\n".join(paths))
