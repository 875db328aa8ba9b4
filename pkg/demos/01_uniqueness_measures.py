# %% [markdown]
# # Uniqueness from impostor scores
#
# A probe's impostor scores are its similarities to images of *other*
# subjects. The uniqueness measure places the mean impostor score between
# the minimum and the maximum: u = (max - mean) / (max - min). A face that
# resembles much of the population has its mean close to the max and a
# small u.

# %%
import numpy as np

from impostorkit import ImpostorScoreSet, ium, max_impostor_statistic, mean_threshold_lambs

rng = np.random.default_rng(0)
distinct = ImpostorScoreSet("distinct", rng.normal(0.0, 0.1, 500).tolist() + [0.6])
typical = ImpostorScoreSet("typical", rng.normal(0.4, 0.1, 500).tolist() + [0.6])
for s in (distinct, typical):
    print(f"{s.probe_id:9s} mean={s.mean:+.3f} max={s.s_max:+.3f} u={ium(s).u:.3f}")

# %% [markdown]
# The measure only sees score *positions*, so any positive rescaling of a
# matcher's score range leaves it untouched.

# %%
scaled = ImpostorScoreSet("scaled", [100 * v - 3 for v in typical.scores])
print("u after rescaling:", round(ium(scaled).u, 12), "==", round(ium(typical).u, 12))

# %% [markdown]
# Two simpler menagerie indicators: mean impostor score above a
# threshold, and the margin between the genuine score and the highest
# impostor score.

# %%
means = [(s.probe_id, s.mean) for s in (distinct, typical)]
print("lambs (mean > 0.25):", mean_threshold_lambs(means, 0.25))
print("max impostor / margin:", max_impostor_statistic(typical, genuine=0.55))
