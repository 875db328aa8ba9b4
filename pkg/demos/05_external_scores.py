# %% [markdown]
# # Bringing your own matcher
#
# Any matcher can feed the experiments through score-matrix files:
# a `#gallery,` header with gallery ids, then one row per probe. Here the
# built-in eigenface matcher writes them with the `match` subcommand and
# E2 reads them back with `matcher = scores:<dir>`. The correlations are
# identical to the built-in run because the files round-trip exactly.

# %%
import os
import tempfile

from impostorkit import ExperimentConfig, import_scores, run_e2
from impostorkit.cli import main

work = tempfile.mkdtemp(prefix="scores_demo_")
main(["synth", "--out", work])
manifest = os.path.join(work, "manifest.csv")
scores = os.path.join(work, "scores")
os.makedirs(scores)
common = ["match", "--manifest", manifest, "--seed", "5", "--gallery-session", "ext"]
main(common + ["--probe-session", "s1", "--gallery-session", "s1",
               "--out", os.path.join(scores, "reference.csv")])
for tag in ("baseline", "blur:31", "noise:0.3"):
    main(common + ["--probe-session", "s2", "--gallery-session", "s2", "--condition", tag,
                   "--out", os.path.join(scores, tag.replace(":", "_") + ".csv")])

print("reference matrix shape:", import_scores(os.path.join(scores, "reference.csv")).shape)

# %%
kw = dict(conditions=["baseline", "blur:31", "noise:0.3"], reference_session="s1",
          varied_session="s2", master_seed=5)
builtin = run_e2(ExperimentConfig(manifest, "e2", **kw))
imported = run_e2(ExperimentConfig(manifest, "e2", matcher="scores:" + scores, **kw))
for (c, a), (_, b) in zip(builtin.correlations, imported.correlations):
    print(f"{c.tag:10s} builtin={a:+.4f} imported={b:+.4f}")
