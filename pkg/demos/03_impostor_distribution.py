# %% [markdown]
# # Experiment E1: impostor score distribution versus gallery quality
#
# One fixed probe (an average face, so identity never changes) is scored
# against a gallery of 40 subjects. The gallery's quality is varied: two
# pose-labelled views, motion blur and noise. If impostor scores only
# reflected identity, every box would look alike.

# %%
import os
import tempfile

from impostorkit.cli import main

work = tempfile.mkdtemp(prefix="e1_demo_")
main(["synth", "--out", work, "--poses"])
main(["e1", "--config", os.path.join(work, "e1.cfg")])

# %%
import csv

with open(os.path.join(work, "out_e1", "boxstats.csv"), newline="") as fh:
    for row in csv.DictReader(fh):
        print(f"{row['condition']:12s} median={float(row['median']):+.3f} "
              f"iqr={float(row['iqr']):.3f} outliers={row['n_outliers']}")
print("box plot:", os.path.join(work, "out_e1", "boxplot.svg"))
