//! Matplotlib scripts for experiment directories. Nothing here renders.

use crate::result::Manifest;

/// Script that plots every CSV series of one experiment directory against
/// its first column and saves `<series>.png` next to it.
pub fn experiment_script(manifest: &Manifest) -> String {
    let files: String = manifest
        .series_files
        .iter()
        .map(|f| format!("    {f:?},\n"))
        .collect();
    format!(
        r##"#!/usr/bin/env python3
# Plots for experiment {name:?} ({kind}). Run from any directory.
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
SERIES = [
{files}]


def load(path):
    with open(path) as fh:
        lines = [l for l in fh if not l.startswith("#")]
    header = lines[0].strip().split(",")
    data = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
    return header, data


def main():
    for name in SERIES:
        header, data = load(os.path.join(HERE, name))
        if data.shape[0] == 0:
            continue
        fig, ax = plt.subplots(figsize=(7, 4.5))
        x = data[:, 0]
        for j in range(1, len(header)):
            ax.plot(x, data[:, j], marker=".", label=header[j])
        if np.all(x > 0) and x.max() / x.min() > 50:
            ax.set_xscale("log")
        ax.set_xlabel(header[0])
        ax.set_title("{name} / " + name)
        ax.legend(fontsize="small")
        fig.tight_layout()
        out = os.path.join(HERE, os.path.splitext(name)[0] + ".png")
        fig.savefig(out, dpi=120)
        plt.close(fig)
        print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
"##,
        name = manifest.name,
        kind = manifest.kind.id(),
    )
}
