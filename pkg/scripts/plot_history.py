#!/usr/bin/env python3
"""Plot training/validation loss and validation accuracy curves from a
history CSV written by `airsign train --history`.

Usage: python scripts/plot_history.py history.csv [out.png]
"""

import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main(history_path, out_path="history.png"):
    epochs, train_loss, val_loss, val_acc = [], [], [], []
    with open(history_path, newline="") as fh:
        for row in csv.DictReader(fh):
            epochs.append(int(row["epoch"]))
            train_loss.append(float(row["train_loss"]))
            val_loss.append(float(row["val_loss"]))
            val_acc.append(float(row["val_acc"]))

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(epochs, train_loss, label="training loss")
    ax1.plot(epochs, val_loss, label="validation loss")
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("contrastive loss")
    ax1.legend()
    ax1.grid(alpha=0.3)

    ax2.plot(epochs, val_acc, color="tab:green")
    ax2.set_xlabel("epoch")
    ax2.set_ylabel("validation accuracy")
    ax2.set_ylim(0, 1.05)
    ax2.grid(alpha=0.3)

    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    print(f"wrote {out_path}")


if __name__ == "__main__":
    if len(sys.argv) < 2:
        print(__doc__)
        sys.exit(1)
    main(*sys.argv[1:3])
