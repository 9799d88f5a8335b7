"""Figure rendering for the CLI report paths. Headless backend; every
function writes one PNG next to the delimited output and returns the path."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_field_figure(path, items, contour: bool = True):
    """Panel per (title, Field2D): the field as an image, its zero contour
    overlaid when it crosses zero."""
    items = list(items)
    fig, axes = plt.subplots(1, max(len(items), 1), squeeze=False,
                             figsize=(4 * max(len(items), 1), 3.2))
    for ax, (title, f) in zip(axes[0], items):
        im = ax.imshow(f.values, origin="upper", cmap="RdBu_r", aspect="auto")
        if contour and f.values.min() < 0.0 < f.values.max():
            ax.contour(f.values, levels=[0.0], colors="k", linewidths=1.0)
        ax.set_title(title)
        ax.set_xlabel("x")
        ax.set_ylabel("row")
        fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_trace_figure(path, traces):
    """Energy and lane error per recorded step for each (label, trace)."""
    fig, (ax_e, ax_x) = plt.subplots(1, 2, figsize=(8.5, 3.2))
    for label, trace in traces:
        ax_e.plot(trace.step_indices, trace.energies, label=label)
        errors = np.asarray(trace.lane_errors)
        finite = np.isfinite(errors)
        ax_x.plot(trace.step_indices[finite], errors[finite], label=label)
    ax_e.set_xlabel("step")
    ax_e.set_ylabel("energy")
    ax_x.set_xlabel("step")
    ax_x.set_ylabel("max lane error (px)")
    ax_e.legend()
    ax_x.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_eval_figure(path, names, scores, ylabel: str):
    """One bar per image."""
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(names) + 2.0), 3.2))
    ax.bar(np.arange(len(names)), scores)
    ax.set_xticks(np.arange(len(names)))
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_losscmp_figure(path, eie_trace, mse_trace, locality: dict):
    """Relative energy decay of the two flows plus the zero-gradient bars."""
    fig, (ax_e, ax_l) = plt.subplots(1, 2, figsize=(8.5, 3.2))
    for label, trace in (("EIE", eie_trace), ("MSE", mse_trace)):
        ref = trace.energies[0] if trace.energies[0] > 0 else 1.0
        ax_e.plot(trace.step_indices, trace.energies / ref, label=label)
    ax_e.set_xlabel("step")
    ax_e.set_ylabel("energy / initial")
    ax_e.legend()
    keys = sorted(locality)
    ax_l.bar(np.arange(len(keys)), [locality[k] for k in keys])
    ax_l.set_xticks(np.arange(len(keys)))
    ax_l.set_xticklabels(keys, rotation=30, ha="right", fontsize=8)
    ax_l.set_ylabel("fraction of pixels")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
