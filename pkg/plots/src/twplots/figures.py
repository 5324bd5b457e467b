"""Figure builders: mode populations vs time, and the terminal distribution.

Both functions are read-only over their inputs and render static PNGs with a
fixed non-interactive backend, so rerunning on identical inputs yields an
identical figure.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .readers import InputError, read_manifest, read_trajectory

DEFAULT_MODES = (1, 2, 3, 30, 50)
# cycled across overlaid input files so series stay distinguishable
LINESTYLES = ("-", "--", "-.", ":")


def plot_timeseries(inputs, out_path, modes=DEFAULT_MODES):
    """Two-panel figure (linear and log ordinate) of n_k(tau) for chosen modes.

    Each input trajectory CSV contributes one set of curves; multiple inputs
    are overlaid with distinct line styles. A single-time-point file renders
    as markers instead of lines.
    """
    if not inputs:
        raise InputError("at least one trajectory CSV is required")
    fig, (ax_lin, ax_log) = plt.subplots(1, 2, figsize=(11, 4.5))
    for idx, path in enumerate(inputs):
        taus, all_modes, occ = read_trajectory(path)
        missing = sorted(set(modes) - set(all_modes.tolist()))
        if missing:
            raise InputError(f"modes {missing} not present in {path}")
        style = LINESTYLES[idx % len(LINESTYLES)]
        single = taus.shape[0] == 1
        for m in modes:
            col = occ[:, np.searchsorted(all_modes, m)]
            label = f"k={m}" + (f" [{idx}]" if len(inputs) > 1 else "")
            if single:
                ax_lin.plot(taus, col, "o", label=label)
                ax_log.plot(taus, np.where(col > 0, col, np.nan), "o", label=label)
            else:
                ax_lin.plot(taus, col, style, label=label)
                ax_log.plot(taus, np.where(col > 0, col, np.nan), style, label=label)
    ax_lin.set_xlabel(r"$\tau$")
    ax_lin.set_ylabel(r"$n_k$")
    ax_log.set_xlabel(r"$\tau$")
    ax_log.set_ylabel(r"$n_k$")
    ax_log.set_yscale("log")
    ax_lin.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def reference_slopes(manifest):
    """(beta_exact, beta_approx) reference slopes from a run manifest."""
    try:
        exact = float(manifest["beta_exact"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"manifest lacks beta_exact: {exc}") from exc
    approx = manifest.get("beta_approx")
    return exact, None if approx is None else float(approx)


def plot_distribution(inputs, out_path):
    """Log-ordinate plot of n_k^-1 + 1 over k for the terminal states.

    Each input trajectory CSV contributes a symbol series plus a dashed line
    exp(beta_exact * k) and, when the manifest carries an approximate
    temperature, a dotted line exp(beta_approx * k). Zero occupations
    (underflowed tail) are omitted rather than plotted at infinity.
    """
    if not inputs:
        raise InputError("at least one trajectory CSV is required")
    fig, ax = plt.subplots(figsize=(6.5, 5))
    markers = ("o", "s", "^", "d")
    for idx, path in enumerate(inputs):
        taus, modes, occ = read_trajectory(path)
        n = occ[-1]
        keep = n > 0.0
        manifest = read_manifest(path)
        exact, approx = reference_slopes(manifest)
        k_ini = manifest.get("config", {}).get("initial", {}).get("k_ini")
        tag = f"k_ini={k_ini}" if k_ini is not None else f"run {idx}"
        ax.plot(
            modes[keep],
            1.0 / n[keep] + 1.0,
            markers[idx % len(markers)],
            ms=3.5,
            label=tag,
        )
        k = modes.astype(float)
        ax.plot(k, np.exp(exact * k), "--", lw=1.0, color="k")
        if approx is not None:
            ax.plot(k, np.exp(approx * k), ":", lw=1.0, color="0.4")
    ax.set_xlabel(r"$k$")
    ax.set_ylabel(r"$n_k^{-1} + 1$")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
