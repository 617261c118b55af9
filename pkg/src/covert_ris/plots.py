"""Figure emission from the canonical result files."""

from __future__ import annotations

import hashlib
import logging
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import SchemaError
from .experiments import CSV_HEADER, read_records

log = logging.getLogger(__name__)

BEAMPATTERN_FLOOR_DB = -60.0


def _content_hash(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()[:10]


def emit_plots(results_files: list[str], out_dir: str) -> list[str]:
    """One figure per sweep file with a labeled mean series per scheme.

    File names are deterministic (content hash, no timestamps).  Empty result
    files produce a warning and no figure; missing columns raise.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for path in results_files:
        rows = read_records(path)
        rows = [r for r in rows if r["status"] == "optimal" and r["covert_rate"] != ""]
        if not rows:
            log.warning("no successful records in %s; skipping figure", path)
            continue
        sweep_var = rows[0]["sweep_var"]
        fig, ax = plt.subplots(figsize=(6.0, 4.2))
        series = sorted({(r["scenario"], r["access"]) for r in rows})
        for scheme, access in series:
            pts = {}
            for r in rows:
                if (r["scenario"], r["access"]) != (scheme, access):
                    continue
                pts.setdefault(float(r["sweep_value"]), []).append(float(r["covert_rate"]))
            xs = sorted(pts)
            ys = [np.mean(pts[x]) for x in xs]
            ax.plot(xs, ys, marker="o", label=f"{scheme}/{access}")
        ax.set_xlabel(sweep_var)
        ax.set_ylabel("covert rate (bits/s/Hz)")
        ax.grid(True, alpha=0.4)
        ax.legend(fontsize=8)
        fig.tight_layout()
        out = os.path.join(out_dir, f"fig_{sweep_var}_{_content_hash(path)}.png")
        fig.savefig(out, dpi=150)
        plt.close(fig)
        written.append(out)
    return written


def emit_beampattern_plot(table: dict, theta_w: float, out_dir: str,
                          tag: str = "solution") -> str:
    """Beampattern figure in dB with the declared floor; marks the warden angle."""
    for key in ("theta", "p_total", "p_bob", "p_carol"):
        if key not in table:
            raise SchemaError(f"beampattern table misses '{key}'")
    os.makedirs(out_dir, exist_ok=True)

    def db(p):
        return 10.0 * np.log10(np.maximum(p, 10.0 ** (BEAMPATTERN_FLOOR_DB / 10.0)))

    deg = np.rad2deg(table["theta"])
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(deg, db(table["p_total"]), label="superimposed")
    ax.plot(deg, db(table["p_bob"]), label="covert user")
    ax.plot(deg, db(table["p_carol"]), label="public user")
    ax.axvline(np.rad2deg(theta_w), color="k", ls=":", lw=1, label="warden")
    ax.set_ylim(BEAMPATTERN_FLOOR_DB, 2.0)
    ax.set_xlabel("angle (deg)")
    ax.set_ylabel("normalized pattern (dB)")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    digest = hashlib.sha256(np.ascontiguousarray(table["p_total"]).tobytes()).hexdigest()[:10]
    out = os.path.join(out_dir, f"fig_beampattern_{tag}_{digest}.png")
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
