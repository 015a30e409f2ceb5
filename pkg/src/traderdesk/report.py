"""Report rendering: delimited output plus matplotlib figures per solve/run."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .ability import TradingRun

ROLE_ORDER = ("buy", "sell", "borrow", "futures_buy", "futures_borrow",
              "option_buy", "option_borrow")


def write_strategy_report(result: dict, out_dir) -> list[Path]:
    """strategy.csv + strategy.png for an M1/M2 solve result dict."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "strategy.csv"
    png_path = out / "strategy.png"

    rows: list[tuple[str, str, float]] = []
    if result["model"].startswith("M1"):
        for role in ROLE_ORDER:
            for iid, vol in sorted((result.get("volumes") or {}).get(role, {}).items()):
                rows.append((role, iid, vol))
        headline = (f"{result['model']} ({result['solver']}) "
                    f"expected increment {result['expected_welfare_increment']}")
    else:
        for iid, vol in sorted(result.get("x", {}).items()):
            rows.append(("buy", iid, vol))
        for iid, vol in sorted(result.get("short_positions", {}).items()):
            rows.append(("short", iid, vol))
        headline = f"{result['model']} guaranteed value {result['value']}"

    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["role", "instrument", "volume"])
        writer.writerows(rows)

    fig, ax = plt.subplots(figsize=(7, 4))
    if rows:
        labels = [f"{role}:{iid}" for role, iid, _ in rows]
        volumes = [v for _, _, v in rows]
        colors = ["tab:green" if r in ("buy", "futures_buy", "option_buy")
                  else "tab:red" for r, _, _ in rows]
        ax.bar(labels, volumes, color=colors)
        ax.tick_params(axis="x", rotation=30)
    ax.set_ylabel("volume")
    ax.set_title(headline)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]


def write_simulation_report(run: TradingRun, out_dir) -> list[Path]:
    """pnl_trace.csv + pnl_trace.png for a trading simulation."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "pnl_trace.csv"
    png_path = out / "pnl_trace.png"

    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "position", "step_pnl", "cumulative_pnl"])
        writer.writerows(run.rows())

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(run.cumulative, lw=1.2)
    ax.axhline(0.0, color="gray", lw=0.8)
    ax.set_xlabel("step")
    ax.set_ylabel("cumulative P&L")
    ax.set_title(f"total {run.total:.2f}, hit rate {run.hit_rate:.3f}")
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]
