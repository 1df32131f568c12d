"""Shared helpers for the demo scripts (headless-safe optional plotting)."""

from pathlib import Path

OUT_DIR = Path(__file__).parent / "output"


def maybe_plot(draw, filename):
    """Run a plotting callback if matplotlib is available; save to demos/output."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print(f"(matplotlib not installed; skipping {filename})")
        return
    OUT_DIR.mkdir(exist_ok=True)
    draw(plt)
    path = OUT_DIR / filename
    plt.savefig(path, dpi=120, bbox_inches="tight")
    plt.close("all")
    print(f"figure written to {path}")
