"""Matplotlib rendering for the report path: profile plots and Hasse diagrams."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def profile_figure(profiles, path, estimator: str = "entropy") -> None:
    """Scale-versus-complexity plot, one line per shape, written as an image file."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for prof in profiles:
        ax.plot(prof.t_values, prof.values(estimator), marker=".", markersize=3,
                linewidth=1.2, label=prof.shape_id)
    ax.set_xlabel("scale t")
    ylabel = "complexity (entropy, nats)" if estimator == "entropy" else "complexity (std)"
    ax.set_ylabel(ylabel)
    ax.set_xlim(0.0, 1.0)
    ax.grid(True, alpha=0.3)
    if len(profiles) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def hasse_figure(po, path) -> None:
    """Layered drawing of the Hasse diagram (minima at the bottom)."""
    n = len(po.classes)
    succ = {i: [] for i in range(n)}
    pred = {i: [] for i in range(n)}
    for a, b in po.hasse_edges:
        succ[a].append(b)
        pred[b].append(a)

    depth = {}

    def walk(i):
        if i in depth:
            return depth[i]
        depth[i] = 0 if not pred[i] else 1 + max(walk(p) for p in pred[i])
        return depth[i]

    for i in range(n):
        walk(i)
    layers = {}
    for i in range(n):
        layers.setdefault(depth[i], []).append(i)

    pos = {}
    for d, members in layers.items():
        members.sort(key=lambda i: "|".join(po.classes[i]))
        for k, i in enumerate(members):
            pos[i] = (k - (len(members) - 1) / 2.0, d)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for a, b in po.hasse_edges:
        (xa, ya), (xb, yb) = pos[a], pos[b]
        ax.annotate("", xy=(xb, yb), xytext=(xa, ya),
                    arrowprops={"arrowstyle": "-|>", "color": "0.3", "lw": 1.2})
    for i, (x, y) in pos.items():
        ax.text(x, y, "|".join(po.classes[i]), ha="center", va="center", fontsize=9,
                bbox={"boxstyle": "round,pad=0.35", "fc": "#dce6f2", "ec": "0.3"})
    ax.set_xlim(min(x for x, _ in pos.values()) - 1, max(x for x, _ in pos.values()) + 1)
    ax.set_ylim(-0.8, max(y for _, y in pos.values()) + 0.8)
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
