"""Independent reference implementations shared by several test modules."""
import numpy as np


def brute_force_first_split(X, y, w, msl=1, tol=1e-9):
    """Exhaustive best root split: lowest feature, then lowest threshold, among
    the splits within ``tol`` of the largest SSE reduction."""
    def sse(mask):
        if not mask.any():
            return 0.0
        m = np.average(y[mask], weights=w[mask])
        return float(np.sum(w[mask] * (y[mask] - m) ** 2))

    everything = np.ones(len(y), bool)
    parent = sse(everything)
    cands = []
    for f in range(X.shape[1]):
        vals = np.unique(X[:, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            thr = (lo + hi) / 2
            left = X[:, f] <= thr
            if w[left].sum() < msl or w[~left].sum() < msl:
                continue
            cands.append((parent - sse(left) - sse(~left), f, thr))
    if not cands:
        return None
    best = max(c[0] for c in cands)
    return min((f, thr) for g, f, thr in cands if g >= best - tol * max(1.0, parent))
