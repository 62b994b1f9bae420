#!/usr/bin/env python3
"""Generate the bundled synthlens ratings file.

Each user draws items with probability proportional to
exp(beta * <u, q_i>) * pop_i ** c_u, where pop_i is a Zipf-like item
exposure and c_u a per-user conformity weight. Ratings mix the preference
score with a smaller popularity bump, so binarized positives still carry
popularity bias. Output columns: user, item, rating (1-5), unix timestamp.
"""

import argparse

import numpy as np


def generate(seed: int, n_users: int, n_items: int, dim: int, mean_activity: float):
    rng = np.random.default_rng(seed)
    users = rng.normal(size=(n_users, dim)) / np.sqrt(dim)
    items = rng.normal(size=(n_items, dim)) / np.sqrt(dim)
    ranks = rng.permutation(n_items) + 1
    exposure = ranks ** -0.9
    exposure /= exposure.sum()
    conformity = rng.beta(2.0, 2.0, size=n_users) * 1.6
    activity = np.clip(rng.lognormal(np.log(mean_activity), 0.7, size=n_users), 20, n_items // 3)

    pref = users @ items.T
    rows = []
    start = 1_577_836_800  # 2020-01-01 UTC
    span = 2 * 365 * 86400
    for u in range(n_users):
        logits = 4.0 * pref[u] + conformity[u] * np.log(exposure)
        # Gumbel top-k samples without replacement proportional to exp(logits).
        keys = logits + rng.gumbel(size=n_items)
        chosen = np.argsort(-keys)[: int(activity[u])]
        z = (pref[u, chosen] - pref[u].mean()) / (pref[u].std() + 1e-12)
        popz = (np.log(exposure[chosen]) - np.log(exposure).mean()) / np.log(exposure).std()
        score = 2.8 + 1.1 * z + 0.35 * popz + rng.normal(scale=0.7, size=chosen.size)
        ratings = np.clip(np.rint(score), 1, 5).astype(int)
        times = np.sort(rng.integers(start, start + span, size=chosen.size))
        for i, r, t in zip(rng.permutation(chosen), ratings, times):
            rows.append((u, int(i), int(r), int(t)))
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=2023)
    ap.add_argument("--users", type=int, default=900)
    ap.add_argument("--items", type=int, default=1600)
    ap.add_argument("--dim", type=int, default=8)
    ap.add_argument("--activity", type=float, default=80.0)
    ap.add_argument("--out", default="data/synthlens/ratings.tsv")
    args = ap.parse_args()
    rows = generate(args.seed, args.users, args.items, args.dim, args.activity)
    with open(args.out, "w", encoding="ascii", newline="\n") as f:
        for u, i, r, t in rows:
            f.write(f"u{u}\ti{i}\t{r}\t{t}\n")
    print(f"{len(rows)} ratings -> {args.out}")


if __name__ == "__main__":
    main()
