#!/usr/bin/env python3
"""Convert a sparse citation-graph .npz (adj_*/attr_*/labels arrays, as
shipped for cora, citeseer and cora_ml) into edges.tsv, attrs.tsv and
labels.tsv.

    python3 tools/npz_to_tsv.py cora.npz data/cora
"""

import argparse
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def load_csr(archive, prefix):
    return sp.csr_matrix(
        (archive[f"{prefix}_data"], archive[f"{prefix}_indices"], archive[f"{prefix}_indptr"]),
        shape=tuple(archive[f"{prefix}_shape"]),
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("npz", type=Path)
    parser.add_argument("out_dir", type=Path)
    args = parser.parse_args()

    with np.load(args.npz, allow_pickle=True) as archive:
        adj = load_csr(archive, "adj")
        attrs = load_csr(archive, "attr") if "attr_data" in archive else sp.csr_matrix(archive["attr_matrix"])
        labels = np.asarray(archive["labels"])
        if labels.ndim > 1 or "labels_data" in archive:
            labels = np.asarray(load_csr(archive, "labels").argmax(axis=1)).ravel()

    # Undirected, unweighted, loop-free.
    adj = adj + adj.T
    adj.setdiag(0)
    adj.eliminate_zeros()
    upper = sp.triu(adj, k=1).tocoo()
    edges = sorted(zip(upper.row.tolist(), upper.col.tolist()))

    _, labels = np.unique(labels, return_inverse=True)
    attrs = attrs.tocoo()
    order = np.lexsort((attrs.col, attrs.row))

    args.out_dir.mkdir(parents=True, exist_ok=True)
    with open(args.out_dir / "edges.tsv", "w") as f:
        f.writelines(f"{u}\t{v}\n" for u, v in edges)
    with open(args.out_dir / "attrs.tsv", "w") as f:
        f.write(f"{attrs.shape[0]}\t{attrs.shape[1]}\n")
        for k in order:
            if attrs.data[k] != 0:
                f.write(f"{attrs.row[k]}\t{attrs.col[k]}\t{attrs.data[k]:g}\n")
    with open(args.out_dir / "labels.tsv", "w") as f:
        f.writelines(f"{v}\t{y}\n" for v, y in enumerate(labels.tolist()))
    print(f"{args.out_dir}: n={adj.shape[0]} edges={len(edges)} d={attrs.shape[1]} classes={labels.max() + 1}")


if __name__ == "__main__":
    main()
