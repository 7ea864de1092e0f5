"""Two-pass empirical Huffman coding of joint quantizer indices.

Pass one tallies the observed joint symbols; pass two builds a Huffman code
on that histogram and charges each step its codeword length.  Ties in the
heap are broken by insertion order over symbols pre-sorted ascending, so
the code lengths are deterministic for a given histogram.
"""

import heapq

import numpy as np


def huffman_lengths(counts):
    """Codeword length per symbol for a count histogram (dict symbol -> count)."""
    if not counts:
        return {}
    if len(counts) == 1:
        (sym,) = counts
        return {sym: 1}
    heap = []
    for order, (sym, c) in enumerate(sorted(counts.items())):
        heap.append((c, order, (sym,)))
    heapq.heapify(heap)
    lengths = dict.fromkeys(counts, 0)
    nxt = len(heap)
    while len(heap) > 1:
        c1, _, g1 = heapq.heappop(heap)
        c2, _, g2 = heapq.heappop(heap)
        for sym in g1:
            lengths[sym] += 1
        for sym in g2:
            lengths[sym] += 1
        heapq.heappush(heap, (c1 + c2, nxt, g1 + g2))
        nxt += 1
    return lengths


def histogram_of_rows(idx):
    """Counts of distinct rows of an integer (n, r) array, keyed by tuple."""
    if idx.shape[0] == 0:
        return {}
    uniq, counts = np.unique(idx, axis=0, return_counts=True)
    return {tuple(int(v) for v in row): int(c) for row, c in zip(uniq, counts)}


def empirical_entropy_bits(counts):
    total = sum(counts.values())
    if total == 0:
        return 0.0
    p = np.array(list(counts.values()), dtype=float) / total
    return float(-(p * np.log2(p)).sum())


def average_code_length(counts, lengths):
    total = sum(counts.values())
    if total == 0:
        return 0.0
    return sum(counts[s] * lengths[s] for s in counts) / total
