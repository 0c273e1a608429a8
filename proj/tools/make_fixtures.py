#!/usr/bin/env python3
"""Regenerates the toy embedding fixtures under tests/data."""

import math
import pathlib

import numpy as np

DATA = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"
DIM = 16


def perturb(rng, v, eps):
    n = rng.normal(0.0, 1.0, v.shape)
    n -= n.dot(v) / v.dot(v) * v
    n /= np.linalg.norm(n)
    return v * math.sqrt(1.0 - eps * eps) + eps * np.linalg.norm(v) * n


def write_vec(path, words):
    with open(path, "w") as f:
        f.write(f"{len(words)} {DIM}\n")
        for w, v in words.items():
            f.write(w + " " + " ".join(f"{x:.6f}" for x in v) + "\n")


def synonyms():
    rng = np.random.default_rng(7)
    concepts = ["the", "kids", "are", "playing", "soccer", "watching",
                "television", "cat", "dog", "runs", "a", "on", "mat", "sat"]
    heavy = {"the": 4.0, "kids": 4.0, "are": 4.0}
    words = {}
    for i, c in enumerate(concepts):
        v = np.zeros(DIM)
        v[i] = 1.0
        words[c] = perturb(rng, v, 0.05) * heavy.get(c, 1.0)
    for syn, base, eps in [("children", "kids", 0.25), ("were", "are", 0.25),
                           ("football", "soccer", 0.25), ("kitten", "cat", 0.3)]:
        v = words[base] / np.linalg.norm(words[base])
        words[syn] = perturb(rng, v, eps)
    write_vec(DATA / "synonyms.vec", words)


def orthogonal():
    words = {}
    for i, w in enumerate(["a", "b", "c", "d"]):
        v = np.zeros(DIM)
        v[i] = 1.0
        words[w] = v
    write_vec(DATA / "orthogonal.vec", words)


if __name__ == "__main__":
    synonyms()
    orthogonal()
