"""Writes the frozen rand_proj embedding of the 4x4 test image.

Standalone re-derivation of the projection matrix (counter-based Box-Muller
over splitmix64) followed by a plain matrix multiply and L2 normalization.
Run once; the output under tests/data is checked in.
"""
import math
import pathlib
import sys

MASK = (1 << 64) - 1


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK
    return x ^ (x >> 31)


def fnv1a64(text):
    h = 0xCBF29CE484222325
    for ch in text.encode():
        h = ((h ^ ch) * 0x100000001B3) & MASK
    return h


def derive_seed(root, component, index=0):
    return splitmix64(root ^ splitmix64(fnv1a64(component) ^ splitmix64(index)))


def test_image():
    # 4x4x3, value (k + 3 * (4 * r + c)) / 47 at row r, col c, channel k.
    return [((r * 4 + c) * 3 + k) / 47.0 for r in range(4) for c in range(4) for k in range(3)]


def main(dim=128, seed=7):
    x = test_image()
    key = derive_seed(seed, "rand_proj")
    out = []
    for r in range(dim):
        acc = 0.0
        for c, v in enumerate(x):
            e = r * len(x) + c
            u1 = ((splitmix64((key + 2 * e) & MASK) >> 11) + 1) * 2.0**-53
            u2 = (splitmix64((key + 2 * e + 1) & MASK) >> 11) * 2.0**-53
            w = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
            acc += w * v
        out.append(acc)
    norm = math.sqrt(sum(v * v for v in out))
    return [v / norm for v in out]


if __name__ == "__main__":
    target = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else \
        pathlib.Path(__file__).resolve().parent.parent / "data" / "rand_proj_d128_s7.txt"
    target.write_text("".join(f"{v:.9e}\n" for v in main()))
