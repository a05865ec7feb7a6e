"""Regenerates synthetic_star.csv and synthetic_binary.csv.

Scores follow the calibration models with known per-strategy qualities, so
`calibrate` on these files should rank iter-beam > beam > greedy. Star scores
are rounded and clipped to the 1-4 buttons an annotator would press.

    python3 gen_synthetic.py
"""

import numpy as np

STRATEGIES = ["greedy", "beam", "iter-beam"]
STAR_QUALITY = [2.2, 2.6, 3.0]
BINARY_QUALITY = [-0.4, 0.0, 0.4]
ANNOTATORS = 30
PER_STRATEGY = 6
PAIRS = 5


def main():
    rng = np.random.default_rng(20190527)
    bias = rng.normal(0.0, 1.0, ANNOTATORS)
    with open("synthetic_star.csv", "w") as f:
        f.write("model,annotator,score\n")
        for j in range(ANNOTATORS):
            for i, s in enumerate(STRATEGIES):
                for _ in range(PER_STRATEGY):
                    x = rng.normal(STAR_QUALITY[i] + 0.5 * bias[j], 0.7)
                    f.write(f"{s},w{j:02d},{int(np.clip(np.rint(x), 1, 4))}\n")
    turn = rng.normal(0.0, 0.5, PAIRS)
    with open("synthetic_binary.csv", "w") as f:
        f.write("model,annotator,turn,label\n")
        for j in range(ANNOTATORS):
            for i, s in enumerate(STRATEGIES):
                for _ in range(2):
                    for k in range(PAIRS):
                        z = BINARY_QUALITY[i] + 0.5 * bias[j] + turn[k]
                        label = int(rng.random() < 1.0 / (1.0 + np.exp(-z)))
                        f.write(f"{s},w{j:02d},{k},{label}\n")


if __name__ == "__main__":
    main()
