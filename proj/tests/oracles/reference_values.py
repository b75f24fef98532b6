"""Independent numpy evaluation of the fixed examples used by the unit tests.

Run: python3 tests/oracles/reference_values.py
"""
import numpy as np


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def self_attend(f, w0):
    a = sigmoid(f @ w0)
    return a, (a[:, None] * f).sum(0) / a.sum()


def main():
    print("sigmoid(2) =", f"{sigmoid(2.0):.6f}")

    f = np.array([[1.0, 0.0], [0.0, 1.0]])
    alpha, fs = self_attend(f, np.array([2.0, 0.0]))
    print("self alpha =", np.round(alpha, 6), "pooled =", np.round(fs, 6))

    cat = np.hstack([f, np.tile(fs, (2, 1))])
    beta = sigmoid(cat @ np.array([1.0, 0.0, 0.0, 0.0]))
    w = alpha * beta
    fr = (w[:, None] * cat).sum(0) / w.sum()
    print("relation beta =", np.round(beta, 6), "pooled =", np.round(fr, 6))

    f = np.array([[1.0, 0.0], [0.0, 0.0]])
    g = np.exp(np.tanh(f @ np.array([[1.0, 1.0]]).T + 0.0)[:, 0] * 1.0)
    ft = (g[:, None] * f).sum(0) / g.sum()
    print("transformer gamma =", np.round(g, 6), "pooled =", np.round(ft, 6))

    u, v = np.array([[1.0, 2.0]]), np.array([[3.0, 4.0]])
    h = (u.T @ np.array([1.0])) * (v.T @ np.array([1.0]))
    print("fbp k=2 z =", h.reshape(1, 2).sum(1))

    x = np.sin(2 * np.pi * 1000 * np.arange(640) / 16000) * (0.54 - 0.46 * np.cos(2 * np.pi * np.arange(640) / 640))
    print("1 kHz peak bin =", int(np.argmax(np.abs(np.fft.rfft(x, 1024))[:200])))
    print("frames for 1 s =", (16000 - 640) // 160 + 1)

    X = np.fft.fft([1.0, 1.0, 1.0, 1.0])
    print("dft [1,1,1,1] =", X)

    print("argmax uniform probs * weights =",
          int(np.argmax(np.full(7, 1 / 7) * np.array([0.15, 0.097, 0.129, 0.185, 0.138, 0.082, 0.215]))))


if __name__ == "__main__":
    main()
