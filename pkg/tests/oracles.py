"""Reference implementations written independently of the package, in plain Python loops.

They favour obviousness over speed and share no code with ``esac``.
"""

from __future__ import annotations

import math


def mlp_forward(weights, biases, x, hidden="relu", output="linear"):
    """weights[l] is a list of rows (out x in); biases[l] a list; x a list."""
    h = list(x)
    for layer, (W, b) in enumerate(zip(weights, biases)):
        z = [sum(W[i][j] * h[j] for j in range(len(h))) + b[i] for i in range(len(b))]
        last = layer == len(weights) - 1
        act = output if last else hidden
        if act == "relu":
            h = [max(0.0, v) for v in z]
        elif act == "tanh":
            h = [math.tanh(v) for v in z]
        else:
            h = z
    return h


def split_flat(flat, dims):
    """Flat vector -> (weights, biases) with row-major weights per layer, weights before biases."""
    weights, biases, k = [], [], 0
    for n_in, n_out in zip(dims[:-1], dims[1:]):
        W = [[flat[k + i * n_in + j] for j in range(n_in)] for i in range(n_out)]
        k += n_in * n_out
        b = [flat[k + i] for i in range(n_out)]
        k += n_out
        weights.append(W)
        biases.append(b)
    return weights, biases


def central_difference(f, x, h=1e-5):
    """Gradient of scalar ``f`` at list ``x`` by central differences."""
    grad = []
    for i in range(len(x)):
        xp, xm = list(x), list(x)
        xp[i] += h
        xm[i] -= h
        grad.append((f(xp) - f(xm)) / (2 * h))
    return grad


def adam_trace(grad_fn, w0, lr, steps, b1=0.9, b2=0.999, eps=1e-8):
    """Textbook scalar Adam; returns the iterates after each step."""
    w, m, v, out = w0, 0.0, 0.0, []
    for t in range(1, steps + 1):
        g = grad_fn(w)
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1**t)
        vhat = v / (1 - b2**t)
        w = w - lr * mhat / (math.sqrt(vhat) + eps)
        out.append(w)
    return out


def centered_ranks(raw):
    """Rank by value, ties by position; map rank r to r/(n-1) - 0.5."""
    n = len(raw)
    idx = sorted(range(n), key=lambda i: (raw[i], i))
    out = [0.0] * n
    for rank, i in enumerate(idx):
        out[i] = rank / (n - 1) - 0.5
    return out


def es_step(theta, scores, noise, alpha, sigma):
    n = len(scores)
    new = list(theta)
    for i in range(n):
        for j in range(len(theta)):
            new[j] += alpha / (n * sigma) * scores[i] * noise[i][j]
    return new


def huber(x, y):
    d = abs(x - y)
    return 0.5 * d * d if d < 1 else d - 0.5


def iterate_sigma(sigma1, alpha, n, history):
    """Unclipped mutation-rate recursion sigma <- sigma + alpha/(n sigma) * huber(r_max, r_avg)."""
    s = sigma1
    for r_max, r_avg in history:
        s = s + alpha / (n * s) * huber(r_max, r_avg)
    return s


def top_winners(raw, w):
    """Full sort (value descending, then index ascending) and take the prefix."""
    return sorted(range(len(raw)), key=lambda i: (-raw[i], i))[:w]


def gaussian_tanh_logprob(mu, log_std, u):
    """log density of a = tanh(u), u ~ N(mu, exp(log_std)^2), per dimension summed."""
    total = 0.0
    for m, ls, ui in zip(mu, log_std, u):
        s = math.exp(ls)
        total += -0.5 * ((ui - m) / s) ** 2 - ls - 0.5 * math.log(2 * math.pi)
        total -= math.log(1 - math.tanh(ui) ** 2)
    return total


def soft_q_targets(rewards, dones, next_values, gamma):
    return [r + gamma * (0.0 if d else 1.0) * v for r, d, v in zip(rewards, dones, next_values)]


def max_relative_error(a, b, floor=1e-6):
    """Largest entrywise |a - b| / (|a| + |b|), with a floor on the denominator."""
    worst = 0.0
    for x, y in zip(a, b):
        worst = max(worst, abs(x - y) / max(floor, abs(x) + abs(y)))
    return worst
