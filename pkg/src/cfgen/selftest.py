"""Quick internal consistency checks run by ``cfgen selftest``."""

from __future__ import annotations

import numpy as np

from .charfn import GaussianMixtureSpec, StableSpec
from .kernel import KernelSpec, closed_form_kernel, estimate_cp, mmd2_u_cf, sample_frequencies
from .loss import TargetValues, loss_and_grad, loss_value
from .net import NetArch, backward, forward, init_mlp
from .numkit import RngStream


def random_target(stream: RngStream, d: int, kind: str):
    if kind == "gaussian_mixture":
        J = 1 + int(stream.split("J").integers(3, 1)[0])
        mus = stream.split("mu").normal((J, d))
        A = stream.split("A").normal((J, d, d))
        sig = np.einsum("jab,jcb->jac", A, A) / d + 0.2 * np.eye(d)
        return GaussianMixtureSpec(mus, sig)
    alpha = float(stream.split("alpha").choice(4, 1)[0])
    alpha = (0.5, 1.0, 1.3, 1.8)[int(alpha)]
    return StableSpec.from_gaussian_source(
        alpha, stream.split("tau").normal(d), np.zeros(d), np.eye(d), 32, stream.split("atoms")
    )


def loss_identity_gap(stream: RngStream, instances: int = 50) -> float:
    """Largest relative gap between ``L + C_P`` and the Gram-matrix MMD^2."""
    worst = 0.0
    for k in range(instances):
        s = stream.split(k)
        d = 1 + int(s.split("d").integers(5, 1)[0])
        n = 2 + int(s.split("n").integers(63, 1)[0])
        m = 1 + int(s.split("m").integers(64, 1)[0])
        phi = random_target(s, d, ("gaussian_mixture", "stable")[k % 2])
        family = ("gaussian", "laplace")[(k // 2) % 2]
        freqs = sample_frequencies(KernelSpec(family), s.split("W"), m, d)
        Y = 2.0 * s.split("Y").normal((n, d))
        a = loss_value(Y, freqs, phi) + estimate_cp(phi, freqs)
        b = mmd2_u_cf(Y, phi, freqs)
        worst = max(worst, abs(a - b) / max(1.0, abs(b)))
    return worst


def _central_diff(f, x, idx, h):
    xp, xm = x.copy(), x.copy()
    xp.flat[idx] += h
    xm.flat[idx] -= h
    return (f(xp) - f(xm)) / (2 * h)


def _rel_err(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-8)


def output_gradient_check(stream: RngStream, n=16, m=16, d=2, h=1e-5) -> float:
    phi = random_target(stream.split("phi"), d, "gaussian_mixture")
    target = TargetValues(sample_frequencies(KernelSpec(), stream.split("W"), m, d), phi)
    Y = stream.split("Y").normal((n, d))
    g = loss_and_grad(Y, target)[1]
    f = lambda Yv: loss_and_grad(Yv, target, with_grad=False)[0]
    return max(_rel_err(g.flat[i], _central_diff(f, Y, i, h)) for i in range(Y.size))


def network_gradient_check(stream: RngStream, widths=(16, 16), d=2, n=16, m=16, coords=40, h=1e-5) -> float:
    phi = random_target(stream.split("phi"), d, "gaussian_mixture")
    target = TargetValues(sample_frequencies(KernelSpec(), stream.split("W"), m, d), phi)
    params = init_mlp(NetArch(2 * d, widths, d), stream.split("init"))
    Z = stream.split("Z").normal((n, 2 * d))
    Y, cache = forward(params, Z)
    grad = backward(params, cache, loss_and_grad(Y, target)[1])

    def f(theta):
        from .net import MlpParams

        return loss_and_grad(forward(MlpParams(params.arch, theta), Z)[0], target, with_grad=False)[0]

    idx = stream.split("coords").choice(params.theta.size, min(coords, params.theta.size), None)
    errs = []
    for i in np.unique(idx):
        fd = _central_diff(f, params.theta, int(i), h)
        # skip coordinates whose finite-difference stencil crosses a ReLU kink
        if abs(grad[i]) < 1e-9 and abs(fd) < 1e-9:
            continue
        errs.append(_rel_err(grad[i], fd))
    return max(errs)


def bochner_check(stream: RngStream, m: int = 1_000_000, pairs: int = 20) -> float:
    """Worst ``|random-feature kernel - closed form| * sqrt(m)`` over kernels and offsets."""
    worst = 0.0
    for family in ("gaussian", "laplace"):
        for bw in (0.02, 0.5, 1.0, 5.0, 100.0):
            spec = KernelSpec(family, (bw,))
            for d in (1, 3):
                s = stream.split(f"{family}/{bw}/{d}")
                W = sample_frequencies(spec, s.split("W"), m, d).W
                deltas = s.split("delta").normal((pairs, d)) * np.sqrt(bw)
                for delta in deltas:
                    approx = np.cos(W @ delta).mean()
                    exact = closed_form_kernel(spec, delta, np.zeros(d))
                    worst = max(worst, abs(approx - exact) * np.sqrt(m))
    return worst


def run_all(seed: int = 0, quick: bool = True):
    """Yield ``(name, passed, detail)`` for each check."""
    s = RngStream(seed).split("selftest")
    gap = loss_identity_gap(s.split("identity"))
    yield "loss identity", gap < 1e-10, f"max relative gap {gap:.2e} (< 1e-10)"
    e1 = output_gradient_check(s.split("gradY"))
    yield "output gradient", e1 < 1e-6, f"max relative error {e1:.2e} (< 1e-6)"
    e2 = network_gradient_check(s.split("gradNet"))
    yield "network gradient", e2 < 1e-6, f"max relative error {e2:.2e} (< 1e-6)"
    z = bochner_check(s.split("bochner"), m=100_000 if quick else 1_000_000)
    yield "bochner consistency", z < 4.0, f"max |error| * sqrt(m) = {z:.2f} (< 4)"
