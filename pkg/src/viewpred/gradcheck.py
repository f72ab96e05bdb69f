"""Central finite-difference verification of analytic gradients.

Checks run in 64-bit: the leaves handed in must carry float64 data. The
loss builder is called repeatedly while leaf data is perturbed in place,
so it must rebuild the graph from the same leaf tensors on every call.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor, zero_grads


@dataclass
class GradCheckReport:
    passed: bool
    max_rel_error: float
    worst_leaf: int = -1
    worst_coord: tuple = ()
    failures: list = field(default_factory=list)

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        return f"gradcheck {status}: max rel error {self.max_rel_error:.3e}"


def check_gradients(build_loss, leaves, step=1e-5, tol=1e-4, max_coords=None, rng=None,
                    denom_floor=1e-3) -> GradCheckReport:
    """Compare analytic gradients of ``build_loss()`` against central differences.

    ``leaves`` are the float64 tensors to differentiate with respect to.
    When ``max_coords`` is set, that many coordinates per leaf are sampled
    (seeded via ``rng``) instead of sweeping every coordinate; large
    composites stay checkable in bounded time.
    """
    for t in leaves:
        if t.data.dtype != np.float64:
            raise ValueError("gradient checks require float64 leaves")

    zero_grads(leaves)
    loss = build_loss()
    loss.backward()
    analytic = [np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in leaves]

    report = GradCheckReport(passed=True, max_rel_error=0.0)
    for li, t in enumerate(leaves):
        flat = t.data.reshape(-1)
        n = flat.size
        if max_coords is not None and n > max_coords:
            if rng is None:
                raise ValueError("max_coords sampling needs an rng")
            coords = rng.choice(n, size=max_coords, replace=False)
        else:
            coords = range(n)
        a_flat = analytic[li].reshape(-1)
        for ci in coords:
            orig = flat[ci]
            flat[ci] = orig + step
            f_plus = float(build_loss().data)
            flat[ci] = orig - step
            f_minus = float(build_loss().data)
            flat[ci] = orig
            numeric = (f_plus - f_minus) / (2.0 * step)
            a = float(a_flat[ci])
            rel = abs(a - numeric) / max(abs(a), abs(numeric), denom_floor)
            if rel > report.max_rel_error:
                report.max_rel_error = rel
                report.worst_leaf = li
                report.worst_coord = np.unravel_index(int(ci), t.data.shape)
            if rel > tol:
                report.passed = False
                report.failures.append((li, int(ci), a, numeric, rel))
    return report
