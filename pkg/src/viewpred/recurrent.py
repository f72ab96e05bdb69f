"""GRU cell built from the autodiff primitives."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .autodiff import Tensor, matmul, mul, sigmoid, tanh


@dataclass
class GruParams:
    """Gate weights for one GRU cell.

    ``w*`` act on the step input, ``u*`` on the previous hidden state;
    suffixes z/r/c are the update gate, reset gate and candidate state.
    """

    wz: Tensor
    uz: Tensor
    bz: Tensor
    wr: Tensor
    ur: Tensor
    br: Tensor
    wc: Tensor
    uc: Tensor
    bc: Tensor

    def tensors(self):
        return [getattr(self, f.name) for f in fields(self)]

    def named(self, prefix: str):
        return [(f"{prefix}.{f.name}", getattr(self, f.name)) for f in fields(self)]


def init_gru(d_in: int, d_h: int, rng: np.random.Generator, std: float = 0.02) -> GruParams:
    def w(rows, cols):
        return Tensor(rng.normal(0.0, std, (rows, cols)).astype(np.float32), requires_grad=True)

    def b(n):
        return Tensor(rng.normal(0.0, std, n).astype(np.float32), requires_grad=True)

    return GruParams(
        wz=w(d_h, d_in), uz=w(d_h, d_h), bz=b(d_h),
        wr=w(d_h, d_in), ur=w(d_h, d_h), br=b(d_h),
        wc=w(d_h, d_in), uc=w(d_h, d_h), bc=b(d_h),
    )


def gru_step(x: Tensor, h_prev: Tensor, p: GruParams) -> Tensor:
    """One GRU update: h' = (1-z) * candidate + z * h_prev."""
    z = sigmoid(matmul(p.wz, x) + matmul(p.uz, h_prev) + p.bz)
    r = sigmoid(matmul(p.wr, x) + matmul(p.ur, h_prev) + p.br)
    cand = tanh(matmul(p.wc, x) + matmul(p.uc, mul(r, h_prev)) + p.bc)
    return (1.0 - z) * cand + z * h_prev
