"""Engine-level tests: forward values against hand oracles, gradients
against central finite differences."""

import numpy as np
import pytest

from viewpred import autodiff as ad
from viewpred.autodiff import Tensor
from viewpred.gradcheck import check_gradients


def t64(arr, grad=True):
    return Tensor(np.asarray(arr, dtype=np.float64), requires_grad=grad)


class TestMatmul:
    def test_identity(self):
        a = Tensor(np.eye(2))
        b = Tensor([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(ad.matmul(a, b).data, b.data)

    def test_dot_product_oracle(self):
        a = Tensor([[1.0, 2.0]])
        b = Tensor([[3.0], [4.0]])
        # direct dot-product oracle: 1*3 + 2*4
        assert ad.matmul(a, b).data[0, 0] == 1 * 3 + 2 * 4

    def test_zeros_annihilate(self):
        a = Tensor(np.zeros((2, 3)))
        b = Tensor(np.arange(6.0).reshape(3, 2))
        np.testing.assert_array_equal(ad.matmul(a, b).data, np.zeros((2, 2)))

    def test_dimension_mismatch(self):
        with pytest.raises(ad.ShapeError):
            ad.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))

    @pytest.mark.parametrize("seed", range(10))
    def test_gradients(self, seed):
        rng = np.random.default_rng(seed)
        a = t64(rng.normal(size=(3, 4)))
        b = t64(rng.normal(size=(4, 2)))
        report = check_gradients(lambda: ad.sq_l2(ad.matmul(a, b), Tensor(np.zeros((3, 2)))), [a, b])
        assert report.passed, report

    @pytest.mark.parametrize("seed", range(10))
    def test_matvec_gradients(self, seed):
        rng = np.random.default_rng(seed)
        a = t64(rng.normal(size=(3, 4)))
        x = t64(rng.normal(size=4))
        report = check_gradients(lambda: ad.sq_l2(ad.matmul(a, x), Tensor(np.zeros(3))), [a, x])
        assert report.passed, report


class TestConv2d:
    def test_sliding_window_oracle(self):
        x = Tensor(np.array([[[1.0, 2.0], [3.0, 4.0]]]))
        k = Tensor(np.array([[[[1.0, 0.0], [0.0, 1.0]]]]))
        # single window: 1*1 + 2*0 + 3*0 + 4*1
        assert ad.conv2d(x, k, 1).data[0, 0, 0] == 5.0

    def test_zero_input(self):
        x = Tensor(np.zeros((2, 5, 5)))
        k = Tensor(np.ones((3, 2, 3, 3)))
        assert not ad.conv2d(x, k, 1).data.any()

    def test_identity_kernel(self):
        rng = np.random.default_rng(0)
        img = rng.random((1, 4, 4))
        out = ad.conv2d(Tensor(img), Tensor(np.ones((1, 1, 1, 1))), 1)
        np.testing.assert_array_equal(out.data, img)

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(2, 6, 7))
        w = rng.normal(size=(3, 2, 3, 3))
        for stride in (1, 2):
            got = ad.conv2d(Tensor(x), Tensor(w), stride).data
            h2 = (6 - 3) // stride + 1
            w2 = (7 - 3) // stride + 1
            want = np.zeros((3, h2, w2))
            for o in range(3):
                for i in range(h2):
                    for j in range(w2):
                        want[o, i, j] = (x[:, i * stride : i * stride + 3, j * stride : j * stride + 3] * w[o]).sum()
            np.testing.assert_allclose(got, want, rtol=1e-12)

    def test_kernel_too_large(self):
        with pytest.raises(ad.ShapeError):
            ad.conv2d(Tensor(np.ones((1, 2, 2))), Tensor(np.ones((1, 1, 3, 3))), 1)

    @pytest.mark.parametrize("seed", range(10))
    def test_gradients(self, seed):
        rng = np.random.default_rng(seed)
        x = t64(rng.normal(size=(1, 5, 5)))
        w = t64(rng.normal(size=(2, 1, 3, 3)))
        stride = 1 + seed % 2
        target = Tensor(np.zeros(ad.conv2d(x, w, stride).data.shape))
        report = check_gradients(lambda: ad.sq_l2(ad.conv2d(x, w, stride), target), [x, w])
        assert report.passed, report


class TestDeconv2d:
    def test_scatter_oracle(self):
        x = Tensor(np.array([[[2.0]]]))
        k = Tensor(np.array([[[[1.0, 2.0], [3.0, 4.0]]]]))
        np.testing.assert_array_equal(ad.deconv2d(x, k, 2).data[0], [[2.0, 4.0], [6.0, 8.0]])

    def test_zero_input(self):
        x = Tensor(np.zeros((2, 3, 3)))
        k = Tensor(np.ones((2, 1, 4, 4)))
        assert not ad.deconv2d(x, k, 4).data.any()

    def test_adjoint_roundtrip_1x1(self):
        # conv(deconv(x)) on a 1x1 input scales by sum(kernel^2)
        rng = np.random.default_rng(1)
        k = rng.normal(size=(1, 1, 3, 3))
        x = Tensor(np.array([[[1.7]]]))
        up = ad.deconv2d(x, Tensor(k), 3)
        down = ad.conv2d(up, Tensor(k.transpose(1, 0, 2, 3)), 3)
        np.testing.assert_allclose(down.data[0, 0, 0], 1.7 * (k * k).sum(), rtol=1e-12)

    def test_overlap_sums(self):
        # stride 1 with a 2x2 kernel of ones on a 2x1 input: middle row overlaps
        x = Tensor(np.ones((1, 2, 1)))
        k = Tensor(np.ones((1, 1, 2, 2)))
        out = ad.deconv2d(x, k, 1).data[0]
        np.testing.assert_array_equal(out, [[1.0, 1.0], [2.0, 2.0], [1.0, 1.0]])

    @pytest.mark.parametrize("seed", range(10))
    def test_gradients(self, seed):
        rng = np.random.default_rng(seed)
        x = t64(rng.normal(size=(2, 3, 3)))
        w = t64(rng.normal(size=(2, 1, 4, 4)))
        stride = 2 + seed % 3
        target = Tensor(np.zeros(ad.deconv2d(x, w, stride).data.shape))
        report = check_gradients(lambda: ad.sq_l2(ad.deconv2d(x, w, stride), target), [x, w])
        assert report.passed, report


class TestMaxpool:
    def test_values(self):
        x = Tensor(np.array([[[1.0, 2.0], [3.0, 4.0]]]))
        assert ad.maxpool2d(x).data[0, 0, 0] == 4.0

    def test_odd_size_drops_tail(self):
        x = Tensor(np.arange(25.0).reshape(1, 5, 5))
        out = ad.maxpool2d(x)
        assert out.data.shape == (1, 2, 2)
        assert out.data[0, 1, 1] == 18.0

    @pytest.mark.parametrize("seed", range(10))
    def test_gradients(self, seed):
        rng = np.random.default_rng(seed)
        x = t64(rng.normal(size=(2, 6, 6)))
        target = Tensor(np.zeros((2, 3, 3)))
        report = check_gradients(lambda: ad.sq_l2(ad.maxpool2d(x), target), [x])
        assert report.passed, report


class TestActivations:
    def test_relu(self):
        out = ad.activation(Tensor([-1.0, 0.0, 2.0]), "relu")
        np.testing.assert_array_equal(out.data, [0.0, 0.0, 2.0])

    def test_tanh_zero(self):
        assert ad.activation(Tensor([0.0]), "tanh").data[0] == 0.0

    def test_sigmoid_zero(self):
        assert ad.activation(Tensor([0.0]), "sigmoid").data[0] == 0.5

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            ad.activation(Tensor([0.0]), "gelu")

    def test_relu_subgradient_zero_at_zero(self):
        x = t64([0.0, 1.0, -2.0])
        loss = ad.sq_l2(ad.relu(x), Tensor(np.zeros(3)))
        loss.backward()
        assert x.grad[0] == 0.0

    @pytest.mark.parametrize("kind", ["relu", "tanh", "sigmoid"])
    @pytest.mark.parametrize("seed", range(10))
    def test_gradients(self, kind, seed):
        rng = np.random.default_rng(seed)
        # keep relu inputs away from the kink
        raw = rng.normal(size=8)
        raw[np.abs(raw) < 1e-2] = 0.1
        x = t64(raw)
        report = check_gradients(lambda: ad.sq_l2(ad.activation(x, kind), Tensor(np.zeros(8))), [x])
        assert report.passed, report


class TestSqL2:
    def test_equal_inputs(self):
        a = Tensor([1.0, 2.0, 3.0])
        assert ad.sq_l2(a, Tensor([1.0, 2.0, 3.0])).data == 0.0

    def test_sum_of_squares_oracle(self):
        assert ad.sq_l2(Tensor([1.0, 2.0]), Tensor([0.0, 0.0])).data == 5.0

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=4), rng.normal(size=4)
        assert ad.sq_l2(Tensor(a), Tensor(b)).data == ad.sq_l2(Tensor(b), Tensor(a)).data

    def test_shape_mismatch(self):
        with pytest.raises(ad.ShapeError):
            ad.sq_l2(Tensor([1.0]), Tensor([1.0, 2.0]))

    @pytest.mark.parametrize("seed", range(10))
    def test_gradients(self, seed):
        rng = np.random.default_rng(seed)
        a = t64(rng.normal(size=(3, 3)))
        b = t64(rng.normal(size=(3, 3)))
        report = check_gradients(lambda: ad.sq_l2(a, b), [a, b])
        assert report.passed, report


class TestBackward:
    def test_quadratic_grad(self):
        x = t64([3.0])
        ad.sq_l2(x, Tensor(np.zeros(1))).backward()
        np.testing.assert_array_equal(x.grad, [6.0])

    def test_unreachable_leaf_gets_no_grad(self):
        x = t64([3.0])
        y = t64([1.0])
        ad.sq_l2(x, Tensor(np.zeros(1))).backward()
        assert y.grad is None

    def test_nonscalar_rejected(self):
        x = t64([1.0, 2.0])
        with pytest.raises(ad.GraphError):
            (x * x).backward()

    def test_repeated_backward_accumulates(self):
        x = t64([3.0])
        loss = ad.sq_l2(x, Tensor(np.zeros(1)))
        loss.backward()
        loss.backward()
        np.testing.assert_array_equal(x.grad, [12.0])

    def test_linearity_of_sum(self):
        rng = np.random.default_rng(7)
        x = t64(rng.normal(size=5))
        y_target = Tensor(rng.normal(size=5))

        l1 = ad.sq_l2(x, y_target)
        l2 = ad.sq_l2(x * x, Tensor(np.zeros(5)))
        (l1 + l2).backward()
        combined = x.grad.copy()

        x.zero_grad()
        ad.sq_l2(x, y_target).backward()
        ad.sq_l2(x * x, Tensor(np.zeros(5))).backward()
        np.testing.assert_allclose(x.grad, combined, atol=1e-12)

    def test_shared_subexpression_fanout(self):
        # d/dx of (x*x + x*x) = 4x
        x = t64([2.5])
        y = x * x
        loss = ad.sq_l2(y + y, Tensor(np.zeros(1)))
        # loss = (2x^2)^2 = 4x^4 -> dl/dx = 16x^3
        loss.backward()
        np.testing.assert_allclose(x.grad, [16 * 2.5**3], rtol=1e-12)

    def test_detach_blocks_gradient(self):
        x = t64([2.0])
        y = (x * x).detach()
        loss = ad.sq_l2(y, Tensor(np.zeros(1)))
        loss.backward()
        assert x.grad is None

    def test_scalar_operand_arithmetic(self):
        x = t64([1.0, -2.0])
        out = (1.0 - x) * 0.5 + 0.25
        np.testing.assert_allclose(out.data, [0.25, 1.75])
        ad.sq_l2(out, Tensor(np.zeros(2))).backward()
        np.testing.assert_allclose(x.grad, 2 * out.data * -0.5)

    def test_determinism(self):
        rng = np.random.default_rng(11)
        vals = rng.normal(size=(4, 4))

        def run():
            x = t64(vals.copy())
            w = Tensor(np.eye(4) * 0.5, requires_grad=True, dtype=np.float64)
            loss = ad.sq_l2(ad.relu(ad.matmul(w, x)), Tensor(np.ones((4, 4))))
            loss.backward()
            return loss.data.copy(), x.grad.copy()

        la, ga = run()
        lb, gb = run()
        assert la == lb
        np.testing.assert_array_equal(ga, gb)


class TestDtypes:
    def test_float32_stays_float32(self):
        a = Tensor(np.ones(3, dtype=np.float32))
        assert ((a * 0.5) + 1.0).data.dtype == np.float32

    def test_lists_become_float32(self):
        assert Tensor([1, 2, 3]).data.dtype == np.float32

    def test_float64_preserved(self):
        a = Tensor(np.ones(3, dtype=np.float64))
        assert ad.relu(a).data.dtype == np.float64
