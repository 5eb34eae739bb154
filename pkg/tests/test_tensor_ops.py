import math
import random

import pytest
import torch

from patchsem.autodiff import (
    DTYPE,
    DetachedTensor,
    EvenKernel,
    Graph,
    NotScalar,
    ShapeMismatch,
    Tensor,
    TensorError,
    backward,
    finite_diff_check,
    no_graph,
    ops,
    relative_error,
)
from patchsem.autodiff.tensor import emit


def _random(*shape, seed=0) -> torch.Tensor:
    return torch.randn(*shape, generator=torch.Generator().manual_seed(seed), dtype=DTYPE)


def naive_conv(x, kernel, bias):
    n, d_in = x.shape
    k, _, d_out = kernel.shape
    radius = k // 2
    out = torch.zeros(n, d_out, dtype=DTYPE)
    for j in range(n):
        for o in range(d_out):
            total = float(bias[o])
            for t in range(k):
                row = j + t - radius
                if 0 <= row < n:
                    for i in range(d_in):
                        total += float(x[row, i]) * float(kernel[t, i, o])
            out[j, o] = total
    return out


class TestConv1dSame:
    def test_identity_kernel(self):
        x = Tensor([[1.0], [2.0], [3.0], [4.0]])
        out = ops.conv1d_same(x, Tensor([[[1.0]]]), Tensor([0.0]))
        assert out.tolist() == [[1.0], [2.0], [3.0], [4.0]]

    def test_delta_kernel(self):
        x = Tensor(_random(5, 2))
        kernel = torch.zeros(3, 2, 2, dtype=DTYPE)
        kernel[1] = torch.eye(2, dtype=DTYPE)
        out = ops.conv1d_same(x, Tensor(kernel), Tensor(torch.zeros(2, dtype=DTYPE)))
        assert torch.equal(out.data, x.data)

    def test_matches_naive_loop(self):
        x, kernel, bias = _random(7, 2, seed=1), _random(3, 2, 3, seed=2), _random(3, seed=3)
        out = ops.conv1d_same(Tensor(x), Tensor(kernel), Tensor(bias))
        assert out.shape == (7, 3)
        assert torch.allclose(out.data, naive_conv(x, kernel, bias), rtol=0, atol=1e-12)

    def test_even_kernel_rejected(self):
        with pytest.raises(EvenKernel):
            ops.conv1d_same(Tensor(_random(4, 2)), Tensor(_random(2, 2, 2)), Tensor(_random(2)))

    def test_feature_mismatch(self):
        with pytest.raises(ShapeMismatch):
            ops.conv1d_same(Tensor(_random(4, 3)), Tensor(_random(3, 2, 2)), Tensor(_random(2)))

    def test_backward_matches_autograd(self):
        x, kernel, bias = _random(6, 3, seed=4), _random(5, 3, 2, seed=5), _random(2, seed=6)
        tx, tk, tb = (Tensor(v.clone(), requires_grad=True) for v in (x, kernel, bias))
        with Graph() as graph:
            out = ops.conv1d_same(tx, tk, tb)
            loss = ops.sum_all(ops.tanh(out))
        graph.backward(loss)

        rx, rk, rb = (v.clone().requires_grad_(True) for v in (x, kernel, bias))
        reference = torch.nn.functional.conv1d(
            rx.t().unsqueeze(0), rk.permute(2, 1, 0), rb, padding=2
        ).squeeze(0).t()
        torch.tanh(reference).sum().backward()

        assert torch.allclose(tx.grad, rx.grad, atol=1e-12)
        assert torch.allclose(tk.grad, rk.grad, atol=1e-12)
        assert torch.allclose(tb.grad, rb.grad, atol=1e-12)


class TestElementwise:
    def test_sigmoid_at_zero(self):
        assert ops.elementwise("sigmoid", Tensor(0.0)).item() == 0.5

    def test_relu(self):
        assert ops.elementwise("relu", Tensor([-3.0, 3.0])).tolist() == [0.0, 3.0]

    def test_tanh_matches_math(self):
        values = _random(100, seed=8) * 3
        out = ops.elementwise("tanh", Tensor(values))
        expected = torch.tensor([math.tanh(v) for v in values.tolist()], dtype=DTYPE)
        assert torch.allclose(out.data, expected, rtol=0, atol=1e-12)

    def test_sigmoid_is_stable_for_large_inputs(self):
        out = ops.sigmoid(Tensor([-800.0, 800.0]))
        assert out.tolist() == [0.0, 1.0]

    def test_unknown_kind(self):
        with pytest.raises(TensorError):
            ops.elementwise("gelu", Tensor([1.0]))

    def test_relu_gradient_at_zero_is_half(self):
        x = Tensor([0.0, 2.0, -1.0], requires_grad=True)
        with Graph() as graph:
            loss = ops.sum_all(ops.relu(x))
        graph.backward(loss)
        assert x.grad.tolist() == [0.5, 1.0, 0.0]


class TestSoftmax:
    def test_uniform(self):
        out = ops.softmax(Tensor([0.0, 0.0, 0.0]))
        assert torch.allclose(out.data, torch.full((3,), 1 / 3, dtype=DTYPE), atol=1e-15)

    def test_closed_form(self):
        out = ops.softmax(Tensor([math.log(2.0), 0.0]))
        assert torch.allclose(out.data, torch.tensor([2 / 3, 1 / 3], dtype=DTYPE), atol=1e-15)

    def test_matches_naive(self):
        x = _random(9, seed=9)
        exps = [math.exp(v) for v in x.tolist()]
        expected = torch.tensor([e / sum(exps) for e in exps], dtype=DTYPE)
        assert torch.allclose(ops.softmax(Tensor(x)).data, expected, rtol=0, atol=1e-12)

    def test_large_inputs_do_not_overflow(self):
        out = ops.softmax(Tensor([1000.0, 1000.0]))
        assert out.tolist() == [0.5, 0.5]

    def test_rows_of_matrix(self):
        out = ops.softmax(Tensor(_random(4, 5, seed=10)))
        assert torch.allclose(out.data.sum(dim=1), torch.ones(4, dtype=DTYPE), atol=1e-12)


class TestLinearAlgebra:
    def test_identity_matmul(self):
        b = _random(3, 4, seed=11)
        out = ops.matmul(Tensor(torch.eye(3, dtype=DTYPE)), Tensor(b))
        assert torch.equal(out.data, b)

    def test_matmul_matches_naive(self):
        a, b = _random(5, 4, seed=12), _random(4, 6, seed=13)
        expected = torch.tensor(
            [[sum(float(a[i, k]) * float(b[k, j]) for k in range(4)) for j in range(6)] for i in range(5)],
            dtype=DTYPE,
        )
        assert torch.allclose(ops.matmul(Tensor(a), Tensor(b)).data, expected, rtol=0, atol=1e-12)

    def test_vector_operands(self):
        v = Tensor([1.0, 2.0])
        m = Tensor([[1.0, 0.0], [0.0, 3.0]])
        assert ops.matmul(v, m).tolist() == [1.0, 6.0]
        assert ops.matmul(m, v).tolist() == [1.0, 6.0]
        assert ops.matmul(v, v).shape == ()

    def test_inner_dimension_mismatch(self):
        with pytest.raises(ShapeMismatch):
            ops.matmul(Tensor(_random(2, 3)), Tensor(_random(2, 3)))

    def test_concat_rows_in_order(self):
        a, b = _random(2, 3, seed=14), _random(4, 3, seed=15)
        out = ops.concat([Tensor(a), Tensor(b)], axis=0)
        assert out.shape == (6, 3)
        assert torch.equal(out.data[:2], a)
        assert torch.equal(out.data[2:], b)

    def test_concat_off_axis_mismatch(self):
        with pytest.raises(ShapeMismatch):
            ops.concat([Tensor(_random(2, 3)), Tensor(_random(2, 4))], axis=0)

    def test_add_bias_and_mismatch(self):
        out = ops.add(Tensor([[1.0, 2.0], [3.0, 4.0]]), Tensor([10.0, 20.0]))
        assert out.tolist() == [[11.0, 22.0], [13.0, 24.0]]
        with pytest.raises(ShapeMismatch):
            ops.add(Tensor([1.0, 2.0]), Tensor([1.0, 2.0, 3.0]))

    def test_mean_and_scale(self):
        x = Tensor([[1.0, 2.0], [3.0, 6.0]])
        assert ops.mean(x, axis=0).tolist() == [2.0, 4.0]
        assert ops.scale(x, 0.5).tolist() == [[0.5, 1.0], [1.5, 3.0]]

    def test_rank_above_three_rejected(self):
        with pytest.raises(ShapeMismatch):
            Tensor(torch.zeros(1, 1, 1, 1))


class TestBackward:
    def test_sum_gives_ones(self):
        x = Tensor([1.0, -2.0, 5.0], requires_grad=True)
        with Graph():
            loss = ops.sum_all(x)
        backward(loss)
        assert x.grad.tolist() == [1.0, 1.0, 1.0]

    def test_sigmoid_gradient_at_zero(self):
        x = Tensor(0.0, requires_grad=True)
        with Graph():
            loss = ops.sigmoid(x)
        backward(loss)
        assert x.grad.item() == 0.25

    def test_reused_tensor_accumulates(self):
        x = Tensor([3.0], requires_grad=True)
        with Graph():
            loss = ops.sum_all(ops.add(x, x))
        backward(loss)
        assert x.grad.tolist() == [2.0]

    def test_attention_chain_matches_autograd(self):
        fused, wq, wk, wv = _random(4, 3, seed=16), _random(3, 2, seed=17), _random(3, 2, seed=18), _random(3, 2, seed=19)
        mine = [Tensor(v.clone(), requires_grad=True) for v in (fused, wq, wk, wv)]
        with Graph() as graph:
            q, k, v = (ops.matmul(mine[0], w) for w in mine[1:])
            weights = ops.softmax(ops.scale(ops.matmul(q, ops.transpose(k)), 1 / math.sqrt(2)))
            pooled = ops.mean(ops.matmul(weights, v), axis=0)
            loss = ops.binary_cross_entropy(ops.sigmoid(ops.sum_all(pooled)), 1)
        graph.backward(loss)

        ref = [v.clone().requires_grad_(True) for v in (fused, wq, wk, wv)]
        rq, rk, rv = (ref[0] @ w for w in ref[1:])
        rweights = torch.softmax(rq @ rk.t() / math.sqrt(2), dim=-1)
        rprob = torch.sigmoid((rweights @ rv).mean(dim=0).sum())
        (-torch.log(rprob)).backward()

        for tensor, reference in zip(mine, ref):
            assert torch.allclose(tensor.grad, reference.grad, atol=1e-12)

    def test_embedding_and_frozen_rows(self):
        table = Tensor(_random(4, 2, seed=20), requires_grad=True, frozen_rows=(0,))
        with Graph():
            loss = ops.sum_all(ops.embedding(table, [0, 2, 2]))
        backward(loss)
        assert table.grad.tolist() == [[0.0, 0.0], [0.0, 0.0], [2.0, 2.0], [0.0, 0.0]]

    def test_non_scalar_loss(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with Graph():
            out = ops.scale(x, 2.0)
        with pytest.raises(NotScalar):
            backward(out)

    def test_detached_loss(self):
        with pytest.raises(DetachedTensor):
            backward(Tensor(1.0))

    def test_no_graph_records_nothing(self):
        x = Tensor([1.0], requires_grad=True)
        with Graph() as graph:
            with no_graph():
                ops.sum_all(x)
            assert len(graph) == 0
            ops.sum_all(x)
        assert len(graph) == 1

    def test_ops_without_grad_inputs_are_not_recorded(self):
        with Graph() as graph:
            ops.sum_all(Tensor([1.0, 2.0]))
        assert len(graph) == 0


class TestFiniteDiffCheck:
    def test_constant_function(self):
        theta = Tensor([1.0, 2.0], requires_grad=True, name="theta")
        report = finite_diff_check(lambda: Tensor(3.0), [theta])
        assert report.max_error == 0.0
        assert report.checked_elements == 2

    def test_quadratic(self):
        theta = Tensor(_random(5, seed=21), requires_grad=True, name="theta")
        report = finite_diff_check(lambda: ops.scale(ops.matmul(theta, theta), 0.5), {"theta": theta})
        assert report.max_error < 1e-7
        assert torch.allclose(theta.grad, theta.data)

    def test_detects_wrong_backward(self):
        theta = Tensor([0.3, -0.7], requires_grad=True, name="theta")

        def doubled_with_bad_rule(x):
            return emit("bad", (x,), x.data * 2.0, lambda grad: (grad,))

        report = finite_diff_check(lambda: ops.sum_all(doubled_with_bad_rule(theta)), [theta])
        assert report.max_error == pytest.approx(1 / 3, rel=1e-6)
        assert report.worst_param == "theta"
        assert not report.passed(1e-4)

    def test_frozen_rows_are_skipped(self):
        table = Tensor(_random(3, 2, seed=22), requires_grad=True, name="table", frozen_rows=(0,))
        report = finite_diff_check(lambda: ops.sum_all(ops.tanh(ops.embedding(table, [0, 1, 2]))), [table])
        assert report.checked_elements == 4
        assert report.max_error < 1e-6

    def test_relative_error_floor(self):
        assert relative_error(0.0, 0.0) == 0.0
        assert relative_error(1.0, 1.0) == 0.0
        assert relative_error(1e-9, 0.0) == pytest.approx(1e-9 / 1e-8)

    def test_invalid_eps(self):
        with pytest.raises(ValueError):
            finite_diff_check(lambda: Tensor(0.0), [], eps=0.0)


def _shape_rng(seed: int) -> random.Random:
    return random.Random(1000 + seed)


class TestRandomizedProperties:
    def test_conv_preserves_length(self):
        rng = _shape_rng(0)
        for case in range(100):
            n, k = rng.randint(1, 16), rng.choice((1, 3, 5, 7, 9))
            d_in, d_out = rng.randint(1, 4), rng.randint(1, 4)
            out = ops.conv1d_same(
                Tensor(_random(n, d_in, seed=case)),
                Tensor(_random(k, d_in, d_out, seed=case + 1)),
                Tensor(_random(d_out, seed=case + 2)),
            )
            assert out.shape == (n, d_out), (n, k)

    @pytest.mark.parametrize("case", range(50))
    def test_conv_matches_naive_loop(self, case):
        rng = _shape_rng(case)
        n, k = rng.randint(1, 9), rng.choice((1, 3, 5, 7))
        d_in, d_out = rng.randint(1, 3), rng.randint(1, 3)
        x = _random(n, d_in, seed=case)
        kernel, bias = _random(k, d_in, d_out, seed=case + 50), _random(d_out, seed=case + 100)
        out = ops.conv1d_same(Tensor(x), Tensor(kernel), Tensor(bias))
        assert torch.allclose(out.data, naive_conv(x, kernel, bias), rtol=0, atol=1e-12)

    @pytest.mark.parametrize("case", range(50))
    def test_matmul_matches_naive_loop(self, case):
        rng = _shape_rng(case)
        p, q, r = rng.randint(1, 6), rng.randint(1, 6), rng.randint(1, 6)
        a, b = _random(p, q, seed=case), _random(q, r, seed=case + 50)
        expected = torch.tensor(
            [[sum(float(a[i, t]) * float(b[t, j]) for t in range(q)) for j in range(r)] for i in range(p)],
            dtype=DTYPE,
        )
        out = ops.matmul(Tensor(a), Tensor(b))
        assert out.shape == (p, r)
        assert torch.allclose(out.data, expected, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("case", range(50))
    def test_softmax_matches_naive_loop(self, case):
        n = _shape_rng(case).randint(1, 12)
        x = _random(n, seed=case) * 4
        top = max(x.tolist())
        exps = [math.exp(v - top) for v in x.tolist()]
        expected = torch.tensor([e / sum(exps) for e in exps], dtype=DTYPE)
        assert torch.allclose(ops.softmax(Tensor(x)).data, expected, rtol=0, atol=1e-12)

    def test_softmax_shift_invariance(self):
        rng = _shape_rng(1)
        for case in range(100):
            x = _random(rng.randint(1, 12), seed=case) * 5
            shift = rng.uniform(-50.0, 50.0)
            shifted = ops.softmax(Tensor(x + shift)).data
            assert torch.allclose(shifted, ops.softmax(Tensor(x)).data, rtol=0, atol=1e-12), shift
            assert abs(shifted.sum().item() - 1.0) <= 1e-12
