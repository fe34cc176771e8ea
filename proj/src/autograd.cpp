// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/autograd.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "painter/errors.hpp"

namespace painter::nn {

namespace detail {

struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> inputs;
    BackwardFn backward;
};

}  // namespace detail

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

struct VarAccess {
    static const NodePtr& node(const Var& v) { return v.m_node; }
    static Var wrap(NodePtr node) { return Var(std::move(node)); }
};

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

const NodePtr& node_of(const Var& v) {
    if (!v) {
        throw ShapeError("use of an empty autodiff value");
    }
    return VarAccess::node(v);
}

Var make(std::vector<Var> inputs, Tensor value, BackwardFn backward) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    for (const auto& in : inputs) {
        const auto& n = node_of(in);
        node->requires_grad = node->requires_grad || n->requires_grad;
        node->inputs.push_back(n);
    }
    if (node->requires_grad) {
        node->backward = std::move(backward);
    }
    return VarAccess::wrap(std::move(node));
}

void accumulate(Node& node, const Tensor& g) {
    if (!node.requires_grad || g.numel() == 0) {
        return;
    }
    if (node.grad.numel() == 0) {
        node.grad = Tensor(node.value.shape());
    }
    if (!g.same_shape(node.grad)) {
        throw ShapeError("gradient shape " + shape_string(g.shape()) + " does not match value " +
                         shape_string(node.grad.shape()));
    }
    auto* dst = node.grad.data();
    const auto* src = g.data();
    for (std::size_t i = 0; i < g.numel(); ++i) {
        dst[i] += src[i];
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
    }
}

void require_rank(const Tensor& a, std::size_t rank, const char* op) {
    if (a.rank() != rank) {
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(a.shape()));
    }
}

ConstMatrixMap as_matrix(const Tensor& t) {
    return ConstMatrixMap(t.data(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
}

MatrixMap as_matrix(Tensor& t) {
    return MatrixMap(t.data(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
}

// Unfolds C×H×W into (C·k·k)×(H·W) columns with zero padding k/2.
Tensor im2col(const Tensor& x, std::size_t k) {
    const std::size_t c = x.dim(0);
    const std::size_t h = x.dim(1);
    const std::size_t w = x.dim(2);
    const auto pad = static_cast<std::ptrdiff_t>(k / 2);
    Tensor cols({c * k * k, h * w});
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
                double* row = cols.data() + ((ch * k + ky) * k + kx) * h * w;
                for (std::size_t y = 0; y < h; ++y) {
                    const auto sy = static_cast<std::ptrdiff_t>(y + ky) - pad;
                    for (std::size_t xx = 0; xx < w; ++xx) {
                        const auto sx = static_cast<std::ptrdiff_t>(xx + kx) - pad;
                        const bool inside = sy >= 0 && sy < static_cast<std::ptrdiff_t>(h) && sx >= 0 &&
                                            sx < static_cast<std::ptrdiff_t>(w);
                        row[y * w + xx] = inside ? x[(ch * h + static_cast<std::size_t>(sy)) * w +
                                                     static_cast<std::size_t>(sx)]
                                                 : 0.0;
                    }
                }
            }
        }
    }
    return cols;
}

Tensor col2im(const Tensor& cols, std::size_t c, std::size_t h, std::size_t w, std::size_t k) {
    const auto pad = static_cast<std::ptrdiff_t>(k / 2);
    Tensor x({c, h, w});
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
                const double* row = cols.data() + ((ch * k + ky) * k + kx) * h * w;
                for (std::size_t y = 0; y < h; ++y) {
                    const auto sy = static_cast<std::ptrdiff_t>(y + ky) - pad;
                    if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) {
                        continue;
                    }
                    for (std::size_t xx = 0; xx < w; ++xx) {
                        const auto sx = static_cast<std::ptrdiff_t>(xx + kx) - pad;
                        if (sx >= 0 && sx < static_cast<std::ptrdiff_t>(w)) {
                            x[(ch * h + static_cast<std::size_t>(sy)) * w + static_cast<std::size_t>(sx)] +=
                                row[y * w + xx];
                        }
                    }
                }
            }
        }
    }
    return x;
}

}  // namespace

const Tensor& Var::value() const {
    return node_of(*this)->value;
}

const Tensor& Var::grad() const {
    return node_of(*this)->grad;
}

bool Var::requires_grad() const {
    return node_of(*this)->requires_grad;
}

Var constant(Tensor value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    return VarAccess::wrap(std::move(node));
}

Var parameter(Tensor value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->requires_grad = true;
    return VarAccess::wrap(std::move(node));
}

void backward(const Var& loss) {
    const auto& root = node_of(loss);
    if (root->value.numel() != 1) {
        throw ShapeError("backward needs a single-element loss");
    }
    if (!root->requires_grad) {
        return;
    }
    // Iterative post-order DFS gives a topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            Node* child = node->inputs[next++].get();
            if (child->requires_grad && seen.insert(child).second) {
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    accumulate(*root, Tensor(root->value.shape(), 1.0));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (!node->backward || node->grad.numel() == 0) {
            continue;
        }
        auto grads = node->backward(node->grad);
        for (std::size_t i = 0; i < node->inputs.size() && i < grads.size(); ++i) {
            accumulate(*node->inputs[i], grads[i]);
        }
    }
}

Var custom_op(std::vector<Var> inputs, Tensor value, BackwardFn grads) {
    return make(std::move(inputs), std::move(value), std::move(grads));
}

Var add(const Var& a, const Var& b) {
    require_same_shape(a.value(), b.value(), "add");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) {
        out[i] += b.value()[i];
    }
    return make({a, b}, std::move(out), [](const Tensor& g) { return std::vector<Tensor>{g, g}; });
}

Var sub(const Var& a, const Var& b) {
    require_same_shape(a.value(), b.value(), "sub");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) {
        out[i] -= b.value()[i];
    }
    return make({a, b}, std::move(out), [](const Tensor& g) {
        Tensor neg = g;
        for (auto& v : neg.values()) {
            v = -v;
        }
        return std::vector<Tensor>{g, std::move(neg)};
    });
}

Var scale(const Var& a, double factor) {
    Tensor out = a.value();
    for (auto& v : out.values()) {
        v *= factor;
    }
    return make({a}, std::move(out), [factor](const Tensor& g) {
        Tensor ga = g;
        for (auto& v : ga.values()) {
            v *= factor;
        }
        return std::vector<Tensor>{std::move(ga)};
    });
}

Var silu(const Var& a) {
    const Tensor& x = a.value();
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) {
        out[i] = x[i] / (1.0 + std::exp(-x[i]));
    }
    const Tensor input = x;
    return make({a}, std::move(out), [input](const Tensor& g) {
        Tensor ga(input.shape());
        for (std::size_t i = 0; i < input.numel(); ++i) {
            const double s = 1.0 / (1.0 + std::exp(-input[i]));
            ga[i] = g[i] * s * (1.0 + input[i] * (1.0 - s));
        }
        return std::vector<Tensor>{std::move(ga)};
    });
}

Var reshape(const Var& a, Shape shape) {
    const Shape original = a.shape();
    return make({a}, a.value().reshaped(std::move(shape)),
                [original](const Tensor& g) { return std::vector<Tensor>{g.reshaped(original)}; });
}

Var add_channel_bias(const Var& a, const Var& bias) {
    const Tensor& x = a.value();
    if (x.rank() < 1 || bias.value().rank() != 1 || bias.value().dim(0) != x.dim(0)) {
        throw ShapeError("add_channel_bias: bias " + shape_string(bias.shape()) + " does not fit " +
                         shape_string(x.shape()));
    }
    const std::size_t channels = x.dim(0);
    const std::size_t inner = x.numel() / channels;
    Tensor out = x;
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t i = 0; i < inner; ++i) {
            out[c * inner + i] += bias.value()[c];
        }
    }
    return make({a, bias}, std::move(out), [channels, inner](const Tensor& g) {
        Tensor gb({channels});
        for (std::size_t c = 0; c < channels; ++c) {
            for (std::size_t i = 0; i < inner; ++i) {
                gb[c] += g[c * inner + i];
            }
        }
        return std::vector<Tensor>{g, std::move(gb)};
    });
}

Var conv2d(const Var& x, const Var& weight, const Var& bias) {
    const Tensor& xv = x.value();
    const Tensor& wv = weight.value();
    require_rank(xv, 3, "conv2d input");
    require_rank(wv, 4, "conv2d weight");
    const std::size_t c = xv.dim(0);
    const std::size_t h = xv.dim(1);
    const std::size_t w = xv.dim(2);
    const std::size_t o = wv.dim(0);
    const std::size_t k = wv.dim(2);
    if (wv.dim(1) != c || wv.dim(3) != k || k % 2 == 0) {
        throw ShapeError("conv2d: weight " + shape_string(wv.shape()) + " does not fit input " +
                         shape_string(xv.shape()));
    }
    if (bias.value().rank() != 1 || bias.value().dim(0) != o) {
        throw ShapeError("conv2d: bias " + shape_string(bias.shape()) + " does not fit " + std::to_string(o) +
                         " output channels");
    }
    Tensor cols = k == 1 ? xv.reshaped({c, h * w}) : im2col(xv, k);
    const Tensor w2 = wv.reshaped({o, c * k * k});
    Tensor out({o, h * w});
    as_matrix(out).noalias() = as_matrix(w2) * as_matrix(cols);
    for (std::size_t oc = 0; oc < o; ++oc) {
        double* row = out.data() + oc * h * w;
        for (std::size_t i = 0; i < h * w; ++i) {
            row[i] += bias.value()[oc];
        }
    }
    out = out.reshaped({o, h, w});
    return make({x, weight, bias}, std::move(out),
                [cols = std::move(cols), w2, c, h, w, o, k,
                 need_x = x.requires_grad(), need_w = weight.requires_grad()](const Tensor& g) {
                    const Tensor g2 = g.reshaped({o, h * w});
                    std::vector<Tensor> grads(3);
                    if (need_x) {
                        Tensor dcols({c * k * k, h * w});
                        as_matrix(dcols).noalias() = as_matrix(w2).transpose() * as_matrix(g2);
                        grads[0] = k == 1 ? dcols.reshaped({c, h, w}) : col2im(dcols, c, h, w, k);
                    }
                    if (need_w) {
                        Tensor dw({o, c * k * k});
                        as_matrix(dw).noalias() = as_matrix(g2) * as_matrix(cols).transpose();
                        grads[1] = dw.reshaped({o, c, k, k});
                    }
                    Tensor db({o});
                    for (std::size_t oc = 0; oc < o; ++oc) {
                        for (std::size_t i = 0; i < h * w; ++i) {
                            db[oc] += g2[oc * h * w + i];
                        }
                    }
                    grads[2] = std::move(db);
                    return grads;
                });
}

Var matmul(const Var& a, const Var& b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require_rank(av, 2, "matmul lhs");
    require_rank(bv, 2, "matmul rhs");
    if (av.dim(1) != bv.dim(0)) {
        throw ShapeError("matmul: " + shape_string(av.shape()) + " x " + shape_string(bv.shape()));
    }
    Tensor out({av.dim(0), bv.dim(1)});
    as_matrix(out).noalias() = as_matrix(av) * as_matrix(bv);
    return make({a, b}, std::move(out), [av, bv](const Tensor& g) {
        Tensor ga(av.shape());
        Tensor gb(bv.shape());
        as_matrix(ga).noalias() = as_matrix(g) * as_matrix(bv).transpose();
        as_matrix(gb).noalias() = as_matrix(av).transpose() * as_matrix(g);
        return std::vector<Tensor>{std::move(ga), std::move(gb)};
    });
}

Var transpose(const Var& a) {
    const Tensor& av = a.value();
    require_rank(av, 2, "transpose");
    Tensor out({av.dim(1), av.dim(0)});
    as_matrix(out) = as_matrix(av).transpose();
    return make({a}, std::move(out), [](const Tensor& g) {
        Tensor ga({g.dim(1), g.dim(0)});
        as_matrix(ga) = as_matrix(g).transpose();
        return std::vector<Tensor>{std::move(ga)};
    });
}

Var softmax_rows(const Var& a) {
    const Tensor& av = a.value();
    require_rank(av, 2, "softmax_rows");
    const std::size_t rows = av.dim(0);
    const std::size_t cols = av.dim(1);
    Tensor out(av.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* in = av.data() + r * cols;
        double* dst = out.data() + r * cols;
        const double peak = *std::max_element(in, in + cols);
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            dst[c] = std::exp(in[c] - peak);
            total += dst[c];
        }
        for (std::size_t c = 0; c < cols; ++c) {
            dst[c] /= total;
        }
    }
    const Tensor probs = out;
    return make({a}, std::move(out), [probs, rows, cols](const Tensor& g) {
        Tensor ga(probs.shape());
        for (std::size_t r = 0; r < rows; ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
                dot += g[r * cols + c] * probs[r * cols + c];
            }
            for (std::size_t c = 0; c < cols; ++c) {
                ga[r * cols + c] = probs[r * cols + c] * (g[r * cols + c] - dot);
            }
        }
        return std::vector<Tensor>{std::move(ga)};
    });
}

Var slice_rows(const Var& a, std::size_t start, std::size_t count) {
    const Tensor& av = a.value();
    require_rank(av, 2, "slice_rows");
    if (start + count > av.dim(0)) {
        throw ShapeError("slice_rows: out of range");
    }
    const std::size_t cols = av.dim(1);
    Tensor out({count, cols});
    std::copy_n(av.data() + start * cols, count * cols, out.data());
    const Shape full = av.shape();
    return make({a}, std::move(out), [full, start, count, cols](const Tensor& g) {
        Tensor ga(full);
        std::copy_n(g.data(), count * cols, ga.data() + start * cols);
        return std::vector<Tensor>{std::move(ga)};
    });
}

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) {
        throw ShapeError("concat_rows: nothing to concatenate");
    }
    const std::size_t cols = parts.front().value().dim(1);
    std::size_t rows = 0;
    std::vector<std::size_t> offsets;
    for (const auto& p : parts) {
        require_rank(p.value(), 2, "concat_rows");
        if (p.value().dim(1) != cols) {
            throw ShapeError("concat_rows: column mismatch");
        }
        offsets.push_back(rows);
        rows += p.value().dim(0);
    }
    Tensor out({rows, cols});
    for (std::size_t i = 0; i < parts.size(); ++i) {
        std::copy_n(parts[i].value().data(), parts[i].value().numel(), out.data() + offsets[i] * cols);
    }
    std::vector<std::size_t> sizes;
    for (const auto& p : parts) {
        sizes.push_back(p.value().dim(0));
    }
    return make(parts, std::move(out), [offsets, sizes, cols](const Tensor& g) {
        std::vector<Tensor> grads;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            Tensor gi({sizes[i], cols});
            std::copy_n(g.data() + offsets[i] * cols, sizes[i] * cols, gi.data());
            grads.push_back(std::move(gi));
        }
        return grads;
    });
}

Var mean_of(const std::vector<Var>& parts) {
    if (parts.empty()) {
        throw ShapeError("mean_of: nothing to average");
    }
    Tensor out(parts.front().shape());
    for (const auto& p : parts) {
        require_same_shape(out, p.value(), "mean_of");
        for (std::size_t i = 0; i < out.numel(); ++i) {
            out[i] += p.value()[i];
        }
    }
    const double inv = 1.0 / static_cast<double>(parts.size());
    for (auto& v : out.values()) {
        v *= inv;
    }
    const std::size_t n = parts.size();
    return make(parts, std::move(out), [n, inv](const Tensor& g) {
        Tensor share = g;
        for (auto& v : share.values()) {
            v *= inv;
        }
        return std::vector<Tensor>(n, share);
    });
}

Var avg_pool2(const Var& x) {
    const Tensor& xv = x.value();
    require_rank(xv, 3, "avg_pool2");
    const std::size_t c = xv.dim(0);
    const std::size_t h = xv.dim(1);
    const std::size_t w = xv.dim(2);
    if (h % 2 || w % 2) {
        throw ShapeError("avg_pool2: spatial dims must be even, got " + shape_string(xv.shape()));
    }
    const std::size_t oh = h / 2;
    const std::size_t ow = w / 2;
    Tensor out({c, oh, ow});
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t xx = 0; xx < ow; ++xx) {
                const std::size_t base = (ch * h + 2 * y) * w + 2 * xx;
                out[(ch * oh + y) * ow + xx] = 0.25 * (xv[base] + xv[base + 1] + xv[base + w] + xv[base + w + 1]);
            }
        }
    }
    return make({x}, std::move(out), [c, h, w, oh, ow](const Tensor& g) {
        Tensor gx({c, h, w});
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t y = 0; y < oh; ++y) {
                for (std::size_t xx = 0; xx < ow; ++xx) {
                    const double share = 0.25 * g[(ch * oh + y) * ow + xx];
                    const std::size_t base = (ch * h + 2 * y) * w + 2 * xx;
                    gx[base] += share;
                    gx[base + 1] += share;
                    gx[base + w] += share;
                    gx[base + w + 1] += share;
                }
            }
        }
        return std::vector<Tensor>{std::move(gx)};
    });
}

Var upsample2(const Var& x) {
    const Tensor& xv = x.value();
    require_rank(xv, 3, "upsample2");
    const std::size_t c = xv.dim(0);
    const std::size_t h = xv.dim(1);
    const std::size_t w = xv.dim(2);
    Tensor out({c, 2 * h, 2 * w});
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < 2 * h; ++y) {
            for (std::size_t xx = 0; xx < 2 * w; ++xx) {
                out[(ch * 2 * h + y) * 2 * w + xx] = xv[(ch * h + y / 2) * w + xx / 2];
            }
        }
    }
    return make({x}, std::move(out), [c, h, w](const Tensor& g) {
        Tensor gx({c, h, w});
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t y = 0; y < 2 * h; ++y) {
                for (std::size_t xx = 0; xx < 2 * w; ++xx) {
                    gx[(ch * h + y / 2) * w + xx / 2] += g[(ch * 2 * h + y) * 2 * w + xx];
                }
            }
        }
        return std::vector<Tensor>{std::move(gx)};
    });
}

Var mse(const Var& a, const Var& b) {
    require_same_shape(a.value(), b.value(), "mse");
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    const std::size_t n = av.numel();
    Tensor diff(av.shape());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        diff[i] = av[i] - bv[i];
        total += diff[i] * diff[i];
    }
    Tensor out({1}, total / static_cast<double>(n));
    return make({a, b}, std::move(out), [diff = std::move(diff), n](const Tensor& g) {
        const double factor = 2.0 * g[0] / static_cast<double>(n);
        Tensor ga(diff.shape());
        Tensor gb(diff.shape());
        for (std::size_t i = 0; i < n; ++i) {
            ga[i] = factor * diff[i];
            gb[i] = -ga[i];
        }
        return std::vector<Tensor>{std::move(ga), std::move(gb)};
    });
}

}  // namespace painter::nn
