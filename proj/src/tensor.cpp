#include "mff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

namespace mff {

namespace {

std::size_t shape_product(const Shape& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t(1), std::multiplies<>());
}

// Raw row-major GEMM kernels. The transposed variants avoid materializing
// transposes in the backward rules.
void gemm_nn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n) {
    std::fill(c, c + m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double av = arow[l];
            const double* brow = b + l * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// c[m,n] += a[m,k] * b[n,k]^T
void gemm_nt_acc(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double acc = 0.0;
            for (std::size_t l = 0; l < k; ++l) acc += arow[l] * brow[l];
            crow[j] += acc;
        }
    }
}

// c[k,n] += a[m,k]^T * b[m,n]
void gemm_tn_acc(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        const double* brow = b + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double av = arow[l];
            double* crow = c + l * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw DimensionError(msg);
}

} // namespace

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << 'x';
        os << s[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape shape, double fill) {
    node_ = std::make_shared<detail::Node>();
    node_->value.assign(shape_product(shape), fill);
    node_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> data) {
    if (shape_product(shape) != data.size())
        throw DimensionError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
    node_ = std::make_shared<detail::Node>();
    node_->shape = std::move(shape);
    node_->value = std::move(data);
}

double Tensor::item() const {
    if (size() != 1)
        throw DimensionError("item() on non-scalar tensor " + shape_str(shape()));
    return node_->value[0];
}

double Tensor::at(std::size_t i, std::size_t j) const {
    if (rank() != 2) throw DimensionError("at(i,j) on tensor of rank " + std::to_string(rank()));
    return node_->value.at(i * node_->shape[1] + j);
}

const std::vector<double>& Tensor::grad() const {
    node_->ensure_grad();
    return node_->grad;
}

void Tensor::zero_grad() {
    node_->grad.assign(node_->value.size(), 0.0);
}

Tensor make_op(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
               std::function<void(detail::Node&)> backprop) {
    Tensor out(std::move(shape), std::move(value));
    bool tracked = false;
    for (const auto& p : parents)
        if (p.node()->requires_grad) { tracked = true; break; }
    if (tracked) {
        out.node()->requires_grad = true;
        for (const auto& p : parents) out.node()->parents.push_back(p.node());
        out.node()->backprop = std::move(backprop);
    }
    return out;
}

// -- operations --------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2 && b.rank() == 2,
            "matmul expects rank-2 operands, got " + shape_str(a.shape()) + " and " +
                shape_str(b.shape()));
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    require(b.dim(0) == k, "matmul inner dimensions disagree: " + shape_str(a.shape()) +
                               " vs " + shape_str(b.shape()));
    std::vector<double> out(m * n);
    gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
    auto an = a.node(), bn = b.node();
    return make_op({m, n}, std::move(out), {a, b}, [an, bn, m, k, n](detail::Node& self) {
        if (an->requires_grad) {
            an->ensure_grad();
            gemm_nt_acc(self.grad.data(), bn->value.data(), an->grad.data(), m, n, k);
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            gemm_tn_acc(an->value.data(), self.grad.data(), bn->grad.data(), m, k, n);
        }
    });
}

Tensor transpose(const Tensor& a) {
    require(a.rank() == 2, "transpose expects rank-2, got " + shape_str(a.shape()));
    const std::size_t m = a.dim(0), n = a.dim(1);
    std::vector<double> out(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a.data()[i * n + j];
    auto an = a.node();
    return make_op({n, m}, std::move(out), {a}, [an, m, n](detail::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) an->grad[i * n + j] += self.grad[j * m + i];
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() == b.shape()) {
        std::vector<double> out(a.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
        auto an = a.node(), bn = b.node();
        return make_op(a.shape(), std::move(out), {a, b}, [an, bn](detail::Node& self) {
            for (auto* n : {an.get(), bn.get()}) {
                if (!n->requires_grad) continue;
                n->ensure_grad();
                for (std::size_t i = 0; i < self.grad.size(); ++i) n->grad[i] += self.grad[i];
            }
        });
    }
    // broadcast [m,n] + [n]
    if (a.rank() == 2 && b.rank() == 1 && a.dim(1) == b.dim(0)) {
        const std::size_t m = a.dim(0), n = a.dim(1);
        std::vector<double> out(a.size());
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a.data()[i * n + j] + b.data()[j];
        auto an = a.node(), bn = b.node();
        return make_op(a.shape(), std::move(out), {a, b}, [an, bn, m, n](detail::Node& self) {
            if (an->requires_grad) {
                an->ensure_grad();
                for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < n; ++j) bn->grad[j] += self.grad[i * n + j];
            }
        });
    }
    throw DimensionError("add: incompatible shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return add(a, scale(b, -1.0));
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require(a.shape() == b.shape(), "mul: shapes differ, " + shape_str(a.shape()) + " vs " +
                                        shape_str(b.shape()));
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
    auto an = a.node(), bn = b.node();
    return make_op(a.shape(), std::move(out), {a, b}, [an, bn](detail::Node& self) {
        if (an->requires_grad) {
            an->ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i)
                an->grad[i] += self.grad[i] * bn->value[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i)
                bn->grad[i] += self.grad[i] * an->value[i];
        }
    });
}

Tensor scale(const Tensor& a, double s) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * s;
    auto an = a.node();
    return make_op(a.shape(), std::move(out), {a}, [an, s](detail::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] * s;
    });
}

Tensor add_scalar(const Tensor& a, double s) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + s;
    auto an = a.node();
    return make_op(a.shape(), std::move(out), {a}, [an](detail::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
    });
}

Tensor relu(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] > 0.0 ? a.data()[i] : 0.0;
    auto an = a.node();
    return make_op(a.shape(), std::move(out), {a}, [an](detail::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            if (an->value[i] > 0.0) an->grad[i] += self.grad[i];
    });
}

Tensor sigmoid(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-a.data()[i]));
    auto an = a.node();
    return make_op(a.shape(), std::move(out), {a}, [an](detail::Node& self) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            const double s = self.value[i];
            an->grad[i] += self.grad[i] * s * (1.0 - s);
        }
    });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
    require(axis < std::max<std::size_t>(x.rank(), 1),
            "softmax: axis " + std::to_string(axis) + " invalid for " + shape_str(x.shape()));
    // treat rank-1 as a single row
    const std::size_t rows = x.rank() == 2 ? x.dim(0) : 1;
    const std::size_t cols = x.rank() == 2 ? x.dim(1) : x.size();
    const bool over_cols = (x.rank() != 2) || axis == 1;
    const std::size_t nslices = over_cols ? rows : cols;
    const std::size_t slice_len = over_cols ? cols : rows;
    auto index = [cols, over_cols](std::size_t s, std::size_t k) {
        return over_cols ? s * cols + k : k * cols + s;
    };
    std::vector<double> out(x.size());
    for (std::size_t s = 0; s < nslices; ++s) {
        double mx = x.data()[index(s, 0)];
        for (std::size_t k = 1; k < slice_len; ++k) mx = std::max(mx, x.data()[index(s, k)]);
        double sum = 0.0;
        for (std::size_t k = 0; k < slice_len; ++k) {
            const double e = std::exp(x.data()[index(s, k)] - mx);
            out[index(s, k)] = e;
            sum += e;
        }
        for (std::size_t k = 0; k < slice_len; ++k) out[index(s, k)] /= sum;
    }
    auto xn = x.node();
    return make_op(x.shape(), std::move(out), {x},
                   [xn, nslices, slice_len, index](detail::Node& self) {
                       if (!xn->requires_grad) return;
                       xn->ensure_grad();
                       for (std::size_t s = 0; s < nslices; ++s) {
                           double dot = 0.0;
                           for (std::size_t k = 0; k < slice_len; ++k)
                               dot += self.grad[index(s, k)] * self.value[index(s, k)];
                           for (std::size_t k = 0; k < slice_len; ++k) {
                               const std::size_t i = index(s, k);
                               xn->grad[i] += self.value[i] * (self.grad[i] - dot);
                           }
                       }
                   });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    const std::size_t d = x.rank() == 2 ? x.dim(1) : x.size();
    const std::size_t rows = x.rank() == 2 ? x.dim(0) : 1;
    require(gamma.size() == d && beta.size() == d,
            "layer_norm: parameter length does not match feature dim " + std::to_string(d));
    std::vector<double> out(x.size()), mean(rows), inv_std(rows), xhat(x.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = x.data().data() + r * d;
        double mu = 0.0;
        for (std::size_t j = 0; j < d; ++j) mu += row[j];
        mu /= double(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
        var /= double(d);
        const double is = 1.0 / std::sqrt(var + eps);
        mean[r] = mu;
        inv_std[r] = is;
        for (std::size_t j = 0; j < d; ++j) {
            const double h = (row[j] - mu) * is;
            xhat[r * d + j] = h;
            out[r * d + j] = h * gamma.data()[j] + beta.data()[j];
        }
    }
    auto xn = x.node(), gn = gamma.node(), bn = beta.node();
    return make_op(x.shape(), std::move(out), {x, gamma, beta},
                   [xn, gn, bn, rows, d, inv_std = std::move(inv_std),
                    xhat = std::move(xhat)](detail::Node& self) {
                       for (std::size_t r = 0; r < rows; ++r) {
                           const double is = inv_std[r];
                           const double* g = self.grad.data() + r * d;
                           const double* h = xhat.data() + r * d;
                           if (gn->requires_grad) {
                               gn->ensure_grad();
                               for (std::size_t j = 0; j < d; ++j) gn->grad[j] += g[j] * h[j];
                           }
                           if (bn->requires_grad) {
                               bn->ensure_grad();
                               for (std::size_t j = 0; j < d; ++j) bn->grad[j] += g[j];
                           }
                           if (xn->requires_grad) {
                               xn->ensure_grad();
                               double sum_gh = 0.0, sum_ghh = 0.0;
                               for (std::size_t j = 0; j < d; ++j) {
                                   const double gh = g[j] * gn->value[j];
                                   sum_gh += gh;
                                   sum_ghh += gh * h[j];
                               }
                               for (std::size_t j = 0; j < d; ++j) {
                                   const double gh = g[j] * gn->value[j];
                                   xn->grad[r * d + j] +=
                                       is * (gh - (sum_gh + h[j] * sum_ghh) / double(d));
                               }
                           }
                       }
                   });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
    require(!parts.empty(), "concat: no inputs");
    std::vector<Tensor> kept;
    for (const auto& p : parts)
        if (p.size() > 0) kept.push_back(p);
    if (kept.empty()) return parts.front();
    if (kept.size() == 1 && parts.size() > 1) return kept.front();
    const std::size_t rk = kept.front().rank();
    require(axis < rk, "concat: axis out of range");
    Shape out_shape = kept.front().shape();
    std::size_t axis_total = 0;
    for (const auto& p : kept) {
        require(p.rank() == rk, "concat: rank mismatch");
        for (std::size_t i = 0; i < rk; ++i)
            if (i != axis)
                require(p.dim(i) == out_shape[i], "concat: non-axis dims differ, " +
                                                      shape_str(p.shape()) + " vs " +
                                                      shape_str(out_shape));
        axis_total += p.dim(axis);
    }
    out_shape[axis] = axis_total;

    // outer = product of dims before axis, inner = product after
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= out_shape[i];
    for (std::size_t i = axis + 1; i < rk; ++i) inner *= out_shape[i];

    std::vector<double> out(outer * axis_total * inner);
    std::vector<std::size_t> offsets(kept.size());
    std::size_t off = 0;
    for (std::size_t pi = 0; pi < kept.size(); ++pi) {
        offsets[pi] = off;
        const auto& p = kept[pi];
        const std::size_t pa = p.dim(axis);
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t a = 0; a < pa; ++a)
                std::copy_n(p.data().data() + (o * pa + a) * inner, inner,
                            out.data() + (o * axis_total + off + a) * inner);
        off += pa;
    }
    std::vector<detail::NodePtr> pnodes;
    std::vector<std::size_t> pax;
    for (const auto& p : kept) {
        pnodes.push_back(p.node());
        pax.push_back(p.dim(axis));
    }
    return make_op(out_shape, std::move(out), kept,
                   [pnodes, pax, offsets, outer, inner, axis_total](detail::Node& self) {
                       for (std::size_t pi = 0; pi < pnodes.size(); ++pi) {
                           auto& n = *pnodes[pi];
                           if (!n.requires_grad) continue;
                           n.ensure_grad();
                           const std::size_t pa = pax[pi], off = offsets[pi];
                           for (std::size_t o = 0; o < outer; ++o)
                               for (std::size_t a = 0; a < pa; ++a) {
                                   const double* src =
                                       self.grad.data() + (o * axis_total + off + a) * inner;
                                   double* dst = n.grad.data() + (o * pa + a) * inner;
                                   for (std::size_t k = 0; k < inner; ++k) dst[k] += src[k];
                               }
                       }
                   });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t len) {
    require(axis < x.rank(), "slice: axis out of range");
    require(start + len <= x.dim(axis), "slice: range exceeds dim");
    Shape out_shape = x.shape();
    out_shape[axis] = len;
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
    for (std::size_t i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);
    const std::size_t ax = x.dim(axis);
    std::vector<double> out(outer * len * inner);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t a = 0; a < len; ++a)
            std::copy_n(x.data().data() + (o * ax + start + a) * inner, inner,
                        out.data() + (o * len + a) * inner);
    auto xn = x.node();
    return make_op(out_shape, std::move(out), {x},
                   [xn, outer, inner, ax, start, len](detail::Node& self) {
                       if (!xn->requires_grad) return;
                       xn->ensure_grad();
                       for (std::size_t o = 0; o < outer; ++o)
                           for (std::size_t a = 0; a < len; ++a) {
                               const double* src = self.grad.data() + (o * len + a) * inner;
                               double* dst = xn->grad.data() + (o * ax + start + a) * inner;
                               for (std::size_t k = 0; k < inner; ++k) dst[k] += src[k];
                           }
                   });
}

Tensor pointwise_scale(const Tensor& scores, const Tensor& x) {
    require(x.rank() == 2 && scores.rank() == 1,
            "pointwise_scale expects scores[p] and x[p,d]");
    require(scores.dim(0) == x.dim(0),
            "pointwise_scale: scores length " + std::to_string(scores.dim(0)) +
                " vs rows " + std::to_string(x.dim(0)));
    const std::size_t p = x.dim(0), d = x.dim(1);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < d; ++j) out[i * d + j] = scores.data()[i] * x.data()[i * d + j];
    auto sn = scores.node(), xn = x.node();
    return make_op(x.shape(), std::move(out), {scores, x}, [sn, xn, p, d](detail::Node& self) {
        if (sn->requires_grad) {
            sn->ensure_grad();
            for (std::size_t i = 0; i < p; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < d; ++j)
                    acc += self.grad[i * d + j] * xn->value[i * d + j];
                sn->grad[i] += acc;
            }
        }
        if (xn->requires_grad) {
            xn->ensure_grad();
            for (std::size_t i = 0; i < p; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    xn->grad[i * d + j] += self.grad[i * d + j] * sn->value[i];
        }
    });
}

Tensor mean_pool(const Tensor& x) {
    require(x.rank() == 2, "mean_pool expects [n,d], got " + shape_str(x.shape()));
    const std::size_t n = x.dim(0), d = x.dim(1);
    require(n >= 1, "mean_pool: empty sequence");
    std::vector<double> out(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out[j] += x.data()[i * d + j];
    for (std::size_t j = 0; j < d; ++j) out[j] /= double(n);
    auto xn = x.node();
    return make_op({d}, std::move(out), {x}, [xn, n, d](detail::Node& self) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) xn->grad[i * d + j] += self.grad[j] / double(n);
    });
}

Tensor sum_axis(const Tensor& x, std::size_t axis) {
    require(x.rank() == 2 && axis < 2, "sum_axis expects rank-2 and axis 0|1");
    const std::size_t m = x.dim(0), n = x.dim(1);
    if (axis == 1) {
        std::vector<double> out(m, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) out[i] += x.data()[i * n + j];
        auto xn = x.node();
        return make_op({m}, std::move(out), {x}, [xn, m, n](detail::Node& self) {
            if (!xn->requires_grad) return;
            xn->ensure_grad();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) xn->grad[i * n + j] += self.grad[i];
        });
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j] += x.data()[i * n + j];
    auto xn = x.node();
    return make_op({n}, std::move(out), {x}, [xn, m, n](detail::Node& self) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) xn->grad[i * n + j] += self.grad[j];
    });
}

Tensor sum_all(const Tensor& x) {
    double s = 0.0;
    for (double v : x.data()) s += v;
    auto xn = x.node();
    return make_op({}, {s}, {x}, [xn](detail::Node& self) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (double& g : xn->grad) g += self.grad[0];
    });
}

Tensor reshape(const Tensor& x, Shape shape) {
    std::size_t prod = 1;
    for (auto d : shape) prod *= d;
    require(prod == x.size(), "reshape: size mismatch, " + shape_str(x.shape()) + " to " +
                                  shape_str(shape));
    auto xn = x.node();
    return make_op(std::move(shape), x.data(), {x}, [xn](detail::Node& self) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) xn->grad[i] += self.grad[i];
    });
}

Tensor bce_loss(double label, const Tensor& prediction) {
    require(prediction.size() == 1, "bce_loss: prediction must be scalar");
    constexpr double kEps = 1e-7;
    const double y = label;
    const double c = std::clamp(prediction.data()[0], kEps, 1.0 - kEps);
    const double loss = -(y * std::log(c) + (1.0 - y) * std::log(1.0 - c));
    const bool clamped = prediction.data()[0] < kEps || prediction.data()[0] > 1.0 - kEps;
    auto pn = prediction.node();
    return make_op({}, {loss}, {prediction}, [pn, y, c, clamped](detail::Node& self) {
        if (!pn->requires_grad || clamped) return;
        pn->ensure_grad();
        pn->grad[0] += self.grad[0] * (-y / c + (1.0 - y) / (1.0 - c));
    });
}

// -- backward ----------------------------------------------------------------

void backward(const Tensor& loss) {
    if (loss.size() != 1)
        throw DimensionError("backward: loss must be scalar, got " + shape_str(loss.shape()));
    // iterative DFS post-order; each node appears once
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> seen;
    struct Frame {
        detail::Node* node;
        std::size_t next_child;
    };
    std::vector<Frame> stack;
    if (loss.node()->requires_grad) {
        stack.push_back({loss.node().get(), 0});
        seen.insert(loss.node().get());
    }
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_child < f.node->parents.size()) {
            detail::Node* child = f.node->parents[f.next_child++].get();
            if (child->requires_grad && seen.insert(child).second)
                stack.push_back({child, 0});
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }
    loss.node()->ensure_grad();
    loss.node()->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* n = *it;
        if (n->backprop) {
            n->ensure_grad();
            n->backprop(*n);
        }
    }
}

double grad_check(const std::function<Tensor()>& f, std::vector<Tensor>& params,
                  double h, std::size_t max_coords_per_param, std::uint64_t seed) {
    for (auto& p : params) {
        p.set_requires_grad(true);
        p.zero_grad();
    }
    Tensor loss = f();
    backward(loss);
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (auto& p : params) analytic.push_back(p.grad());

    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& p = params[pi];
        std::vector<std::size_t> coords(p.size());
        std::iota(coords.begin(), coords.end(), 0);
        if (max_coords_per_param > 0 && coords.size() > max_coords_per_param) {
            std::shuffle(coords.begin(), coords.end(), rng);
            coords.resize(max_coords_per_param);
        }
        for (std::size_t c : coords) {
            const double orig = p.raw()[c];
            p.raw()[c] = orig + h;
            const double fp = f().item();
            p.raw()[c] = orig - h;
            const double fm = f().item();
            p.raw()[c] = orig;
            const double fd = (fp - fm) / (2.0 * h);
            const double a = analytic[pi][c];
            const double denom = std::max(std::abs(a) + std::abs(fd), 1e-8);
            worst = std::max(worst, std::abs(a - fd) / denom);
        }
    }
    return worst;
}

} // namespace mff
