#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "signa/tensor.hpp"

namespace signa {

namespace detail {

inline void check_finite(const Tensor& t, const char* op) {
    for (double v : t.values())
        if (!std::isfinite(v))
            throw NumericError(std::string(op) + ": input contains a non-finite value");
}

inline void matmul_into(const Tensor& a, const Tensor& b, const Tensor& out) {
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    const double* av = a.values().data();
    const double* bv = b.values().data();
    double* ov = out.values().data();
    std::fill(ov, ov + static_cast<std::size_t>(m) * n, 0.0);
    for (int i = 0; i < m; ++i)
        for (int kk = 0; kk < k; ++kk) {
            const double aik = av[static_cast<std::size_t>(i) * k + kk];
            const double* brow = bv + static_cast<std::size_t>(kk) * n;
            double* orow = ov + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) orow[j] += aik * brow[j];
        }
}

// Inner product whose result is invariant under any permutation of the
// index set: the term multiset is brought into a canonical order before
// the left fold, so relabeled operands sum to bit-identical values.
inline double stable_dot(const double* a, int stride_a, const double* b, int stride_b, int n) {
    std::vector<double> terms(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        terms[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i) * stride_a] *
                                             b[static_cast<std::size_t>(i) * stride_b];
    std::sort(terms.begin(), terms.end(), [](double x, double y) {
        if (x < y) return true;
        if (y < x) return false;
        return std::signbit(x) && !std::signbit(y);  // canonical: -0 before +0
    });
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

inline void softmax_rows_into(const Tensor& m, const Tensor& out) {
    const int rows = m.dim(0), cols = m.dim(1);
    for (int i = 0; i < rows; ++i) {
        const double* row = m.values().data() + static_cast<std::size_t>(i) * cols;
        double* orow = out.values().data() + static_cast<std::size_t>(i) * cols;
        double mx = row[0];
        for (int j = 1; j < cols; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (int j = 0; j < cols; ++j) {
            orow[j] = std::exp(row[j] - mx);
            sum += orow[j];
        }
        for (int j = 0; j < cols; ++j) orow[j] /= sum;
    }
}

inline double sigmoid_stable(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace detail

/// out = A·B. Backward: dA += dOut·Bᵀ, dB += Aᵀ·dOut.
inline Tensor matmul(DiffGraph& g, const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        throw ShapeError("matmul: incompatible shapes " + detail::shape_str(a.shape()) +
                         " and " + detail::shape_str(b.shape()));
    Tensor out = Tensor::zeros({a.dim(0), b.dim(1)}, a.requires_grad() || b.requires_grad());
    detail::matmul_into(a, b, out);
    g.record(
        "matmul", {a, b}, out,
        [a, b, out] { detail::matmul_into(a, b, out); },
        [a, b, out] {
            const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
            const std::vector<double>& go = out.grad();
            if (a.requires_grad()) {
                std::vector<double>& ga = a.grad();
                for (int i = 0; i < m; ++i)
                    for (int kk = 0; kk < k; ++kk) {
                        double acc = 0.0;
                        for (int j = 0; j < n; ++j)
                            acc += go[static_cast<std::size_t>(i) * n + j] *
                                   b.values()[static_cast<std::size_t>(kk) * n + j];
                        ga[static_cast<std::size_t>(i) * k + kk] += acc;
                    }
            }
            if (b.requires_grad()) {
                std::vector<double>& gb = b.grad();
                for (int kk = 0; kk < k; ++kk)
                    for (int j = 0; j < n; ++j) {
                        double acc = 0.0;
                        for (int i = 0; i < m; ++i)
                            acc += a.values()[static_cast<std::size_t>(i) * k + kk] *
                                   go[static_cast<std::size_t>(i) * n + j];
                        gb[static_cast<std::size_t>(kk) * n + j] += acc;
                    }
            }
        });
    return out;
}

/// y = M·v for rank-2 M and rank-1 v.
inline Tensor matvec(DiffGraph& g, const Tensor& m, const Tensor& v) {
    if (m.rank() != 2 || v.rank() != 1 || m.dim(1) != v.dim(0))
        throw ShapeError("matvec: incompatible shapes " + detail::shape_str(m.shape()) +
                         " and " + detail::shape_str(v.shape()));
    const int rows = m.dim(0), cols = m.dim(1);
    Tensor out = Tensor::zeros({rows}, m.requires_grad() || v.requires_grad());
    auto run = [m, v, out, rows, cols] {
        for (int i = 0; i < rows; ++i) {
            double acc = 0.0;
            for (int j = 0; j < cols; ++j) acc += m.at(i, j) * v[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)] = acc;
        }
    };
    run();
    g.record(
        "matvec", {m, v}, out, run,
        [m, v, out, rows, cols] {
            const std::vector<double>& go = out.grad();
            for (int i = 0; i < rows; ++i) {
                const double gi = go[static_cast<std::size_t>(i)];
                for (int j = 0; j < cols; ++j) {
                    if (m.requires_grad()) m.grad()[static_cast<std::size_t>(i) * cols + j] +=
                        gi * v[static_cast<std::size_t>(j)];
                    if (v.requires_grad()) v.grad()[static_cast<std::size_t>(j)] += gi * m.at(i, j);
                }
            }
        });
    return out;
}

/// Row-wise softmax with max-subtraction. Rejects non-finite input.
inline Tensor softmax_rows(DiffGraph& g, const Tensor& m) {
    if (m.rank() != 2)
        throw ShapeError("softmax_rows: expected rank-2 input, got " +
                         detail::shape_str(m.shape()));
    detail::check_finite(m, "softmax_rows");
    Tensor out = Tensor::zeros(m.shape(), m.requires_grad());
    detail::softmax_rows_into(m, out);
    g.record(
        "softmax_rows", {m}, out,
        [m, out] { detail::softmax_rows_into(m, out); },
        [m, out] {
            if (!m.requires_grad()) return;
            const int rows = m.dim(0), cols = m.dim(1);
            for (int i = 0; i < rows; ++i) {
                const double* y = out.values().data() + static_cast<std::size_t>(i) * cols;
                const double* gy = out.grad().data() + static_cast<std::size_t>(i) * cols;
                double* gx = m.grad().data() + static_cast<std::size_t>(i) * cols;
                double dot = 0.0;
                for (int j = 0; j < cols; ++j) dot += gy[j] * y[j];
                for (int j = 0; j < cols; ++j) gx[j] += y[j] * (gy[j] - dot);
            }
        });
    return out;
}

/// Row-wise softmax restricted to entries where mask != 0; masked-out
/// entries are exactly zero in the output and receive no gradient.
/// Every row must have at least one active entry.
inline Tensor masked_softmax_rows(DiffGraph& g, const Tensor& m,
                                  const std::vector<std::uint8_t>& mask) {
    if (m.rank() != 2)
        throw ShapeError("masked_softmax_rows: expected rank-2 input, got " +
                         detail::shape_str(m.shape()));
    if (mask.size() != m.size())
        throw ShapeError("masked_softmax_rows: mask size does not match input");
    detail::check_finite(m, "masked_softmax_rows");
    const int rows = m.dim(0), cols = m.dim(1);
    for (int i = 0; i < rows; ++i) {
        bool any = false;
        for (int j = 0; j < cols; ++j) any = any || mask[static_cast<std::size_t>(i) * cols + j];
        if (!any)
            throw NumericError("masked_softmax_rows: row " + std::to_string(i) +
                               " has no active entries");
    }
    Tensor out = Tensor::zeros(m.shape(), m.requires_grad());
    auto run = [m, out, mask, rows, cols] {
        for (int i = 0; i < rows; ++i) {
            const double* row = m.values().data() + static_cast<std::size_t>(i) * cols;
            const std::uint8_t* mk = mask.data() + static_cast<std::size_t>(i) * cols;
            double* orow = out.values().data() + static_cast<std::size_t>(i) * cols;
            double mx = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < cols; ++j)
                if (mk[j]) mx = std::max(mx, row[j]);
            double sum = 0.0;
            for (int j = 0; j < cols; ++j) {
                orow[j] = mk[j] ? std::exp(row[j] - mx) : 0.0;
                sum += orow[j];
            }
            for (int j = 0; j < cols; ++j) orow[j] /= sum;
        }
    };
    run();
    g.record(
        "masked_softmax_rows", {m}, out, run,
        [m, out, mask, rows, cols] {
            if (!m.requires_grad()) return;
            for (int i = 0; i < rows; ++i) {
                const double* y = out.values().data() + static_cast<std::size_t>(i) * cols;
                const double* gy = out.grad().data() + static_cast<std::size_t>(i) * cols;
                const std::uint8_t* mk = mask.data() + static_cast<std::size_t>(i) * cols;
                double* gx = m.grad().data() + static_cast<std::size_t>(i) * cols;
                double dot = 0.0;
                for (int j = 0; j < cols; ++j)
                    if (mk[j]) dot += gy[j] * y[j];
                for (int j = 0; j < cols; ++j)
                    if (mk[j]) gx[j] += y[j] * (gy[j] - dot);
            }
        });
    return out;
}

enum class Act { LeakyRelu, Sigmoid };

/// Elementwise activation with matching analytic derivative.
inline Tensor activation(DiffGraph& g, Act kind, const Tensor& x, double slope = 0.01) {
    if (kind == Act::LeakyRelu && !(slope > 0.0))
        throw ConfigError("leaky_relu: slope must be positive");
    Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
    auto run = [x, out, kind, slope] {
        const std::vector<double>& xv = x.values();
        std::vector<double>& ov = out.values();
        if (kind == Act::LeakyRelu) {
            for (std::size_t i = 0; i < xv.size(); ++i)
                ov[i] = xv[i] >= 0.0 ? xv[i] : slope * xv[i];
        } else {
            for (std::size_t i = 0; i < xv.size(); ++i) ov[i] = detail::sigmoid_stable(xv[i]);
        }
    };
    run();
    g.record(
        kind == Act::LeakyRelu ? "leaky_relu" : "sigmoid", {x}, out, run,
        [x, out, kind, slope] {
            if (!x.requires_grad()) return;
            const std::vector<double>& go = out.grad();
            std::vector<double>& gx = x.grad();
            if (kind == Act::LeakyRelu) {
                const std::vector<double>& xv = x.values();
                for (std::size_t i = 0; i < gx.size(); ++i)
                    gx[i] += go[i] * (xv[i] >= 0.0 ? 1.0 : slope);
            } else {
                const std::vector<double>& y = out.values();
                for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i] * y[i] * (1.0 - y[i]);
            }
        });
    return out;
}

inline Tensor leaky_relu(DiffGraph& g, const Tensor& x, double slope = 0.01) {
    return activation(g, Act::LeakyRelu, x, slope);
}

inline Tensor sigmoid(DiffGraph& g, const Tensor& x) {
    return activation(g, Act::Sigmoid, x);
}

/// Per-channel spatial mean of a D×w×h feature map.
inline Tensor global_avg_pool(DiffGraph& g, const Tensor& f) {
    if (f.rank() != 3)
        throw ShapeError("global_avg_pool: expected rank-3 feature map, got " +
                         detail::shape_str(f.shape()));
    const int channels = f.dim(0), h = f.dim(1), w = f.dim(2);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    Tensor out = Tensor::zeros({channels}, f.requires_grad());
    auto run = [f, out, channels, plane] {
        for (int c = 0; c < channels; ++c) {
            const double* p = f.values().data() + static_cast<std::size_t>(c) * plane;
            double acc = 0.0;
            for (std::size_t i = 0; i < plane; ++i) acc += p[i];
            out[static_cast<std::size_t>(c)] = acc / static_cast<double>(plane);
        }
    };
    run();
    g.record(
        "global_avg_pool", {f}, out, run,
        [f, out, channels, plane] {
            if (!f.requires_grad()) return;
            const double inv = 1.0 / static_cast<double>(plane);
            for (int c = 0; c < channels; ++c) {
                const double gc = out.grad()[static_cast<std::size_t>(c)] * inv;
                double* gp = f.grad().data() + static_cast<std::size_t>(c) * plane;
                for (std::size_t i = 0; i < plane; ++i) gp[i] += gc;
            }
        });
    return out;
}

namespace detail {

inline void conv2d_into(const Tensor& x, const Tensor& k, int stride, int pad,
                        const Tensor& out) {
    const int cin = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int cout = k.dim(0), kh = k.dim(2), kw = k.dim(3);
    const int oh = out.dim(1), ow = out.dim(2);
    std::fill(out.values().begin(), out.values().end(), 0.0);
    for (int co = 0; co < cout; ++co)
        for (int ci = 0; ci < cin; ++ci) {
            const double* kern = k.values().data() +
                ((static_cast<std::size_t>(co) * cin + ci) * kh) * kw;
            const double* xin = x.values().data() + static_cast<std::size_t>(ci) * h * w;
            double* o = out.values().data() + static_cast<std::size_t>(co) * oh * ow;
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    double acc = 0.0;
                    const int iy0 = oy * stride - pad, ix0 = ox * stride - pad;
                    for (int ky = 0; ky < kh; ++ky) {
                        const int iy = iy0 + ky;
                        if (iy < 0 || iy >= h) continue;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ix = ix0 + kx;
                            if (ix < 0 || ix >= w) continue;
                            acc += xin[static_cast<std::size_t>(iy) * w + ix] *
                                   kern[static_cast<std::size_t>(ky) * kw + kx];
                        }
                    }
                    o[static_cast<std::size_t>(oy) * ow + ox] += acc;
                }
        }
}

}  // namespace detail

/// Direct 2-D convolution with zero padding.
/// x: Cin×H×W, k: Cout×Cin×kh×kw -> Cout×H'×W' with
/// H' = floor((H + 2·pad - kh)/stride) + 1 and analogously W'.
inline Tensor conv2d(DiffGraph& g, const Tensor& x, const Tensor& k, int stride = 1,
                     int pad = 0) {
    if (x.rank() != 3 || k.rank() != 4 || k.dim(1) != x.dim(0))
        throw ShapeError("conv2d: incompatible shapes " + detail::shape_str(x.shape()) +
                         " and " + detail::shape_str(k.shape()));
    if (stride < 1) throw ConfigError("conv2d: stride must be >= 1");
    if (pad < 0) throw ConfigError("conv2d: pad must be >= 0");
    const int h = x.dim(1), w = x.dim(2), kh = k.dim(2), kw = k.dim(3);
    if (kh > h + 2 * pad || kw > w + 2 * pad)
        throw ShapeError("conv2d: kernel " + detail::shape_str(k.shape()) +
                         " larger than padded input " + detail::shape_str(x.shape()) +
                         " with pad " + std::to_string(pad));
    const int oh = (h + 2 * pad - kh) / stride + 1;
    const int ow = (w + 2 * pad - kw) / stride + 1;
    Tensor out = Tensor::zeros({k.dim(0), oh, ow}, x.requires_grad() || k.requires_grad());
    detail::conv2d_into(x, k, stride, pad, out);
    g.record(
        "conv2d", {x, k}, out,
        [x, k, out, stride, pad] { detail::conv2d_into(x, k, stride, pad, out); },
        [x, k, out, stride, pad] {
            const int cin = x.dim(0), h = x.dim(1), w = x.dim(2);
            const int cout = k.dim(0), kh = k.dim(2), kw = k.dim(3);
            const int oh = out.dim(1), ow = out.dim(2);
            const bool gx = x.requires_grad(), gk = k.requires_grad();
            for (int co = 0; co < cout; ++co)
                for (int ci = 0; ci < cin; ++ci) {
                    const std::size_t kbase = ((static_cast<std::size_t>(co) * cin + ci) * kh) * kw;
                    const std::size_t xbase = static_cast<std::size_t>(ci) * h * w;
                    const double* go = out.grad().data() + static_cast<std::size_t>(co) * oh * ow;
                    for (int oy = 0; oy < oh; ++oy)
                        for (int ox = 0; ox < ow; ++ox) {
                            const double gv = go[static_cast<std::size_t>(oy) * ow + ox];
                            if (gv == 0.0) continue;
                            const int iy0 = oy * stride - pad, ix0 = ox * stride - pad;
                            for (int ky = 0; ky < kh; ++ky) {
                                const int iy = iy0 + ky;
                                if (iy < 0 || iy >= h) continue;
                                for (int kx = 0; kx < kw; ++kx) {
                                    const int ix = ix0 + kx;
                                    if (ix < 0 || ix >= w) continue;
                                    const std::size_t xi = xbase + static_cast<std::size_t>(iy) * w + ix;
                                    const std::size_t ki = kbase + static_cast<std::size_t>(ky) * kw + kx;
                                    if (gx) x.grad()[xi] += gv * k.values()[ki];
                                    if (gk) k.grad()[ki] += gv * x.values()[xi];
                                }
                            }
                        }
                }
        });
    return out;
}

/// y = A·x + b for rank-1 x.
inline Tensor affine(DiffGraph& g, const Tensor& x, const Tensor& a, const Tensor& b) {
    if (x.rank() != 1 || a.rank() != 2 || b.rank() != 1 || a.dim(1) != x.dim(0) ||
        a.dim(0) != b.dim(0))
        throw ShapeError("affine: incompatible shapes x=" + detail::shape_str(x.shape()) +
                         " A=" + detail::shape_str(a.shape()) +
                         " b=" + detail::shape_str(b.shape()));
    const int m = a.dim(0), n = a.dim(1);
    Tensor out = Tensor::zeros({m},
                               x.requires_grad() || a.requires_grad() || b.requires_grad());
    auto run = [x, a, b, out, m, n] {
        for (int i = 0; i < m; ++i) {
            double acc = b[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) acc += a.at(i, j) * x[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)] = acc;
        }
    };
    run();
    g.record(
        "affine", {x, a, b}, out, run,
        [x, a, b, out, m, n] {
            const std::vector<double>& go = out.grad();
            for (int i = 0; i < m; ++i) {
                const double gi = go[static_cast<std::size_t>(i)];
                if (b.requires_grad()) b.grad()[static_cast<std::size_t>(i)] += gi;
                for (int j = 0; j < n; ++j) {
                    if (a.requires_grad())
                        a.grad()[static_cast<std::size_t>(i) * n + j] +=
                            gi * x[static_cast<std::size_t>(j)];
                    if (x.requires_grad())
                        x.grad()[static_cast<std::size_t>(j)] += gi * a.at(i, j);
                }
            }
        });
    return out;
}

/// Elementwise sum of two same-shape tensors.
inline Tensor add(DiffGraph& g, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw ShapeError("add: shape mismatch " + detail::shape_str(a.shape()) + " vs " +
                         detail::shape_str(b.shape()));
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad() || b.requires_grad());
    auto run = [a, b, out] {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    };
    run();
    g.record(
        "add", {a, b}, out, run,
        [a, b, out] {
            const std::vector<double>& go = out.grad();
            if (a.requires_grad())
                for (std::size_t i = 0; i < go.size(); ++i) a.grad()[i] += go[i];
            if (b.requires_grad())
                for (std::size_t i = 0; i < go.size(); ++i) b.grad()[i] += go[i];
        });
    return out;
}

/// Elementwise product of two same-shape tensors.
inline Tensor mul(DiffGraph& g, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw ShapeError("mul: shape mismatch " + detail::shape_str(a.shape()) + " vs " +
                         detail::shape_str(b.shape()));
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad() || b.requires_grad());
    auto run = [a, b, out] {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
    };
    run();
    g.record(
        "mul", {a, b}, out, run,
        [a, b, out] {
            const std::vector<double>& go = out.grad();
            if (a.requires_grad())
                for (std::size_t i = 0; i < go.size(); ++i) a.grad()[i] += go[i] * b[i];
            if (b.requires_grad())
                for (std::size_t i = 0; i < go.size(); ++i) b.grad()[i] += go[i] * a[i];
        });
    return out;
}

/// Same values, new shape; element count must be preserved (row-major).
inline Tensor reshape(DiffGraph& g, const Tensor& x, std::vector<int> shape) {
    if (detail::shape_numel(shape) != x.size())
        throw ShapeError("reshape: cannot view " + detail::shape_str(x.shape()) + " as " +
                         detail::shape_str(shape));
    Tensor out = Tensor::zeros(std::move(shape), x.requires_grad());
    auto run = [x, out] { out.values() = x.values(); };
    run();
    g.record(
        "reshape", {x}, out, run,
        [x, out] {
            if (!x.requires_grad()) return;
            const std::vector<double>& go = out.grad();
            for (std::size_t i = 0; i < go.size(); ++i) x.grad()[i] += go[i];
        });
    return out;
}

/// Concatenates rank-1 tensors into one rank-1 tensor.
inline Tensor concat(DiffGraph& g, const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat: needs at least one input");
    std::size_t total = 0;
    bool rg = false;
    for (const Tensor& p : parts) {
        if (p.rank() != 1)
            throw ShapeError("concat: expected rank-1 parts, got " +
                             detail::shape_str(p.shape()));
        total += p.size();
        rg = rg || p.requires_grad();
    }
    Tensor out = Tensor::zeros({static_cast<int>(total)}, rg);
    auto run = [parts, out] {
        std::size_t off = 0;
        for (const Tensor& p : parts) {
            std::copy(p.values().begin(), p.values().end(), out.values().begin() + off);
            off += p.size();
        }
    };
    run();
    g.record(
        "concat", parts, out, run,
        [parts, out] {
            std::size_t off = 0;
            for (const Tensor& p : parts) {
                if (p.requires_grad())
                    for (std::size_t i = 0; i < p.size(); ++i) p.grad()[i] += out.grad()[off + i];
                off += p.size();
            }
        });
    return out;
}

/// Stacks equal-length rank-1 tensors into a rank-2 matrix, one per row.
inline Tensor stack_rows(DiffGraph& g, const std::vector<Tensor>& rows) {
    if (rows.empty()) throw ShapeError("stack_rows: needs at least one row");
    const int cols = rows.front().dim(0);
    bool rg = false;
    for (const Tensor& r : rows) {
        if (r.rank() != 1 || r.dim(0) != cols)
            throw ShapeError("stack_rows: rows must share shape, got " +
                             detail::shape_str(r.shape()));
        rg = rg || r.requires_grad();
    }
    Tensor out = Tensor::zeros({static_cast<int>(rows.size()), cols}, rg);
    auto run = [rows, out, cols] {
        for (std::size_t i = 0; i < rows.size(); ++i)
            std::copy(rows[i].values().begin(), rows[i].values().end(),
                      out.values().begin() + i * static_cast<std::size_t>(cols));
    };
    run();
    g.record(
        "stack_rows", rows, out, run,
        [rows, out, cols] {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (!rows[i].requires_grad()) continue;
                for (int j = 0; j < cols; ++j)
                    rows[i].grad()[static_cast<std::size_t>(j)] +=
                        out.grad()[i * static_cast<std::size_t>(cols) + j];
            }
        });
    return out;
}

/// Contiguous slice [offset, offset+len) of a rank-1 tensor.
inline Tensor slice(DiffGraph& g, const Tensor& x, int offset, int len) {
    if (x.rank() != 1)
        throw ShapeError("slice: expected rank-1 input, got " + detail::shape_str(x.shape()));
    if (offset < 0 || len <= 0 || offset + len > x.dim(0))
        throw ShapeError("slice: range [" + std::to_string(offset) + ", " +
                         std::to_string(offset + len) + ") out of bounds for " +
                         detail::shape_str(x.shape()));
    Tensor out = Tensor::zeros({len}, x.requires_grad());
    auto run = [x, out, offset, len] {
        std::copy(x.values().begin() + offset, x.values().begin() + offset + len,
                  out.values().begin());
    };
    run();
    g.record(
        "slice", {x}, out, run,
        [x, out, offset, len] {
            if (!x.requires_grad()) return;
            for (int i = 0; i < len; ++i)
                x.grad()[static_cast<std::size_t>(offset + i)] +=
                    out.grad()[static_cast<std::size_t>(i)];
        });
    return out;
}

/// Sum of all entries, as a scalar tensor of shape [1].
inline Tensor sum_all(DiffGraph& g, const Tensor& x) {
    Tensor out = Tensor::zeros({1}, x.requires_grad());
    auto run = [x, out] {
        double acc = 0.0;
        for (double v : x.values()) acc += v;
        out[0] = acc;
    };
    run();
    g.record(
        "sum_all", {x}, out, run,
        [x, out] {
            if (!x.requires_grad()) return;
            const double go = out.grad()[0];
            for (std::size_t i = 0; i < x.size(); ++i) x.grad()[i] += go;
        });
    return out;
}

}  // namespace signa
