#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "signa/errors.hpp"

namespace signa {

namespace detail {

inline std::int64_t next_node_id() {
    static std::atomic<std::int64_t> counter{0};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

inline std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

inline std::size_t shape_numel(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
}

}  // namespace detail

/// Dense row-major tensor of doubles with a same-shape gradient block.
///
/// Tensor is a shared handle: copies refer to the same storage, which is what
/// lets recorded operations and optimizer state alias model parameters.
/// Mutating accessors are const for that reason (pointer semantics).
class Tensor {
public:
    Tensor() = default;

    Tensor(std::vector<int> shape, std::vector<double> values, bool requires_grad = false)
        : d_(std::make_shared<Data>()) {
        for (int dim : shape) {
            if (dim <= 0)
                throw ShapeError("tensor dimensions must be positive, got " +
                                 detail::shape_str(shape));
        }
        if (detail::shape_numel(shape) != values.size())
            throw ShapeError("value count " + std::to_string(values.size()) +
                             " does not match shape " + detail::shape_str(shape));
        d_->shape = std::move(shape);
        d_->values = std::move(values);
        d_->grad.assign(d_->values.size(), 0.0);
        d_->requires_grad = requires_grad;
    }

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false) {
        std::vector<double> v(detail::shape_numel(shape), 0.0);
        return Tensor(std::move(shape), std::move(v), requires_grad);
    }

    static Tensor full(std::vector<int> shape, double value, bool requires_grad = false) {
        std::vector<double> v(detail::shape_numel(shape), value);
        return Tensor(std::move(shape), std::move(v), requires_grad);
    }

    static Tensor scalar(double value, bool requires_grad = false) {
        return Tensor({1}, {value}, requires_grad);
    }

    bool defined() const { return static_cast<bool>(d_); }

    const std::vector<int>& shape() const { return d_->shape; }
    int rank() const { return static_cast<int>(d_->shape.size()); }
    int dim(int i) const { return d_->shape[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return d_->values.size(); }

    std::vector<double>& values() const { return d_->values; }
    std::vector<double>& grad() const { return d_->grad; }

    double& operator[](std::size_t i) const { return d_->values[i]; }

    // Row-major element access for ranks 2 and 3.
    double& at(int i, int j) const {
        return d_->values[static_cast<std::size_t>(i) * d_->shape[1] + j];
    }
    double& at(int i, int j, int k) const {
        return d_->values[(static_cast<std::size_t>(i) * d_->shape[1] + j) * d_->shape[2] + k];
    }

    bool requires_grad() const { return d_->requires_grad; }
    void set_requires_grad(bool rg) const { d_->requires_grad = rg; }

    std::int64_t node_id() const { return d_->node_id; }

    void zero_grad() const { d_->grad.assign(d_->grad.size(), 0.0); }

    /// Deep copy of values into a fresh tensor (grad reset, same shape).
    Tensor clone() const {
        return Tensor(d_->shape, d_->values, d_->requires_grad);
    }

    bool same_storage(const Tensor& other) const { return d_ == other.d_; }

private:
    struct Data {
        std::vector<int> shape;
        std::vector<double> values;
        std::vector<double> grad;
        bool requires_grad = false;
        std::int64_t node_id = -1;
    };

    std::shared_ptr<Data> d_;

    friend class DiffGraph;
};

inline void zero_grad(const std::vector<Tensor>& tensors) {
    for (const Tensor& t : tensors) t.zero_grad();
}

/// Tape of recorded operations forming one reverse-mode differentiation unit.
///
/// Operations append in execution order, so the record is topologically
/// sorted by construction. Each record carries a forward closure (for
/// bit-exact replay) and a backward closure that reads the output gradient
/// and accumulates into the inputs.
class DiffGraph {
public:
    DiffGraph() = default;
    DiffGraph(const DiffGraph&) = delete;
    DiffGraph& operator=(const DiffGraph&) = delete;
    DiffGraph(DiffGraph&&) = default;
    DiffGraph& operator=(DiffGraph&&) = default;

    /// Appends an operation whose output has already been computed.
    /// `forward` recomputes output values from input values in place;
    /// `backward` accumulates input gradients from the output gradient.
    void record(std::string kind, std::vector<Tensor> inputs, Tensor output,
                std::function<void()> forward, std::function<void()> backward) {
        if (output.d_->node_id >= 0)
            throw GraphError("op '" + kind + "': output tensor already recorded in a graph");
        for (Tensor& in : inputs) assign_id(in);
        assign_id(output);
        ops_.push_back(Op{std::move(kind), std::move(inputs), std::move(output),
                          std::move(forward), std::move(backward)});
    }

    bool empty() const { return ops_.empty(); }
    std::size_t op_count() const { return ops_.size(); }

    /// Output of the last recorded operation; the designated loss node.
    const Tensor& terminal() const {
        if (ops_.empty()) throw GraphError("graph has no recorded terminal");
        return ops_.back().output;
    }

    /// Re-executes every forward closure in recording order.
    void replay_forward() const {
        for (const Op& op : ops_)
            if (op.forward) op.forward();
    }

    /// Reverse pass from the terminal. Gradients of op outputs are scratch
    /// (reset each pass); gradients of leaves accumulate across passes.
    void reverse(const Tensor& seed) const {
        const Tensor& term = terminal();
        if (seed.shape() != term.shape())
            throw ShapeError("reverse pass seed shape " + detail::shape_str(seed.shape()) +
                             " does not match terminal shape " +
                             detail::shape_str(term.shape()));
        for (const Op& op : ops_) op.output.zero_grad();
        std::vector<double>& tg = term.grad();
        const std::vector<double>& sv = seed.values();
        for (std::size_t i = 0; i < tg.size(); ++i) tg[i] += sv[i];
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it)
            if (it->output.requires_grad() && it->backward) it->backward();
    }

private:
    struct Op {
        std::string kind;
        std::vector<Tensor> inputs;
        Tensor output;
        std::function<void()> forward;
        std::function<void()> backward;
    };

    static void assign_id(Tensor& t) {
        if (t.d_->node_id < 0) t.d_->node_id = detail::next_node_id();
    }

    std::vector<Op> ops_;
};

inline void reverse_pass(const DiffGraph& graph, const Tensor& seed) { graph.reverse(seed); }

}  // namespace signa
