#ifndef MFF_TENSOR_HPP
#define MFF_TENSOR_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mff {

using Shape = std::vector<std::size_t>;

class DimensionError : public std::runtime_error {
public:
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

/// One node of the reverse-mode tape. Values are stored in 64-bit floats;
/// gradients are allocated lazily on the first backward pass that reaches
/// the node. `backprop` reads this node's gradient and accumulates into the
/// parents' gradients, so a tensor used in several places receives the sum
/// of all incoming contributions.
struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop;

    std::size_t size() const { return value.size(); }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

using NodePtr = std::shared_ptr<Node>;

} // namespace detail

/// Dense row-major tensor handle. Copies are shallow: two Tensor objects may
/// refer to the same storage, which is what parameter sharing relies on.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t size() const { return node_->value.size(); }
    std::size_t dim(std::size_t i) const { return node_->shape.at(i); }

    const std::vector<double>& data() const { return node_->value; }
    /// Mutable access to raw values; only meaningful for leaf tensors
    /// (parameters, inputs) between graph constructions.
    std::vector<double>& raw() { return node_->value; }

    double item() const;
    double at(std::size_t i) const { return node_->value.at(i); }
    double at(std::size_t i, std::size_t j) const;

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool v) { node_->requires_grad = v; }

    const std::vector<double>& grad() const;
    void zero_grad();

    detail::NodePtr node() const { return node_; }

private:
    friend Tensor make_op(Shape, std::vector<double>, std::vector<Tensor>,
                          std::function<void(detail::Node&)>);
    detail::NodePtr node_;
};

/// Internal op constructor: records parents and the local gradient rule when
/// any parent is tracked.
Tensor make_op(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
               std::function<void(detail::Node&)> backprop);

// -- core operations ---------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);      // equal shape, or [m,n]+[n]
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);      // elementwise, equal shape
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor softmax(const Tensor& x, std::size_t axis);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t len);
Tensor pointwise_scale(const Tensor& scores, const Tensor& x);
Tensor mean_pool(const Tensor& x);                 // over axis 0 of [n,d] -> [d]
Tensor sum_axis(const Tensor& x, std::size_t axis);
Tensor sum_all(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

/// Binary cross entropy of a scalar prediction against label y in {0,1}.
/// The prediction is clamped to [1e-7, 1-1e-7] before the logs.
Tensor bce_loss(double label, const Tensor& prediction);

/// Reverse pass from a scalar loss. Visits each reachable node exactly once
/// in reverse topological order; gradients accumulate into every tracked
/// leaf reachable from the loss.
void backward(const Tensor& loss);

/// Central-difference gradient verification. `f` rebuilds the forward graph
/// from the current parameter values and returns the scalar loss. Returns the
/// worst relative error over sampled coordinates (all coordinates when
/// max_coords_per_param == 0).
double grad_check(const std::function<Tensor()>& f, std::vector<Tensor>& params,
                  double h = 1e-5, std::size_t max_coords_per_param = 0,
                  std::uint64_t seed = 0);

std::string shape_str(const Shape& s);

} // namespace mff

#endif
