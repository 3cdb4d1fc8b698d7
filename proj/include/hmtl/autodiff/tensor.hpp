#pragma once

#include <array>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace hmtl::ad {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Trainable weights. They live outside any tape; a tape binds a parameter as
// a leaf and adds the leaf gradient into `grad` at the end of backward.
struct Parameter {
    Parameter() = default;
    Parameter(std::string name, Matrix value);

    std::string name;
    Matrix value;
    Matrix grad;
    // Rows that never receive gradient (PAD rows of embedding tables).
    std::vector<Index> frozen_rows;

    void zero_grad();
};

class Tape;

// Handle to a node recorded on a tape. Cheap to copy; valid for the lifetime
// of its tape.
class Tensor {
public:
    Tensor() = default;

    const Matrix& value() const;
    // Gradient buffer; only present when requires_grad() holds.
    const Matrix& grad() const;
    bool requires_grad() const;

    Index rows() const { return value().rows(); }
    Index cols() const { return value().cols(); }
    std::array<Index, 2> shape() const { return {rows(), cols()}; }
    // Scalar value of a 1x1 tensor.
    double item() const;

    Tape& tape() const { return *tape_; }
    int id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

private:
    friend class Tape;
    Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    int id_ = -1;
};

// Linear record of operations for reverse-mode differentiation. Inputs of an
// operation always precede it, so a single reverse sweep is a valid
// topological traversal. One tape serves one forward/backward pass.
class Tape {
public:
    // Receives the gradient of the operation's output and pushes
    // contributions to its inputs through grad_sink().
    using Backward = std::function<void(const Matrix& out_grad, Tape& tape)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Tensor constant(Matrix value);
    // Free-standing leaf that requires a gradient (used by gradient checks).
    Tensor variable(Matrix value);
    // Binds a parameter as a leaf. Repeated calls return the same node.
    Tensor param(Parameter& p);

    Tensor record(Matrix value, const std::vector<Tensor>& inputs, Backward backward);

    // Accumulation target for an input's gradient, or nullptr when the input
    // does not require one. Marks the input as reached.
    Matrix* grad_sink(const Tensor& t);

    void backward(const Tensor& loss);

    const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    const Matrix& grad(int id) const;
    bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
    const std::vector<int>& inputs(int id) const { return nodes_[static_cast<std::size_t>(id)].inputs; }
    std::size_t size() const { return nodes_.size(); }
    // Id the next recorded node will receive; lets a backward rule refer to
    // its own output value.
    int next_id() const { return static_cast<int>(nodes_.size()); }

    // Parameters whose leaf received a gradient contribution in backward().
    std::vector<Parameter*> reached_parameters() const;

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        bool reached = false;
        Parameter* param = nullptr;
        std::vector<int> inputs;
        Backward backward;
    };

    Tensor push(Node node);

    std::vector<Node> nodes_;
    std::unordered_map<const Parameter*, int> bound_;
    bool backward_done_ = false;
};

}  // namespace hmtl::ad
