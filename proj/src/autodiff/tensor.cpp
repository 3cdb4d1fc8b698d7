#include "hmtl/autodiff/tensor.hpp"

#include <algorithm>

#include "hmtl/errors.hpp"

namespace hmtl::ad {

Parameter::Parameter(std::string name, Matrix value)
    : name(std::move(name)), value(std::move(value)) {
    grad = Matrix::Zero(this->value.rows(), this->value.cols());
}

void Parameter::zero_grad() {
    if (grad.rows() != value.rows() || grad.cols() != value.cols()) {
        grad.resize(value.rows(), value.cols());
    }
    grad.setZero();
}

const Matrix& Tensor::value() const { return tape_->value(id_); }

const Matrix& Tensor::grad() const { return tape_->grad(id_); }

bool Tensor::requires_grad() const { return tape_->requires_grad(id_); }

double Tensor::item() const {
    const Matrix& v = value();
    if (v.size() != 1) {
        throw DimensionError("item() on a " + std::to_string(v.rows()) + "x" +
                             std::to_string(v.cols()) + " tensor");
    }
    return v(0, 0);
}

Tensor Tape::push(Node node) {
    if (node.requires_grad) {
        node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
    }
    nodes_.push_back(std::move(node));
    return Tensor(this, static_cast<int>(nodes_.size() - 1));
}

Tensor Tape::constant(Matrix value) {
    Node n;
    n.value = std::move(value);
    return push(std::move(n));
}

Tensor Tape::variable(Matrix value) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = true;
    return push(std::move(n));
}

Tensor Tape::param(Parameter& p) {
    if (auto it = bound_.find(&p); it != bound_.end()) {
        return Tensor(this, it->second);
    }
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) {
        p.zero_grad();
    }
    Node n;
    n.value = p.value;
    n.requires_grad = true;
    n.param = &p;
    Tensor t = push(std::move(n));
    bound_.emplace(&p, t.id());
    return t;
}

Tensor Tape::record(Matrix value, const std::vector<Tensor>& inputs, Backward backward) {
    Node n;
    n.value = std::move(value);
    for (const Tensor& in : inputs) {
        if (&in.tape() != this) {
            throw ContractError("operation mixes tensors from different tapes");
        }
        n.inputs.push_back(in.id());
        n.requires_grad = n.requires_grad || in.requires_grad();
    }
    if (n.requires_grad) {
        n.backward = std::move(backward);
    }
    return push(std::move(n));
}

const Matrix& Tape::grad(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad) {
        throw ContractError("tensor does not require a gradient");
    }
    return n.grad;
}

Matrix* Tape::grad_sink(const Tensor& t) {
    Node& n = nodes_[static_cast<std::size_t>(t.id())];
    if (!n.requires_grad) {
        return nullptr;
    }
    n.reached = true;
    return &n.grad;
}

void Tape::backward(const Tensor& loss) {
    if (&loss.tape() != this) {
        throw ContractError("backward called with a tensor from another tape");
    }
    if (backward_done_) {
        throw ContractError("backward may run only once per tape");
    }
    Node& root = nodes_[static_cast<std::size_t>(loss.id())];
    if (root.value.size() != 1) {
        throw ContractError("backward requires a scalar loss, got " +
                            std::to_string(root.value.rows()) + "x" +
                            std::to_string(root.value.cols()));
    }
    backward_done_ = true;
    if (!root.requires_grad) {
        return;
    }
    root.grad(0, 0) = 1.0;
    root.reached = true;
    for (int i = loss.id(); i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (!n.reached) {
            continue;
        }
        if (n.backward) {
            n.backward(n.grad, *this);
        }
        if (n.param != nullptr) {
            n.param->grad += n.grad;
            for (Index r : n.param->frozen_rows) {
                n.param->grad.row(r).setZero();
            }
        }
    }
}

std::vector<Parameter*> Tape::reached_parameters() const {
    std::vector<Parameter*> out;
    for (const Node& n : nodes_) {
        if (n.param != nullptr && n.reached) {
            out.push_back(n.param);
        }
    }
    return out;
}

}  // namespace hmtl::ad
