#include "hmtl/layers/hlstm.hpp"

#include "hmtl/errors.hpp"

namespace hmtl::layers {
namespace {

// One LSTM direction as a single tape node, with backpropagation through
// time written out by hand.
Tensor lstm_sequence(const Tensor& x, const Tensor& wx, const Tensor& wh, const Tensor& b,
                     bool reverse) {
    const Index n = x.rows();
    const Index h = wh.rows();
    if (n == 0) throw ContractError("lstm: zero-length sequence");
    if (wx.rows() != x.cols() || wx.cols() != 4 * h || wh.cols() != 4 * h || b.cols() != 4 * h) {
        throw DimensionError("lstm: parameter shapes do not match the input");
    }
    // Rows are kept in processing order; row s belongs to time step order[s].
    Matrix gates(n, 4 * h);
    Matrix cells(n, h);
    Matrix states(n, h);
    Matrix out(n, h);
    const Matrix xw = x.value() * wx.value();
    Eigen::RowVectorXd hprev = Eigen::RowVectorXd::Zero(h);
    Eigen::RowVectorXd cprev = Eigen::RowVectorXd::Zero(h);
    for (Index s = 0; s < n; ++s) {
        const Index t = reverse ? n - 1 - s : s;
        Eigen::RowVectorXd z = xw.row(t) + b.value().row(0);
        if (s > 0) z.noalias() += hprev * wh.value();
        auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
        for (Index k = 0; k < h; ++k) {
            gates(s, k) = sig(z(k));
            gates(s, h + k) = sig(z(h + k));
            gates(s, 2 * h + k) = std::tanh(z(2 * h + k));
            gates(s, 3 * h + k) = sig(z(3 * h + k));
        }
        const auto i = gates.row(s).segment(0, h).array();
        const auto f = gates.row(s).segment(h, h).array();
        const auto g = gates.row(s).segment(2 * h, h).array();
        const auto o = gates.row(s).segment(3 * h, h).array();
        cells.row(s) = (f * cprev.array() + i * g).matrix();
        states.row(s) = (o * cells.row(s).array().tanh()).matrix();
        out.row(t) = states.row(s);
        hprev = states.row(s);
        cprev = cells.row(s);
    }
    return x.tape().record(
        std::move(out), {x, wx, wh, b},
        [x, wx, wh, b, reverse, gates = std::move(gates), cells = std::move(cells),
         states = std::move(states)](const Matrix& grad, ad::Tape& tape) {
            const Index n = gates.rows();
            const Index h = cells.cols();
            Matrix dz_all(n, 4 * h);  // indexed by time step
            Eigen::RowVectorXd dh_next = Eigen::RowVectorXd::Zero(h);
            Eigen::RowVectorXd dc_next = Eigen::RowVectorXd::Zero(h);
            Matrix* gwh = tape.grad_sink(wh);
            for (Index s = n - 1; s >= 0; --s) {
                const Index t = reverse ? n - 1 - s : s;
                const auto i = gates.row(s).segment(0, h).array();
                const auto f = gates.row(s).segment(h, h).array();
                const auto g = gates.row(s).segment(2 * h, h).array();
                const auto o = gates.row(s).segment(3 * h, h).array();
                const Eigen::ArrayXXd tc = cells.row(s).array().tanh();
                const Eigen::ArrayXXd dh = (grad.row(t) + dh_next).array();
                const Eigen::ArrayXXd dc = dh * o * (1.0 - tc * tc) + dc_next.array();
                Eigen::RowVectorXd cprev = s > 0 ? Eigen::RowVectorXd(cells.row(s - 1))
                                                 : Eigen::RowVectorXd::Zero(h);
                Eigen::RowVectorXd dz(4 * h);
                dz.segment(0, h) = (dc * g * i * (1.0 - i)).matrix();
                dz.segment(h, h) = (dc * cprev.array() * f * (1.0 - f)).matrix();
                dz.segment(2 * h, h) = (dc * i * (1.0 - g * g)).matrix();
                dz.segment(3 * h, h) = (dh * tc * o * (1.0 - o)).matrix();
                dc_next = (dc * f).matrix();
                dz_all.row(t) = dz;
                if (s > 0) {
                    dh_next.noalias() = dz * wh.value().transpose();
                    if (gwh) gwh->noalias() += states.row(s - 1).transpose() * dz;
                } else {
                    dh_next.setZero();
                }
            }
            if (Matrix* gx = tape.grad_sink(x)) gx->noalias() += dz_all * wx.value().transpose();
            if (Matrix* gwx = tape.grad_sink(wx)) gwx->noalias() += x.value().transpose() * dz_all;
            if (Matrix* gb = tape.grad_sink(b)) *gb += dz_all.colwise().sum();
        });
}

}  // namespace

LstmCell::LstmCell(const std::string& name, Index in, Index hidden, Rng& rng)
    : w_input_(name + ".Wx", glorot(in, 4 * hidden, rng)),
      w_hidden_(name + ".Wh", glorot(hidden, 4 * hidden, rng)),
      bias_(name + ".b", Matrix::Zero(1, 4 * hidden)) {
    bias_.value.block(0, hidden, 1, hidden).setOnes();
}

Tensor LstmCell::run(Tape& tape, const Tensor& x, bool reverse) {
    return lstm_sequence(x, tape.param(w_input_), tape.param(w_hidden_), tape.param(bias_), reverse);
}

HighwayLstmStack::HighwayLstmStack(const std::string& name, Index in, Index hidden, int layers,
                                   double dropout, Rng& rng)
    : in_(in), hidden_(hidden), dropout_(dropout) {
    if (in <= 0 || hidden <= 0 || layers < 1) {
        throw ContractError("highway LSTM " + name + " needs positive sizes and layers");
    }
    Index width = in;
    for (int l = 0; l < layers; ++l) {
        const std::string prefix = name + ".l" + std::to_string(l);
        HighwayLayer layer{LstmCell(prefix + ".fwd", width, hidden, rng),
                           LstmCell(prefix + ".bwd", width, hidden, rng),
                           Linear(prefix + ".gate", width, 2 * hidden, rng), std::nullopt};
        if (width != 2 * hidden) layer.carry = Linear(prefix + ".carry", width, 2 * hidden, rng);
        layers_.push_back(std::move(layer));
        width = 2 * hidden;
    }
}

Tensor HighwayLstmStack::forward(Tape& tape, const Tensor& x, ad::Mode mode, Rng& rng) {
    if (x.rows() == 0) throw ContractError("highway LSTM: zero-length sequence");
    if (x.cols() != in_) {
        throw DimensionError("highway LSTM expects " + std::to_string(in_) + " input columns, got " +
                             std::to_string(x.cols()));
    }
    Tensor h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        HighwayLayer& layer = layers_[l];
        if (l > 0) h = ad::dropout(h, dropout_, mode, rng);
        Tensor lstm = ad::concat_cols({layer.forward.run(tape, h, false),
                                       layer.backward.run(tape, h, true)});
        Tensor gate = ad::sigmoid(layer.gate.forward(tape, h));
        Tensor carry = layer.carry ? layer.carry->forward(tape, h) : h;
        // T * lstm + (1 - T) * carry
        h = carry + ad::hadamard(gate, lstm - carry);
    }
    return ad::relu(h);
}

std::vector<Parameter*> HighwayLstmStack::parameters() {
    std::vector<Parameter*> out;
    for (auto& layer : layers_) {
        for (auto* p : layer.forward.parameters()) out.push_back(p);
        for (auto* p : layer.backward.parameters()) out.push_back(p);
        for (auto* p : layer.gate.parameters()) out.push_back(p);
        if (layer.carry) {
            for (auto* p : layer.carry->parameters()) out.push_back(p);
        }
    }
    return out;
}

}  // namespace hmtl::layers
