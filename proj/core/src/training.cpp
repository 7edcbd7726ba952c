#include "rnn_surgery/training.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "rnn_surgery/errors.hpp"
#include "rnn_surgery/mixing.hpp"

namespace rnn_surgery::regression {

using Eigen::MatrixXd;

std::string to_string(Optimizer o) { return o == Optimizer::gd ? "gd" : "adam"; }

Optimizer optimizer_from_string(const std::string& s) {
    if (s == "gd") return Optimizer::gd;
    if (s == "adam") return Optimizer::adam;
    throw FormatError("unknown optimizer \"" + s + "\"");
}

void TrainConfig::validate() const {
    if (W < 1 || L < 1) throw DomainError("train config needs W >= 1 and L >= 1");
    if (!(K > 0.0) || !(learning_rate > 0.0)) throw DomainError("train config needs K > 0 and learning_rate > 0");
    if (epochs < 1 || restarts < 1 || eval_every < 1) throw DomainError("epochs, restarts, eval_every must be >= 1");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
        throw DomainError("validation_fraction must lie in [0, 1)");
}

namespace {

struct Forward {
    // h[l][t]: l = 0 is the embedding P x[t], l = 1..L the layer outputs.
    std::vector<std::vector<MatrixXd>> h;
    Eigen::RowVectorXd out;  // Q h_L[N] before the clip
};

Forward forward(const RecurrentNet& net, const SequenceBatch& X) {
    const std::size_t N = X.length();
    const std::size_t L = net.depth();
    Forward f;
    f.h.assign(L + 1, std::vector<MatrixXd>(N));
    for (std::size_t t = 0; t < N; ++t) f.h[0][t].noalias() = net.P * X.steps[t];
    for (std::size_t l = 0; l < L; ++l) {
        const auto& layer = net.layers[l];
        for (std::size_t t = 0; t < N; ++t) {
            MatrixXd z = layer.B * f.h[l][t];
            if (t > 0) z.noalias() += layer.A * f.h[l + 1][t - 1];
            z.colwise() += layer.c;
            f.h[l + 1][t] = z.cwiseMax(0.0);
        }
    }
    f.out = net.Q.row(0) * f.h[L][N - 1];
    return f;
}

double clip_value(double v, double K) { return std::min(std::max(v, -K), K); }

}  // namespace

Vector predict(const RecurrentNet& net, const SequenceBatch& X) {
    if (net.output_dim() != 1) throw DimensionError("regression nets have scalar output");
    if (X.dim() != net.input_dim()) throw DimensionError("window token dim differs from net input dim");
    const Forward f = forward(net, X);
    Vector y = f.out.transpose();
    if (net.output_clip) y = y.unaryExpr([K = *net.output_clip](double v) { return clip_value(v, K); });
    return y;
}

double loss_and_gradient(const RecurrentNet& net, const SequenceBatch& X, const Vector& y, RecurrentNet* grad) {
    if (net.output_dim() != 1) throw DimensionError("regression nets have scalar output");
    if (X.dim() != net.input_dim()) throw DimensionError("window token dim differs from net input dim");
    if (X.size() != y.size() || y.size() == 0) throw DimensionError("batch and responses differ in size");
    const std::size_t N = X.length();
    const std::size_t L = net.depth();
    const double B = static_cast<double>(y.size());
    const double K = net.output_clip.value_or(std::numeric_limits<double>::infinity());

    const Forward f = forward(net, X);
    Eigen::RowVectorXd resid(y.size());
    Eigen::RowVectorXd pass(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double o = f.out[i];
        resid[i] = clip_value(o, K) - y[i];
        pass[i] = (o > -K && o < K) ? 1.0 : 0.0;
    }
    const double loss = resid.squaredNorm() / B;
    if (!grad) return loss;

    grad->P = Matrix::Zero(net.P.rows(), net.P.cols());
    grad->Q = Matrix::Zero(net.Q.rows(), net.Q.cols());
    grad->layers.assign(L, {});
    grad->output_clip.reset();

    const Eigen::RowVectorXd d_out = (2.0 / B) * resid.cwiseProduct(pass);
    grad->Q.row(0) = (f.h[L][N - 1] * d_out.transpose()).transpose();

    const Eigen::Index W = net.width();
    const Eigen::Index batch = X.size();
    std::vector<MatrixXd> dh(N, MatrixXd::Zero(W, batch));
    dh[N - 1] = net.Q.row(0).transpose() * d_out;

    for (std::size_t l = L; l-- > 0;) {
        const auto& layer = net.layers[l];
        auto& g = grad->layers[l];
        g.A = Matrix::Zero(W, W);
        g.B = Matrix::Zero(W, W);
        g.c = Vector::Zero(W);
        MatrixXd carry = MatrixXd::Zero(W, batch);
        std::vector<MatrixXd> below(N);
        for (std::size_t t = N; t-- > 0;) {
            const MatrixXd& h = f.h[l + 1][t];
            MatrixXd dz = (dh[t] + carry).cwiseProduct((h.array() > 0.0).cast<double>().matrix());
            if (t > 0) g.A.noalias() += dz * f.h[l + 1][t - 1].transpose();
            g.B.noalias() += dz * f.h[l][t].transpose();
            g.c += dz.rowwise().sum();
            carry.noalias() = layer.A.transpose() * dz;
            below[t].noalias() = layer.B.transpose() * dz;
        }
        dh = std::move(below);
    }
    for (std::size_t t = 0; t < N; ++t) grad->P.noalias() += dh[t] * X.steps[t].transpose();
    return loss;
}

Vector flatten(const RecurrentNet& net) {
    Eigen::Index n = net.P.size() + net.Q.size();
    for (const auto& l : net.layers) n += l.A.size() + l.B.size() + l.c.size();
    Vector theta(n);
    Eigen::Index pos = 0;
    auto put = [&](const auto& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) theta[pos++] = m(i, j);
    };
    put(net.P);
    for (const auto& l : net.layers) {
        put(l.A);
        put(l.B);
        put(l.c);
    }
    put(net.Q);
    return theta;
}

void unflatten(const Vector& theta, RecurrentNet& net) {
    Eigen::Index pos = 0;
    auto take = [&](auto& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = theta[pos++];
    };
    take(net.P);
    for (auto& l : net.layers) {
        take(l.A);
        take(l.B);
        take(l.c);
    }
    take(net.Q);
    if (pos != theta.size()) throw DimensionError("parameter vector length does not match the net");
}

RecurrentNet init_network(Eigen::Index d_x, Eigen::Index W, std::size_t L, double K, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto draw = [&](Eigen::Index r, Eigen::Index c, double sd) {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = sd * gauss(rng);
        return m;
    };
    RecurrentNet net;
    // Inputs live in [0,1]; center them through the first bias.
    net.P = draw(W, d_x, std::sqrt(2.0 / static_cast<double>(d_x)));
    const double he = std::sqrt(2.0 / static_cast<double>(W));
    for (std::size_t l = 0; l < L; ++l) {
        RecurrentLayer layer{draw(W, W, 0.5 * he), draw(W, W, he), Vector::Constant(W, 0.01)};
        net.layers.push_back(std::move(layer));
    }
    net.Q = draw(1, W, std::sqrt(1.0 / static_cast<double>(W)));
    net.output_clip = K;
    return net;
}

namespace {

struct RestartOutcome {
    RecurrentNet net;
    double train_loss = std::numeric_limits<double>::infinity();
    double val_loss = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    std::vector<double> trace;
    bool diverged = false;
};

RestartOutcome run_restart(const WindowSet& train, const WindowSet* val, const TrainConfig& cfg, Eigen::Index d_x,
                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RecurrentNet net = init_network(d_x, cfg.W, cfg.L, cfg.K, rng);
    Vector theta = flatten(net);
    Vector m1 = Vector::Zero(theta.size());
    Vector m2 = Vector::Zero(theta.size());
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    RecurrentNet grad = net;

    RestartOutcome best;
    best.net = net;
    auto evaluate = [&](int epoch, double train_loss) {
        const double v = val ? loss_and_gradient(net, val->X, val->y, nullptr) : train_loss;
        if (!cfg.keep_best_validation || v < best.val_loss) {
            best.val_loss = v;
            best.train_loss = train_loss;
            best.best_epoch = epoch;
            best.net = net;
        }
    };

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double loss = loss_and_gradient(net, train.X, train.y, &grad);
        best.trace.push_back(loss);
        if (!std::isfinite(loss)) {
            best.diverged = true;
            return best;
        }
        if (epoch % cfg.eval_every == 0) evaluate(epoch, loss);
        const Vector g = flatten(grad);
        if (!g.allFinite()) {
            best.diverged = true;
            return best;
        }
        if (cfg.optimizer == Optimizer::gd) {
            theta -= cfg.learning_rate * g;
        } else {
            m1 = b1 * m1 + (1.0 - b1) * g;
            m2 = b2 * m2 + (1.0 - b2) * g.cwiseProduct(g);
            const double c1 = 1.0 - std::pow(b1, epoch + 1);
            const double c2 = 1.0 - std::pow(b2, epoch + 1);
            theta -= cfg.learning_rate * ((m1 / c1).array() / ((m2 / c2).array().sqrt() + eps)).matrix();
        }
        unflatten(theta, net);
    }
    const double final_loss = loss_and_gradient(net, train.X, train.y, nullptr);
    best.trace.push_back(final_loss);
    if (!std::isfinite(final_loss)) {
        best.diverged = true;
        return best;
    }
    evaluate(cfg.epochs, final_loss);
    return best;
}

}  // namespace

TrainResult train_erm(const RegressionTask& task, const WindowSet& data, const TrainConfig& cfg) {
    task.validate();
    cfg.validate();
    if (data.size() < 10) throw DimensionError("training needs at least 10 windows");
    if (static_cast<Eigen::Index>(data.X.length()) != task.N || data.X.dim() != task.d_x)
        throw DimensionError("windows do not match the task's N and d_x");

    const Eigen::Index n_val = static_cast<Eigen::Index>(std::floor(cfg.validation_fraction * data.size()));
    const Eigen::Index n_train = data.size() - n_val;
    if (n_train < 1) throw DimensionError("validation split leaves no training windows");
    const WindowSet train = n_val > 0 ? data.slice(0, n_train) : data;
    const WindowSet val = n_val > 0 ? data.slice(n_train, n_val) : WindowSet{};

    TrainResult result;
    bool found = false;
    double best_val = std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.restarts; ++r) {
        RestartOutcome o = run_restart(train, n_val > 0 ? &val : nullptr, cfg, task.d_x, derive_seed(cfg.seed, 0x7e57, r));
        std::ostringstream log;
        log << "restart " << r << ": ";
        if (o.diverged) {
            log << "diverged after " << o.trace.size() << " epochs (try a smaller learning rate)";
        } else {
            log << "train " << o.train_loss << ", validation " << o.val_loss << " at epoch " << o.best_epoch;
        }
        result.restart_log.push_back(log.str());
        if (o.diverged) continue;
        if (!found || o.val_loss < best_val) {
            found = true;
            best_val = o.val_loss;
            result.net = std::move(o.net);
            result.train_loss = o.train_loss;
            result.validation_loss = o.val_loss;
            result.best_restart = r;
            result.best_epoch = o.best_epoch;
            result.loss_trace = std::move(o.trace);
        }
    }
    if (!found) {
        std::string msg = "every restart diverged:";
        for (const auto& line : result.restart_log) msg += "\n  " + line;
        throw TrainingDiverged(msg);
    }
    return result;
}

}  // namespace rnn_surgery::regression
