#include "rnn_surgery/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rnn_surgery/errors.hpp"

namespace rnn_surgery {

namespace {

constexpr double kSlack = 64 * std::numeric_limits<double>::epsilon();

// M * [lo, hi] in midpoint-radius form, then widened by the worst-case
// accumulated rounding of the product.
IntervalVector affine(const Matrix& M, const IntervalVector& x) {
    const Vector mid = 0.5 * (x.lo + x.hi);
    const Vector rad = 0.5 * (x.hi - x.lo);
    const Matrix absM = M.cwiseAbs();
    const Vector center = M * mid;
    const Vector spread = absM * rad;
    const Vector scale = absM * (mid.cwiseAbs() + rad);
    const Vector pad = kSlack * (scale + spread);
    return {center - spread - pad, center + spread + pad};
}

// Knuth's two-sum recovers the exact rounding error of a+b; step outward by
// one ulp only where rounding actually happened.
double sum_down(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return err < 0.0 ? std::nextafter(s, -std::numeric_limits<double>::infinity()) : s;
}

double sum_up(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return err > 0.0 ? std::nextafter(s, std::numeric_limits<double>::infinity()) : s;
}

IntervalVector add(const IntervalVector& a, const Vector& blo, const Vector& bhi) {
    IntervalVector r{Vector(a.size()), Vector(a.size())};
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        r.lo[i] = sum_down(a.lo[i], blo[i]);
        r.hi[i] = sum_up(a.hi[i], bhi[i]);
    }
    return r;
}

IntervalVector add(const IntervalVector& a, const IntervalVector& b) { return add(a, b.lo, b.hi); }

IntervalVector shift(const IntervalVector& a, const Vector& c) { return add(a, c, c); }

// Unit values as C x + b +- e over the flattened input x = vec(X). Linear
// stretches of the net stay exact, which plain intervals lose after a few
// recurrent steps.
struct AffineForm {
    Matrix C;
    Vector b;
    Vector e;
};

struct InputBox {
    Vector mid;
    Vector rad;
    Vector mag;  // max |x|
};

IntervalVector concretize(const AffineForm& f, const InputBox& box) {
    const Vector center = f.C * box.mid + f.b;
    const Vector spread = f.C.cwiseAbs() * box.rad + f.e;
    const Vector pad = kSlack * (f.C.cwiseAbs() * box.mag + f.b.cwiseAbs() + f.e);
    return {center - spread - pad, center + spread + pad};
}

// M f + c, with the rounding of the concrete product charged to e.
AffineForm apply(const Matrix& M, const AffineForm& f, const Vector* c, const InputBox& box) {
    AffineForm r{M * f.C, M * f.b, M.cwiseAbs() * f.e};
    if (c) r.b += *c;
    r.e += kSlack * (M.cwiseAbs() * (f.C.cwiseAbs() * box.mag + f.b.cwiseAbs() + f.e));
    return r;
}

AffineForm sum(AffineForm a, const AffineForm& b) {
    a.C += b.C;
    a.b += b.b;
    a.e += b.e;
    return a;
}

IntervalVector intersect(const IntervalVector& a, const IntervalVector& b) {
    return {a.lo.cwiseMax(b.lo), a.hi.cwiseMin(b.hi)};
}

// Sound relaxation of relu on units whose interval straddles zero:
// relu(z) in lambda z + [0, mu] with lambda = hi / (hi - lo), mu = -lo lambda.
void relu_relax(AffineForm& f, const IntervalVector& pre, Eigen::Index i) {
    const double lo = pre.lo[i], hi = pre.hi[i];
    if (lo >= 0.0) return;
    if (hi <= 0.0) {
        f.C.row(i).setZero();
        f.b[i] = 0.0;
        f.e[i] = 0.0;
        return;
    }
    const double lambda = hi / (hi - lo);
    const double half_mu = -0.5 * lo * lambda;
    f.C.row(i) *= lambda;
    f.b[i] = lambda * f.b[i] + half_mu;
    f.e[i] = lambda * f.e[i] + half_mu * (1.0 + kSlack);
}

}  // namespace

double Interval::magnitude() const { return std::max(std::abs(lo), std::abs(hi)); }

bool IntervalVector::contains(const Vector& v) const {
    if (v.size() != size()) return false;
    for (Eigen::Index i = 0; i < size(); ++i)
        if (!(lo[i] <= v[i] && v[i] <= hi[i])) return false;
    return true;
}

InputDomain InputDomain::uniform(Eigen::Index d_x, Eigen::Index N, Interval range) {
    return {SequenceMatrix::Constant(d_x, N, range.lo), SequenceMatrix::Constant(d_x, N, range.hi)};
}

double BoundTrace::max_activation(std::size_t layer) const {
    double m = 0.0;
    for (const auto& iv : activation.at(layer))
        m = std::max({m, iv.lo.cwiseAbs().maxCoeff(), iv.hi.cwiseAbs().maxCoeff()});
    return m;
}

BoundTrace bound_propagate(const ModifiedRecurrentNet& net, const InputDomain& domain) {
    net.validate();
    if (domain.dim() != net.input_dim())
        throw DimensionError("domain token dimension differs from net input dimension");
    if (domain.length() < 1) throw DimensionError("domain needs at least one time step");
    if (!domain.lo.allFinite() || !domain.hi.allFinite())
        throw DomainError("input domain must be bounded");
    if ((domain.lo.array() > domain.hi.array()).any())
        throw DomainError("input domain has an empty interval");

    const auto N = static_cast<std::size_t>(domain.length());
    const Eigen::Index W = net.width();
    BoundTrace trace;
    trace.drive.resize(net.depth());
    trace.preactivation.resize(net.depth());
    trace.activation.resize(net.depth());

    const Eigen::Index d_x = domain.dim();
    const Eigen::Index V = d_x * static_cast<Eigen::Index>(N);
    InputBox box{Vector(V), Vector(V), Vector(V)};
    for (std::size_t t = 0; t < N; ++t)
        for (Eigen::Index i = 0; i < d_x; ++i) {
            const auto col = static_cast<Eigen::Index>(t);
            const Eigen::Index v = col * d_x + i;
            box.mid[v] = 0.5 * (domain.lo(i, col) + domain.hi(i, col));
            box.rad[v] = 0.5 * (domain.hi(i, col) - domain.lo(i, col));
            box.mag[v] = std::max(std::abs(domain.lo(i, col)), std::abs(domain.hi(i, col)));
        }

    std::vector<IntervalVector> input(N);
    std::vector<AffineForm> input_form(N);
    for (std::size_t t = 0; t < N; ++t) {
        const auto col = static_cast<Eigen::Index>(t);
        input[t] = affine(net.P, {domain.lo.col(col), domain.hi.col(col)});
        AffineForm token{Matrix::Zero(d_x, V), Vector::Zero(d_x), Vector::Zero(d_x)};
        token.C.middleCols(col * d_x, d_x).setIdentity();
        input_form[t] = apply(net.P, token, nullptr, box);
        input[t] = intersect(input[t], concretize(input_form[t], box));
    }

    for (std::size_t l = 0; l < net.depth(); ++l) {
        const auto& layer = net.layers[l];
        const auto& mask = net.masks[l];
        IntervalVector prev{Vector::Zero(W), Vector::Zero(W)};
        AffineForm prev_form;
        std::vector<AffineForm> forms;
        for (std::size_t t = 0; t < N; ++t) {
            const AffineForm drive_form = apply(layer.B, input_form[t], &layer.c, box);
            IntervalVector drive = intersect(shift(affine(layer.B, input[t]), layer.c), concretize(drive_form, box));
            AffineForm pre_form = t == 0 ? drive_form : sum(apply(layer.A, prev_form, nullptr, box), drive_form);
            IntervalVector pre = t == 0 ? drive : add(affine(layer.A, prev), drive);
            pre = intersect(pre, concretize(pre_form, box));
            IntervalVector act = pre;
            AffineForm act_form = std::move(pre_form);
            for (Eigen::Index i = 0; i < W; ++i) {
                if (!mask[i]) continue;
                act.lo[i] = std::max(act.lo[i], 0.0);
                act.hi[i] = std::max(act.hi[i], 0.0);
                relu_relax(act_form, pre, i);
            }
            trace.drive[l].push_back(std::move(drive));
            trace.preactivation[l].push_back(std::move(pre));
            trace.activation[l].push_back(act);
            prev = std::move(act);
            prev_form = act_form;
            forms.push_back(std::move(act_form));
        }
        input = trace.activation[l];
        input_form = std::move(forms);
    }
    return trace;
}

BoundTrace bound_propagate(const RecurrentNet& net, const InputDomain& domain) {
    return bound_propagate(ModifiedRecurrentNet::from_rnn(net), domain);
}

}  // namespace rnn_surgery
