#include "semiclass/twomicro.hpp"

#include <cmath>
#include <numbers>

#include "semiclass/errors.hpp"
#include "semiclass/states.hpp"

namespace semiclass {

namespace {

constexpr double kPi = std::numbers::pi;

IVec ivec_of(const Eigen::VectorXd& v) {
    IVec r(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) r[i] = std::llround(v[i]);
    return r;
}

Eigen::VectorXd unit_or_zero(const Eigen::VectorXd& v) {
    const double n = v.norm();
    return n > 0 ? Eigen::VectorXd(v / n) : Eigen::VectorXd::Zero(v.size());
}

}  // namespace

double chi_bump(double r) { return smooth_cutoff(r, 0.5, 1.0); }

// ---------------------------------------------------------------- chart

ChartF::ChartF(HamiltonianModel model, Eigen::VectorXd xi0, SubmoduleBasis lambda, double radius)
    : model_(std::move(model)), xi0_(std::move(xi0)), lambda_(std::move(lambda)), radius_(radius) {
    const int d = model_.dim();
    if (xi0_.size() != d || lambda_.dim() != d) throw ShapeError("chart data dimensions differ");
    if (!(radius_ > 0)) throw DegenerateInput("chart radius must be positive");
    basis_ = lambda_.basis_matrix();
    dual_ = lambda_.dual_matrix();
    auto e0 = model_.evaluate(xi0_);
    if (lambda_.rank() > 0) {
        Eigen::VectorXd res = basis_.transpose() * e0.gradient;
        if (res.lpNorm<Eigen::Infinity>() > 1e-8)
            throw PreconditionFailed("dH(xi0) is not orthogonal to Lambda");
    }
    std::vector<Eigen::VectorXd> probes{xi0_};
    for (int i = 0; i < d; ++i) {
        probes.push_back(xi0_ + radius_ * Eigen::VectorXd::Unit(d, i));
        probes.push_back(xi0_ - radius_ * Eigen::VectorXd::Unit(d, i));
    }
    for (const auto& p : probes)
        if (classify_point(model_, p).in_critical_set)
            throw PreconditionFailed("d2H is not definite on the chart ball");
}

bool ChartF::in_domain(const Eigen::VectorXd& xi) const { return (xi - xi0_).norm() <= 0.5 * radius_ + 1e-12; }

void ChartF::check_domain(const Eigen::VectorXd& xi) const {
    if (xi.size() != xi0_.size()) throw ShapeError("chart point has wrong dimension");
    if (!in_domain(xi)) throw OutOfChart("point at distance " + std::to_string((xi - xi0_).norm()) +
                                         " from xi0, chart radius " + std::to_string(0.5 * radius_));
}

ChartPoint ChartF::decompose(const Eigen::VectorXd& xi) const {
    check_domain(xi);
    if (lambda_.rank() == 0) return {xi, Eigen::VectorXd::Zero(xi.size())};
    if (!closed_form()) return decompose_newton(xi);
    // B^T A (xi + theta - B c) = 0.
    const Eigen::MatrixXd& a = model_.a_matrix();
    Eigen::VectorXd shifted = xi + model_.theta();
    Eigen::VectorXd c = (basis_.transpose() * a * basis_).ldlt().solve(basis_.transpose() * a * shifted);
    Eigen::VectorXd eta = basis_ * c;
    return {xi - eta, eta};
}

ChartPoint ChartF::decompose_newton(const Eigen::VectorXd& xi) const {
    check_domain(xi);
    if (lambda_.rank() == 0) return {xi, Eigen::VectorXd::Zero(xi.size())};
    Eigen::VectorXd c = (basis_.transpose() * basis_).ldlt().solve(basis_.transpose() * xi);
    const double scale = std::max(1.0, xi.norm());
    for (int it = 0; it < 20; ++it) {
        auto e = model_.evaluate(xi - basis_ * c);
        Eigen::VectorXd f = basis_.transpose() * e.gradient;
        Eigen::MatrixXd j = basis_.transpose() * e.hessian * basis_;
        Eigen::VectorXd step = j.fullPivLu().solve(f);
        if (!step.allFinite()) break;
        c += step;
        if (step.norm() <= 1e-14 * scale) {
            Eigen::VectorXd eta = basis_ * c;
            return {xi - eta, eta};
        }
    }
    auto e = model_.evaluate(xi - basis_ * c);
    if ((basis_.transpose() * e.gradient).norm() <= 1e-12 * std::max(1.0, e.gradient.norm())) {
        Eigen::VectorXd eta = basis_ * c;
        return {xi - eta, eta};
    }
    throw ChartSingular("Newton iteration did not converge");
}

Eigen::VectorXd ChartF::bloch_coordinates(const Eigen::VectorXd& sigma, double h) const {
    Eigen::VectorXd c = dual_.transpose() * sigma / h;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        c[i] -= std::floor(c[i]);
        if (c[i] >= 1.0) c[i] = 0.0;
    }
    return c;
}

Eigen::VectorXd ChartF::bloch_phase(const Eigen::VectorXd& sigma, double h) const {
    if (lambda_.rank() == 0) return Eigen::VectorXd::Zero(sigma.size());
    return basis_ * bloch_coordinates(sigma, h);
}

// ---------------------------------------------------------------- symbols

TwoMicroSymbol::TwoMicroSymbol(SubmoduleBasis lambda, double r0) : lambda_(std::move(lambda)), r0_(r0) {
    if (!(r0_ > 0)) throw DegenerateInput("matching radius must be positive");
}

TwoMicroSymbol& TwoMicroSymbol::add_term(const IVec& k, cd coeff, XiFunction g, EtaFunction core, EtaFunction hom) {
    const double norm = std::pow(2.0 * kPi, 0.5 * dim());
    XiFunction w = g ? XiFunction([g, coeff, norm](const Eigen::VectorXd& xi) { return norm * coeff * g(xi); })
                     : XiFunction([coeff, norm](const Eigen::VectorXd&) { return norm * coeff; });
    return add_mode({k, std::move(w), std::move(core), std::move(hom)});
}

TwoMicroSymbol& TwoMicroSymbol::add_mode(TwoMicroMode m) {
    if (static_cast<int>(m.k.size()) != dim()) throw ShapeError("mode has wrong dimension");
    if (!lambda_.contains(m.k)) throw NotInSpan("two-microlocal symbols only carry x-modes in Lambda");
    modes_.push_back(std::move(m));
    return *this;
}

cd TwoMicroSymbol::evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xi, const Eigen::VectorXd& eta) const {
    cd s = 0.0;
    for (const auto& m : modes_) {
        cd v = m.weight(xi);
        if (v == cd(0.0)) continue;
        if (m.core) v *= m.core(xi, eta);
        s += v * std::polar(1.0, to_eigen(m.k).dot(x));
    }
    return s / std::pow(2.0 * kPi, 0.5 * dim());
}

cd TwoMicroSymbol::evaluate_hom(const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                                const Eigen::VectorXd& omega) const {
    cd s = 0.0;
    for (const auto& m : modes_) {
        cd v = m.weight(xi);
        if (v == cd(0.0)) continue;
        if (m.hom) v *= m.hom(xi, omega);
        s += v * std::polar(1.0, to_eigen(m.k).dot(x));
    }
    return s / std::pow(2.0 * kPi, 0.5 * dim());
}

double TwoMicroSymbol::matching_defect(const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& xi_eta) const {
    double worst = 0.0;
    for (const auto& [xi, eta] : xi_eta) {
        const double n = eta.norm();
        if (n <= r0_) continue;
        for (const auto& m : modes_) {
            cd a = m.core ? m.core(xi, eta) : cd(1.0);
            cd b = m.hom ? m.hom(xi, Eigen::VectorXd(eta / n)) : cd(1.0);
            worst = std::max(worst, std::abs(m.weight(xi)) * std::abs(a - b));
        }
    }
    return worst;
}

TorusSymbol substituted_symbol(const TwoMicroSymbol& a, const ChartF& chart, double tau, double r, double delta,
                               TwoMicroPart part) {
    if (a.dim() != chart.model().dim()) throw ShapeError("symbol and chart dimensions differ");
    if (!(r > 0) || !(delta > 0)) throw DegenerateInput("R and delta must be positive");
    TorusSymbol out(a.dim());
    for (const auto& m : a.modes()) {
        auto weight = m.weight;
        auto core = m.core;
        out.add_mode(m.k, [weight, core, chart, tau, r, delta, part](const Eigen::VectorXd& xi) -> cd {
            cd w = weight(xi);
            if (w == cd(0.0)) return 0.0;
            const Eigen::VectorXd eta = chart.decompose(xi).eta;
            const Eigen::VectorXd scaled = tau * eta;
            const double c3 = chi_bump(scaled.norm() / r);
            const double cd_ = chi_bump(eta.norm() / delta);
            double cut = 1.0;
            switch (part) {
                case TwoMicroPart::Compact: cut = c3; break;
                case TwoMicroPart::Sphere: cut = (1.0 - c3) * cd_; break;
                case TwoMicroPart::Outer: cut = (1.0 - c3) * (1.0 - cd_); break;
                case TwoMicroPart::Full: break;
            }
            if (cut == 0.0) return 0.0;
            if (core) w *= core(xi, scaled);
            return w * cut;
        });
    }
    return out;
}

TwoMicroPairing two_micro_pairing(const FourierState& u, const TwoMicroSymbol& a, const ChartF& chart, double tau,
                                  double r, double delta) {
    TwoMicroPairing p;
    p.compact_part = wigner_pairing(u, substituted_symbol(a, chart, tau, r, delta, TwoMicroPart::Compact));
    p.sphere_part = wigner_pairing(u, substituted_symbol(a, chart, tau, r, delta, TwoMicroPart::Sphere));
    p.outer_part = wigner_pairing(u, substituted_symbol(a, chart, tau, r, delta, TwoMicroPart::Outer));
    return p;
}

// ---------------------------------------------------------------- K_h

double MWindow::operator()(const Eigen::VectorXd& xi) const {
    const double t = (xi - center).norm();
    if (t <= inner) return 1.0;
    if (t >= outer) return 0.0;
    const double s = (t - inner) / (outer - inner);
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

MWindow MWindow::for_chart(const ChartF& chart) { return {chart.xi0(), 0.25 * chart.radius(), 0.5 * chart.radius()}; }

KhField kh_transform(const FourierState& u, const ChartF& chart, const MWindow& m) {
    const auto& g = u.grid();
    const auto& lam = chart.lambda();
    if (g.dim != lam.dim()) throw ShapeError("state and lattice dimensions differ");
    KhField f;
    f.lambda = lam;
    f.h = g.h;
    f.grid = g;
    const Eigen::MatrixXd b = lam.basis_matrix();
    const Eigen::MatrixXd w = lam.dual_matrix();
    std::map<IVec, size_t> index;
    std::vector<Eigen::VectorXd> floors;
    for (long long i = 0; i < g.size(); ++i) {
        const cd c = u.coeffs()[i];
        if (c == cd(0.0)) continue;
        const IVec k = g.mode(i);
        const Eigen::VectorXd xi = g.h * to_eigen(k);
        if (!chart.in_domain(xi)) {
            if (m(xi) != 0.0) throw OutOfChart("window is nonzero outside the chart domain");
            continue;
        }
        const IVec rep = lam.reduce(k);
        auto it = index.find(rep);
        if (it == index.end()) {
            KhFiber fib;
            fib.coset_rep = rep;
            fib.sigma = chart.decompose(xi).sigma;
            fib.omega = chart.bloch_phase(fib.sigma, g.h);
            floors.push_back(lam.rank() ? Eigen::VectorXd((w.transpose() * fib.sigma / g.h).array().floor())
                                        : Eigen::VectorXd());
            it = index.emplace(rep, f.fibers.size()).first;
            f.fibers.push_back(std::move(fib));
        }
        KhFiber& fib = f.fibers[it->second];
        const double mv = m(fib.sigma);
        if (mv == 0.0) continue;
        fib.modes.push_back(k);
        fib.labels.push_back(lam.rank() ? ivec_of(b * (w.transpose() * to_eigen(k) - floors[it->second]))
                                        : IVec(g.dim, 0));
        fib.amplitudes.push_back(mv * c);
    }
    std::erase_if(f.fibers, [](const KhFiber& x) { return x.modes.empty(); });
    return f;
}

cd KhField::evaluate(size_t fiber, const Eigen::VectorXd& y) const {
    const auto& fib = fibers.at(fiber);
    cd s = 0.0;
    for (size_t j = 0; j < fib.modes.size(); ++j) {
        Eigen::VectorXd freq = to_eigen(fib.modes[j]) - fib.sigma / h;
        s += fib.amplitudes[j] * std::polar(1.0, freq.dot(y));
    }
    return s / std::pow(2.0 * kPi, 0.5 * static_cast<double>(y.size()));
}

double KhField::mass() const {
    double s = 0.0;
    for (const auto& fib : fibers)
        for (const auto& a : fib.amplitudes) s += std::norm(a);
    return s;
}

FourierState KhField::rebuild() const {
    FourierState u(grid);
    for (const auto& fib : fibers)
        for (size_t j = 0; j < fib.modes.size(); ++j) u.set(fib.modes[j], fib.amplitudes[j]);
    return u;
}

size_t KhField::dominant_fiber() const {
    if (fibers.empty()) throw EmptyCluster("K_h field has no fibers");
    size_t best = 0;
    double bm = -1.0;
    for (size_t i = 0; i < fibers.size(); ++i) {
        double s = 0.0;
        for (const auto& a : fibers[i].amplitudes) s += std::norm(a);
        if (s > bm) {
            bm = s;
            best = i;
        }
    }
    return best;
}

// ---------------------------------------------------------------- rho pairing

BlochObservable BlochObservable::identity() {
    return {[](const BlochFiberInfo& f) {
        const auto n = static_cast<Eigen::Index>(f.labels->size());
        return Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(n, n));
    }};
}

BlochObservable BlochObservable::from_symbol(const TorusSymbol& a, bool at_limit) {
    return {[a, at_limit](const BlochFiberInfo& f) {
        const auto& labels = *f.labels;
        const auto n = static_cast<Eigen::Index>(labels.size());
        const int d = a.dim();
        const double norm = std::pow(2.0 * kPi, -0.5 * d);
        Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                IVec diff(d);
                for (int t = 0; t < d; ++t) diff[t] = labels[i][t] - labels[j][t];
                Eigen::VectorXd xi = f.sigma;
                if (!at_limit) xi += f.h * (0.5 * (to_eigen(labels[i]) + to_eigen(labels[j])) - f.omega);
                q(i, j) = norm * a.mode_value(diff, xi);
            }
        return q;
    }};
}

BlochObservable BlochObservable::mode_projector(const SubmoduleBasis& lambda, const IVec& coset, const IVec& label) {
    return {[lambda, coset, label](const BlochFiberInfo& f) {
        const auto n = static_cast<Eigen::Index>(f.labels->size());
        Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if ((*f.labels)[i] != label) continue;
            // The label alone does not fix the fiber; recover k = lambda + sigma/h - omega.
            Eigen::VectorXd k = to_eigen(label) + (f.sigma / f.h) - f.omega;
            if (lambda.reduce(ivec_of(k)) == coset) q(i, i) = 1.0;
        }
        return q;
    }};
}

cd rho_pairing(const KhField& field, const BlochObservable& q) {
    cd s = 0.0;
    for (const auto& fib : field.fibers) {
        BlochFiberInfo info{fib.omega, fib.sigma, field.h, &fib.labels};
        Eigen::MatrixXcd m = q.matrix(info);
        const auto n = static_cast<Eigen::Index>(fib.amplitudes.size());
        if (m.rows() != n || m.cols() != n)
            throw ShapeError("observable matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             " on a fiber with " + std::to_string(n) + " modes");
        Eigen::Map<const Eigen::VectorXcd> v(fib.amplitudes.data(), n);
        s += v.dot(m * v);
    }
    return s;
}

cd rho_pairing(const FourierState& u, const BlochObservable& q, const ChartF& chart, const MWindow& m) {
    return rho_pairing(kh_transform(u, chart, m), q);
}

// ---------------------------------------------------------------- flows

TorusSymbol pullback_phi(const TorusSymbol& a, const HamiltonianModel& model, double s) {
    if (s == 0.0) return a;
    return a.map_modes([&model, s](const IVec& k, const XiFunction& f) -> XiFunction {
        const Eigen::VectorXd kv = to_eigen(k);
        return [f, kv, model, s](const Eigen::VectorXd& xi) -> cd {
            cd v = f(xi);
            if (v == cd(0.0) || kv.isZero()) return v;
            return v * std::polar(1.0, s * kv.dot(model.evaluate(xi).gradient));
        };
    });
}

TwoMicroSymbol pullback_phi0(const TwoMicroSymbol& a, const HamiltonianModel& model, double s) {
    TwoMicroSymbol out(a.lambda(), a.r0());
    for (const auto& m : a.modes()) {
        TwoMicroMode n = m;
        const Eigen::VectorXd kv = to_eigen(m.k);
        auto w = m.weight;
        n.weight = [w, kv, model, s](const Eigen::VectorXd& xi) -> cd {
            cd v = w(xi);
            if (v == cd(0.0) || kv.isZero() || s == 0.0) return v;
            return v * std::polar(1.0, s * kv.dot(model.evaluate(xi).gradient));
        };
        out.add_mode(std::move(n));
    }
    return out;
}

namespace {

// Multiplies core and hom of every mode by e^{i k . d2H(sigma(xi)) v(eta)}.
TwoMicroSymbol pullback_eta(const TwoMicroSymbol& a, const ChartF& chart, double s, bool normalized) {
    TwoMicroSymbol out(a.lambda(), a.r0());
    for (const auto& m : a.modes()) {
        TwoMicroMode n = m;
        const Eigen::VectorXd kv = to_eigen(m.k);
        auto phase = [kv, chart, s](const Eigen::VectorXd& xi, const Eigen::VectorXd& v) -> cd {
            if (kv.isZero() || s == 0.0 || v.isZero()) return 1.0;
            const Eigen::MatrixXd hess = chart.model().evaluate(chart.decompose(xi).sigma).hessian;
            return std::polar(1.0, s * kv.dot(hess * v));
        };
        auto core = m.core;
        n.core = [core, phase, normalized](const Eigen::VectorXd& xi, const Eigen::VectorXd& eta) -> cd {
            cd v = core ? core(xi, eta) : cd(1.0);
            if (v == cd(0.0)) return v;
            return v * phase(xi, normalized ? unit_or_zero(eta) : eta);
        };
        auto hom = m.hom;
        if (normalized) {
            n.hom = [hom, phase](const Eigen::VectorXd& xi, const Eigen::VectorXd& om) -> cd {
                cd v = hom ? hom(xi, om) : cd(1.0);
                if (v == cd(0.0)) return v;
                return v * phase(xi, om);
            };
        }
        out.add_mode(std::move(n));
    }
    return out;
}

}  // namespace

TwoMicroSymbol pullback_phi1(const TwoMicroSymbol& a, const ChartF& chart, double s) {
    return pullback_eta(a, chart, s, true);
}

TwoMicroSymbol pullback_phi1_tilde(const TwoMicroSymbol& a, const ChartF& chart, double t) {
    return pullback_eta(a, chart, t, false);
}

}  // namespace semiclass
