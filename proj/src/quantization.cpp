#include "semiclass/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "semiclass/errors.hpp"
#include "semiclass/fft.hpp"

namespace semiclass {

namespace {

constexpr double kPi = std::numbers::pi;

double two_pi_pow(int d, double p) { return std::pow(2.0 * kPi, p * d); }

Eigen::VectorXd half_point(const IVec& k, const IVec& m, double h) {
    Eigen::VectorXd xi(k.size());
    for (size_t i = 0; i < k.size(); ++i) xi[i] = h * (static_cast<double>(k[i]) + 0.5 * static_cast<double>(m[i]));
    return xi;
}

IVec add(const IVec& a, const IVec& b) {
    IVec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

IVec negate(const IVec& a) {
    IVec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
    return r;
}

}  // namespace

// ---------------------------------------------------------------- grid

FourierGrid::FourierGrid(int d, int n, double h_, IVec c) : dim(d), radius(n), h(h_), center(std::move(c)) {
    if (d < 1 || d > kMaxDim) throw DegenerateInput("grid dimension out of range");
    if (n < 1) throw DegenerateInput("grid radius must be >= 1");
    if (!(h_ > 0)) throw DegenerateInput("h must be positive");
    if (center.empty()) center.assign(d, 0);
    if (static_cast<int>(center.size()) != d) throw ShapeError("grid center has wrong length");
}

long long FourierGrid::size() const {
    long long s = 1;
    for (int i = 0; i < dim; ++i) s *= side();
    return s;
}

bool FourierGrid::contains(const IVec& k) const { return index(k) >= 0; }

long long FourierGrid::index(const IVec& k) const {
    long long idx = 0;
    for (int i = 0; i < dim; ++i) {
        long long off = k[i] - center[i];
        if (off < -radius || off > radius) return -1;
        idx = idx * side() + off + radius;
    }
    return idx;
}

IVec FourierGrid::mode(long long idx) const {
    IVec k(dim);
    for (int i = dim - 1; i >= 0; --i) {
        k[i] = idx % side() - radius + center[i];
        idx /= side();
    }
    return k;
}

// ---------------------------------------------------------------- state

FourierState::FourierState(FourierGrid g) : grid_(std::move(g)), coeffs_(grid_.size(), cd(0.0)) {}

FourierState::FourierState(FourierGrid g, std::vector<cd> c) : grid_(std::move(g)), coeffs_(std::move(c)) {
    if (static_cast<long long>(coeffs_.size()) != grid_.size()) throw ShapeError("coefficient count does not match grid");
}

cd FourierState::at(const IVec& k) const {
    long long i = grid_.index(k);
    return i < 0 ? cd(0.0) : coeffs_[i];
}

void FourierState::set(const IVec& k, cd v) {
    long long i = grid_.index(k);
    if (i < 0) throw TruncationError("mode outside grid");
    coeffs_[i] = v;
}

double FourierState::norm_squared() const {
    double s = 0.0;
    for (const auto& c : coeffs_) s += std::norm(c);
    return s;
}

double FourierState::norm() const { return std::sqrt(norm_squared()); }

void FourierState::normalize() {
    double n = norm();
    if (n == 0.0) throw DegenerateInput("cannot normalize the zero state");
    for (auto& c : coeffs_) c /= n;
}

double FourierState::edge_mass(int margin) const {
    double s = 0.0;
    const long long n = grid_.size();
    for (long long i = 0; i < n; ++i) {
        if (coeffs_[i] == cd(0.0)) continue;
        IVec k = grid_.mode(i);
        for (int a = 0; a < grid_.dim; ++a) {
            if (std::abs(k[a] - grid_.center[a]) > grid_.radius - margin) {
                s += std::norm(coeffs_[i]);
                break;
            }
        }
    }
    return s;
}

FourierState FourierState::regrid(const FourierGrid& g) const {
    FourierState out(g);
    out.prenormalization_norm = prenormalization_norm;
    double lost = 0.0;
    for (long long i = 0; i < grid_.size(); ++i) {
        if (coeffs_[i] == cd(0.0)) continue;
        long long j = g.index(grid_.mode(i));
        if (j < 0)
            lost += std::norm(coeffs_[i]);
        else
            out.coeffs_[j] = coeffs_[i];
    }
    if (lost > 1e-28) throw TruncationError("regrid drops mass " + std::to_string(lost));
    return out;
}

// ---------------------------------------------------------------- symbols

cd XiProfile::operator()(const Eigen::VectorXd& xi) const {
    cd v = coeff;
    if (!polynomial.empty()) {
        double p = 0.0;
        for (const auto& [exps, c] : polynomial) {
            double term = c;
            for (size_t i = 0; i < exps.size(); ++i) term *= std::pow(xi[i], static_cast<double>(exps[i]));
            p += term;
        }
        v *= p;
    }
    if (gaussian) v *= std::exp(-(xi - gaussian->first).squaredNorm() / (2.0 * gaussian->second * gaussian->second));
    if (trig) v *= std::cos(trig->first.dot(xi) + trig->second);
    return v;
}

TorusSymbol& TorusSymbol::add_mode(const IVec& k, XiFunction fhat) {
    if (static_cast<int>(k.size()) != dim_) throw ShapeError("symbol mode has wrong dimension");
    for (auto& m : modes_) {
        if (m.k == k) {
            XiFunction prev = m.fhat;
            m.fhat = [prev, fhat](const Eigen::VectorXd& xi) { return prev(xi) + fhat(xi); };
            return *this;
        }
    }
    modes_.push_back({k, std::move(fhat)});
    return *this;
}

TorusSymbol& TorusSymbol::add_term(const IVec& k, cd coeff, XiFunction g) {
    const double norm = two_pi_pow(dim_, 0.5);
    if (g) return add_mode(k, [g, c = coeff * norm](const Eigen::VectorXd& xi) { return c * g(xi); });
    return add_mode(k, [c = coeff * norm](const Eigen::VectorXd&) { return c; });
}

TorusSymbol& TorusSymbol::add_cos(const IVec& k, XiFunction g) {
    bool zero = std::all_of(k.begin(), k.end(), [](long long v) { return v == 0; });
    if (zero) return add_term(k, 1.0, g);
    add_term(k, 0.5, g);
    return add_term(negate(k), 0.5, g);
}

TorusSymbol& TorusSymbol::add_sin(const IVec& k, XiFunction g) {
    bool zero = std::all_of(k.begin(), k.end(), [](long long v) { return v == 0; });
    if (zero) return *this;
    add_term(k, cd(0.0, -0.5), g);
    return add_term(negate(k), cd(0.0, 0.5), g);
}

int TorusSymbol::max_mode() const {
    long long m = 0;
    for (const auto& mode : modes_)
        for (long long v : mode.k) m = std::max(m, std::abs(v));
    return static_cast<int>(m);
}

cd TorusSymbol::mode_value(const IVec& k, const Eigen::VectorXd& xi) const {
    for (const auto& m : modes_)
        if (m.k == k) return m.fhat(xi);
    return 0.0;
}

cd TorusSymbol::evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const {
    cd s = 0.0;
    for (const auto& m : modes_) s += m.fhat(xi) * std::exp(cd(0.0, to_eigen(m.k).dot(x)));
    return s / two_pi_pow(dim_, 0.5);
}

TorusSymbol TorusSymbol::map_modes(const std::function<XiFunction(const IVec&, const XiFunction&)>& f) const {
    TorusSymbol out(dim_);
    for (const auto& m : modes_) out.modes_.push_back({m.k, f(m.k, m.fhat)});
    return out;
}

TorusSymbol plane_wave_symbol(int d, const IVec& m) {
    TorusSymbol a(d);
    a.add_term(m, 1.0);
    return a;
}

PotentialSpec PotentialSpec::from_function(std::function<double(double, const Eigen::VectorXd&)> v, double sup,
                                           bool time_independent) {
    PotentialSpec p;
    p.kind = Kind::Multiplication;
    p.multiplication = std::move(v);
    p.sup_bound = sup;
    p.time_independent = time_independent;
    return p;
}

PotentialSpec PotentialSpec::from_symbol(const TorusSymbol& v) {
    double sup = 0.0;
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(v.dim());
    for (const auto& m : v.modes()) sup += std::abs(m.fhat(zero));
    sup /= two_pi_pow(v.dim(), 0.5);
    PotentialSpec p = from_function([v, zero](double, const Eigen::VectorXd& x) { return v.evaluate(x, zero).real(); },
                                    sup, true);
    p.symbol = v;
    return p;
}

PotentialSpec PotentialSpec::pseudodifferential(const TorusSymbol& v, double sup) {
    PotentialSpec p;
    p.kind = Kind::Pseudodifferential;
    p.symbol = v;
    p.sup_bound = sup;
    return p;
}

// ---------------------------------------------------------------- Weyl calculus

FourierState weyl_apply(const TorusSymbol& a, const FourierState& u) {
    const auto& g = u.grid();
    FourierGrid out(g.dim, g.radius + std::max(a.max_mode(), 0), g.h, g.center);
    return weyl_apply(a, u, out, std::numeric_limits<double>::infinity());
}

FourierState weyl_apply(const TorusSymbol& a, const FourierState& u, const FourierGrid& out, double tol) {
    if (a.dim() != u.dim()) throw ShapeError("symbol and state dimensions differ");
    const auto& g = u.grid();
    const double c = 1.0 / two_pi_pow(g.dim, 0.5);
    FourierState r(out);
    double dropped = 0.0;
    std::vector<cd> lost;
    for (long long i = 0; i < g.size(); ++i) {
        const cd ui = u.coeffs()[i];
        if (ui == cd(0.0)) continue;
        const IVec k = g.mode(i);
        for (const auto& m : a.modes()) {
            const cd v = c * m.fhat(half_point(k, m.k, g.h)) * ui;
            const long long j = out.index(add(k, m.k));
            if (j >= 0)
                r.coeffs()[j] += v;
            else
                dropped += std::abs(v);
        }
    }
    if (dropped > tol) {
        std::ostringstream os;
        os << "weyl_apply output needs radius " << g.radius + a.max_mode() << ", got " << out.radius;
        throw TruncationError(os.str());
    }
    return r;
}

cd wigner_pairing_complex(const FourierState& u, const TorusSymbol& a) {
    if (a.dim() != u.dim()) throw ShapeError("symbol and state dimensions differ");
    const auto& g = u.grid();
    cd s = 0.0;
    for (const auto& m : a.modes()) {
        for (long long i = 0; i < g.size(); ++i) {
            const cd ui = u.coeffs()[i];
            if (ui == cd(0.0)) continue;
            const IVec k = g.mode(i);
            const long long j = g.index(add(k, m.k));
            if (j < 0) continue;
            const cd uj = u.coeffs()[j];
            if (uj == cd(0.0)) continue;
            s += std::conj(uj) * m.fhat(half_point(k, m.k, g.h)) * ui;
        }
    }
    return s / two_pi_pow(g.dim, 0.5);
}

double wigner_pairing(const FourierState& u, const TorusSymbol& a) { return wigner_pairing_complex(u, a).real(); }

PairingKernel::PairingKernel(const FourierGrid& g, const TorusSymbol& a) : grid_(g) {
    const double c = 1.0 / two_pi_pow(g.dim, 0.5);
    for (const auto& m : a.modes()) {
        Band b;
        for (long long i = 0; i < g.size(); ++i) {
            const IVec k = g.mode(i);
            const long long j = g.index(add(k, m.k));
            if (j < 0) continue;
            const cd v = c * m.fhat(half_point(k, m.k, g.h));
            if (v == cd(0.0)) continue;
            b.idx.emplace_back(i, j);
            b.values.push_back(v);
        }
        bands_.push_back(std::move(b));
    }
}

cd PairingKernel::pair(const std::vector<cd>& u) const {
    cd s = 0.0;
    for (const auto& b : bands_)
        for (size_t n = 0; n < b.idx.size(); ++n) s += std::conj(u[b.idx[n].second]) * b.values[n] * u[b.idx[n].first];
    return s;
}

// ---------------------------------------------------------------- propagation

FreePropagator::FreePropagator(const FourierGrid& g, const HamiltonianModel& model) : grid_(g), energy_(g.size()) {
    if (model.dim() != g.dim) throw ShapeError("Hamiltonian and grid dimensions differ");
    for (long long i = 0; i < g.size(); ++i) energy_[i] = model.value(g.h * to_eigen(g.mode(i)));
}

void FreePropagator::apply_inplace(std::vector<cd>& c, double t) const {
    if (t == 0.0) return;
    const double s = t / grid_.h;
    for (size_t i = 0; i < c.size(); ++i)
        if (c[i] != cd(0.0)) c[i] *= std::polar(1.0, -s * energy_[i]);
}

FourierState FreePropagator::apply(const FourierState& u, double t) const {
    if (!(u.grid() == grid_)) throw ShapeError("state grid differs from propagator grid");
    FourierState r = u;
    apply_inplace(r.coeffs(), t);
    return r;
}

FourierState free_propagate(const FourierState& u, double t, const HamiltonianModel& model) {
    return FreePropagator(u.grid(), model).apply(u, t);
}

namespace {

// Position samples x_j = 2 pi j / (2N+1) on the grid's own DFT box.
class PotentialStepper {
public:
    PotentialStepper(const FourierGrid& g, const PotentialSpec& v) : grid_(g), v_(v) {
        dims_.assign(g.dim, static_cast<int>(g.side()));
        if (v.kind == PotentialSpec::Kind::Multiplication && v.time_independent) values_ = sample(0.0);
    }

    void apply(FourierState& u, double t_mid, double dt) const {
        switch (v_.kind) {
            case PotentialSpec::Kind::None:
                return;
            case PotentialSpec::Kind::Multiplication:
                multiply(u, v_.time_independent ? values_ : sample(t_mid), dt);
                break;
            case PotentialSpec::Kind::Pseudodifferential:
                taylor(u, dt);
                break;
            case PotentialSpec::Kind::Operator:
                u = v_.step(u, t_mid, dt);
                break;
        }
        double edge = u.edge_mass(1);
        if (edge > 1e-10 * std::max(1.0, u.norm_squared()))
            throw TruncationError("potential coupling reached the grid boundary, edge mass " + std::to_string(edge));
    }

private:
    std::vector<double> sample(double t) const {
        const long long n = grid_.size();
        const double step = 2.0 * kPi / static_cast<double>(grid_.side());
        std::vector<double> vals(n);
        Eigen::VectorXd x(grid_.dim);
        for (long long i = 0; i < n; ++i) {
            long long r = i;
            for (int a = grid_.dim - 1; a >= 0; --a) {
                x[a] = step * static_cast<double>(r % grid_.side());
                r /= grid_.side();
            }
            vals[i] = v_.multiplication(t, x);
        }
        return vals;
    }

    // Coefficient at offset n = k - center sits at DFT slot n mod (2N+1); the
    // center phase e^{i c.x} cancels between the two transforms.
    void multiply(FourierState& u, const std::vector<double>& vals, double dt) const {
        const long long n = grid_.size();
        const long long side = grid_.side();
        std::vector<cd> buf(n);
        std::vector<long long> slot(n);
        for (long long i = 0; i < n; ++i) {
            IVec k = grid_.mode(i);
            long long s = 0;
            for (int a = 0; a < grid_.dim; ++a) {
                long long off = ((k[a] - grid_.center[a]) % side + side) % side;
                s = s * side + off;
            }
            slot[i] = s;
            buf[s] = u.coeffs()[i];
        }
        dft(buf, dims_, +1);
        const double h = grid_.h;
        for (long long i = 0; i < n; ++i) buf[i] *= std::polar(1.0, -h * dt * vals[i]);
        dft(buf, dims_, -1);
        const double inv = 1.0 / static_cast<double>(n);
        for (long long i = 0; i < n; ++i) u.coeffs()[i] = buf[slot[i]] * inv;
    }

    void taylor(FourierState& u, double dt) const {
        FourierState term = u;
        const cd f(0.0, -grid_.h * dt);
        for (int n = 1; n <= 4; ++n) {
            term = weyl_apply(v_.symbol, term, grid_, std::numeric_limits<double>::infinity());
            for (auto& c : term.coeffs()) c *= f / static_cast<double>(n);
            for (size_t i = 0; i < u.coeffs().size(); ++i) u.coeffs()[i] += term.coeffs()[i];
        }
    }

    FourierGrid grid_;
    const PotentialSpec& v_;
    std::vector<int> dims_;
    std::vector<double> values_;
};

}  // namespace

FourierState perturbed_propagate(const FourierState& u, double t, const HamiltonianModel& model,
                                 const PotentialSpec& v, double dt, double t0) {
    FreePropagator free(u.grid(), model);
    if (v.kind == PotentialSpec::Kind::None || t == 0.0) return free.apply(u, t);
    if (!(dt > 0)) throw DegenerateInput("dt must be positive");
    PotentialStepper pot(u.grid(), v);
    FourierState r = u;
    const double sign = t < 0 ? -1.0 : 1.0;
    const double total = std::abs(t);
    long long steps = static_cast<long long>(std::ceil(total / dt - 1e-9));
    double pending = 0.0;
    double elapsed = 0.0;
    for (long long s = 0; s < steps; ++s) {
        double step = std::min(dt, total - elapsed);
        pending += 0.5 * step;
        free.apply_inplace(r.coeffs(), sign * pending);
        pot.apply(r, t0 + sign * (elapsed + 0.5 * step), sign * step);
        pending = 0.5 * step;
        elapsed += step;
    }
    free.apply_inplace(r.coeffs(), sign * pending);
    return r;
}

// ---------------------------------------------------------------- time averages

std::vector<std::pair<double, double>> window_weights(const TimeWindow& w) {
    if (w.samples < 2) throw DegenerateInput("time window needs at least 2 samples");
    if (!(w.t_b > w.t_a)) throw DegenerateInput("time window must have t_b > t_a");
    const int m = w.samples;
    const double step = (w.t_b - w.t_a) / m;
    const double mid = 0.5 * (w.t_a + w.t_b);
    const double sigma = (w.t_b - w.t_a) / 10.0;
    std::vector<std::pair<double, double>> nodes;
    double total = 0.0;
    for (int i = 0; i <= m; ++i) {
        double t = w.t_a + i * step;
        double wt = (i == 0 || i == m) ? 0.5 : 1.0;
        if (w.shape == WindowShape::Gaussian) wt *= std::exp(-(t - mid) * (t - mid) / (2.0 * sigma * sigma));
        nodes.emplace_back(t, wt);
        total += wt;
    }
    for (auto& n : nodes) n.second /= total;
    return nodes;
}

void for_each_sample(const FourierState& u0, const HamiltonianModel& model, const PotentialSpec& v, double tau,
                     const TimeWindow& w, const std::function<void(double, double, const FourierState&)>& f) {
    const auto nodes = window_weights(w);
    if (v.kind == PotentialSpec::Kind::None) {
        FreePropagator prop(u0.grid(), model);
        for (const auto& [t, wt] : nodes) f(t, wt, prop.apply(u0, tau * t));
        return;
    }
    FourierState cur = u0;
    double s = 0.0;
    for (const auto& [t, wt] : nodes) {
        double target = tau * t;
        if (target != s) cur = perturbed_propagate(cur, target - s, model, v, w.dt, s);
        s = target;
        f(t, wt, cur);
    }
}

double time_averaged_pairing(const FourierState& u0, const TorusSymbol& a, const HamiltonianModel& model,
                             const PotentialSpec& v, double tau, const TimeWindow& w) {
    PairingKernel kernel(u0.grid(), a);
    double acc = 0.0;
    for_each_sample(u0, model, v, tau, w,
                    [&](double, double wt, const FourierState& u) { acc += wt * kernel.pair(u.coeffs()).real(); });
    return acc;
}

// ---------------------------------------------------------------- position space

std::vector<double> position_density(const FourierState& u, int resolution) {
    if (resolution < 2) throw DegenerateInput("resolution must be >= 2");
    const auto& g = u.grid();
    std::vector<int> dims(g.dim, resolution);
    long long total = 1;
    for (int a = 0; a < g.dim; ++a) total *= resolution;
    // Folding k mod resolution is exact at the sample points.
    std::vector<cd> buf(total, cd(0.0));
    for (long long i = 0; i < g.size(); ++i) {
        const cd c = u.coeffs()[i];
        if (c == cd(0.0)) continue;
        IVec k = g.mode(i);
        long long s = 0;
        for (int a = 0; a < g.dim; ++a) s = s * resolution + ((k[a] % resolution) + resolution) % resolution;
        buf[s] += c;
    }
    dft(buf, dims, +1);
    const double norm = 1.0 / two_pi_pow(g.dim, 1.0);
    std::vector<double> out(total);
    for (long long i = 0; i < total; ++i) out[i] = std::norm(buf[i]) * norm;
    return out;
}

double slab_mass(const FourierState& u, const IVec& b, double c, double r) {
    const auto& g = u.grid();
    if (static_cast<int>(b.size()) != g.dim) throw ShapeError("slab normal has wrong dimension");
    if (!(r > 0) || r > kPi) throw DegenerateInput("slab half-width must lie in (0, pi]");
    long long bmax = 0;
    for (long long v : b) bmax = std::max(bmax, std::abs(v));
    if (bmax == 0) throw DegenerateInput("slab normal must be nonzero");
    const long long qmax = 2 * g.radius / bmax + 1;
    std::vector<long long> support;
    for (long long j = 0; j < g.size(); ++j)
        if (u.coeffs()[j] != cd(0.0)) support.push_back(j);
    double mass = 0.0;
    for (long long q = -qmax; q <= qmax; ++q) {
        IVec shift(g.dim);
        for (int a = 0; a < g.dim; ++a) shift[a] = q * b[a];
        const cd f = q == 0 ? cd(r / kPi) : std::polar(std::sin(q * r) / (kPi * q), q * c);
        cd s = 0.0;
        for (long long j : support) {
            long long k = g.index(add(g.mode(j), shift));
            if (k < 0) continue;
            s += u.coeffs()[k] * std::conj(u.coeffs()[j]);
        }
        mass += (f * s).real();
    }
    return mass;
}

double box_mass(const FourierState& u, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    const auto& g = u.grid();
    if (lo.size() != g.dim || hi.size() != g.dim) throw ShapeError("box corners have wrong dimension");
    const long long side = g.side();
    // G_a(m) = (1 / 2 pi) int_lo^hi e^{i m x} dx over offsets m in [-2N, 2N].
    std::vector<std::vector<cd>> gfac(g.dim, std::vector<cd>(4 * g.radius + 1));
    for (int a = 0; a < g.dim; ++a) {
        for (long long m = -2 * g.radius; m <= 2 * g.radius; ++m) {
            cd v = m == 0 ? cd(hi[a] - lo[a])
                          : (std::exp(cd(0.0, m * hi[a])) - std::exp(cd(0.0, m * lo[a]))) / cd(0.0, m);
            gfac[a][m + 2 * g.radius] = v / (2.0 * kPi);
        }
    }
    auto gmat = [&](int a) {
        Eigen::MatrixXcd m(side, side);
        for (long long i = 0; i < side; ++i)
            for (long long j = 0; j < side; ++j) m(i, j) = gfac[a][i - j + 2 * g.radius];
        return m;
    };
    if (g.dim == 1) {
        Eigen::Map<const Eigen::VectorXcd> v(u.coeffs().data(), side);
        return (v.adjoint() * gmat(0) * v)(0, 0).real();
    }
    if (g.dim == 2) {
        // U(k1, k2) row-major; mass = sum G1(k1-j1) G2(k2-j2) U(k1,k2) conj U(j1,j2).
        Eigen::Map<const Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> uu(u.coeffs().data(), side,
                                                                                                side);
        Eigen::MatrixXcd t = uu * gmat(1) * uu.adjoint();
        return (gmat(0).cwiseProduct(t)).sum().real();
    }
    double mass = 0.0;
    for (long long i = 0; i < g.size(); ++i) {
        if (u.coeffs()[i] == cd(0.0)) continue;
        IVec k = g.mode(i);
        for (long long j = 0; j < g.size(); ++j) {
            if (u.coeffs()[j] == cd(0.0)) continue;
            IVec l = g.mode(j);
            cd f = 1.0;
            for (int a = 0; a < g.dim; ++a) f *= gfac[a][k[a] - l[a] + 2 * g.radius];
            mass += (f * u.coeffs()[i] * std::conj(u.coeffs()[j])).real();
        }
    }
    return mass;
}

}  // namespace semiclass
