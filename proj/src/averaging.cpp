#include "semiclass/averaging.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "semiclass/errors.hpp"
#include "semiclass/fft.hpp"

namespace semiclass {

namespace {

constexpr double kPi = std::numbers::pi;

bool full_axis(const std::pair<Eigen::VectorXd, Eigen::VectorXd>& b, int i) {
    return b.second[i] - b.first[i] >= 2 * kPi - 1e-12;
}

cd axis_integral(double lo, double hi, long long m) {
    if (m == 0) return (hi - lo) / (2 * kPi);
    return (std::exp(cd(0.0, m * hi)) - std::exp(cd(0.0, m * lo))) / cd(0.0, 2 * kPi * m);
}

long long fold(long long k, int res) { return ((k % res) + res) % res; }

}  // namespace

cd window_transform(const TimeWindow& w, double omega) {
    if (!(w.t_b > w.t_a)) throw DegenerateInput("time window must have t_b > t_a");
    const double len = w.t_b - w.t_a;
    const cd phase = std::polar(1.0, -omega * 0.5 * (w.t_a + w.t_b));
    if (w.shape == WindowShape::Gaussian) {
        const double s = len / 10.0;
        return phase * std::exp(-0.5 * s * s * omega * omega);
    }
    const double x = 0.5 * omega * len;
    return phase * (x == 0.0 ? 1.0 : std::sin(x) / x);
}

std::vector<double> mode_frequencies(const FourierGrid& g, const HamiltonianModel& model, double scale) {
    std::vector<double> f(g.size());
    for (long long i = 0; i < g.size(); ++i) f[i] = scale * model.value(g.h * to_eigen(g.mode(i)));
    return f;
}

// ---------------------------------------------------------------- regions

Region Region::torus(int d) {
    return box(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Constant(d, 2 * kPi));
}

Region Region::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) { return union_of({{lo, hi}}); }

Region Region::union_of(std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> boxes) {
    if (boxes.empty()) throw DegenerateInput("empty box list");
    Region r;
    r.dim = static_cast<int>(boxes.front().first.size());
    for (const auto& [lo, hi] : boxes) {
        if (lo.size() != r.dim || hi.size() != r.dim) throw ShapeError("box corners have mixed dimensions");
        for (int i = 0; i < r.dim; ++i)
            if (!(hi[i] > lo[i]) || hi[i] - lo[i] > 2 * kPi + 1e-12)
                throw DegenerateInput("box sides must have length in (0, 2 pi]");
    }
    r.boxes = std::move(boxes);
    return r;
}

Region Region::slab(const IVec& b, double c, double r) {
    if (b.empty()) throw ShapeError("slab normal is empty");
    long long g = 0;
    for (long long v : b) g = std::gcd(g, std::abs(v));
    if (g != 1) throw DegenerateInput("slab normal must be primitive");
    if (!(r > 0) || r > kPi) throw DegenerateInput("slab half-width must lie in (0, pi]");
    Region s;
    s.kind = Kind::Slab;
    s.dim = static_cast<int>(b.size());
    s.normal = b;
    s.offset = c;
    s.half_width = r;
    return s;
}

cd Region::coefficient(const IVec& m) const {
    if (static_cast<int>(m.size()) != dim) throw ShapeError("frequency has wrong dimension");
    if (kind == Kind::Slab) {
        int p = 0;
        while (normal[p] == 0) ++p;
        if (m[p] % normal[p] != 0) return 0.0;
        const long long n = m[p] / normal[p];
        for (int i = 0; i < dim; ++i)
            if (m[i] != n * normal[i]) return 0.0;
        if (n == 0) return half_width / kPi;
        return std::polar(std::sin(n * half_width) / (kPi * n), n * offset);
    }
    cd s = 0.0;
    for (const auto& b : boxes) {
        cd f = 1.0;
        for (int i = 0; i < dim; ++i) {
            if (full_axis(b, i)) {
                if (m[i] != 0) {
                    f = 0.0;
                    break;
                }
                continue;
            }
            f *= axis_integral(b.first[i], b.second[i], m[i]);
        }
        s += f;
    }
    return s;
}

IVec Region::coupling_key(const IVec& k) const {
    IVec key;
    if (kind == Kind::Slab) {
        int p = 0;
        while (normal[p] == 0) ++p;
        for (int i = 0; i < dim; ++i)
            if (i != p) key.push_back(k[i] * normal[p] - k[p] * normal[i]);
        return key;
    }
    for (int i = 0; i < dim; ++i) {
        bool full = true;
        for (const auto& b : boxes) full = full && full_axis(b, i);
        if (full) key.push_back(k[i]);
    }
    return key;
}

double Region::fraction() const {
    if (kind == Kind::Slab) return half_width / kPi;
    double f = 0.0;
    for (const auto& [lo, hi] : boxes) f += ((hi - lo) / (2 * kPi)).prod();
    return f;
}

// ---------------------------------------------------------------- forms

WindowedRegionForm::WindowedRegionForm(const std::vector<IVec>& modes, const std::vector<double>& freq,
                                       const TimeWindow& w, const Region& r)
    : n_(modes.size()) {
    if (freq.size() != modes.size()) throw ShapeError("one frequency per mode expected");
    std::map<IVec, std::vector<size_t>> by_key;
    for (size_t i = 0; i < modes.size(); ++i) by_key[r.coupling_key(modes[i])].push_back(i);
    for (auto& [key, members] : by_key) {
        const auto n = static_cast<Eigen::Index>(members.size());
        Eigen::MatrixXcd a(n, n);
        IVec diff(r.dim);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const auto& ki = modes[members[i]];
                const auto& kj = modes[members[j]];
                for (int t = 0; t < r.dim; ++t) diff[t] = kj[t] - ki[t];
                a(i, j) = r.coefficient(diff) * window_transform(w, freq[members[j]] - freq[members[i]]);
            }
        groups_.push_back(std::move(members));
        blocks_.push_back(std::move(a));
    }
}

Eigen::VectorXd WindowedRegionForm::apply_columns(const Eigen::MatrixXcd& c) const {
    if (static_cast<size_t>(c.rows()) != n_) throw ShapeError("coefficient vector size differs from the form");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(c.cols());
    for (size_t g = 0; g < groups_.size(); ++g) {
        const auto& idx = groups_[g];
        Eigen::MatrixXcd sub(static_cast<Eigen::Index>(idx.size()), c.cols());
        for (size_t i = 0; i < idx.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = c.row(static_cast<Eigen::Index>(idx[i]));
        out += sub.conjugate().cwiseProduct(blocks_[g] * sub).colwise().sum().real().transpose();
    }
    return out;
}

double WindowedRegionForm::operator()(const std::vector<cd>& c) const {
    Eigen::Map<const Eigen::VectorXcd> v(c.data(), static_cast<Eigen::Index>(c.size()));
    return apply_columns(v)[0];
}

double windowed_region_mass(const FourierState& u, const std::vector<double>& freq, const TimeWindow& w,
                            const Region& r) {
    const auto& g = u.grid();
    if (static_cast<long long>(freq.size()) != g.size()) throw ShapeError("one frequency per grid mode expected");
    if (r.dim != g.dim) throw ShapeError("region and state dimensions differ");
    std::vector<IVec> modes;
    std::vector<double> f;
    std::vector<cd> c;
    for (long long i = 0; i < g.size(); ++i) {
        if (u.coeffs()[i] == cd(0.0)) continue;
        modes.push_back(g.mode(i));
        f.push_back(freq[i]);
        c.push_back(u.coeffs()[i]);
    }
    return WindowedRegionForm(modes, f, w, r)(c);
}

std::vector<double> windowed_density(const FourierState& u, const std::vector<double>& freq, const TimeWindow& w,
                                     int resolution) {
    if (resolution < 2) throw DegenerateInput("resolution must be >= 2");
    const auto& g = u.grid();
    if (static_cast<long long>(freq.size()) != g.size()) throw ShapeError("one frequency per grid mode expected");
    std::vector<long long> support;
    for (long long i = 0; i < g.size(); ++i)
        if (u.coeffs()[i] != cd(0.0)) support.push_back(i);
    std::vector<IVec> folded;
    for (long long i : support) {
        IVec k = g.mode(i);
        for (auto& v : k) v = fold(v, resolution);
        folded.push_back(k);
    }
    long long total = 1;
    for (int a = 0; a < g.dim; ++a) total *= resolution;
    std::vector<cd> buf(total, cd(0.0));
    for (size_t a = 0; a < support.size(); ++a) {
        const cd ca = u.coeffs()[support[a]];
        for (size_t b = 0; b < support.size(); ++b) {
            long long s = 0;
            for (int t = 0; t < g.dim; ++t) s = s * resolution + fold(folded[a][t] - folded[b][t], resolution);
            buf[s] += ca * std::conj(u.coeffs()[support[b]]) *
                      window_transform(w, freq[support[a]] - freq[support[b]]);
        }
    }
    dft(buf, std::vector<int>(g.dim, resolution), +1);
    const double norm = std::pow(2 * kPi, -g.dim);
    std::vector<double> out(total);
    for (long long i = 0; i < total; ++i) out[i] = buf[i].real() * norm;
    return out;
}

std::vector<double> lambda_averaged_density(const FourierState& u, const SubmoduleBasis& lambda, int resolution) {
    const auto& g = u.grid();
    const int r = lambda.rank();
    if (lambda.dim() != g.dim) throw ShapeError("lattice and state dimensions differ");
    if (r < 1 || r > 2) throw DegenerateInput("Lambda-averaged densities need rank 1 or 2");
    if (resolution < 2) throw DegenerateInput("resolution must be >= 2");
    std::vector<IVec> cols;
    for (const auto& c : lambda.hnf()) cols.push_back(to_ivec(c));
    std::vector<long long> support;
    for (long long i = 0; i < g.size(); ++i)
        if (u.coeffs()[i] != cd(0.0)) support.push_back(i);
    long long nmax = 0;
    for (const auto& c : cols) {
        long long m = 0;
        for (long long v : c) m = std::max(m, std::abs(v));
        nmax = std::max(nmax, 2 * g.radius / m + 1);
    }
    const long long n2 = r == 2 ? nmax : 0;
    std::vector<cd> buf(r == 2 ? static_cast<size_t>(resolution) * resolution : resolution, cd(0.0));
    IVec shift(g.dim);
    for (long long a = -nmax; a <= nmax; ++a)
        for (long long b = -n2; b <= n2; ++b) {
            for (int t = 0; t < g.dim; ++t) shift[t] = a * cols[0][t] + (r == 2 ? b * cols[1][t] : 0);
            cd s = 0.0;
            for (long long j : support) {
                IVec k = g.mode(j);
                for (int t = 0; t < g.dim; ++t) k[t] += shift[t];
                long long i = g.index(k);
                if (i >= 0) s += u.coeffs()[i] * std::conj(u.coeffs()[j]);
            }
            long long idx = fold(a, resolution);
            if (r == 2) idx = idx * resolution + fold(b, resolution);
            buf[idx] += s;
        }
    dft(buf, std::vector<int>(r, resolution), +1);
    const double norm = std::pow(2 * kPi, -r);
    std::vector<double> out(buf.size());
    for (size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real() * norm;
    return out;
}

}  // namespace semiclass
