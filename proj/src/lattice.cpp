#include "semiclass/lattice.hpp"

#include <cmath>
#include <numbers>

#include "semiclass/errors.hpp"

namespace semiclass {

IntVector to_int_vector(const IVec& v) {
    IntVector out;
    out.reserve(v.size());
    for (long long x : v) out.emplace_back(static_cast<long>(x));
    return out;
}

IVec to_ivec(const IntVector& v) {
    IVec out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if (!x.fits_slong_p()) throw DegenerateInput("integer entry exceeds 64 bits");
        out.push_back(x.get_si());
    }
    return out;
}

RationalVector to_rational_vector(const Eigen::VectorXd& v) {
    RationalVector out;
    for (Eigen::Index i = 0; i < v.size(); ++i) out.emplace_back(v[i]);
    return out;
}

double to_double(const mpq_class& q) { return q.get_num().get_d() / q.get_den().get_d(); }

Eigen::VectorXd to_eigen(const RationalVector& v) {
    Eigen::VectorXd out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
    return out;
}

Eigen::VectorXd to_eigen(const IntVector& v) {
    Eigen::VectorXd out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i].get_d();
    return out;
}

Eigen::VectorXd to_eigen(const IVec& v) {
    Eigen::VectorXd out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
    return out;
}

std::string to_string(const mpq_class& q) {
    mpq_class c = q;
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

mpq_class parse_rational(const std::string& s) {
    if (s.find_first_of(".eE") != std::string::npos) return mpq_class(std::stod(s));
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw DegenerateInput("cannot parse rational '" + s + "'");
    if (q.get_den() == 0) throw DegenerateInput("zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
}

namespace {

void axpy(IntVector& y, const mpz_class& a, const IntVector& x) {
    for (size_t i = 0; i < y.size(); ++i) y[i] -= a * x[i];
}

mpz_class floor_div(const mpz_class& a, const mpz_class& b) {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

}  // namespace

std::vector<IntVector> hermite_rows(std::vector<IntVector> rows, std::vector<int>* pivots) {
    if (pivots) pivots->clear();
    if (rows.empty()) return rows;
    const int m = static_cast<int>(rows.size());
    const int d = static_cast<int>(rows[0].size());
    int r = 0;
    for (int col = 0; col < d && r < m; ++col) {
        while (true) {
            int best = -1;
            for (int i = r; i < m; ++i) {
                if (rows[i][col] == 0) continue;
                if (best < 0 || abs(rows[i][col]) < abs(rows[best][col])) best = i;
            }
            if (best < 0) break;
            std::swap(rows[r], rows[best]);
            bool done = true;
            for (int i = r + 1; i < m; ++i) {
                if (rows[i][col] == 0) continue;
                axpy(rows[i], floor_div(rows[i][col], rows[r][col]), rows[r]);
                if (rows[i][col] != 0) done = false;
            }
            if (done) break;
        }
        if (rows[r][col] == 0) continue;
        if (rows[r][col] < 0)
            for (auto& x : rows[r]) x = -x;
        for (int i = 0; i < r; ++i) axpy(rows[i], floor_div(rows[i][col], rows[r][col]), rows[r]);
        if (pivots) pivots->push_back(col);
        ++r;
    }
    rows.resize(r);
    return rows;
}

std::vector<IntVector> integer_kernel(const std::vector<IntVector>& rows, int dim) {
    const int m = static_cast<int>(rows.size());
    std::vector<IntVector> aug(dim, IntVector(m + dim, 0));
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < m; ++j) aug[i][j] = rows[j][i];
        aug[i][m + i] = 1;
    }
    std::vector<int> piv;
    auto h = hermite_rows(aug, &piv);
    std::vector<IntVector> kernel;
    for (size_t i = 0; i < h.size(); ++i) {
        if (piv[i] < m) continue;
        kernel.emplace_back(h[i].begin() + m, h[i].end());
    }
    return kernel;
}

SubmoduleBasis SubmoduleBasis::zero(int dim) {
    SubmoduleBasis s;
    s.dim_ = dim;
    s.finalize();
    return s;
}

SubmoduleBasis SubmoduleBasis::full(int dim) {
    std::vector<IntVector> cols(dim, IntVector(dim, 0));
    for (int i = 0; i < dim; ++i) cols[i][i] = 1;
    return from_primitive(dim, cols);
}

SubmoduleBasis SubmoduleBasis::from_primitive(int dim, const std::vector<IntVector>& columns) {
    if (dim < 1 || dim > kMaxDim) throw DegenerateInput("dimension must be in 1..4");
    for (const auto& c : columns)
        if (static_cast<int>(c.size()) != dim) throw DegenerateInput("column length mismatch");
    SubmoduleBasis s;
    s.dim_ = dim;
    s.hnf_ = hermite_rows(columns, &s.pivots_);
    if (s.hnf_.size() != columns.size()) throw DegenerateInput("columns are linearly dependent");
    s.finalize();
    return s;
}

void SubmoduleBasis::finalize() {
    if (hnf_.empty()) pivots_.clear();
    const int r = rank();
    basis_ = Eigen::MatrixXd::Zero(dim_, r);
    for (int j = 0; j < r; ++j)
        for (int i = 0; i < dim_; ++i) basis_(i, j) = hnf_[j][i].get_d();
    dual_ = Eigen::MatrixXd::Zero(dim_, r);
    if (r == 0) return;
    bool unit = true;
    for (int j = 0; j < r; ++j) unit = unit && hnf_[j][pivots_[j]] == 1;
    if (unit) {
        for (int j = 0; j < r; ++j) dual_(pivots_[j], j) = 1.0;
        return;
    }
    // Row-reduce [B | I]; the first r rows give T with T B = U unit upper
    // triangular, so W^T = U^{-1} T.
    std::vector<IntVector> aug(dim_, IntVector(r + dim_, 0));
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < r; ++j) aug[i][j] = hnf_[j][i];
        aug[i][r + i] = 1;
    }
    auto h = hermite_rows(aug);
    std::vector<std::vector<mpz_class>> u(r, std::vector<mpz_class>(r));
    std::vector<IntVector> t(r);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) u[i][j] = h[i][j];
        if (u[i][i] != 1) throw DegenerateInput("submodule is not primitive");
        t[i] = IntVector(h[i].begin() + r, h[i].end());
    }
    std::vector<IntVector> w(r);
    for (int i = r - 1; i >= 0; --i) {
        w[i] = t[i];
        for (int j = i + 1; j < r; ++j) axpy(w[i], u[i][j], w[j]);
    }
    for (int j = 0; j < r; ++j)
        for (int i = 0; i < dim_; ++i) dual_(i, j) = w[j][i].get_d();
}

std::optional<IntVector> SubmoduleBasis::coordinates(const IntVector& k) const {
    if (static_cast<int>(k.size()) != dim_) throw DegenerateInput("vector length mismatch");
    IntVector rest = k;
    IntVector c(rank());
    for (int i = 0; i < rank(); ++i) {
        const mpz_class& piv = hnf_[i][pivots_[i]];
        if (!mpz_divisible_p(rest[pivots_[i]].get_mpz_t(), piv.get_mpz_t())) return std::nullopt;
        c[i] = rest[pivots_[i]] / piv;
        axpy(rest, c[i], hnf_[i]);
    }
    for (const auto& x : rest)
        if (x != 0) return std::nullopt;
    return c;
}

IntVector SubmoduleBasis::reduce(const IntVector& k) const {
    IntVector rest = k;
    for (int i = 0; i < rank(); ++i)
        axpy(rest, floor_div(rest[pivots_[i]], hnf_[i][pivots_[i]]), hnf_[i]);
    return rest;
}

IVec SubmoduleBasis::reduce(const IVec& k) const {
    bool unit = true;
    for (int i = 0; i < rank(); ++i) unit = unit && hnf_[i][pivots_[i]] == 1;
    if (!unit) return to_ivec(reduce(to_int_vector(k)));
    IVec rest = k;
    for (int i = 0; i < rank(); ++i) {
        const long long c = rest[pivots_[i]];
        if (c == 0) continue;
        for (int j = 0; j < dim_; ++j) rest[j] -= c * hnf_[i][j].get_si();
    }
    return rest;
}

Eigen::MatrixXd SubmoduleBasis::basis_matrix() const { return basis_; }

SubmoduleBasis saturate(const std::vector<IntVector>& columns, int dim) {
    if (dim < 1 || dim > kMaxDim) throw DegenerateInput("dimension must be in 1..4");
    if (columns.empty()) return SubmoduleBasis::zero(dim);
    if (hermite_rows(columns).size() != columns.size())
        throw DegenerateInput("columns are linearly dependent over Q");
    auto orth = integer_kernel(columns, dim);
    if (orth.empty()) return SubmoduleBasis::full(dim);
    return SubmoduleBasis::from_primitive(dim, integer_kernel(orth, dim));
}

SubmoduleBasis annihilator_lattice(const RationalVector& v) {
    const int d = static_cast<int>(v.size());
    mpz_class l = 1;
    for (const auto& q : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
    IntVector w(d);
    bool zero = true;
    for (int i = 0; i < d; ++i) {
        mpq_class s = v[i] * l;
        w[i] = s.get_num();
        zero = zero && w[i] == 0;
    }
    if (zero) return SubmoduleBasis::full(d);
    auto ker = integer_kernel({w}, d);
    if (ker.empty()) return SubmoduleBasis::zero(d);
    return SubmoduleBasis::from_primitive(d, ker);
}

Resonance resonance_classify(const RationalVector& gradient) {
    Resonance r;
    r.lattice = annihilator_lattice(gradient);
    r.order = static_cast<int>(gradient.size()) - r.lattice.rank();
    return r;
}

Resonance resonance_classify(const Eigen::VectorXd& v, const DetectMode& mode) {
    const int d = static_cast<int>(v.size());
    if (d < 1 || d > kMaxDim) throw DegenerateInput("dimension must be in 1..4");
    int a = 0;
    for (int i = 1; i < d; ++i)
        if (std::abs(v[i]) > std::abs(v[a])) a = i;
    Resonance r;
    if (std::abs(v[a]) < mode.tol) {
        r.lattice = SubmoduleBasis::full(d);
        r.order = 0;
        return r;
    }
    std::vector<IntVector> relations;
    const long long q = mode.qmax;
    IVec k(d, 0);
    std::vector<int> free;
    for (int i = 0; i < d; ++i)
        if (i != a) free.push_back(i);
    for (int i : free) k[i] = -q;
    while (true) {
        double s = 0.0;
        for (int i : free) s += static_cast<double>(k[i]) * v[i];
        const double n = std::round(-s / v[a]);
        if (std::abs(n) <= static_cast<double>(q)) {
            k[a] = static_cast<long long>(n);
            bool nonzero = false;
            for (long long x : k) nonzero = nonzero || x != 0;
            const double res = std::abs(s + n * v[a]);
            if (nonzero) {
                if (res < mode.tol)
                    relations.push_back(to_int_vector(k));
                else if (res < 10.0 * mode.tol)
                    throw AmbiguousResonance("near-relation with residual " + std::to_string(res));
            }
        }
        size_t p = 0;
        while (p < free.size() && k[free[p]] == q) k[free[p++]] = -q;
        if (p == free.size()) break;
        ++k[free[p]];
    }
    if (relations.empty()) {
        r.lattice = SubmoduleBasis::zero(d);
    } else {
        r.lattice = saturate(hermite_rows(relations), d);
    }
    r.order = d - r.lattice.rank();
    return r;
}

ComplementData complement_data(const SubmoduleBasis& lambda) {
    const int d = lambda.dim();
    ComplementData out;
    std::vector<IntVector> orth =
        lambda.rank() == 0 ? SubmoduleBasis::full(d).hnf() : integer_kernel(lambda.hnf(), d);
    for (const auto& v : orth) {
        RationalVector q;
        for (const auto& x : v) q.emplace_back(x);
        out.orth_basis.push_back(q);
    }
    out.aux_lattice = 2.0 * std::numbers::pi * lambda.dual_matrix();
    out.domain = {lambda, 1.0};
    out.aux_domain = {lambda, 2.0 * std::numbers::pi};
    return out;
}

Eigen::VectorXd fractional_coordinates(const Eigen::VectorXd& eta, const SubmoduleBasis& lambda) {
    const Eigen::MatrixXd b = lambda.basis_matrix();
    if (lambda.rank() == 0) {
        if (eta.norm() > 1e-12) throw NotInSpan("nonzero vector and trivial lattice");
        return Eigen::VectorXd();
    }
    Eigen::VectorXd c = (b.transpose() * b).ldlt().solve(b.transpose() * eta);
    const double res = (b * c - eta).norm();
    if (res > 1e-12 * std::max(1.0, eta.norm()))
        throw NotInSpan("residual " + std::to_string(res));
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        c[i] -= std::floor(c[i]);
        if (c[i] >= 1.0) c[i] = 0.0;
    }
    return c;
}

Eigen::VectorXd fractional_reduce(const Eigen::VectorXd& eta, const SubmoduleBasis& lambda) {
    if (lambda.rank() == 0) {
        fractional_coordinates(eta, lambda);
        return Eigen::VectorXd::Zero(eta.size());
    }
    return lambda.basis_matrix() * fractional_coordinates(eta, lambda);
}

}  // namespace semiclass
