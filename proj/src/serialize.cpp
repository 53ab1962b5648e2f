#include "semiclass/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <numbers>

#include "semiclass/errors.hpp"

namespace semiclass {

namespace {

json hnf_json(const SubmoduleBasis& b) {
    json rows = json::array();
    for (const auto& c : b.hnf()) rows.push_back(to_ivec(c));
    return rows;
}

SubmoduleBasis basis_from_hnf(int dim, const json& rows) {
    std::vector<IntVector> cols;
    for (const auto& r : rows) cols.push_back(to_int_vector(r.get<IVec>()));
    if (cols.empty()) return SubmoduleBasis::zero(dim);
    return SubmoduleBasis::from_primitive(dim, cols);
}

Eigen::VectorXd vec_from(const json& j) {
    auto v = j.get<std::vector<double>>();
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> std_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

json rational_json(const RationalVector& v) {
    json a = json::array();
    for (const auto& q : v) a.push_back(to_string(q));
    return a;
}

RationalVector rational_from_json(const json& j) {
    RationalVector v;
    for (const auto& s : j) v.push_back(parse_rational(s.get<std::string>()));
    return v;
}

json to_json(const SubmoduleBasis& b) { return {{"dim", b.dim()}, {"rank", b.rank()}, {"hnf", hnf_json(b)}}; }

SubmoduleBasis submodule_from_json(const json& j) {
    const int dim = j.at("dim").get<int>();
    SubmoduleBasis b = basis_from_hnf(dim, j.at("hnf"));
    if (b.rank() != j.at("rank").get<int>()) throw ShapeError("rank does not match the basis");
    return b;
}

json to_json(const FourierState& u) {
    const auto& g = u.grid();
    json coeffs = json::array();
    for (long long i = 0; i < g.size(); ++i) {
        const cd c = u.coeffs()[i];
        if (c == cd(0.0)) continue;
        coeffs.push_back({g.mode(i), c.real(), c.imag()});
    }
    return {{"dim", g.dim}, {"N", g.radius}, {"h", g.h}, {"center", g.center}, {"coeffs", coeffs}};
}

FourierState state_from_json(const json& j) {
    FourierGrid g(j.at("dim").get<int>(), j.at("N").get<int>(), j.at("h").get<double>(),
                  j.contains("center") ? j.at("center").get<IVec>() : IVec{});
    FourierState u(g);
    for (const auto& e : j.at("coeffs")) {
        IVec k = e.at(0).get<IVec>();
        if (!g.contains(k)) throw ShapeError("coefficient outside the grid");
        u.set(k, cd(e.at(1).get<double>(), e.at(2).get<double>()));
    }
    return u;
}

json to_json(const KhField& f) {
    json fibers = json::array();
    for (const auto& fib : f.fibers) {
        json modes = json::array();
        for (size_t i = 0; i < fib.modes.size(); ++i)
            modes.push_back({fib.modes[i], fib.amplitudes[i].real(), fib.amplitudes[i].imag()});
        fibers.push_back({{"coset_rep", fib.coset_rep},
                          {"sigma", std_vec(fib.sigma)},
                          {"omega", std_vec(fib.omega)},
                          {"modes", modes}});
    }
    return {{"lambda_hnf", hnf_json(f.lambda)}, {"dim", f.lambda.dim()}, {"h", f.h}, {"fibers", fibers}};
}

json to_json(const BlochDensityOperator& m) {
    json mat = json::array();
    for (Eigen::Index i = 0; i < m.matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < m.matrix.cols(); ++j) mat.push_back({m.matrix(i, j).real(), m.matrix(i, j).imag()});
    return {{"lambda_hnf", hnf_json(m.space.lambda())},
            {"dim", m.space.lambda().dim()},
            {"omega", std_vec(m.space.omega())},
            {"window_radius", m.space.radius()},
            {"matrix", mat}};
}

BlochDensityOperator density_operator_from_json(const json& j) {
    const int dim = j.at("dim").get<int>();
    BlochSpace space(basis_from_hnf(dim, j.at("lambda_hnf")), vec_from(j.at("omega")), j.at("window_radius").get<int>());
    const auto n = space.dim();
    const auto& mat = j.at("matrix");
    if (static_cast<long long>(mat.size()) != n * n) throw ShapeError("density matrix has the wrong number of entries");
    Eigen::MatrixXcd m(n, n);
    for (long long i = 0; i < n; ++i)
        for (long long k = 0; k < n; ++k) {
            const auto& e = mat.at(static_cast<size_t>(i * n + k));
            m(i, k) = cd(e.at(0).get<double>(), e.at(1).get<double>());
        }
    return {space, m};
}

void write_density_csv(const std::string& path, const std::vector<double>& values, int dim, int resolution) {
    long long total = 1;
    for (int a = 0; a < dim; ++a) total *= resolution;
    if (static_cast<long long>(values.size()) != total) throw ShapeError("density grid size mismatch");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    for (int a = 0; a < dim; ++a) out << "x" << a + 1 << ',';
    out << "value\n";
    char buf[64];
    for (long long i = 0; i < total; ++i) {
        long long r = i;
        std::vector<long long> idx(dim);
        for (int a = dim - 1; a >= 0; --a) {
            idx[a] = r % resolution;
            r /= resolution;
        }
        for (int a = 0; a < dim; ++a) {
            std::snprintf(buf, sizeof buf, "%.17g,", 2 * std::numbers::pi * idx[a] / resolution);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g\n", values[i]);
        out << buf;
    }
}

}  // namespace semiclass
