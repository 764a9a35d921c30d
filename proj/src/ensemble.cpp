#include "nnkr/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "nnkr/errors.hpp"

namespace nnkr {

namespace {

constexpr double kUniformHalfWidth = 1.2247448713915890;  // sqrt(3/2): variance 1/2

// E exp(X^2 / t^2) for X ~ U[-b, b], composite Simpson on [0, b].
double uniform_orlicz_moment(double b, double t) {
    constexpr int panels = 2000;
    const double h = b / panels;
    double acc = 0.0;
    for (int i = 0; i <= panels; ++i) {
        const double x = i * h;
        const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * std::exp(x * x / (t * t));
    }
    return acc * h / 3.0 / b;
}

double uniform_psi2(double b) {
    // The moment decreases in t; bracket and bisect for moment == 2.
    double lo = 0.1 * b;
    double hi = 10.0 * b;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (uniform_orlicz_moment(b, mid) > 2.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::string_view to_string(LawKind kind) {
    switch (kind) {
        case LawKind::complex_gaussian: return "complex-gaussian";
        case LawKind::complex_rademacher: return "complex-rademacher";
        case LawKind::uniform_symmetric: return "uniform-symmetric";
        case LawKind::real_gaussian: return "real-gaussian";
    }
    return "unknown";
}

LawKind parse_law(std::string_view tag) {
    for (const auto kind : {LawKind::complex_gaussian, LawKind::complex_rademacher,
                            LawKind::uniform_symmetric, LawKind::real_gaussian}) {
        if (tag == to_string(kind)) return kind;
    }
    throw ParameterError("unknown law '" + std::string(tag) +
                         "' (expected complex-gaussian, complex-rademacher, uniform-symmetric or "
                         "real-gaussian)");
}

double coordinate_psi2_norm(LawKind kind) {
    switch (kind) {
        // N(0, s^2): E exp(X^2/t^2) = (1 - 2 s^2 / t^2)^{-1/2} = 2  =>  t^2 = 8 s^2 / 3
        case LawKind::complex_gaussian: return std::sqrt(8.0 * 0.5 / 3.0);
        case LawKind::real_gaussian: return std::sqrt(8.0 / 3.0);
        // +-1/sqrt(2): exp(1 / (2 t^2)) = 2
        case LawKind::complex_rademacher: return 1.0 / std::sqrt(2.0 * std::log(2.0));
        case LawKind::uniform_symmetric: {
            static const double value = uniform_psi2(kUniformHalfWidth);
            return value;
        }
    }
    return kInfinity;
}

SubgaussianLaw SubgaussianLaw::standard(LawKind kind) {
    return SubgaussianLaw{kind, std::max(1.0, coordinate_psi2_norm(kind))};
}

SubgaussianLaw SubgaussianLaw::with_psi2_bound(double bound) const {
    if (!(bound >= 1.0) || bound < coordinate_psi2_norm(kind)) {
        throw ParameterError("psi2 bound " + std::to_string(bound) +
                             " is below 1 or below the law's own psi_2 norm");
    }
    return SubgaussianLaw{kind, bound};
}

Complex sample_coordinate(const SubgaussianLaw& law, std::mt19937_64& engine) {
    switch (law.kind) {
        case LawKind::complex_gaussian: {
            std::normal_distribution<double> normal(0.0, M_SQRT1_2);
            const double re = normal(engine);
            const double im = normal(engine);
            return {re, im};
        }
        case LawKind::complex_rademacher: {
            const std::uint64_t bits = engine();
            return {(bits & 1U) ? M_SQRT1_2 : -M_SQRT1_2, (bits & 2U) ? M_SQRT1_2 : -M_SQRT1_2};
        }
        case LawKind::uniform_symmetric: {
            std::uniform_real_distribution<double> uniform(-kUniformHalfWidth, kUniformHalfWidth);
            const double re = uniform(engine);
            const double im = uniform(engine);
            return {re, im};
        }
        case LawKind::real_gaussian: {
            std::normal_distribution<double> normal(0.0, 1.0);
            return {normal(engine), 0.0};
        }
    }
    return {};
}

ComplexVector sample_vector(const SubgaussianLaw& law, std::size_t n, std::mt19937_64& engine) {
    ComplexVector a(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < a.size(); ++k) a[k] = sample_coordinate(law, engine);
    return a;
}

MeasurementEnsemble MeasurementEnsemble::sample(std::size_t n, std::size_t count,
                                                const SubgaussianLaw& law, std::uint64_t seed) {
    if (n < 2) throw DimensionError("sample_ensemble: n must be at least 2");
    if (count < 1) throw DimensionError("sample_ensemble: N must be at least 1");
    Eigen::MatrixXcd vectors(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        auto engine = make_engine(seed, {stream::kEnsembleVector, i});
        vectors.col(static_cast<Eigen::Index>(i)) = sample_vector(law, n, engine);
    }
    return MeasurementEnsemble(std::move(vectors), law, seed);
}

MeasurementEnsemble MeasurementEnsemble::from_vectors(Eigen::MatrixXcd columns) {
    if (columns.rows() < 2) throw DimensionError("from_vectors: n must be at least 2");
    if (columns.cols() < 1) throw DimensionError("from_vectors: N must be at least 1");
    if (!columns.allFinite()) throw InputError("from_vectors: non-finite entries");
    return MeasurementEnsemble(std::move(columns), std::nullopt, std::nullopt);
}

ComplexMatrix forward(const MeasurementEnsemble& e, const RealVector& x) {
    if (static_cast<std::size_t>(x.size()) != e.size()) {
        throw DimensionError("forward: x has dimension " + std::to_string(x.size()) +
                             ", ensemble has N=" + std::to_string(e.size()));
    }
    const auto n = static_cast<Eigen::Index>(e.n());
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] != 0.0) active.push_back(i);
    }
    ComplexMatrix y = ComplexMatrix::Zero(n, n);
    if (active.empty()) return y;
    Eigen::MatrixXcd scaled(n, static_cast<Eigen::Index>(active.size()));
    Eigen::MatrixXcd plain(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j) {
        const auto col = e.vectors().col(active[j]);
        plain.col(static_cast<Eigen::Index>(j)) = col;
        scaled.col(static_cast<Eigen::Index>(j)) = col * x[active[j]];
    }
    y.noalias() = scaled * plain.adjoint();
    // Exact Hermitian symmetry regardless of GEMM summation order.
    return (y + y.adjoint()) * 0.5;
}

RealVector adjoint(const MeasurementEnsemble& e, const ComplexMatrix& t) {
    const auto n = static_cast<Eigen::Index>(e.n());
    if (t.rows() != n || t.cols() != n) {
        throw DimensionError("adjoint: T must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (!is_hermitian(t)) {
        throw ContractError("adjoint: T is not Hermitian (defect " +
                            std::to_string(hermitian_defect(t)) + ")");
    }
    const Eigen::MatrixXcd tv = t * e.vectors();
    RealVector w(static_cast<Eigen::Index>(e.size()));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        w[i] = e.vectors().col(i).dot(tv.col(i)).real();  // dot conjugates the first argument
    }
    return w;
}

RealMatrix build_phi(const MeasurementEnsemble& e) {
    const auto m = static_cast<Eigen::Index>(e.m());
    const auto count = static_cast<Eigen::Index>(e.size());
    RealMatrix phi(m, count);
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
    for (Eigen::Index i = 0; i < count; ++i) {
        phi.col(i) = p_vectorize_outer(e.vectors().col(i)) * inv_sqrt_m;
    }
    return phi;
}

void SparseNonnegSignal::validate() const {
    if (support.size() != values.size()) {
        throw ParameterError("signal: support and values differ in length");
    }
    for (std::size_t j = 0; j < support.size(); ++j) {
        if (support[j] >= dim) throw ParameterError("signal: support index out of range");
        if (j > 0 && support[j] <= support[j - 1]) {
            throw ParameterError("signal: support must be strictly increasing");
        }
        if (!(values[j] > 0.0) || !std::isfinite(values[j])) {
            throw ParameterError("signal: values must be finite and strictly positive");
        }
    }
}

RealVector SparseNonnegSignal::dense() const {
    RealVector x = RealVector::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < support.size(); ++j) {
        x[static_cast<Eigen::Index>(support[j])] = values[j];
    }
    return x;
}

SparseNonnegSignal SparseNonnegSignal::sample(std::size_t dim, std::size_t s,
                                              std::mt19937_64& engine) {
    if (s > dim) throw ParameterError("signal: sparsity exceeds dimension");
    // Partial Fisher-Yates: the first s entries form a uniform s-subset.
    std::vector<std::size_t> indices(dim);
    for (std::size_t i = 0; i < dim; ++i) indices[i] = i;
    for (std::size_t j = 0; j < s; ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, dim - 1);
        std::swap(indices[j], indices[pick(engine)]);
    }
    SparseNonnegSignal signal;
    signal.dim = dim;
    signal.support.assign(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(s));
    std::sort(signal.support.begin(), signal.support.end());
    std::normal_distribution<double> normal(0.0, 1.0);
    signal.values.resize(s);
    for (auto& v : signal.values) {
        do {
            v = std::abs(normal(engine));
        } while (v == 0.0);
    }
    return signal;
}

void save_ensemble(const MeasurementEnsemble& e, std::ostream& out) {
    if (!e.regenerable()) {
        throw ContractError("save_ensemble: hand-set ensembles carry no seed and cannot be saved");
    }
    std::ostringstream text;
    text.precision(17);
    text << "nnkr-ensemble 1\n"
         << "seed " << *e.seed() << "\n"
         << "n " << e.n() << "\n"
         << "N " << e.size() << "\n"
         << "law " << to_string(e.law()->kind) << "\n"
         << "psi2 " << e.law()->psi2_bound << "\n";
    out << text.str();
}

MeasurementEnsemble load_ensemble(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "nnkr-ensemble 1") {
        throw InputError("load_ensemble: missing 'nnkr-ensemble 1' header");
    }
    std::map<std::string, std::string> fields;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto space = line.find(' ');
        if (space == std::string::npos) {
            throw InputError("load_ensemble: line " + std::to_string(line_no) +
                             ": expected '<key> <value>'");
        }
        fields[line.substr(0, space)] = line.substr(space + 1);
    }
    for (const char* key : {"seed", "n", "N", "law"}) {
        if (!fields.count(key)) throw InputError(std::string("load_ensemble: missing key '") + key + "'");
    }
    try {
        const std::uint64_t seed = std::stoull(fields["seed"]);
        const std::size_t n = std::stoull(fields["n"]);
        const std::size_t count = std::stoull(fields["N"]);
        SubgaussianLaw law = SubgaussianLaw::standard(parse_law(fields["law"]));
        if (fields.count("psi2")) law = law.with_psi2_bound(std::stod(fields["psi2"]));
        return MeasurementEnsemble::sample(n, count, law, seed);
    } catch (const std::logic_error& ex) {
        throw InputError(std::string("load_ensemble: malformed number: ") + ex.what());
    }
}

}  // namespace nnkr
