#include "nnkr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nnkr/errors.hpp"

namespace nnkr {

namespace {

using Eigen::Index;

// Columns whose distance to the span of the passive set falls below this
// fraction of their norm are treated as linearly dependent.
constexpr double kDependenceTol = 1e-10;

struct Problem {
    RealMatrix design;     // n^2 x N
    RealVector target;     // hermitian_coordinates(herm(Y))
    RealVector col_norms;  // ||A_i||_F
    double scale = 1.0;    // 1 / ||Y||_F
};

Problem make_problem(const MeasurementEnsemble& e, const ComplexMatrix& y, double objective_scale) {
    Problem pb;
    pb.design = hermitian_design(e);
    pb.target = hermitian_coordinates(hermitian_part(y));
    pb.col_norms = pb.design.colwise().norm().transpose();
    if (objective_scale > 0.0) {
        pb.scale = objective_scale;
    } else {
        const double ynorm = y.norm();
        pb.scale = ynorm > 0.0 ? 1.0 / ynorm : 1.0;
    }
    return pb;
}

double objective(const Problem& pb, const RealVector& x) {
    return (pb.design * x - pb.target).squaredNorm();
}

// 2 G^T (G x - y)
RealVector gradient(const Problem& pb, const RealVector& x) {
    return 2.0 * (pb.design.transpose() * (pb.design * x - pb.target));
}

double kkt_from_gradient(const Problem& pb, const RealVector& g, const RealVector& x) {
    double dual = 0.0;
    double comp = 0.0;
    for (Index i = 0; i < g.size(); ++i) {
        const double norm = pb.col_norms[i] > 0.0 ? pb.col_norms[i] : 1.0;
        dual = std::max(dual, std::max(0.0, -g[i]) * pb.scale / norm);
        comp = std::max(comp, std::abs(g[i] * x[i]) * pb.scale * pb.scale);
    }
    return std::max(dual, comp);
}

// Upper-triangular R with R^T R = G_P^T G_P for the ordered passive set P.
// Columns are appended with a projection step and removed with Givens
// rotations, both in O(k^2) beyond the O(n^2 k) column work.
class PassiveFactor {
public:
    PassiveFactor(const RealMatrix& design, Index capacity)
        : design_(design), r_(RealMatrix::Zero(capacity, capacity)) {}

    Index size() const { return static_cast<Index>(indices_.size()); }
    const std::vector<Index>& indices() const { return indices_; }

    RealMatrix gather() const {
        RealMatrix gp(design_.rows(), size());
        for (Index j = 0; j < size(); ++j) gp.col(j) = design_.col(indices_[static_cast<std::size_t>(j)]);
        return gp;
    }

    // Returns false (and leaves the factor untouched) for a dependent column.
    bool add(Index column) {
        const auto g = design_.col(column);
        const double gnorm = g.norm();
        if (gnorm == 0.0) return false;
        const Index k = size();
        if (k >= r_.rows()) return false;
        if (k == 0) {
            r_(0, 0) = gnorm;
            indices_.push_back(column);
            return true;
        }
        const RealMatrix gp = gather();
        const auto upper = r_.topLeftCorner(k, k).triangularView<Eigen::Upper>();
        RealVector coeff = upper.solve(upper.transpose().solve(gp.transpose() * g));
        RealVector resid = g - gp * coeff;
        // One reorthogonalization pass.
        coeff += upper.solve(upper.transpose().solve(gp.transpose() * resid));
        resid = g - gp * coeff;
        const double rho = resid.norm();
        if (!(rho > kDependenceTol * gnorm)) return false;
        r_.block(0, k, k, 1) = r_.topLeftCorner(k, k).triangularView<Eigen::Upper>() * coeff;
        r_.block(k, 0, 1, k).setZero();
        r_(k, k) = rho;
        indices_.push_back(column);
        return true;
    }

    void remove_at(Index pos) {
        const Index k = size();
        for (Index j = pos; j + 1 < k; ++j) r_.col(j).head(k) = r_.col(j + 1).head(k);
        // R is now upper Hessenberg from column pos on; restore triangularity.
        for (Index i = pos; i + 1 < k; ++i) {
            const double a = r_(i, i);
            const double b = r_(i + 1, i);
            const double h = std::hypot(a, b);
            if (h == 0.0) continue;
            const double c = a / h;
            const double s = b / h;
            for (Index j = i; j + 1 < k; ++j) {
                const double t1 = r_(i, j);
                const double t2 = r_(i + 1, j);
                r_(i, j) = c * t1 + s * t2;
                r_(i + 1, j) = -s * t1 + c * t2;
            }
            r_(i + 1, i) = 0.0;
        }
        r_.row(k - 1).head(k).setZero();
        r_.col(k - 1).head(k).setZero();
        indices_.erase(indices_.begin() + pos);
    }

    // Least squares on the passive columns via the seminormal equations,
    // corrected by two rounds of iterative refinement.
    RealVector solve(const RealVector& target) const {
        const Index k = size();
        const RealMatrix gp = gather();
        const auto upper = r_.topLeftCorner(k, k).triangularView<Eigen::Upper>();
        RealVector z = upper.solve(upper.transpose().solve(gp.transpose() * target));
        for (int round = 0; round < 2; ++round) {
            const RealVector resid = target - gp * z;
            z += upper.solve(upper.transpose().solve(gp.transpose() * resid));
        }
        return z;
    }

private:
    const RealMatrix& design_;
    RealMatrix r_;
    std::vector<Index> indices_;
};

struct RawResult {
    RealVector x;
    std::size_t iterations = 0;
    bool finished = false;
    std::vector<double> trace;
};

RawResult lawson_hanson(const Problem& pb, const SolverConfig& cfg) {
    const Index count = pb.design.cols();
    const Index capacity = std::min(count, pb.design.rows());
    PassiveFactor factor(pb.design, capacity);
    std::vector<char> passive(static_cast<std::size_t>(count), 0);
    std::vector<char> excluded(static_cast<std::size_t>(count), 0);
    RealVector x = RealVector::Zero(count);
    RawResult out;
    // Entering threshold on the normalized dual residual. It sits far below
    // the KKT tolerance: with consistent data the residual must reach
    // rounding level, and a loose threshold leaves ||A(z) - Y|| visibly
    // above zero.
    const double stop = std::min(0.25 * cfg.kkt_tolerance, 1e-14);
    const double ynorm = pb.target.norm();

    // w = -g / 2
    RealVector w = pb.design.transpose() * pb.target;
    double rnorm = ynorm;
    while (true) {
        Index best = -1;
        double best_val = stop;
        for (Index j = 0; j < count; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            if (passive[ju] || excluded[ju] || pb.col_norms[j] == 0.0) continue;
            const double val = 2.0 * w[j] * pb.scale / pb.col_norms[j];
            if (val > best_val) {
                best_val = val;
                best = j;
            }
        }
        if (best < 0 || rnorm <= 1e-15 * ynorm) {
            out.finished = true;
            break;
        }
        if (++out.iterations > cfg.max_iterations) break;
        if (!factor.add(best)) {
            excluded[static_cast<std::size_t>(best)] = 1;
            continue;
        }
        passive[static_cast<std::size_t>(best)] = 1;

        bool first = true;
        bool changed = false;
        bool budget_exhausted = false;
        while (true) {
            const RealVector z = factor.solve(pb.target);
            const auto& idx = factor.indices();
            const Index k = factor.size();
            if ((z.array() > 0.0).all()) {
                for (Index j = 0; j < k; ++j) x[idx[static_cast<std::size_t>(j)]] = z[j];
                changed = true;
                break;
            }
            if (first && z[k - 1] <= 0.0) {
                // Rounding made the entering coefficient nonpositive; drop it.
                factor.remove_at(k - 1);
                passive[static_cast<std::size_t>(best)] = 0;
                excluded[static_cast<std::size_t>(best)] = 1;
                break;
            }
            first = false;
            double alpha = 1.0;
            Index blocking = -1;
            for (Index j = 0; j < k; ++j) {
                if (z[j] > 0.0) continue;
                const double xj = x[idx[static_cast<std::size_t>(j)]];
                const double step = xj / (xj - z[j]);
                if (step < alpha) {
                    alpha = step;
                    blocking = j;
                }
            }
            for (Index j = 0; j < k; ++j) {
                double& xj = x[idx[static_cast<std::size_t>(j)]];
                xj += alpha * (z[j] - xj);
            }
            if (blocking >= 0) x[idx[static_cast<std::size_t>(blocking)]] = 0.0;
            changed = true;
            for (Index j = factor.size() - 1; j >= 0; --j) {
                const Index col = factor.indices()[static_cast<std::size_t>(j)];
                if (x[col] <= 0.0) {
                    x[col] = 0.0;
                    passive[static_cast<std::size_t>(col)] = 0;
                    factor.remove_at(j);
                }
            }
            if (++out.iterations > cfg.max_iterations) {
                budget_exhausted = true;
                break;
            }
            if (factor.size() == 0) break;
        }
        if (budget_exhausted) break;
        if (changed) {
            std::fill(excluded.begin(), excluded.end(), 0);
            const RealVector r = pb.target - pb.design * x;
            rnorm = r.norm();
            w = pb.design.transpose() * r;
        }
    }
    out.x = x;
    return out;
}

double max_eigenvalue_normal(const RealMatrix& design) {
    RealVector v = RealVector::Ones(design.cols());
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 100; ++it) {
        RealVector next = design.transpose() * (design * v);
        const double norm = next.norm();
        if (norm == 0.0) return 0.0;
        lambda = norm;
        v = next / norm;
    }
    return lambda;
}

// Monotone FISTA with adaptive restart.
RawResult projected_gradient(const Problem& pb, const SolverConfig& cfg, const RealVector& start) {
    RawResult out;
    const double lipschitz = 2.0 * 1.05 * max_eigenvalue_normal(pb.design);
    RealVector x = start;
    if (lipschitz == 0.0) {
        out.x = RealVector::Zero(x.size());
        out.finished = true;
        return out;
    }
    const double step = 1.0 / lipschitz;
    RealVector x_prev = x;
    RealVector extrap = x;
    double fx = objective(pb, x);
    if (cfg.record_objective_trace) out.trace.push_back(fx);
    double t = 1.0;
    std::vector<Eigen::Index> last_support;
    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
        out.iterations = it;
        const RealVector candidate = (extrap - step * gradient(pb, extrap)).cwiseMax(0.0);
        const double fc = objective(pb, candidate);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        x_prev = x;
        if (fc <= fx) {
            x = candidate;
            fx = fc;
            extrap = x + ((t - 1.0) / t_next) * (x - x_prev);
            t = t_next;
        } else {
            // Objective would increase: keep x, restart momentum from x.
            t = 1.0;
            extrap = x;
        }
        if (cfg.record_objective_trace) out.trace.push_back(fx);
        if (it % 10 != 0) continue;
        if (kkt_from_gradient(pb, gradient(pb, x), x) <= 0.5 * cfg.kkt_tolerance) {
            out.finished = true;
            break;
        }
        // Once the positive set is stable, try the least-squares solution on it.
        std::vector<Eigen::Index> support;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x(i) > 0.0) support.push_back(i);
        if (support.empty() || support != last_support) {
            last_support = std::move(support);
            continue;
        }
        RealMatrix sub(pb.design.rows(), static_cast<Eigen::Index>(support.size()));
        for (std::size_t j = 0; j < support.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = pb.design.col(support[j]);
        const RealVector coef = sub.colPivHouseholderQr().solve(pb.target);
        if (!coef.allFinite() || coef.minCoeff() <= 0.0) continue;
        RealVector polished = RealVector::Zero(x.size());
        for (std::size_t j = 0; j < support.size(); ++j) polished(support[j]) = coef(static_cast<Eigen::Index>(j));
        const double fp = objective(pb, polished);
        if (fp > fx) continue;
        x = polished;
        fx = fp;
        extrap = x;
        t = 1.0;
        if (cfg.record_objective_trace) out.trace.push_back(fx);
        if (kkt_from_gradient(pb, gradient(pb, x), x) <= 0.5 * cfg.kkt_tolerance) {
            out.finished = true;
            break;
        }
    }
    out.x = x;
    return out;
}

void check_finite(const ComplexMatrix& y) {
    if (!y.allFinite()) throw InputError("solve_nnls: Y contains NaN or infinite entries");
}

}  // namespace

std::string_view to_string(SolverAlgorithm algorithm) {
    return algorithm == SolverAlgorithm::active_set ? "active-set" : "projected-gradient";
}

SolverAlgorithm parse_algorithm(std::string_view tag) {
    if (tag == "active-set") return SolverAlgorithm::active_set;
    if (tag == "projected-gradient") return SolverAlgorithm::projected_gradient;
    throw ParameterError("unknown solver algorithm '" + std::string(tag) +
                         "' (expected active-set or projected-gradient)");
}

void SolverConfig::validate() const {
    if (!(kkt_tolerance > 0.0)) throw ParameterError("solver: kkt_tolerance must be positive");
    if (max_iterations < 1) throw ParameterError("solver: max_iterations must be at least 1");
    if (objective_scale < 0.0 || std::isnan(objective_scale)) {
        throw ParameterError("solver: objective_scale must be positive (or 0 for auto)");
    }
}

RealVector hermitian_coordinates(const ComplexMatrix& h) {
    if (h.rows() != h.cols()) throw DimensionError("hermitian_coordinates: matrix must be square");
    const Index n = h.rows();
    RealVector out(n * n);
    Index idx = 0;
    for (Index k = 0; k < n; ++k) out[idx++] = h(k, k).real();
    for (Index k = 0; k < n; ++k) {
        for (Index l = k + 1; l < n; ++l) {
            out[idx++] = M_SQRT2 * h(k, l).real();
            out[idx++] = M_SQRT2 * h(k, l).imag();
        }
    }
    return out;
}

RealMatrix hermitian_design(const MeasurementEnsemble& e) {
    const auto n = static_cast<Index>(e.n());
    const auto count = static_cast<Index>(e.size());
    RealMatrix design(n * n, count);
    for (Index i = 0; i < count; ++i) {
        const auto a = e.vectors().col(i);
        Index idx = 0;
        for (Index k = 0; k < n; ++k) design(idx++, i) = std::norm(a[k]);
        for (Index k = 0; k < n; ++k) {
            for (Index l = k + 1; l < n; ++l) {
                const Complex entry = a[k] * std::conj(a[l]);
                design(idx++, i) = M_SQRT2 * entry.real();
                design(idx++, i) = M_SQRT2 * entry.imag();
            }
        }
    }
    return design;
}

RealVector nnls_gradient(const MeasurementEnsemble& e, const ComplexMatrix& y, const RealVector& z) {
    const auto n = static_cast<Index>(e.n());
    if (y.rows() != n || y.cols() != n) throw DimensionError("nnls_gradient: Y has the wrong shape");
    return 2.0 * adjoint(e, forward(e, z) - hermitian_part(y));
}

double kkt_residual(const MeasurementEnsemble& e, const ComplexMatrix& y, const RealVector& z,
                    double objective_scale) {
    if (static_cast<std::size_t>(z.size()) != e.size()) {
        throw DimensionError("kkt_residual: z has the wrong dimension");
    }
    if ((z.array() < 0.0).any()) throw ContractError("kkt_residual: z has negative entries");
    const RealVector g = nnls_gradient(e, y, z);
    double scale = objective_scale;
    if (!(scale > 0.0)) {
        const double ynorm = y.norm();
        scale = ynorm > 0.0 ? 1.0 / ynorm : 1.0;
    }
    const RealVector norms = e.squared_norms();  // ||a_i a_i^*||_F = ||a_i||^2
    double dual = 0.0;
    double comp = 0.0;
    for (Index i = 0; i < g.size(); ++i) {
        const double norm = norms[i] > 0.0 ? norms[i] : 1.0;
        dual = std::max(dual, std::max(0.0, -g[i]) * scale / norm);
        comp = std::max(comp, std::abs(g[i] * z[i]) * scale * scale);
    }
    return std::max(dual, comp);
}

RecoveryReport solve_nnls(const MeasurementEnsemble& e, const ComplexMatrix& y,
                          const SolverConfig& cfg, const std::optional<RealVector>& warm_start) {
    cfg.validate();
    const auto n = static_cast<Index>(e.n());
    if (y.rows() != n || y.cols() != n) {
        throw DimensionError("solve_nnls: Y must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    check_finite(y);
    if (warm_start) {
        if (static_cast<std::size_t>(warm_start->size()) != e.size()) {
            throw DimensionError("solve_nnls: warm start has the wrong dimension");
        }
        if (!warm_start->allFinite()) throw InputError("solve_nnls: warm start contains NaN");
        if ((warm_start->array() < 0.0).any()) {
            throw ContractError("solve_nnls: warm start must be nonnegative");
        }
    }

    const Problem pb = make_problem(e, y, cfg.objective_scale);
    RawResult raw;
    if (cfg.algorithm == SolverAlgorithm::active_set) {
        raw = lawson_hanson(pb, cfg);
    } else {
        raw = projected_gradient(pb, cfg, warm_start ? *warm_start : RealVector::Zero(pb.design.cols()));
    }
    if (warm_start && objective(pb, *warm_start) < objective(pb, raw.x)) raw.x = *warm_start;

    RecoveryReport report;
    report.x_sharp = raw.x.cwiseMax(0.0);
    report.iterations = raw.iterations;
    report.used_hermitian_part = !is_hermitian(y);
    report.residual_frobenius = (forward(e, report.x_sharp) - y).norm();
    report.kkt_residual = kkt_residual(e, y, report.x_sharp, cfg.objective_scale);
    report.converged = raw.finished && report.kkt_residual <= cfg.kkt_tolerance;
    report.objective_trace = std::move(raw.trace);
    return report;
}

void attach_ground_truth(RecoveryReport& report, const RealVector& truth, const std::vector<double>& ps) {
    if (truth.size() != report.x_sharp.size()) {
        throw DimensionError("attach_ground_truth: dimension mismatch");
    }
    const RealVector diff = report.x_sharp - truth;
    for (const double p : ps) report.error_norms[p] = lp_norm(diff, p);
}

}  // namespace nnkr
