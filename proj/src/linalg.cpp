#include "critreg/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace critreg {

namespace {
double plain_dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
} // namespace

double inner(std::span<const double> a, std::span<const double> b, std::span<const double> mass) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += mass[i] * a[i] * b[i];
    return s;
}

double weighted_norm(std::span<const double> a, std::span<const double> mass) { return std::sqrt(inner(a, a, mass)); }

double weighted_sum(std::span<const double> a, std::span<const double> mass) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += mass[i] * a[i];
    return s;
}

void remove_weighted_mean(std::span<double> a, std::span<const double> mass) {
    double total = 0.0;
    for (double m : mass) total += m;
    const double mean = weighted_sum(a, mass) / total;
    for (auto& x : a) x -= mean;
}

void remove_mean(std::span<double> a) {
    if (a.empty()) return;
    const double m = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    for (auto& x : a) x -= m;
}

CgResult conjugate_gradient_solve(const SparseOperator& A, std::span<const double> b, double shift,
                                  const CgOptions& opt) {
    const std::size_t n = A.size();
    if (b.size() != n) throw InvalidInput("right-hand side length does not match operator");
    std::vector<double> rhs(b.begin(), b.end());
    if (opt.deflate_constant) remove_mean(rhs);

    CgResult res;
    res.x.assign(n, 0.0);
    const double bnorm = std::sqrt(plain_dot(rhs, rhs));
    if (bnorm == 0.0) return res;

    std::vector<double> r = rhs, p = rhs, ap(n);
    double rr = plain_dot(r, r);
    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        A.apply(p, ap);
        for (std::size_t i = 0; i < n; ++i) ap[i] += shift * p[i];
        if (opt.deflate_constant) remove_mean(ap);
        const double pap = plain_dot(p, ap);
        if (!(pap > 0.0)) throw SolverError("conjugate gradients: operator is not positive definite on the subspace");
        const double alpha = rr / pap;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if (opt.deflate_constant) {
            remove_mean(res.x);
            remove_mean(r);
        }
        const double rr_new = plain_dot(r, r);
        res.iterations = it;
        res.relative_residual = std::sqrt(rr_new) / bnorm;
        if (res.relative_residual <= opt.tol) {
            // Report the true residual rather than the recursively updated one.
            auto ax = A.apply(res.x);
            for (std::size_t i = 0; i < n; ++i) ax[i] += shift * res.x[i] - rhs[i];
            if (opt.deflate_constant) remove_mean(ax);
            res.relative_residual = std::sqrt(plain_dot(ax, ax)) / bnorm;
            return res;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    std::ostringstream os;
    os << "conjugate gradients did not converge in " << opt.max_iter
       << " iterations (relative residual " << res.relative_residual << ")";
    throw SolverError(os.str());
}

std::vector<double> fix_sign(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.size(); ++i)
        if (std::abs(out[i]) > std::abs(out[best])) best = i;
    if (!out.empty() && out[best] < 0.0)
        for (auto& x : out) x = -x;
    return out;
}

namespace {

// Solves A x = b on the zero-mean subspace of a connected Laplacian.
class PseudoInverse {
public:
    PseudoInverse(const SparseOperator& A, InnerSolver kind) : A_(A), kind_(kind) {
        if (kind_ != InnerSolver::direct) return;
        // Pinning x_0 = 0 leaves an SPD system on the remaining unknowns.
        const std::size_t n = A.size();
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(A.nonzeros());
        const auto rp = A.row_ptr();
        const auto cols = A.cols();
        const auto vals = A.values();
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t k = rp[i]; k < rp[i + 1]; ++k)
                if (cols[k] >= 1)
                    trip.emplace_back(static_cast<int>(i - 1), static_cast<int>(cols[k] - 1), vals[k]);
        Eigen::SparseMatrix<double> m(static_cast<int>(n - 1), static_cast<int>(n - 1));
        m.setFromTriplets(trip.begin(), trip.end());
        ldlt_.compute(m);
        if (ldlt_.info() != Eigen::Success) throw SolverError("sparse factorization of the pinned Laplacian failed");
    }

    std::vector<double> solve(std::span<const double> b) const {
        const std::size_t n = A_.size();
        if (kind_ == InnerSolver::cg) return conjugate_gradient_solve(A_, b, 0.0).x;
        std::vector<double> rhs(b.begin(), b.end());
        remove_mean(rhs);
        Eigen::VectorXd r(static_cast<int>(n - 1));
        for (std::size_t i = 1; i < n; ++i) r[static_cast<int>(i - 1)] = rhs[i];
        const Eigen::VectorXd y = ldlt_.solve(r);
        std::vector<double> x(n, 0.0);
        for (std::size_t i = 1; i < n; ++i) x[i] = y[static_cast<int>(i - 1)];
        remove_mean(x);
        return x;
    }

private:
    const SparseOperator& A_;
    InnerSolver kind_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

// Modified Gram-Schmidt (twice) in the B inner product on B-mean-zero columns;
// drops near-dependent columns.
void orthonormalize(std::vector<std::vector<double>>& cols, std::span<const double> b) {
    std::vector<std::vector<double>> out;
    for (auto& c : cols) {
        remove_weighted_mean(c, b);
        const double before = weighted_norm(c, b);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : out) {
                const double d = inner(q, c, b);
                for (std::size_t i = 0; i < c.size(); ++i) c[i] -= d * q[i];
            }
        const double nrm = weighted_norm(c, b);
        if (!(nrm > 1e-10 * before) || nrm == 0.0) continue;
        for (auto& x : c) x /= nrm;
        out.push_back(std::move(c));
    }
    cols = std::move(out);
}

} // namespace

SpectralResult deflated_inverse_iteration(const SparseOperator& K, std::span<const double> b,
                                          const OracleOptions& opt) {
    const std::size_t n = K.size();
    if (n < 2) throw InvalidInput("operator too small for a second eigenpair");
    if (b.size() != n) throw InvalidInput("mass diagonal does not match operator");
    for (double v : b)
        if (!(v > 0.0)) throw InvalidInput("mass diagonal must be positive");
    const std::size_t k = std::min(opt.block, n - 1);
    const double knorm = K.norm_inf();

    PseudoInverse pinv(K, opt.solver);

    std::mt19937_64 rng(opt.seed);
    std::vector<std::vector<double>> x(k, std::vector<double>(n));
    for (auto& col : x)
        for (auto& v : col) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    orthonormalize(x, b);

    SpectralResult res;
    std::vector<double> theta;
    std::vector<std::vector<double>> kx;
    std::vector<double> rhs(n);
    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        std::vector<std::vector<double>> y;
        y.reserve(x.size());
        for (const auto& col : x) {
            for (std::size_t i = 0; i < n; ++i) rhs[i] = b[i] * col[i];
            y.push_back(pinv.solve(rhs));
        }
        orthonormalize(y, b);
        if (y.empty()) throw SolverError("inverse iteration collapsed to the constant vector");
        const std::size_t m = y.size();

        std::vector<std::vector<double>> ky;
        for (const auto& col : y) ky.push_back(K.apply(col));
        Eigen::MatrixXd H(m, m);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t c = a; c < m; ++c)
                H(a, c) = H(c, a) = 0.5 * (plain_dot(y[a], ky[c]) + plain_dot(y[c], ky[a]));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        const auto& Q = es.eigenvectors();

        x.assign(m, std::vector<double>(n, 0.0));
        kx.assign(m, std::vector<double>(n, 0.0));
        theta.assign(m, 0.0);
        for (std::size_t c = 0; c < m; ++c) {
            theta[c] = es.eigenvalues()[static_cast<int>(c)];
            for (std::size_t a = 0; a < m; ++a) {
                const double q = Q(static_cast<int>(a), static_cast<int>(c));
                for (std::size_t i = 0; i < n; ++i) {
                    x[c][i] += q * y[a][i];
                    kx[c][i] += q * ky[a][i];
                }
            }
        }
        auto residual = [&](std::size_t c) {
            double s2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = kx[c][i] - theta[c] * b[i] * x[c][i];
                s2 += d * d;
            }
            return std::sqrt(s2);
        };
        res.iterations = it;
        const double r0 = residual(0);
        const double r1 = m > 1 ? residual(1) : 0.0;
        res.residual = r0;
        if (r0 <= opt.residual_tol * knorm && r1 <= std::sqrt(opt.residual_tol) * knorm) break;
        if (it == opt.max_iter) {
            std::ostringstream os;
            os << "inverse iteration did not converge (residual " << r0 / knorm << " relative)";
            throw SolverError(os.str());
        }
    }

    res.mu = theta[0];
    res.mu3 = theta.size() > 1 ? theta[1] : std::numeric_limits<double>::infinity();
    res.degenerate = theta.size() > 1 && (res.mu3 - res.mu) < opt.gap_tol * std::abs(res.mu);
    res.ritz_values = theta;
    res.vector = fix_sign(x[0]);
    for (std::size_t c = 0; c < theta.size(); ++c) {
        if (c > 0 && (theta[c] - theta[0]) >= opt.gap_tol * std::abs(theta[0])) break;
        res.cluster.push_back(fix_sign(x[c]));
    }
    return res;
}

OracleResult second_eigenpair_oracle(const SparseOperator& K, GridPtr grid, const OracleOptions& opt) {
    if (!grid || grid->active_count() != K.size()) throw InvalidInput("operator and grid do not match");
    std::vector<double> b(grid->active_count());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = grid->area_fraction(i);
    auto s = deflated_inverse_iteration(K, b, opt);
    // B-unit to M-unit: M = h^2 B.
    const double scale = 1.0 / grid->spacing();
    auto rescale = [&](std::vector<double>& v) {
        for (auto& e : v) e *= scale;
    };
    OracleResult out;
    out.pair.mu = s.mu;
    out.pair.mu3 = s.mu3;
    out.pair.residual = s.residual;
    out.pair.degenerate = s.degenerate;
    rescale(s.vector);
    out.pair.psi = GridField(grid, std::move(s.vector));
    for (auto& c : s.cluster) {
        rescale(c);
        out.cluster.emplace_back(grid, std::move(c));
    }
    out.iterations = s.iterations;
    return out;
}

GridField align_in_cluster(const std::vector<GridField>& cluster, std::span<const double> target) {
    if (cluster.empty()) throw InvalidInput("empty eigenvector cluster");
    const auto& grid = cluster.front().grid;
    const auto& w = grid->mass();
    std::vector<double> v(grid->active_count(), 0.0);
    for (const auto& b : cluster) {
        const double c = inner(b.values, target, w);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += c * b.values[i];
    }
    const double nrm = weighted_norm(v, w);
    if (!(nrm > 0.0)) return cluster.front();
    for (auto& e : v) e /= nrm;
    return GridField(grid, std::move(v));
}

} // namespace critreg
