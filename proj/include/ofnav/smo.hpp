#pragma once

// Sequential minimal optimisation for box-constrained quadratic programs of the form
//
//   min_a  0.5 a^T Q a + p^T a    s.t.  y^T a = 0,  0 <= a_i <= C_i,  y_i in {-1,+1}
//
// which covers both the C-SVM dual (Q_ij = y_i y_j K_ij, p = -1) and the
// epsilon-SVR dual (2n variables). Pairs are chosen by maximal KKT violation.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <list>
#include <span>
#include <unordered_map>
#include <vector>

#include "ofnav/error.hpp"

namespace ofnav {

/// Dense sample matrix, row-major.
struct SampleMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    static SampleMatrix from_rows(const std::vector<std::vector<double>>& x) {
        SampleMatrix m;
        m.rows = x.size();
        m.cols = x.empty() ? 0 : x.front().size();
        m.data.reserve(m.rows * m.cols);
        for (const auto& r : x) {
            if (r.size() != m.cols) fail(ErrorKind::InvalidArgument, "sample matrix: ragged rows");
            for (double v : r) {
                if (!std::isfinite(v)) fail(ErrorKind::Numeric, "sample matrix: non-finite input");
                m.data.push_back(v);
            }
        }
        return m;
    }

    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

/// exp(-gamma * |a-b|^2)
inline double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    if (a.size() != b.size()) fail(ErrorKind::InvalidArgument, "rbf_kernel: dimension mismatch");
    require(gamma > 0.0, "rbf_kernel: gamma must be > 0");
    return std::exp(-gamma * squared_distance(a, b));
}

/// Kernel rows over a fixed sample set, kept in a least-recently-used cache.
class KernelRowCache {
public:
    KernelRowCache(const SampleMatrix& x, double gamma, std::size_t budget_bytes)
        : x_(x), gamma_(gamma) {
        const std::size_t row_bytes = std::max<std::size_t>(1, x.rows) * sizeof(double);
        capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
    }

    std::span<const double> row(std::size_t i) {
        if (auto it = index_.find(i); it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->values;
        }
        if (lru_.size() >= capacity_) {
            index_.erase(lru_.back().key);
            lru_.pop_back();
        }
        Entry e{i, std::vector<double>(x_.rows)};
        const auto xi = x_.row(i);
        for (std::size_t j = 0; j < x_.rows; ++j) {
            e.values[j] = (j == i) ? 1.0 : std::exp(-gamma_ * squared_distance(xi, x_.row(j)));
        }
        lru_.push_front(std::move(e));
        index_[i] = lru_.begin();
        return lru_.front().values;
    }

private:
    struct Entry {
        std::size_t key;
        std::vector<double> values;
    };

    const SampleMatrix& x_;
    double gamma_;
    std::size_t capacity_ = 2;
    std::list<Entry> lru_;
    std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

/// Q matrix access for the solver. Rows are materialised into two rotating
/// buffers, so a returned span stays valid until the second subsequent call.
class QMatrix {
public:
    virtual ~QMatrix() = default;
    virtual std::size_t size() const = 0;
    virtual std::span<const double> row(std::size_t i) = 0;
    virtual double diag(std::size_t i) const = 0;
};

/// Q_ij = s_i s_j K(r_i, r_j), where variable i refers to sample r_i with sign s_i.
class SignedKernelQ final : public QMatrix {
public:
    SignedKernelQ(KernelRowCache& cache, std::vector<std::size_t> sample_of, std::vector<std::int8_t> sign)
        : cache_(cache), sample_of_(std::move(sample_of)), sign_(std::move(sign)) {
        for (auto& b : buf_) b.resize(sample_of_.size());
    }

    std::size_t size() const override { return sample_of_.size(); }

    std::span<const double> row(std::size_t i) override {
        auto& out = buf_[next_];
        next_ ^= 1u;
        const auto k = cache_.row(sample_of_[i]);
        const double si = sign_[i];
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = si * sign_[j] * k[sample_of_[j]];
        return out;
    }

    double diag(std::size_t) const override { return 1.0; }  // RBF: K(x,x) = 1

private:
    KernelRowCache& cache_;
    std::vector<std::size_t> sample_of_;
    std::vector<std::int8_t> sign_;
    std::vector<double> buf_[2];
    unsigned next_ = 0;
};

struct SmoOptions {
    double tolerance = 1e-3;
    std::size_t max_iter = 1'000'000;  // pair updates
    std::size_t cache_bytes = std::size_t{256} << 20;
    /// Called after every pair update with the current primal-form objective
    /// 0.5 a^T Q a + p^T a (the dual objective of the SVM is its negation).
    std::function<void(std::size_t iter, double objective)> observer;
};

struct SmoResult {
    std::vector<double> alpha;
    double rho = 0.0;  // decision offset: f(x) = sum ... - rho
    double objective = 0.0;
    std::size_t iterations = 0;
};

inline double smo_objective(std::span<const double> alpha, std::span<const double> grad, std::span<const double> p) {
    double f = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) f += alpha[i] * (grad[i] + p[i]);
    return 0.5 * f;
}

inline SmoResult smo_solve(QMatrix& q, std::span<const std::int8_t> y, std::span<const double> p,
                           std::span<const double> upper, const SmoOptions& opt) {
    const std::size_t n = q.size();
    require(y.size() == n && p.size() == n && upper.size() == n, "smo_solve: size mismatch");
    constexpr double tau = 1e-12;
    constexpr double inf = std::numeric_limits<double>::infinity();

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(p.begin(), p.end());

    auto is_upper = [&](std::size_t t) { return alpha[t] >= upper[t]; };
    auto is_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    std::size_t iter = 0;
    for (;;) {
        // maximal violating pair
        double gmax = -inf, gmin = inf;
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            const bool up = (y[t] > 0) ? !is_upper(t) : !is_lower(t);
            const bool low = (y[t] > 0) ? !is_lower(t) : !is_upper(t);
            if (up && v > gmax) {
                gmax = v;
                i = t;
            }
            if (low && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i == n || j == n || gmax - gmin < opt.tolerance) break;
        if (iter >= opt.max_iter) {
            fail(ErrorKind::Numeric, "smo: no convergence after " + std::to_string(opt.max_iter) + " pair updates");
        }
        ++iter;

        const auto qi = q.row(i);
        const auto qj = q.row(j);
        const double ci = upper[i];
        const double cj = upper[j];
        const double old_ai = alpha[i];
        const double old_aj = alpha[j];

        if (y[i] != y[j]) {
            double quad = q.diag(i) + q.diag(j) + 2.0 * qi[j];
            if (quad <= 0) quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else {
                if (alpha[i] < 0) {
                    alpha[i] = 0;
                    alpha[j] = -diff;
                }
            }
            if (diff > ci - cj) {
                if (alpha[i] > ci) {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else {
                if (alpha[j] > cj) {
                    alpha[j] = cj;
                    alpha[i] = cj + diff;
                }
            }
        } else {
            double quad = q.diag(i) + q.diag(j) - 2.0 * qi[j];
            if (quad <= 0) quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > ci) {
                if (alpha[i] > ci) {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = sum;
                }
            }
            if (sum > cj) {
                if (alpha[j] > cj) {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else {
                if (alpha[i] < 0) {
                    alpha[i] = 0;
                    alpha[j] = sum;
                }
            }
        }

        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) grad[t] += qi[t] * dai + qj[t] * daj;

        if (opt.observer) opt.observer(iter, smo_objective(alpha, grad, p));
    }

    // offset from free variables, or the midpoint of the feasible interval
    double ub = inf, lb = -inf, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (is_upper(t)) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (is_lower(t)) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    SmoResult r;
    r.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
    r.objective = smo_objective(alpha, grad, p);
    r.iterations = iter;
    r.alpha = std::move(alpha);
    return r;
}

}  // namespace ofnav
