#include "afc/discriminative.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "afc/error.hpp"
#include "afc/parallel.hpp"

namespace afc {

namespace {

void check_penalty(const Penalty& p) {
    if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) throw ConfigError("lambda must be positive");
    if (!(p.cost > 0.0) || !std::isfinite(p.cost)) throw ConfigError("cost C must be positive");
}

// loss(m) for margin m = t * (w.x + b)
double loss_value(Loss loss, double margin) noexcept {
    if (loss == Loss::Logistic) {
        return margin > 0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
    }
    const double slack = 1.0 - margin;
    return slack > 0 ? slack * slack : 0.0;
}

// d loss / d margin
double loss_slope(Loss loss, double margin) noexcept {
    if (loss == Loss::Logistic) {
        if (margin > 0) {
            const double e = std::exp(-margin);
            return -e / (1.0 + e);
        }
        return -1.0 / (1.0 + std::exp(margin));
    }
    const double slack = 1.0 - margin;
    return slack > 0 ? -2.0 * slack : 0.0;
}

// Intercept minimizing the summed loss at w = 0.
double optimal_bias(std::span<const double> targets, Loss loss) {
    double pos = 0, neg = 0;
    for (double t : targets) (t > 0 ? pos : neg) += 1.0;
    if (loss == Loss::Logistic) return std::log(pos / neg);
    return (pos - neg) / (pos + neg);
}

void check_targets(const SparseDesign& x, std::span<const double> targets) {
    if (targets.size() != x.rows()) throw FitError("target count does not match design rows");
    bool pos = false, neg = false;
    for (double t : targets) {
        if (t == 1.0) {
            pos = true;
        } else if (t == -1.0) {
            neg = true;
        } else {
            throw FitError("binary targets must be +1 or -1");
        }
    }
    if (!pos || !neg) throw FitError("binary fit requires both target values (>= 2 classes)");
    for (double v : x.value) {
        if (!std::isfinite(v)) throw FitError("design matrix holds a non-finite value");
    }
}

// Evaluates the smooth part f and, optionally, its gradient at (w, b).
class SmoothObjective {
  public:
    SmoothObjective(const SparseDesign& x, std::span<const double> targets, Loss loss,
                    const Penalty& penalty)
        : x_(x), targets_(targets), loss_(loss), penalty_(penalty) {}

    double value(std::span<const double> w, double b) const {
        double total = 0.0;
        for (std::size_t i = 0; i < x_.rows(); ++i) {
            total += loss_value(loss_, targets_[i] * (x_.row_dot(i, w) + b));
        }
        total *= penalty_.cost;
        if (penalty_.kind == Penalty::Kind::L2) total += penalty_.lambda * squared_norm(w);
        return total;
    }

    // Writes the gradient into grad (size n+1) and returns f.
    double value_and_gradient(std::span<const double> w, double b, std::span<double> grad) {
        const std::size_t n = w.size();
        std::fill(grad.begin(), grad.end(), 0.0);
        double total = 0.0;
        double bias_grad = 0.0;
        for (std::size_t i = 0; i < x_.rows(); ++i) {
            const double margin = targets_[i] * (x_.row_dot(i, w) + b);
            total += loss_value(loss_, margin);
            const double s = penalty_.cost * targets_[i] * loss_slope(loss_, margin);
            bias_grad += s;
            if (s == 0.0) continue;
            for (std::size_t p = x_.row_start[i]; p < x_.row_start[i + 1]; ++p) {
                grad[x_.col[p]] += s * x_.value[p];
            }
        }
        total *= penalty_.cost;
        if (penalty_.kind == Penalty::Kind::L2) {
            total += penalty_.lambda * squared_norm(w);
            for (std::size_t j = 0; j < n; ++j) grad[j] += 2.0 * penalty_.lambda * w[j];
        }
        grad[n] = bias_grad;
        return total;
    }

    double nonsmooth(std::span<const double> w) const {
        if (penalty_.kind != Penalty::Kind::L1) return 0.0;
        double s = 0.0;
        for (double v : w) s += std::abs(v);
        return penalty_.lambda * s;
    }

  private:
    static double squared_norm(std::span<const double> w) {
        return std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
    }

    const SparseDesign& x_;
    std::span<const double> targets_;
    Loss loss_;
    Penalty penalty_;
};

}  // namespace

Penalty Penalty::l1(double lambda, double cost) { return {Kind::L1, lambda, cost}; }
Penalty Penalty::l2(double lambda, double cost) { return {Kind::L2, lambda, cost}; }

void SparseDesign::add_row(std::span<const std::pair<std::uint32_t, double>> entries) {
    for (const auto& [c, v] : entries) {
        col.push_back(c);
        value.push_back(v);
        cols = std::max<std::size_t>(cols, std::size_t{c} + 1);
    }
    row_start.push_back(col.size());
}

double SparseDesign::row_dot(std::size_t row, std::span<const double> weights) const noexcept {
    double s = 0.0;
    for (std::size_t p = row_start[row]; p < row_start[row + 1]; ++p) s += value[p] * weights[col[p]];
    return s;
}

SparseDesign SparseDesign::from_dense(const std::vector<std::vector<double>>& rows) {
    SparseDesign x;
    for (const auto& row : rows) {
        std::vector<std::pair<std::uint32_t, double>> entries;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] != 0.0) entries.emplace_back(static_cast<std::uint32_t>(j), row[j]);
        }
        x.add_row(entries);
        x.cols = std::max(x.cols, row.size());
    }
    return x;
}

FeatureIndex FeatureIndex::from_profiles(const std::vector<KmerProfile>& rows) {
    FeatureIndex index;
    for (const auto& row : rows) {
        for (const auto& entry : row.counts) index.codes.push_back(entry.first);
    }
    std::sort(index.codes.begin(), index.codes.end());
    index.codes.erase(std::unique(index.codes.begin(), index.codes.end()), index.codes.end());
    return index;
}

std::optional<std::uint32_t> FeatureIndex::column(KmerCode code) const noexcept {
    const auto it = std::lower_bound(codes.begin(), codes.end(), code);
    if (it == codes.end() || *it != code) return std::nullopt;
    return static_cast<std::uint32_t>(it - codes.begin());
}

std::vector<std::pair<std::uint32_t, double>> FeatureIndex::map(const KmerProfile& profile) const {
    std::vector<std::pair<std::uint32_t, double>> out;
    out.reserve(profile.counts.size());
    auto cursor = codes.begin();
    for (const auto& [code, count] : profile.counts) {
        cursor = std::lower_bound(cursor, codes.end(), code);
        if (cursor == codes.end()) break;
        if (*cursor == code) {
            out.emplace_back(static_cast<std::uint32_t>(cursor - codes.begin()),
                             static_cast<double>(count));
        }
    }
    return out;
}

SparseDesign FeatureIndex::design(const std::vector<KmerProfile>& rows) const {
    SparseDesign x;
    for (const auto& row : rows) x.add_row(map(row));
    x.cols = codes.size();
    return x;
}

double BinaryLinearModel::decision(
    std::span<const std::pair<std::uint32_t, double>> features) const noexcept {
    double s = intercept;
    for (const auto& [c, v] : features) s += weights[c] * v;
    return s;
}

std::size_t BinaryLinearModel::nonzeros() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(weights.begin(), weights.end(), [](double w) { return w != 0.0; }));
}

double objective(const SparseDesign& x, std::span<const double> targets,
                 std::span<const double> weights, double intercept, Loss loss,
                 const Penalty& penalty) {
    SmoothObjective f(x, targets, loss, penalty);
    return f.value(weights, intercept) + f.nonsmooth(weights);
}

std::vector<double> smooth_gradient(const SparseDesign& x, std::span<const double> targets,
                                    std::span<const double> weights, double intercept, Loss loss,
                                    const Penalty& penalty) {
    SmoothObjective f(x, targets, loss, penalty);
    std::vector<double> grad(weights.size() + 1);
    f.value_and_gradient(weights, intercept, grad);
    return grad;
}

double l1_lambda_max(const SparseDesign& x, std::span<const double> targets, Loss loss,
                     double cost) {
    check_targets(x, targets);
    const std::vector<double> zero(x.cols, 0.0);
    const auto grad = smooth_gradient(x, targets, zero, optimal_bias(targets, loss), loss,
                                      Penalty::l1(1.0, cost));
    double m = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) m = std::max(m, std::abs(grad[j]));
    return m;
}

namespace {

// The fit in centered coordinates: theta = [w_0 .. w_{n-1}, c] with
// b = scale * c - mean . w. This is the same problem on centered, rescaled
// columns; the intercept is unpenalized, so w and R(w) are unchanged. Count
// rows share a large common component; without centering it dominates the
// curvature and convergence crawls.
class CenteredProblem {
  public:
    CenteredProblem(const SparseDesign& x, std::span<const double> targets, Loss loss,
                    const Penalty& penalty)
        : f_(x, targets, loss, penalty), x_(x), targets_(targets), loss_(loss), cost_(penalty.cost),
          n_(x.cols), mean_(x.cols, 0.0),
          lambda1_(penalty.kind == Penalty::Kind::L1 ? penalty.lambda : 0.0),
          lambda2_(penalty.kind == Penalty::Kind::L2 ? penalty.lambda : 0.0) {
        const double rows = static_cast<double>(std::max<std::size_t>(1, x.rows()));
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < x.value.size(); ++i) {
            mean_[x.col[i]] += x.value[i] / rows;
            sum_sq += x.value[i] * x.value[i];
        }
        double mean_sq = 0.0;
        for (double m : mean_) mean_sq += m * m;
        scale_ = std::max(1.0, std::sqrt(std::max(0.0, sum_sq / rows - mean_sq)));
    }

    std::size_t size() const noexcept { return n_ + 1; }
    std::size_t weights() const noexcept { return n_; }
    bool l1() const noexcept { return lambda1_ > 0.0; }
    double lambda1() const noexcept { return lambda1_; }

    std::vector<double> start(std::span<const double> targets, Loss loss) const {
        std::vector<double> theta(n_ + 1, 0.0);
        theta[n_] = optimal_bias(targets, loss) / scale_;
        return theta;
    }

    double intercept(std::span<const double> theta) const {
        double shift = 0.0;
        for (std::size_t j = 0; j < n_; ++j) shift += mean_[j] * theta[j];
        return scale_ * theta[n_] - shift;
    }

    double smooth(std::span<const double> theta) const {
        return f_.value(theta.first(n_), intercept(theta));
    }

    double smooth_and_gradient(std::span<const double> theta, std::span<double> grad) {
        const double v = f_.value_and_gradient(theta.first(n_), intercept(theta), grad);
        for (std::size_t j = 0; j < n_; ++j) grad[j] -= mean_[j] * grad[n_];
        grad[n_] *= scale_;
        return v;
    }

    // Per-row second derivative of the loss term, C * loss''(margin), at
    // theta. Squared hinge uses its generalized second derivative.
    std::vector<double> curvature(std::span<const double> theta) const {
        const double b = intercept(theta);
        std::vector<double> d(x_.rows());
        for (std::size_t i = 0; i < x_.rows(); ++i) {
            const double margin = targets_[i] * (x_.row_dot(i, theta.first(n_)) + b);
            if (loss_ == Loss::Logistic) {
                const double p = 1.0 / (1.0 + std::exp(-std::abs(margin)));
                d[i] = cost_ * p * (1.0 - p);
            } else {
                d[i] = margin < 1.0 ? 2.0 * cost_ : 0.0;
            }
        }
        return d;
    }

    // Diagonal of the Hessian.
    std::vector<double> hessian_diagonal(const std::vector<double>& d) const {
        std::vector<double> sq(n_ + 1, 0.0), lin(n_, 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < x_.rows(); ++i) {
            total += d[i];
            for (std::size_t p = x_.row_start[i]; p < x_.row_start[i + 1]; ++p) {
                sq[x_.col[p]] += d[i] * x_.value[p] * x_.value[p];
                lin[x_.col[p]] += d[i] * x_.value[p];
            }
        }
        for (std::size_t j = 0; j < n_; ++j) {
            sq[j] += -2.0 * mean_[j] * lin[j] + mean_[j] * mean_[j] * total + 2.0 * lambda2_;
        }
        sq[n_] = scale_ * scale_ * total;
        return sq;
    }

    // out = H v, where v is zero outside the free set; out is written on the
    // free set only.
    void hessian_vector(const std::vector<double>& d, std::span<const double> v,
                        const std::vector<std::size_t>& free, std::span<double> out) const {
        double shift = 0.0;
        for (std::size_t j : free) {
            if (j < n_) shift += mean_[j] * v[j];
        }
        const double vc = scale_ * v[n_];
        std::vector<double> acc(n_, 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < x_.rows(); ++i) {
            if (d[i] == 0.0) continue;
            const double a = d[i] * (x_.row_dot(i, v.first(n_)) - shift + vc);
            total += a;
            for (std::size_t p = x_.row_start[i]; p < x_.row_start[i + 1]; ++p) {
                acc[x_.col[p]] += a * x_.value[p];
            }
        }
        for (std::size_t j : free) {
            out[j] = j < n_ ? acc[j] - mean_[j] * total + 2.0 * lambda2_ * v[j] : scale_ * total;
        }
    }

    double nonsmooth(std::span<const double> theta) const { return f_.nonsmooth(theta.first(n_)); }
    double total(std::span<const double> theta) const { return smooth(theta) + nonsmooth(theta); }

  private:
    SmoothObjective f_;
    const SparseDesign& x_;
    std::span<const double> targets_;
    Loss loss_;
    double cost_;
    std::size_t n_;
    std::vector<double> mean_;
    double scale_ = 1.0;
    double lambda1_;
    double lambda2_;
};

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double relative_decrease(double before, double after) {
    return (before - after) / std::max(1.0, std::abs(before));
}

void finish(BinaryLinearModel& model, const CenteredProblem& problem,
            const std::vector<double>& theta, double value) {
    const std::size_t n = problem.weights();
    model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(n));
    model.intercept = problem.intercept(theta);
    model.objective = value;
}

void run_proximal(CenteredProblem& problem, std::vector<double> current,
                  const SolverOptions& options, BinaryLinearModel& model) {
    const std::size_t n = problem.weights();
    const bool l1 = problem.l1();
    std::vector<double> previous = current;
    std::vector<double> probe = current;  // extrapolated point y
    std::vector<double> candidate(n + 1);
    std::vector<double> grad(n + 1);

    double lipschitz = 1.0;
    double momentum = 1.0;
    double current_obj = problem.total(current);
    if (options.keep_trace) model.trace.push_back(current_obj);

    bool probe_is_iterate = true;
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        model.iterations = iter;
        const double probe_smooth = problem.smooth_and_gradient(probe, grad);

        // Backtracking on the quadratic upper bound of the smooth part.
        double candidate_smooth = 0.0;
        double step_sq = 0.0;
        // Let the step grow back a little; backtracking restores the bound.
        lipschitz = std::max(lipschitz * 0.8, 1e-12);
        for (;;) {
            const double step = 1.0 / lipschitz;
            for (std::size_t j = 0; j <= n; ++j) candidate[j] = probe[j] - step * grad[j];
            if (l1) {
                const double shrink = step * problem.lambda1();
                for (std::size_t j = 0; j < n; ++j) {
                    const double v = candidate[j];
                    candidate[j] = v > shrink ? v - shrink : (v < -shrink ? v + shrink : 0.0);
                }
            }
            double linear = 0.0;
            step_sq = 0.0;
            for (std::size_t j = 0; j <= n; ++j) {
                const double d = candidate[j] - probe[j];
                linear += grad[j] * d;
                step_sq += d * d;
            }
            candidate_smooth = problem.smooth(candidate);
            const double bound = probe_smooth + linear + 0.5 * lipschitz * step_sq;
            if (candidate_smooth <= bound + 1e-12 * std::abs(bound) || step_sq == 0.0) break;
            lipschitz *= 2.0;
            if (!std::isfinite(lipschitz)) throw FitError("line search failed to find a step size");
        }
        const double candidate_obj = candidate_smooth + problem.nonsmooth(candidate);
        const double mapping_norm = lipschitz * std::sqrt(step_sq);

        // Monotone variant: keep the better of the candidate and the iterate.
        previous = current;
        const double previous_obj = current_obj;
        const bool accepted = candidate_obj <= current_obj;
        if (accepted) {
            current = candidate;
            current_obj = candidate_obj;
        }
        // The mapping norm certifies the iterate only when the step was taken from it.
        const bool certified = accepted || probe_is_iterate;
        // A proximal step from the iterate itself that does not decrease the
        // objective means the iterate is stationary to working precision.
        const bool stalled = !accepted && probe_is_iterate;
        probe_is_iterate = !accepted;
        if (accepted) {
            const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
            for (std::size_t j = 0; j <= n; ++j) {
                probe[j] = current[j] + ((momentum - 1.0) / next_momentum) * (current[j] - previous[j]);
            }
            momentum = next_momentum;
        } else {
            // Objective went up: drop the momentum and restart from the iterate.
            probe = current;
            momentum = 1.0;
        }
        if (options.keep_trace) model.trace.push_back(current_obj);

        const double decrease = relative_decrease(previous_obj, current_obj);
        if (certified && decrease <= options.tol && mapping_norm <= options.grad_tol) {
            model.converged = true;
            break;
        }
        if (stalled || step_sq == 0.0) {
            model.converged = true;
            break;
        }
    }
    finish(model, problem, current, current_obj);
}

// Minimum-norm subgradient of the full objective, given the smooth gradient.
void pseudo_gradient(const CenteredProblem& problem, std::span<const double> theta,
                     std::span<const double> grad, std::span<double> out) {
    std::copy(grad.begin(), grad.end(), out.begin());
    if (!problem.l1()) return;
    const double lambda = problem.lambda1();
    for (std::size_t j = 0; j < problem.weights(); ++j) {
        if (theta[j] > 0.0) {
            out[j] = grad[j] + lambda;
        } else if (theta[j] < 0.0) {
            out[j] = grad[j] - lambda;
        } else if (grad[j] + lambda < 0.0) {
            out[j] = grad[j] + lambda;
        } else if (grad[j] - lambda > 0.0) {
            out[j] = grad[j] - lambda;
        } else {
            out[j] = 0.0;
        }
    }
}

// Approximately solves (H_FF + damping I) d_F = -pg_F by Jacobi-preconditioned
// conjugate gradients, stopping at relative residual `forcing`. Returns the
// ridge actually used.
double newton_direction(const CenteredProblem& problem, const std::vector<double>& d,
                        const std::vector<std::size_t>& free, std::span<const double> pg,
                        double forcing, double damping, int max_steps, std::span<double> dir) {
    const std::size_t dim = problem.size();
    std::vector<double> diag = problem.hessian_diagonal(d);
    std::vector<double> r(dim, 0.0), z(dim, 0.0), p(dim, 0.0), hp(dim, 0.0);
    std::fill(dir.begin(), dir.end(), 0.0);
    double r_norm0 = 0.0;
    for (std::size_t j : free) {
        r[j] = -pg[j];
        r_norm0 += r[j] * r[j];
    }
    r_norm0 = std::sqrt(r_norm0);
    // A tiny ridge keeps the system definite when the loss curvature is rank deficient.
    double ridge = 0.0;
    for (std::size_t j : free) ridge = std::max(ridge, diag[j]);
    ridge = std::max({ridge * 1e-10, damping, 1e-300});
    double rz = 0.0;
    for (std::size_t j : free) {
        z[j] = r[j] / (diag[j] + ridge);
        p[j] = z[j];
        rz += r[j] * z[j];
    }
    for (int step = 0; step < max_steps; ++step) {
        problem.hessian_vector(d, p, free, hp);
        double php = 0.0;
        for (std::size_t j : free) {
            hp[j] += ridge * p[j];
            php += p[j] * hp[j];
        }
        if (!(php > 0.0)) break;
        const double a = rz / php;
        double r_norm = 0.0;
        for (std::size_t j : free) {
            dir[j] += a * p[j];
            r[j] -= a * hp[j];
            r_norm += r[j] * r[j];
        }
        if (std::sqrt(r_norm) <= forcing * r_norm0) break;
        double rz_next = 0.0;
        for (std::size_t j : free) {
            z[j] = r[j] / (diag[j] + ridge);
            rz_next += r[j] * z[j];
        }
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t j : free) p[j] = z[j] + beta * p[j];
    }
    return ridge;
}

void run_newton(CenteredProblem& problem, std::vector<double> current,
                const SolverOptions& options, BinaryLinearModel& model) {
    const std::size_t dim = problem.size();
    const std::size_t n = problem.weights();
    const bool l1 = problem.l1();
    constexpr double kArmijo = 1e-4;
    constexpr int kMaxHalvings = 60;
    const int cg_steps = static_cast<int>(std::min<std::size_t>(dim, 500));

    std::vector<double> grad(dim), pg(dim), dir(dim), orthant(dim), candidate(dim);
    std::vector<std::size_t> free;
    // Levenberg-Marquardt style damping. Under L1 the loss curvature on the
    // free set is rank deficient and undamped steps overshoot badly.
    double damping = 0.0;

    double current_obj = problem.smooth_and_gradient(current, grad) + problem.nonsmooth(current);
    if (options.keep_trace) model.trace.push_back(current_obj);
    pseudo_gradient(problem, current, grad, pg);
    double pg_norm = std::sqrt(dot(pg, pg));
    const double initial_pg_norm = pg_norm;
    if (pg_norm == 0.0) {
        model.converged = true;
        finish(model, problem, current, current_obj);
        return;
    }

    for (int iter = 1; iter <= options.max_iter; ++iter) {
        model.iterations = iter;
        // Free coordinates: nonzero weights, zero weights whose subgradient
        // excludes zero, and the intercept.
        free.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (!l1 || current[j] != 0.0 || pg[j] != 0.0) free.push_back(j);
        }
        free.push_back(n);
        const auto curvature = problem.curvature(current);
        const double forcing = std::min(0.1, std::sqrt(pg_norm / initial_pg_norm));

        bool accepted = false;
        double candidate_obj = current_obj;
        // Newton direction first; if it fails, retry along -pg.
        double ridge = 0.0;
        int halvings = 0;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            const bool steepest = attempt == 1;
            if (steepest) {
                for (std::size_t j = 0; j < dim; ++j) dir[j] = -pg[j];
            } else {
                ridge = newton_direction(problem, curvature, free, pg, forcing, damping, cg_steps, dir);
                // A weight leaves zero only in the direction its subgradient
                // allows; nonzero weights are smooth within their orthant.
                if (l1) {
                    for (std::size_t j = 0; j < n; ++j) {
                        if (current[j] == 0.0 && dir[j] * pg[j] >= 0.0) dir[j] = 0.0;
                    }
                }
                if (!(dot(dir, pg) < 0.0)) continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                orthant[j] = current[j] != 0.0 ? (current[j] > 0.0 ? 1.0 : -1.0)
                                               : (pg[j] < 0.0 ? 1.0 : (pg[j] > 0.0 ? -1.0 : 0.0));
            }
            double step = steepest ? std::min(1.0, 1.0 / pg_norm) : 1.0;
            for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
                for (std::size_t j = 0; j < dim; ++j) candidate[j] = current[j] + step * dir[j];
                // Stay in the orthant of the iterate; crossing zero clips to zero.
                if (l1) {
                    for (std::size_t j = 0; j < n; ++j) {
                        if (candidate[j] * orthant[j] <= 0.0) candidate[j] = 0.0;
                    }
                }
                double predicted = 0.0;
                for (std::size_t j = 0; j < dim; ++j) predicted += pg[j] * (candidate[j] - current[j]);
                candidate_obj = problem.total(candidate);
                if (candidate_obj <= current_obj + kArmijo * predicted && candidate_obj < current_obj) {
                    if (!steepest) halvings = h;
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) {
            // Not even a tiny steepest-descent step decreases the objective:
            // the iterate is stationary to working precision.
            model.converged = true;
            break;
        }

        // Each halving means the step was about twice too long.
        damping = halvings > 1 ? ridge * std::ldexp(1.0, halvings) : damping * 0.25;

        const double decrease = relative_decrease(current_obj, candidate_obj);
        current.swap(candidate);
        current_obj = problem.smooth_and_gradient(current, grad) + problem.nonsmooth(current);
        if (options.keep_trace) model.trace.push_back(current_obj);
        pseudo_gradient(problem, current, grad, pg);
        pg_norm = std::sqrt(dot(pg, pg));
        if (decrease <= options.tol && pg_norm <= options.grad_tol) {
            model.converged = true;
            break;
        }
    }
    finish(model, problem, current, current_obj);
}

}  // namespace

std::string solver_name(SolverMethod method) {
    return method == SolverMethod::Newton ? "newton" : "proximal";
}

SolverMethod parse_solver(const std::string& name) {
    if (name == "newton") return SolverMethod::Newton;
    if (name == "proximal") return SolverMethod::ProximalGradient;
    throw ConfigError("unknown solver '" + name + "' (expected newton or proximal)");
}

BinaryLinearModel fit_binary(const SparseDesign& x, std::span<const double> targets, Loss loss,
                             const Penalty& penalty, const SolverOptions& options) {
    check_penalty(penalty);
    check_targets(x, targets);
    if (!(options.tol > 0.0) || !(options.grad_tol > 0.0) || options.max_iter < 1) {
        throw ConfigError("solver tolerances and max_iter must be positive");
    }

    CenteredProblem problem(x, targets, loss, penalty);
    BinaryLinearModel model;
    model.loss = loss;
    model.penalty = penalty;
    auto start = problem.start(targets, loss);
    if (options.method == SolverMethod::Newton) {
        run_newton(problem, std::move(start), options, model);
    } else {
        run_proximal(problem, std::move(start), options, model);
    }
    return model;
}

OneVsRestModel fit_ovr(const ProfileMatrix& matrix, Loss loss, const Penalty& penalty,
                       const SolverOptions& options, std::size_t workers) {
    if (matrix.size() == 0) throw FitError("cannot fit a model on an empty matrix");
    std::vector<bool> present(matrix.classes.size(), false);
    for (ClassIndex label : matrix.labels) present.at(label) = true;
    const auto distinct = std::count(present.begin(), present.end(), true);
    if (matrix.classes.size() < 2 || distinct < 2) {
        throw FitError("one-vs-rest training requires >= 2 classes");
    }

    OneVsRestModel model;
    model.spec = matrix.spec;
    model.classes = matrix.classes;
    model.loss = loss;
    model.penalty = penalty;
    model.options = options;
    model.features = FeatureIndex::from_profiles(matrix.rows);
    const SparseDesign design = model.features.design(matrix.rows);

    model.models.resize(matrix.classes.size());
    parallel_for(matrix.classes.size(), workers, [&](std::size_t c) {
        if (!present[c]) {
            throw FitError("class '" + matrix.classes[c] + "' has no training rows");
        }
        std::vector<double> targets(matrix.size());
        for (std::size_t r = 0; r < matrix.size(); ++r) {
            targets[r] = matrix.labels[r] == c ? 1.0 : -1.0;
        }
        try {
            model.models[c] = fit_binary(design, targets, loss, penalty, options);
        } catch (const FitError& e) {
            throw FitError("class '" + matrix.classes[c] + "': " + e.what());
        }
    });
    return model;
}

std::vector<double> decision_function(const OneVsRestModel& model, const KmerProfile& profile) {
    if (!(profile.spec == model.spec)) {
        throw ConfigError("profile k=" + std::to_string(profile.spec.k()) +
                          " does not match model k=" + std::to_string(model.spec.k()));
    }
    const auto features = model.features.map(profile);
    std::vector<double> scores(model.models.size());
    for (std::size_t c = 0; c < scores.size(); ++c) scores[c] = model.models[c].decision(features);
    return scores;
}

std::vector<Prediction> predict(const OneVsRestModel& model, const ProfileMatrix& matrix) {
    const std::vector<double> flat(model.classes.size(), 0.0);
    std::vector<Prediction> out;
    out.reserve(matrix.size());
    for (const auto& row : matrix.rows) out.push_back(argmax_scores(decision_function(model, row), flat));
    return out;
}

}  // namespace afc
